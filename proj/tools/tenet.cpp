#include <iostream>

#include "tenet/cli.hpp"

int main(int argc, char** argv) { return tenet::cli::run(argc, argv, {std::cout, std::cerr}); }
