#pragma once

#include <string>
#include <vector>

#include "tenet/numerics.hpp"

namespace tenet {

/// One regression unit: a day's head segment and that day's full total.
struct Sample {
  RealVec x;
  double y = 0.0;
  std::string source;
  std::string date;
  int group = -1;  // e.g. exemplar index for synthetic data; -1 when unused
};

using SampleSet = std::vector<Sample>;

struct Folds {
  SampleSet train;
  SampleSet val;
  SampleSet test;
};

}  // namespace tenet
