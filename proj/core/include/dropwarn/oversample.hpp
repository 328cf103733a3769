#pragma once

#include <cstdint>
#include <vector>

#include "dropwarn/labeling.hpp"

namespace dropwarn {

struct SamplerConfig {
  double target_positive_fraction = 0.3;
  std::uint64_t seed = 0;
  // Keep each draw's confidence weight in the loss instead of resetting it to 1.
  bool carry_weights = false;
};

// Number of positive draws m so that m / (|N| + m) is as close to the target
// fraction as an integer allows (at least one).
std::size_t PositiveDrawCount(std::size_t negatives, double target_positive_fraction);

// Returns N unchanged followed by draws with replacement from P and P~, each
// pair picked with probability proportional to its weight. Throws
// kEmptyPositive when there is nothing to draw from.
std::vector<TrainingPair> Oversample(const std::vector<TrainingPair>& positives,
                                     const std::vector<TrainingPair>& pseudo_positives,
                                     const std::vector<TrainingPair>& negatives,
                                     const SamplerConfig& config);

}  // namespace dropwarn
