#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dropwarn/event_store.hpp"
#include "dropwarn/labeling.hpp"

namespace dropwarn {

class FeaturePipeline;

// Confidence decay over the normalized time-to-dropout u in [0, 1]:
//   linear  1 - u
//   convex  (1 - u)^2
//   concave 1 - u^2
enum class Weighting { kLinear, kConvex, kConcave };

std::string_view WeightingName(Weighting g);
std::optional<Weighting> ParseWeighting(std::string_view name);

double EvaluateWeight(Weighting g, double u);

struct AugmentationConfig {
  std::optional<int> lookback_days = 7;  // nullopt disables augmentation
  Weighting weighting = Weighting::kConvex;

  bool enabled() const { return lookback_days.has_value(); }
};

// Integer days d with max(t_{n-1}, t_n - lookback) < d < t_n, ascending. With a
// single observation the lower bound is max(0, t_n - lookback).
std::vector<int> PseudoDays(const StudentRecord& student, int lookback);

// G((t_n - d) / lookback). Throws kDomain unless t_n - lookback <= d < t_n.
double WeightOf(int day, int dropout_day, int lookback, Weighting g);

// Pseudo-positive pairs for every dropout student, without features.
std::vector<TrainingPair> Augment(const Cohort& cohort, const AugmentationConfig& config);

// Same, with features assembled by the pipeline.
std::vector<TrainingPair> Augment(const Cohort& cohort, const AugmentationConfig& config,
                                  const FeaturePipeline& pipeline, unsigned workers);

}  // namespace dropwarn
