#include "dropwarn/augmentation.hpp"

#include <algorithm>

#include "dropwarn/error.hpp"
#include "dropwarn/features.hpp"

namespace dropwarn {

std::string_view WeightingName(Weighting g) {
  switch (g) {
    case Weighting::kLinear: return "linear";
    case Weighting::kConvex: return "convex";
    case Weighting::kConcave: return "concave";
  }
  return "unknown";
}

std::optional<Weighting> ParseWeighting(std::string_view name) {
  for (auto g : {Weighting::kLinear, Weighting::kConvex, Weighting::kConcave})
    if (WeightingName(g) == name) return g;
  return std::nullopt;
}

double EvaluateWeight(Weighting g, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorKind::kDomain, "weighting input outside [0, 1]");
  switch (g) {
    case Weighting::kLinear: return 1.0 - u;
    case Weighting::kConvex: return (1.0 - u) * (1.0 - u);
    case Weighting::kConcave: return 1.0 - u * u;
  }
  return 0.0;
}

std::vector<int> PseudoDays(const StudentRecord& student, int lookback) {
  if (!student.dropped()) {
    throw Error(ErrorKind::kMisuse,
                "pseudo days requested for non-dropout student " + student.student_id);
  }
  if (lookback < 1) throw Error(ErrorKind::kDomain, "lookback must be >= 1");
  const auto& obs = student.observations;
  const int t_n = obs.back().day;
  const int previous = obs.size() >= 2 ? obs[obs.size() - 2].day : 0;
  const int lower = std::max(previous, t_n - lookback);
  std::vector<int> days;
  for (int d = lower + 1; d < t_n; ++d) days.push_back(d);
  return days;
}

double WeightOf(int day, int dropout_day, int lookback, Weighting g) {
  if (lookback < 1) throw Error(ErrorKind::kDomain, "lookback must be >= 1");
  if (day >= dropout_day || dropout_day - day > lookback) {
    throw Error(ErrorKind::kDomain, "day " + std::to_string(day) +
                                        " is outside the lookback window before day " +
                                        std::to_string(dropout_day));
  }
  const double u = static_cast<double>(dropout_day - day) / static_cast<double>(lookback);
  return EvaluateWeight(g, u);
}

std::vector<TrainingPair> Augment(const Cohort& cohort, const AugmentationConfig& config) {
  if (!config.enabled()) throw Error(ErrorKind::kMisuse, "augmentation is disabled");
  const int lookback = *config.lookback_days;
  std::vector<TrainingPair> out;
  for (const auto& [id, record] : cohort.students) {
    if (!record.dropped()) continue;
    const int t_n = record.last_day();
    for (int d : PseudoDays(record, lookback)) {
      TrainingPair pair;
      pair.student_id = id;
      pair.day = d;
      pair.label = 1;
      pair.weight = WeightOf(d, t_n, lookback, config.weighting);
      pair.provenance = Provenance::kPseudoPositive;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

std::vector<TrainingPair> Augment(const Cohort& cohort, const AugmentationConfig& config,
                                  const FeaturePipeline& pipeline, unsigned workers) {
  auto pairs = Augment(cohort, config);
  FeaturizePairs(pairs, cohort, pipeline, workers);
  return pairs;
}

}  // namespace dropwarn
