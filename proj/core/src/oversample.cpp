#include "dropwarn/oversample.hpp"

#include <algorithm>
#include <cmath>

#include "dropwarn/error.hpp"
#include "dropwarn/rng.hpp"

namespace dropwarn {

std::size_t PositiveDrawCount(std::size_t negatives, double target_positive_fraction) {
  if (!(target_positive_fraction > 0.0 && target_positive_fraction <= 0.5)) {
    throw Error(ErrorKind::kDomain, "target positive fraction must lie in (0, 0.5]");
  }
  const double f = target_positive_fraction;
  const double m = f * static_cast<double>(negatives) / (1.0 - f);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m)));
}

std::vector<TrainingPair> Oversample(const std::vector<TrainingPair>& positives,
                                     const std::vector<TrainingPair>& pseudo_positives,
                                     const std::vector<TrainingPair>& negatives,
                                     const SamplerConfig& config) {
  std::vector<const TrainingPair*> pool;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto* set : {&positives, &pseudo_positives}) {
    for (const auto& p : *set) {
      if (p.label != 1) throw Error(ErrorKind::kData, "positive set contains a label-0 pair");
      if (!(p.weight > 0.0)) continue;
      total += p.weight;
      pool.push_back(&p);
      cumulative.push_back(total);
    }
  }
  if (pool.empty()) throw Error(ErrorKind::kEmptyPositive, "no positive pairs to over-sample");

  const std::size_t draws = PositiveDrawCount(negatives.size(), config.target_positive_fraction);
  std::vector<TrainingPair> out;
  out.reserve(negatives.size() + draws);
  out.insert(out.end(), negatives.begin(), negatives.end());

  Rng rng(config.seed);
  for (std::size_t k = 0; k < draws; ++k) {
    const double target = rng.Uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    TrainingPair copy = *pool[static_cast<std::size_t>(it - cumulative.begin())];
    if (!config.carry_weights) copy.weight = 1.0;
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace dropwarn
