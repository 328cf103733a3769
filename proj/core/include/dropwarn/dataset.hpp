#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dropwarn/labeling.hpp"
#include "dropwarn/pca.hpp"

namespace dropwarn {

// Dense design matrix handed to the learners.
struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::vector<double> w;
  std::vector<std::string> feature_names;

  std::size_t size() const { return y.size(); }
  std::size_t width() const { return x.cols(); }
};

// Copies pair features (optionally a column subset, in the given order).
Dataset MakeDataset(const std::vector<TrainingPair>& pairs,
                    const std::vector<std::string>& feature_names,
                    const std::vector<std::size_t>* columns = nullptr);

std::vector<double> SelectColumns(std::span<const double> values,
                                  const std::vector<std::size_t>& columns);

// Weighted mean binary log-loss of margins against labels.
double WeightedLogLoss(std::span<const double> margins, std::span<const int> y,
                       std::span<const double> w);

inline double Sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace dropwarn
