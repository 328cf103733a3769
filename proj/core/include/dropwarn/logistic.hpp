#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dropwarn/dataset.hpp"

namespace dropwarn {

struct LogisticConfig {
  int epochs = 300;
  double step = 0.5;
  std::uint64_t seed = 0;  // recorded for manifests; full-batch descent draws nothing
};

// Logistic regression on standardized features (statistics from training data).
struct LogisticModel {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant column
  std::vector<double> coef;
  double intercept = 0.0;
  std::vector<std::string> feature_names;

  double Margin(std::span<const double> x) const;
  double Predict(std::span<const double> x) const;

  nlohmann::json ToJson() const;
  static LogisticModel FromJson(const nlohmann::json& doc);
};

// Full-batch gradient descent on the weighted mean log-loss, starting from the
// prior log-odds intercept and zero slopes.
LogisticModel FitLogistic(const Dataset& data, const LogisticConfig& config);

}  // namespace dropwarn
