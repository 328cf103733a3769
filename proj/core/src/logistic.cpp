#include "dropwarn/logistic.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "dropwarn/error.hpp"

namespace dropwarn {

double LogisticModel::Margin(std::span<const double> x) const {
  double z = intercept;
  for (std::size_t j = 0; j < coef.size(); ++j) {
    if (scale[j] > 0.0) z += coef[j] * (x[j] - mean[j]) / scale[j];
  }
  return z;
}

double LogisticModel::Predict(std::span<const double> x) const {
  if (x.size() != coef.size()) throw Error(ErrorKind::kSchema, "feature width mismatch");
  return Sigmoid(Margin(x));
}

nlohmann::json LogisticModel::ToJson() const {
  return {{"format", "dropwarn-logistic"}, {"version", 1},       {"intercept", intercept},
          {"coef", coef},                  {"mean", mean},       {"scale", scale},
          {"feature_names", feature_names}};
}

LogisticModel LogisticModel::FromJson(const nlohmann::json& doc) {
  if (doc.value("format", "") != "dropwarn-logistic") {
    throw Error(ErrorKind::kSchema, "not a dropwarn logistic model");
  }
  LogisticModel m;
  m.intercept = doc.at("intercept").get<double>();
  m.coef = doc.at("coef").get<std::vector<double>>();
  m.mean = doc.at("mean").get<std::vector<double>>();
  m.scale = doc.at("scale").get<std::vector<double>>();
  m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  if (m.mean.size() != m.coef.size() || m.scale.size() != m.coef.size() ||
      m.feature_names.size() != m.coef.size()) {
    throw Error(ErrorKind::kSchema, "logistic model arrays disagree in width");
  }
  return m;
}

LogisticModel FitLogistic(const Dataset& data, const LogisticConfig& config) {
  const std::size_t n = data.size();
  const std::size_t d = data.width();
  double wpos = 0.0, wall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wall += data.w[i];
    if (data.y[i] == 1) wpos += data.w[i];
  }
  if (!(wpos > 0.0) || !(wall - wpos > 0.0)) {
    throw Error(ErrorKind::kDegenerateData, "training data must contain both classes");
  }

  LogisticModel model;
  model.feature_names = data.feature_names;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 0.0);
  model.coef.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data.x(i, j);
    model.mean[j] = s / static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (data.x(i, j) - model.mean[j]) * (data.x(i, j) - model.mean[j]);
    const double sd = std::sqrt(v / static_cast<double>(n));
    model.scale[j] = sd > 1e-12 * (1.0 + std::abs(model.mean[j])) ? sd : 0.0;
  }
  const double prior = wpos / wall;
  model.intercept = std::log(prior / (1.0 - prior));

  Matrix z(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      z(i, j) = model.scale[j] > 0.0 ? (data.x(i, j) - model.mean[j]) / model.scale[j] : 0.0;

  std::vector<double> grad(d);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = model.intercept;
      auto row = z.row(i);
      for (std::size_t j = 0; j < d; ++j) m += model.coef[j] * row[j];
      const double r = data.w[i] * (Sigmoid(m) - data.y[i]);
      grad_b += r;
      for (std::size_t j = 0; j < d; ++j) grad[j] += r * row[j];
    }
    model.intercept -= config.step * grad_b / wall;
    for (std::size_t j = 0; j < d; ++j) model.coef[j] -= config.step * grad[j] / wall;
  }
  return model;
}

}  // namespace dropwarn
