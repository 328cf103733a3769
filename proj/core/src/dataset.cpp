#include "dropwarn/dataset.hpp"

#include <cmath>

#include "dropwarn/error.hpp"

namespace dropwarn {

Dataset MakeDataset(const std::vector<TrainingPair>& pairs,
                    const std::vector<std::string>& feature_names,
                    const std::vector<std::size_t>* columns) {
  Dataset data;
  const std::size_t width = columns ? columns->size() : feature_names.size();
  data.x = Matrix(pairs.size(), width);
  data.y.reserve(pairs.size());
  data.w.reserve(pairs.size());
  if (columns) {
    for (std::size_t c : *columns) data.feature_names.push_back(feature_names.at(c));
  } else {
    data.feature_names = feature_names;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& f = pairs[i].features;
    if (f.size() != feature_names.size()) {
      throw Error(ErrorKind::kSchema, "pair " + pairs[i].student_id + "@" +
                                          std::to_string(pairs[i].day) +
                                          " has the wrong feature width");
    }
    auto row = data.x.row(i);
    for (std::size_t j = 0; j < width; ++j) row[j] = f[columns ? (*columns)[j] : j];
    data.y.push_back(pairs[i].label);
    data.w.push_back(pairs[i].weight);
  }
  return data;
}

std::vector<double> SelectColumns(std::span<const double> values,
                                  const std::vector<std::size_t>& columns) {
  std::vector<double> out;
  out.reserve(columns.size());
  for (std::size_t c : columns) out.push_back(values[c]);
  return out;
}

double WeightedLogLoss(std::span<const double> margins, std::span<const int> y,
                       std::span<const double> w) {
  double loss = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double z = margins[i];
    // log(1 + exp(-z)) for y = 1, log(1 + exp(z)) for y = 0, computed stably
    const double s = y[i] == 1 ? -z : z;
    const double l = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    loss += w[i] * l;
    total += w[i];
  }
  return total > 0.0 ? loss / total : 0.0;
}

}  // namespace dropwarn
