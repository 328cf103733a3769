#include "dropwarn/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dropwarn/error.hpp"

namespace dropwarn {

SymmetricEigen JacobiEigen(const Matrix& symmetric, double tolerance, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= tolerance * tolerance * frob || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = a(order[r], order[r]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, order[r]);
  }
  return out;
}

Matrix SampleCovariance(const Matrix& rows, std::vector<double>* mean_out) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += rows(i, j);
  for (auto& m : mean) m /= static_cast<double>(n);

  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dj = rows(i, j) - mean[j];
      for (std::size_t k = j; k < d; ++k) cov(j, k) += dj * (rows(i, k) - mean[k]);
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      cov(j, k) /= denom;
      cov(k, j) = cov(j, k);
    }
  }
  if (mean_out) *mean_out = std::move(mean);
  return cov;
}

PcaModel FitPca(const Matrix& rows, ComponentTarget target) {
  if (rows.rows() < 2) throw Error(ErrorKind::kInsufficientData, "PCA needs at least 2 rows");
  if (rows.cols() < 1) throw Error(ErrorKind::kInsufficientData, "PCA needs at least 1 column");
  for (std::size_t i = 0; i < rows.rows(); ++i)
    for (double x : rows.row(i))
      if (!std::isfinite(x)) throw Error(ErrorKind::kData, "PCA input has non-finite value");
  if (target.mode == ComponentTarget::Mode::kCount && target.value < 1.0)
    throw Error(ErrorKind::kDomain, "component count must be >= 1");
  if (target.mode == ComponentTarget::Mode::kVarianceFraction &&
      (target.value <= 0.0 || target.value > 1.0))
    throw Error(ErrorKind::kDomain, "variance fraction must lie in (0, 1]");

  PcaModel model;
  const Matrix cov = SampleCovariance(rows, &model.mean);
  SymmetricEigen eig = JacobiEigen(cov);
  const std::size_t d = cov.rows();

  for (auto& v : eig.values) v = std::max(v, 0.0);
  const double largest = eig.values.front();
  std::size_t rank = 0;
  for (double v : eig.values)
    if (largest > 0.0 && v > 1e-10 * largest) ++rank;

  std::size_t k = 1;
  if (target.mode == ComponentTarget::Mode::kCount) {
    k = std::min(static_cast<std::size_t>(target.value), rank);
  } else {
    const double total = std::accumulate(eig.values.begin(), eig.values.end(), 0.0);
    double cumulative = 0.0;
    k = 0;
    while (k < rank) {
      cumulative += eig.values[k];
      ++k;
      if (cumulative >= target.value * total * (1.0 - 1e-12)) break;
    }
  }
  k = std::max<std::size_t>(k, 1);

  model.components = Matrix(k, d);
  model.explained_variance.assign(eig.values.begin(), eig.values.begin() + k);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(eig.vectors(r, j)) > std::abs(eig.vectors(r, arg))) arg = j;
    const double sign = eig.vectors(r, arg) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) model.components(r, j) = sign * eig.vectors(r, j);
  }
  return model;
}

void PcaModel::Project(std::span<const double> row, std::span<double> out) const {
  for (std::size_t r = 0; r < components.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) acc += components(r, j) * (row[j] - mean[j]);
    out[r] = acc;
  }
}

std::vector<double> PcaModel::Project(std::span<const double> row) const {
  std::vector<double> out(output_width());
  Project(row, out);
  return out;
}

}  // namespace dropwarn
