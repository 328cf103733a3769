#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dropwarn {

// Row-major dense matrix; just enough for covariance and projections.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigen {
  std::vector<double> values;  // non-increasing
  Matrix vectors;              // row i is the unit eigenvector for values[i]
};

// Cyclic Jacobi rotations on a symmetric matrix. Deterministic for a given
// input; eigenvalues sorted non-increasing, ties kept in column order.
SymmetricEigen JacobiEigen(const Matrix& symmetric, double tolerance = 1e-14,
                           int max_sweeps = 100);

// Number of components to keep: an integer count (>= 1) or a variance fraction in (0, 1].
struct ComponentTarget {
  enum class Mode { kCount, kVarianceFraction };
  Mode mode = Mode::kVarianceFraction;
  double value = 0.95;

  static ComponentTarget Count(std::size_t k) { return {Mode::kCount, static_cast<double>(k)}; }
  static ComponentTarget Fraction(double f) { return {Mode::kVarianceFraction, f}; }

  bool operator==(const ComponentTarget&) const = default;
};

struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // k x d, orthonormal rows
  std::vector<double> explained_variance;

  std::size_t input_width() const { return mean.size(); }
  std::size_t output_width() const { return components.rows(); }

  void Project(std::span<const double> row, std::span<double> out) const;
  std::vector<double> Project(std::span<const double> row) const;

  bool operator==(const PcaModel&) const = default;
};

// Mean-centered sample covariance (n - 1 denominator) eigendecomposition.
// Keeps k = min(requested, numerical rank) components, at least one. Each
// component's largest-magnitude entry is positive.
PcaModel FitPca(const Matrix& rows, ComponentTarget target);

Matrix SampleCovariance(const Matrix& rows, std::vector<double>* mean_out = nullptr);

}  // namespace dropwarn
