#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "dropwarn/error.hpp"
#include "dropwarn/pca.hpp"
#include "dropwarn/rng.hpp"

using namespace dropwarn;

namespace {

Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.Normal() * (1.0 + c) + 0.3 * m(r, 0);
  return m;
}

}  // namespace

TEST_CASE("diagonal covariance aligns components with axes") {
  // Column 0 has variance 4, column 1 variance 1, and they are uncorrelated.
  Matrix m(4, 2);
  const double a[4][2] = {{2, 0}, {-2, 0}, {0, 1}, {0, -1}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = a[r][c] * std::sqrt(3.0 / 2.0);
  const auto pca = FitPca(m, ComponentTarget::Count(2));
  REQUIRE(pca.output_width() == 2);
  CHECK(pca.explained_variance[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(pca.explained_variance[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pca.components(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(pca.components(0, 1)) < 1e-12);
}

TEST_CASE("perfectly correlated columns keep one component") {
  Matrix m(5, 2);
  for (int r = 0; r < 5; ++r) {
    m(r, 0) = r;
    m(r, 1) = 2.0 * r;
  }
  const auto full = SampleCovariance(m);
  const auto eig = JacobiEigen(full);
  CHECK(std::abs(eig.values[1]) < 1e-12);
  const auto pca = FitPca(m, ComponentTarget::Count(2));
  CHECK(pca.output_width() == 1);
  CHECK(pca.explained_variance[0] == doctest::Approx(full(0, 0) + full(1, 1)));
}

TEST_CASE("random 20x5 matches an independent eigen solver") {
  const auto m = RandomMatrix(20, 5, 42);
  const auto pca = FitPca(m, ComponentTarget::Count(5));
  REQUIRE(pca.output_width() == 5);

  Eigen::MatrixXd x(20, 5);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 5; ++c) x(r, c) = m(r, c);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 19.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  for (int k = 0; k < 5; ++k) {
    const int col = 4 - k;  // Eigen sorts ascending
    CHECK(pca.explained_variance[static_cast<std::size_t>(k)] ==
          doctest::Approx(solver.eigenvalues()(col)).epsilon(1e-9));
    double dot = 0.0;
    for (int c = 0; c < 5; ++c) dot += pca.components(static_cast<std::size_t>(k), static_cast<std::size_t>(c)) * solver.eigenvectors()(c, col);
    const double sign = dot < 0 ? -1.0 : 1.0;
    for (int c = 0; c < 5; ++c) {
      CHECK(std::abs(pca.components(static_cast<std::size_t>(k), static_cast<std::size_t>(c)) -
                     sign * solver.eigenvectors()(c, col)) < 1e-6);
    }
  }
}

TEST_CASE("pca invariants") {
  const auto m = RandomMatrix(30, 4, 7);
  const auto pca = FitPca(m, ComponentTarget::Count(4));
  const auto cov = SampleCovariance(m);

  SUBCASE("orthonormal rows") {
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < 4; ++c) dot += pca.components(i, c) * pca.components(j, c);
        CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
  }
  SUBCASE("variance is preserved at full rank") {
    double trace = 0.0, total = 0.0;
    for (std::size_t c = 0; c < 4; ++c) trace += cov(c, c);
    for (double v : pca.explained_variance) total += v;
    CHECK(std::abs(trace - total) < 1e-6);
  }
  SUBCASE("projected variance equals explained variance") {
    std::vector<double> sum(4, 0.0), sq(4, 0.0);
    for (std::size_t r = 0; r < 30; ++r) {
      const auto p = pca.Project(m.row(r));
      for (std::size_t k = 0; k < 4; ++k) {
        sum[k] += p[k];
        sq[k] += p[k] * p[k];
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const double var = (sq[k] - sum[k] * sum[k] / 30.0) / 29.0;
      CHECK(std::abs(var - pca.explained_variance[k]) < 1e-6);
    }
  }
  SUBCASE("sorted variances and sign convention") {
    for (std::size_t k = 0; k + 1 < 4; ++k)
      CHECK(pca.explained_variance[k] >= pca.explained_variance[k + 1]);
    for (std::size_t k = 0; k < 4; ++k) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < 4; ++c)
        if (std::abs(pca.components(k, c)) > std::abs(pca.components(k, arg))) arg = c;
      CHECK(pca.components(k, arg) > 0.0);
    }
  }
}

TEST_CASE("variance fraction target") {
  const auto m = RandomMatrix(40, 5, 9);
  const auto pca = FitPca(m, ComponentTarget::Fraction(0.8));
  const auto full = FitPca(m, ComponentTarget::Count(5));
  double total = 0.0;
  for (double v : full.explained_variance) total += v;
  double kept = 0.0;
  for (double v : pca.explained_variance) kept += v;
  CHECK(kept / total >= 0.8);
  CHECK((kept - pca.explained_variance.back()) / total < 0.8);
}

TEST_CASE("pca errors and degenerate input") {
  Matrix one(1, 3, 1.0);
  try {
    FitPca(one, ComponentTarget::Count(1));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInsufficientData);
  }
  Matrix constant(6, 3, 2.5);
  const auto pca = FitPca(constant, ComponentTarget::Fraction(0.9));
  CHECK(pca.output_width() == 1);
}

TEST_CASE("fit is deterministic") {
  const auto m = RandomMatrix(25, 6, 1);
  CHECK(FitPca(m, ComponentTarget::Count(3)) == FitPca(m, ComponentTarget::Count(3)));
}
