#include <cmath>
#include <random>

#include <doctest.h>

#include "secvar/errors.hpp"
#include "secvar/identities.hpp"
#include "secvar/jacobi.hpp"
#include "secvar/model.hpp"
#include "support.hpp"

using namespace secvar;
using secvar::testing::pi;

namespace {

/// Brute-force Σ tr(R(A² + (πn)²)⁻¹) with an independent solve per term.
double trace_series(const DenseMatrix& a, const DenseMatrix& r, std::size_t n_terms) {
  double acc = 0.0;
  const std::size_t m = a.rows();
  for (std::size_t n = 1; n <= n_terms; ++n) {
    const double w = pi * static_cast<double>(n);
    acc += trace(solve(a * a + (w * w) * DenseMatrix::identity(m), r));
  }
  return acc + trace(r) / (pi * pi * static_cast<double>(n_terms));
}

}  // namespace

TEST_CASE("Euler interpolation") {
  const IdentityCheck zero = euler_interp(0.0, pi, 100000);
  CHECK(std::abs(zero.rhs) < 1e-16);
  CHECK(std::abs(zero.lhs) < 1e-4);

  const IdentityCheck both = euler_interp(1.0, 1.0, 100000);
  CHECK(std::abs(both.rhs - std::sin(1.0) / std::sinh(1.0)) < 1e-15);
  CHECK(std::abs(both.rhs - 0.7160) < 1e-4);
  CHECK(both.abs_gap < 1e-4);

  const IdentityCheck b0 = euler_interp(1.0, 0.0, 100000);
  CHECK(std::abs(b0.rhs - 0.8509181282393216) < 1e-14);
  CHECK(b0.abs_gap < 1e-8);

  const IdentityCheck classic = euler_interp(0.0, 1.0, 100000);
  CHECK(std::abs(classic.rhs - std::sin(1.0)) < 1e-15);
  CHECK(classic.abs_gap == std::abs(classic.lhs - classic.rhs));
  CHECK(classic.n_terms == 100000);
  CHECK_THROWS_AS((void)euler_interp(1.0, 1.0, 0), RangeError);
}

TEST_CASE("matrix determinant identity") {
  SUBCASE("R = 0") {
    const IdentityCheck zero = matrix_euler_det(DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 2), 1000);
    CHECK(zero.lhs == 1.0);
    CHECK(std::abs(zero.rhs - 1.0) < 1e-15);
    const IdentityCheck shifted = matrix_euler_det(DenseMatrix{{1, 0.3}, {0.3, -2}}, DenseMatrix::zeros(2, 2), 1000);
    CHECK(std::abs(shifted.lhs - 1.0) < 1e-15);
    CHECK(std::abs(shifted.rhs - 1.0) < 1e-12);
  }
  SUBCASE("scalar reduction") {
    for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}, std::pair{2.0, 0.3}}) {
      const IdentityCheck mat = matrix_euler_det(DenseMatrix{{a}}, DenseMatrix{{a * a + b * b}}, 20000);
      const IdentityCheck sc = euler_interp(a, b, 20000);
      CHECK(std::abs(mat.lhs - sc.lhs) < 1e-12);
      CHECK(std::abs(mat.rhs - sc.rhs) < 1e-12);
    }
  }
  SUBCASE("diagonal pairs are products of scalar identities") {
    const IdentityCheck mat = matrix_euler_det(DenseMatrix{{1, 0}, {0, 2}}, DenseMatrix{{2, 0}, {0, 5}}, 20000);
    const IdentityCheck first = euler_interp(1.0, 1.0, 20000);
    const IdentityCheck second = euler_interp(2.0, 1.0, 20000);
    CHECK(std::abs(mat.rhs - first.rhs * second.rhs) < 1e-12);
    CHECK(std::abs(mat.lhs - first.lhs * second.lhs) < 1e-12);
  }
  SUBCASE("agrees with the Jacobi route on random data") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 6; ++trial) {
      const std::size_t m = 1 + static_cast<std::size_t>(trial % 3);
      const DenseMatrix a = secvar::testing::with_norm(secvar::testing::random_symmetric(m, rng), 3.0 * (trial + 1) / 6.0);
      const DenseMatrix r = secvar::testing::with_norm(secvar::testing::random_symmetric(m, rng), 3.0);
      const IdentityCheck check = matrix_euler_det(a, r, 100000);
      CHECK(std::abs(check.rhs - det_identity(build_lti(a, r), 4096)) < 1e-6);
      CHECK(check.abs_gap < 1e-4);
    }
  }
  CHECK_THROWS_AS((void)matrix_euler_det(DenseMatrix{{0, 1}, {0, 0}}, DenseMatrix::identity(2), 10), SymmetryError);
  CHECK_THROWS_AS((void)matrix_euler_det(DenseMatrix::identity(2), DenseMatrix::identity(3), 10), DimensionError);
}

TEST_CASE("matrix trace identity") {
  SUBCASE("R = 0") {
    const IdentityCheck zero = matrix_euler_trace(DenseMatrix{{0.7}}, DenseMatrix{{0.0}}, 1000, 64);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(matrix_euler_trace_commuting(DenseMatrix{{0.7}}, DenseMatrix{{0.0}}) == 0.0);
  }
  SUBCASE("A = 0 gives the Euler sum r/6") {
    const IdentityCheck c = matrix_euler_trace(DenseMatrix{{0.0}}, DenseMatrix{{3.0}}, 100000, 64);
    CHECK(std::abs(c.lhs - 0.5) < 1e-9);
    CHECK(std::abs(c.rhs - 0.5) < 1e-12);
    CHECK(std::abs(matrix_euler_trace_commuting(DenseMatrix{{0.0}}, DenseMatrix{{3.0}}) - 0.5) < 1e-15);
  }
  SUBCASE("commuting scalars") {
    const double want = 0.5 * (1.0 / std::tanh(1.0) - 1.0);
    const IdentityCheck c = matrix_euler_trace(DenseMatrix{{1.0}}, DenseMatrix{{1.0}}, 100000, 256);
    CHECK(std::abs(c.lhs - want) < 1e-6);
    CHECK(std::abs(c.rhs - want) < 1e-6);
    CHECK(std::abs(want - 0.1565176) < 1e-7);
    CHECK(std::abs(matrix_euler_trace_commuting(DenseMatrix{{1.0}}, DenseMatrix{{2.0}}) - 0.3130353) < 1e-7);
  }
  SUBCASE("commuting matrices: quadrature matches the closed form") {
    const DenseMatrix a{{1, 0}, {0, -2}};
    const DenseMatrix r{{2, 0}, {0, 0.5}};
    const IdentityCheck c = matrix_euler_trace(a, r, 100000, 512);
    CHECK(std::abs(c.rhs - matrix_euler_trace_commuting(a, r)) < 1e-6);
    CHECK(std::abs(c.lhs - matrix_euler_trace_commuting(a, r)) < 1e-6);
  }
  SUBCASE("series matches a brute-force oracle and minus the Jacobi trace") {
    const DenseMatrix a{{1, 0}, {0, 2}};
    const DenseMatrix r{{2, 1}, {1, 3}};
    const IdentityCheck c = matrix_euler_trace(a, r, 20000, 512);
    CHECK(std::abs(c.lhs - trace_series(a, r, 20000)) < 1e-12);
    CHECK(std::abs(c.lhs - c.rhs) < 1e-6);
    CHECK(std::abs(trace_identity(build_lti(a, r), 4096) + c.lhs) < 1e-5);
  }
  CHECK_THROWS_AS((void)matrix_euler_trace_commuting(DenseMatrix{{1, 0}, {0, 2}}, DenseMatrix{{1, 1}, {1, 1}}), CommutativityError);
}

TEST_CASE("tail-corrected series are converged") {
  CHECK(std::abs(euler_interp(1.0, 1.0, 20000).lhs - euler_interp(1.0, 1.0, 10000).lhs) < 1e-6);
  const DenseMatrix a{{1, 0}, {0, 2}};
  const DenseMatrix r{{2, 1}, {1, 3}};
  CHECK(std::abs(matrix_euler_det(a, r, 20000).lhs - matrix_euler_det(a, r, 10000).lhs) < 1e-6);
  CHECK(std::abs(matrix_euler_trace(DenseMatrix{{1.0}}, DenseMatrix{{2.0}}, 20000, 16).lhs -
                 matrix_euler_trace(DenseMatrix{{1.0}}, DenseMatrix{{2.0}}, 10000, 16).lhs) < 1e-6);
}
