#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "secvar/matfun.hpp"
#include "secvar/model.hpp"

namespace secvar::testing {

inline constexpr double pi = std::numbers::pi;

[[nodiscard]] inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

[[nodiscard]] inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                               double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

[[nodiscard]] inline DenseMatrix random_symmetric(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  const DenseMatrix g = random_matrix(n, n, rng, scale);
  return 0.5 * (g + g.transpose());
}

/// Operator-norm bound via Frobenius, rescaled so that ‖M‖_F = target.
[[nodiscard]] inline DenseMatrix with_norm(DenseMatrix m, double target) {
  const double f = frobenius_norm(m);
  return f > 0.0 ? m * (target / f) : m;
}

/// Sampled problem with smoothly varying, non-constant negative-definite H.
[[nodiscard]] inline Problem random_sampled_problem(std::size_t d, std::size_t m, std::size_t nt,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const DenseMatrix h0 = random_symmetric(m, rng, 0.3);
  const DenseMatrix h1 = random_symmetric(m, rng, 0.3);
  const DenseMatrix y0 = random_matrix(d, m, rng), y1 = random_matrix(d, m, rng);
  const DenseMatrix x0 = random_matrix(d, m, rng), x1 = random_matrix(d, m, rng);
  std::vector<DenseMatrix> h, y, x;
  for (std::size_t k = 0; k < nt; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(nt);
    const double w = std::sin(2.0 * pi * t);
    h.push_back(-(1.5 + 0.5 * w) * DenseMatrix::identity(m) + h0 + t * h1);
    y.push_back(y0 + (2.0 * t) * y1);
    x.push_back(DenseMatrix::identity(m).block(0, 0, d, m) + 0.5 * x0 + (w * 0.3) * x1);
  }
  return {CoefficientPath::make_sampled(d, m, std::move(h), std::move(y), std::move(x)), false,
          "random sampled"};
}

/// Problem with Y ≡ 0 and a time-varying X.
[[nodiscard]] inline Problem uncoupled_problem() {
  return {CoefficientPath::make_closed_form(2, 2,
                                            [](double t) {
                                              return PathSample{-DenseMatrix::identity(2),
                                                                DenseMatrix::zeros(2, 2),
                                                                DenseMatrix{{1.0, t}, {0.0, 1.0 + t * t}}};
                                            }),
          true, "uncoupled"};
}

}  // namespace secvar::testing
