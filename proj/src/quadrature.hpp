#pragma once

#include <array>
#include <cmath>

namespace secvar::detail {

// Three-stage Gauss–Legendre collocation on the unit cell. `weights` integrate
// over the whole cell; `partial[i][j]` integrates the interpolant through the
// nodes from 0 to nodes[i], which gives cumulative integrals at the nodes with
// local error O(h⁴).
struct GaussLegendre3 {
  static inline const double r15 = std::sqrt(15.0);
  static inline const std::array<double, 3> nodes{0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0};
  static inline const std::array<double, 3> weights{5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
  static inline const std::array<std::array<double, 3>, 3> partial{{
      {5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0},
      {5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0},
      {5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0},
  }};
};

}  // namespace secvar::detail
