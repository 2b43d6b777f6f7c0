#pragma once

#include <cstddef>
#include <string>

#include "secvar/matfun.hpp"

namespace secvar {

/// Both sides of an Euler-type product or sum identity.
struct IdentityCheck {
  std::string name;
  double lhs = 0.0;  // truncated series with first-order tail correction
  double rhs = 0.0;  // closed form
  std::size_t n_terms = 0;
  double abs_gap = 0.0;  // |lhs − rhs|
};

/// Π_{n≥1} (1 − (a²+b²)/(a²+(πn)²)) = a·sin b / (b·sinh a).
/// The product is truncated at n_terms and multiplied by exp(−(a²+b²)/(π²·n_terms)).
[[nodiscard]] IdentityCheck euler_interp(double a, double b, std::size_t n_terms);

/// Π_{n≥1} det(I − R(A² + (πn)²I)⁻¹) = 2ᵐ·det ψ(A² − R) / det(∫₋₁¹ e^{tA} dt),
/// ψ(S) = osc_solution(S, 1). Tail factor exp(−tr R/(π²·n_terms)).
[[nodiscard]] IdentityCheck matrix_euler_det(const DenseMatrix& a, const DenseMatrix& r, std::size_t n_terms);

/// Σ_{n≥1} tr(R(A² + (πn)²I)⁻¹) against
///   tr(∭_{0≤τ₁≤τ₂≤t≤1} e^{(τ₂−2t)A} R e^{(τ₂−2τ₁)A} · (∫₀¹ e^{−2tA} dt)⁻¹),
/// the simplex integral evaluated as three nested cumulative integrals with
/// 3-point Gauss–Legendre collocation on nq cells. Tail term tr R/(π²·n_terms).
[[nodiscard]] IdentityCheck matrix_euler_trace(const DenseMatrix& a, const DenseMatrix& r, std::size_t n_terms,
                                        std::size_t nq);

/// ½·tr(R(A·coth A − I)A⁻²) for commuting A, R; the scalar factor is 1/3 at a=0.
/// Throws CommutativityError when ‖AR − RA‖ > 1e-10·‖A‖·‖R‖.
[[nodiscard]] double matrix_euler_trace_commuting(const DenseMatrix& a, const DenseMatrix& r);

}  // namespace secvar
