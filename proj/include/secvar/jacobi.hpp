#pragma once

#include <cstddef>
#include <vector>

#include "secvar/matfun.hpp"
#include "secvar/model.hpp"

namespace secvar {

/// Fundamental solution Φₜˢ of the parametrized Jacobi system
///   η̇ = −Zₜˢ Hₜ⁻¹ (Zₜˢ)ᵀ J η,   Zₜˢ = (sYₜ; Xₜ),   Φ₀ˢ = I,
/// in (p, q) ordering with J = [[0, −I], [I, 0]].
struct FlowState {
  DenseMatrix phi;
  double t = 1.0;
  double s = 0.0;
};

struct JacobiReport {
  DenseMatrix q1s;      // Q₁ˢ
  DenseMatrix gamma1;   // Γ₁
  double det_i_plus_k;  // det(Q₁¹Γ₁⁻¹)
  double tr_k;
  double s;
};

inline constexpr std::size_t kMinSteps = 16;

/// Γ₁ = −∫₀¹ Xτ Hτ⁻¹ Xτᵀ dτ by composite 3-point Gauss–Legendre on nq cells.
/// Throws NonRegularPointError when λ_min(Γ₁) < 1e-10·λ_max(Γ₁).
[[nodiscard]] DenseMatrix gram(const Problem& p, std::size_t nq);

/// Classical RK4 with fixed step 1/steps from t=0 to t=1.
[[nodiscard]] FlowState flow(const Problem& p, double s, std::size_t steps);

/// Lower-left d×d block of Φ: the q-part of the flow of initial data (p₀, 0).
[[nodiscard]] DenseMatrix extract_q(const FlowState& fs);

/// ‖ΦᵀJΦ − J‖_F.
[[nodiscard]] double symplectic_defect(const FlowState& fs);

/// det(I + K) = det(Q₁Γ₁⁻¹).
[[nodiscard]] double det_identity(const Problem& p, std::size_t steps);

/// tr K = ∫₀¹∫₀ᵗ tr(Xₜ Hₜ⁻¹ ZₜᵀJ Zτ Hτ⁻¹ Xτᵀ Γ₁⁻¹) dτ dt, accumulated in one pass
/// through W(t) = ∫₀ᵗ Zτ(−Hτ)⁻¹Xτᵀ dτ with 3-point Gauss–Legendre collocation.
[[nodiscard]] double trace_identity(const Problem& p, std::size_t steps);

/// det Q₁ˢ = det Γ₁ · det(I + sK).
[[nodiscard]] double char_fn(const Problem& p, double s, std::size_t steps);

[[nodiscard]] JacobiReport jacobi_report(const Problem& p, std::size_t steps, double s = 1.0);

struct CharRoot {
  double s;                   // root of det Q₁ˢ
  double alpha;               // eigenvalue −1/s of K
  std::size_t multiplicity;   // dim ker Q₁ˢ
  double sigma_ratio;         // σ_min(Q₁ˢ)/max(σ_max(Q₁ˢ), σ_max(Γ₁)) at the root
  bool sign_change;           // bracketed by a sign change of det Q₁ˢ
};

struct RootScan {
  std::vector<CharRoot> roots;  // ascending in s
  bool edge_advisory = false;   // a root sits within one grid cell of the interval edge
};

inline constexpr double kRootTolerance = 1e-10;
inline constexpr double kKernelCutoff = 1e-6;

/// Real roots of s ↦ det Q₁ˢ on [s_lo, s_hi]: sign changes are bisected,
/// touching zeros (even multiplicity) are found as minima of σ_min/σ_max.
[[nodiscard]] RootScan spectrum_via_roots(const Problem& p, double s_lo, double s_hi,
                                          std::size_t steps, std::size_t grid);

struct PositivitySides {
  double lhs;  // ⟨Jηˢ(1), ∂ₛηˢ(1)⟩ by central differences
  double rhs;  // ∫₀¹ |Zₜᵀ J ηˢ(t)|² dt along the trajectory
};

/// Both sides for initial data (eᵢ, 0), i = 0..d−1, of η̇ = s·Z(−H)⁻¹ZᵀJη.
[[nodiscard]] std::vector<PositivitySides> positivity_sides(const Problem& p, double s, std::size_t steps,
                                                    double h = 1e-5);

/// max over basis initial data of |lhs − rhs|.
[[nodiscard]] double positivity_defect(const Problem& p, double s, std::size_t steps, double h = 1e-5);

}  // namespace secvar
