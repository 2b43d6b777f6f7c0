#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "secvar/matfun.hpp"
#include "secvar/model.hpp"

namespace secvar {

/// Galerkin discretization of the second-variation operator K on
/// piecewise-constant controls: one L²-normalized indicator per (cell, control
/// coordinate), column index = cell·m + coordinate. Coefficients are sampled at
/// cell midpoints and, for non-normalized problems, whitened by (−H)^{−1/2}.
struct GalerkinSystem {
  std::size_t N = 0;
  std::size_t m = 0;
  DenseMatrix form;        // (mN)×(mN), symmetrized causal form
  DenseMatrix constraint;  // d×(mN), v ↦ ∫₀¹ Xₜ v(t) dt
};

/// Naturally ordered two-sided spectrum. `pos` decreases (index n = 1, 2, …);
/// `neg` starts from the most negative eigenvalue and climbs toward zero
/// (index n = −1, −2, …). Multiplicities appear as repeats.
struct SpectrumReport {
  std::vector<double> pos;
  std::vector<double> neg;
  std::size_t N = 0;
};

inline constexpr double kEigenNoiseFloor = 1e-12;

/// Needs m·N > d; resolving the spectrum takes N ≥ 4d, which the config loader enforces.
[[nodiscard]] GalerkinSystem assemble(const Problem& p, std::size_t N);

/// Form restricted to the kernel of the constraint: Bᵀ·form·B for an orthonormal
/// basis B of ker(constraint). The basis is the trailing part of a Householder QR
/// of constraintᵀ, applied in place. Throws NonRegularPointError on a
/// rank-deficient constraint.
[[nodiscard]] DenseMatrix restrict(const GalerkinSystem& sys);
[[nodiscard]] DenseMatrix restrict(GalerkinSystem&& sys);

/// Explicit orthonormal basis of ker(constraint), (mN)×(mN−d). Meant for small systems.
[[nodiscard]] DenseMatrix null_space_basis(const DenseMatrix& constraint);

/// Round-trip check of the blocked Householder kernels of the linked LAPACK/BLAS
/// (QR of a fixed 160×48 matrix). Some optimized BLAS kernels miscompute on
/// certain CPUs; the Galerkin route refuses to run on such a build.
[[nodiscard]] bool lapack_kernels_consistent();

/// Eigenvalues of a symmetric matrix (consumed), split and ordered as a SpectrumReport.
[[nodiscard]] SpectrumReport spectrum_of(DenseMatrix restricted, std::size_t N);

[[nodiscard]] SpectrumReport spectrum(const Problem& p, std::size_t N);

/// Exact spectrum for ẋ = Ax + u with cost ½(|u|² − ⟨x,Rx⟩): for n = 1..n_max the
/// eigenvalues are −s over roots of R·x = s·(A² + (πn)²I)·x.
[[nodiscard]] SpectrumReport closed_spectrum_lti(const DenseMatrix& a, const DenseMatrix& r,
                                                 std::size_t n_max);

struct PvSeries {
  double estimate = 0.0;
  bool converged = true;       // a plateau was found
  std::vector<double> eps;     // decreasing cut-offs
  std::vector<double> partial; // partial sum/product for each cut-off
};

inline constexpr double kPlateauTolerance = 1e-4;
inline constexpr std::size_t kDefaultScheduleSize = 32;

/// Magnitudes of the k-th largest eigenvalue for k spread log-uniformly over
/// 1..count, always ending at the smallest magnitude present.
[[nodiscard]] std::vector<double> default_eps_schedule(const SpectrumReport& rep,
                                                       std::size_t points = kDefaultScheduleSize);

/// Σ_{|α|≥ε} α for each ε in `schedule`.
[[nodiscard]] PvSeries pv_trace(const SpectrumReport& rep, const std::vector<double>& schedule,
                                double plateau_tol = kPlateauTolerance);
/// Π_{|α|≥ε} (1 + α) for each ε in `schedule`.
[[nodiscard]] PvSeries pv_det(const SpectrumReport& rep, const std::vector<double>& schedule,
                              double plateau_tol = kPlateauTolerance);

struct ZetaProfile {
  std::vector<double> t;       // cell midpoints
  std::vector<double> values;  // ζ̄ at the midpoints
  double integral = 0.0;       // ∫₀¹ ζ̄ₜ dt
  bool smoothness_checked = true;  // false for sampled data, where piecewise analyticity is unverifiable
};

/// ζ̄ₜ = sum of the positive eigenvalues of i·(Zₜᵀ J Zₜ) in normalized coordinates.
[[nodiscard]] ZetaProfile zeta_bar(const Problem& p, std::size_t nt);

struct IndexWindow {
  std::size_t lo = 0;  // 1-based, inclusive
  std::size_t hi = 0;
};

struct CapacityEstimate {
  double integral_zeta = 0.0;         // ∫₀¹ ζ̄ₜ dt
  double leading_coefficient = 0.0;   // (1/π)∫ζ̄: αₙ ≈ leading_coefficient / n
  double fitted_slope_pos = 0.0;      // median of π·n·αₙ, n ≥ 1
  double fitted_slope_neg = 0.0;      // median of π·n·αₙ, n ≤ −1 (same sign as ∫ζ̄)
  bool pos_fitted = false;            // branch long enough for the window
  bool neg_fitted = false;
  bool smoothness_checked = true;
  IndexWindow window;
};

/// Default window [N/16, N/8].
[[nodiscard]] IndexWindow default_window(std::size_t N);

/// A branch shorter than the window is finite there: its slope is reported as 0
/// with the fitted flag cleared. Throws RangeError for an empty or inverted
/// window, or when neither branch reaches it.
[[nodiscard]] CapacityEstimate capacity_fit(const SpectrumReport& rep, const ZetaProfile& zeta,
                                            std::optional<IndexWindow> window = std::nullopt);

/// CSV with header `n,alpha,branch`.
void write_spectrum_csv(std::ostream& out, const SpectrumReport& rep);

}  // namespace secvar
