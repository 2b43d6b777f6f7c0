#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "secvar/matfun.hpp"

namespace secvar {

/// Default Legendre margin εH: every Hₜ must satisfy λ_max(Hₜ) < −εH.
inline constexpr double kDefaultLegendreMargin = 1e-8;

/// Problem data at one instant: Hₜ (m×m), Yₜ and Xₜ (d×m). Zₜ = (Yₜ; Xₜ).
struct PathSample {
  DenseMatrix H;
  DenseMatrix Y;
  DenseMatrix X;
};

/// Time-dependent coefficients (Hₜ, Yₜ, Xₜ) on [0, 1].
///
/// Sampled paths hold midpoint values of nt uniform cells and interpolate
/// linearly between midpoints (constant beyond the first and last midpoint).
/// Closed-form paths wrap an evaluator. Both are immutable once built.
class CoefficientPath {
 public:
  enum class Kind { sampled, closed_form };
  using Evaluator = std::function<PathSample(double)>;

  /// Validates dimensions, symmetry and negative-definiteness of every H sample.
  static CoefficientPath make_sampled(std::size_t d, std::size_t m, std::vector<DenseMatrix> h,
                                      std::vector<DenseMatrix> y, std::vector<DenseMatrix> x,
                                      double legendre_margin = kDefaultLegendreMargin);

  static CoefficientPath make_closed_form(std::size_t d, std::size_t m, Evaluator evaluator);

  [[nodiscard]] std::size_t d() const noexcept { return d_; }
  [[nodiscard]] std::size_t m() const noexcept { return m_; }
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  /// Number of sampled cells; zero for closed-form paths.
  [[nodiscard]] std::size_t nt() const noexcept { return h_.size(); }

  [[nodiscard]] PathSample at(double t) const;

  [[nodiscard]] const std::vector<DenseMatrix>& h_samples() const noexcept { return h_; }
  [[nodiscard]] const std::vector<DenseMatrix>& y_samples() const noexcept { return y_; }
  [[nodiscard]] const std::vector<DenseMatrix>& x_samples() const noexcept { return x_; }

 private:
  CoefficientPath(std::size_t d, std::size_t m, Kind kind) : d_(d), m_(m), kind_(kind) {}

  std::size_t d_;
  std::size_t m_;
  Kind kind_;
  std::vector<DenseMatrix> h_, y_, x_;
  Evaluator evaluator_;
};

struct Problem {
  CoefficientPath path;
  bool normalized = false;  // Hₜ ≡ −I
  std::string label;
};

/// Substitutes v ↦ (−Hₜ)^{1/2}v: returns a problem with Hₜ = −I and
/// Yₜ, Xₜ replaced by Yₜ(−Hₜ)^{−1/2}, Xₜ(−Hₜ)^{−1/2} at every t.
/// Already-normalized problems are returned unchanged.
[[nodiscard]] Problem normalize(const Problem& p, double legendre_margin = kDefaultLegendreMargin);

/// Harmonic oscillator: d=m=1, H=−1, Y=t·r, X=1.
[[nodiscard]] Problem build_oscillator(double r);

/// Charged particle in a constant magnetic field: d=m=2, H=−I, Y=[[0,r],[−r,0]], X=I.
[[nodiscard]] Problem build_magnetic(double r);

/// Linear system ẋ = Ax + u with cost ½(|u|² − ⟨x, Rx⟩), A and R symmetric.
/// Yₜ = (∫₀ᵗ e^{τA} R e^{τA} dτ)·e^{−tA}, Xₜ = e^{−tA}, evaluated in A's eigenbasis.
[[nodiscard]] Problem build_lti(const DenseMatrix& a, const DenseMatrix& r);

}  // namespace secvar
