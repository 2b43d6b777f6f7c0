#include "secvar/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <string>

#include "secvar/errors.hpp"

namespace secvar {

namespace {

// (Y, X) at t in normalized coordinates: right-multiplied by (−H)^{−1/2}.
PathSample whitened(const Problem& p, double t) {
  PathSample s = p.path.at(t);
  if (p.normalized) return s;
  const SymEigen e = sym_eigen(-s.H);
  if (!(e.values.front() > 0.0))
    throw LegendreViolation("H not negative-definite at t=" + std::to_string(t) + ": Legendre condition");
  const DenseMatrix w = sym_apply(e, [](double x) { return 1.0 / std::sqrt(x); });
  return PathSample{-DenseMatrix::identity(s.H.rows()), s.Y * w, s.X * w};
}

lapack_int as_lapack(std::size_t n) { return static_cast<lapack_int>(n); }

// Householder QR of constraintᵀ in column-major storage (the row-major d×n
// constraint buffer is exactly that). Returns the factored buffer and τ.
struct ConstraintQr {
  std::vector<double> factors;
  std::vector<double> tau;
  std::size_t n = 0;
  std::size_t d = 0;
};

ConstraintQr factor_constraint(const DenseMatrix& constraint) {
  const std::size_t d = constraint.rows();
  const std::size_t n = constraint.cols();
  if (d > n) throw DimensionError("constraint has more rows than columns");
  ConstraintQr qr{std::vector<double>(constraint.data().begin(), constraint.data().end()),
                  std::vector<double>(d), n, d};
  if (d == 0) return qr;
  const lapack_int info = LAPACKE_dgeqrf(LAPACK_COL_MAJOR, as_lapack(n), as_lapack(d),
                                         qr.factors.data(), as_lapack(n), qr.tau.data());
  if (info != 0) throw InvariantBreach("dgeqrf failed with info " + std::to_string(info));
  double largest = 0.0;
  for (std::size_t k = 0; k < d; ++k) largest = std::max(largest, std::abs(qr.factors[k + k * n]));
  for (std::size_t k = 0; k < d; ++k)
    if (!(std::abs(qr.factors[k + k * n]) >= 1e-10 * largest) || largest == 0.0)
      throw NonRegularPointError("Galerkin constraint is rank-deficient: not a regular point");
  return qr;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

SpectrumReport split(const std::vector<double>& values, std::size_t N) {
  SpectrumReport rep;
  rep.N = N;
  for (double a : values) {
    if (a >= kEigenNoiseFloor) rep.pos.push_back(a);
    else if (a <= -kEigenNoiseFloor) rep.neg.push_back(a);
  }
  std::sort(rep.pos.begin(), rep.pos.end(), std::greater<>());
  std::sort(rep.neg.begin(), rep.neg.end());
  return rep;
}

std::vector<double> by_magnitude(const SpectrumReport& rep) {
  std::vector<double> all(rep.pos);
  all.insert(all.end(), rep.neg.begin(), rep.neg.end());
  std::stable_sort(all.begin(), all.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  return all;
}

template <typename Accumulate>
PvSeries principal_value(const SpectrumReport& rep, const std::vector<double>& schedule,
                         double plateau_tol, double empty_value, Accumulate&& acc) {
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw RangeError("eps schedule must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw RangeError("eps schedule must decrease");
  }
  PvSeries out;
  out.estimate = empty_value;
  const std::vector<double> all = by_magnitude(rep);
  if (all.empty()) return out;
  out.eps = schedule;
  double running = empty_value;
  std::size_t used = 0;
  for (double eps : schedule) {
    const double cut = eps * (1.0 - 1e-9);
    while (used < all.size() && std::abs(all[used]) >= cut) running = acc(running, all[used++]);
    out.partial.push_back(running);
  }
  out.converged = false;
  out.estimate = out.partial.empty() ? empty_value : out.partial.back();
  for (std::size_t k = out.partial.size(); k-- > 1;) {
    const double cur = out.partial[k];
    if (std::abs(cur - out.partial[k - 1]) < plateau_tol * std::max(std::abs(cur), 1.0)) {
      out.estimate = cur;
      out.converged = true;
      break;
    }
  }
  return out;
}

void require_consistent_kernels() {
  static const bool ok = lapack_kernels_consistent();
  if (!ok)
    throw InvariantBreach(
        "linked LAPACK/BLAS fails a Householder QR round trip; with OpenBLAS try "
        "OPENBLAS_CORETYPE=Haswell");
}

}  // namespace

bool lapack_kernels_consistent() {
  constexpr std::size_t rows = 160;
  constexpr std::size_t cols = 48;
  std::vector<double> a(rows * cols);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::sin(0.7 * static_cast<double>(k) + 0.3) + (k % 7 == 0 ? 1.0 : 0.0);
  std::vector<double> f = a;
  std::vector<double> tau(cols);
  if (LAPACKE_dgeqrf(LAPACK_COL_MAJOR, rows, cols, f.data(), rows, tau.data()) != 0) return false;
  std::vector<double> r(rows * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i <= j; ++i) r[i + j * rows] = f[i + j * rows];
  if (LAPACKE_dormqr(LAPACK_COL_MAJOR, 'L', 'N', rows, cols, cols, f.data(), rows, tau.data(), r.data(),
                     rows) != 0)
    return false;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(r[k] - a[k]));
  return worst < 1e-10;
}

GalerkinSystem assemble(const Problem& p, std::size_t N) {
  const std::size_t d = p.path.d();
  const std::size_t m = p.path.m();
  const std::size_t n = m * N;
  if (n <= d) throw RangeError("assemble: m·N must exceed d = " + std::to_string(d) + " for a non-empty kernel");
  std::vector<DenseMatrix> ys, xs;
  ys.reserve(N);
  xs.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    PathSample s = whitened(p, (static_cast<double>(i) + 0.5) / static_cast<double>(N));
    ys.push_back(std::move(s.Y));
    xs.push_back(std::move(s.X));
  }

  GalerkinSystem sys{N, m, DenseMatrix(n, n), DenseMatrix(d, n)};
  const double root_n = std::sqrt(static_cast<double>(N));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t k = 0; k < d; ++k) sys.constraint(k, i * m + a) = xs[i](k, a) / root_n;

  // Block (i, j) of the symmetrized form is −sign(i−j)·(Z̄ᵢᵀJZ̄ⱼ)/(2N); the
  // within-cell half-area term is antisymmetric and cancels.
  const double scale = 1.0 / (2.0 * static_cast<double>(N));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < i; ++j)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          double g = 0.0;  // (Z̄ᵢᵀ J Z̄ⱼ)(a, b) = −Yᵢᵀ Xⱼ + Xᵢᵀ Yⱼ
          for (std::size_t k = 0; k < d; ++k) g += xs[i](k, a) * ys[j](k, b) - ys[i](k, a) * xs[j](k, b);
          const double v = -g * scale;
          sys.form(i * m + a, j * m + b) = v;
          sys.form(j * m + b, i * m + a) = v;
        }
  return sys;
}

DenseMatrix restrict(const GalerkinSystem& sys) {
  GalerkinSystem copy = sys;
  return restrict(std::move(copy));
}

DenseMatrix restrict(GalerkinSystem&& sys) {
  DenseMatrix s = std::move(sys.form);
  const std::size_t n = s.rows();
  if (!s.is_square() || sys.constraint.cols() != n)
    throw DimensionError("restrict: form and constraint sizes disagree");
  require_consistent_kernels();
  const ConstraintQr qr = factor_constraint(sys.constraint);
  const std::size_t d = qr.d;
  if (d > 0) {
    // The form is symmetric, so its row-major buffer is also its column-major one.
    for (char side : {'L', 'R'}) {
      const lapack_int info =
          LAPACKE_dormqr(LAPACK_COL_MAJOR, side, side == 'L' ? 'T' : 'N', as_lapack(n), as_lapack(n),
                         as_lapack(d), qr.factors.data(), as_lapack(n), qr.tau.data(),
                         s.data().data(), as_lapack(n));
      if (info != 0) throw InvariantBreach("dormqr failed with info " + std::to_string(info));
    }
    s.keep_trailing(d);
  }
  const std::size_t r = s.rows();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

DenseMatrix null_space_basis(const DenseMatrix& constraint) {
  require_consistent_kernels();
  const ConstraintQr qr = factor_constraint(constraint);
  const std::size_t n = qr.n;
  const std::size_t d = qr.d;
  std::vector<double> q(n * n, 0.0);
  std::copy(qr.factors.begin(), qr.factors.end(), q.begin());
  if (d > 0) {
    const lapack_int info = LAPACKE_dorgqr(LAPACK_COL_MAJOR, as_lapack(n), as_lapack(n), as_lapack(d),
                                           q.data(), as_lapack(n), qr.tau.data());
    if (info != 0) throw InvariantBreach("dorgqr failed with info " + std::to_string(info));
  } else {
    for (std::size_t i = 0; i < n; ++i) q[i + i * n] = 1.0;
  }
  DenseMatrix basis(n, n - d);
  for (std::size_t j = d; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) basis(i, j - d) = q[i + j * n];
  return basis;
}

SpectrumReport spectrum_of(DenseMatrix restricted, std::size_t N) {
  if (!restricted.is_square()) throw DimensionError("spectrum_of: matrix is not square");
  const std::size_t n = restricted.rows();
  require_consistent_kernels();
  std::vector<double> w(n);
  if (n > 0) {
    const lapack_int info = LAPACKE_dsyevd_2stage(LAPACK_COL_MAJOR, 'N', 'U', as_lapack(n),
                                                  restricted.data().data(), as_lapack(n), w.data());
    if (info != 0) throw InvariantBreach("dsyevd_2stage failed with info " + std::to_string(info));
  }
  return split(w, N);
}

SpectrumReport spectrum(const Problem& p, std::size_t N) {
  return spectrum_of(restrict(assemble(p, N)), N);
}

SpectrumReport closed_spectrum_lti(const DenseMatrix& a, const DenseMatrix& r, std::size_t n_max) {
  if (!a.is_square() || !r.is_square() || a.rows() != r.rows() || a.rows() == 0)
    throw DimensionError("closed_spectrum_lti: A and R must be square of equal size");
  if (!is_symmetric(a)) throw SymmetryError("closed_spectrum_lti: A is not symmetric");
  if (!is_symmetric(r)) throw SymmetryError("closed_spectrum_lti: R is not symmetric");
  const std::size_t m = a.rows();
  const DenseMatrix a2 = a * a;
  const DenseMatrix rs = symmetrized(r);
  std::vector<double> alphas;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double w = std::numbers::pi * static_cast<double>(n);
    const DenseMatrix l_inv = inverse(sym_sqrt(a2 + DenseMatrix::identity(m) * (w * w)));
    for (double s : sym_eigen(symmetrized(l_inv * rs * l_inv, 1e-8)).values) alphas.push_back(-s);
  }
  return split(alphas, n_max);
}

std::vector<double> default_eps_schedule(const SpectrumReport& rep, std::size_t points) {
  const std::vector<double> all = by_magnitude(rep);
  std::vector<double> eps;
  if (all.empty() || points == 0) return eps;
  const double count = static_cast<double>(all.size());
  std::size_t last = 0;
  for (std::size_t j = 0; j < points; ++j) {
    const double frac = points == 1 ? 1.0 : static_cast<double>(j) / static_cast<double>(points - 1);
    std::size_t idx = static_cast<std::size_t>(std::llround(std::exp(frac * std::log(count))));
    idx = std::clamp<std::size_t>(idx, 1, all.size());
    if (j + 1 == points) idx = all.size();
    if (idx <= last) continue;
    const double e = std::abs(all[idx - 1]);
    if (!eps.empty() && !(e < eps.back())) {
      last = idx;
      continue;
    }
    eps.push_back(e);
    last = idx;
  }
  if (eps.empty() || eps.back() > std::abs(all.back())) eps.push_back(std::abs(all.back()));
  return eps;
}

PvSeries pv_trace(const SpectrumReport& rep, const std::vector<double>& schedule, double plateau_tol) {
  return principal_value(rep, schedule, plateau_tol, 0.0, [](double acc, double a) { return acc + a; });
}

PvSeries pv_det(const SpectrumReport& rep, const std::vector<double>& schedule, double plateau_tol) {
  return principal_value(rep, schedule, plateau_tol, 1.0,
                         [](double acc, double a) { return acc * (1.0 + a); });
}

ZetaProfile zeta_bar(const Problem& p, std::size_t nt) {
  if (nt == 0) throw RangeError("zeta_bar: nt must be positive");
  const std::size_t d = p.path.d();
  const DenseMatrix j = symplectic_unit(d);
  ZetaProfile out;
  out.smoothness_checked = p.path.kind() != CoefficientPath::Kind::sampled;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(nt);
    const PathSample s = whitened(p, t);
    DenseMatrix z(2 * d, s.Y.cols());
    z.set_block(0, 0, s.Y);
    z.set_block(d, 0, s.X);
    DenseMatrix w = z.transpose() * j * z;
    // Exact antisymmetry; rounding in the product is not a property of the data.
    for (std::size_t a = 0; a < w.rows(); ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        const double v = 0.5 * (w(a, b) - w(b, a));
        w(a, b) = v;
        w(b, a) = -v;
      }
    out.t.push_back(t);
    out.values.push_back(antisym_positive_sum(w));
    out.integral += out.values.back() / static_cast<double>(nt);
  }
  return out;
}

IndexWindow default_window(std::size_t N) { return {std::max<std::size_t>(N / 16, 1), std::max<std::size_t>(N / 8, 1)}; }

CapacityEstimate capacity_fit(const SpectrumReport& rep, const ZetaProfile& zeta,
                              std::optional<IndexWindow> window) {
  const IndexWindow w = window.value_or(default_window(rep.N));
  if (w.lo < 1 || w.lo > w.hi)
    throw RangeError("capacity_fit: window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                     "] is empty or not 1-based");
  CapacityEstimate est;
  est.integral_zeta = zeta.integral;
  est.leading_coefficient = zeta.integral / std::numbers::pi;
  est.smoothness_checked = zeta.smoothness_checked;
  est.window = w;
  auto fit = [&](const std::vector<double>& branch, double sign) {
    std::vector<double> slopes;
    for (std::size_t n = w.lo; n <= w.hi; ++n)
      slopes.push_back(std::numbers::pi * sign * static_cast<double>(n) * branch[n - 1]);
    return median(std::move(slopes));
  };
  est.pos_fitted = rep.pos.size() >= w.hi;
  est.neg_fitted = rep.neg.size() >= w.hi;
  if (!est.pos_fitted && !est.neg_fitted)
    throw RangeError("capacity_fit: window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                     "] lies outside both branches (lengths " + std::to_string(rep.pos.size()) + ", " +
                     std::to_string(rep.neg.size()) + ")");
  if (est.pos_fitted) est.fitted_slope_pos = fit(rep.pos, 1.0);
  if (est.neg_fitted) est.fitted_slope_neg = fit(rep.neg, -1.0);
  return est;
}

void write_spectrum_csv(std::ostream& out, const SpectrumReport& rep) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << "n,alpha,branch\n" << std::setprecision(17);
  for (std::size_t k = 0; k < rep.pos.size(); ++k) out << k + 1 << ',' << rep.pos[k] << ",pos\n";
  for (std::size_t k = 0; k < rep.neg.size(); ++k) out << "-" << k + 1 << ',' << rep.neg[k] << ",neg\n";
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace secvar
