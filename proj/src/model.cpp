#include "secvar/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "secvar/errors.hpp"

namespace secvar {

namespace {

void check_legendre(const DenseMatrix& h, double margin, const std::string& where) {
  if (!is_symmetric(h, 1e-10)) throw LegendreViolation("H not symmetric at " + where);
  const SymEigen e = sym_eigen(h);
  if (!(e.values.back() < -margin))
    throw LegendreViolation("H not negative-definite at " + where +
                            ": Legendre condition (largest eigenvalue " +
                            std::to_string(e.values.back()) + ")");
}

DenseMatrix lerp(const DenseMatrix& a, const DenseMatrix& b, double w) {
  DenseMatrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += w * (bd[k] - o[k]);
  return out;
}

// (e^{ct} − 1)/c, continuous at c = 0.
double growth(double c, double t) {
  const double x = c * t;
  if (std::abs(x) < 1e-12) return t * (1.0 + 0.5 * x);
  return std::expm1(x) / c;
}

}  // namespace

CoefficientPath CoefficientPath::make_sampled(std::size_t d, std::size_t m,
                                              std::vector<DenseMatrix> h,
                                              std::vector<DenseMatrix> y,
                                              std::vector<DenseMatrix> x,
                                              double legendre_margin) {
  if (d == 0 || m == 0) throw DimensionError("sampled path: d and m must be positive");
  if (h.empty()) throw DimensionError("sampled path: nt must be positive");
  if (y.size() != h.size() || x.size() != h.size())
    throw DimensionError("sampled path: H, Y, X sample counts differ");
  for (std::size_t i = 0; i < h.size(); ++i) {
    const std::string cell = "cell " + std::to_string(i);
    if (h[i].rows() != m || h[i].cols() != m) throw DimensionError("H is not m x m at " + cell);
    if (y[i].rows() != d || y[i].cols() != m) throw DimensionError("Y is not d x m at " + cell);
    if (x[i].rows() != d || x[i].cols() != m) throw DimensionError("X is not d x m at " + cell);
    for (const DenseMatrix* s : {&h[i], &y[i], &x[i]})
      for (double v : s->data())
        if (!std::isfinite(v)) throw DimensionError("non-finite entry at " + cell);
    check_legendre(h[i], legendre_margin, cell);
  }
  CoefficientPath path(d, m, Kind::sampled);
  path.h_ = std::move(h);
  path.y_ = std::move(y);
  path.x_ = std::move(x);
  return path;
}

CoefficientPath CoefficientPath::make_closed_form(std::size_t d, std::size_t m, Evaluator evaluator) {
  if (d == 0 || m == 0) throw DimensionError("closed-form path: d and m must be positive");
  if (!evaluator) throw DimensionError("closed-form path: empty evaluator");
  CoefficientPath path(d, m, Kind::closed_form);
  path.evaluator_ = std::move(evaluator);
  return path;
}

PathSample CoefficientPath::at(double t) const {
  if (kind_ == Kind::closed_form) return evaluator_(t);
  const std::size_t n = h_.size();
  const double u = t * static_cast<double>(n) - 0.5;
  if (u <= 0.0) return {h_.front(), y_.front(), x_.front()};
  if (u >= static_cast<double>(n - 1)) return {h_.back(), y_.back(), x_.back()};
  const auto i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return {lerp(h_[i], h_[i + 1], w), lerp(y_[i], y_[i + 1], w), lerp(x_[i], x_[i + 1], w)};
}

Problem normalize(const Problem& p, double legendre_margin) {
  if (p.normalized) return p;
  const CoefficientPath& src = p.path;
  const std::size_t m = src.m();

  // Eager check: sampled cells directly, closed-form paths on a validation grid.
  if (src.kind() == CoefficientPath::Kind::closed_form) {
    constexpr int kGrid = 256;
    for (int i = 0; i <= kGrid; ++i) {
      const double t = static_cast<double>(i) / kGrid;
      check_legendre(src.at(t).H, legendre_margin, "t=" + std::to_string(t));
    }
  } else {
    for (std::size_t i = 0; i < src.nt(); ++i)
      check_legendre(src.h_samples()[i], legendre_margin, "cell " + std::to_string(i));
  }

  auto evaluator = [src, m, legendre_margin](double t) {
    PathSample s = src.at(t);
    const SymEigen e = sym_eigen(-s.H);
    if (!(e.values.front() > legendre_margin))
      throw LegendreViolation("H not negative-definite at t=" + std::to_string(t) +
                              ": Legendre condition");
    const DenseMatrix w = sym_apply(e, [](double x) { return 1.0 / std::sqrt(x); });
    return PathSample{-DenseMatrix::identity(m), s.Y * w, s.X * w};
  };
  return Problem{CoefficientPath::make_closed_form(src.d(), m, std::move(evaluator)), true,
                 p.label};
}

Problem build_oscillator(double r) {
  auto evaluator = [r](double t) {
    return PathSample{DenseMatrix{{-1.0}}, DenseMatrix{{t * r}}, DenseMatrix{{1.0}}};
  };
  return Problem{CoefficientPath::make_closed_form(1, 1, evaluator), true,
                 "oscillator r=" + std::to_string(r)};
}

Problem build_magnetic(double r) {
  const PathSample fixed{-DenseMatrix::identity(2), DenseMatrix{{0.0, r}, {-r, 0.0}},
                         DenseMatrix::identity(2)};
  return Problem{CoefficientPath::make_closed_form(2, 2, [fixed](double) { return fixed; }), true,
                 "magnetic r=" + std::to_string(r)};
}

Problem build_lti(const DenseMatrix& a, const DenseMatrix& r) {
  if (!a.is_square() || !r.is_square() || a.rows() != r.rows() || a.rows() == 0)
    throw DimensionError("build_lti: A and R must be square of equal size");
  if (!is_symmetric(a)) throw SymmetryError("build_lti: A is not symmetric");
  if (!is_symmetric(r)) throw SymmetryError("build_lti: R is not symmetric");
  const std::size_t m = a.rows();
  const SymEigen ea = sym_eigen(a);
  const DenseMatrix& v = ea.vectors;
  const DenseMatrix r_eig = v.transpose() * symmetrized(r) * v;
  const std::vector<double> lam = ea.values;

  auto evaluator = [v, r_eig, lam, m](double t) {
    // In A's eigenbasis: (∫₀ᵗe^{τA}Re^{τA}dτ)ᵢⱼ = R̃ᵢⱼ(e^{(λᵢ+λⱼ)t} − 1)/(λᵢ+λⱼ).
    DenseMatrix y_eig(m, m);
    DenseMatrix x_eig(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      const double decay = std::exp(-t * lam[j]);
      x_eig(j, j) = decay;
      for (std::size_t i = 0; i < m; ++i) y_eig(i, j) = r_eig(i, j) * growth(lam[i] + lam[j], t) * decay;
    }
    const DenseMatrix vt = v.transpose();
    return PathSample{-DenseMatrix::identity(m), v * y_eig * vt, v * x_eig * vt};
  };
  return Problem{CoefficientPath::make_closed_form(m, m, std::move(evaluator)), true, "lti"};
}

}  // namespace secvar
