#include "secvar/jacobi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "quadrature.hpp"
#include "secvar/errors.hpp"

namespace secvar {

namespace {

using detail::GaussLegendre3;

// (−Hₜ)⁻¹, skipping the inverse for normalized problems.
DenseMatrix neg_h_inverse(const Problem& p, const PathSample& s) {
  if (p.normalized) return DenseMatrix::identity(p.path.m());
  return inverse(-s.H);
}

// Zₜˢ = (sYₜ; Xₜ), a 2d×m matrix.
DenseMatrix stacked_z(const PathSample& smp, double s) {
  const std::size_t d = smp.Y.rows();
  DenseMatrix z(2 * d, smp.Y.cols());
  z.set_block(0, 0, smp.Y * s);
  z.set_block(d, 0, smp.X);
  return z;
}

// Zˢ(−H)⁻¹Zˢᵀ, symmetric positive semidefinite.
DenseMatrix hamiltonian_gram(const Problem& p, double t, double s) {
  const PathSample smp = p.path.at(t);
  const DenseMatrix z = stacked_z(smp, s);
  return z * neg_h_inverse(p, smp) * z.transpose();
}

void require_steps(std::size_t steps, const char* op) {
  if (steps < kMinSteps)
    throw RangeError(std::string(op) + ": steps must be at least " + std::to_string(kMinSteps));
}

// RK4 for Φ' = G(t)·J·Φ with G(t) supplied by `gram_at`.
template <typename GramAt>
DenseMatrix integrate_fundamental(std::size_t d, std::size_t steps, GramAt&& gram_at) {
  const DenseMatrix j = symplectic_unit(d);
  const double h = 1.0 / static_cast<double>(steps);
  DenseMatrix phi = DenseMatrix::identity(2 * d);
  DenseMatrix a0 = gram_at(0.0) * j;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const DenseMatrix amid = gram_at(t + 0.5 * h) * j;
    DenseMatrix a1 = gram_at(t + h) * j;
    const DenseMatrix k1 = a0 * phi;
    const DenseMatrix k2 = amid * (phi + k1 * (0.5 * h));
    const DenseMatrix k3 = amid * (phi + k2 * (0.5 * h));
    const DenseMatrix k4 = a1 * (phi + k3 * h);
    phi += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    a0 = std::move(a1);
  }
  return phi;
}

struct QProbe {
  double det;
  double sigma_ratio;
  std::vector<double> sigmas;
};

// σ_min relative to max(σ_max(Q₁ˢ), scale). The floor `scale` is σ_max(Q₁⁰) = σ_max(Γ₁),
// which keeps the ratio meaningful when Q₁ˢ vanishes entirely (d=1, or the
// magnetic field's complex-scalar Q).
QProbe probe(const Problem& p, double s, std::size_t steps, double scale) {
  const DenseMatrix q = extract_q(flow(p, s, steps));
  std::vector<double> sv = singular_values(q);
  const double ref = std::max(sv.front(), scale);
  return {determinant(q), ref > 0.0 ? sv.back() / ref : 0.0, std::move(sv)};
}

std::size_t kernel_dimension(const std::vector<double>& sv, double scale) {
  const double cutoff = kKernelCutoff * std::max(sv.front(), scale);
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [cutoff](double x) { return x < cutoff; }));
}

template <typename F>
double golden_minimum(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

DenseMatrix gram(const Problem& p, std::size_t nq) {
  if (nq == 0) throw RangeError("gram: nq must be positive");
  const std::size_t d = p.path.d();
  DenseMatrix g(d, d);
  const double h = 1.0 / static_cast<double>(nq);
  for (std::size_t i = 0; i < nq; ++i)
    for (int k = 0; k < 3; ++k) {
      const double t = (static_cast<double>(i) + GaussLegendre3::nodes[k]) * h;
      const PathSample smp = p.path.at(t);
      g += smp.X * neg_h_inverse(p, smp) * smp.X.transpose() * (h * GaussLegendre3::weights[k]);
    }
  g = symmetrized(g, 1e-8);
  const SymEigen e = sym_eigen(g);
  if (!(e.values.front() >= 1e-10 * e.values.back()) || e.values.back() <= 0.0)
    throw NonRegularPointError("Gram matrix is singular (smallest eigenvalue " +
                               std::to_string(e.values.front()) + "): not a regular point");
  return g;
}

FlowState flow(const Problem& p, double s, std::size_t steps) {
  require_steps(steps, "flow");
  DenseMatrix phi = integrate_fundamental(p.path.d(), steps,
                                          [&](double t) { return hamiltonian_gram(p, t, s); });
  return FlowState{std::move(phi), 1.0, s};
}

DenseMatrix extract_q(const FlowState& fs) {
  const std::size_t d = fs.phi.rows() / 2;
  return fs.phi.block(d, 0, d, d);
}

double symplectic_defect(const FlowState& fs) {
  const DenseMatrix j = symplectic_unit(fs.phi.rows() / 2);
  return frobenius_norm(fs.phi.transpose() * j * fs.phi - j);
}

double det_identity(const Problem& p, std::size_t steps) {
  const DenseMatrix g = gram(p, steps);
  const DenseMatrix q = extract_q(flow(p, 1.0, steps));
  return determinant(q) / determinant(g);
}

double trace_identity(const Problem& p, std::size_t steps) {
  require_steps(steps, "trace_identity");
  const std::size_t d = p.path.d();
  const DenseMatrix g_inv = inverse(gram(p, steps));
  const DenseMatrix j = symplectic_unit(d);
  const double h = 1.0 / static_cast<double>(steps);

  DenseMatrix w(2 * d, d);  // ∫₀ᵗ Zτ(−Hτ)⁻¹Xτᵀ dτ at the left cell edge
  double total = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    std::array<DenseMatrix, 3> f;      // Z(−H)⁻¹Xᵀ at the nodes
    std::array<DenseMatrix, 3> left;   // X(−H)⁻¹ZᵀJ at the nodes
    for (int k = 0; k < 3; ++k) {
      const double t = (static_cast<double>(i) + GaussLegendre3::nodes[k]) * h;
      const PathSample smp = p.path.at(t);
      const DenseMatrix z = stacked_z(smp, 1.0);
      const DenseMatrix nhi = neg_h_inverse(p, smp);
      f[k] = z * nhi * smp.X.transpose();
      left[k] = smp.X * nhi * z.transpose() * j;
    }
    for (int k = 0; k < 3; ++k) {
      DenseMatrix wk = w;
      for (int l = 0; l < 3; ++l) wk += f[l] * (h * GaussLegendre3::partial[k][l]);
      total += h * GaussLegendre3::weights[k] * trace(left[k] * wk * g_inv);
    }
    for (int l = 0; l < 3; ++l) w += f[l] * (h * GaussLegendre3::weights[l]);
  }
  return total;
}

double char_fn(const Problem& p, double s, std::size_t steps) {
  return determinant(extract_q(flow(p, s, steps)));
}

JacobiReport jacobi_report(const Problem& p, std::size_t steps, double s) {
  DenseMatrix g = gram(p, steps);
  DenseMatrix q = extract_q(flow(p, s, steps));
  const double q1_det = s == 1.0 ? determinant(q) : char_fn(p, 1.0, steps);
  const double det = q1_det / determinant(g);
  return JacobiReport{std::move(q), std::move(g), det, trace_identity(p, steps), s};
}

RootScan spectrum_via_roots(const Problem& p, double s_lo, double s_hi, std::size_t steps,
                            std::size_t grid) {
  if (!(s_hi > s_lo)) throw RangeError("spectrum_via_roots: empty s interval");
  if (grid < 2) throw RangeError("spectrum_via_roots: grid needs at least 2 cells");
  const double ds = (s_hi - s_lo) / static_cast<double>(grid);
  const double scale = singular_values(extract_q(flow(p, 0.0, steps))).front();
  std::vector<double> svals(grid + 1);
  std::vector<QProbe> probes;
  probes.reserve(grid + 1);
  for (std::size_t k = 0; k <= grid; ++k) {
    svals[k] = s_lo + static_cast<double>(k) * ds;
    probes.push_back(probe(p, svals[k], steps, scale));
  }

  auto det_at = [&](double s) { return char_fn(p, s, steps); };
  auto ratio_at = [&](double s) { return probe(p, s, steps, scale).sigma_ratio; };

  std::vector<std::pair<double, bool>> found;  // (root, bracketed by sign change)
  std::vector<bool> bracketed(grid + 1, false);
  for (std::size_t k = 0; k < grid; ++k) {
    const double fa = probes[k].det;
    const double fb = probes[k + 1].det;
    if (fa == 0.0) {
      found.emplace_back(svals[k], true);
      bracketed[k] = true;
      continue;
    }
    if (fa * fb >= 0.0) continue;
    double a = svals[k], b = svals[k + 1], fl = fa;
    while (b - a > kRootTolerance) {
      const double mid = 0.5 * (a + b);
      const double fm = det_at(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fm < 0.0) == (fl < 0.0)) {
        a = mid;
        fl = fm;
      } else {
        b = mid;
      }
    }
    found.emplace_back(0.5 * (a + b), true);
    bracketed[k] = bracketed[k + 1] = true;
  }

  // Zeros of even multiplicity touch without a sign change.
  for (std::size_t k = 1; k < grid; ++k) {
    const double r = probes[k].sigma_ratio;
    if (r > probes[k - 1].sigma_ratio || r > probes[k + 1].sigma_ratio) continue;
    if (bracketed[k - 1] || bracketed[k] || bracketed[k + 1]) continue;
    const double s = golden_minimum(ratio_at, svals[k - 1], svals[k + 1], kRootTolerance);
    if (ratio_at(s) < kKernelCutoff) found.emplace_back(s, false);
  }

  std::sort(found.begin(), found.end());
  RootScan scan;
  constexpr double kMergeDistance = 1e-6;
  for (std::size_t i = 0; i < found.size();) {
    std::size_t jdx = i + 1;
    while (jdx < found.size() && found[jdx].first - found[jdx - 1].first < kMergeDistance) ++jdx;
    double s = found[i].first;
    bool sign_change = found[i].second;
    if (jdx - i > 1) {
      // A spurious pair of sign changes around a touching zero: refine the minimum.
      s = golden_minimum(ratio_at, found[i].first - kMergeDistance,
                         found[jdx - 1].first + kMergeDistance, kRootTolerance);
      sign_change = (jdx - i) % 2 == 1;
    }
    const QProbe at_root = probe(p, s, steps, scale);
    scan.roots.push_back(CharRoot{s, -1.0 / s, kernel_dimension(at_root.sigmas, scale),
                                  at_root.sigma_ratio, sign_change});
    if (s - s_lo < ds || s_hi - s < ds) scan.edge_advisory = true;
    i = jdx;
  }
  if (probes.front().sigma_ratio < kKernelCutoff || probes.back().sigma_ratio < kKernelCutoff)
    scan.edge_advisory = true;
  return scan;
}

std::vector<PositivitySides> positivity_sides(const Problem& p, double s, std::size_t steps, double h) {
  require_steps(steps, "positivity_sides");
  const std::size_t d = p.path.d();
  const std::size_t n = 2 * d;
  const DenseMatrix j = symplectic_unit(d);
  const double dt = 1.0 / static_cast<double>(steps);

  // State: η (2d) followed by the running integral of |ZᵀJη|²_{(−H)⁻¹}.
  struct Frame {
    DenseMatrix generator;  // s·G·J
    DenseMatrix metric;     // G = Z(−H)⁻¹Zᵀ
  };
  auto frame = [&](double t, double sv) {
    const DenseMatrix g = hamiltonian_gram(p, t, 1.0);
    return Frame{g * j * sv, g};
  };
  auto rhs = [&](const Frame& fr, const std::vector<double>& y) {
    std::vector<double> dy(n + 1, 0.0);
    std::vector<double> jeta(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        dy[r] += fr.generator(r, c) * y[c];
        jeta[r] += j(r, c) * y[c];
      }
    double q = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) q += jeta[r] * fr.metric(r, c) * jeta[c];
    dy[n] = q;
    return dy;
  };
  auto endpoint = [&](double sv, std::size_t col) {
    std::vector<double> y(n + 1, 0.0);
    y[col] = 1.0;
    Frame f0 = frame(0.0, sv);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const Frame fm = frame(t + 0.5 * dt, sv);
      Frame f1 = frame(t + dt, sv);
      auto axpy = [&](const std::vector<double>& a, const std::vector<double>& b, double c) {
        std::vector<double> out(a);
        for (std::size_t r = 0; r < out.size(); ++r) out[r] += c * b[r];
        return out;
      };
      const auto k1 = rhs(f0, y);
      const auto k2 = rhs(fm, axpy(y, k1, 0.5 * dt));
      const auto k3 = rhs(fm, axpy(y, k2, 0.5 * dt));
      const auto k4 = rhs(f1, axpy(y, k3, dt));
      for (std::size_t r = 0; r <= n; ++r) y[r] += dt / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
      f0 = std::move(f1);
    }
    return y;
  };

  std::vector<PositivitySides> out;
  for (std::size_t col = 0; col < d; ++col) {
    const std::vector<double> y0 = endpoint(s, col);
    const std::vector<double> yp = endpoint(s + h, col);
    const std::vector<double> ym = endpoint(s - h, col);
    double lhs = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double jeta = 0.0;
      for (std::size_t c = 0; c < n; ++c) jeta += j(r, c) * y0[c];
      lhs += jeta * (yp[r] - ym[r]) / (2.0 * h);
    }
    out.push_back(PositivitySides{lhs, y0[n]});
  }
  return out;
}

double positivity_defect(const Problem& p, double s, std::size_t steps, double h) {
  double worst = 0.0;
  for (const PositivitySides& sides : positivity_sides(p, s, steps, h))
    worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
  return worst;
}

}  // namespace secvar
