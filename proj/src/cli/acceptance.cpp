#include "secvar/cli/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "secvar/errors.hpp"
#include "secvar/identities.hpp"
#include "secvar/jacobi.hpp"
#include "secvar/model.hpp"
#include "secvar/spectral.hpp"

namespace secvar::cli {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kSteps = 4096;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Timer {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Accumulates named checks; the criterion passes when all of them do.
class Checks {
 public:
  void at_most(const std::string& what, double measured, double limit) {
    const bool ok = measured < limit;
    passed_ = passed_ && ok;
    parts_.push_back(what + "=" + sci(measured) + (ok ? " < " : " !< ") + sci(limit));
  }
  void require(const std::string& what, bool ok) {
    passed_ = passed_ && ok;
    parts_.push_back(what + (ok ? " yes" : " NO"));
  }
  [[nodiscard]] bool passed() const { return passed_; }
  [[nodiscard]] std::string detail() const {
    std::string out;
    for (const std::string& p : parts_) out += (out.empty() ? "" : "; ") + p;
    return out;
  }

 private:
  bool passed_ = true;
  std::vector<std::string> parts_;
};

// Smooth random coefficients on 32 cells with a time-varying negative-definite H.
Problem random_sampled_problem() {
  constexpr std::size_t d = 2, m = 3, nt = 32;
  std::mt19937 gen(20240611);
  std::normal_distribution<double> normal;
  auto random = [&](std::size_t r, std::size_t c) {
    DenseMatrix out(r, c);
    for (double& v : out.data()) v = normal(gen);
    return out;
  };
  const DenseMatrix b0 = random(m, m), b1 = random(m, m);
  const DenseMatrix y0 = random(d, m), y1 = random(d, m);
  const DenseMatrix x0 = random(d, m), x1 = random(d, m);
  std::vector<DenseMatrix> h, y, x;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / nt;
    const DenseMatrix b = b0 * std::cos(2.0 * t) + b1 * std::sin(3.0 * t);
    h.push_back(-(b * b.transpose() * 0.3 + DenseMatrix::identity(m) * (0.5 + t)));
    y.push_back(y0 * (0.6 * std::cos(t)) + y1 * (0.4 * t));
    x.push_back(x0 + x1 * (0.5 * std::sin(2.0 * t)));
  }
  return Problem{CoefficientPath::make_sampled(d, m, std::move(h), std::move(y), std::move(x)), false, "random sampled"};
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

const DenseMatrix& lti_a() {
  static const DenseMatrix a{{1.0, 0.0}, {0.0, 2.0}};
  return a;
}
const DenseMatrix& lti_r() {
  static const DenseMatrix r{{2.0, 1.0}, {1.0, 3.0}};
  return r;
}

// Large magnetic spectra are shared between the pairing and capacity checks.
const SpectrumReport& magnetic_spectrum(double r) {
  static std::map<double, SpectrumReport> cache;
  auto it = cache.find(r);
  if (it == cache.end()) it = cache.emplace(r, spectrum(build_magnetic(r), 4096)).first;
  return it->second;
}

void oscillator_det(Checks& c) {
  const Problem p = build_oscillator(1.0);
  const Timer t;
  const double det = det_identity(p, kSteps);
  const double secs = t.seconds();
  c.at_most("|det-sin(1)|", std::abs(det - std::sin(1.0)), 1e-8);
  c.at_most("seconds", secs, 1.0);
}

void oscillator_trace(Checks& c) {
  c.at_most("|tr+1/6|", std::abs(trace_identity(build_oscillator(1.0), kSteps) + 1.0 / 6.0), 1e-8);
}

void oscillator_galerkin(Checks& c) {
  const Timer t;
  const Problem p = build_oscillator(1.0);
  const SpectrumReport small = spectrum(p, 1024);
  double worst = 0.0;
  bool enough = small.neg.size() >= 5;
  for (std::size_t k = 1; enough && k <= 5; ++k) {
    const double exact = -1.0 / (kPi * kPi * static_cast<double>(k * k));
    worst = std::max(worst, std::abs(small.neg[k - 1] - exact) / std::abs(exact));
  }
  c.require("five negative eigenvalues", enough);
  c.at_most("max rel err k<=5 (N=1024)", worst, 1e-2);
  const SpectrumReport large = spectrum(p, 4096);
  const PvSeries pv = pv_det(large, default_eps_schedule(large));
  c.require("pv_det plateau", pv.converged);
  c.at_most("|pv_det-sin(1)| (N=4096)", std::abs(pv.estimate - std::sin(1.0)), 1e-3);
  c.at_most("seconds", t.seconds(), 30.0);
}

void magnetic_pairs(Checks& c) {
  const SpectrumReport& rep = magnetic_spectrum(1.0);
  const bool enough = rep.pos.size() >= 10 && rep.neg.size() >= 10;
  c.require("ten eigenvalues per branch", enough);
  if (!enough) return;
  double pair_gap = 0.0, value_err = 0.0;
  for (std::size_t k = 1; k <= 5; ++k) {
    const double exact = 1.0 / (kPi * static_cast<double>(k));
    const double p0 = rep.pos[2 * k - 2], p1 = rep.pos[2 * k - 1];
    const double n0 = rep.neg[2 * k - 2], n1 = rep.neg[2 * k - 1];
    pair_gap = std::max({pair_gap, std::abs(p0 - p1), std::abs(n0 - n1)});
    for (double v : {p0, p1}) value_err = std::max(value_err, std::abs(v - exact) / exact);
    for (double v : {n0, n1}) value_err = std::max(value_err, std::abs(v + exact) / exact);
  }
  c.at_most("pair gap k<=5", pair_gap, 1e-6);
  c.at_most("rel err vs ±1/(πk)", value_err, 1e-2);
  const std::vector<double> schedule = default_eps_schedule(rep);
  const PvSeries det = pv_det(rep, schedule);
  const PvSeries tr = pv_trace(rep, schedule);
  c.require("pv plateaus", det.converged && tr.converged);
  c.at_most("|pv_det-sin²(1)|", std::abs(det.estimate - std::pow(std::sin(1.0), 2)), 1e-3);
  c.at_most("|pv_trace|", std::abs(tr.estimate), 1e-6);
}

void magnetic_capacity(Checks& c) {
  for (double r : {0.5, 1.0, 2.0}) {
    const Problem p = build_magnetic(r);
    const CapacityEstimate est = capacity_fit(magnetic_spectrum(r), zeta_bar(p, 4096));
    const double target = 2.0 * r;
    const std::string tag = "r=" + sci(r);
    c.at_most(tag + " |∫ζ̄-2r|", std::abs(est.integral_zeta - target), 1e-12);
    c.require(tag + " both branches fitted", est.pos_fitted && est.neg_fitted);
    const double scale = std::max(est.integral_zeta, 0.1);
    c.at_most(tag + " pos slope rel err", std::abs(est.fitted_slope_pos - est.integral_zeta) / scale, 0.05);
    c.at_most(tag + " neg slope rel err", std::abs(est.fitted_slope_neg - est.integral_zeta) / scale, 0.05);
  }
}

void oscillator_roots(Checks& c) {
  const Problem p = build_oscillator(1.0);
  const RootScan scan = spectrum_via_roots(p, 1.0, 50.0, kSteps, 200);
  c.require("roots found", !scan.roots.empty());
  if (scan.roots.empty()) return;
  const CharRoot& first = scan.roots.front();
  c.at_most("|s1-π²|", std::abs(first.s - kPi * kPi), 1e-6);
  c.require("multiplicity 1", first.multiplicity == 1);
  const SpectrumReport rep = spectrum(p, 1024);
  c.require("galerkin eigenvalue present", !rep.neg.empty());
  if (!rep.neg.empty())
    c.at_most("rel gap root vs galerkin", std::abs(first.alpha - rep.neg.front()) / std::abs(rep.neg.front()), 1e-2);
}

void euler_interpolation(Checks& c) {
  const IdentityCheck e = euler_interp(1.0, 1.0, 100000);
  c.at_most("|lhs-sin(1)/sinh(1)|", std::abs(e.lhs - std::sin(1.0) / std::sinh(1.0)), 1e-4);
}

void matrix_det_identity(Checks& c) {
  const IdentityCheck e = matrix_euler_det(lti_a(), lti_r(), 100000);
  c.at_most("|lhs-rhs|", e.abs_gap, 1e-4);
  c.at_most("|rhs-det_identity|", std::abs(e.rhs - det_identity(build_lti(lti_a(), lti_r()), kSteps)), 1e-6);
}

void commuting_trace_identity(Checks& c) {
  const DenseMatrix a{{1.0}}, r{{2.0}};
  const IdentityCheck e = matrix_euler_trace(a, r, 100000, 1000);
  const double closed = matrix_euler_trace_commuting(a, r);
  c.at_most("|series-quadrature|", std::abs(e.lhs - e.rhs), 1e-5);
  c.at_most("|series-closed|", std::abs(e.lhs - closed), 1e-5);
  c.at_most("|quadrature-closed|", std::abs(e.rhs - closed), 1e-5);
  c.at_most("|closed-(coth1-1)|", std::abs(closed - (1.0 / std::tanh(1.0) - 1.0)), 1e-12);
}

void property_suite(Checks& c) {
  const std::vector<Problem> examples{build_oscillator(1.0), build_magnetic(1.0), build_lti(lti_a(), lti_r())};
  double defect = 0.0;
  for (const Problem& p : examples)
    for (int s = -5; s <= 5; ++s) defect = std::max(defect, symplectic_defect(flow(p, s, kSteps)));
  c.at_most("max ‖ΦᵀJΦ-J‖ over s∈[-5,5]", defect, 1e-9);

  double positivity = 0.0;
  for (const Problem& p : examples)
    for (double s : {0.5, 2.0}) positivity = std::max(positivity, positivity_defect(p, s, kSteps));
  c.at_most("max positivity-identity defect", positivity, 1e-6);

  const Problem raw = random_sampled_problem();
  const Problem normal = normalize(raw);
  c.at_most("normalize |Δdet|", std::abs(det_identity(raw, kSteps) - det_identity(normal, kSteps)), 1e-9);
  c.at_most("normalize |Δtrace|", std::abs(trace_identity(raw, kSteps) - trace_identity(normal, kSteps)), 1e-9);
  const SpectrumReport a = spectrum(raw, 256), b = spectrum(normal, 256);
  c.at_most("normalize max |Δα|", std::max(max_gap(a.pos, b.pos), max_gap(a.neg, b.neg)), 1e-9);
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Checks&)> run;
};

}  // namespace

std::string format_result(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s %2d ", r.passed ? "PASS" : "FAIL", r.id);
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.2f s)", r.seconds);
  return std::string(head) + r.title + ": " + r.detail + tail;
}

std::vector<CriterionResult> run_acceptance(std::ostream& progress) {
  const std::vector<Criterion> criteria{
      {1, "oscillator determinant identity", oscillator_det},
      {2, "oscillator trace identity", oscillator_trace},
      {3, "oscillator Galerkin spectrum and principal-value determinant", oscillator_galerkin},
      {4, "magnetic paired spectrum and principal values", magnetic_pairs},
      {5, "magnetic capacity slopes", magnetic_capacity},
      {6, "oscillator characteristic roots", oscillator_roots},
      {7, "Euler interpolation product", euler_interpolation},
      {8, "matrix determinant identity, three routes", matrix_det_identity},
      {9, "commuting trace identity, three routes", commuting_trace_identity},
      {10, "symplecticity, positivity identity, normalize invariance", property_suite},
  };
  std::vector<CriterionResult> results;
  for (const Criterion& cr : criteria) {
    const Timer t;
    Checks checks;
    CriterionResult res;
    res.id = cr.id;
    res.title = cr.title;
    try {
      cr.run(checks);
      res.passed = checks.passed();
      res.detail = checks.detail();
    } catch (const std::exception& e) {
      res.passed = false;
      res.detail = checks.detail() + (checks.detail().empty() ? "" : "; ") + "error: " + e.what();
    }
    res.seconds = t.seconds();
    progress << format_result(res) << std::endl;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace secvar::cli
