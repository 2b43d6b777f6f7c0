#include "secvar/cli/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>

#include "secvar/identities.hpp"
#include "secvar/jacobi.hpp"
#include "secvar/spectral.hpp"

namespace secvar::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::size_t kHeadLength = 10;
constexpr double kPvTolerance = 1e-3;
constexpr double kRootTolerance = 1e-2;      // relative, root eigenvalue vs nearest Galerkin eigenvalue
constexpr double kClosedSpectrumTolerance = 2e-2;
constexpr double kDetIdentityTolerance = 1e-6;
constexpr double kTraceIdentityTolerance = 1e-5;
constexpr double kClassicalTolerance = 1e-4;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json settings_of(const RunConfig& cfg) {
  const MethodSettings& m = cfg.method;
  json s;
  s["steps"] = m.steps;
  s["N"] = m.N;
  s["n_terms"] = m.n_terms;
  s["nq"] = m.nq;
  s["s_range"] = {m.s_lo, m.s_hi};
  s["s_grid"] = m.s_grid;
  return s;
}

json head(const std::vector<double>& v) {
  return json(std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(v.size(), kHeadLength))));
}

int severity_max(int a, int b) { return std::max(a, b); }

class Emitter {
 public:
  Emitter(const RunConfig& cfg, const RecordSink& sink) : cfg_(cfg), sink_(sink) {}

  void emit(const char* kind, const char* route_name, json payload, const char* status = "ok") {
    json rec;
    rec["kind"] = kind;
    rec["route"] = route_name;
    rec["problem"] = cfg_.problem.label;
    rec["settings"] = settings_of(cfg_);
    rec["payload"] = std::move(payload);
    rec["status"] = status;
    rec["timestamp"] = utc_timestamp();
    ++outcome_.records;
    sink_(rec);
  }

  // Cross-check of `mine` against another route's value; flagged ones are counted.
  json compare(const char* against, double other, double mine, double tolerance, bool relative = false) {
    const double gap = std::abs(mine - other);
    const double scaled = relative ? gap / std::max(std::abs(other), std::numeric_limits<double>::min()) : gap;
    const bool flagged = !(scaled <= tolerance);
    if (flagged) ++outcome_.flagged;
    json c;
    c["against"] = against;
    c["value"] = other;
    c["gap"] = gap;
    c["tolerance"] = tolerance;
    c["relative"] = relative;
    c["flagged"] = flagged;
    return c;
  }

  void fail(const char* route_name, const Error& e) {
    json payload;
    payload["message"] = e.what();
    payload["category"] = category_name(e.category());
    emit("error", route_name, std::move(payload), "failed");
    raise(exit_code_for(e.category()));
  }

  void fail_internal(const char* route_name, const std::exception& e) {
    json payload;
    payload["message"] = e.what();
    payload["category"] = "invariant";
    emit("error", route_name, std::move(payload), "failed");
    raise(3);
  }

  void raise(int code) { outcome_.exit_code = severity_max(outcome_.exit_code, code); }
  [[nodiscard]] RunOutcome outcome() const { return outcome_; }
  [[nodiscard]] const RunConfig& cfg() const { return cfg_; }

 private:
  static const char* category_name(ErrorCategory c) {
    switch (c) {
      case ErrorCategory::validation: return "validation";
      case ErrorCategory::numerical: return "numerical";
      case ErrorCategory::invariant: return "invariant";
    }
    return "invariant";
  }

  const RunConfig& cfg_;
  const RecordSink& sink_;
  RunOutcome outcome_;
};

// Runs `body`, turning a module failure into an error record tagged with the
// route that was active.
template <typename Body>
RunOutcome guarded(Emitter& out, Body&& body) {
  const char* active = route::jacobi;
  try {
    body(active);
  } catch (const Error& e) {
    out.fail(active, e);
  } catch (const std::exception& e) {
    out.fail_internal(active, e);
  }
  return out.outcome();
}

json pv_payload(const PvSeries& pv) {
  json p;
  p["estimate"] = pv.estimate;
  p["converged"] = pv.converged;
  p["eps"] = pv.eps;
  p["partial"] = pv.partial;
  return p;
}

json spectrum_payload(const SpectrumReport& rep, const std::string& csv) {
  json p;
  p["N"] = rep.N;
  p["pos_count"] = rep.pos.size();
  p["neg_count"] = rep.neg.size();
  p["pos_head"] = head(rep.pos);
  p["neg_head"] = head(rep.neg);
  p["csv"] = csv.empty() ? json(nullptr) : json(csv);
  return p;
}

json identity_payload(const IdentityCheck& c) {
  json p;
  p["name"] = c.name;
  p["lhs"] = c.lhs;
  p["rhs"] = c.rhs;
  p["n_terms"] = c.n_terms;
  p["abs_gap"] = c.abs_gap;
  return p;
}

std::optional<double> nearest(const SpectrumReport& rep, double alpha) {
  std::optional<double> best;
  for (const auto* branch : {&rep.pos, &rep.neg})
    for (double a : *branch)
      if (!best || std::abs(a - alpha) < std::abs(*best - alpha)) best = a;
  return best;
}

void emit_roots(Emitter& out, const SpectrumReport* galerkin) {
  const MethodSettings& m = out.cfg().method;
  const RootScan scan = spectrum_via_roots(out.cfg().problem, m.s_lo, m.s_hi, m.steps, m.s_grid);
  json roots = json::array();
  for (const CharRoot& r : scan.roots) {
    json item;
    item["s"] = r.s;
    item["alpha"] = r.alpha;
    item["multiplicity"] = r.multiplicity;
    item["sigma_ratio"] = r.sigma_ratio;
    item["sign_change"] = r.sign_change;
    if (galerkin) {
      if (const auto near = nearest(*galerkin, r.alpha))
        item["compare"] = out.compare(route::galerkin, *near, r.alpha, kRootTolerance, true);
      else
        item["compare"] = nullptr;
    }
    roots.push_back(std::move(item));
  }
  json payload;
  payload["s_range"] = {m.s_lo, m.s_hi};
  payload["grid"] = m.s_grid;
  payload["count"] = scan.roots.size();
  payload["roots"] = std::move(roots);
  payload["edge_advisory"] = scan.edge_advisory;
  out.emit("roots", route::char_fn, std::move(payload));
}

// Closed forms that match the built-in examples: the oscillator's determinant is
// the Euler product at (0, √r) and the magnetic one is its square at (0, r).
void emit_classical(Emitter& out, double jacobi_det) {
  const RunConfig& cfg = out.cfg();
  const std::string& type = cfg.params.type;
  if (type == "oscillator" && cfg.params.r >= 0.0) {
    IdentityCheck c = euler_interp(0.0, std::sqrt(cfg.params.r), cfg.method.n_terms);
    json p = identity_payload(c);
    p["compare"] = out.compare(route::jacobi, jacobi_det, c.rhs, kClassicalTolerance);
    out.emit("identity", route::closed_form, std::move(p));
  } else if (type == "magnetic") {
    const IdentityCheck base = euler_interp(0.0, cfg.params.r, cfg.method.n_terms);
    IdentityCheck c{"euler_interp_squared", base.lhs * base.lhs, base.rhs * base.rhs, base.n_terms, 0.0};
    c.abs_gap = std::abs(c.lhs - c.rhs);
    json p = identity_payload(c);
    p["compare"] = out.compare(route::jacobi, jacobi_det, c.rhs, kClassicalTolerance);
    out.emit("identity", route::closed_form, std::move(p));
  }
}

void emit_configured(Emitter& out) {
  for (const IdentityRequest& req : out.cfg().identities) {
    const IdentityCheck c = euler_interp(req.a, req.b, out.cfg().method.n_terms);
    json p = identity_payload(c);
    p["a"] = req.a;
    p["b"] = req.b;
    out.emit("identity", route::closed_form, std::move(p));
  }
}

void emit_lti(Emitter& out, double jacobi_det, double jacobi_trace, const SpectrumReport* galerkin) {
  const RunConfig& cfg = out.cfg();
  const DenseMatrix& a = cfg.params.a;
  const DenseMatrix& r = cfg.params.r_mat;

  const IdentityCheck det = matrix_euler_det(a, r, cfg.method.n_terms);
  json pd = identity_payload(det);
  pd["compare"] = out.compare(route::jacobi, jacobi_det, det.rhs, kDetIdentityTolerance);
  out.emit("identity", route::closed_form, std::move(pd));

  const IdentityCheck tr = matrix_euler_trace(a, r, cfg.method.n_terms, cfg.method.nq);
  json pt = identity_payload(tr);
  // tr K = −Σ tr(R(A² + (πn)²I)⁻¹).
  pt["compare"] = out.compare(route::jacobi, -jacobi_trace, tr.lhs, kTraceIdentityTolerance);
  out.emit("identity", route::closed_form, std::move(pt));

  try {
    const double comm = matrix_euler_trace_commuting(a, r);
    IdentityCheck c{"matrix_euler_trace_commuting", tr.rhs, comm, tr.n_terms, std::abs(tr.rhs - comm)};
    out.emit("identity", route::closed_form, identity_payload(c));
  } catch (const CommutativityError&) {
    // Only defined for commuting A and R.
  }

  if (galerkin) {
    const SpectrumReport exact = closed_spectrum_lti(a, r, std::max<std::size_t>(cfg.method.N, 16));
    json p = spectrum_payload(exact, "");
    json checks = json::array();
    std::vector<double> mine = galerkin->neg, ref = exact.neg;
    mine.insert(mine.end(), galerkin->pos.begin(), galerkin->pos.end());
    ref.insert(ref.end(), exact.pos.begin(), exact.pos.end());
    auto by_mag = [](double x, double y) { return std::abs(x) > std::abs(y); };
    std::sort(mine.begin(), mine.end(), by_mag);
    std::sort(ref.begin(), ref.end(), by_mag);
    for (std::size_t k = 0; k < std::min({kHeadLength, mine.size(), ref.size()}); ++k)
      checks.push_back(out.compare(route::galerkin, mine[k], ref[k], kClosedSpectrumTolerance, true));
    p["compare_top"] = std::move(checks);
    out.emit("spectrum", route::closed_form, std::move(p));
  }
}

}  // namespace

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::validation: return 1;
    case ErrorCategory::numerical: return 2;
    case ErrorCategory::invariant: return 3;
  }
  return 3;
}

RunOutcome run_report(const RunConfig& cfg, const RecordSink& sink) {
  Emitter out(cfg, sink);
  return guarded(out, [&](const char*& active) {
    const Problem& p = cfg.problem;
    const MethodSettings& m = cfg.method;

    active = route::jacobi;
    const JacobiReport jr = jacobi_report(p, m.steps);
    const FlowState fs = flow(p, 1.0, m.steps);
    json det;
    det["value"] = jr.det_i_plus_k;
    det["det_q1"] = determinant(jr.q1s);
    det["det_gamma1"] = determinant(jr.gamma1);
    det["symplectic_defect"] = symplectic_defect(fs);
    out.emit("det", route::jacobi, std::move(det));
    json tr;
    tr["value"] = jr.tr_k;
    out.emit("trace", route::jacobi, std::move(tr));

    active = route::galerkin;
    const SpectrumReport rep = spectrum(p, m.N);
    if (!cfg.output.spectrum_csv.empty()) {
      std::ofstream csv(cfg.output.spectrum_csv);
      if (!csv) throw ConfigError("cannot write spectrum CSV to " + cfg.output.spectrum_csv);
      write_spectrum_csv(csv, rep);
    }
    out.emit("spectrum", route::galerkin, spectrum_payload(rep, cfg.output.spectrum_csv));

    active = route::galerkin_pv;
    const std::vector<double> schedule = default_eps_schedule(rep);
    const PvSeries pvd = pv_det(rep, schedule);
    json pd = pv_payload(pvd);
    pd["compare"] = out.compare(route::jacobi, jr.det_i_plus_k, pvd.estimate, kPvTolerance);
    if (!pvd.converged) out.raise(2);
    out.emit("det", route::galerkin_pv, std::move(pd), pvd.converged ? "ok" : "inconclusive");
    const PvSeries pvt = pv_trace(rep, schedule);
    json pt = pv_payload(pvt);
    pt["compare"] = out.compare(route::jacobi, jr.tr_k, pvt.estimate, kPvTolerance);
    if (!pvt.converged) out.raise(2);
    out.emit("trace", route::galerkin_pv, std::move(pt), pvt.converged ? "ok" : "inconclusive");

    active = route::galerkin;
    const ZetaProfile zeta = zeta_bar(p, m.N);
    json cap;
    const char* cap_status = "ok";
    try {
      const CapacityEstimate est = capacity_fit(rep, zeta);
      cap["integral_zeta"] = est.integral_zeta;
      cap["leading_coefficient"] = est.leading_coefficient;
      cap["fitted_slope_pos"] = est.fitted_slope_pos;
      cap["fitted_slope_neg"] = est.fitted_slope_neg;
      cap["pos_fitted"] = est.pos_fitted;
      cap["neg_fitted"] = est.neg_fitted;
      cap["window"] = {est.window.lo, est.window.hi};
      cap["smoothness_checked"] = est.smoothness_checked;
    } catch (const RangeError& e) {
      // Too few eigenvalues for the window: finite spectrum, nothing to fit.
      cap["integral_zeta"] = zeta.integral;
      cap["leading_coefficient"] = zeta.integral / std::numbers::pi;
      cap["note"] = e.what();
      cap_status = "unresolved";
    }
    out.emit("capacity", route::galerkin, std::move(cap), cap_status);

    active = route::char_fn;
    emit_roots(out, &rep);

    active = route::closed_form;
    if (cfg.params.type == "lti") emit_lti(out, jr.det_i_plus_k, jr.tr_k, &rep);
    emit_configured(out);
  });
}

RunOutcome run_spectrum(const RunConfig& cfg, const RecordSink& sink, std::ostream& csv) {
  Emitter out(cfg, sink);
  return guarded(out, [&](const char*& active) {
    active = route::galerkin;
    const SpectrumReport rep = spectrum(cfg.problem, cfg.method.N);
    write_spectrum_csv(csv, rep);
    out.emit("spectrum", route::galerkin, spectrum_payload(rep, cfg.output.spectrum_csv));
  });
}

RunOutcome run_identities(const RunConfig& cfg, const RecordSink& sink) {
  Emitter out(cfg, sink);
  return guarded(out, [&](const char*& active) {
    active = route::jacobi;
    const double det = det_identity(cfg.problem, cfg.method.steps);
    const double tr = cfg.params.type == "lti" ? trace_identity(cfg.problem, cfg.method.steps) : 0.0;
    active = route::closed_form;
    emit_classical(out, det);
    if (cfg.params.type == "lti") emit_lti(out, det, tr, nullptr);
    emit_configured(out);
  });
}

RunOutcome run_roots(const RunConfig& cfg, const RecordSink& sink) {
  Emitter out(cfg, sink);
  return guarded(out, [&](const char*& active) {
    active = route::char_fn;
    emit_roots(out, nullptr);
  });
}

std::string to_line(const ReportRecord& record) { return record.dump(); }

void write_table_row(std::ostream& out, const ReportRecord& record) {
  const json& p = record["payload"];
  std::string value;
  for (const char* key : {"value", "estimate", "lhs", "integral_zeta", "count", "N", "message"}) {
    if (!p.contains(key)) continue;
    value = p[key].is_string() ? p[key].get<std::string>() : p[key].dump();
    value = std::string(key) + "=" + value;
    break;
  }
  out << std::left << std::setw(9) << record["kind"].get<std::string>() << ' ' << std::setw(12)
      << record["route"].get<std::string>() << ' ' << std::setw(12) << record["status"].get<std::string>() << ' '
      << value << '\n';
}

}  // namespace secvar::cli
