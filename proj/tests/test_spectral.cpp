#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "secvar/errors.hpp"
#include "secvar/jacobi.hpp"
#include "secvar/model.hpp"
#include "secvar/spectral.hpp"
#include "support.hpp"

using namespace secvar;
using secvar::testing::pi;

namespace {

/// ⟨Kv|v⟩ = ∫₀¹⟨JZₜv(t), ∫₀ᵗZτv(τ)dτ⟩dt for v constant on N cells with Z frozen at
/// the midpoints; `coef` holds the L²-normalized coefficients, cell-major.
double direct_form(const Problem& p, std::size_t N, const std::vector<double>& coef) {
  const std::size_t m = p.path.m(), d = p.path.d();
  const double dt = 1.0 / static_cast<double>(N);
  const DenseMatrix J = symplectic_unit(d);
  DenseMatrix running(2 * d, 1);  // ∫₀^{tᵢ} Z v
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const PathSample s = p.path.at((static_cast<double>(i) + 0.5) * dt);
    DenseMatrix z(2 * d, m);
    z.set_block(0, 0, s.Y);
    z.set_block(d, 0, s.X);
    DenseMatrix u(m, 1);
    for (std::size_t k = 0; k < m; ++k) u(k, 0) = coef[i * m + k] * std::sqrt(static_cast<double>(N));
    const DenseMatrix w = z * u;
    // Within the cell the running integral grows along w and ⟨Jw, w⟩ = 0.
    const DenseMatrix jw = J * w;
    for (std::size_t r = 0; r < 2 * d; ++r) total += dt * jw(r, 0) * running(r, 0);
    running += dt * w;
  }
  return total;
}

double quad(const DenseMatrix& a, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) acc += x[i] * a(i, j) * x[j];
  return acc;
}

std::vector<double> times(const DenseMatrix& b, const std::vector<double>& x) {
  std::vector<double> out(b.rows(), 0.0);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out[i] += b(i, j) * x[j];
  return out;
}

}  // namespace

TEST_CASE("assemble") {
  SUBCASE("no coupling gives a zero form") {
    const GalerkinSystem sys = assemble(secvar::testing::uncoupled_problem(), 16);
    CHECK(max_abs(sys.form) == 0.0);
    CHECK(sys.constraint.rows() == 2);
    CHECK(sys.constraint.cols() == 32);
    const SpectrumReport rep = spectrum(secvar::testing::uncoupled_problem(), 16);
    CHECK(rep.pos.empty());
    CHECK(rep.neg.empty());
  }
  SUBCASE("two-cell oscillator by hand") {
    // Midpoints 1/4, 3/4; Z̄₂ᵀJZ̄₁ = −y₂x₁ + x₂y₁ = −1/2, so the off-diagonal entry is 1/8.
    const GalerkinSystem sys = assemble(build_oscillator(1.0), 2);
    CHECK(max_abs(sys.form - DenseMatrix{{0.0, 0.125}, {0.125, 0.0}}) < 1e-15);
    CHECK(max_abs(sys.constraint - DenseMatrix{{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}}) < 1e-15);
    const DenseMatrix b = null_space_basis(sys.constraint);
    REQUIRE(b.cols() == 1);
    CHECK(std::abs(std::abs(b(0, 0)) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(b(0, 0) + b(1, 0)) < 1e-15);
    const DenseMatrix r = restrict(sys);
    REQUIRE(r.rows() == 1);
    CHECK(std::abs(r(0, 0) + 0.125) < 1e-15);
  }
  SUBCASE("magnetic form is antisymmetric off the diagonal blocks") {
    const GalerkinSystem sys = assemble(build_magnetic(1.0), 8);
    CHECK(is_symmetric(sys.form, 1e-14));
    for (std::size_t i = 0; i < 8; ++i) CHECK(max_abs(sys.form.block(2 * i, 2 * i, 2, 2)) == 0.0);
    CHECK(restrict(assemble(build_magnetic(1.0), 8)).rows() == 14);
  }
  CHECK_THROWS_AS((void)assemble(build_magnetic(1.0), 1), RangeError);
}

TEST_CASE("restriction") {
  SUBCASE("null space dimensions and orthonormality") {
    const GalerkinSystem sys = assemble(build_magnetic(1.0), 8);
    const DenseMatrix b = null_space_basis(sys.constraint);
    CHECK(b.rows() == 16);
    CHECK(b.cols() == 14);
    CHECK(max_abs(b.transpose() * b - DenseMatrix::identity(14)) < 1e-12);
    CHECK(max_abs(sys.constraint * b) < 1e-12);
    CHECK(restrict(assemble(build_magnetic(1.0), 2)).rows() == 2);
    CHECK(null_space_basis(assemble(build_magnetic(1.0), 2).constraint).cols() == 2);
  }
  SUBCASE("matches BᵀFB and direct quadrature of the form") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    const Problem problems[] = {build_oscillator(1.0), build_magnetic(0.7),
                                build_lti(DenseMatrix{{1, 0.5}, {0.5, -1}}, DenseMatrix{{2, 1}, {1, 3}})};
    for (const Problem& p : problems) {
      const std::size_t N = 24;
      const GalerkinSystem sys = assemble(p, N);
      const DenseMatrix b = null_space_basis(sys.constraint);
      const DenseMatrix r = restrict(sys);
      CHECK(is_symmetric(r, 1e-12));
      CHECK(max_abs(r - b.transpose() * sys.form * b) < 1e-12);
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(r.rows());
        for (double& v : x) v = g(rng);
        const std::vector<double> v = times(b, x);
        CHECK(std::abs(quad(r, x) - direct_form(p, N, v)) < 1e-10);
      }
    }
  }
  SUBCASE("rank-deficient constraint") {
    const Problem singular{CoefficientPath::make_closed_form(
                               2, 1, [](double) { return PathSample{DenseMatrix{{-1.0}}, DenseMatrix(2, 1), DenseMatrix{{1.0}, {1.0}}}; }),
                           true, "rank one"};
    CHECK_THROWS_AS((void)restrict(assemble(singular, 16)), NonRegularPointError);
  }
  CHECK(lapack_kernels_consistent());
}

TEST_CASE("oscillator spectrum") {
  const SpectrumReport rep = spectrum(build_oscillator(1.0), 1024);
  CHECK(rep.pos.empty());
  REQUIRE(rep.neg.size() >= 8);
  CHECK(std::is_sorted(rep.neg.begin(), rep.neg.end()));
  for (std::size_t k = 1; k <= 8; ++k)
    CHECK(secvar::testing::rel_err(rep.neg[k - 1], -1.0 / (pi * pi * k * k)) < 1e-2);
  CHECK(spectrum(build_oscillator(0.0), 64).neg.empty());
  CHECK(spectrum(build_oscillator(0.0), 64).pos.empty());
}

TEST_CASE("oscillator eigenvalue error decreases with N") {
  double prev = 1.0;
  for (std::size_t N : {256u, 512u, 1024u}) {
    const SpectrumReport rep = spectrum(build_oscillator(1.0), N);
    double err = 0.0;
    for (std::size_t k = 1; k <= 8; ++k)
      err = std::max(err, secvar::testing::rel_err(rep.neg[k - 1], -1.0 / (pi * pi * k * k)));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("magnetic spectrum") {
  const SpectrumReport rep = spectrum(build_magnetic(1.0), 1024);
  REQUIRE(rep.pos.size() >= 1024 / 8);
  REQUIRE(rep.neg.size() >= 1024 / 8);
  CHECK(std::is_sorted(rep.pos.rbegin(), rep.pos.rend()));
  for (std::size_t k = 1; k <= 5; ++k) {
    const double want = 1.0 / (pi * k);
    CHECK(secvar::testing::rel_err(rep.pos[2 * k - 2], want) < 1e-2);
    CHECK(std::abs(rep.pos[2 * k - 2] - rep.pos[2 * k - 1]) < 1e-6);
    CHECK(secvar::testing::rel_err(rep.neg[2 * k - 2], -want) < 1e-2);
    CHECK(std::abs(rep.neg[2 * k - 2] - rep.neg[2 * k - 1]) < 1e-6);
  }
  const PvSeries tr = pv_trace(rep, default_eps_schedule(rep));
  CHECK(std::abs(tr.estimate) < 1e-6);
}

TEST_CASE("closed-form LTI spectrum") {
  SUBCASE("A = 0 reduces to the oscillator") {
    const SpectrumReport rep = closed_spectrum_lti(DenseMatrix{{0.0}}, DenseMatrix{{2.0}}, 6);
    CHECK(rep.pos.empty());
    REQUIRE(rep.neg.size() == 6);
    for (std::size_t n = 1; n <= 6; ++n) CHECK(secvar::testing::rel_err(rep.neg[n - 1], -2.0 / (pi * pi * n * n)) < 1e-13);
  }
  SUBCASE("interpolation data") {
    const double a = 1.3, b = 0.4;
    const SpectrumReport rep = closed_spectrum_lti(DenseMatrix{{a}}, DenseMatrix{{a * a + b * b}}, 5);
    for (std::size_t n = 1; n <= 5; ++n)
      CHECK(secvar::testing::rel_err(rep.neg[n - 1], -(a * a + b * b) / (a * a + pi * pi * n * n)) < 1e-13);
  }
  SUBCASE("diagonal decoupling") {
    const SpectrumReport rep = closed_spectrum_lti(DenseMatrix::zeros(2, 2), DenseMatrix{{1, 0}, {0, 4}}, 40);
    std::vector<double> want;
    for (int n = 1; n <= 40; ++n) {
      want.push_back(-1.0 / (pi * pi * n * n));
      want.push_back(-4.0 / (pi * pi * n * n));
    }
    std::sort(want.begin(), want.end());
    REQUIRE(rep.neg.size() == want.size());
    for (std::size_t k = 0; k < 10; ++k) CHECK(secvar::testing::rel_err(rep.neg[k], want[k]) < 1e-13);
  }
}

TEST_CASE("Galerkin spectrum converges to the closed form for LTI problems") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const DenseMatrix a = secvar::testing::with_norm(secvar::testing::random_symmetric(2, rng), 2.5);
    const DenseMatrix r = secvar::testing::with_norm(secvar::testing::random_symmetric(2, rng), 3.5);
    const SpectrumReport got = spectrum(build_lti(a, r), 1024);
    const SpectrumReport want = closed_spectrum_lti(a, r, 200);
    std::vector<double> g, w;
    for (const auto* rep : {&got, &want}) {
      std::vector<double>& dst = rep == &got ? g : w;
      dst.insert(dst.end(), rep->pos.begin(), rep->pos.end());
      dst.insert(dst.end(), rep->neg.begin(), rep->neg.end());
      std::sort(dst.begin(), dst.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
    }
    REQUIRE(g.size() >= 10);
    for (std::size_t k = 0; k < 10; ++k) CHECK(secvar::testing::rel_err(g[k], w[k]) < 2e-2);
  }
}

TEST_CASE("principal values") {
  SUBCASE("empty report") {
    const SpectrumReport none;
    CHECK(pv_trace(none, default_eps_schedule(none)).estimate == 0.0);
    CHECK(pv_det(none, default_eps_schedule(none)).estimate == 1.0);
  }
  SUBCASE("oscillator") {
    const SpectrumReport rep = spectrum(build_oscillator(1.0), 1024);
    const auto eps = default_eps_schedule(rep);
    CHECK(eps.size() <= kDefaultScheduleSize);
    CHECK(std::is_sorted(eps.rbegin(), eps.rend()));
    const PvSeries tr = pv_trace(rep, eps);
    const PvSeries det = pv_det(rep, eps);
    CHECK(tr.converged);
    CHECK(det.converged);
    CHECK(std::abs(tr.estimate + 1.0 / 6.0) < 1e-3);
    CHECK(std::abs(det.estimate - std::sin(1.0)) < 1e-3);
    CHECK(tr.partial.size() == eps.size());
  }
  SUBCASE("no plateau") {
    SpectrumReport rep;
    for (int n = 1; n <= 40; ++n) rep.pos.push_back(1.0 / n);  // harmonic partial sums diverge
    const PvSeries tr = pv_trace(rep, default_eps_schedule(rep));
    CHECK_FALSE(tr.converged);
  }
  SUBCASE("schedule validation") {
    const SpectrumReport rep{{0.5}, {}, 4};
    CHECK_THROWS_AS((void)pv_trace(rep, {0.1, 0.2}), RangeError);
    CHECK_THROWS_AS((void)pv_det(rep, {0.1, -0.2}), RangeError);
  }
}

TEST_CASE("zeta profile and capacity") {
  SUBCASE("oscillator has zero capacity") {
    const ZetaProfile z = zeta_bar(build_oscillator(1.0), 64);
    for (double v : z.values) CHECK(v == 0.0);
    CHECK(z.integral == 0.0);
    const CapacityEstimate cap = capacity_fit(spectrum(build_oscillator(1.0), 512), z);
    CHECK_FALSE(cap.pos_fitted);
    CHECK(cap.neg_fitted);
    CHECK(std::abs(cap.fitted_slope_neg) < 0.05);
  }
  SUBCASE("magnetic") {
    for (double r : {0.5, 2.0}) {
      const ZetaProfile z = zeta_bar(build_magnetic(r), 64);
      for (double v : z.values) CHECK(std::abs(v - 2 * r) < 1e-14);
      CHECK(std::abs(z.integral - 2 * r) < 1e-14);
    }
    const CapacityEstimate cap = capacity_fit(spectrum(build_magnetic(1.0), 1024), zeta_bar(build_magnetic(1.0), 256));
    CHECK(cap.pos_fitted);
    CHECK(cap.neg_fitted);
    CHECK(cap.window.lo == 64);
    CHECK(cap.window.hi == 128);
    CHECK(std::abs(cap.fitted_slope_pos - 2.0) / 2.0 < 0.05);
    CHECK(std::abs(cap.fitted_slope_neg - 2.0) / 2.0 < 0.05);
    CHECK(std::abs(cap.leading_coefficient - 2.0 / pi) < 1e-12);
  }
  SUBCASE("scalar LTI decays like n⁻²") {
    const Problem p = build_lti(DenseMatrix{{1.0}}, DenseMatrix{{2.0}});
    const ZetaProfile z = zeta_bar(p, 64);
    CHECK(z.integral == 0.0);
    const CapacityEstimate cap = capacity_fit(spectrum(p, 512), z);
    CHECK(std::abs(cap.fitted_slope_neg) < 0.1);
  }
  SUBCASE("sampled data is flagged") {
    CHECK_FALSE(zeta_bar(secvar::testing::random_sampled_problem(2, 3, 16, 3), 16).smoothness_checked);
  }
  SUBCASE("window errors") {
    const SpectrumReport rep = spectrum(build_magnetic(1.0), 64);
    const ZetaProfile z = zeta_bar(build_magnetic(1.0), 16);
    CHECK_THROWS_AS((void)capacity_fit(rep, z, IndexWindow{10, 5}), RangeError);
    CHECK_THROWS_AS((void)capacity_fit(rep, z, IndexWindow{0, 5}), RangeError);
    CHECK_THROWS_AS((void)capacity_fit(rep, z, IndexWindow{500, 600}), RangeError);
  }
}

TEST_CASE("spectrum CSV") {
  const SpectrumReport rep{{0.5, 0.25}, {-0.75}, 8};
  std::ostringstream out;
  write_spectrum_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,alpha,branch");
  std::getline(in, line);
  CHECK(line.rfind("1,", 0) == 0);
  CHECK(line.find(",pos") != std::string::npos);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 2);
  CHECK(rows.back().rfind("-1,-0.75", 0) == 0);
  CHECK(rows.back().find(",neg") != std::string::npos);
}
