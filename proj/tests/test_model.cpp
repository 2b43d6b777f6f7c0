#include <cmath>

#include <doctest.h>

#include "secvar/errors.hpp"
#include "secvar/jacobi.hpp"
#include "secvar/model.hpp"
#include "secvar/spectral.hpp"
#include "support.hpp"

using namespace secvar;

TEST_CASE("oscillator path") {
  const PathSample s = build_oscillator(1.0).path.at(0.5);
  CHECK(s.H == DenseMatrix{{-1.0}});
  CHECK(s.Y(0, 0) == doctest::Approx(0.5));
  CHECK(s.X == DenseMatrix{{1.0}});
  CHECK(build_oscillator(-1.0).path.at(1.0).Y(0, 0) == doctest::Approx(-1.0));
  for (double t : {0.0, 0.3, 1.0}) CHECK(build_oscillator(0.0).path.at(t).Y(0, 0) == 0.0);
  CHECK(build_oscillator(1.0).normalized);
}

TEST_CASE("magnetic path") {
  for (double t : {0.0, 0.4, 1.0}) {
    const PathSample s = build_magnetic(1.0).path.at(t);
    CHECK(s.Y == DenseMatrix{{0, 1}, {-1, 0}});
    CHECK(s.X == DenseMatrix::identity(2));
    CHECK(s.H == -DenseMatrix::identity(2));
    CHECK(max_abs(build_magnetic(0.0).path.at(t).Y) == 0.0);
  }
}

TEST_CASE("lti path") {
  SUBCASE("A = 0 recovers the oscillator") {
    const Problem lti = build_lti(DenseMatrix{{0.0}}, DenseMatrix{{1.7}});
    const Problem osc = build_oscillator(1.7);
    for (int k = 0; k <= 64; ++k) {
      const double t = k / 64.0;
      const PathSample a = lti.path.at(t), b = osc.path.at(t);
      CHECK(std::abs(a.Y(0, 0) - b.Y(0, 0)) < 1e-12);
      CHECK(std::abs(a.X(0, 0) - b.X(0, 0)) < 1e-12);
      CHECK(std::abs(a.H(0, 0) - b.H(0, 0)) < 1e-12);
    }
  }
  SUBCASE("R = 0") {
    const Problem p = build_lti(DenseMatrix{{0.8}}, DenseMatrix{{0.0}});
    for (double t : {0.0, 0.5, 1.0}) {
      CHECK(p.path.at(t).Y(0, 0) == 0.0);
      CHECK(std::abs(p.path.at(t).X(0, 0) - std::exp(-0.8 * t)) < 1e-15);
    }
  }
  SUBCASE("scalar integral") {
    // Y₁ = (∫₀¹ e^{2τ} dτ)·e^{−1}: the integral is (e²−1)/2.
    const PathSample s = build_lti(DenseMatrix{{1.0}}, DenseMatrix{{1.0}}).path.at(1.0);
    CHECK(std::abs(s.Y(0, 0) * std::exp(1.0) - (std::exp(2.0) - 1.0) / 2.0) < 1e-13);
  }
  CHECK_THROWS_AS((void)build_lti(DenseMatrix{{0, 1}, {2, 0}}, DenseMatrix::identity(2)), SymmetryError);
  CHECK_THROWS_AS((void)build_lti(DenseMatrix::identity(2), DenseMatrix::identity(3)), DimensionError);
}

TEST_CASE("sampled paths validate their data") {
  const auto one = [](double v) { return std::vector<DenseMatrix>{DenseMatrix{{v}}}; };
  CHECK_THROWS_AS((void)CoefficientPath::make_sampled(1, 1, {}, {}, {}), DimensionError);
  CHECK_THROWS_AS((void)CoefficientPath::make_sampled(1, 1, one(0.5), one(0.0), one(1.0)), LegendreViolation);
  CHECK_THROWS_AS((void)CoefficientPath::make_sampled(1, 1, one(-1e-9), one(0.0), one(1.0)), LegendreViolation);
  CHECK_THROWS_AS((void)CoefficientPath::make_sampled(1, 1, one(-1.0), one(NAN), one(1.0)), DimensionError);
  CHECK_THROWS_AS((void)CoefficientPath::make_sampled(2, 1, one(-1.0), one(0.0), one(1.0)), DimensionError);

  // Midpoints at 1/4 and 3/4; linear in between, constant outside.
  std::vector<DenseMatrix> h{DenseMatrix{{-1.0}}, DenseMatrix{{-3.0}}};
  const CoefficientPath path =
      CoefficientPath::make_sampled(1, 1, h, {DenseMatrix{{0.0}}, DenseMatrix{{2.0}}}, {DenseMatrix{{1.0}}, DenseMatrix{{1.0}}});
  CHECK(path.nt() == 2);
  CHECK(path.at(0.5).H(0, 0) == doctest::Approx(-2.0));
  CHECK(path.at(0.5).Y(0, 0) == doctest::Approx(1.0));
  CHECK(path.at(0.1).H(0, 0) == doctest::Approx(-1.0));
  CHECK(path.at(0.9).Y(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("normalize") {
  SUBCASE("normalized problems are unchanged") {
    const Problem osc = build_oscillator(1.0);
    const Problem n = normalize(osc);
    for (double t : {0.0, 0.5, 1.0}) CHECK(n.path.at(t).Y == osc.path.at(t).Y);
  }
  SUBCASE("idempotent") {
    const Problem p = secvar::testing::random_sampled_problem(2, 3, 16, 99);
    const Problem once = normalize(p);
    const Problem twice = normalize(once);
    CHECK(once.normalized);
    for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const PathSample a = once.path.at(t), b = twice.path.at(t);
      CHECK(a.H == b.H);
      CHECK(a.Y == b.Y);
      CHECK(a.X == b.X);
    }
  }
  SUBCASE("whitens H and rescales Y, X") {
    const Problem p = secvar::testing::random_sampled_problem(2, 3, 16, 5);
    const Problem n = normalize(p);
    for (double t : {0.2, 0.6}) {
      const PathSample raw = p.path.at(t), w = n.path.at(t);
      CHECK(max_abs(w.H + DenseMatrix::identity(3)) < 1e-15);
      // Y(−H)⁻¹Yᵀ is coordinate free.
      const DenseMatrix want = raw.Y * inverse(-raw.H) * raw.Y.transpose();
      CHECK(max_abs(w.Y * w.Y.transpose() - want) < 1e-12);
    }
  }
}

TEST_CASE("normalize leaves det, trace and spectrum unchanged") {
  const Problem p = secvar::testing::random_sampled_problem(2, 3, 32, 20240611);
  const Problem n = normalize(p);
  CHECK(std::abs(det_identity(p, 1024) - det_identity(n, 1024)) < 1e-9);
  CHECK(std::abs(trace_identity(p, 1024) - trace_identity(n, 1024)) < 1e-9);
  const SpectrumReport a = spectrum(p, 128), b = spectrum(n, 128);
  REQUIRE(a.pos.size() == b.pos.size());
  REQUIRE(a.neg.size() == b.neg.size());
  for (std::size_t k = 0; k < a.pos.size(); ++k) CHECK(std::abs(a.pos[k] - b.pos[k]) < 1e-9);
  for (std::size_t k = 0; k < a.neg.size(); ++k) CHECK(std::abs(a.neg[k] - b.neg[k]) < 1e-9);
}
