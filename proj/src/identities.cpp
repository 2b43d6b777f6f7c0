#include "secvar/identities.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "quadrature.hpp"
#include "secvar/errors.hpp"

namespace secvar {

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

IdentityCheck make_check(std::string name, double lhs, double rhs, std::size_t n_terms) {
  return IdentityCheck{std::move(name), lhs, rhs, n_terms, std::abs(lhs - rhs)};
}

void require_pair(const DenseMatrix& a, const DenseMatrix& r, const char* op) {
  if (!a.is_square() || !r.is_square() || a.rows() != r.rows() || a.rows() == 0)
    throw DimensionError(std::string(op) + ": A and R must be square of equal size");
  if (!is_symmetric(a)) throw SymmetryError(std::string(op) + ": A is not symmetric");
  if (!is_symmetric(r)) throw SymmetryError(std::string(op) + ": R is not symmetric");
}

void require_terms(std::size_t n_terms, const char* op) {
  if (n_terms == 0) throw RangeError(std::string(op) + ": n_terms must be at least 1");
}

// A's eigenvalues and R in A's eigenbasis.
struct EigenFrame {
  std::vector<double> lam;
  DenseMatrix r_eig;
  DenseMatrix v;
};

EigenFrame eigen_frame(const DenseMatrix& a, const DenseMatrix& r) {
  const SymEigen e = sym_eigen(symmetrized(a));
  return EigenFrame{e.values, e.vectors.transpose() * symmetrized(r) * e.vectors, e.vectors};
}

// (λ coth λ − 1)/λ², continuous at 0.
double coth_kernel(double lam) {
  if (std::abs(lam) < 1e-2) {
    const double x = lam * lam;
    return 1.0 / 3.0 - x / 45.0 + 2.0 * x * x / 945.0;
  }
  return (lam / std::tanh(lam) - 1.0) / (lam * lam);
}

}  // namespace

IdentityCheck euler_interp(double a, double b, std::size_t n_terms) {
  require_terms(n_terms, "euler_interp");
  const double c = a * a + b * b;
  double lhs = 1.0;
  for (std::size_t n = 1; n <= n_terms; ++n) {
    const double w2 = kPi2 * static_cast<double>(n) * static_cast<double>(n);
    lhs *= (w2 - b * b) / (a * a + w2);
  }
  lhs *= std::exp(-c / (kPi2 * static_cast<double>(n_terms)));

  double rhs = 1.0;
  if (a == 0.0 && b != 0.0) rhs = std::sin(b) / b;
  else if (b == 0.0 && a != 0.0) rhs = a / std::sinh(a);
  else if (a != 0.0 && b != 0.0) rhs = a * std::sin(b) / (b * std::sinh(a));
  return make_check("euler_interp", lhs, rhs, n_terms);
}

IdentityCheck matrix_euler_det(const DenseMatrix& a, const DenseMatrix& r, std::size_t n_terms) {
  require_pair(a, r, "matrix_euler_det");
  require_terms(n_terms, "matrix_euler_det");
  const std::size_t m = a.rows();
  const EigenFrame f = eigen_frame(a, r);

  double lhs = 1.0;
  DenseMatrix factor(m, m);
  for (std::size_t n = 1; n <= n_terms; ++n) {
    const double w2 = kPi2 * static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        factor(i, j) = (i == j ? 1.0 : 0.0) - f.r_eig(i, j) / (f.lam[j] * f.lam[j] + w2);
    lhs *= determinant(factor);
  }
  lhs *= std::exp(-trace(r) / (kPi2 * static_cast<double>(n_terms)));

  // det ∫₋₁¹e^{tA}dt = Π 2·sinh(λ)/λ; the 2ᵐ in front cancels it factor by factor.
  double rhs = determinant(osc_solution(symmetrized(a * a - r), 1.0));
  for (double lam : f.lam) rhs /= osc_scalar(lam * lam, 1.0);
  return make_check("matrix_euler_det", lhs, rhs, n_terms);
}

IdentityCheck matrix_euler_trace(const DenseMatrix& a, const DenseMatrix& r, std::size_t n_terms, std::size_t nq) {
  require_pair(a, r, "matrix_euler_trace");
  require_terms(n_terms, "matrix_euler_trace");
  if (nq == 0) throw RangeError("matrix_euler_trace: nq must be positive");
  const std::size_t m = a.rows();
  const EigenFrame f = eigen_frame(a, r);

  double lhs = 0.0;
  for (std::size_t n = 1; n <= n_terms; ++n) {
    const double w2 = kPi2 * static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t i = 0; i < m; ++i) lhs += f.r_eig(i, i) / (f.lam[i] * f.lam[i] + w2);
  }
  lhs += trace(r) / (kPi2 * static_cast<double>(n_terms));

  // In A's eigenbasis e^{cA} is diagonal; F₁ = ∫e^{−2τ₁A}, F₂ = ∫e^{τA}Re^{τA}F₁,
  // and the simplex integral is ∫e^{−2tA}F₂.
  using detail::GaussLegendre3;
  auto scale_rows = [&](DenseMatrix x, double c, double t) {
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::exp(c * t * f.lam[i]);
      for (std::size_t j = 0; j < m; ++j) x(i, j) *= e;
    }
    return x;
  };
  auto scale_cols = [&](DenseMatrix x, double c, double t) {
    for (std::size_t j = 0; j < m; ++j) {
      const double e = std::exp(c * t * f.lam[j]);
      for (std::size_t i = 0; i < m; ++i) x(i, j) *= e;
    }
    return x;
  };
  const DenseMatrix eye = DenseMatrix::identity(m);
  const double h = 1.0 / static_cast<double>(nq);
  DenseMatrix f1(m, m), f2(m, m), total(m, m);
  for (std::size_t cell = 0; cell < nq; ++cell) {
    std::array<double, 3> t{};
    std::array<DenseMatrix, 3> g1, f1_at, g2, f2_at;
    for (int k = 0; k < 3; ++k) {
      t[k] = (static_cast<double>(cell) + GaussLegendre3::nodes[k]) * h;
      g1[k] = scale_rows(eye, -2.0, t[k]);
    }
    for (int k = 0; k < 3; ++k) {
      f1_at[k] = f1;
      for (int l = 0; l < 3; ++l) f1_at[k] += g1[l] * (h * GaussLegendre3::partial[k][l]);
      g2[k] = scale_cols(scale_rows(f.r_eig, 1.0, t[k]), 1.0, t[k]) * f1_at[k];
    }
    for (int k = 0; k < 3; ++k) {
      f2_at[k] = f2;
      for (int l = 0; l < 3; ++l) f2_at[k] += g2[l] * (h * GaussLegendre3::partial[k][l]);
      total += scale_rows(f2_at[k], -2.0, t[k]) * (h * GaussLegendre3::weights[k]);
    }
    for (int l = 0; l < 3; ++l) {
      f1 += g1[l] * (h * GaussLegendre3::weights[l]);
      f2 += g2[l] * (h * GaussLegendre3::weights[l]);
    }
  }
  const double rhs = trace(total * inverse(f1));
  return make_check("matrix_euler_trace", lhs, rhs, n_terms);
}

double matrix_euler_trace_commuting(const DenseMatrix& a, const DenseMatrix& r) {
  require_pair(a, r, "matrix_euler_trace_commuting");
  const double gap = frobenius_norm(a * r - r * a);
  if (gap > 1e-10 * frobenius_norm(a) * frobenius_norm(r))
    throw CommutativityError("matrix_euler_trace_commuting: ‖AR − RA‖ = " + std::to_string(gap) +
                             " exceeds 1e-10·‖A‖·‖R‖");
  const EigenFrame f = eigen_frame(a, r);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.lam.size(); ++i) sum += f.r_eig(i, i) * coth_kernel(f.lam[i]);
  return 0.5 * sum;
}

}  // namespace secvar
