#include "secvar/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <utility>

#include "secvar/errors.hpp"

namespace secvar {

namespace {

std::string shape(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_square(const DenseMatrix& m, const char* op) {
  if (!m.is_square()) throw DimensionError(std::string(op) + ": expected square matrix, got " + shape(m));
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

double one_norm(const DenseMatrix& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) col += std::abs(m(i, j));
    best = std::max(best, col);
  }
  return best;
}

struct Lu {
  DenseMatrix factors;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

Lu lu_decompose(const DenseMatrix& a) {
  require_square(a, "lu");
  const std::size_t n = a.rows();
  Lu lu{a, std::vector<std::size_t>(n), 1, false};
  std::iota(lu.perm.begin(), lu.perm.end(), std::size_t{0});
  DenseMatrix& f = lu.factors;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(f(i, k)) > std::abs(f(piv, k))) piv = i;
    if (f(piv, k) == 0.0) {
      lu.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f(k, j), f(piv, j));
      std::swap(lu.perm[k], lu.perm[piv]);
      lu.sign = -lu.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = f(i, k) / f(k, k);
      f(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) f(i, j) -= l * f(k, j);
    }
  }
  return lu;
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols)
    throw DimensionError("DenseMatrix: " + std::to_string(data_.size()) + " entries for " +
                         std::to_string(rows) + "x" + std::to_string(cols));
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                               std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block: out of range");
  DenseMatrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("set_block: out of range");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

void DenseMatrix::keep_trailing(std::size_t k) {
  if (k > rows_ || k > cols_) throw DimensionError("keep_trailing: out of range");
  const std::size_t nr = rows_ - k;
  const std::size_t nc = cols_ - k;
  // Destination offsets never exceed source offsets, so a forward sweep is safe.
  for (std::size_t i = 0; i < nr; ++i)
    std::memmove(data_.data() + i * nc, data_.data() + (i + k) * cols_ + k, nc * sizeof(double));
  rows_ = nr;
  cols_ = nc;
  data_.resize(nr * nc);
  data_.shrink_to_fit();
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double c) {
  for (double& v : data_) v *= c;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator-(DenseMatrix a) { return a *= -1.0; }
DenseMatrix operator*(DenseMatrix a, double c) { return a *= c; }
DenseMatrix operator*(double c, DenseMatrix a) { return a *= c; }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: " + shape(a) + " * " + shape(b));
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

double frobenius_norm(const DenseMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return std::sqrt(acc);
}

double max_abs(const DenseMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc = std::max(acc, std::abs(v));
  return acc;
}

double trace(const DenseMatrix& m) {
  require_square(m, "trace");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, i);
  return acc;
}

bool is_symmetric(const DenseMatrix& m, double rel_tol) {
  if (!m.is_square()) return false;
  const double tol = rel_tol * std::max(frobenius_norm(m), kNormFloor);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

bool is_antisymmetric(const DenseMatrix& m, double rel_tol) {
  if (!m.is_square()) return false;
  const double tol = rel_tol * std::max(frobenius_norm(m), kNormFloor);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      if (std::abs(m(i, j) + m(j, i)) > tol) return false;
  return true;
}

DenseMatrix symmetrized(const DenseMatrix& m, double rel_tol) {
  require_square(m, "symmetrized");
  if (!is_symmetric(m, rel_tol)) throw SymmetryError("matrix is not symmetric within tolerance");
  DenseMatrix s = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) s(i, j) = s(j, i) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

double determinant(const DenseMatrix& m) {
  const Lu lu = lu_decompose(m);
  if (lu.singular) return 0.0;
  double det = lu.sign;
  for (std::size_t i = 0; i < m.rows(); ++i) det *= lu.factors(i, i);
  return det;
}

DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("solve: " + shape(a) + " vs rhs " + shape(b));
  const Lu lu = lu_decompose(a);
  if (lu.singular) throw NonRegularPointError("solve: singular matrix");
  const std::size_t n = a.rows();
  DenseMatrix x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = b(lu.perm[i], c);
      for (std::size_t k = 0; k < i; ++k) acc -= lu.factors(i, k) * y[k];
      y[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
      double acc = y[i];
      for (std::size_t k = i + 1; k < n; ++k) acc -= lu.factors(i, k) * x(k, c);
      x(i, c) = acc / lu.factors(i, i);
    }
  }
  return x;
}

DenseMatrix inverse(const DenseMatrix& m) {
  require_square(m, "inverse");
  return solve(m, DenseMatrix::identity(m.rows()));
}

DenseMatrix symplectic_unit(std::size_t d) {
  DenseMatrix j(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    j(i, d + i) = -1.0;
    j(d + i, i) = 1.0;
  }
  return j;
}

SymEigen sym_eigen(const DenseMatrix& s) {
  require_square(s, "sym_eigen");
  if (!is_symmetric(s, 1e-10)) throw SymmetryError("sym_eigen: input is not symmetric");
  const std::size_t n = s.rows();
  DenseMatrix a = symmetrized(s);
  DenseMatrix v = DenseMatrix::identity(n);
  const double threshold = 1e-14 * std::max(frobenius_norm(a), kNormFloor);

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
  }
  if (off_norm() > threshold) throw InvariantBreach("sym_eigen: Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEigen out{std::vector<double>(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

DenseMatrix sym_sqrt(const DenseMatrix& s) {
  const SymEigen e = sym_eigen(s);
  const double tol = 1e-14 * std::max(frobenius_norm(s), kNormFloor);
  if (e.values.front() <= tol)
    throw NotPositiveDefiniteError("sym_sqrt: smallest eigenvalue " + std::to_string(e.values.front()));
  return sym_apply(e, [](double x) { return std::sqrt(x); });
}

DenseMatrix expm(const DenseMatrix& m) {
  require_square(m, "expm");
  const std::size_t n = m.rows();
  int squarings = 0;
  const double norm = one_norm(m);
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const DenseMatrix scaled = m * std::ldexp(1.0, -squarings);

  // Horner form of Σ_{k≤13} Xᵏ/k!.
  constexpr int kOrder = 13;
  DenseMatrix e = DenseMatrix::identity(n);
  for (int k = kOrder; k >= 1; --k) {
    e = scaled * e * (1.0 / k);
    e += DenseMatrix::identity(n);
  }
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

double osc_scalar(double mu, double t) {
  if (std::abs(mu) * t * t < 1e-6) {
    const double x = mu * t * t;
    return t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
  }
  if (mu > 0.0) {
    const double w = std::sqrt(mu);
    return std::sinh(w * t) / w;
  }
  const double w = std::sqrt(-mu);
  return std::sin(w * t) / w;
}

DenseMatrix osc_solution(const DenseMatrix& s, double t) {
  const SymEigen e = sym_eigen(s);
  return sym_apply(e, [t](double mu) { return osc_scalar(mu, t); });
}

double antisym_positive_sum(const DenseMatrix& m) {
  require_square(m, "antisym_positive_sum");
  if (!is_antisymmetric(m, 1e-10)) throw SymmetryError("antisym_positive_sum: input is not antisymmetric");
  const std::vector<double> sv = singular_values(m);
  return 0.5 * std::accumulate(sv.begin(), sv.end(), 0.0);
}

std::vector<double> singular_values(const DenseMatrix& m) {
  // One-sided Jacobi on the columns of a tall copy.
  DenseMatrix a = m.rows() >= m.cols() ? m : m.transpose();
  const std::size_t rows = a.rows();
  const std::size_t n = a.cols();
  constexpr double kEps = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (std::abs(gamma) <= kEps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(zeta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += a(i, j) * a(i, j);
    sv[j] = std::sqrt(acc);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace secvar
