#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace secvar {

/// Row-major dense real matrix with value semantics.
///
/// All the coordinate matrices of the problem (J, Hₜ, Yₜ, Xₜ, fundamental
/// solutions, Galerkin forms) live in this type. Sizes are small except for
/// Galerkin forms, which can reach a few thousand rows.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static DenseMatrix diagonal(std::span<const double> values);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  [[nodiscard]] DenseMatrix transpose() const;
  [[nodiscard]] DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr,
                                  std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);

  /// Shrinks to the trailing (rows-k)×(cols-k) block in place, reusing storage.
  void keep_trailing(std::size_t k);

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double c);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a);
DenseMatrix operator*(DenseMatrix a, double c);
DenseMatrix operator*(double c, DenseMatrix a);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

[[nodiscard]] double frobenius_norm(const DenseMatrix& m);
[[nodiscard]] double max_abs(const DenseMatrix& m);
[[nodiscard]] double trace(const DenseMatrix& m);

/// Relative tolerances are scaled by ‖m‖_F with this absolute floor.
inline constexpr double kNormFloor = 1e-300;

[[nodiscard]] bool is_symmetric(const DenseMatrix& m, double rel_tol = 1e-10);
[[nodiscard]] bool is_antisymmetric(const DenseMatrix& m, double rel_tol = 1e-10);

/// (M + Mᵀ)/2; throws SymmetryError when M is not symmetric within rel_tol.
[[nodiscard]] DenseMatrix symmetrized(const DenseMatrix& m, double rel_tol = 1e-10);

[[nodiscard]] double determinant(const DenseMatrix& m);
[[nodiscard]] DenseMatrix inverse(const DenseMatrix& m);
/// Solves A·X = B by LU with partial pivoting.
[[nodiscard]] DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b);

/// Symplectic unit J = [[0, −I], [I, 0]] in (p, q) ordering.
[[nodiscard]] DenseMatrix symplectic_unit(std::size_t d);

struct SymEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // orthonormal columns
};

/// Cyclic Jacobi rotations until the off-diagonal norm drops below 1e-14·‖S‖_F.
[[nodiscard]] SymEigen sym_eigen(const DenseMatrix& s);

/// V·diag(f(λ))·Vᵀ for a precomputed decomposition.
template <typename F>
[[nodiscard]] DenseMatrix sym_apply(const SymEigen& e, F&& f) {
  const std::size_t n = e.values.size();
  DenseMatrix out(n, n);
  std::vector<double> fv(n);
  for (std::size_t k = 0; k < n; ++k) fv[k] = f(e.values[k]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += e.vectors(i, k) * fv[k] * e.vectors(j, k);
      out(i, j) = acc;
    }
  return out;
}

/// Symmetric positive-definite square root.
[[nodiscard]] DenseMatrix sym_sqrt(const DenseMatrix& s);

/// Matrix exponential: scaling and squaring around an order-13 Taylor series.
[[nodiscard]] DenseMatrix expm(const DenseMatrix& m);

/// ψ(μ, t): the solution at time t of v̈ = μv, v(0)=0, v̇(0)=1.
[[nodiscard]] double osc_scalar(double mu, double t);

/// V(t) with V̈ = S·V, V(0) = 0, V̇(0) = I, for symmetric S of any inertia.
[[nodiscard]] DenseMatrix osc_solution(const DenseMatrix& s, double t);

/// Σⱼ ζⱼ for an antisymmetric M with spectrum {±iζⱼ}; half the nuclear norm.
[[nodiscard]] double antisym_positive_sum(const DenseMatrix& m);

/// Singular values in descending order (one-sided Jacobi).
[[nodiscard]] std::vector<double> singular_values(const DenseMatrix& m);

}  // namespace secvar
