#pragma once

#include <stdexcept>
#include <string>

namespace secvar {

/// Coarse classification used by the CLI to pick an exit code.
enum class ErrorCategory {
  validation,  // bad input: dimensions, symmetry, Legendre condition, config
  numerical,   // well-posed input the numerics cannot resolve
  invariant,   // an internal consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

struct SymmetryError : Error {
  explicit SymmetryError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

struct NotPositiveDefiniteError : Error {
  explicit NotPositiveDefiniteError(const std::string& what)
      : Error(ErrorCategory::validation, what) {}
};

/// Hₜ fails to be negative-definite with the configured margin.
struct LegendreViolation : Error {
  explicit LegendreViolation(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

/// Γ₁ (equivalently the Galerkin constraint) is singular: the reference control
/// is not a regular point of the endpoint map.
struct NonRegularPointError : Error {
  explicit NonRegularPointError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

struct RangeError : Error {
  explicit RangeError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

struct CommutativityError : Error {
  explicit CommutativityError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

struct InvariantBreach : Error {
  explicit InvariantBreach(const std::string& what) : Error(ErrorCategory::invariant, what) {}
};

}  // namespace secvar
