#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "secvar/matfun.hpp"
#include "secvar/model.hpp"

namespace secvar::cli {

/// Environment variables overriding method settings (flags win over these).
inline constexpr const char* kEnvPrefix = "SECVAR_";

struct MethodSettings {
  std::size_t steps = 4096;      // RK4 steps (also quadrature cells for Γ and tr K)
  std::size_t N = 1024;          // Galerkin cells
  std::size_t n_terms = 100000;  // series terms for the identities
  std::size_t nq = 1000;         // simplex quadrature cells
  double s_lo = -50.0;           // characteristic-root scan interval
  double s_hi = 50.0;
  std::size_t s_grid = 400;
  double legendre_margin = kDefaultLegendreMargin;
};

struct OutputSettings {
  std::string report;        // JSON-lines destination; empty means stdout
  std::string spectrum_csv;  // empty means no CSV (stdout for the spectrum verb)
};

struct IdentityRequest {
  std::string kind;  // euler_interp
  double a = 0.0;
  double b = 0.0;
};

struct ProblemParams {
  std::string type;  // oscillator | magnetic | lti | sampled
  double r = 0.0;
  DenseMatrix a;     // lti
  DenseMatrix r_mat; // lti
};

struct RunConfig {
  ProblemParams params;
  Problem problem;
  MethodSettings method;
  OutputSettings output;
  std::vector<IdentityRequest> identities;
  std::string source;  // config path
};

struct Overrides {
  std::optional<std::size_t> steps;
  std::optional<std::size_t> N;
  std::optional<std::size_t> n_terms;
};

/// SECVAR_STEPS, SECVAR_N, SECVAR_N_TERMS. Malformed values raise ConfigError.
[[nodiscard]] Overrides env_overrides();

/// Parses and validates a JSON config, then applies `env` and `flags` in that
/// order. Errors carry the file, the line of the offending key and the violated condition.
[[nodiscard]] RunConfig load_config(const std::string& path, const Overrides& env = {},
                                    const Overrides& flags = {});

/// Same, from text already in memory; `origin` names it in messages.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::string& origin,
                                     const Overrides& env = {}, const Overrides& flags = {});

}  // namespace secvar::cli
