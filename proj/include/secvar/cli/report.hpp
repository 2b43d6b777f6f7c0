#pragma once

#include <functional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "secvar/cli/config.hpp"
#include "secvar/errors.hpp"

namespace secvar::cli {

/// One JSON-lines record: kind, route, settings, payload, status, timestamp.
/// Every record names exactly one method route.
using ReportRecord = nlohmann::ordered_json;

/// Receives each record as soon as it is complete.
using RecordSink = std::function<void(const ReportRecord&)>;

/// Routes that produced a number.
namespace route {
inline constexpr const char* jacobi = "jacobi";
inline constexpr const char* galerkin = "galerkin";
inline constexpr const char* galerkin_pv = "galerkin-pv";
inline constexpr const char* char_fn = "char-fn";
inline constexpr const char* closed_form = "closed-form";
}  // namespace route

/// Outcome of a run: the worst status seen, mapped to an exit code.
struct RunOutcome {
  int exit_code = 0;  // 0 ok, 1 validation, 2 numerical, 3 invariant breach
  std::size_t records = 0;
  std::size_t flagged = 0;  // records whose cross-check exceeded its tolerance
};

[[nodiscard]] int exit_code_for(ErrorCategory category) noexcept;

/// det, trace, spectrum, principal-value det and trace, capacity, roots and,
/// where applicable, identity records, in that order. A module error ends the
/// stream with an error record.
RunOutcome run_report(const RunConfig& cfg, const RecordSink& sink);

/// Only the Galerkin spectrum record; the CSV goes to `csv` (header `n,alpha,branch`).
RunOutcome run_spectrum(const RunConfig& cfg, const RecordSink& sink, std::ostream& csv);

/// Identity records: the configured scalar identities, the closed forms
/// matching the problem, and for lti problems the matrix product and trace identities.
RunOutcome run_identities(const RunConfig& cfg, const RecordSink& sink);

RunOutcome run_roots(const RunConfig& cfg, const RecordSink& sink);

/// Single line, no trailing newline.
[[nodiscard]] std::string to_line(const ReportRecord& record);

/// "kind route status value" summary for humans.
void write_table_row(std::ostream& out, const ReportRecord& record);

}  // namespace secvar::cli
