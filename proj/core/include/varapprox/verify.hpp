#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "varapprox/analysis.hpp"
#include "varapprox/json_io.hpp"

namespace varapprox {

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Monte Carlo samples per bound check.
  std::size_t samples = 2000;
  FnNorm norm = FnNorm::kL2;
  /// Added to every theoretical right-hand side.
  double tol = 1e-7;
};

/// Outcome of one named check; trials of a family are folded into one result.
struct CheckResult {
  std::string name;  // "<suite>/<check>"
  bool pass = false;
  /// Why the check failed (empty on pass).
  std::string failure;
  Json body;
};

/// interp, attention, contextual, perturbation, universality, flowar.
const std::vector<std::string>& suite_names();
/// True for any suite name or "all".
bool is_suite(std::string_view name);

/// Runs one suite (or "all") sequentially. Results are sorted by name.
/// Throws DomainError for an unknown suite.
std::vector<CheckResult> run_suite(std::string_view suite, const VerifyOptions& opts);

struct RunManifest {
  std::vector<std::string> command_line;
  std::string suite;
  VerifyOptions options;
  std::string timestamp;
  std::string version;
};

/// {"manifest": {...}, "reports": [...]}. The manifest records pass counts.
Json report_document(const RunManifest& manifest, const std::vector<CheckResult>& checks);
/// The "reports" array alone; byte-stable for a fixed seed and options.
Json report_body(const std::vector<CheckResult>& checks);

/// Library version string.
std::string_view version() noexcept;

}  // namespace varapprox
