#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ehcr/analytic.hpp"
#include "ehcr/sweep.hpp"

namespace ehcr {

/// Any problem with a configuration file or a --set override.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every key the flat configuration format accepts.
std::span<const std::string_view> config_keys() noexcept;

using ConfigEntries = std::map<std::string, std::string, std::less<>>;

/// Splits `key = value` lines; `#` starts a comment. Rejects unknown and
/// duplicate keys and lines without `=`.
ConfigEntries parse_config_entries(std::string_view text);

/// Parses `key=value` (spaces around '=' allowed) from a --set argument.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Applies entries on top of `spec`. Keys are applied in a fixed order so
/// `access_prob_a` always lands after `policy`.
void apply_config(ExperimentSpec& spec, const ConfigEntries& entries);

/// Builds a spec from a configuration file. The four channel probabilities
/// are required; everything else falls back to the documented defaults
/// (lambda_ep = lambda_es = 1, policy = cooperative, a = 0.5, ...).
ExperimentSpec parse_config(std::string_view text, const ConfigEntries& overrides = {});

/// Exact header of every boundary CSV.
inline constexpr std::string_view kBoundaryCsvHeader = "lambda_p,lambda_s_max,label,source,uncertain";

std::string format_boundary_csv(const RegionBoundary& boundary);
/// Inverse of format_boundary_csv up to the 6-decimal quantisation.
RegionBoundary parse_boundary_csv(std::string_view text);

/// `<experiment>_<series>_<source>.csv`
std::string boundary_file_name(std::string_view experiment, const RegionBoundary& boundary);

/// Writes one CSV per boundary into `dir` (created if missing) and returns
/// the paths in report order. Throws std::runtime_error when a file cannot
/// be written.
std::vector<std::filesystem::path> emit_boundary_csv(const ComparisonReport& report,
                                                     const std::filesystem::path& dir);

/// Entry point behind the `ehcr` binary. Summaries go to `out`,
/// diagnostics to `err`; returns the process exit code.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ehcr
