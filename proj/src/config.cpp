#include "ehcr/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ehcr {

namespace {

constexpr std::array<std::string_view, 18> kKeys = {
    "p_pd_success",  "p_ss_success",      "s_pd_success",       "s_sd_success",  "lambda_ep",
    "lambda_es",     "policy",            "access_prob_a",      "mode",          "lambda_p_grid_max",
    "lambda_p_grid_step", "a_grid_step",  "bisect_tol",         "horizon_slots", "burn_in_slots",
    "replications",  "seed",              "drift_epsilon",
};

constexpr std::array<std::string_view, 4> kRequired = {"p_pd_success", "p_ss_success", "s_pd_success",
                                                       "s_sd_success"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool known_key(std::string_view key) {
  return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

double to_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

template <typename Int>
Int to_integer(std::string_view key, std::string_view text) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

double probability(std::string_view key, std::string_view text) {
  return require_unit_interval(key, to_double(key, text));
}

double open_unit(std::string_view key, std::string_view text, bool allow_one) {
  const double v = to_double(key, text);
  if (!(v > 0.0 && (allow_one ? v <= 1.0 : v < 1.0))) {
    throw ConfigError(std::string(key) + " = " + std::string(text) + " is outside " +
                      (allow_one ? "(0, 1]" : "(0, 1)"));
  }
  return v;
}

std::vector<PolicySpec> parse_policies(std::string_view text, double a) {
  std::vector<PolicySpec> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    try {
      out.push_back({parse_policy_kind(item), a});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("policy: ") + e.what());
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("policy: empty list");
  return out;
}

std::string format_row(double lambda_p, double lambda_s, const RegionBoundary& b, bool uncertain) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%s,%s,%s\n", lambda_p, lambda_s, to_string(b.label).data(),
                to_string(b.source).data(), uncertain ? "true" : "false");
  return buf;
}

}  // namespace

std::span<const std::string_view> config_keys() noexcept { return kKeys; }

ConfigEntries parse_config_entries(std::string_view text) {
  ConfigEntries entries;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!known_key(key)) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(std::string(key) + ": missing value");
    if (!entries.emplace(std::string(key), std::string(value)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
  }
  return entries;
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("--set expects key=value, got '" + std::string(text) + "'");
  const auto key = trim(text.substr(0, eq));
  const auto value = trim(text.substr(eq + 1));
  if (!known_key(key)) throw ConfigError("unknown key '" + std::string(key) + "'");
  if (value.empty()) throw ConfigError(std::string(key) + ": missing value");
  return {std::string(key), std::string(value)};
}

void apply_config(ExperimentSpec& spec, const ConfigEntries& entries) {
  for (const auto& [key, value] : entries) {
    if (!known_key(key)) throw ConfigError("unknown key '" + key + "'");
  }
  const auto get = [&](std::string_view key) -> const std::string* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  SystemParams& p = spec.params;
  if (auto v = get("p_pd_success")) p.p_pd_success = probability("p_pd_success", *v);
  if (auto v = get("p_ss_success")) p.p_ss_success = probability("p_ss_success", *v);
  if (auto v = get("s_pd_success")) p.s_pd_success = probability("s_pd_success", *v);
  if (auto v = get("s_sd_success")) p.s_sd_success = probability("s_sd_success", *v);
  if (auto v = get("lambda_ep")) p.lambda_ep = probability("lambda_ep", *v);
  if (auto v = get("lambda_es")) p.lambda_es = probability("lambda_es", *v);

  if (auto v = get("policy")) {
    const double a = spec.policies.empty() ? 0.5 : spec.policies.front().access_prob_a;
    spec.policies = parse_policies(*v, a);
  }
  if (auto v = get("access_prob_a")) {
    const double a = probability("access_prob_a", *v);
    for (auto& policy : spec.policies) policy.access_prob_a = a;
  }
  if (auto v = get("mode")) {
    try {
      spec.mode = parse_run_mode(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("mode: ") + e.what());
    }
  }

  const auto* grid_max = get("lambda_p_grid_max");
  const auto* grid_step = get("lambda_p_grid_step");
  if (grid_max || grid_step) {
    const double max = grid_max ? probability("lambda_p_grid_max", *grid_max) : 0.6;
    const double step = grid_step ? open_unit("lambda_p_grid_step", *grid_step, true) : 0.005;
    spec.grids.lambda_p = make_grid(max, step);
  }
  if (auto v = get("a_grid_step")) spec.grids.a = make_grid(1.0, open_unit("a_grid_step", *v, true));
  if (auto v = get("bisect_tol")) spec.grids.bisect_tol = open_unit("bisect_tol", *v, false);

  SimConfig& sim = spec.sim;
  if (auto v = get("horizon_slots")) {
    sim.horizon_slots = to_integer<std::int64_t>("horizon_slots", *v);
    if (sim.horizon_slots <= 0) throw ConfigError("horizon_slots must be positive");
  }
  if (auto v = get("burn_in_slots")) {
    sim.burn_in_slots = to_integer<std::int64_t>("burn_in_slots", *v);
    if (sim.burn_in_slots < 0) throw ConfigError("burn_in_slots must be nonnegative");
  }
  if (auto v = get("replications")) {
    sim.replications = to_integer<int>("replications", *v);
    if (sim.replications < 1) throw ConfigError("replications must be positive");
  }
  if (auto v = get("seed")) sim.seed = to_integer<std::uint64_t>("seed", *v);
  if (auto v = get("drift_epsilon")) {
    sim.drift_epsilon = to_double("drift_epsilon", *v);
    if (!(sim.drift_epsilon > 0.0)) throw ConfigError("drift_epsilon must be positive");
  }
  if (sim.burn_in_slots >= sim.horizon_slots) {
    throw ConfigError("burn_in_slots must be smaller than horizon_slots");
  }
}

ExperimentSpec parse_config(std::string_view text, const ConfigEntries& overrides) {
  ConfigEntries entries = parse_config_entries(text);
  for (const auto& [key, value] : overrides) entries[key] = value;

  std::vector<std::string_view> missing;
  for (auto key : kRequired) {
    if (!entries.contains(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string msg = "missing required key(s):";
    for (auto key : missing) msg += " " + std::string(key);
    throw ConfigError(msg);
  }

  ExperimentSpec spec;
  spec.name = "config";
  spec.params.lambda_ep = 1.0;
  spec.params.lambda_es = 1.0;
  spec.policies = {PolicySpec{PolicyKind::CooperativeRandomized, 0.5}};
  apply_config(spec, entries);
  validate_experiment(spec);
  return spec;
}

std::string format_boundary_csv(const RegionBoundary& boundary) {
  std::string out(kBoundaryCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const bool uncertain = i < boundary.uncertain.size() && boundary.uncertain[i];
    out += format_row(boundary.lambda_p_grid[i], boundary.lambda_s_max[i], boundary, uncertain);
  }
  return out;
}

RegionBoundary parse_boundary_csv(std::string_view text) {
  const auto nl = text.find('\n');
  if (trim(text.substr(0, nl)) != kBoundaryCsvHeader) throw std::invalid_argument("boundary CSV: bad header");
  text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

  RegionBoundary b;
  bool first = true;
  int row = 1;
  while (!text.empty()) {
    const auto end = text.find('\n');
    const auto line = trim(text.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++row;
    if (line.empty()) continue;

    std::array<std::string_view, 5> fields;
    std::string_view rest = line;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (f + 1 == fields.size())) {
        throw std::invalid_argument("boundary CSV: row " + std::to_string(row) + " needs 5 fields");
      }
      fields[f] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    const RegionLabel label = parse_region_label(fields[2]);
    const BoundarySource source = parse_boundary_source(fields[3]);
    if (first) {
      b.label = label;
      b.source = source;
      first = false;
    } else if (label != b.label || source != b.source) {
      throw std::invalid_argument("boundary CSV: mixed labels or sources");
    }
    if (fields[4] != "true" && fields[4] != "false") {
      throw std::invalid_argument("boundary CSV: uncertain must be true or false");
    }
    b.lambda_p_grid.push_back(to_double("lambda_p", fields[0]));
    b.lambda_s_max.push_back(to_double("lambda_s_max", fields[1]));
    b.uncertain.push_back(fields[4] == "true");
  }
  b.unbracketed.assign(b.size(), false);
  return b;
}

std::string boundary_file_name(std::string_view experiment, const RegionBoundary& boundary) {
  const std::string series = boundary.series.empty() ? std::string(to_string(boundary.label)) : boundary.series;
  return std::string(experiment) + "_" + series + "_" + std::string(to_string(boundary.source)) + ".csv";
}

std::vector<std::filesystem::path> emit_boundary_csv(const ComparisonReport& report,
                                                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> paths;
  for (const auto& boundary : report.boundaries) {
    const auto path = dir / boundary_file_name(report.experiment, boundary);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    file << format_boundary_csv(boundary);
    file.close();
    if (!file) throw std::runtime_error("error writing " + path.string());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace ehcr
