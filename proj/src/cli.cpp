#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ehcr/config.hpp"

namespace ehcr {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

ConfigEntries collect_overrides(const std::vector<std::string>& sets) {
  ConfigEntries entries;
  for (const auto& s : sets) {
    auto [key, value] = parse_override(s);
    entries[key] = value;
  }
  return entries;
}

// Last grid lambda_p with a nonzero boundary value, if any.
std::optional<double> last_positive(const RegionBoundary& b) {
  for (std::size_t i = b.size(); i > 0; --i) {
    if (b.lambda_s_max[i - 1] > 0.0) return b.lambda_p_grid[i - 1];
  }
  return std::nullopt;
}

void print_summary(std::ostream& out, const ExperimentSpec& spec, const ComparisonReport& report,
                   const std::vector<std::filesystem::path>& paths, double seconds) {
  const SystemParams& p = spec.params;
  out << "experiment " << spec.name << "  mode " << to_string(spec.mode) << "  seed " << spec.sim.seed << '\n';
  out << "  params p_pd=" << p.p_pd_success << " p_ss=" << p.p_ss_success << " s_pd=" << p.s_pd_success
      << " s_sd=" << p.s_sd_success << " lambda_ep=" << p.lambda_ep << " lambda_es=" << p.lambda_es << '\n';
  for (std::size_t i = 0; i < report.boundaries.size(); ++i) {
    const auto& b = report.boundaries[i];
    const auto cutoff = last_positive(b);
    out << "  " << b.series << " [" << to_string(b.source) << "]  lambda_s_max(lambda_p=" << num(b.lambda_p_grid.front())
        << ")=" << num(b.lambda_s_max.front()) << "  last positive lambda_p="
        << (cutoff ? num(*cutoff) : std::string("none"));
    if (i < paths.size()) out << "  -> " << paths[i].string();
    out << '\n';
  }
  if (spec.mode == RunMode::Compare) {
    out << "  max_gap " << num(report.max_gap) << " over " << report.compared_points << " points ("
        << report.uncertain_points << " uncertain excluded)\n";
  }
  if (report.crossover) {
    const auto& c = *report.crossover;
    out << "  crossover lambda_es=" << num(c.lambda_es) << " predicted=" << num(c.predicted)
        << " measured=" << (c.measured ? num(*c.measured) : std::string("none")) << '\n';
  }
  for (const auto& check : reference_checks(spec, report)) {
    out << "  check " << check.quantity << ": reference " << num(check.reference) << "  computed "
        << num(check.computed) << "  |diff| " << num(check.abs_diff()) << '\n';
  }
  out << "  elapsed " << num(seconds) << " s\n";
}

int run_spec(std::ostream& out, const ExperimentSpec& spec, const std::string& out_dir) {
  validate_experiment(spec);
  const auto start = std::chrono::steady_clock::now();
  const ComparisonReport report = run_experiment(spec);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto paths = emit_boundary_csv(report, out_dir);
  print_summary(out, spec, report, paths, seconds);
  return 0;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stable throughput regions of an energy harvesting cooperative cognitive radio network", "ehcr"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir = "results";
  std::string figure;

  const auto add_common = [&](CLI::App* cmd, bool with_output) {
    cmd->add_option("--config", config_path, "flat key = value configuration file");
    cmd->add_option("--set", sets, "override one key, key=value (repeatable)");
    if (with_output) cmd->add_option("--out", out_dir, "directory for CSV output")->capture_default_str();
  };
  auto* region = app.add_subcommand("region", "analytic region boundaries for a configuration");
  auto* simulate = app.add_subcommand("simulate", "simulated region boundaries for a configuration");
  auto* compare = app.add_subcommand("compare", "analytic and simulated boundaries side by side");
  auto* crossover = app.add_subcommand("crossover", "cooperative / non-cooperative crossover point");
  auto* reproduce = app.add_subcommand("reproduce", "run a builtin figure scenario");
  auto* list = app.add_subcommand("list", "list builtin figure scenarios");
  for (auto* cmd : {region, simulate, compare, reproduce}) add_common(cmd, true);
  add_common(crossover, false);
  reproduce->add_option("figure", figure, "fig2 ... fig10")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const ConfigEntries overrides = collect_overrides(sets);

    if (list->parsed()) {
      for (const auto& spec : builtin_experiments()) {
        out << spec.name << "  lambda_ep=" << spec.params.lambda_ep << " lambda_es=" << spec.params.lambda_es
            << "  " << spec.note << '\n';
      }
      return 0;
    }

    if (reproduce->parsed()) {
      ExperimentSpec spec = builtin_experiment(figure);
      ConfigEntries entries = config_path.empty() ? ConfigEntries{} : parse_config_entries(read_file(config_path));
      for (const auto& [key, value] : overrides) entries[key] = value;
      apply_config(spec, entries);
      return run_spec(out, spec, out_dir);
    }

    if (config_path.empty()) throw ConfigError("--config is required for this command");
    ExperimentSpec spec = parse_config(read_file(config_path), overrides);

    if (crossover->parsed()) {
      const Crossover c = crossover_lambda_p(spec.params);
      out << "crossover  seed " << spec.sim.seed << '\n';
      out << "  D " << num(c.d) << '\n';
      out << "  Lambda_p(lambda_es=" << num(spec.params.lambda_es) << ") " << num(c.lambda_p_at(spec.params.lambda_es))
          << '\n';
      return 0;
    }

    if (region->parsed()) spec.mode = RunMode::AnalyticOnly;
    if (simulate->parsed()) spec.mode = RunMode::SimulateOnly;
    if (compare->parsed()) spec.mode = RunMode::Compare;
    return run_spec(out, spec, out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ehcr
