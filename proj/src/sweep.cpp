#include "ehcr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ehcr/rng.hpp"

namespace ehcr {

namespace {

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string policy_series(const PolicySpec& policy) {
  const RegionLabel label = region_for(policy.kind);
  std::string s(to_string(label));
  if (label == RegionLabel::R1 || label == RegionLabel::R2) s += "_a" + fixed(policy.access_prob_a, 2);
  return s;
}

std::string join_series(std::string_view scenario, const std::string& policy) {
  return scenario.empty() ? policy : std::string(scenario) + "_" + policy;
}

RegionBoundary analytic_boundary(const ExperimentSpec& spec, const SystemParams& params,
                                 const PolicySpec& policy) {
  const RegionLabel label = region_for(policy.kind);
  return extract_boundary(region_predicate(params, label, policy.access_prob_a, spec.grids.a),
                          spec.grids.lambda_p, spec.grids.bisect_tol, label);
}

// Crossing of union (cooperative) over non-cooperative along lambda_p.
std::optional<double> measure_crossover(const RegionBoundary& coop, const RegionBoundary& noncoop,
                                        double zero_band) {
  const std::size_t n = std::min(coop.size(), noncoop.size());
  std::optional<std::size_t> last_below;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = coop.lambda_s_max[i] - noncoop.lambda_s_max[i];
    if (diff < -zero_band) {
      last_below = i;
    } else if (diff > zero_band && last_below) {
      const std::size_t j = *last_below;
      const double d0 = coop.lambda_s_max[j] - noncoop.lambda_s_max[j];
      const double x0 = coop.lambda_p_grid[j];
      const double x1 = coop.lambda_p_grid[i];
      return x0 + (x1 - x0) * (-d0) / (diff - d0);
    }
  }
  return std::nullopt;
}

const RegionBoundary* preferred(const ComparisonReport& report, std::string_view series) {
  if (const auto* b = report.find(series, BoundarySource::Analytic)) return b;
  return report.find(series, BoundarySource::Simulated);
}

}  // namespace

std::string_view to_string(RunMode mode) noexcept {
  switch (mode) {
    case RunMode::AnalyticOnly: return "analytic";
    case RunMode::SimulateOnly: return "simulate";
    case RunMode::Compare: return "compare";
  }
  return "unknown";
}

RunMode parse_run_mode(std::string_view text) {
  if (text == "analytic") return RunMode::AnalyticOnly;
  if (text == "simulate") return RunMode::SimulateOnly;
  if (text == "compare") return RunMode::Compare;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected analytic, simulate or compare)");
}

RegionLabel region_for(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::CooperativeRandomized: return RegionLabel::Union;
    case PolicyKind::DominantI: return RegionLabel::R1;
    case PolicyKind::DominantII: return RegionLabel::R2;
    case PolicyKind::NonCooperative: return RegionLabel::NonCooperative;
  }
  return RegionLabel::Union;
}

const ExperimentSpec& validate_experiment(const ExperimentSpec& spec) {
  if (spec.name.empty()) throw std::invalid_argument("experiment name is empty");
  validate_params(spec.params);
  for (const auto& ref : spec.references) validate_params(ref.params);
  if (spec.policies.empty()) throw std::invalid_argument(spec.name + ": no policies");
  for (const auto& p : spec.policies) validate_policy(p);
  const auto check_grid = [&](const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw std::invalid_argument(spec.name + ": empty " + what + " grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      require_unit_interval(what, grid[i]);
      if (i > 0 && !(grid[i] > grid[i - 1])) {
        throw std::invalid_argument(spec.name + ": " + what + " grid must be strictly increasing");
      }
    }
  };
  check_grid(spec.grids.lambda_p, "lambda_p");
  check_grid(spec.grids.a, "a");
  if (!(spec.grids.bisect_tol > 0.0 && spec.grids.bisect_tol < 1.0)) {
    throw std::invalid_argument(spec.name + ": bisect_tol must lie in (0, 1)");
  }
  if (spec.mode != RunMode::AnalyticOnly) {
    validate_config(spec.sim);
    if (spec.sim.replications < 3) throw std::invalid_argument(spec.name + ": simulation needs replications >= 3");
    if (spec.sim_bisect_iterations < 1) throw std::invalid_argument(spec.name + ": sim_bisect_iterations < 1");
  }
  return spec;
}

const RegionBoundary* ComparisonReport::find(std::string_view series, BoundarySource source) const noexcept {
  for (const auto& b : boundaries) {
    if (b.series == series && b.source == source) return &b;
  }
  return nullptr;
}

double ReferenceCheck::abs_diff() const noexcept { return std::abs(computed - reference); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

RegionBoundary simulate_boundary(const SimConfig& config, const SystemParams& params, const PolicySpec& policy,
                                 std::span<const double> lambda_p_grid, int iterations,
                                 std::uint64_t experiment_id) {
  validate_config(config);
  const std::size_t n = lambda_p_grid.size();
  RegionBoundary out;
  out.label = region_for(policy.kind);
  out.source = BoundarySource::Simulated;
  out.lambda_p_grid.assign(lambda_p_grid.begin(), lambda_p_grid.end());
  out.lambda_s_max.assign(n, 0.0);
  std::vector<char> uncertain(n, 0);
  std::vector<char> unbracketed(n, 0);
  const double reach = 2.0 * config.drift_epsilon;

  parallel_for(n, [&](std::size_t i) {
    const double lp = lambda_p_grid[i];
    // Every probe at this grid point shares one stream, so the bisection
    // compares lambda_s values on common random numbers.
    const StreamId base{experiment_id, 0, i};
    const auto stable_at = [&](double lambda_p, double lambda_s) {
      return is_stable_point(config, params, {lambda_p, lambda_s}, policy, base).stable;
    };

    const bool axis_stable = stable_at(lp, 0.0);
    const bool below = lp - reach >= 0.0 ? stable_at(lp - reach, 0.0) : axis_stable;
    const bool above = lp + reach <= 1.0 ? stable_at(lp + reach, 0.0) : axis_stable;
    uncertain[i] = below != above;
    if (!axis_stable) {
      unbracketed[i] = 1;
      return;
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      (stable_at(lp, mid) ? lo : hi) = mid;
    }
    out.lambda_s_max[i] = 0.5 * (lo + hi);
  });

  out.uncertain.assign(uncertain.begin(), uncertain.end());
  out.unbracketed.assign(unbracketed.begin(), unbracketed.end());
  return out;
}

ComparisonReport run_experiment(const ExperimentSpec& spec) {
  validate_experiment(spec);
  ComparisonReport report;
  report.experiment = spec.name;
  report.seed = spec.sim.seed;

  std::vector<Scenario> scenarios{{"", spec.params}};
  scenarios.insert(scenarios.end(), spec.references.begin(), spec.references.end());
  const std::uint64_t experiment_id = name_hash(spec.name);

  for (const auto& scenario : scenarios) {
    for (const auto& policy : spec.policies) {
      const std::string series = join_series(scenario.tag, policy_series(policy));
      std::optional<RegionBoundary> analytic;
      if (spec.mode != RunMode::SimulateOnly) {
        analytic = analytic_boundary(spec, scenario.params, policy);
        analytic->series = series;
        report.boundaries.push_back(*analytic);
      }
      if (spec.mode == RunMode::AnalyticOnly) continue;

      RegionBoundary simulated = simulate_boundary(spec.sim, scenario.params, policy, spec.grids.lambda_p,
                                                   spec.sim_bisect_iterations, experiment_id);
      simulated.series = series;
      if (analytic) {
        for (std::size_t i = 0; i < simulated.size(); ++i) {
          if (simulated.uncertain[i]) {
            ++report.uncertain_points;
            continue;
          }
          ++report.compared_points;
          report.max_gap =
              std::max(report.max_gap, std::abs(analytic->lambda_s_max[i] - simulated.lambda_s_max[i]));
        }
      }
      report.boundaries.push_back(std::move(simulated));
    }
  }

  const bool has_union = std::any_of(spec.policies.begin(), spec.policies.end(), [](const PolicySpec& p) {
    return p.kind == PolicyKind::CooperativeRandomized;
  });
  const bool has_noncoop = std::any_of(spec.policies.begin(), spec.policies.end(), [](const PolicySpec& p) {
    return p.kind == PolicyKind::NonCooperative;
  });
  if (has_union && has_noncoop && spec.params.p_pd_success > 0.0) {
    CrossoverReport cross;
    cross.lambda_es = spec.params.lambda_es;
    cross.predicted = crossover_lambda_p(spec.params).lambda_p_at(spec.params.lambda_es);
    const RegionBoundary* coop = preferred(report, "union");
    const RegionBoundary* noncoop = coop ? report.find("noncoop", coop->source) : nullptr;
    if (coop && noncoop) {
      const double band = coop->source == BoundarySource::Analytic ? 2.0 * spec.grids.bisect_tol : 0.0;
      cross.measured = measure_crossover(*coop, *noncoop, band);
    }
    report.crossover = cross;
  }
  return report;
}

std::vector<ExperimentSpec> builtin_experiments() {
  const auto base = [](std::string name, double lambda_ep, double lambda_es) {
    ExperimentSpec spec;
    spec.name = std::move(name);
    spec.params = baseline_params(lambda_ep, lambda_es);
    return spec;
  };
  const PolicySpec coop{PolicyKind::CooperativeRandomized, 0.5};
  const PolicySpec noncoop{PolicyKind::NonCooperative, 0.0};

  std::vector<ExperimentSpec> specs;

  auto fig2 = base("fig2", 0.6, 0.6);
  for (double a : {0.1, 0.5, 0.9}) fig2.policies.push_back({PolicyKind::DominantI, a});
  fig2.note = "R1 for a in {0.1, 0.5, 0.9}";
  specs.push_back(fig2);

  auto fig3 = base("fig3", 0.6, 0.6);
  for (double a : {0.1, 0.5, 0.9}) fig3.policies.push_back({PolicyKind::DominantII, a});
  fig3.note = "R2 for a in {0.1, 0.5, 0.9} (a values are a local default)";
  specs.push_back(fig3);

  auto fig4 = base("fig4", 0.6, 0.6);
  fig4.policies = {coop};
  fig4.note = "union R1 u R2";
  specs.push_back(fig4);

  auto fig5 = base("fig5", 1.0, 0.5);
  fig5.references = {{"les1.00", baseline_params(1.0, 1.0)}};
  fig5.policies = {coop};
  fig5.note = "SU harvesting only: lambda_es = 0.5 against lambda_es = 1";
  specs.push_back(fig5);

  auto fig6 = base("fig6", 0.6, 1.0);
  fig6.references = {{"unconstrained", baseline_params(1.0, 1.0)}};
  fig6.policies = {coop};
  fig6.note = "PU harvesting only: lambda_ep = 0.6 against the unconstrained system";
  specs.push_back(fig6);

  auto fig7 = base("fig7", 0.6, 0.6);
  fig7.references = {{"les1.00", baseline_params(0.6, 1.0)}};
  fig7.policies = {coop};
  fig7.note = "PU and SU harvesting (0.6, 0.6) against lambda_es = 1";
  specs.push_back(fig7);

  auto fig8 = base("fig8", 0.3, 0.3);
  fig8.references = {{"les1.00", baseline_params(0.3, 1.0)}};
  fig8.policies = {coop};
  fig8.note = "severe harvesting (0.3, 0.3) against lambda_es = 1 (rates are a local default)";
  specs.push_back(fig8);

  auto fig9 = base("fig9", 0.5, 0.8);
  fig9.policies = {coop, noncoop};
  fig9.note = "cooperative vs non-cooperative, lambda_es = 0.8";
  specs.push_back(fig9);

  auto fig10 = base("fig10", 0.5, 0.6);
  fig10.policies = {coop, noncoop};
  fig10.note = "cooperative vs non-cooperative, lambda_es = 0.6";
  specs.push_back(fig10);

  return specs;
}

ExperimentSpec builtin_experiment(std::string_view name) {
  auto specs = builtin_experiments();
  for (auto& spec : specs) {
    if (spec.name == name) return spec;
  }
  std::ostringstream msg;
  msg << "unknown experiment '" << name << "'; valid names:";
  for (const auto& spec : specs) msg << ' ' << spec.name;
  throw std::invalid_argument(msg.str());
}

std::vector<ReferenceCheck> reference_checks(const ExperimentSpec& spec, const ComparisonReport& report) {
  std::vector<ReferenceCheck> checks;
  const SystemParams& p = spec.params;
  const auto pu_cutoff = [&] { checks.push_back({"pu_cutoff_lambda_p", 0.34, pu_service_rate(p)}); };

  if (spec.name == "fig2") {
    pu_cutoff();
    // I falls to lambda_es here and the SU battery saturates.
    const double onset = pu_service_rate(p) * (1.0 - p.lambda_es) / p.lambda_ep;
    checks.push_back({"battery_saturation_lambda_p", 0.25, onset});
  } else if (spec.name == "fig3" || spec.name == "fig4" || spec.name == "fig6") {
    pu_cutoff();
  } else if (spec.name == "fig5") {
    if (const auto* main = preferred(report, "union")) {
      checks.push_back({"su_max_lambda_s", 0.35, main->lambda_s_max.front()});
      if (const auto* ref = report.find("les1.00_union", main->source)) {
        const double band = 2.0 * spec.grids.bisect_tol;
        std::size_t first = main->size();
        while (first > 0 && std::abs(main->lambda_s_max[first - 1] - ref->lambda_s_max[first - 1]) < band) --first;
        if (first < main->size()) checks.push_back({"coincidence_lambda_p", 0.29, main->lambda_p_grid[first]});
      }
    }
  } else if ((spec.name == "fig9" || spec.name == "fig10") && report.crossover) {
    const double reference = spec.name == "fig9" ? 0.075 : 0.15;
    const auto& c = *report.crossover;
    checks.push_back({"crossover_lambda_p_predicted", reference, c.predicted});
    if (c.measured) checks.push_back({"crossover_lambda_p_measured", reference, *c.measured});
  }
  return checks;
}

}  // namespace ehcr
