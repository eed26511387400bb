#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ehcr/analytic.hpp"
#include "ehcr/model.hpp"
#include "ehcr/simulator.hpp"

namespace ehcr {

enum class RunMode { AnalyticOnly, SimulateOnly, Compare };

std::string_view to_string(RunMode mode) noexcept;
/// Accepts `analytic`, `simulate`, `compare`.
RunMode parse_run_mode(std::string_view text);

struct Grids {
  std::vector<double> lambda_p = default_lambda_p_grid();
  std::vector<double> a = default_a_grid();
  double bisect_tol = kDefaultBisectTol;
};

/// An additional parameter set plotted alongside the experiment's main one.
struct Scenario {
  std::string tag;
  SystemParams params;
};

struct ExperimentSpec {
  std::string name;
  SystemParams params;
  /// Extra curves on the same axes, e.g. the unconstrained reference system.
  std::vector<Scenario> references;
  /// One boundary per policy and scenario: the randomized policy maps to the
  /// union region, DominantI/II to R1/R2 at the policy's `a`, and
  /// NonCooperative to the non-cooperative region.
  std::vector<PolicySpec> policies;
  RunMode mode = RunMode::AnalyticOnly;
  Grids grids;
  SimConfig sim;
  /// Bisection steps on lambda_s for simulated boundaries.
  int sim_bisect_iterations = 6;
  /// Free text shown by `list`; flags values chosen here rather than taken
  /// from a published figure.
  std::string note;
};

/// Throws std::invalid_argument describing the first problem.
const ExperimentSpec& validate_experiment(const ExperimentSpec& spec);

RegionLabel region_for(PolicyKind kind) noexcept;

struct CrossoverReport {
  double lambda_es = 0.0;
  double predicted = 0.0;
  /// Linear interpolation between the grid points where the non-cooperative
  /// boundary stops being above the union boundary. Empty when the two
  /// boundaries do not cross on the grid.
  std::optional<double> measured;
};

struct ComparisonReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<RegionBoundary> boundaries;
  /// Largest |analytic - simulated| over matching series, ignoring uncertain
  /// points. Zero when nothing was compared.
  double max_gap = 0.0;
  std::size_t compared_points = 0;
  std::size_t uncertain_points = 0;
  std::optional<CrossoverReport> crossover;

  const RegionBoundary* find(std::string_view series, BoundarySource source) const noexcept;
};

/// Bisection on lambda_s at every grid lambda_p using is_stable_point.
/// The returned value is the midpoint of the final bracket. A point is
/// marked uncertain when the lambda_s = 0 verdict flips within
/// 2 * drift_epsilon of it along lambda_p, i.e. it sits within the
/// detector's resolution of the PU-axis cutoff.
RegionBoundary simulate_boundary(const SimConfig& config, const SystemParams& params, const PolicySpec& policy,
                                 std::span<const double> lambda_p_grid, int iterations,
                                 std::uint64_t experiment_id);

ComparisonReport run_experiment(const ExperimentSpec& spec);

/// The nine figure scenarios: fig2 ... fig10.
std::vector<ExperimentSpec> builtin_experiments();
/// Throws std::invalid_argument listing the valid names when unknown.
ExperimentSpec builtin_experiment(std::string_view name);

/// A published scalar next to the value this build computes for it.
struct ReferenceCheck {
  std::string quantity;
  double reference = 0.0;
  double computed = 0.0;

  double abs_diff() const noexcept;
};

/// The scalars quoted for a builtin figure, recomputed from the report and
/// the closed forms. Empty for experiments without quoted scalars.
std::vector<ReferenceCheck> reference_checks(const ExperimentSpec& spec, const ComparisonReport& report);

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Results must be written to index-owned slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace ehcr
