#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ehcr/model.hpp"

namespace ehcr {

/// Raised when a quantity that presumes a stable PU queue is requested at
/// lambda_p >= mu_p.
class UnstablePrimaryError : public std::domain_error {
 public:
  UnstablePrimaryError(double lambda_p, double mu_p);
};

/// Per-transmission probability that a PU packet leaves Q_p under cooperation:
/// delivered directly, or decoded by the SU during a direct-link outage.
double pu_success_probability(const SystemParams& params) noexcept;

/// PU data queue service rate with a saturated PU queue, so the battery is
/// drained at the harvesting rate.
double pu_service_rate(const SystemParams& params) noexcept;

/// Same, without relaying: only the direct link can deliver.
double noncoop_pu_service_rate(const SystemParams& params) noexcept;

/// Rate at which PU packets are admitted into the relay queue.
double relay_arrival_rate(const SystemParams& params, double lambda_p);

/// Probability that the PU does not transmit in a slot.
double idle_probability(const SystemParams& params, double lambda_p);

/// Probability that the SU battery is nonempty, min(1, lambda_es / I).
/// Returns 1 when I == 0 and lambda_es > 0.
double es_busy_probability(const SystemParams& params, double lambda_p);

/// The battery occupancy formula either saturates at one or is used raw.
/// Only the clamped form is a probability; the raw form exists for
/// cross-checking.
enum class EsBusyMode { Clamped, Unclamped };

/// Closed-form rates at one operating point.
struct AnalyticPoint {
  double mu_p = 0.0;
  double lambda_ps = 0.0;
  double idle_prob = 1.0;
  double es_busy_prob = 0.0;
  double mu_s = 0.0;
  double mu_ps = 0.0;
};

/// Evaluates every service rate for the dominant system named by `policy`
/// (DominantI, DominantII or NonCooperative) at `pt`. Returns nullopt when
/// the PU queue is unstable there (lambda_p >= mu_p).
///
/// For DominantI mu_s does not involve `a`; for DominantII mu_ps does not.
std::optional<AnalyticPoint> analytic_point(const SystemParams& params, const PolicySpec& policy,
                                            const RatePoint& pt,
                                            EsBusyMode mode = EsBusyMode::Clamped);

bool region1_contains(const SystemParams& params, double a, const RatePoint& pt);
bool region2_contains(const SystemParams& params, double a, const RatePoint& pt);
bool union_contains(const SystemParams& params, const RatePoint& pt, std::span<const double> a_grid);
bool noncoop_contains(const SystemParams& params, const RatePoint& pt);

/// PU arrival rate at which the cooperative and non-cooperative SU
/// throughput bounds meet, Lambda_p(lambda_es) = (1 - lambda_es) / D.
struct Crossover {
  double d = 0.0;

  double lambda_p_at(double lambda_es) const noexcept { return (1.0 - lambda_es) / d; }
};

/// Throws std::domain_error when p_pd_success == 0.
Crossover crossover_lambda_p(const SystemParams& params);

enum class RegionLabel { R1, R2, Union, NonCooperative };
enum class BoundarySource { Analytic, Simulated };

/// CSV spellings: r1, r2, union, noncoop.
std::string_view to_string(RegionLabel label) noexcept;
RegionLabel parse_region_label(std::string_view text);
std::string_view to_string(BoundarySource source) noexcept;
BoundarySource parse_boundary_source(std::string_view text);

/// Supremum of stable lambda_s at each lambda_p grid value.
struct RegionBoundary {
  std::vector<double> lambda_p_grid;
  std::vector<double> lambda_s_max;
  RegionLabel label = RegionLabel::Union;
  BoundarySource source = BoundarySource::Analytic;
  /// Simulated points too close to the detector's resolution to trust.
  std::vector<bool> uncertain;
  /// Simulated points where even lambda_s = 0 was unstable at a lambda_p the
  /// PU axis probe called stable, so no bracket existed.
  std::vector<bool> unbracketed;
  /// Distinguishes boundaries of the same label within one experiment, e.g.
  /// `r1_a0.10` or `les0.50_union`. Used for file names.
  std::string series;

  std::size_t size() const noexcept { return lambda_p_grid.size(); }
};

using RegionPredicate = std::function<bool(const RatePoint&)>;

/// Membership predicate for a labelled region. `a` selects the access
/// probability for R1/R2; `a_grid` is the union's search grid.
RegionPredicate region_predicate(const SystemParams& params, RegionLabel label, double a,
                                 std::span<const double> a_grid);

/// Bisection over lambda_s in [0, 1] at every grid lambda_p. The predicate
/// must be downward closed in lambda_s. Each value is accurate to within
/// `tol` (the bracket is in fact refined to min(tol, 1e-9)); 0 is reported
/// where lambda_s = tol is already outside.
RegionBoundary extract_boundary(const RegionPredicate& region, std::span<const double> lambda_p_grid,
                                double tol, RegionLabel label);

/// {0, step, 2 step, ..., max}, computed by multiplication so the grid
/// points are exact multiples of `step`.
std::vector<double> make_grid(double max, double step);
std::vector<double> default_a_grid();
std::vector<double> default_lambda_p_grid();
inline constexpr double kDefaultBisectTol = 1e-4;

}  // namespace ehcr
