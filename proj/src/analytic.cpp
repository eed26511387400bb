#include "ehcr/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ehcr {

namespace {

std::string unstable_message(double lambda_p, double mu_p) {
  std::ostringstream out;
  out << "PU queue unstable: lambda_p = " << lambda_p << " >= mu_p = " << mu_p;
  return out.str();
}

double battery_busy(double lambda_es, double idle, EsBusyMode mode) noexcept {
  if (idle <= 0.0) return lambda_es > 0.0 ? 1.0 : 0.0;
  const double raw = lambda_es / idle;
  return mode == EsBusyMode::Clamped ? std::min(1.0, raw) : raw;
}

// Everything on the PU side of the system at a given lambda_p, plus the SU
// transmission opportunity rate es_busy * I that both dominant systems share.
struct PrimarySide {
  double mu_p = 0.0;
  double idle = 1.0;
  double es_busy = 0.0;
  double lambda_ps = 0.0;

  double su_tx_rate() const noexcept { return es_busy * idle; }
};

std::optional<PrimarySide> primary_side(const SystemParams& params, double lambda_p, bool cooperative,
                                        EsBusyMode mode) {
  PrimarySide side;
  side.mu_p = cooperative ? pu_service_rate(params) : noncoop_pu_service_rate(params);
  if (!(lambda_p < side.mu_p)) return std::nullopt;
  const double load = lambda_p / side.mu_p;
  side.idle = 1.0 - params.lambda_ep * load;
  side.es_busy = battery_busy(params.lambda_es, side.idle, mode);
  if (cooperative) side.lambda_ps = params.p_pd_outage() * params.p_ss_success * params.lambda_ep * load;
  return side;
}

// lambda_ps < mu_ps, except that a relay queue with neither arrivals nor
// service is stable.
bool relay_condition(double lambda_ps, double mu_ps) noexcept {
  if (mu_ps > 0.0) return lambda_ps < mu_ps;
  return lambda_ps == 0.0;
}

AnalyticPoint dominant1_rates(const SystemParams& params, double a, const PrimarySide& side) {
  const double tx = side.su_tx_rate();
  AnalyticPoint out{side.mu_p, side.lambda_ps, side.idle, side.es_busy, 0.0, 0.0};
  out.mu_ps = params.s_pd_success * tx * (1.0 - a);
  // The a-dependence cancels between mu_ps and the fraction of relay
  // selections that find Q_ps empty, leaving only the full relay capacity.
  const double relay_capacity = params.s_pd_success * tx;
  const double relay_share = side.lambda_ps == 0.0 ? 0.0 : side.lambda_ps / relay_capacity;
  out.mu_s = std::max(0.0, params.s_sd_success * tx * (1.0 - relay_share));
  return out;
}

AnalyticPoint dominant2_rates(const SystemParams& params, double a, double lambda_s,
                              const PrimarySide& side) {
  const double tx = side.su_tx_rate();
  AnalyticPoint out{side.mu_p, side.lambda_ps, side.idle, side.es_busy, 0.0, 0.0};
  out.mu_s = params.s_sd_success * tx * a;
  const double own_capacity = params.s_sd_success * tx;
  const double own_share = lambda_s == 0.0 ? 0.0 : lambda_s / own_capacity;
  out.mu_ps = std::max(0.0, params.s_pd_success * tx * (1.0 - own_share));
  return out;
}

}  // namespace

UnstablePrimaryError::UnstablePrimaryError(double lambda_p, double mu_p)
    : std::domain_error(unstable_message(lambda_p, mu_p)) {}

double pu_success_probability(const SystemParams& params) noexcept {
  return params.p_pd_success + params.p_pd_outage() * params.p_ss_success;
}

double pu_service_rate(const SystemParams& params) noexcept {
  return pu_success_probability(params) * params.lambda_ep;
}

double noncoop_pu_service_rate(const SystemParams& params) noexcept {
  return params.p_pd_success * params.lambda_ep;
}

double relay_arrival_rate(const SystemParams& params, double lambda_p) {
  const double mu_p = pu_service_rate(params);
  if (!(lambda_p < mu_p)) throw UnstablePrimaryError(lambda_p, mu_p);
  return params.p_pd_outage() * params.p_ss_success * params.lambda_ep * (lambda_p / mu_p);
}

double idle_probability(const SystemParams& params, double lambda_p) {
  const double mu_p = pu_service_rate(params);
  if (!(lambda_p < mu_p)) throw UnstablePrimaryError(lambda_p, mu_p);
  return 1.0 - params.lambda_ep * (lambda_p / mu_p);
}

double es_busy_probability(const SystemParams& params, double lambda_p) {
  return battery_busy(params.lambda_es, idle_probability(params, lambda_p), EsBusyMode::Clamped);
}

std::optional<AnalyticPoint> analytic_point(const SystemParams& params, const PolicySpec& policy,
                                            const RatePoint& pt, EsBusyMode mode) {
  const auto side = primary_side(params, pt.lambda_p, policy.cooperative(), mode);
  if (!side) return std::nullopt;
  switch (policy.kind) {
    case PolicyKind::DominantI:
      return dominant1_rates(params, policy.access_prob_a, *side);
    case PolicyKind::DominantII:
      return dominant2_rates(params, policy.access_prob_a, pt.lambda_s, *side);
    case PolicyKind::NonCooperative: {
      AnalyticPoint out{side->mu_p, 0.0, side->idle, side->es_busy, 0.0, 0.0};
      out.mu_s = params.s_sd_success * side->su_tx_rate();
      return out;
    }
    case PolicyKind::CooperativeRandomized:
      break;
  }
  throw std::invalid_argument(
      "analytic_point: the randomized policy has no closed form; use a dominant system");
}

bool region1_contains(const SystemParams& params, double a, const RatePoint& pt) {
  const auto side = primary_side(params, pt.lambda_p, true, EsBusyMode::Clamped);
  if (!side) return false;
  const AnalyticPoint rates = dominant1_rates(params, a, *side);
  if (!relay_condition(rates.lambda_ps, rates.mu_ps)) return false;
  return pt.lambda_s < rates.mu_s;
}

bool region2_contains(const SystemParams& params, double a, const RatePoint& pt) {
  const auto side = primary_side(params, pt.lambda_p, true, EsBusyMode::Clamped);
  if (!side) return false;
  const AnalyticPoint rates = dominant2_rates(params, a, pt.lambda_s, *side);
  if (!(pt.lambda_s < rates.mu_s)) return false;
  return relay_condition(rates.lambda_ps, rates.mu_ps);
}

bool union_contains(const SystemParams& params, const RatePoint& pt, std::span<const double> a_grid) {
  if (a_grid.empty()) throw std::invalid_argument("union_contains: empty a grid");
  return std::any_of(a_grid.begin(), a_grid.end(), [&](double a) {
    require_unit_interval("a", a);
    return region1_contains(params, a, pt) || region2_contains(params, a, pt);
  });
}

bool noncoop_contains(const SystemParams& params, const RatePoint& pt) {
  const auto side = primary_side(params, pt.lambda_p, false, EsBusyMode::Clamped);
  if (!side) return false;
  return pt.lambda_s < params.s_sd_success * side->su_tx_rate();
}

Crossover crossover_lambda_p(const SystemParams& params) {
  if (params.p_pd_success == 0.0) {
    throw std::domain_error("crossover undefined: p_pd_success is 0");
  }
  const double relayed = params.p_pd_outage() * params.p_ss_success;
  if (params.s_pd_success == 0.0 && relayed > 0.0) {
    throw std::domain_error("crossover undefined: s_pd_success is 0");
  }
  const double relay_term =
      relayed == 0.0 ? 0.0 : relayed / (params.s_pd_success * (params.p_pd_success + relayed));
  const double d = 1.0 / params.p_pd_success - relay_term;
  return Crossover{d};
}

std::string_view to_string(RegionLabel label) noexcept {
  switch (label) {
    case RegionLabel::R1: return "r1";
    case RegionLabel::R2: return "r2";
    case RegionLabel::Union: return "union";
    case RegionLabel::NonCooperative: return "noncoop";
  }
  return "unknown";
}

RegionLabel parse_region_label(std::string_view text) {
  if (text == "r1") return RegionLabel::R1;
  if (text == "r2") return RegionLabel::R2;
  if (text == "union") return RegionLabel::Union;
  if (text == "noncoop") return RegionLabel::NonCooperative;
  throw std::invalid_argument("unknown region label '" + std::string(text) + "'");
}

std::string_view to_string(BoundarySource source) noexcept {
  return source == BoundarySource::Analytic ? "analytic" : "simulated";
}

BoundarySource parse_boundary_source(std::string_view text) {
  if (text == "analytic") return BoundarySource::Analytic;
  if (text == "simulated") return BoundarySource::Simulated;
  throw std::invalid_argument("unknown boundary source '" + std::string(text) + "'");
}

RegionPredicate region_predicate(const SystemParams& params, RegionLabel label, double a,
                                 std::span<const double> a_grid) {
  switch (label) {
    case RegionLabel::R1:
      return [params, a](const RatePoint& pt) { return region1_contains(params, a, pt); };
    case RegionLabel::R2:
      return [params, a](const RatePoint& pt) { return region2_contains(params, a, pt); };
    case RegionLabel::Union: {
      std::vector<double> grid(a_grid.begin(), a_grid.end());
      if (grid.empty()) throw std::invalid_argument("region_predicate: empty a grid");
      return [params, grid = std::move(grid)](const RatePoint& pt) {
        return union_contains(params, pt, grid);
      };
    }
    case RegionLabel::NonCooperative:
      return [params](const RatePoint& pt) { return noncoop_contains(params, pt); };
  }
  throw std::invalid_argument("region_predicate: bad label");
}

RegionBoundary extract_boundary(const RegionPredicate& region, std::span<const double> lambda_p_grid,
                                double tol, RegionLabel label) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("extract_boundary: tol must lie in (0, 1)");
  for (std::size_t i = 1; i < lambda_p_grid.size(); ++i) {
    if (!(lambda_p_grid[i] > lambda_p_grid[i - 1])) {
      throw std::invalid_argument("extract_boundary: lambda_p grid must be strictly increasing");
    }
  }
  const double width = std::min(tol, 1e-9);

  RegionBoundary out;
  out.label = label;
  out.source = BoundarySource::Analytic;
  out.lambda_p_grid.assign(lambda_p_grid.begin(), lambda_p_grid.end());
  out.lambda_s_max.reserve(lambda_p_grid.size());
  for (double lp : lambda_p_grid) {
    if (!region({lp, tol})) {
      out.lambda_s_max.push_back(0.0);
      continue;
    }
    if (region({lp, 1.0})) {
      out.lambda_s_max.push_back(1.0);
      continue;
    }
    double lo = tol;
    double hi = 1.0;
    while (hi - lo > width) {
      const double mid = 0.5 * (lo + hi);
      (region({lp, mid}) ? lo : hi) = mid;
    }
    out.lambda_s_max.push_back(lo);
  }
  out.uncertain.assign(out.size(), false);
  out.unbracketed.assign(out.size(), false);
  return out;
}

std::vector<double> make_grid(double max, double step) {
  if (!(step > 0.0) || !(max >= 0.0)) throw std::invalid_argument("make_grid: need step > 0 and max >= 0");
  const auto last = static_cast<std::size_t>(std::floor(max / step + 1e-9));
  std::vector<double> grid(last + 1);
  for (std::size_t i = 0; i <= last; ++i) grid[i] = std::min(max, static_cast<double>(i) * step);
  return grid;
}

std::vector<double> default_a_grid() { return make_grid(1.0, 0.05); }
std::vector<double> default_lambda_p_grid() { return make_grid(0.6, 0.005); }

}  // namespace ehcr
