#include "ehcr/model.hpp"

#include <cmath>
#include <sstream>

namespace ehcr {

namespace {

std::string range_message(const std::string& field, double value) {
  std::ostringstream out;
  out << field << " = " << value << " is outside [0, 1]";
  return out.str();
}

}  // namespace

RangeError::RangeError(std::string field, double value)
    : std::invalid_argument(range_message(field, value)), field_(std::move(field)), value_(value) {}

double require_unit_interval(std::string_view field, double value) {
  // Written so that NaN fails too.
  if (!(value >= 0.0 && value <= 1.0)) throw RangeError(std::string(field), value);
  return value;
}

SystemParams baseline_params(double lambda_ep, double lambda_es) noexcept {
  return SystemParams{
      .p_pd_success = 0.3,
      .p_ss_success = 0.4,
      .s_pd_success = 0.7,
      .s_sd_success = 0.7,
      .lambda_ep = lambda_ep,
      .lambda_es = lambda_es,
  };
}

const SystemParams& validate_params(const SystemParams& params) {
  require_unit_interval("p_pd_success", params.p_pd_success);
  require_unit_interval("p_ss_success", params.p_ss_success);
  require_unit_interval("s_pd_success", params.s_pd_success);
  require_unit_interval("s_sd_success", params.s_sd_success);
  require_unit_interval("lambda_ep", params.lambda_ep);
  require_unit_interval("lambda_es", params.lambda_es);
  return params;
}

const RatePoint& validate_rates(const RatePoint& rates) {
  require_unit_interval("lambda_p", rates.lambda_p);
  require_unit_interval("lambda_s", rates.lambda_s);
  return rates;
}

const PolicySpec& validate_policy(const PolicySpec& policy) {
  require_unit_interval("access_prob_a", policy.access_prob_a);
  return policy;
}

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::CooperativeRandomized: return "cooperative";
    case PolicyKind::DominantI: return "dominant1";
    case PolicyKind::DominantII: return "dominant2";
    case PolicyKind::NonCooperative: return "noncooperative";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view text) {
  if (text == "cooperative" || text == "CooperativeRandomized") return PolicyKind::CooperativeRandomized;
  if (text == "dominant1" || text == "DominantI") return PolicyKind::DominantI;
  if (text == "dominant2" || text == "DominantII") return PolicyKind::DominantII;
  if (text == "noncooperative" || text == "noncoop" || text == "NonCooperative") {
    return PolicyKind::NonCooperative;
  }
  throw std::invalid_argument("unknown policy '" + std::string(text) +
                              "' (expected cooperative, dominant1, dominant2 or noncooperative)");
}

std::string_view to_string(Queue q) noexcept {
  switch (q) {
    case Queue::Primary: return "q_p";
    case Queue::Secondary: return "q_s";
    case Queue::Relay: return "q_ps";
    case Queue::PrimaryEnergy: return "q_ep";
    case Queue::SecondaryEnergy: return "q_es";
  }
  return "unknown";
}

std::int64_t QueueState::operator[](Queue q) const noexcept {
  switch (q) {
    case Queue::Primary: return q_p;
    case Queue::Secondary: return q_s;
    case Queue::Relay: return q_ps;
    case Queue::PrimaryEnergy: return q_ep;
    case Queue::SecondaryEnergy: return q_es;
  }
  return 0;
}

}  // namespace ehcr
