#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ehcr {

/// Thrown when a parameter, rate or probability lies outside its legal range.
/// The message always names the offending field.
class RangeError : public std::invalid_argument {
 public:
  RangeError(std::string field, double value);

  const std::string& field() const noexcept { return field_; }
  double value() const noexcept { return value_; }

 private:
  std::string field_;
  double value_;
};

/// Channel success probabilities and energy harvesting rates.
///
/// Only success probabilities are stored; the matching outage probability of a
/// link is always `1 - success`.
struct SystemParams {
  double p_pd_success = 0.0;  // PU source -> PU destination
  double p_ss_success = 0.0;  // PU source -> SU
  double s_pd_success = 0.0;  // SU -> PU destination
  double s_sd_success = 0.0;  // SU -> SU destination
  double lambda_ep = 0.0;     // energy arrivals at the PU battery [units/slot]
  double lambda_es = 0.0;     // energy arrivals at the SU battery [units/slot]

  double p_pd_outage() const noexcept { return 1.0 - p_pd_success; }
  double p_ss_outage() const noexcept { return 1.0 - p_ss_success; }
  double s_pd_outage() const noexcept { return 1.0 - s_pd_success; }
  double s_sd_outage() const noexcept { return 1.0 - s_sd_success; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Link probabilities used throughout the numerical results, with the given
/// harvesting rates.
SystemParams baseline_params(double lambda_ep, double lambda_es) noexcept;

/// Returns `params` unchanged when every field lies in [0, 1]; throws
/// RangeError naming the first offending field otherwise.
const SystemParams& validate_params(const SystemParams& params);

/// A candidate pair of data arrival rates [packets/slot].
struct RatePoint {
  double lambda_p = 0.0;
  double lambda_s = 0.0;

  friend bool operator==(const RatePoint&, const RatePoint&) = default;
};

const RatePoint& validate_rates(const RatePoint& rates);

enum class PolicyKind {
  CooperativeRandomized,
  DominantI,
  DominantII,
  NonCooperative,
};

std::string_view to_string(PolicyKind kind) noexcept;
/// Accepts the names produced by to_string as well as the short config
/// spellings (`cooperative`, `dominant1`, `dominant2`, `noncooperative`).
PolicyKind parse_policy_kind(std::string_view text);

struct PolicySpec {
  PolicyKind kind = PolicyKind::CooperativeRandomized;
  /// Probability that the SU serves its own queue in an idle slot.
  double access_prob_a = 0.5;

  double access_complement() const noexcept { return 1.0 - access_prob_a; }
  bool cooperative() const noexcept { return kind != PolicyKind::NonCooperative; }

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

const PolicySpec& validate_policy(const PolicySpec& policy);

/// The five queues of the system.
enum class Queue : std::size_t {
  Primary = 0,          // Q_p
  Secondary = 1,        // Q_s
  Relay = 2,            // Q_ps
  PrimaryEnergy = 3,    // Q_ep
  SecondaryEnergy = 4,  // Q_es
};

inline constexpr std::size_t kQueueCount = 5;
inline constexpr std::size_t kDataQueueCount = 3;

template <typename T>
using PerQueue = std::array<T, kQueueCount>;
template <typename T>
using PerDataQueue = std::array<T, kDataQueueCount>;

constexpr std::size_t index(Queue q) noexcept { return static_cast<std::size_t>(q); }
std::string_view to_string(Queue q) noexcept;

/// Queue lengths; data queues count packets, batteries count energy units.
struct QueueState {
  std::int64_t q_p = 0;
  std::int64_t q_s = 0;
  std::int64_t q_ps = 0;
  std::int64_t q_ep = 0;
  std::int64_t q_es = 0;

  std::int64_t operator[](Queue q) const noexcept;
  bool valid() const noexcept {
    return q_p >= 0 && q_s >= 0 && q_ps >= 0 && q_ep >= 0 && q_es >= 0;
  }

  friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// Throws RangeError unless `value` lies in [0, 1].
double require_unit_interval(std::string_view field, double value);

}  // namespace ehcr
