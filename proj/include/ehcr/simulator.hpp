#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ehcr/analytic.hpp"
#include "ehcr/model.hpp"
#include "ehcr/rng.hpp"

namespace ehcr {

struct SimConfig {
  std::int64_t horizon_slots = 200'000;
  std::int64_t burn_in_slots = 20'000;
  int replications = 5;
  std::uint64_t seed = 42;
  /// Treat Q_p as permanently backlogged (infinite supply of PU packets).
  bool saturate_pu = false;
  /// A data queue whose estimated growth exceeds this [packets/slot] in a
  /// majority of replications is declared unstable.
  double drift_epsilon = 0.01;
  /// Keep the queue state after every slot in SimOutcome::trace.
  bool record_trace = false;
};

/// Throws std::invalid_argument naming the offending field.
const SimConfig& validate_config(const SimConfig& config);

/// The independent uniforms consumed by one slot. Every slot draws all of
/// them whether or not they are used, so two runs with the same stream see
/// the same channel and arrival realisations slot by slot.
enum class Draw : std::size_t {
  PuToPd,
  PuToSu,
  SuSelect,
  SuToSd,
  SuToPd,
  ArrivalP,
  ArrivalS,
  HarvestP,
  HarvestS,
};
inline constexpr std::size_t kDrawsPerSlot = 9;

struct SlotDraws {
  std::array<double, kDrawsPerSlot> u{};

  double operator[](Draw d) const noexcept { return u[static_cast<std::size_t>(d)]; }
};

/// Draws for slot `slot` of the stream, by random access.
SlotDraws slot_draws(const CounterRng& gen, std::uint64_t slot) noexcept;
/// Draws the next slot's worth of uniforms from a sequential stream.
SlotDraws next_slot_draws(RandomStream& rng) noexcept;

enum class SuTarget : std::uint8_t { None, Secondary, Relay };

/// What happened in one slot.
struct SlotEvents {
  bool pu_transmitted = false;
  bool pu_delivered = false;  // decoded by the PU destination
  bool pu_relayed = false;    // handed to Q_ps
  SuTarget su_target = SuTarget::None;
  bool su_dummy = false;      // a dominant-system filler transmission
  bool su_delivered = false;  // a real packet left Q_s or Q_ps
  bool arrival_p = false;
  bool arrival_s = false;
  bool harvest_p = false;
  bool harvest_s = false;

  int transmissions() const noexcept { return int(pu_transmitted) + int(su_target != SuTarget::None); }
};

struct SlotResult {
  QueueState state;
  SlotEvents events;
};

/// Executes one slot: PU phase, SU phase (only if the PU stayed silent),
/// then arrivals, which cannot be served before the next slot.
SlotResult step_slot(const QueueState& state, const SystemParams& params, const RatePoint& rates,
                     const PolicySpec& policy, const SlotDraws& draws, bool saturate_pu = false) noexcept;
SlotResult step_slot(const QueueState& state, const SystemParams& params, const RatePoint& rates,
                     const PolicySpec& policy, RandomStream& rng, bool saturate_pu = false) noexcept;

/// Counters accumulated over the post burn-in window.
struct WindowCounts {
  std::int64_t slots = 0;
  std::int64_t pu_backlogged = 0;  // slots starting with Q_p != 0 (always, when saturated)
  std::int64_t pu_departures = 0;  // delivered + relayed
  std::int64_t pu_transmissions = 0;
  std::int64_t relay_admissions = 0;
  std::int64_t idle_slots = 0;
  std::int64_t idle_es_nonempty = 0;  // idle slots starting with Q_es != 0
  std::int64_t su_backlogged = 0;     // slots starting with Q_s != 0
  std::int64_t su_departures = 0;
  std::int64_t relay_backlogged = 0;  // slots starting with Q_ps != 0
  std::int64_t relay_departures = 0;
};

struct SimOutcome {
  /// Whole-run totals; for the batteries these are energy harvested / spent.
  PerQueue<std::int64_t> admissions{};
  PerQueue<std::int64_t> departures{};
  QueueState final_state;
  /// Time-average lengths over the post burn-in window.
  PerQueue<double> mean_queue{};
  /// Estimated growth rate of Q_p, Q_s, Q_ps [packets/slot].
  PerDataQueue<double> drift{};
  PerDataQueue<bool> queue_stable{};
  bool stable = true;
  /// Fraction of window slots with Q_p != 0 and Q_ep != 0 at the slot start.
  double joint_busy_pu = 0.0;
  WindowCounts window;
  /// Cumulative energy spent never exceeded energy harvested, per node,
  /// checked after every slot.
  bool energy_causal = true;
  std::vector<QueueState> trace;
};

/// Runs one replication from empty queues on the stream keyed by
/// (config.seed, id).
SimOutcome run_replication(const SimConfig& config, const SystemParams& params, const RatePoint& rates,
                           const PolicySpec& policy, StreamId id = {});

/// Process-wide tally kept by run_replication: every finished run checks
/// admissions - departures == final backlog for each queue and energy
/// causality, and records any failure here.
struct RunAudit {
  std::uint64_t runs = 0;
  std::uint64_t conservation_failures = 0;
  std::uint64_t causality_failures = 0;
};
RunAudit run_audit() noexcept;

struct StabilityVerdict {
  PerDataQueue<bool> queue_stable{};
  bool stable = true;
  PerDataQueue<int> unstable_votes{};
  int replications = 0;
  /// Every replication agreed on every queue.
  bool unanimous = true;
  PerDataQueue<double> drift_min{};
  PerDataQueue<double> drift_max{};
};

/// Majority vote of config.replications runs; replication r uses the stream
/// `base` with its replication field set to r. Requires replications >= 3.
StabilityVerdict is_stable_point(const SimConfig& config, const SystemParams& params,
                                 const RatePoint& rates, const PolicySpec& policy, StreamId base = {});

struct MeasuredRates {
  /// mu_p, mu_s and mu_ps are departures per slot in which the queue was
  /// nonempty. es_busy_prob is Pr(Q_es != 0) over PU-idle slots, the
  /// quantity whose value is lambda_es / I when the SU spends a unit in every
  /// idle slot it can.
  AnalyticPoint rates;
  double joint_busy_pu = 0.0;
  /// |joint_busy_pu - lambda_ep * lambda_p / mu_p|; reported, not judged.
  double independence_gap = 0.0;
  bool censored = false;
  std::string warning;
};

/// Pools the windows of every replication. When any data queue is unstable
/// the result is flagged as censored.
MeasuredRates measure_service_rates(const SimConfig& config, const SystemParams& params,
                                    const RatePoint& rates, const PolicySpec& policy, StreamId base = {});

}  // namespace ehcr
