#include "ehcr/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ehcr {

namespace {

constexpr std::uint64_t kWordsPerSlot = (kDrawsPerSlot + 1) / 2;

// Two 32-bit uniforms per 64-bit word; 2^-32 resolution is ample for
// Bernoulli thresholds and keeps a slot at five hash evaluations.
template <typename NextWord>
SlotDraws unpack(NextWord&& next) noexcept {
  SlotDraws d;
  for (std::size_t i = 0; i < kDrawsPerSlot; i += 2) {
    const std::uint64_t w = next();
    d.u[i] = static_cast<double>(w >> 32) * 0x1.0p-32;
    if (i + 1 < kDrawsPerSlot) d.u[i + 1] = static_cast<double>(w & 0xffffffffULL) * 0x1.0p-32;
  }
  return d;
}

enum class Pick : std::uint8_t { None, Own, OwnDummy, Relay, RelayDummy };

Pick pick_su_queue(PolicyKind kind, bool select_own, bool own_nonempty, bool relay_nonempty) noexcept {
  switch (kind) {
    case PolicyKind::CooperativeRandomized:
      if (select_own) return own_nonempty ? Pick::Own : relay_nonempty ? Pick::Relay : Pick::None;
      return relay_nonempty ? Pick::Relay : own_nonempty ? Pick::Own : Pick::None;
    case PolicyKind::DominantI:
      // Q_s always has something to send, real or dummy.
      if (!select_own && relay_nonempty) return Pick::Relay;
      return own_nonempty ? Pick::Own : Pick::OwnDummy;
    case PolicyKind::DominantII:
      if (select_own && own_nonempty) return Pick::Own;
      return relay_nonempty ? Pick::Relay : Pick::RelayDummy;
    case PolicyKind::NonCooperative:
      return own_nonempty ? Pick::Own : Pick::None;
  }
  return Pick::None;
}

std::atomic<std::uint64_t> g_runs{0};
std::atomic<std::uint64_t> g_conservation_failures{0};
std::atomic<std::uint64_t> g_causality_failures{0};

std::string config_error(const char* field, const char* what) {
  return std::string("SimConfig.") + field + " " + what;
}

}  // namespace

const SimConfig& validate_config(const SimConfig& config) {
  if (config.horizon_slots <= 0) throw std::invalid_argument(config_error("horizon_slots", "must be positive"));
  if (config.burn_in_slots < 0) {
    throw std::invalid_argument(config_error("burn_in_slots", "must be nonnegative"));
  }
  if (config.burn_in_slots >= config.horizon_slots) {
    throw std::invalid_argument(config_error("burn_in_slots", "must be smaller than horizon_slots"));
  }
  if (config.horizon_slots - config.burn_in_slots < 4) {
    throw std::invalid_argument(config_error("horizon_slots", "leaves fewer than 4 measured slots"));
  }
  if (config.replications <= 0) throw std::invalid_argument(config_error("replications", "must be positive"));
  if (!(config.drift_epsilon > 0.0)) {
    throw std::invalid_argument(config_error("drift_epsilon", "must be positive"));
  }
  return config;
}

SlotDraws slot_draws(const CounterRng& gen, std::uint64_t slot) noexcept {
  std::uint64_t counter = slot * kWordsPerSlot;
  return unpack([&] { return gen.bits_at(counter++); });
}

SlotDraws next_slot_draws(RandomStream& rng) noexcept {
  return unpack([&] { return rng.next_bits(); });
}

SlotResult step_slot(const QueueState& state, const SystemParams& params, const RatePoint& rates,
                     const PolicySpec& policy, const SlotDraws& draws, bool saturate_pu) noexcept {
  SlotResult out{state, {}};
  QueueState& q = out.state;
  SlotEvents& ev = out.events;

  // PU phase.
  if ((saturate_pu || q.q_p > 0) && q.q_ep > 0) {
    ev.pu_transmitted = true;
    --q.q_ep;
    if (draws[Draw::PuToPd] < params.p_pd_success) {
      ev.pu_delivered = true;
    } else if (policy.cooperative() && draws[Draw::PuToSu] < params.p_ss_success) {
      ev.pu_relayed = true;
      ++q.q_ps;
    }
    if (!saturate_pu && (ev.pu_delivered || ev.pu_relayed)) --q.q_p;
  }

  // SU phase: perfect sensing, so only in slots the PU left idle.
  if (!ev.pu_transmitted && q.q_es > 0) {
    const bool select_own = draws[Draw::SuSelect] < policy.access_prob_a;
    const Pick pick = pick_su_queue(policy.kind, select_own, q.q_s > 0, q.q_ps > 0);
    if (pick != Pick::None) {
      --q.q_es;
      const bool own = pick == Pick::Own || pick == Pick::OwnDummy;
      ev.su_target = own ? SuTarget::Secondary : SuTarget::Relay;
      ev.su_dummy = pick == Pick::OwnDummy || pick == Pick::RelayDummy;
      const bool success = own ? draws[Draw::SuToSd] < params.s_sd_success
                               : draws[Draw::SuToPd] < params.s_pd_success;
      if (success && !ev.su_dummy) {
        ev.su_delivered = true;
        --(own ? q.q_s : q.q_ps);
      }
    }
  }

  // Arrivals land at the end of the slot.
  ev.arrival_p = draws[Draw::ArrivalP] < rates.lambda_p;
  ev.arrival_s = draws[Draw::ArrivalS] < rates.lambda_s;
  ev.harvest_p = draws[Draw::HarvestP] < params.lambda_ep;
  ev.harvest_s = draws[Draw::HarvestS] < params.lambda_es;
  if (!saturate_pu) q.q_p += ev.arrival_p;
  q.q_s += ev.arrival_s;
  q.q_ep += ev.harvest_p;
  q.q_es += ev.harvest_s;
  return out;
}

SlotResult step_slot(const QueueState& state, const SystemParams& params, const RatePoint& rates,
                     const PolicySpec& policy, RandomStream& rng, bool saturate_pu) noexcept {
  return step_slot(state, params, rates, policy, next_slot_draws(rng), saturate_pu);
}

SimOutcome run_replication(const SimConfig& config, const SystemParams& params, const RatePoint& rates,
                           const PolicySpec& policy, StreamId id) {
  validate_config(config);
  validate_params(params);
  validate_rates(rates);
  validate_policy(policy);

  const CounterRng gen(config.seed, id);
  const std::int64_t horizon = config.horizon_slots;
  const std::int64_t burn_in = config.burn_in_slots;
  const std::int64_t window = horizon - burn_in;
  // Quarter boundaries of the measured window.
  const std::int64_t q2_begin = burn_in + window / 4;
  const std::int64_t q2_end = burn_in + window / 2;
  const std::int64_t q4_begin = burn_in + (3 * window) / 4;

  SimOutcome out;
  if (config.record_trace) out.trace.reserve(static_cast<std::size_t>(horizon));

  QueueState q;
  PerQueue<std::int64_t> admissions{};
  PerQueue<std::int64_t> departures{};
  PerQueue<double> window_sum{};
  PerDataQueue<double> q2_sum{};
  PerDataQueue<double> q4_sum{};
  WindowCounts& wc = out.window;
  std::int64_t joint_busy = 0;
  bool causal = true;

  for (std::int64_t t = 0; t < horizon; ++t) {
    const QueueState before = q;
    const SlotResult r = step_slot(before, params, rates, policy, slot_draws(gen, static_cast<std::uint64_t>(t)),
                                   config.saturate_pu);
    const SlotEvents& ev = r.events;
    q = r.state;

    const bool pu_left = ev.pu_delivered || ev.pu_relayed;
    const bool su_own_left = ev.su_delivered && ev.su_target == SuTarget::Secondary;
    const bool su_relay_left = ev.su_delivered && ev.su_target == SuTarget::Relay;
    const bool su_tx = ev.su_target != SuTarget::None;

    if (!config.saturate_pu) {
      admissions[index(Queue::Primary)] += ev.arrival_p;
      departures[index(Queue::Primary)] += pu_left;
    }
    admissions[index(Queue::Secondary)] += ev.arrival_s;
    departures[index(Queue::Secondary)] += su_own_left;
    admissions[index(Queue::Relay)] += ev.pu_relayed;
    departures[index(Queue::Relay)] += su_relay_left;
    admissions[index(Queue::PrimaryEnergy)] += ev.harvest_p;
    departures[index(Queue::PrimaryEnergy)] += ev.pu_transmitted;
    admissions[index(Queue::SecondaryEnergy)] += ev.harvest_s;
    departures[index(Queue::SecondaryEnergy)] += su_tx;

    // Energy spent so far never exceeds energy harvested before this slot
    // ends; the unit harvested this slot is not yet spendable.
    causal = causal &&
             departures[index(Queue::PrimaryEnergy)] <=
                 admissions[index(Queue::PrimaryEnergy)] - ev.harvest_p &&
             departures[index(Queue::SecondaryEnergy)] <=
                 admissions[index(Queue::SecondaryEnergy)] - ev.harvest_s;

    if (config.record_trace) out.trace.push_back(q);
    if (t < burn_in) continue;

    ++wc.slots;
    const bool pu_backlogged = config.saturate_pu || before.q_p > 0;
    wc.pu_backlogged += pu_backlogged;
    wc.pu_departures += pu_left;
    wc.pu_transmissions += ev.pu_transmitted;
    wc.relay_admissions += ev.pu_relayed;
    joint_busy += pu_backlogged && before.q_ep > 0;
    if (!ev.pu_transmitted) {
      ++wc.idle_slots;
      wc.idle_es_nonempty += before.q_es > 0;
    }
    wc.su_backlogged += before.q_s > 0;
    wc.su_departures += su_own_left;
    wc.relay_backlogged += before.q_ps > 0;
    wc.relay_departures += su_relay_left;

    const PerQueue<double> lengths{double(q.q_p), double(q.q_s), double(q.q_ps), double(q.q_ep),
                                   double(q.q_es)};
    for (std::size_t i = 0; i < kQueueCount; ++i) window_sum[i] += lengths[i];
    if (t >= q2_begin && t < q2_end) {
      for (std::size_t i = 0; i < kDataQueueCount; ++i) q2_sum[i] += lengths[i];
    } else if (t >= q4_begin) {
      for (std::size_t i = 0; i < kDataQueueCount; ++i) q4_sum[i] += lengths[i];
    }
  }

  out.admissions = admissions;
  out.departures = departures;
  out.final_state = q;
  out.energy_causal = causal;
  bool conserved = true;
  for (std::size_t i = 0; i < kQueueCount; ++i) {
    conserved = conserved && admissions[i] - departures[i] == q[static_cast<Queue>(i)];
  }
  ++g_runs;
  g_conservation_failures += !conserved;
  g_causality_failures += !causal;
  const double n = static_cast<double>(wc.slots);
  for (std::size_t i = 0; i < kQueueCount; ++i) out.mean_queue[i] = window_sum[i] / n;
  out.joint_busy_pu = static_cast<double>(joint_busy) / n;

  // Growth between the centres of the second and fourth quarters, which lie
  // half a window apart.
  const double q2_len = static_cast<double>(q2_end - q2_begin);
  const double q4_len = static_cast<double>(horizon - q4_begin);
  const double centre_gap = 0.5 * static_cast<double>((q4_begin + horizon) - (q2_begin + q2_end));
  out.stable = true;
  for (std::size_t i = 0; i < kDataQueueCount; ++i) {
    out.drift[i] = (q4_sum[i] / q4_len - q2_sum[i] / q2_len) / centre_gap;
    out.queue_stable[i] = !(out.drift[i] > config.drift_epsilon);
    out.stable = out.stable && out.queue_stable[i];
  }
  return out;
}

RunAudit run_audit() noexcept {
  return RunAudit{g_runs.load(), g_conservation_failures.load(), g_causality_failures.load()};
}

StabilityVerdict is_stable_point(const SimConfig& config, const SystemParams& params, const RatePoint& rates,
                                 const PolicySpec& policy, StreamId base) {
  validate_config(config);
  if (config.replications < 3) {
    throw std::invalid_argument("is_stable_point: needs at least 3 replications");
  }
  SimConfig run = config;
  run.record_trace = false;

  StabilityVerdict v;
  v.replications = config.replications;
  v.drift_min.fill(std::numeric_limits<double>::infinity());
  v.drift_max.fill(-std::numeric_limits<double>::infinity());
  for (int r = 0; r < config.replications; ++r) {
    StreamId id = base;
    id.replication = static_cast<std::uint64_t>(r);
    const SimOutcome o = run_replication(run, params, rates, policy, id);
    for (std::size_t i = 0; i < kDataQueueCount; ++i) {
      v.unstable_votes[i] += !o.queue_stable[i];
      v.drift_min[i] = std::min(v.drift_min[i], o.drift[i]);
      v.drift_max[i] = std::max(v.drift_max[i], o.drift[i]);
    }
  }
  v.stable = true;
  v.unanimous = true;
  for (std::size_t i = 0; i < kDataQueueCount; ++i) {
    v.queue_stable[i] = 2 * v.unstable_votes[i] <= config.replications;
    v.stable = v.stable && v.queue_stable[i];
    v.unanimous = v.unanimous && (v.unstable_votes[i] == 0 || v.unstable_votes[i] == config.replications);
  }
  return v;
}

MeasuredRates measure_service_rates(const SimConfig& config, const SystemParams& params,
                                    const RatePoint& rates, const PolicySpec& policy, StreamId base) {
  validate_config(config);
  SimConfig run = config;
  run.record_trace = false;

  WindowCounts total;
  double joint_busy = 0.0;
  std::vector<std::string> unstable;
  for (int r = 0; r < config.replications; ++r) {
    StreamId id = base;
    id.replication = static_cast<std::uint64_t>(r);
    const SimOutcome o = run_replication(run, params, rates, policy, id);
    const WindowCounts& w = o.window;
    total.slots += w.slots;
    total.pu_backlogged += w.pu_backlogged;
    total.pu_departures += w.pu_departures;
    total.pu_transmissions += w.pu_transmissions;
    total.relay_admissions += w.relay_admissions;
    total.idle_slots += w.idle_slots;
    total.idle_es_nonempty += w.idle_es_nonempty;
    total.su_backlogged += w.su_backlogged;
    total.su_departures += w.su_departures;
    total.relay_backlogged += w.relay_backlogged;
    total.relay_departures += w.relay_departures;
    joint_busy += o.joint_busy_pu * static_cast<double>(w.slots);
    for (std::size_t i = 0; i < kDataQueueCount; ++i) {
      if (!o.queue_stable[i]) unstable.emplace_back(to_string(static_cast<Queue>(i)));
    }
  }

  const auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  MeasuredRates m;
  m.rates.mu_p = ratio(total.pu_departures, total.pu_backlogged);
  m.rates.idle_prob = ratio(total.idle_slots, total.slots);
  m.rates.lambda_ps = ratio(total.relay_admissions, total.slots);
  m.rates.es_busy_prob = ratio(total.idle_es_nonempty, total.idle_slots);
  m.rates.mu_s = ratio(total.su_departures, total.su_backlogged);
  m.rates.mu_ps = ratio(total.relay_departures, total.relay_backlogged);
  m.joint_busy_pu = total.slots == 0 ? 0.0 : joint_busy / static_cast<double>(total.slots);
  if (m.rates.mu_p > 0.0) {
    m.independence_gap = std::abs(m.joint_busy_pu - params.lambda_ep * rates.lambda_p / m.rates.mu_p);
  }
  if (!unstable.empty()) {
    std::sort(unstable.begin(), unstable.end());
    unstable.erase(std::unique(unstable.begin(), unstable.end()), unstable.end());
    std::ostringstream msg;
    msg << "censored measurement: unstable queue(s)";
    for (const auto& name : unstable) msg << ' ' << name;
    m.censored = true;
    m.warning = msg.str();
  }
  return m;
}

}  // namespace ehcr
