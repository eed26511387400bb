#include <doctest.h>

#include <cmath>

#include "ehcr/analytic.hpp"
#include "ehcr/simulator.hpp"
#include "oracle.hpp"

using namespace ehcr;

namespace {

SimConfig quick(std::int64_t horizon, std::int64_t burn_in = 0) {
  SimConfig c;
  c.horizon_slots = horizon;
  c.burn_in_slots = burn_in;
  return c;
}

void check_conservation(const SimOutcome& o) {
  for (std::size_t i = 0; i < kQueueCount; ++i) {
    CHECK(o.admissions[i] - o.departures[i] == o.final_state[static_cast<Queue>(i)]);
  }
  CHECK(o.energy_causal);
  CHECK(o.final_state.valid());
}

const PolicySpec kCoop{PolicyKind::CooperativeRandomized, 0.5};

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate_config(SimConfig{}));
  CHECK_THROWS_AS(validate_config(quick(100, 100)), std::invalid_argument);
  CHECK_THROWS_AS(validate_config(quick(0)), std::invalid_argument);
  auto c = SimConfig{};
  c.drift_epsilon = 0.0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = SimConfig{};
  c.replications = 2;
  CHECK_THROWS_AS(is_stable_point(c, baseline_params(0.6, 0.6), {0, 0}, kCoop), std::invalid_argument);
}

TEST_CASE("perfect channels and full energy deliver every slot") {
  // The first slot starts with an empty battery; energy harvested in a slot
  // is spendable only from the next one.
  auto c = quick(100001, 1);
  c.saturate_pu = true;
  const SystemParams p{1, 1, 1, 1, 1, 1};
  const auto o = run_replication(c, p, {0, 0}, kCoop);
  CHECK(o.window.pu_departures == 100000);
  CHECK(o.departures[index(Queue::PrimaryEnergy)] == 100000);
  CHECK(double(o.window.pu_departures) / double(o.window.slots) == 1.0);
}

TEST_CASE("saturated PU service rate matches the closed form") {
  auto c = quick(1'000'000);
  c.saturate_pu = true;
  const auto p = baseline_params(0.6, 0.6);
  const auto o = run_replication(c, p, {0, 0}, kCoop);
  const double mu = double(o.window.pu_departures) / double(o.window.pu_backlogged);
  CHECK(std::abs(mu - 0.348) < 0.005);
  check_conservation(o);
}

TEST_CASE("no SU energy means no SU departures") {
  const auto p = baseline_params(0.6, 0.0);
  for (auto kind : {PolicyKind::CooperativeRandomized, PolicyKind::DominantI, PolicyKind::DominantII}) {
    const auto o = run_replication(quick(50000), p, {0.1, 0.2}, {kind, 0.5});
    CHECK(o.departures[index(Queue::Secondary)] == 0);
    CHECK(o.departures[index(Queue::Relay)] == 0);
    CHECK(o.departures[index(Queue::SecondaryEnergy)] == 0);
    check_conservation(o);
  }
}

TEST_CASE("zero arrivals: zero drift and stable") {
  const auto o = run_replication(quick(50000, 5000), baseline_params(0.6, 0.6), {0, 0}, kCoop);
  for (double d : o.drift) CHECK(d == 0.0);
  CHECK(o.stable);
  const auto v = is_stable_point(SimConfig{}, baseline_params(0.6, 0.6), {0, 0}, kCoop);
  CHECK(v.stable);
  CHECK(v.unanimous);
}

TEST_CASE("one transmission per slot and per-slot queue steps") {
  const auto p = baseline_params(0.6, 0.6);
  for (auto kind : {PolicyKind::CooperativeRandomized, PolicyKind::DominantI, PolicyKind::DominantII,
                    PolicyKind::NonCooperative}) {
    RandomStream rng(5, StreamId{9, 0, static_cast<std::uint64_t>(kind)});
    QueueState q;
    bool ok = true;
    for (int t = 0; t < 100000; ++t) {
      const auto r = step_slot(q, p, {0.2, 0.15}, {kind, 0.4}, rng);
      ok = ok && r.events.transmissions() <= 1 && r.state.valid();
      for (std::size_t i = 0; i < kQueueCount; ++i) {
        const auto qi = static_cast<Queue>(i);
        ok = ok && std::abs(r.state[qi] - q[qi]) <= 1;
      }
      // A node spends energy only when it has some at the slot start.
      if (r.events.pu_transmitted) ok = ok && q.q_ep > 0;
      if (r.events.su_target != SuTarget::None) ok = ok && q.q_es > 0;
      q = r.state;
    }
    CHECK(ok);
  }
}

TEST_CASE("dummy packets only in dominant systems, and they cost energy") {
  const auto p = baseline_params(0.6, 0.9);
  const QueueState empty{0, 0, 0, 0, 3};
  SlotDraws d;
  d.u.fill(0.99);  // no arrivals, no harvest, every channel fails
  d.u[static_cast<std::size_t>(Draw::SuSelect)] = 0.1;
  const auto coop = step_slot(empty, p, {0, 0}, {PolicyKind::CooperativeRandomized, 0.5}, d);
  CHECK(coop.events.su_target == SuTarget::None);
  CHECK(coop.state.q_es == 3);
  const auto dom1 = step_slot(empty, p, {0, 0}, {PolicyKind::DominantI, 0.5}, d);
  CHECK(dom1.events.su_dummy);
  CHECK(dom1.events.su_target == SuTarget::Secondary);
  CHECK(dom1.state.q_es == 2);
  const auto dom2 = step_slot(empty, p, {0, 0}, {PolicyKind::DominantII, 0.5}, d);
  CHECK(dom2.events.su_dummy);
  CHECK(dom2.state.q_es == 2);
}

TEST_CASE("relay handoff and failed SU transmissions") {
  const auto p = baseline_params(0.6, 0.6);
  SlotDraws d;
  d.u.fill(0.99);
  d.u[static_cast<std::size_t>(Draw::PuToSu)] = 0.0;  // SU overhears, PD misses
  const QueueState s{1, 0, 0, 1, 1};
  const auto coop = step_slot(s, p, {0, 0}, kCoop, d);
  CHECK(coop.events.pu_relayed);
  CHECK(coop.state.q_p == 0);
  CHECK(coop.state.q_ps == 1);
  CHECK(coop.state.q_es == 1);  // receiving costs nothing
  const auto nc = step_slot(s, p, {0, 0}, {PolicyKind::NonCooperative}, d);
  CHECK_FALSE(nc.events.pu_relayed);
  CHECK(nc.state.q_p == 1);  // retransmitted later
  CHECK(nc.state.q_ps == 0);

  // SU sends its own packet over a failing link: packet stays, energy gone.
  const QueueState su{0, 2, 0, 0, 1};
  const auto f = step_slot(su, p, {0, 0}, kCoop, d);
  CHECK(f.events.su_target == SuTarget::Secondary);
  CHECK_FALSE(f.events.su_delivered);
  CHECK(f.state.q_s == 2);
  CHECK(f.state.q_es == 0);
}

TEST_CASE("arrivals cannot be served in the slot they arrive") {
  const SystemParams p{1, 1, 1, 1, 1, 1};
  SlotDraws d;
  d.u.fill(0.0);
  const auto r = step_slot(QueueState{0, 0, 0, 1, 1}, p, {1, 1}, kCoop, d);
  CHECK_FALSE(r.events.pu_transmitted);
  CHECK(r.events.su_target == SuTarget::None);
  CHECK(r.state.q_p == 1);
  CHECK(r.state.q_s == 1);
}

TEST_CASE("conservation and causality on random runs") {
  oracle::ParamGen gen(99);
  for (int n = 0; n < 30; ++n) {
    const auto p = gen.params(0.0, 1.0);
    const RatePoint pt{gen.u(0, 0.5), gen.u(0, 0.5)};
    const PolicySpec pol{static_cast<PolicyKind>(n % 4), gen.u()};
    auto c = quick(20000, 1000);
    c.saturate_pu = n % 5 == 0;
    check_conservation(run_replication(c, p, pt, pol, StreamId{3, 0, std::uint64_t(n)}));
  }
}

TEST_CASE("seed determinism") {
  const auto p = baseline_params(0.6, 0.6);
  auto c = quick(30000, 3000);
  c.record_trace = true;
  const auto a = run_replication(c, p, {0.1, 0.1}, kCoop, {1, 2, 3});
  const auto b = run_replication(c, p, {0.1, 0.1}, kCoop, {1, 2, 3});
  CHECK(a.trace == b.trace);
  CHECK(a.admissions == b.admissions);
  CHECK(a.departures == b.departures);
  CHECK(a.drift == b.drift);
  CHECK(a.mean_queue == b.mean_queue);
  const auto other = run_replication(c, p, {0.1, 0.1}, kCoop, {1, 2, 4});
  CHECK(other.trace != a.trace);
  c.seed = 43;
  CHECK(run_replication(c, p, {0.1, 0.1}, kCoop, {1, 2, 3}).trace != a.trace);
}

TEST_CASE("dominance coupling on common random numbers") {
  oracle::ParamGen gen(5);
  auto c = quick(100000);
  c.record_trace = true;
  for (int n = 0; n < 3; ++n) {
    const auto p = gen.params(0.1, 0.9);
    const RatePoint pt{gen.u(0, 0.3), gen.u(0, 0.3)};
    const double a = gen.u(0.1, 0.9);
    const StreamId id{17, 0, std::uint64_t(n)};
    const auto coop = run_replication(c, p, pt, {PolicyKind::CooperativeRandomized, a}, id);
    const auto d1 = run_replication(c, p, pt, {PolicyKind::DominantI, a}, id);
    const auto d2 = run_replication(c, p, pt, {PolicyKind::DominantII, a}, id);
    bool ok1 = true, ok2 = true;
    for (std::size_t t = 0; t < coop.trace.size(); ++t) {
      ok1 = ok1 && d1.trace[t].q_ps >= coop.trace[t].q_ps;
      ok2 = ok2 && d2.trace[t].q_s >= coop.trace[t].q_s;
    }
    CHECK(ok1);
    CHECK(ok2);
  }
}

TEST_CASE("measured relay rate and idle probability") {
  const auto p = baseline_params(0.6, 0.6);
  SimConfig c = quick(400000, 40000);
  c.replications = 3;
  const auto m = measure_service_rates(c, p, {0.2, 0.05}, kCoop);
  CHECK_FALSE(m.censored);
  CHECK(std::abs(m.rates.lambda_ps - 0.0966) < 0.005);
  CHECK(std::abs(m.rates.idle_prob - idle_probability(p, 0.2)) < 0.01);

  const auto z = measure_service_rates(c, p, {0.0, 0.1}, kCoop);
  CHECK(z.rates.idle_prob == 1.0);
  CHECK(z.joint_busy_pu == 0.0);

  SimConfig s = c;
  s.saturate_pu = true;
  const auto sat = measure_service_rates(s, p, {0.0, 0.0}, kCoop);
  CHECK(std::abs(sat.rates.mu_p - 0.348) < 0.005);
}

TEST_CASE("measured SU battery occupancy follows the clamped formula") {
  const auto p = baseline_params(0.6, 0.6);
  SimConfig c = quick(400000, 40000);
  c.replications = 3;
  // Dominant system I spends a unit in every idle slot with energy.
  const auto m = measure_service_rates(c, p, {0.1, 0.05}, {PolicyKind::DominantI, 0.5});
  CHECK(std::abs(m.rates.es_busy_prob - es_busy_probability(p, 0.1)) < 0.02);
  const auto sat = measure_service_rates(c, p, {0.3, 0.01}, {PolicyKind::DominantI, 0.9});
  CHECK(sat.rates.es_busy_prob > 0.97);
}

TEST_CASE("verdict examples") {
  const SimConfig c;
  const auto p = baseline_params(0.6, 0.6);
  // (0.30, 0.05) is inside the union (the PU cutoff is 0.348 and the sum
  // constraint leaves about 0.19 for lambda_s), so the randomized policy is
  // stable there. Region I with a = 0.9 starves the relay queue instead.
  CHECK(union_contains(p, {0.30, 0.05}, default_a_grid()));
  CHECK(is_stable_point(c, p, {0.30, 0.05}, kCoop).stable);
  CHECK_FALSE(region1_contains(p, 0.9, {0.30, 0.05}));
  const auto starved = is_stable_point(c, p, {0.30, 0.05}, {PolicyKind::DominantI, 0.9});
  CHECK_FALSE(starved.stable);
  CHECK(starved.queue_stable[index(Queue::Primary)]);
  CHECK_FALSE(starved.queue_stable[index(Queue::Relay)]);
  const auto nc = baseline_params(0.5, 0.8);
  REQUIRE(noncoop_contains(nc, {0.10, 0.30}));
  CHECK(is_stable_point(c, nc, {0.10, 0.30}, {PolicyKind::NonCooperative}).stable);
  // Deep exterior along the PU axis.
  const auto far = is_stable_point(c, p, {0.348 + 0.06, 0.0}, kCoop);
  CHECK_FALSE(far.stable);
  CHECK(far.unanimous);
  // Deep interior.
  const auto in = is_stable_point(c, p, {0.05, 0.2}, kCoop);
  CHECK(in.stable);
  CHECK(in.unanimous);
}

TEST_CASE("censored measurement is flagged") {
  SimConfig c = quick(100000, 10000);
  c.replications = 3;
  const auto m = measure_service_rates(c, baseline_params(0.6, 0.6), {0.2, 0.4}, kCoop);
  CHECK(m.censored);
  CHECK(m.warning.find("q_s") != std::string::npos);
}
