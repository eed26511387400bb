#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ehcr/analytic.hpp"
#include "ehcr/config.hpp"
#include "ehcr/simulator.hpp"
#include "ehcr/sweep.hpp"

namespace py = pybind11;
using namespace ehcr;

namespace {

std::vector<double> a_grid_or_default(std::optional<std::vector<double>> grid) {
  return grid ? std::move(*grid) : default_a_grid();
}

}  // namespace

PYBIND11_MODULE(_ehcr, m) {
  m.doc() = "Analytic and simulated stable-throughput regions";
  m.attr("__version__") = "0.1.0";

  py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
  py::register_exception<UnstablePrimaryError>(m, "UnstablePrimaryError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def(py::init([](double ppd, double pss, double spd, double ssd, double lep, double les) {
             return SystemParams{ppd, pss, spd, ssd, lep, les};
           }),
           py::arg("p_pd_success"), py::arg("p_ss_success"), py::arg("s_pd_success"), py::arg("s_sd_success"),
           py::arg("lambda_ep"), py::arg("lambda_es"))
      .def_readwrite("p_pd_success", &SystemParams::p_pd_success)
      .def_readwrite("p_ss_success", &SystemParams::p_ss_success)
      .def_readwrite("s_pd_success", &SystemParams::s_pd_success)
      .def_readwrite("s_sd_success", &SystemParams::s_sd_success)
      .def_readwrite("lambda_ep", &SystemParams::lambda_ep)
      .def_readwrite("lambda_es", &SystemParams::lambda_es)
      .def("validate", [](const SystemParams& p) { validate_params(p); })
      .def(py::self == py::self)
      .def("__repr__", [](const SystemParams& p) {
        return "SystemParams(p_pd=" + std::to_string(p.p_pd_success) + ", p_ss=" + std::to_string(p.p_ss_success) +
               ", s_pd=" + std::to_string(p.s_pd_success) + ", s_sd=" + std::to_string(p.s_sd_success) +
               ", lambda_ep=" + std::to_string(p.lambda_ep) + ", lambda_es=" + std::to_string(p.lambda_es) + ")";
      });
  m.def("baseline_params", &baseline_params, py::arg("lambda_ep"), py::arg("lambda_es"));

  py::class_<RatePoint>(m, "RatePoint")
      .def(py::init([](double lp, double ls) { return RatePoint{lp, ls}; }), py::arg("lambda_p") = 0.0,
           py::arg("lambda_s") = 0.0)
      .def_readwrite("lambda_p", &RatePoint::lambda_p)
      .def_readwrite("lambda_s", &RatePoint::lambda_s);

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("CooperativeRandomized", PolicyKind::CooperativeRandomized)
      .value("DominantI", PolicyKind::DominantI)
      .value("DominantII", PolicyKind::DominantII)
      .value("NonCooperative", PolicyKind::NonCooperative);
  m.def("parse_policy_kind", [](const std::string& s) { return parse_policy_kind(s); });

  py::class_<PolicySpec>(m, "PolicySpec")
      .def(py::init([](PolicyKind k, double a) { return validate_policy(PolicySpec{k, a}); }),
           py::arg("kind") = PolicyKind::CooperativeRandomized, py::arg("access_prob_a") = 0.5)
      .def_readwrite("kind", &PolicySpec::kind)
      .def_readwrite("access_prob_a", &PolicySpec::access_prob_a)
      .def("__repr__", [](const PolicySpec& p) {
        return "PolicySpec(" + std::string(to_string(p.kind)) + ", a=" + std::to_string(p.access_prob_a) + ")";
      });

  // Analytic model.
  m.def("pu_service_rate", &pu_service_rate, py::arg("params"));
  m.def("noncoop_pu_service_rate", &noncoop_pu_service_rate, py::arg("params"));
  m.def("relay_arrival_rate", &relay_arrival_rate, py::arg("params"), py::arg("lambda_p"));
  m.def("idle_probability", &idle_probability, py::arg("params"), py::arg("lambda_p"));
  m.def("es_busy_probability", &es_busy_probability, py::arg("params"), py::arg("lambda_p"));

  py::enum_<EsBusyMode>(m, "EsBusyMode")
      .value("Clamped", EsBusyMode::Clamped)
      .value("Unclamped", EsBusyMode::Unclamped);

  py::class_<AnalyticPoint>(m, "AnalyticPoint")
      .def_readonly("mu_p", &AnalyticPoint::mu_p)
      .def_readonly("lambda_ps", &AnalyticPoint::lambda_ps)
      .def_readonly("idle_prob", &AnalyticPoint::idle_prob)
      .def_readonly("es_busy_prob", &AnalyticPoint::es_busy_prob)
      .def_readonly("mu_s", &AnalyticPoint::mu_s)
      .def_readonly("mu_ps", &AnalyticPoint::mu_ps);
  m.def("analytic_point", &analytic_point, py::arg("params"), py::arg("policy"), py::arg("point"),
        py::arg("mode") = EsBusyMode::Clamped, "None when the PU queue is unstable.");

  m.def("region1_contains", &region1_contains, py::arg("params"), py::arg("a"), py::arg("point"));
  m.def("region2_contains", &region2_contains, py::arg("params"), py::arg("a"), py::arg("point"));
  m.def(
      "union_contains",
      [](const SystemParams& p, const RatePoint& pt, std::optional<std::vector<double>> grid) {
        return union_contains(p, pt, a_grid_or_default(std::move(grid)));
      },
      py::arg("params"), py::arg("point"), py::arg("a_grid") = py::none());
  m.def("noncoop_contains", &noncoop_contains, py::arg("params"), py::arg("point"));

  py::class_<Crossover>(m, "Crossover")
      .def_readonly("d", &Crossover::d)
      .def("lambda_p_at", &Crossover::lambda_p_at, py::arg("lambda_es"));
  m.def("crossover_lambda_p", &crossover_lambda_p, py::arg("params"));

  py::enum_<RegionLabel>(m, "RegionLabel")
      .value("R1", RegionLabel::R1)
      .value("R2", RegionLabel::R2)
      .value("Union", RegionLabel::Union)
      .value("NonCooperative", RegionLabel::NonCooperative);
  py::enum_<BoundarySource>(m, "BoundarySource")
      .value("Analytic", BoundarySource::Analytic)
      .value("Simulated", BoundarySource::Simulated);

  py::class_<RegionBoundary>(m, "RegionBoundary")
      .def_readonly("lambda_p_grid", &RegionBoundary::lambda_p_grid)
      .def_readonly("lambda_s_max", &RegionBoundary::lambda_s_max)
      .def_readonly("label", &RegionBoundary::label)
      .def_readonly("source", &RegionBoundary::source)
      .def_readonly("uncertain", &RegionBoundary::uncertain)
      .def_readonly("unbracketed", &RegionBoundary::unbracketed)
      .def_readonly("series", &RegionBoundary::series)
      .def("__len__", &RegionBoundary::size)
      .def("to_csv", [](const RegionBoundary& b) { return format_boundary_csv(b); })
      .def_static("from_csv", [](const std::string& s) { return parse_boundary_csv(s); })
      .def("__repr__", [](const RegionBoundary& b) {
        return "RegionBoundary(" + b.series + ", " + std::string(to_string(b.source)) + ", " +
               std::to_string(b.size()) + " points)";
      });

  m.def(
      "analytic_boundary",
      [](const SystemParams& p, RegionLabel label, double a, std::optional<std::vector<double>> lambda_p_grid,
         std::optional<std::vector<double>> a_grid, double tol) {
        const auto grid = lambda_p_grid ? std::move(*lambda_p_grid) : default_lambda_p_grid();
        const auto ag = a_grid_or_default(std::move(a_grid));
        py::gil_scoped_release release;
        return extract_boundary(region_predicate(p, label, a, ag), grid, tol, label);
      },
      py::arg("params"), py::arg("label") = RegionLabel::Union, py::arg("a") = 0.5,
      py::arg("lambda_p_grid") = py::none(), py::arg("a_grid") = py::none(), py::arg("tol") = kDefaultBisectTol);
  m.def("make_grid", &make_grid, py::arg("max"), py::arg("step"));

  // Simulator.
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("horizon_slots", &SimConfig::horizon_slots)
      .def_readwrite("burn_in_slots", &SimConfig::burn_in_slots)
      .def_readwrite("replications", &SimConfig::replications)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("saturate_pu", &SimConfig::saturate_pu)
      .def_readwrite("drift_epsilon", &SimConfig::drift_epsilon)
      .def_readwrite("record_trace", &SimConfig::record_trace);

  py::class_<StreamId>(m, "StreamId")
      .def(py::init([](std::uint64_t e, std::uint64_t r, std::uint64_t g) { return StreamId{e, r, g}; }),
           py::arg("experiment") = 0, py::arg("replication") = 0, py::arg("grid_point") = 0)
      .def_readwrite("experiment", &StreamId::experiment)
      .def_readwrite("replication", &StreamId::replication)
      .def_readwrite("grid_point", &StreamId::grid_point);

  py::class_<QueueState>(m, "QueueState")
      .def(py::init<>())
      .def_readwrite("q_p", &QueueState::q_p)
      .def_readwrite("q_s", &QueueState::q_s)
      .def_readwrite("q_ps", &QueueState::q_ps)
      .def_readwrite("q_ep", &QueueState::q_ep)
      .def_readwrite("q_es", &QueueState::q_es)
      .def("__repr__", [](const QueueState& q) {
        return "QueueState(p=" + std::to_string(q.q_p) + ", s=" + std::to_string(q.q_s) +
               ", ps=" + std::to_string(q.q_ps) + ", ep=" + std::to_string(q.q_ep) +
               ", es=" + std::to_string(q.q_es) + ")";
      });

  py::class_<SimOutcome>(m, "SimOutcome")
      .def_readonly("admissions", &SimOutcome::admissions)
      .def_readonly("departures", &SimOutcome::departures)
      .def_readonly("final_state", &SimOutcome::final_state)
      .def_readonly("mean_queue", &SimOutcome::mean_queue)
      .def_readonly("drift", &SimOutcome::drift)
      .def_readonly("queue_stable", &SimOutcome::queue_stable)
      .def_readonly("stable", &SimOutcome::stable)
      .def_readonly("energy_causal", &SimOutcome::energy_causal)
      .def_readonly("trace", &SimOutcome::trace);
  m.def(
      "run_replication",
      [](const SimConfig& c, const SystemParams& p, const RatePoint& r, const PolicySpec& pol, StreamId id) {
        py::gil_scoped_release release;
        return run_replication(c, p, r, pol, id);
      },
      py::arg("config"), py::arg("params"), py::arg("point"), py::arg("policy"), py::arg("stream") = StreamId{});

  py::class_<StabilityVerdict>(m, "StabilityVerdict")
      .def_readonly("queue_stable", &StabilityVerdict::queue_stable)
      .def_readonly("stable", &StabilityVerdict::stable)
      .def_readonly("unstable_votes", &StabilityVerdict::unstable_votes)
      .def_readonly("replications", &StabilityVerdict::replications)
      .def_readonly("unanimous", &StabilityVerdict::unanimous)
      .def("__bool__", [](const StabilityVerdict& v) { return v.stable; });
  m.def(
      "is_stable_point",
      [](const SimConfig& c, const SystemParams& p, const RatePoint& r, const PolicySpec& pol, StreamId id) {
        py::gil_scoped_release release;
        return is_stable_point(c, p, r, pol, id);
      },
      py::arg("config"), py::arg("params"), py::arg("point"), py::arg("policy"), py::arg("stream") = StreamId{});

  py::class_<MeasuredRates>(m, "MeasuredRates")
      .def_readonly("rates", &MeasuredRates::rates)
      .def_readonly("joint_busy_pu", &MeasuredRates::joint_busy_pu)
      .def_readonly("independence_gap", &MeasuredRates::independence_gap)
      .def_readonly("censored", &MeasuredRates::censored)
      .def_readonly("warning", &MeasuredRates::warning);
  m.def(
      "measure_service_rates",
      [](const SimConfig& c, const SystemParams& p, const RatePoint& r, const PolicySpec& pol, StreamId id) {
        py::gil_scoped_release release;
        return measure_service_rates(c, p, r, pol, id);
      },
      py::arg("config"), py::arg("params"), py::arg("point"), py::arg("policy"), py::arg("stream") = StreamId{});

  // Sweeps.
  py::enum_<RunMode>(m, "RunMode")
      .value("AnalyticOnly", RunMode::AnalyticOnly)
      .value("SimulateOnly", RunMode::SimulateOnly)
      .value("Compare", RunMode::Compare);

  py::class_<Grids>(m, "Grids")
      .def(py::init<>())
      .def_readwrite("lambda_p", &Grids::lambda_p)
      .def_readwrite("a", &Grids::a)
      .def_readwrite("bisect_tol", &Grids::bisect_tol);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("tag", &Scenario::tag)
      .def_readwrite("params", &Scenario::params);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def(py::init<>())
      .def_readwrite("name", &ExperimentSpec::name)
      .def_readwrite("params", &ExperimentSpec::params)
      .def_readwrite("references", &ExperimentSpec::references)
      .def_readwrite("policies", &ExperimentSpec::policies)
      .def_readwrite("mode", &ExperimentSpec::mode)
      .def_readwrite("grids", &ExperimentSpec::grids)
      .def_readwrite("sim", &ExperimentSpec::sim)
      .def_readwrite("sim_bisect_iterations", &ExperimentSpec::sim_bisect_iterations)
      .def_readwrite("note", &ExperimentSpec::note)
      .def("__repr__", [](const ExperimentSpec& s) { return "ExperimentSpec(" + s.name + ")"; });

  py::class_<CrossoverReport>(m, "CrossoverReport")
      .def_readonly("lambda_es", &CrossoverReport::lambda_es)
      .def_readonly("predicted", &CrossoverReport::predicted)
      .def_readonly("measured", &CrossoverReport::measured);

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_readonly("experiment", &ComparisonReport::experiment)
      .def_readonly("seed", &ComparisonReport::seed)
      .def_readonly("boundaries", &ComparisonReport::boundaries)
      .def_readonly("max_gap", &ComparisonReport::max_gap)
      .def_readonly("compared_points", &ComparisonReport::compared_points)
      .def_readonly("uncertain_points", &ComparisonReport::uncertain_points)
      .def_readonly("crossover", &ComparisonReport::crossover)
      .def(
          "find",
          [](const ComparisonReport& r, const std::string& series, BoundarySource src) -> std::optional<RegionBoundary> {
            const auto* b = r.find(series, src);
            if (b == nullptr) return std::nullopt;
            return *b;
          },
          py::arg("series"), py::arg("source") = BoundarySource::Analytic)
      .def("write_csv", [](const ComparisonReport& r, const std::filesystem::path& dir) {
        return emit_boundary_csv(r, dir);
      });

  py::class_<ReferenceCheck>(m, "ReferenceCheck")
      .def_readonly("quantity", &ReferenceCheck::quantity)
      .def_readonly("reference", &ReferenceCheck::reference)
      .def_readonly("computed", &ReferenceCheck::computed)
      .def_property_readonly("abs_diff", &ReferenceCheck::abs_diff);

  m.def(
      "run_experiment",
      [](const ExperimentSpec& spec) {
        py::gil_scoped_release release;
        return run_experiment(spec);
      },
      py::arg("spec"));
  m.def("builtin_experiments", &builtin_experiments);
  m.def("builtin_experiment", [](const std::string& name) { return builtin_experiment(name); }, py::arg("name"));
  m.def("reference_checks", &reference_checks, py::arg("spec"), py::arg("report"));

  m.def(
      "parse_config",
      [](const std::string& text, const std::map<std::string, std::string>& overrides) {
        ConfigEntries entries(overrides.begin(), overrides.end());
        return parse_config(text, entries);
      },
      py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{});
}
