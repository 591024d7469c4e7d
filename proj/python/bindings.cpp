#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "particle_limits/bdrw.hpp"
#include "particle_limits/harness.hpp"
#include "particle_limits/lattice.hpp"
#include "particle_limits/pde.hpp"
#include "particle_limits/serialize.hpp"
#include "particle_limits/ssep.hpp"

namespace py = pybind11;
using namespace particle_limits;

namespace {

nlohmann::json json_from_py(const py::object& obj) {
  return nlohmann::json::parse(
      py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_particle_limits, m) {
  m.doc() = "Exact lattice particle simulators (exclusion and birth-death walks) "
            "with reference PDE solvers and scaling-limit studies.";

  py::class_<Profile>(m, "Profile")
      .def_static("constant", &Profile::constant, py::arg("value"))
      .def_static("cosine", &Profile::cosine, py::arg("mean"), py::arg("amplitude"),
                  py::arg("mode") = 1, py::arg("phase") = 0.0)
      .def_static("logistic_bump", &Profile::logistic_bump, py::arg("base"),
                  py::arg("height"), py::arg("center"), py::arg("half_width"),
                  py::arg("steepness") = 10.0)
      .def_static("tabulated", &Profile::tabulated, py::arg("values"))
      .def_static("from_spec",
                  [](const py::object& spec) { return Profile::from_json(json_from_py(spec)); })
      .def("__call__", &Profile::operator(), py::arg("u"))
      .def("spec", [](const Profile& p) { return json_to_py(p.to_json()); });

  py::class_<RateFunction>(m, "RateFunction")
      .def_static("zero", &RateFunction::zero)
      .def_static("constant", &RateFunction::constant, py::arg("value"))
      .def_static("linear", &RateFunction::linear, py::arg("slope"))
      .def_static("power", &RateFunction::power, py::arg("coefficient"), py::arg("exponent"))
      .def_static("logistic", &RateFunction::logistic, py::arg("scale"), py::arg("midpoint"),
                  py::arg("steepness"))
      .def_static("tabulated", &RateFunction::tabulated, py::arg("values"), py::arg("s_max"))
      .def("__call__", &RateFunction::operator(), py::arg("s"));

  py::class_<RateFunctions>(m, "RateFunctions")
      .def(py::init([](const RateFunction& birth, const RateFunction& death) {
             RateFunctions r{birth, death};
             r.validate();
             return r;
           }),
           py::arg("birth") = RateFunction::zero(), py::arg("death") = RateFunction::zero())
      .def_readonly("birth", &RateFunctions::birth)
      .def_readonly("death", &RateFunctions::death)
      .def("reaction", &RateFunctions::reaction, py::arg("s"));

  py::enum_<OccupationKind>(m, "OccupationKind")
      .value("exclusion", OccupationKind::exclusion)
      .value("unbounded", OccupationKind::unbounded);

  py::class_<Configuration>(m, "Configuration")
      .def(py::init([](int n, OccupationKind kind, std::vector<std::int64_t> occupations) {
             Configuration c{n, kind, std::move(occupations)};
             c.validate();
             return c;
           }),
           py::arg("n"), py::arg("kind"), py::arg("occupations"))
      .def_readonly("n", &Configuration::n)
      .def_readonly("kind", &Configuration::kind)
      .def_readonly("occupations", &Configuration::occupations)
      .def("total_particles", &Configuration::total_particles)
      .def("max_occupation", &Configuration::max_occupation);

  py::class_<EmpiricalMeasure>(m, "EmpiricalMeasure")
      .def_readonly("n", &EmpiricalMeasure::n)
      .def_readonly("weights", &EmpiricalMeasure::weights)
      .def("mass", &EmpiricalMeasure::mass)
      .def("integrate", &EmpiricalMeasure::integrate, py::arg("test_function"))
      .def("atoms", &EmpiricalMeasure::atoms);

  py::class_<DensityField>(m, "DensityField")
      .def_readonly("n", &DensityField::n)
      .def_readonly("ell", &DensityField::ell)
      .def_readonly("values", &DensityField::values)
      .def("__call__", &DensityField::operator(), py::arg("u"));

  m.def(
      "sample_initial_exclusion",
      [](int n, const Profile& phi, std::uint64_t seed, std::uint32_t replica) {
        RngStream stream(seed, replica, RngStream::Channel::initial_condition);
        return sample_initial_exclusion(n, phi, stream);
      },
      py::arg("n"), py::arg("profile"), py::arg("seed") = 1, py::arg("replica") = 0);
  m.def(
      "sample_initial_density",
      [](int n, double ell, const Profile& phi, std::uint64_t seed, std::uint32_t replica) {
        RngStream stream(seed, replica, RngStream::Channel::initial_condition);
        return sample_initial_density(n, ell, phi, stream);
      },
      py::arg("n"), py::arg("ell"), py::arg("profile"), py::arg("seed") = 1,
      py::arg("replica") = 0);
  m.def("empirical_measure", &empirical_measure, py::arg("configuration"));
  m.def("density_field", &density_field, py::arg("configuration"), py::arg("ell"));
  m.def("grid_field", &grid_field, py::arg("values"));
  m.def("sup_norm_distance",
        py::overload_cast<const DensityField&, const DensityField&>(&sup_norm_distance),
        py::arg("a"), py::arg("b"));
  m.def("sup_norm_distance",
        py::overload_cast<const DensityField&, const Profile&>(&sup_norm_distance),
        py::arg("field"), py::arg("profile"));

  py::class_<Snapshot>(m, "Snapshot")
      .def_readonly("time", &Snapshot::time)
      .def_readonly("config", &Snapshot::config);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("snapshots", &Trajectory::snapshots)
      .def_readonly("event_count", &Trajectory::event_count);

  m.def(
      "ssep_run",
      [](const Configuration& init, double horizon, std::vector<double> checkpoints,
         std::uint64_t seed, std::uint32_t replica) {
        SsepParams params{init.n, horizon, std::move(checkpoints)};
        RngStream stream(seed, replica, RngStream::Channel::dynamics);
        return ssep_run(init, params, stream);
      },
      py::arg("init"), py::arg("horizon"), py::arg("checkpoints"), py::arg("seed") = 1,
      py::arg("replica") = 0);

  py::class_<SsepDistribution>(m, "SsepDistribution")
      .def_readonly("n", &SsepDistribution::n)
      .def_readonly("probabilities", &SsepDistribution::probabilities)
      .def_readonly("truncation_error", &SsepDistribution::truncation_error);
  m.def("ssep_step_distribution_oracle", &ssep_step_distribution_oracle, py::arg("init"),
        py::arg("t"));
  m.def("configuration_bits", &configuration_bits, py::arg("configuration"));

  py::enum_<RunStatus>(m, "RunStatus")
      .value("completed", RunStatus::completed)
      .value("exploded", RunStatus::exploded)
      .value("budget_exhausted", RunStatus::budget_exhausted);

  py::class_<ThresholdHit>(m, "ThresholdHit")
      .def_readonly("threshold", &ThresholdHit::threshold)
      .def_readonly("time", &ThresholdHit::time);

  py::class_<RunOutcome>(m, "RunOutcome")
      .def_readonly("status", &RunOutcome::status)
      .def_readonly("trajectory", &RunOutcome::trajectory)
      .def_readonly("threshold_hits", &RunOutcome::threshold_hits)
      .def_readonly("tau_estimate", &RunOutcome::tau_estimate)
      .def_readonly("final_time", &RunOutcome::final_time)
      .def_readonly("final_max_occupation", &RunOutcome::final_max_occupation);

  m.def("bdrw_total_rate", &bdrw_total_rate, py::arg("configuration"), py::arg("rates"),
        py::arg("n"), py::arg("ell"));
  m.def(
      "bdrw_run",
      [](const Configuration& init, const RateFunctions& rates, double ell, double horizon,
         std::vector<double> checkpoints, double cap, std::uint64_t event_budget,
         std::uint64_t seed, std::uint32_t replica) {
        BdrwParams params;
        params.n = init.n;
        params.ell = ell;
        params.horizon = horizon;
        params.checkpoints = std::move(checkpoints);
        params.cap = cap;
        params.event_budget = event_budget;
        RngStream stream(seed, replica, RngStream::Channel::dynamics);
        return bdrw_run(init, rates, params, stream);
      },
      py::arg("init"), py::arg("rates"), py::arg("ell"), py::arg("horizon"),
      py::arg("checkpoints") = std::vector<double>{}, py::arg("cap") = 1e12,
      py::arg("event_budget") = 2'000'000'000, py::arg("seed") = 1, py::arg("replica") = 0);

  py::class_<TruncatedDistribution>(m, "TruncatedDistribution")
      .def_readonly("n", &TruncatedDistribution::n)
      .def_readonly("occupancy_cap", &TruncatedDistribution::occupancy_cap)
      .def_readonly("probabilities", &TruncatedDistribution::probabilities)
      .def_readonly("boundary_mass", &TruncatedDistribution::boundary_mass)
      .def("state_index", &TruncatedDistribution::state_index, py::arg("occupations"));
  m.def("bdrw_small_oracle", &bdrw_small_oracle, py::arg("init"), py::arg("rates"),
        py::arg("n"), py::arg("ell"), py::arg("t"), py::arg("occupancy_cap"));

  py::enum_<PdeStatus>(m, "PdeStatus")
      .value("resolved", PdeStatus::resolved)
      .value("blew_up", PdeStatus::blew_up)
      .value("step_underflow", PdeStatus::step_underflow);

  py::class_<PdeGrid>(m, "PdeGrid")
      .def(py::init([](int m_points, std::optional<double> dt) {
             PdeGrid grid;
             grid.m = m_points;
             grid.fixed_dt = dt;
             grid.validate();
             return grid;
           }),
           py::arg("m") = 256, py::arg("dt") = std::nullopt)
      .def_readonly("m", &PdeGrid::m);

  py::class_<PdeSolution>(m, "PdeSolution")
      .def_readonly("status", &PdeSolution::status)
      .def_readonly("m", &PdeSolution::m)
      .def_readonly("times", &PdeSolution::times)
      .def_readonly("values", &PdeSolution::values)
      .def_readonly("last_resolved_time", &PdeSolution::last_resolved_time)
      .def_readonly("blowup_estimate", &PdeSolution::blowup_estimate);

  m.def("solve_heat", &solve_heat, py::arg("profile"), py::arg("horizon"), py::arg("grid"),
        py::arg("checkpoints") = std::vector<double>{});
  m.def("solve_reaction_diffusion", &solve_reaction_diffusion, py::arg("profile"),
        py::arg("rates"), py::arg("horizon"), py::arg("grid"),
        py::arg("checkpoints") = std::vector<double>{});

  py::enum_<CriterionVerdict>(m, "CriterionVerdict")
      .value("satisfied", CriterionVerdict::satisfied)
      .value("not_satisfied", CriterionVerdict::not_satisfied)
      .value("inconclusive", CriterionVerdict::inconclusive);

  py::class_<BlowupCriterionReport>(m, "BlowupCriterionReport")
      .def_readonly("convex_on_tail", &BlowupCriterionReport::convex_on_tail)
      .def_readonly("positive_on_tail", &BlowupCriterionReport::positive_on_tail)
      .def_readonly("integral_finite", &BlowupCriterionReport::integral_finite)
      .def_readonly("tail_start", &BlowupCriterionReport::tail_start)
      .def_readonly("verdict", &BlowupCriterionReport::verdict)
      .def_readonly("fitted_tail_exponent", &BlowupCriterionReport::fitted_tail_exponent)
      .def_readonly("tail_fit_conclusive", &BlowupCriterionReport::tail_fit_conclusive)
      .def_readonly("integral_value", &BlowupCriterionReport::integral_value);
  m.def("check_blowup_criterion", &check_blowup_criterion, py::arg("rates"),
        py::arg("tail_start"), py::arg("s_max"));

  py::class_<EllRule>(m, "EllRule")
      .def_static("constant", &EllRule::constant, py::arg("value"))
      .def_static("power", &EllRule::power, py::arg("alpha"))
      .def_static("poly_log", &EllRule::poly_log, py::arg("beta"))
      .def("__call__", &EllRule::operator(), py::arg("n"))
      .def("name", &EllRule::name);

  py::class_<A2Report>(m, "A2Report")
      .def_readonly("overall_convergent", &A2Report::overall_convergent)
      .def_readonly("grid_relative_caveat", &A2Report::grid_relative_caveat)
      .def("per_c",
           [](const A2Report& report) {
             py::list out;
             for (const auto& term : report.per_c) {
               py::dict d;
               d["c"] = term.c;
               d["convergent"] = term.convergent;
               d["basis"] = term.basis;
               d["final_local_exponent"] = term.final_local_exponent;
               d["numeric_convergent"] = term.numeric_convergent;
               out.append(d);
             }
             return out;
           });
  m.def("check_a2", &check_a2, py::arg("ell_rule"), py::arg("c_grid"), py::arg("n_max"));

  m.def(
      "hydrodynamic_study",
      [](const Profile& profile, std::vector<int> sizes, double horizon,
         std::vector<double> checkpoints, int replicas, int test_modes, std::uint64_t seed,
         int grid_m, int threads) {
        HydrodynamicStudyConfig config;
        config.profile = profile;
        config.sizes = std::move(sizes);
        config.horizon = horizon;
        config.checkpoints = std::move(checkpoints);
        config.replicas = replicas;
        config.test_modes = test_modes;
        config.master_seed = seed;
        config.grid.m = grid_m;
        config.threads = threads;
        return json_to_py(convergence_report_to_json(hydrodynamic_study(config)));
      },
      py::arg("profile"), py::arg("sizes"), py::arg("horizon"), py::arg("checkpoints"),
      py::arg("replicas") = 50, py::arg("test_modes") = 3, py::arg("seed") = 1,
      py::arg("grid_m") = 256, py::arg("threads") = 0);

  m.def(
      "high_density_study",
      [](const Profile& profile, const RateFunctions& rates, std::vector<int> sizes,
         double ell_alpha, double horizon, std::vector<double> checkpoints, int replicas,
         std::uint64_t seed, int grid_m, int threads) {
        HighDensityStudyConfig config;
        config.profile = profile;
        config.rates = rates;
        config.schedule = ScalingSchedule{std::move(sizes), EllRule::power(ell_alpha)};
        config.horizon = horizon;
        config.checkpoints = std::move(checkpoints);
        config.replicas = replicas;
        config.master_seed = seed;
        config.grid.m = grid_m;
        config.threads = threads;
        return json_to_py(convergence_report_to_json(high_density_study(config)));
      },
      py::arg("profile"), py::arg("rates"), py::arg("sizes"), py::arg("ell_alpha") = 1.0,
      py::arg("horizon") = 0.5, py::arg("checkpoints") = std::vector<double>{0.25, 0.5},
      py::arg("replicas") = 20, py::arg("seed") = 1, py::arg("grid_m") = 256,
      py::arg("threads") = 0);

  m.def(
      "blowup_study",
      [](const Profile& profile, const RateFunctions& rates, int n, double ell, int replicas,
         double cap_scale, double horizon, std::uint64_t seed, int threads) {
        BlowupStudyConfig config;
        config.profile = profile;
        config.rates = rates;
        config.schedule = ScalingSchedule{{n}, EllRule::constant(ell)};
        config.replicas = replicas;
        config.cap_scale = cap_scale;
        config.horizon = horizon;
        config.master_seed = seed;
        config.threads = threads;
        return json_to_py(blowup_comparison_to_json(blowup_study(config)));
      },
      py::arg("profile"), py::arg("rates"), py::arg("n") = 16, py::arg("ell") = 100.0,
      py::arg("replicas") = 20, py::arg("cap_scale") = 1e4, py::arg("horizon") = 64.0,
      py::arg("seed") = 1, py::arg("threads") = 0);

  m.attr("schema_version") = std::string(kSchemaVersion);
}
