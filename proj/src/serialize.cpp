#include "particle_limits/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace particle_limits {

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::completed:
      return "completed";
    case RunStatus::exploded:
      return "exploded";
    case RunStatus::budget_exhausted:
      return "budget_exhausted";
  }
  return "";
}

std::string_view pde_status_name(PdeStatus status) {
  switch (status) {
    case PdeStatus::resolved:
      return "resolved";
    case PdeStatus::blew_up:
      return "blew_up";
    case PdeStatus::step_underflow:
      return "step_underflow";
  }
  return "";
}

std::string_view criterion_verdict_name(CriterionVerdict verdict) {
  switch (verdict) {
    case CriterionVerdict::satisfied:
      return "satisfied";
    case CriterionVerdict::not_satisfied:
      return "not_satisfied";
    case CriterionVerdict::inconclusive:
      return "inconclusive";
  }
  return "";
}

nlohmann::json configuration_to_json(const Configuration& c, std::optional<double> ell) {
  nlohmann::json j{
      {"schema_version", kSchemaVersion},
      {"n", c.n},
      {"kind", c.kind == OccupationKind::exclusion ? "exclusion" : "unbounded"},
      {"occupations", c.occupations},
  };
  j["ell"] = ell ? nlohmann::json(*ell) : nlohmann::json(nullptr);
  return j;
}

Configuration configuration_from_json(const nlohmann::json& j) {
  Configuration c;
  c.n = j.at("n").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exclusion") {
    c.kind = OccupationKind::exclusion;
  } else if (kind == "unbounded") {
    c.kind = OccupationKind::unbounded;
  } else {
    throw std::invalid_argument("unknown configuration kind \"" + kind + "\"");
  }
  c.occupations = j.at("occupations").get<std::vector<std::int64_t>>();
  c.validate();
  return c;
}

nlohmann::json trajectory_to_json(const Trajectory& t, std::optional<double> ell) {
  nlohmann::json snapshots = nlohmann::json::array();
  for (const auto& snap : t.snapshots) {
    snapshots.push_back({{"time", snap.time},
                         {"occupations", snap.config.occupations}});
  }
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"event_count", t.event_count},
                   {"snapshots", snapshots}};
  if (!t.snapshots.empty()) {
    j["n"] = t.snapshots.front().config.n;
    j["kind"] = t.snapshots.front().config.kind == OccupationKind::exclusion
                    ? "exclusion"
                    : "unbounded";
  }
  j["ell"] = ell ? nlohmann::json(*ell) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json run_outcome_to_json(const RunOutcome& outcome, double ell) {
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& hit : outcome.threshold_hits) {
    ladder.push_back({{"threshold", hit.threshold}, {"time", hit.time}});
  }
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"status", run_status_name(outcome.status)},
                   {"threshold_ladder", ladder},
                   {"final_time", outcome.final_time},
                   {"final_max_occupation", outcome.final_max_occupation},
                   {"event_count", outcome.trajectory.event_count},
                   {"trajectory", trajectory_to_json(outcome.trajectory, ell)}};
  j["tau_estimate"] = outcome.tau_estimate ? nlohmann::json(*outcome.tau_estimate)
                                           : nlohmann::json(nullptr);
  return j;
}

nlohmann::json pde_solution_to_json(const PdeSolution& solution) {
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"m", solution.m},
                   {"times", solution.times},
                   {"values", solution.values},
                   {"status", {{"kind", pde_status_name(solution.status)},
                               {"last_resolved_time", solution.last_resolved_time}}}};
  if (solution.status == PdeStatus::blew_up) {
    j["status"]["blowup_estimate"] = solution.blowup_estimate;
  }
  return j;
}

nlohmann::json criterion_report_to_json(const BlowupCriterionReport& report) {
  return {{"schema_version", kSchemaVersion},
          {"convex_on_tail", report.convex_on_tail},
          {"positive_on_tail", report.positive_on_tail},
          {"integral_finite", report.integral_finite},
          {"tail_start", report.tail_start},
          {"verdict", criterion_verdict_name(report.verdict)},
          {"fitted_tail_exponent", report.fitted_tail_exponent},
          {"tail_fit_conclusive", report.tail_fit_conclusive},
          {"integral_value", std::isfinite(report.integral_value)
                                 ? nlohmann::json(report.integral_value)
                                 : nlohmann::json(nullptr)}};
}

nlohmann::json a2_report_to_json(const A2Report& report) {
  nlohmann::json per_c = nlohmann::json::array();
  for (const auto& term : report.per_c) {
    per_c.push_back({{"c", term.c},
                     {"convergent", term.convergent},
                     {"basis", term.basis},
                     {"final_local_exponent", term.final_local_exponent},
                     {"numeric_convergent", term.numeric_convergent},
                     {"numeric_conclusive", term.numeric_conclusive}});
  }
  return {{"schema_version", kSchemaVersion},
          {"ell_rule", report.rule.to_json()},
          {"n_max", report.n_max},
          {"per_c", per_c},
          {"overall_convergent", report.overall_convergent},
          {"grid_relative_caveat", report.grid_relative_caveat}};
}

namespace {

nlohmann::json stats_to_json(const ErrorStats& stats) {
  return {{"count", stats.count},
          {"median", stats.median},
          {"q1", stats.q1},
          {"q3", stats.q3},
          {"max", stats.max}};
}

}  // namespace

nlohmann::json convergence_report_to_json(const ConvergenceReport& report) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : report.levels) {
    nlohmann::json per_checkpoint = nlohmann::json::array();
    for (const auto& cp : level.per_checkpoint) {
      per_checkpoint.push_back({{"time", cp.time}, {"stats", stats_to_json(cp.stats)}});
    }
    levels.push_back({{"n", level.n},
                      {"ell", level.ell},
                      {"replicas_requested", level.replicas_requested},
                      {"replicas_used", level.replicas_used},
                      {"exploded", level.exploded},
                      {"budget_exhausted", level.budget_exhausted},
                      {"failed", level.failed},
                      {"errors", stats_to_json(level.overall)},
                      {"per_checkpoint", per_checkpoint},
                      {"total_events", level.total_events}});
  }
  return {{"schema_version", kSchemaVersion},
          {"study", report.study},
          {"levels", levels},
          {"fitted_slope", report.fitted_slope},
          {"slope_residual", report.slope_residual},
          {"config", report.config_echo}};
}

nlohmann::json blowup_comparison_to_json(const BlowupComparison& comparison) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : comparison.levels) {
    levels.push_back({{"n", level.n},
                      {"ell", level.ell},
                      {"replicas_requested", level.replicas_requested},
                      {"exploded", level.exploded},
                      {"completed", level.completed},
                      {"budget_exhausted", level.budget_exhausted},
                      {"tau", stats_to_json(level.tau)},
                      {"relative_offset", level.relative_offset},
                      {"total_events", level.total_events}});
  }
  return {{"schema_version", kSchemaVersion},
          {"criterion_verdict", criterion_verdict_name(comparison.criterion_verdict)},
          {"criterion_warning", comparison.criterion_warning},
          {"pde_status", pde_status_name(comparison.pde_status)},
          {"pde_blowup_estimate", comparison.pde_blowup_estimate},
          {"levels", levels},
          {"config", comparison.config_echo}};
}

std::string trajectory_csv(const Trajectory& t, int replica) {
  std::string out = "replica,checkpoint_time,site,occupation\n";
  for (const auto& snap : t.snapshots) {
    for (int x = 0; x < snap.config.n; ++x) {
      out += std::to_string(replica);
      out += ',';
      out += format_double(snap.time);
      out += ',';
      out += std::to_string(x);
      out += ',';
      out += std::to_string(snap.config.occupations[x]);
      out += '\n';
    }
  }
  return out;
}

std::string pde_csv(const PdeSolution& solution) {
  std::string out = "time,u,rho\n";
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    for (int i = 0; i < solution.m; ++i) {
      out += format_double(solution.times[k]);
      out += ',';
      out += format_double(double(i) / solution.m);
      out += ',';
      out += format_double(solution.values[k][i]);
      out += '\n';
    }
  }
  return out;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out =
      "n,ell,replicas_used,exploded,budget_exhausted,failed,median,q1,q3,max,total_events\n";
  for (const auto& level : report.levels) {
    out += std::to_string(level.n);
    out += ',';
    out += format_double(level.ell);
    out += ',';
    out += std::to_string(level.replicas_used);
    out += ',';
    out += std::to_string(level.exploded);
    out += ',';
    out += std::to_string(level.budget_exhausted);
    out += ',';
    out += std::to_string(level.failed);
    out += ',';
    out += format_double(level.overall.median);
    out += ',';
    out += format_double(level.overall.q1);
    out += ',';
    out += format_double(level.overall.q3);
    out += ',';
    out += format_double(level.overall.max);
    out += ',';
    out += std::to_string(level.total_events);
    out += '\n';
  }
  return out;
}

std::string blowup_csv(const BlowupComparison& comparison) {
  std::string out =
      "n,ell,exploded,completed,budget_exhausted,tau_median,tau_q1,tau_q3,pde_estimate,"
      "relative_offset\n";
  for (const auto& level : comparison.levels) {
    out += std::to_string(level.n);
    out += ',';
    out += format_double(level.ell);
    out += ',';
    out += std::to_string(level.exploded);
    out += ',';
    out += std::to_string(level.completed);
    out += ',';
    out += std::to_string(level.budget_exhausted);
    out += ',';
    out += format_double(level.tau.median);
    out += ',';
    out += format_double(level.tau.q1);
    out += ',';
    out += format_double(level.tau.q3);
    out += ',';
    out += format_double(comparison.pde_blowup_estimate);
    out += ',';
    out += format_double(level.relative_offset);
    out += '\n';
  }
  return out;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  auto temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + temp.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignore;
      std::filesystem::remove(temp, ignore);
      throw std::runtime_error("failed writing " + temp.string());
    }
  }
  std::filesystem::rename(temp, path);
}

}  // namespace particle_limits
