#ifndef PARTICLE_LIMITS_SERIALIZE_HPP
#define PARTICLE_LIMITS_SERIALIZE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "particle_limits/bdrw.hpp"
#include "particle_limits/harness.hpp"
#include "particle_limits/lattice.hpp"
#include "particle_limits/pde.hpp"
#include "particle_limits/trajectory.hpp"

namespace particle_limits {

/// Version string embedded in every JSON artifact as "schema_version".
inline constexpr std::string_view kSchemaVersion = "1";

/// Shortest round-trip decimal representation (locale independent).
std::string format_double(double value);

nlohmann::json configuration_to_json(const Configuration& c,
                                     std::optional<double> ell = std::nullopt);
Configuration configuration_from_json(const nlohmann::json& j);

nlohmann::json trajectory_to_json(const Trajectory& t, std::optional<double> ell = std::nullopt);
nlohmann::json run_outcome_to_json(const RunOutcome& outcome, double ell);
nlohmann::json pde_solution_to_json(const PdeSolution& solution);
nlohmann::json criterion_report_to_json(const BlowupCriterionReport& report);
nlohmann::json a2_report_to_json(const A2Report& report);
nlohmann::json convergence_report_to_json(const ConvergenceReport& report);
nlohmann::json blowup_comparison_to_json(const BlowupComparison& comparison);

std::string_view run_status_name(RunStatus status);
std::string_view pde_status_name(PdeStatus status);
std::string_view criterion_verdict_name(CriterionVerdict verdict);

/// Compact trajectory table: replica, checkpoint_time, site, occupation.
std::string trajectory_csv(const Trajectory& t, int replica = 0);
/// One row per (time, u): time, u, rho.
std::string pde_csv(const PdeSolution& solution);
/// One row per level: n, ell, replicas, median, q1, q3, max, events.
std::string convergence_csv(const ConvergenceReport& report);
/// One row per level: n, ell, exploded, completed, budget_exhausted,
/// tau quartiles, relative offset.
std::string blowup_csv(const BlowupComparison& comparison);

/// Writes through a temp file in the same directory plus an atomic rename,
/// so interrupted runs leave no half-written artifact.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace particle_limits

#endif
