#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dhrad/probgen.hpp"
#include "dhrad/structured.hpp"
#include "dhrad/verify.hpp"

namespace dhrad
{

inline constexpr const char *kVersion = "0.1.0";

enum class Task
{
  radius_rj,
  radius_q,
  radius_structured,
  radius_structured_small,
  hinf,
  gen,
  verify,
  sweep
};

Task parse_task(const std::string &s);
std::string to_string(Task t);

struct RunConfig
{
  Task task = Task::radius_rj;
  // Directory with J/R/Q/B/C.mtx (or M/DM/DR/KE/Kg/DG[/N].mtx, or A/B/C.mtx for hinf).
  std::optional<std::string> input_dir;
  // Used when no input directory is given, and by the gen task.
  GenSpec gen;
  std::optional<std::string> output;        // report file (JSON)
  std::optional<std::string> output_dir;    // gen task: where matrices are written
  std::optional<std::string> curve_prefix;  // CSV files <prefix>_full.csv, <prefix>_reduced.csv
  bool emit_curve = false;
  Index curve_points = 400;
  std::optional<std::pair<double, double>> omega_range;
  StructuredOptions options;  // framework options live in options.framework
  double Omega = 1.0;         // brake inputs
  std::vector<double> Omegas; // sweep
  Task sweep_task = Task::radius_rj;
  std::string verify_kind = "r";  // r, j, q or structured
  Index samples = 1000;

  static RunConfig from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;
};

struct RunOutcome
{
  nlohmann::json report;
  std::string table;  // human-readable summary
  int exit_code = 0;
};

/// Loads (or generates) the problem named by the config.
Problem load_problem(const RunConfig &cfg);

nlohmann::json report_from(const RadiusResult &r);

/// Executes one task. Library errors become exit codes 2 (validation), 3 (numerical) and
/// 4 (non-convergence); a max_iter termination also yields 4.
RunOutcome run(const RunConfig &cfg);

int exit_code_for(ErrorKind k);

}  // namespace dhrad
