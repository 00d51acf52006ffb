// dhrad: stability radii of dissipative Hamiltonian systems.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dhrad/run.hpp"

using nlohmann::json;

int main(int argc, char **argv)
{
  CLI::App app{"Stability radii of dissipative Hamiltonian systems x' = (J-R)Qx"};
  app.set_version_flag("--version", dhrad::kVersion);

  std::string task, config;
  app.add_option("task", task,
                 "radius-rj | radius-q | radius-structured | radius-structured-small | hinf | "
                 "gen | verify | sweep");
  app.add_option("-c,--config", config, "JSON config file; flags override its values")
    ->check(CLI::ExistingFile);

  json flags = json::object();
  // Every flag writes its key into the overlay only when given.
  auto str = [&](const char *name, const char *key, const char *help) {
    app.add_option_function<std::string>(name, [&flags, key](const std::string &v) { flags[key] = v; },
                                         help);
  };
  auto real = [&](const char *name, const char *key, const char *help) {
    app.add_option_function<double>(name, [&flags, key](double v) { flags[key] = v; }, help);
  };
  auto integer = [&](const char *name, const char *key, const char *help) {
    app.add_option_function<long long>(name, [&flags, key](long long v) { flags[key] = v; }, help);
  };
  auto reals = [&](const char *name, const char *key, const char *help) {
    return app.add_option_function<std::vector<double>>(
      name, [&flags, key](const std::vector<double> &v) { flags[key] = v; }, help);
  };

  str("-i,--input", "input_dir", "directory with J/R/Q/B/C.mtx or brake components");
  str("-o,--output", "output", "report file (JSON)");
  str("--output-dir", "output_dir", "gen: directory for the generated matrices");
  str("--curve-prefix", "curve_prefix", "prefix for curve CSV files");
  app.add_flag_function("--emit-curve", [&](std::int64_t) { flags["emit_curve"] = true; },
                        "sample the full and final reduced functions");
  integer("--curve-points", "curve_points", "samples per curve");
  reals("--omega-range", "omega_range", "frequency interval lo hi")->expected(2);
  real("--eps", "eps", "relative termination tolerance");
  integer("--k-max", "k_max", "maximal subspace iterations");
  integer("--rho", "rho", "initial grid size");
  integer("--ell", "ell", "number of initial interpolation points");
  integer("--seed", "seed", "random seed");
  real("--hinf-tol", "hinf_tol", "relative tolerance of the level-set H-infinity solver");
  real("--gamma-outer", "gamma_outer", "curvature bound for the outer minimization");
  real("--gamma-inner", "gamma_inner", "curvature bound for the inner maximization");
  real("--penalty-factor", "penalty_factor", "cap for unattained values, times the best value");
  real("--outer-tol", "outer_tol", "tolerance of the outer minimization");
  integer("--scan-points", "scan_points", "uniform scan of the outer minimization");
  integer("--refine-count", "refine_count", "scan candidates refined further");
  integer("--zoom-points", "zoom_points", "points per bracket rescan");
  integer("--zoom-levels", "zoom_levels", "bracket rescans before the model iteration");
  reals("--initial-points", "initial_points", "explicit initial interpolation points");
  str("--family", "family", "gen: dense | sparse | brake");
  integer("-n,--n", "n", "gen: dimension (q for brake)");
  integer("--bandwidth", "bandwidth", "gen: bandwidth of sparse systems");
  integer("--rank-cap", "rank_cap", "gen: bound on rank(R)");
  integer("-m,--m", "m", "gen: columns of B");
  integer("-p,--p", "p", "gen: rows of C");
  real("--Omega", "Omega", "brake rotation speed");
  reals("--Omegas", "Omegas", "sweep: rotation speeds");
  str("--sweep-task", "sweep_task", "sweep: radius task per row");
  str("--verify-kind", "verify_kind", "verify: r | j | q | structured");
  integer("--samples", "samples", "verify structured: number of sampled perturbations");

  CLI11_PARSE(app, argc, argv);

  try
  {
    json cfg = json::object();
    if (!config.empty())
    {
      std::ifstream in(config);
      cfg = json::parse(in);
    }
    cfg.merge_patch(flags);
    if (!task.empty())
      cfg["task"] = task;
    if (!cfg.contains("task"))
    {
      std::cerr << "no task given\n" << app.help();
      return 2;
    }
    dhrad::RunOutcome out = dhrad::run(dhrad::RunConfig::from_json(cfg));
    (out.exit_code == 0 ? std::cout : std::cerr) << out.table;
    return out.exit_code;
  }
  catch (const dhrad::Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return dhrad::exit_code_for(e.kind());
  }
  catch (const json::exception &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
