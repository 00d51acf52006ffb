#include "dhrad/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dhrad/matrix_market.hpp"

namespace dhrad
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

const std::pair<Task, const char *> kTasks[] = {
  {Task::radius_rj, "radius-rj"},
  {Task::radius_q, "radius-q"},
  {Task::radius_structured, "radius-structured"},
  {Task::radius_structured_small, "radius-structured-small"},
  {Task::hinf, "hinf"},
  {Task::gen, "gen"},
  {Task::verify, "verify"},
  {Task::sweep, "sweep"},
};

template <class T>
json opt(const std::optional<T> &v)
{
  return v ? json(*v) : json(nullptr);
}

// Non-finite doubles are not representable in JSON; they become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Task parse_task(const std::string &s)
{
  for (const auto &[t, name] : kTasks)
    if (s == name)
      return t;
  throw ValidationError("unknown task: " + s);
}

std::string to_string(Task t)
{
  for (const auto &[k, name] : kTasks)
    if (k == t)
      return name;
  return "unknown";
}

int exit_code_for(ErrorKind k)
{
  switch (k)
  {
    case ErrorKind::validation: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::nonconvergence: return 4;
  }
  return 2;
}

RunConfig RunConfig::from_json(const json &j)
{
  RunConfig c;
  auto get = [&](const char *key, auto &dst) {
    if (j.contains(key) && !j[key].is_null())
      dst = j[key].get<std::decay_t<decltype(dst)>>();
  };
  auto get_opt = [&](const char *key, auto &dst) {
    if (j.contains(key) && !j[key].is_null())
      dst = j[key].get<typename std::decay_t<decltype(dst)>::value_type>();
  };
  for (auto it = j.begin(); it != j.end(); ++it)
  {
    static const char *known[] = {
      "task",        "input_dir",     "output",       "output_dir",  "curve_prefix",
      "emit_curve",  "curve_points",  "omega_range",  "eps",         "k_max",
      "rho",         "ell",           "seed",         "hinf_tol",    "gamma_outer",
      "gamma_inner", "penalty_factor", "outer_tol",   "family",      "n",
      "bandwidth",   "rank_cap",      "m",            "p",           "Omega",
      "Omegas",      "sweep_task",    "verify_kind",  "samples",     "initial_points",
      "scan_points", "refine_count", "zoom_points", "zoom_levels", "version"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char *k) { return it.key() == k; }) == std::end(known))
      throw ValidationError("unknown config key: " + it.key());
  }
  auto &fo = c.options.framework;
  try
  {
    if (j.contains("task"))
      c.task = parse_task(j["task"].get<std::string>());
    get_opt("input_dir", c.input_dir);
    get_opt("output", c.output);
    get_opt("output_dir", c.output_dir);
    get_opt("curve_prefix", c.curve_prefix);
    get("emit_curve", c.emit_curve);
    get("curve_points", c.curve_points);
    if (j.contains("omega_range") && !j["omega_range"].is_null())
    {
      auto r = j["omega_range"].get<std::vector<double>>();
      if (r.size() != 2 || !(r[0] < r[1]))
        throw ValidationError("omega_range must be [lo, hi] with lo < hi");
      c.omega_range = std::make_pair(r[0], r[1]);
    }
    get("eps", fo.eps);
    get("k_max", fo.k_max);
    get("rho", fo.rho);
    get_opt("ell", fo.ell);
    get("seed", fo.seed);
    get("hinf_tol", fo.hinf_tol);
    get("initial_points", fo.initial_points);
    get_opt("gamma_outer", c.options.gamma_outer);
    get("gamma_inner", c.options.eta.gamma_inner);
    get("penalty_factor", c.options.penalty_factor);
    get("outer_tol", c.options.outer_tol);
    get("scan_points", c.options.scan_points);
    get("refine_count", c.options.refine_count);
    get("zoom_points", c.options.zoom_points);
    get("zoom_levels", c.options.zoom_levels);
    if (j.contains("family") && !j["family"].is_null())
      c.gen.family = parse_family(j["family"].get<std::string>());
    get("n", c.gen.n);
    get("bandwidth", c.gen.bandwidth);
    get_opt("rank_cap", c.gen.rank_cap);
    get("m", c.gen.m);
    get("p", c.gen.p);
    get("Omega", c.Omega);
    get("Omegas", c.Omegas);
    if (j.contains("sweep_task") && !j["sweep_task"].is_null())
      c.sweep_task = parse_task(j["sweep_task"].get<std::string>());
    get("verify_kind", c.verify_kind);
    get("samples", c.samples);
  }
  catch (const json::exception &e)
  {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.gen.seed = fo.seed;
  c.gen.Omega = c.Omega;
  c.options.interval = c.omega_range;
  if (!(fo.eps > 0) || fo.k_max < 1 || fo.rho < 1 || (fo.ell && (*fo.ell < 1 || *fo.ell > fo.rho)))
    throw ValidationError("config: need eps > 0, k_max >= 1, 1 <= ell <= rho");
  const auto &so = c.options;
  if (so.scan_points < 2 || so.refine_count < 1 || so.zoom_points < 3 || so.zoom_levels < 0)
    throw ValidationError(
        "config: need scan_points >= 2, refine_count >= 1, zoom_points >= 3, zoom_levels >= 0");
  if (c.verify_kind != "r" && c.verify_kind != "j" && c.verify_kind != "q" &&
      c.verify_kind != "structured")
    throw ValidationError("config: verify_kind must be r, j, q or structured");
  return c;
}

json RunConfig::to_json() const
{
  const auto &fo = options.framework;
  json j;
  j["task"] = to_string(task);
  j["input_dir"] = opt(input_dir);
  j["output"] = opt(output);
  j["output_dir"] = opt(output_dir);
  j["curve_prefix"] = opt(curve_prefix);
  j["emit_curve"] = emit_curve;
  j["curve_points"] = curve_points;
  j["omega_range"] =
    omega_range ? json::array({omega_range->first, omega_range->second}) : json(nullptr);
  j["eps"] = fo.eps;
  j["k_max"] = fo.k_max;
  j["rho"] = fo.rho;
  j["ell"] = opt(fo.ell);
  j["seed"] = fo.seed;
  j["hinf_tol"] = fo.hinf_tol;
  j["initial_points"] = fo.initial_points;
  j["gamma_outer"] = opt(options.gamma_outer);
  j["gamma_inner"] = options.eta.gamma_inner;
  j["penalty_factor"] = options.penalty_factor;
  j["outer_tol"] = options.outer_tol;
  j["scan_points"] = options.scan_points;
  j["refine_count"] = options.refine_count;
  j["zoom_points"] = options.zoom_points;
  j["zoom_levels"] = options.zoom_levels;
  j["family"] = to_string(gen.family);
  j["n"] = gen.n;
  j["bandwidth"] = gen.bandwidth;
  j["rank_cap"] = opt(gen.rank_cap);
  j["m"] = gen.m;
  j["p"] = gen.p;
  j["Omega"] = Omega;
  j["Omegas"] = Omegas;
  j["sweep_task"] = to_string(sweep_task);
  j["verify_kind"] = verify_kind;
  j["samples"] = samples;
  return j;
}

namespace
{

bool has(const fs::path &dir, const char *name) { return fs::exists(dir / name); }

Operator read(const fs::path &dir, const char *name)
{
  return read_matrix_market((dir / name).string());
}

SpMat read_sparse(const fs::path &dir, const char *name) { return read(dir, name).to_sparse(); }

}  // namespace

Problem load_problem(const RunConfig &cfg)
{
  if (!cfg.input_dir)
  {
    GenSpec g = cfg.gen;
    g.Omega = cfg.Omega;
    return generate(g);
  }
  const fs::path dir(*cfg.input_dir);
  if (!fs::is_directory(dir))
    throw ValidationError("input directory not found: " + dir.string());
  Problem pr;
  if (has(dir, "M.mtx"))
  {
    SecondOrderDH b;
    b.M = read_sparse(dir, "M.mtx");
    b.DM = read_sparse(dir, "DM.mtx");
    b.DR = read_sparse(dir, "DR.mtx");
    b.KE = read_sparse(dir, "KE.mtx");
    b.Kg = read_sparse(dir, "Kg.mtx");
    b.DG = read_sparse(dir, "DG.mtx");
    if (has(dir, "N.mtx"))
      b.N = read_sparse(dir, "N.mtx");
    b.Omega = cfg.Omega;
    pr.system = brake_system(b);
    pr.brake = b;
  }
  else
  {
    for (const char *f : {"J.mtx", "R.mtx", "Q.mtx", "B.mtx"})
      if (!has(dir, f))
        throw ValidationError(std::string("missing input file ") + f);
    pr.system = DHSystem::from_operators(read(dir, "J.mtx"), read(dir, "R.mtx"), read(dir, "Q.mtx"));
  }
  pr.restriction.B = read(dir, "B.mtx").to_dense();
  pr.restriction.C =
    has(dir, "C.mtx") ? read(dir, "C.mtx").to_dense() : Mat(pr.restriction.B.adjoint());
  return pr;
}

json report_from(const RadiusResult &r)
{
  json j;
  j["radius"] = num(r.radius);
  j["f"] = num(r.f);
  j["omega"] = num(r.omega);
  j["iterations"] = r.iterations;
  j["subspace_dim"] = r.subspace_dim;
  j["termination"] = to_string(r.termination);
  j["initial_points"] = r.initial_points;
  json table = json::array();
  for (std::size_t i = 0; i < r.history.size(); ++i)
  {
    json row;
    row["iteration"] = i + 1;
    row["omega"] = num(r.history[i].first);
    row["f"] = num(r.history[i].second);
    row["dim"] = i < r.dims.size() ? json(r.dims[i]) : json(nullptr);
    row["wall_time"] = i < r.seconds.size() ? json(r.seconds[i]) : json(nullptr);
    table.push_back(row);
  }
  j["history"] = table;
  return j;
}

namespace
{

void write_csv(const std::string &path, const std::vector<double> &x, const std::vector<double> &y)
{
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write " + path);
  out.precision(17);
  out << "omega,value\n";
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    out << x[i] << ',';
    if (std::isfinite(y[i]))
      out << y[i];
    else
      out << "inf";
    out << '\n';
  }
}

std::pair<double, double> curve_range(const RunConfig &cfg, double omega)
{
  if (cfg.omega_range)
    return *cfg.omega_range;
  const double w = 2.0 * std::abs(omega) + 1.0;
  return {-w, w};
}

// Samples σ_max of the full and final reduced transfer functions.
json emit_unstructured_curve(const RunConfig &cfg, const Problem &pr, TransferKind kind,
                             const ShiftedSolver &solver, const RadiusResult &r)
{
  auto [a, b] = curve_range(cfg, r.omega);
  auto xs = kernels::linspace(a, b, cfg.curve_points);
  FullTransfer tf(pr.system, kind, pr.restriction, solver);
  std::vector<double> full;
  try
  {
    full = kernels::sigma_sweep(tf, xs);
  }
  catch (const ShiftOnSpectrum &)
  {
    full.assign(xs.size(), INFINITY);
  }
  const std::string prefix = cfg.curve_prefix.value_or("curve");
  write_csv(prefix + "_full.csv", xs, full);
  json files = json::array({prefix + "_full.csv"});
  if (!r.reductions.empty())
  {
    auto red = kernels::sigma_sweep(reduced_state_space(r.reductions.back(), kind), xs);
    write_csv(prefix + "_reduced.csv", xs, red);
    files.push_back(prefix + "_reduced.csv");
  }
  return files;
}

json emit_structured_curve(const RunConfig &cfg, const Problem &pr, const ShiftedSolver &solver,
                           const RadiusResult &r)
{
  auto [a, b] = curve_range(cfg, r.omega);
  auto xs = kernels::linspace(a, b, cfg.curve_points);
  EtaOptions eo = cfg.options.eta;
  eo.derivative = false;
  eo.penalty.reset();
  auto sample = [&](const EtaFunction &eta) {
    return kernels::map<double>(Index(xs.size()), [&](Index i) {
      try
      {
        return eta.value(xs[std::size_t(i)], eo).value;
      }
      catch (const NumericalError &)
      {
        return double(INFINITY);
      }
    });
  };
  const std::string prefix = cfg.curve_prefix.value_or("curve");
  write_csv(prefix + "_full.csv", xs,
            sample(EtaFunction::full(pr.system, pr.restriction.B, solver)));
  json files = json::array({prefix + "_full.csv"});
  if (!r.reductions.empty())
  {
    write_csv(prefix + "_reduced.csv", xs, sample(EtaFunction::reduced(r.reductions.back())));
    files.push_back(prefix + "_reduced.csv");
  }
  return files;
}

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string radius_table(const std::string &task, const RadiusResult &r)
{
  std::ostringstream os;
  os << "task         " << task << "\n"
     << "radius       " << fmt(r.radius) << "\n"
     << "omega*       " << fmt(r.omega) << "\n"
     << "iterations   " << r.iterations << "\n"
     << "subspace dim " << r.subspace_dim << "\n"
     << "termination  " << to_string(r.termination) << "\n";
  if (!r.history.empty())
  {
    os << "\n  k        omega                f    dim   time(s)\n";
    for (std::size_t i = 0; i < r.history.size(); ++i)
    {
      char line[160];
      std::snprintf(line, sizeof line, "%3zu %14.8g %16.10g %6ld %9.3f\n", i + 1,
                    r.history[i].first, r.history[i].second,
                    long(i < r.dims.size() ? r.dims[i] : 0),
                    i < r.seconds.size() ? r.seconds[i] : 0.0);
      os << line;
    }
  }
  return os.str();
}

RadiusResult run_radius(Task task, const RunConfig &cfg, const Problem &pr,
                        const ShiftedSolver &solver)
{
  FrameworkOptions fo = cfg.options.framework;
  StructuredOptions so = cfg.options;
  if (cfg.emit_curve)
  {
    fo.keep_reductions = true;
    so.framework.keep_reductions = true;
  }
  switch (task)
  {
    case Task::radius_rj: return radius_rj(pr.system, pr.restriction, fo, &solver);
    case Task::radius_q: return radius_q(pr.system, pr.restriction, fo, &solver);
    case Task::radius_structured:
      return radius_structured_sf(pr.system, pr.restriction.B, so, &solver);
    case Task::radius_structured_small:
    {
      const bool real = pr.system.is_real() && pr.restriction.B.imag().isZero(0.0);
      auto [a, b] = so.interval ? *so.interval
                                : default_eta_interval(pr.system, real, fo.dense_eig_limit, fo.seed);
      return radius_structured_small(pr.system, pr.restriction.B, a, b, so, &solver);
    }
    default: throw ValidationError("not a radius task: " + to_string(task));
  }
}

std::unique_ptr<ShiftedSolver> solver_for(const Problem &pr)
{
  if (pr.brake && !pr.brake->has_circulatory())
    return std::make_unique<BrakeSolver>(*pr.brake);
  return make_solver(pr.system);
}

void write_gen(const RunConfig &cfg, const Problem &pr)
{
  const fs::path dir(cfg.output_dir.value_or("."));
  fs::create_directories(dir);
  auto w = [&](const char *name, const auto &m) { write_matrix_market((dir / name).string(), m); };
  if (pr.brake)
  {
    const auto &b = *pr.brake;
    w("M.mtx", b.M);
    w("DM.mtx", b.DM);
    w("DR.mtx", b.DR);
    w("KE.mtx", b.KE);
    w("Kg.mtx", b.Kg);
    w("DG.mtx", b.DG);
  }
  else
  {
    w("J.mtx", pr.system.J());
    w("R.mtx", pr.system.R());
    w("Q.mtx", pr.system.Q_data());
  }
  w("B.mtx", pr.restriction.B);
  w("C.mtx", pr.restriction.C);
}

RunOutcome run_task(const RunConfig &cfg)
{
  RunOutcome out;
  json &rep = out.report;
  rep["task"] = to_string(cfg.task);
  rep["version"] = kVersion;
  rep["config"] = cfg.to_json();
  for (const char *k : {"radius", "f", "omega", "iterations", "subspace_dim", "termination",
                        "initial_points", "history", "norm", "verification", "rows", "curves",
                        "files"})
    rep[k] = nullptr;

  switch (cfg.task)
  {
    case Task::hinf:
    {
      StateSpace ss;
      if (cfg.input_dir && has(cfg.input_dir.value(), "A.mtx"))
      {
        const fs::path dir(*cfg.input_dir);
        ss.A = read(dir, "A.mtx").to_dense();
        ss.B = read(dir, "B.mtx").to_dense();
        ss.C = read(dir, "C.mtx").to_dense();
      }
      else
      {
        Problem pr = load_problem(cfg);
        ss = full_state_space(pr.system, TransferKind::rj, pr.restriction);
      }
      HinfResult h = hinf_norm_bb(ss, cfg.options.framework.hinf_tol);
      rep["norm"] = num(h.norm);
      rep["omega"] = num(h.omega);
      rep["iterations"] = h.iterations;
      out.table = "task         hinf\nnorm         " + fmt(h.norm) + "\nomega*       " +
                  fmt(h.omega) + "\n";
      return out;
    }
    case Task::gen:
    {
      Problem pr = load_problem(cfg);
      write_gen(cfg, pr);
      ValidationReport vr = validate_dh(pr.system);
      json files = json::array();
      for (const auto &e : fs::directory_iterator(cfg.output_dir.value_or(".")))
        if (e.path().extension() == ".mtx")
          files.push_back(e.path().filename().string());
      std::sort(files.begin(), files.end());
      rep["files"] = files;
      rep["verification"] = {{"valid", vr.ok}, {"violations", vr.violations.size()}};
      out.table = "task         gen\nfamily       " + to_string(cfg.gen.family) + "\nn            " +
                  std::to_string(pr.system.n()) + "\nvalid        " + (vr.ok ? "yes" : "no") + "\n";
      return out;
    }
    case Task::sweep:
    {
      if (cfg.Omegas.empty())
        throw ValidationError("sweep needs a list of Omega values");
      struct Row
      {
        double Omega;
        RadiusResult r;
      };
      auto rows = kernels::map<Row>(Index(cfg.Omegas.size()), [&](Index i) {
        RunConfig c = cfg;
        c.Omega = cfg.Omegas[std::size_t(i)];
        c.gen.Omega = c.Omega;
        c.emit_curve = false;
        Problem pr = load_problem(c);
        if (!pr.brake)
          throw ValidationError("sweep needs brake-form input");
        auto solver = solver_for(pr);
        return Row{c.Omega, run_radius(cfg.sweep_task, c, pr, *solver)};
      });
      json jr = json::array();
      std::ostringstream os;
      os << "task         sweep (" << to_string(cfg.sweep_task) << ")\n\n"
         << "      Omega           radius           omega*  iters   dim\n";
      for (const auto &row : rows)
      {
        jr.push_back({{"Omega", row.Omega},
                      {"radius", num(row.r.radius)},
                      {"omega", num(row.r.omega)},
                      {"iterations", row.r.iterations},
                      {"subspace_dim", row.r.subspace_dim},
                      {"termination", to_string(row.r.termination)}});
        char line[160];
        std::snprintf(line, sizeof line, "%11.6g %16.10g %16.10g %6d %5ld\n", row.Omega,
                      row.r.radius, row.r.omega, row.r.iterations, long(row.r.subspace_dim));
        os << line;
        if (row.r.termination == Termination::max_iter)
          out.exit_code = 4;
      }
      rep["rows"] = jr;
      out.table = os.str();
      return out;
    }
    default: break;
  }

  Problem pr = load_problem(cfg);
  auto solver = solver_for(pr);
  Task task = cfg.task;
  if (task == Task::verify)
  {
    if (cfg.verify_kind == "structured")
      task = Task::radius_structured;
    else if (cfg.verify_kind == "q")
      task = Task::radius_q;
    else
      task = Task::radius_rj;
  }
  RadiusResult r = run_radius(task, cfg, pr, *solver);
  json jr = report_from(r);
  for (auto it = jr.begin(); it != jr.end(); ++it)
    rep[it.key()] = it.value();
  out.table = radius_table(to_string(cfg.task), r);
  if (r.termination == Termination::max_iter)
    out.exit_code = 4;

  if (cfg.task == Task::verify)
  {
    if (cfg.verify_kind == "structured")
    {
      SpectraSummary s =
        sample_structured_spectra(pr.system, pr.restriction.B, 0.99 * r.radius, cfg.samples,
                                  cfg.options.framework.seed);
      rep["verification"] = {{"kind", "structured"},
                             {"sample_radius", num(0.99 * r.radius)},
                             {"samples", s.count},
                             {"crossings", s.crossings},
                             {"min_abs_real", num(s.min_abs_real)},
                             {"max_real", num(s.max_real)}};
      out.table += "\nsamples at 0.99 r: " + std::to_string(s.count) +
                   ", crossings: " + std::to_string(s.crossings) + "\n";
    }
    else
    {
      const RadiusKind rk = cfg.verify_kind == "q"   ? RadiusKind::q
                            : cfg.verify_kind == "j" ? RadiusKind::j
                                                     : RadiusKind::r;
      VerifyResult v = verify_unstructured(pr.system, rk, pr.restriction, r.radius, r.omega);
      rep["verification"] = {{"kind", cfg.verify_kind},
                             {"residual", num(v.residual)},
                             {"sign_re", v.sign.real()},
                             {"sign_im", v.sign.imag()},
                             {"ok", v.ok},
                             {"warning", v.warning.empty() ? json(nullptr) : json(v.warning)}};
      out.table += "\nverification residual " + fmt(v.residual) + (v.ok ? "" : "  (" + v.warning + ")") + "\n";
    }
  }

  if (cfg.emit_curve)
  {
    const bool structured =
      task == Task::radius_structured || task == Task::radius_structured_small;
    rep["curves"] = structured ? emit_structured_curve(cfg, pr, *solver, r)
                               : emit_unstructured_curve(cfg, pr,
                                                         task == Task::radius_q ? TransferKind::q
                                                                                : TransferKind::rj,
                                                         *solver, r);
  }
  return out;
}

}  // namespace

RunOutcome run(const RunConfig &cfg)
{
  RunOutcome out;
  try
  {
    out = run_task(cfg);
  }
  catch (const Error &e)
  {
    out.exit_code = exit_code_for(e.kind());
    out.report["task"] = to_string(cfg.task);
    out.report["version"] = kVersion;
    out.report["config"] = cfg.to_json();
    const char *kind = e.kind() == ErrorKind::validation  ? "validation"
                       : e.kind() == ErrorKind::numerical ? "numerical"
                                                          : "nonconvergence";
    out.report["error"] = {{"kind", kind}, {"message", e.what()}};
    out.table = "error (" + to_string(cfg.task) + "): " + e.what() + "\n";
  }
  if (!out.report.contains("error"))
    out.report["error"] = nullptr;
  out.report["exit_code"] = out.exit_code;
  if (cfg.output)
  {
    std::ofstream f(*cfg.output);
    if (!f)
    {
      out.exit_code = 2;
      out.table += "cannot write report " + *cfg.output + "\n";
    }
    else
      f << out.report.dump(2) << "\n";
  }
  return out;
}

}  // namespace dhrad
