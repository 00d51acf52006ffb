// Acceptance gate: one PASS/FAIL line per criterion. Exit code is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dhrad/dhrad.hpp"
#include "oracles.hpp"

using namespace dhrad;

namespace
{

int failures = 0;

void report(int id, const std::string &title, bool ok, const std::string &detail)
{
  std::printf("%s  [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

std::string fmt(const char *f, double a, double b = 0, double c = 0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

DHSystem identity_system(Index n)
{
  return DHSystem::dense(Mat::Zero(n, n), Mat::Identity(n, n), Mat::Identity(n, n));
}

double herm_lambda_min(const Mat &H)
{
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double op_norm(const Mat &X)
{
  if (X.size() == 0)
    return 0.0;
  return Eigen::JacobiSVD<Mat>(X).singularValues()(0);
}

// ---------------------------------------------------------------------------------------
void criterion1()
{
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  auto upd = [&](double value, double omega) {
    worst = std::max({worst, std::abs(value - 1.0), std::abs(omega)});
  };
  for (Index n : {1, 2})
  {
    DHSystem sys = identity_system(n);
    RestrictionPair rp{Mat::Identity(n, n), Mat::Identity(n, n)};
    RadiusResult a = radius_rj(sys, rp);
    upd(a.radius, a.omega);
    RadiusResult b = radius_q(sys, rp);
    upd(b.radius, b.omega);
    StateSpace ss{-Mat::Identity(n, n), Mat::Identity(n, n), Mat::Identity(n, n)};
    HinfResult h = hinf_norm_bb(ss);
    upd(h.norm, h.omega);
    RadiusResult s = radius_structured_small(sys, Mat::Identity(n, n), -2.0, 2.0);
    upd(s.radius, s.omega);
  }
  StateSpace diag{Mat(Vec(Eigen::Vector2cd(-1.0, -2.0)).asDiagonal()), Mat::Identity(2, 2),
                  Mat::Identity(2, 2)};
  HinfResult h = hinf_norm_bb(diag);
  upd(h.norm, h.omega);
  const double t = seconds_since(t0);
  report(1, "analytic exactness", worst <= 1e-8 && t < 1.0,
         fmt("max deviation %.2e, runtime %.3f s", worst, t));
}

// ---------------------------------------------------------------------------------------
struct UnstructuredRuns
{
  std::vector<Problem> problems;
  std::vector<RadiusResult> rj, q, rj1, q1;  // defaults and single initial point
};

UnstructuredRuns criterion2()
{
  UnstructuredRuns runs;
  double worst = 0.0, tmax = 0.0, info1 = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
  {
    Problem pr = gen_dense(40, seed);
    FrameworkOptions fo;
    fo.keep_reductions = true;
    FrameworkOptions f1 = fo;
    f1.ell = 1;
    for (TransferKind kind : {TransferKind::rj, TransferKind::q})
    {
      StateSpace full = full_state_space(pr.system, kind, pr.restriction);
      const double bb = hinf_norm_bb(full).norm;
      const double grid = oracle::hinf_grid(full.A, full.B, full.C);
      auto t0 = std::chrono::steady_clock::now();
      RadiusResult r = kind == TransferKind::rj ? radius_rj(pr.system, pr.restriction, fo)
                                                : radius_q(pr.system, pr.restriction, fo);
      tmax = std::max(tmax, seconds_since(t0));
      worst = std::max({worst, rel(r.radius, 1.0 / bb), rel(r.radius, 1.0 / grid)});
      RadiusResult r1 = kind == TransferKind::rj ? radius_rj(pr.system, pr.restriction, f1)
                                                 : radius_q(pr.system, pr.restriction, f1);
      if (rel(r1.radius, 1.0 / bb) <= 1e-6)
        info1 += 1;
      (kind == TransferKind::rj ? runs.rj : runs.q).push_back(r);
      (kind == TransferKind::rj ? runs.rj1 : runs.q1).push_back(r1);
    }
    runs.problems.push_back(pr);
  }
  report(2, "full-order oracle equivalence", worst <= 1e-6 && tmax <= 10.0,
         fmt("max rel error %.2e vs level-set and grid oracles, slowest run %.3f s; "
             "single-point starts reach the global value in %.0f/20 runs",
             worst, tmax, info1));
  return runs;
}

// ---------------------------------------------------------------------------------------
void criterion3(const UnstructuredRuns &runs)
{
  double skew = 0, rmin = 0, wv = 0, qmin = INFINITY;
  int count = 0;
  for (const auto *set : {&runs.rj, &runs.q, &runs.rj1, &runs.q1})
    for (const auto &r : *set)
      for (const auto &red : r.reductions)
      {
        ++count;
        skew = std::max(skew, (red.J + red.J.adjoint()).norm() / std::max(red.J.norm(), 1e-300));
        rmin = std::max(rmin, -herm_lambda_min(red.R) / std::max(op_norm(red.R), 1e-300));
        qmin = std::min(qmin, herm_lambda_min(red.Q));
        wv = std::max(wv, (red.W.adjoint() * red.V - Mat::Identity(red.k(), red.k())).norm());
      }
  report(3, "structure preservation",
         skew <= 1e-10 && rmin <= 1e-10 && qmin > 0 && wv <= 1e-10,
         fmt("%.0f reductions; max ||Jk+Jk^H||/||Jk|| %.1e, max -lmin(Rk)/||Rk|| %.1e", count,
             skew, rmin) +
           fmt(", min lmin(Qk) %.2e, max ||Wk^H Vk - I|| %.1e", qmin, wv));
}

// ---------------------------------------------------------------------------------------
void criterion4(const UnstructuredRuns &runs)
{
  double val = 0, der = 0;
  int points = 0;
  auto check = [&](const Problem &pr, const RadiusResult &r, TransferKind kind) {
    StateSpace full = full_state_space(pr.system, kind, pr.restriction);
    std::vector<double> visited = r.initial_points;
    for (std::size_t k = 0; k < r.reductions.size(); ++k)
    {
      StateSpace red = reduced_state_space(r.reductions[k], kind);
      for (double w : visited)
      {
        ++points;
        const double sf = full.sigma(w, false).sigma, sr = red.sigma(w, false).sigma;
        val = std::max(val, std::abs(sf - sr) / sf);
        const double h = 1e-6 * std::max(1.0, std::abs(w));
        const double df =
          (full.sigma(w + h, false).sigma - full.sigma(w - h, false).sigma) / (2 * h);
        const double dr = (red.sigma(w + h, false).sigma - red.sigma(w - h, false).sigma) / (2 * h);
        der = std::max(der, std::abs(df - dr) / std::max(1.0, std::abs(df)));
      }
      visited.push_back(r.history[k].first);
    }
  };
  for (std::size_t i = 0; i < runs.problems.size(); ++i)
  {
    check(runs.problems[i], runs.rj[i], TransferKind::rj);
    check(runs.problems[i], runs.q[i], TransferKind::q);
    check(runs.problems[i], runs.rj1[i], TransferKind::rj);
    check(runs.problems[i], runs.q1[i], TransferKind::q);
  }
  report(4, "Hermite interpolation", val <= 1e-8 && der <= 1e-4,
         fmt("%.0f interpolation checks; max rel sigma gap %.2e, max FD derivative gap %.2e",
             points, val, der));
}

// ---------------------------------------------------------------------------------------
void criterion5()
{
  double asm_err = 0, chol = 0, herm = 0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-10.0, 10.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
  {
    const Index m = 1 + Index(seed % 3);
    Problem pr = gen_dense(8, 100 + seed, 2, m, m);
    const Mat J = pr.system.dense_J(), R = pr.system.dense_R(), Q = pr.system.dense_Q();
    const Mat &B = pr.restriction.B;
    for (int k = 0; k < 5; ++k)
    {
      const double w = ud(rng);
      StructuredPieces p = assemble_h0_h1(pr.system, B, w);
      oracle::Pieces o = oracle::structured_pieces(J, R, Q, B, w);
      asm_err = std::max({asm_err, (p.H0 - o.H0).norm() / o.H0.norm(),
                          (p.H1 - o.H1).norm() / std::max(o.H0.norm(), o.H1.norm()),
                          (p.H0_tilde - o.H0_tilde).norm() / o.H0_tilde.norm()});
      chol = std::max(chol, (p.L * p.L.adjoint() - p.H0_tilde).norm() / p.H0_tilde.norm());
      herm = std::max(herm, (p.H1 - p.H1.adjoint()).norm() / std::max(p.H1.norm(), 1e-300));
    }
  }
  report(5, "structured pieces", asm_err <= 1e-10 && chol <= 1e-12 && herm <= 1e-12,
         fmt("50 evaluations; max rel assembly error %.2e, LL^H defect %.2e, H1 Hermitian "
             "defect %.2e",
             asm_err, chol, herm));
}

// ---------------------------------------------------------------------------------------
void criterion6()
{
  double piece = 0, eta = 0, der = 0;
  int used = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    Problem pr = gen_dense(30, 200 + seed);
    const Mat &B = pr.restriction.B;
    auto solver = make_solver(pr.system);
    EtaFunction full = EtaFunction::full(pr.system, B, *solver);
    // First eigenvalue frequency (ascending) where the supremum is attained.
    Vec lam = spectrum_estimate(pr.system, 1000, 0);
    std::vector<double> cands;
    for (Index i = 0; i < lam.size(); ++i)
      if (lam(i).imag() > 0)
        cands.push_back(lam(i).imag());
    std::sort(cands.begin(), cands.end());
    for (double wh : cands)
    {
      EtaEvaluation ef = full.eval(wh);
      if (!ef.attained)
        continue;
      Mat X1 = solver->solve_w(wh, B, 1), X2 = solver->solve_w(wh, X1, 1);
      Mat blk(pr.system.n(), 2 * B.cols());
      blk << X1, X2;
      Mat V = expand_orthonormal(Mat(pr.system.n(), 0), realify(blk)).V;
      ReducedDH red = reduce_structured(pr.system, B, V);
      EtaFunction rf = EtaFunction::reduced(red);
      StructuredPieces pf = full.pieces(wh), pk = rf.pieces(wh);
      piece = std::max({piece, (pf.H0 - pk.H0).norm() / pf.H0.norm(),
                        (pf.H1 - pk.H1).norm() / std::max(pf.H1.norm(), pf.H0.norm())});
      EtaEvaluation er = rf.eval(wh);
      eta = std::max(eta, std::abs(ef.value - er.value) / std::abs(ef.value));
      der = std::max(der, std::abs(ef.derivative - er.derivative) /
                            std::max(1.0, std::abs(ef.derivative)));
      ++used;
      break;
    }
  }
  report(6, "structured interpolation", used == 5 && piece <= 1e-9 && eta <= 1e-8 && der <= 1e-4,
         fmt("%.0f instances; max rel H0/H1 gap %.2e, eta gap %.2e", used, piece, eta) +
           fmt(", FD derivative gap %.2e", der));
}

// ---------------------------------------------------------------------------------------
struct StructuredRuns
{
  std::vector<Problem> problems;
  std::vector<RadiusResult> sf;
};

StructuredRuns criterion7()
{
  StructuredRuns runs;
  double worst = 0;
  int iters = 0, info = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    Problem pr = gen_dense(60, 300 + seed);
    const Mat &B = pr.restriction.B;
    StructuredOptions so;
    RadiusResult sf = radius_structured_sf(pr.system, B, so);
    auto [a, b] = default_eta_interval(pr.system, true);
    RadiusResult small = radius_structured_small(pr.system, B, a, b, so);
    worst = std::max(worst, rel(sf.radius, small.radius));
    iters = std::max(iters, sf.iterations);
    StructuredOptions s1 = so;
    s1.framework.ell = 1;
    if (rel(radius_structured_sf(pr.system, B, s1).radius, small.radius) <= 1e-4)
      ++info;
    runs.problems.push_back(pr);
    runs.sf.push_back(sf);
  }
  report(7, "structured framework vs small-scale", worst <= 1e-4 && iters <= 30,
         fmt("max rel gap %.2e, max iterations %.0f; single-point starts agree in %.0f/5", worst,
             iters, info));
  return runs;
}

// ---------------------------------------------------------------------------------------
void criterion8(const StructuredRuns &runs)
{
  double slack = INFINITY;
  for (std::size_t i = 0; i < runs.problems.size(); ++i)
  {
    const Problem &pr = runs.problems[i];
    RestrictionPair rp{pr.restriction.B, pr.restriction.B.adjoint()};
    const double ru = radius_rj(pr.system, rp).radius;
    slack = std::min(slack, runs.sf[i].radius - ru);
  }
  report(8, "structured radius dominates unstructured", slack >= -1e-8,
         fmt("min r_Herm - r(R;B,B^H) = %.3e", slack));
}

// ---------------------------------------------------------------------------------------
void criterion9(const UnstructuredRuns &runs)
{
  double worst = 0;
  for (std::size_t i = 0; i < runs.problems.size(); ++i)
  {
    const Problem &pr = runs.problems[i];
    for (RadiusKind k : {RadiusKind::r, RadiusKind::j})
    {
      VerifyResult v = verify_unstructured(pr.system, k, pr.restriction, runs.rj[i].radius,
                                           runs.rj[i].omega);
      worst = std::max(worst, v.residual / (1 + std::abs(runs.rj[i].omega)));
    }
    VerifyResult v = verify_unstructured(pr.system, RadiusKind::q, pr.restriction,
                                         runs.q[i].radius, runs.q[i].omega);
    worst = std::max(worst, v.residual / (1 + std::abs(runs.q[i].omega)));
  }
  Problem pr = gen_dense(20, 400);
  auto [a, b] = default_eta_interval(pr.system, true);
  RadiusResult rs = radius_structured_small(pr.system, pr.restriction.B, a, b);
  SpectraSummary s = sample_structured_spectra(pr.system, pr.restriction.B, 0.99 * rs.radius,
                                               1000, 11);
  report(9, "radius semantics", worst <= 1e-6 && s.crossings == 0,
         fmt("max scaled verification residual %.2e; 1000 samples at 0.99 r_Herm: %.0f "
             "crossings, min |Re lambda| %.2e",
             worst, double(s.crossings), s.min_abs_real));
}

// ---------------------------------------------------------------------------------------
void criterion10()
{
  auto f = [](double w) { return std::sin(3 * w) + 0.1 * w * w; };
  Oracle o = [&](double w) { return OracleValue{f(w), 3 * std::cos(3 * w) + 0.2 * w}; };
  OptimizerOutcome r = minimize_pq(o, -5, 5, -9.2, 1e-10, 2000);
  double gbest = INFINITY, gx = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i)
  {
    const double w = -5.0 + 10.0 * i / (N - 1);
    if (f(w) < gbest)
    {
      gbest = f(w);
      gx = w;
    }
  }
  // Local refinement of the grid minimizer by golden section on -f.
  const double h = 10.0 / (N - 1);
  gbest = -oracle::golden_max([&](double w) { return -f(w); }, gx - h, gx + h);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ud(-5, 5);
  double viol = -INFINITY;
  for (int i = 0; i < 100; ++i)
  {
    const double x = ud(rng);
    viol = std::max(viol, envelope_value(r.models, x) - f(x));
  }
  report(10, "eigopt soundness", std::abs(r.f - gbest) <= 1e-6 && viol <= 1e-12,
         fmt("f* = %.12f vs grid %.12f; max model excess at probes %.2e", r.f, gbest, viol));
}

// ---------------------------------------------------------------------------------------
void criterion11()
{
  double solve_err = 0;
  for (Index q : {1, 5, 20, 50})
  {
    SecondOrderDH b = gen_brake_toy(q, 500 + std::uint64_t(q), 1.5);
    DHSystem dense = assemble_brake_dh(b);
    Mat Qinv = dense.dense_Q().inverse();
    Mat JmR = dense.dense_J() - dense.dense_R();
    std::mt19937_64 rng(q);
    std::normal_distribution<double> nd;
    Mat rhs(2 * q, 3);
    for (Index i = 0; i < rhs.size(); ++i)
      rhs(i) = Scalar(nd(rng), nd(rng));
    for (double w : {0.0, 0.7, -3.0})
    {
      Mat ref = (Scalar(0, w) * Qinv - JmR).partialPivLu().solve(rhs);
      Mat z = solve_secondorder(b, w, rhs);
      solve_err = std::max(solve_err, (z - ref).norm() / ref.norm());
    }
  }
  SecondOrderDH b = gen_brake_toy(50, 550, 1.0);
  RestrictionPair rp = gen_brake_restriction(50, 550);
  BrakeSolver implicit_solver(b);
  RadiusResult ri = radius_rj(implicit_solver.system(), rp, {}, &implicit_solver);
  DHSystem dense = assemble_brake_dh(b);
  RadiusResult rd = radius_rj(dense, rp);
  const double gap = rel(ri.radius, rd.radius);
  report(11, "brake path", solve_err <= 1e-9 && gap <= 1e-6 && !implicit_solver.system().explicit_q(),
         fmt("max rel pencil-solve error %.2e; implicit vs explicit radius gap %.2e (r = %.6g)",
             solve_err, gap, ri.radius));
}

template <class F>
auto guarded(int id, const char *title, F &&f) -> decltype(f())
{
  try
  {
    return f();
  }
  catch (const std::exception &e)
  {
    report(id, title, false, std::string("exception: ") + e.what());
    return decltype(f())();
  }
}

}  // namespace

int main()
{
  guarded(1, "analytic exactness", criterion1);
  UnstructuredRuns u = guarded(2, "full-order oracle equivalence", criterion2);
  guarded(3, "structure preservation", [&] { criterion3(u); });
  guarded(4, "Hermite interpolation", [&] { criterion4(u); });
  guarded(5, "structured pieces", criterion5);
  guarded(6, "structured interpolation", criterion6);
  StructuredRuns s = guarded(7, "structured framework vs small-scale", criterion7);
  guarded(8, "structured radius dominates unstructured", [&] { criterion8(s); });
  guarded(9, "radius semantics", [&] { criterion9(u); });
  guarded(10, "eigopt soundness", criterion10);
  guarded(11, "brake path", criterion11);
  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
