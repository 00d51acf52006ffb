#include "dhrad/structured.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dhrad/kernels.hpp"

namespace dhrad
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat herm(const Mat &X) { return 0.5 * (X + X.adjoint()); }

StructuredPieces pieces_from(const Mat &S, const Mat &QB)
{
  StructuredPieces p;
  Mat T = QB.adjoint() * S;
  p.H0_tilde = herm(T.adjoint() * T);
  // Cholesky factor of T^H T taken from a QR of T, so H0 inherits cond(T) rather than cond(T)^2.
  const Index m = T.rows();
  Eigen::HouseholderQR<Mat> qr(T);
  Mat Rt = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < m; ++i)
  {
    const double a = std::abs(Rt(i, i));
    if (a > 0)
      Rt.row(i) *= std::conj(Rt(i, i)) / a;
  }
  p.L = Rt.adjoint();
  const double dmin = p.L.diagonal().real().minCoeff();
  if (!(dmin > 1e-14 * p.L.norm()))
    throw NumericalError("tangential degeneracy (H0 tilde not positive definite)");
  Mat Linv = p.L.triangularView<Eigen::Lower>().solve(Mat::Identity(m, m));
  p.H0 = herm(Linv * Linv.adjoint());
  p.H1_tilde = Linv * T.adjoint() * Linv.adjoint();
  p.H1 = herm(Scalar(0, 1) * (p.H1_tilde - p.H1_tilde.adjoint()));
  return p;
}

struct MinEig
{
  double value;
  Vec v;
};

MinEig lambda_min(const Mat &H)
{
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

}  // namespace

EtaEvaluation eta_from_pieces(const Mat &H0, const Mat &H1, const EtaOptions &opts)
{
  EtaEvaluation out;
  Eigen::SelfAdjointEigenSolver<Mat> e0(H0, Eigen::EigenvaluesOnly), e1(H1, Eigen::EigenvaluesOnly);
  const double l1min = e1.eigenvalues()(0), l1max = e1.eigenvalues()(H1.rows() - 1);
  const double n1 = std::max(std::abs(l1min), std::abs(l1max));
  const double n0 = e0.eigenvalues().cwiseAbs().maxCoeff();
  const double fail = opts.penalty ? *opts.penalty : kInf;

  if (n1 <= 1e-13 * n0)
  {
    out.h1_zero = true;
    out.attained = true;
    out.value = e0.eigenvalues()(0);
    out.t_star = 0.0;
    return out;
  }
  const double tol = 1e-12 * n1;
  out.h1_indefinite = l1min < -tol && l1max > tol;
  if (!out.h1_indefinite)
  {
    out.value = fail;
    return out;
  }

  Oracle g = [&](double t) {
    MinEig me = lambda_min(H0 + t * H1);
    return OracleValue{me.value, (me.v.adjoint() * H1 * me.v)(0).real()};
  };
  double L = 1.0;
  for (;;)
  {
    if (g(-L).df >= 0 && g(L).df <= 0)
      break;
    L *= 2.0;
    if (L > opts.t_cap)
    {
      out.h1_indefinite = true;
      out.value = fail;
      return out;
    }
  }
  PQOptions po;
  po.initial = {-L, L};
  po.scale_floor = n0;
  OptimizerOutcome r = maximize_pq(g, -L, L, opts.gamma_inner, opts.inner_tol,
                                   opts.inner_max_iter, po);
  out.attained = true;
  out.value = r.f;
  out.t_star = r.x;
  return out;
}

EtaFunction EtaFunction::full(const DHSystem &system, const Mat &B, const ShiftedSolver &solver)
{
  EtaFunction f;
  f.s_ = [&solver, B](double w) { return solver.solve_w(w, B, 1); };
  f.QB_ = system.apply_Q(B);
  return f;
}

EtaFunction EtaFunction::reduced(const ReducedDH &red)
{
  EtaFunction f;
  Mat A = red.A();
  Mat B = red.B;
  f.s_ = [A, B](double w) {
    Mat Wm = A - Scalar(0, w) * Mat::Identity(A.rows(), A.cols());
    Eigen::PartialPivLU<Mat> lu(Wm);
    Mat S = lu.solve(B);
    if (!S.allFinite() || lu.rcond() <= std::numeric_limits<double>::epsilon())
      throw ShiftOnSpectrum(w);
    return S;
  };
  f.QB_ = red.Q * red.B;
  return f;
}

StructuredPieces EtaFunction::pieces(double omega) const { return pieces_from(s_(omega), QB_); }

EtaEvaluation EtaFunction::value(double omega, const EtaOptions &opts) const
{
  StructuredPieces p = pieces(omega);
  return eta_from_pieces(p.H0, p.H1, opts);
}

EtaEvaluation EtaFunction::eval(double omega, const EtaOptions &opts) const
{
  EtaEvaluation e = value(omega, opts);
  if (!opts.derivative || !e.attained)
    return e;
  const double h = 1e-6 * std::max(1.0, std::abs(omega));
  EtaEvaluation ep = value(omega + h, opts), em = value(omega - h, opts);
  if (ep.attained && em.attained)
    e.derivative = (ep.value - em.value) / (2 * h);
  else if (ep.attained)
    e.derivative = (ep.value - e.value) / h;
  else if (em.attained)
    e.derivative = (e.value - em.value) / h;
  return e;
}

StructuredPieces assemble_h0_h1(const DHSystem &system, const Mat &B, double omega,
                                const ShiftedSolver *solver)
{
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  return EtaFunction::full(system, B, *solver).pieces(omega);
}

EtaEvaluation eta_structured(const DHSystem &system, const Mat &B, double omega,
                             const EtaOptions &opts, const ShiftedSolver *solver)
{
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  return EtaFunction::full(system, B, *solver).eval(omega, opts);
}

OptimizerOutcome minimize_eta(const EtaFunction &eta, double a, double b,
                              const std::vector<double> &initial, const StructuredOptions &opts)
{
  EtaOptions eo = opts.eta;
  eo.penalty.reset();

  // Value-only scan over the supplied points and a uniform grid.
  std::vector<double> xs = kernels::linspace(a, b, std::max(opts.scan_points, 2));
  for (double x : initial)
    xs.push_back(std::clamp(x, a, b));
  std::sort(xs.begin(), xs.end());
  const double merge = 1e-10 * std::max(b - a, 1e-300);
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [merge](double u, double v) { return v - u <= merge; }),
           xs.end());
  EtaOptions vo = eo;
  vo.derivative = false;
  const std::vector<double> vs = kernels::map<double>(Index(xs.size()), [&](Index i) {
    EtaEvaluation e = eta.value(xs[std::size_t(i)], vo);
    return e.attained ? e.value : kInf;
  });

  OptimizerOutcome out;
  out.f = kInf;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.history.emplace_back(xs[i], vs[i]);

  double gamma;
  if (opts.gamma_outer)
    gamma = *opts.gamma_outer;
  else
  {
    double scale = 0.0;
    for (double v : vs)
      if (std::isfinite(v))
        scale = std::max(scale, std::abs(v));
    if (scale == 0.0)
      scale = 1.0;
    const double width = std::max(b - a, 1e-300);
    gamma = -1e4 * scale / (width * width);
  }

  // Discrete local minima of the scan, lowest first.
  std::vector<std::size_t> minima;
  const std::size_t ns = xs.size();
  for (std::size_t i = 0; i < ns; ++i)
    if (std::isfinite(vs[i]) && (i == 0 || vs[i] <= vs[i - 1]) && (i + 1 == ns || vs[i] <= vs[i + 1]))
      minima.push_back(i);
  // Finite samples next to a non-finite one; minima of η̃ tend to hug such boundaries.
  std::vector<std::size_t> walls;
  for (std::size_t i = 0; i < ns; ++i)
    if (std::isfinite(vs[i]) && ((i > 0 && !std::isfinite(vs[i - 1])) ||
                                 (i + 1 < ns && !std::isfinite(vs[i + 1]))))
      walls.push_back(i);
  auto lowest = [&](std::vector<std::size_t> &idx) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return vs[i] < vs[j]; });
    if (idx.size() > std::size_t(std::max(opts.refine_count, 1)))
      idx.resize(std::size_t(std::max(opts.refine_count, 1)));
  };
  lowest(minima);
  lowest(walls);
  for (std::size_t i : walls)
    if (std::find(minima.begin(), minima.end(), i) == minima.end())
      minima.push_back(i);
  if (minima.empty())
    return out;

  Oracle oracle = [&](double w) {
    EtaEvaluation e = eta.eval(w, eo);
    return OracleValue{e.attained ? e.value : kInf, e.derivative};
  };
  auto refine = [&](Index k) {
    std::size_t i = minima[std::size_t(k)];
    double lo = xs[i == 0 ? 0 : i - 1], hi = xs[i + 1 == ns ? i : i + 1], xc = xs[i], vc = vs[i];
    std::vector<std::pair<double, double>> zoomed;
    // Rescan the bracket on finer grids, keeping the neighbors of the lowest point.
    for (int level = 0; level < opts.zoom_levels && hi > lo; ++level)
    {
      std::vector<double> zx = kernels::linspace(lo, hi, std::max(opts.zoom_points, 3));
      std::vector<double> zv(zx.size());
      for (std::size_t j = 0; j < zx.size(); ++j)
      {
        EtaEvaluation e = eta.value(zx[j], vo);
        zv[j] = e.attained ? e.value : kInf;
        zoomed.emplace_back(zx[j], zv[j]);
        if (zv[j] < vc)
        {
          vc = zv[j];
          xc = zx[j];
        }
      }
      const std::size_t j = std::size_t(std::lower_bound(zx.begin(), zx.end(), xc) - zx.begin());
      const double nlo = j == 0 ? zx[0] : zx[j - 1];
      const double nhi = j >= zx.size() - 1 ? zx.back() : (zx[j] == xc ? zx[j + 1] : zx[j]);
      lo = std::min(nlo, xc);
      hi = std::max(nhi, xc);
    }
    PQOptions po;
    po.initial = {xc};
    po.penalty_factor = opts.penalty_factor;
    po.scale_floor = 0.0;
    po.adapt_curvature = true;
    OptimizerOutcome r = minimize_pq(oracle, lo, hi, gamma, opts.outer_tol, opts.outer_max_iter, po);
    r.history.insert(r.history.begin(), zoomed.begin(), zoomed.end());
    return r;
  };
  const std::vector<OptimizerOutcome> runs =
    kernels::map<OptimizerOutcome>(Index(minima.size()), refine);

  const OptimizerOutcome *best = &runs.front();
  for (const auto &r : runs)
  {
    out.iterations += r.iterations;
    out.history.insert(out.history.end(), r.history.begin(), r.history.end());
    if (r.f < best->f)
      best = &r;
  }
  out.x = best->x;
  out.f = best->f;
  out.converged = best->converged;
  out.lower_bound = best->lower_bound;
  out.gap = best->gap;
  out.gamma = best->gamma;
  out.models = best->models;
  return out;
}

namespace
{

RadiusResult to_result(const OptimizerOutcome &o)
{
  if (!std::isfinite(o.f))
    throw Error(ErrorKind::nonconvergence, "radius not determined on interval");
  RadiusResult r;
  r.f = o.f;
  r.radius = std::sqrt(std::max(0.0, o.f));
  r.omega = o.x;
  r.iterations = o.iterations;
  r.history = o.history;
  r.termination = o.converged ? Termination::f_close : Termination::max_iter;
  return r;
}

std::vector<double> imag_parts_in(const Vec &lam, double a, double b, bool real)
{
  std::vector<double> out;
  for (Index i = 0; i < lam.size(); ++i)
  {
    double y = real ? std::abs(lam(i).imag()) : lam(i).imag();
    if (y >= a && y <= b)
      out.push_back(y);
  }
  return out;
}

}  // namespace

RadiusResult radius_structured_small(const DHSystem &system, const Mat &B, double a, double b,
                                     const StructuredOptions &opts, const ShiftedSolver *solver)
{
  check_restriction({B, B.adjoint()}, system.n());
  if (!(a <= b))
    throw ValidationError("empty frequency interval");
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  const bool real = system.is_real() && B.imag().isZero(0.0);
  std::vector<double> init{a, 0.5 * (a + b), b};
  if (system.n() <= opts.framework.dense_eig_limit)
  {
    Vec lam = spectrum_estimate(system, opts.framework.dense_eig_limit, opts.framework.seed);
    for (Index i = 0; i < lam.size(); ++i)
      if (!(lam(i).real() < 0))
        throw ValidationError("system is not asymptotically stable");
    for (double y : imag_parts_in(lam, a, b, real))
      init.push_back(y);
  }
  EtaFunction eta = EtaFunction::full(system, B, *solver);
  RadiusResult r = to_result(minimize_eta(eta, a, b, init, opts));
  r.initial_points = init;
  r.subspace_dim = system.n();
  return r;
}

std::pair<double, double> default_eta_interval(const DHSystem &system, bool real,
                                               Index dense_eig_limit, std::uint64_t seed)
{
  Vec lam = spectrum_estimate(system, dense_eig_limit, seed);
  double a = lam.imag().minCoeff(), b = lam.imag().maxCoeff();
  if (real)
  {
    b = std::max(std::abs(a), std::abs(b));
    a = 0.0;
  }
  if (b - a <= 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff()))
  {
    a = real ? 0.0 : -1.0;
    b = 1.0;
  }
  return {a, b};
}

ReducedDH reduce_structured(const DHSystem &system, const Mat &B, const Mat &V)
{
  return reduce_dh(system, RestrictionPair{B, Mat()}, V, build_oblique_basis(V, system),
                   ReductionMode::r_side);
}

RadiusResult radius_structured_sf(const DHSystem &system, const Mat &B,
                                  const StructuredOptions &opts, const ShiftedSolver *solver)
{
  const Index n = system.n();
  const FrameworkOptions &fo = opts.framework;
  RestrictionPair rp{B, B.adjoint()};
  check_restriction(rp, n);
  if (!(fo.eps > 0) || fo.k_max < 1)
    throw ValidationError("framework options: need eps > 0 and k_max >= 1");
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  const bool real = system.is_real() && B.imag().isZero(0.0);

  RadiusResult res;
  res.initial_points = fo.initial_points.empty()
                         ? select_initial_points(system, TransferKind::rj, rp, fo.rho,
                                                 fo.ell ? *fo.ell : default_ell(n), solver,
                                                 fo.dense_eig_limit, fo.seed)
                         : fo.initial_points;

  auto [a, b] = opts.interval ? *opts.interval
                              : default_eta_interval(system, real, fo.dense_eig_limit, fo.seed);

  auto block = [&](double w) {
    Mat X1 = solver->solve_w(w, B, 1);
    Mat X2 = solver->solve_w(w, X1, 1);
    Mat blk(n, X1.cols() + X2.cols());
    blk << X1, X2;
    return real ? realify(blk) : blk;
  };
  auto blocks = kernels::map<Mat>(Index(res.initial_points.size()), [&](Index i) {
    return block(res.initial_points[std::size_t(i)]);
  });
  Mat basis(n, 0);
  for (const auto &blk : blocks)
    basis = expand_orthonormal(basis, blk).V;

  std::vector<double> visited = res.initial_points;
  const auto t0 = std::chrono::steady_clock::now();
  double pf = 0.0, pw = 0.0;
  for (int it = 1;; ++it)
  {
    ReducedDH red;
    try
    {
      red = reduce_structured(system, B, basis);
    }
    catch (const Error &e)
    {
      throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(it));
    }
    Eigen::ComplexEigenSolver<Mat> es(red.A(), false);
    std::vector<double> init{a, 0.5 * (a + b), b};
    for (double y : visited)
      init.push_back(real ? std::abs(y) : y);
    for (double y : imag_parts_in(es.eigenvalues(), a, b, real))
      init.push_back(y);
    OptimizerOutcome o = minimize_eta(EtaFunction::reduced(red), a, b, init, opts);
    if (!std::isfinite(o.f))
      throw Error(ErrorKind::nonconvergence, "radius not determined on interval");

    res.iterations = it;
    res.subspace_dim = basis.cols();
    res.history.emplace_back(o.x, o.f);
    res.dims.push_back(basis.cols());
    res.seconds.push_back(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (fo.keep_reductions)
      res.reductions.push_back(red);
    res.f = o.f;
    res.omega = o.x;

    if (it > 1)
    {
      if (std::abs(o.x - pw) < fo.eps * 0.5 * (std::abs(o.x) + std::abs(pw)))
      {
        res.termination = Termination::omega_close;
        break;
      }
      if (std::abs(o.f - pf) <= fo.eps * 0.5 * std::abs(o.f + pf))
      {
        res.termination = Termination::f_close;
        break;
      }
    }
    if (it >= fo.k_max)
    {
      res.termination = Termination::max_iter;
      break;
    }
    Expansion e = expand_orthonormal(basis, block(o.x));
    if (!e.expanded())
    {
      res.termination = Termination::omega_close;
      break;
    }
    basis = std::move(e.V);
    visited.push_back(o.x);
    pf = o.f;
    pw = o.x;
  }
  res.radius = std::sqrt(std::max(0.0, res.f));
  return res;
}

}  // namespace dhrad
