#include "dhrad/unstructured.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Eigenvalues>

#include "dhrad/kernels.hpp"

namespace dhrad
{

std::string to_string(Termination t)
{
  switch (t)
  {
    case Termination::omega_close: return "omega_close";
    case Termination::f_close: return "f_close";
    case Termination::max_iter: return "max_iter";
  }
  return "unknown";
}

int default_ell(Index n)
{
  return int(std::max<Index>(1, std::min<Index>(10, n / 4)));
}

namespace
{

Vec random_start(Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index i = 0; i < n; ++i)
    v(i) = nd(rng);
  return v;
}

// Ritz values of op from an m-step Arnoldi process.
Vec ritz_values(const std::function<Vec(const Vec &)> &op, Vec v, int m)
{
  const Index n = v.size();
  m = int(std::min<Index>(m, n));
  Mat Vb = Mat::Zero(n, m + 1);
  Mat H = Mat::Zero(m + 1, m);
  Vb.col(0) = v / v.norm();
  int used = m;
  for (int j = 0; j < m; ++j)
  {
    Vec w = op(Vb.col(j));
    const double wn = w.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i)
      {
        Scalar h = Vb.col(i).dot(w);
        w -= h * Vb.col(i);
        H(i, j) += h;
      }
    const double hn = w.norm();
    H(j + 1, j) = hn;
    if (hn <= 1e-12 * wn || j + 1 == m)
    {
      used = j + 1;
      break;
    }
    Vb.col(j + 1) = w / hn;
  }
  Eigen::ComplexEigenSolver<Mat> es(H.topLeftCorner(used, used), false);
  return es.eigenvalues();
}

}  // namespace

Vec spectrum_estimate(const DHSystem &system, Index dense_eig_limit, std::uint64_t seed,
                      int krylov_dim)
{
  if (system.n() <= dense_eig_limit)
  {
    Eigen::ComplexEigenSolver<Mat> es(system.dense_A(), false);
    if (es.info() != Eigen::Success)
      throw NumericalError("eigenvalues of (J-R)Q failed");
    return es.eigenvalues();
  }
  return ritz_values([&](const Vec &x) { return Vec(system.apply_A(x)); },
                     random_start(system.n(), seed), krylov_dim);
}

Scalar nearest_eigenvalue(const ShiftedSolver &solver, double y, std::uint64_t seed,
                          int krylov_dim)
{
  // D(iy)^{-1} = (iyI - A)^{-1} has eigenvalues 1/(iy - λ).
  Vec mu = ritz_values([&](const Vec &x) { return Vec(solver.solve(y, x)); },
                       random_start(solver.system().n(), seed), krylov_dim);
  Index best = 0;
  for (Index i = 1; i < mu.size(); ++i)
    if (std::abs(mu(i)) > std::abs(mu(best)))
      best = i;
  return Scalar(0.0, y) - 1.0 / mu(best);
}

namespace
{

struct Ranked
{
  std::vector<double> points;
  std::vector<double> sigma;
  bool all_zero = false;
};

Ranked rank_initial_points(const DHSystem &system, TransferKind kind,
                           const RestrictionPair &restriction, int rho, int ell,
                           const ShiftedSolver &solver, Index dense_eig_limit, std::uint64_t seed)
{
  if (rho < 1 || ell < 1)
    throw ValidationError("initial points: need rho >= 1 and ell >= 1");
  ell = std::min(ell, rho);
  const bool dense = system.n() <= dense_eig_limit;
  Vec lam = spectrum_estimate(system, dense_eig_limit, seed);
  if (dense)
  {
    for (Index i = 0; i < lam.size(); ++i)
      if (!(lam(i).real() < 0))
        throw ValidationError("system is not asymptotically stable");
  }
  double lo = INFINITY, hi = -INFINITY, scale = 0.0;
  for (Index i = 0; i < lam.size(); ++i)
  {
    lo = std::min(lo, lam(i).imag());
    hi = std::max(hi, lam(i).imag());
    scale = std::max(scale, std::abs(lam(i)));
  }

  FullTransfer tf(system, kind, restriction, solver);
  Ranked out;
  std::vector<double> cand;
  if (hi - lo <= 1e-10 * std::max(scale, 1e-300))
  {
    cand.push_back(0.0);
    if (ell == 2)
      cand.push_back(1.0);
    else if (ell > 2)
      for (double x : kernels::linspace(-1.0, 1.0, ell - 1))
        cand.push_back(x);
  }
  else
  {
    auto grid = kernels::linspace(lo, hi, rho);
    auto near = kernels::map<double>(Index(rho), [&](Index i) {
      const double y = grid[std::size_t(i)];
      if (dense)
      {
        Index b = 0;
        for (Index j = 1; j < lam.size(); ++j)
          if (std::abs(lam(j) - Scalar(0, y)) < std::abs(lam(b) - Scalar(0, y)))
            b = j;
        return lam(b).imag();
      }
      return nearest_eigenvalue(solver, y, seed + std::uint64_t(i)).imag();
    });
    cand = near;
  }
  // Drop exact duplicates, keeping first occurrences.
  std::vector<double> uniq;
  for (double x : cand)
    if (std::find(uniq.begin(), uniq.end(), x) == uniq.end())
      uniq.push_back(x);

  auto sig = kernels::map<std::pair<double, double>>(Index(uniq.size()), [&](Index i) {
    const double w = uniq[std::size_t(i)];
    Mat X = solver.solve(w, tf.B_tilde());
    Mat G = tf.C_tilde() * X;
    const double s = sigma_from(G, nullptr).sigma;
    return std::make_pair(s, tf.C_tilde().norm() * X.norm());
  });
  out.all_zero = true;
  for (const auto &[s, ref] : sig)
    if (s > 1e-12 * ref)
      out.all_zero = false;

  std::vector<std::size_t> idx(uniq.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return sig[a].first > sig[b].first; });
  for (std::size_t i = 0; i < idx.size() && int(i) < ell; ++i)
  {
    out.points.push_back(uniq[idx[i]]);
    out.sigma.push_back(sig[idx[i]].first);
  }
  return out;
}

enum class Side
{
  r,
  q
};

RadiusResult run_framework(const DHSystem &system, const RestrictionPair &restriction,
                           const FrameworkOptions &opts, const ShiftedSolver *solver, Side side)
{
  const Index n = system.n();
  check_restriction(restriction, n);
  if (!(opts.eps > 0) || opts.k_max < 1)
    throw ValidationError("framework options: need eps > 0 and k_max >= 1");
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  const TransferKind kind = side == Side::r ? TransferKind::rj : TransferKind::q;
  const bool real = system.is_real() && restriction.is_real();
  const int ell = opts.ell ? *opts.ell : default_ell(n);

  RadiusResult res;
  if (!opts.initial_points.empty())
    res.initial_points = opts.initial_points;
  else
  {
    Ranked r = rank_initial_points(system, kind, restriction, opts.rho, ell, *solver,
                                   opts.dense_eig_limit, opts.seed);
    if (r.all_zero)
      throw NumericalError("radius infinite (transfer function identically zero not excluded)");
    res.initial_points = r.points;
  }

  // R-side: [D^{-1}B, D^{-2}B];  Q-side: [(C D^{-1})^H, (C D^{-2})^H].
  auto block = [&](double w) {
    Mat blk;
    if (side == Side::r)
    {
      Mat X1 = solver->solve(w, restriction.B, 1);
      Mat X2 = solver->solve(w, X1, 1);
      blk.resize(n, X1.cols() + X2.cols());
      blk << X1, X2;
    }
    else
    {
      Mat Ch = restriction.C.adjoint();
      Mat X1 = solver->solve(w, Ch, 1, true);
      Mat X2 = solver->solve(w, X1, 1, true);
      blk.resize(n, X1.cols() + X2.cols());
      blk << X1, X2;
    }
    return real ? realify(blk) : blk;
  };

  auto blocks = kernels::map<Mat>(Index(res.initial_points.size()),
                                  [&](Index i) { return block(res.initial_points[std::size_t(i)]); });
  Mat basis(n, 0);
  for (const auto &b : blocks)
    basis = expand_orthonormal(basis, b).V;

  const auto t0 = std::chrono::steady_clock::now();
  double pf = 0.0, pw = 0.0;
  for (int it = 1;; ++it)
  {
    ReducedDH red;
    try
    {
      red = side == Side::r ? reduce_r_side(system, restriction, basis)
                            : reduce_q_side(system, restriction, basis);
    }
    catch (const Error &e)
    {
      throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(it));
    }
    HinfResult h;
    try
    {
      h = hinf_norm_bb(reduced_state_space(red, kind), opts.hinf_tol);
    }
    catch (const ValidationError &)
    {
      throw NumericalError("reduced system unstable at iteration " + std::to_string(it));
    }
    res.iterations = it;
    res.subspace_dim = basis.cols();
    res.history.emplace_back(h.omega, h.norm);
    res.dims.push_back(basis.cols());
    res.seconds.push_back(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (opts.keep_reductions)
      res.reductions.push_back(red);
    res.f = h.norm;
    res.omega = h.omega;

    if (it > 1)
    {
      const double w = h.omega, f = h.norm;
      if (std::abs(w - pw) < opts.eps * 0.5 * (std::abs(w) + std::abs(pw)))
      {
        res.termination = Termination::omega_close;
        break;
      }
      if (std::abs(f - pf) < opts.eps * 0.5 * (f + pf))
      {
        res.termination = Termination::f_close;
        break;
      }
    }
    if (it >= opts.k_max)
    {
      res.termination = Termination::max_iter;
      break;
    }
    Expansion e = expand_orthonormal(basis, block(h.omega));
    if (!e.expanded())
    {
      res.termination = Termination::omega_close;
      break;
    }
    basis = std::move(e.V);
    pf = h.norm;
    pw = h.omega;
  }
  if (!(res.f > 0))
    throw NumericalError("radius infinite (transfer function identically zero not excluded)");
  res.radius = 1.0 / res.f;
  return res;
}

}  // namespace

std::vector<double> select_initial_points(const DHSystem &system, TransferKind kind,
                                          const RestrictionPair &restriction, int rho, int ell,
                                          const ShiftedSolver *solver, Index dense_eig_limit,
                                          std::uint64_t seed)
{
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  return rank_initial_points(system, kind, restriction, rho, ell, *solver, dense_eig_limit, seed)
    .points;
}

RadiusResult radius_rj(const DHSystem &system, const RestrictionPair &restriction,
                       const FrameworkOptions &opts, const ShiftedSolver *solver)
{
  return run_framework(system, restriction, opts, solver, Side::r);
}

RadiusResult radius_q(const DHSystem &system, const RestrictionPair &restriction,
                      const FrameworkOptions &opts, const ShiftedSolver *solver)
{
  return run_framework(system, restriction, opts, solver, Side::q);
}

}  // namespace dhrad
