#include "dhrad/hinf.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "dhrad/kernels.hpp"

namespace dhrad
{

std::vector<double> level_crossings(const StateSpace &sys, double gamma)
{
  const Index k = sys.k();
  Mat H(2 * k, 2 * k);
  H.topLeftCorner(k, k) = sys.A;
  H.topRightCorner(k, k) = sys.B * sys.B.adjoint() / gamma;
  H.bottomLeftCorner(k, k) = -sys.C.adjoint() * sys.C / gamma;
  H.bottomRightCorner(k, k) = -sys.A.adjoint();
  Eigen::ComplexEigenSolver<Mat> es(H, false);
  if (es.info() != Eigen::Success)
    throw NumericalError("level-set eigenproblem failed");
  const double thresh = 1e-8 * sys.A.norm();
  std::vector<double> out;
  for (Index i = 0; i < 2 * k; ++i)
  {
    Scalar l = es.eigenvalues()(i);
    if (std::abs(l.real()) <= thresh)
      out.push_back(l.imag());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace
{

// Golden-section maximization of σ on [a, b].
std::pair<double, double> golden_max(const StateSpace &sys, double a, double b)
{
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = sys.sigma(x1, false).sigma, f2 = sys.sigma(x2, false).sigma;
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it)
  {
    if (f1 < f2)
    {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = sys.sigma(x2, false).sigma;
    }
    else
    {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = sys.sigma(x1, false).sigma;
    }
  }
  return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

HinfResult hinf_norm_bb(const StateSpace &sys, double tol)
{
  if (!(tol > 0))
    throw ValidationError("hinf: tol must be positive");
  HinfResult res;
  const Index k = sys.k();
  if (k == 0)
    return res;
  if (sys.B.rows() != k || sys.C.cols() != k)
    throw ValidationError("hinf: dimension mismatch");

  Eigen::ComplexEigenSolver<Mat> es(sys.A, false);
  if (es.info() != Eigen::Success)
    throw NumericalError("hinf: eigenvalues of A failed");
  const Vec lam = es.eigenvalues();
  for (Index i = 0; i < k; ++i)
    if (!(lam(i).real() < 0))
      throw ValidationError("hinf: A is not asymptotically stable");

  const bool real = sys.is_real();
  auto keep = [&](double w) { return real ? std::abs(w) : w; };

  std::vector<double> cand{0.0};
  for (Index i = 0; i < k; ++i)
  {
    cand.push_back(keep(lam(i).imag()));
    cand.push_back(std::abs(lam(i)));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto vals = kernels::sigma_sweep(sys, cand);
  auto best = std::max_element(vals.begin(), vals.end()) - vals.begin();
  double glb = vals[best];
  double wbest = cand[best];
  if (glb == 0.0)
    return res;

  for (int it = 0; it < 100; ++it)
  {
    res.iterations = it + 1;
    const double gamma = (1.0 + 2.0 * tol) * glb;
    std::vector<double> w = level_crossings(sys, gamma);
    if (real)
    {
      std::vector<double> pos{0.0};
      for (double x : w)
        if (x > 0)
          pos.push_back(x);
      w = std::move(pos);
      if (w.size() == 1)
        w.clear();
    }
    if (w.empty())
      break;
    std::vector<double> mids;
    if (w.size() == 1)
      mids.push_back(w[0]);
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      mids.push_back(0.5 * (w[i] + w[i + 1]));
    auto mv = kernels::sigma_sweep(sys, mids);
    auto j = std::max_element(mv.begin(), mv.end()) - mv.begin();
    if (mv[j] <= glb)
      break;
    glb = mv[j];
    wbest = mids[j];
  }

  // Polish the maximizer inside the crossing interval just below the level.
  std::vector<double> w = level_crossings(sys, glb * (1.0 - 1e-6));
  double lo = -INFINITY, hi = INFINITY;
  for (double x : w)
  {
    if (x <= wbest)
      lo = x;
    else if (x > wbest && hi == INFINITY)
      hi = x;
  }
  if (std::isfinite(lo) && std::isfinite(hi))
  {
    auto [wg, fg] = golden_max(sys, lo, hi);
    if (fg > glb)
    {
      glb = fg;
      wbest = wg;
    }
  }
  res.norm = glb;
  res.omega = real ? std::abs(wbest) : wbest;
  return res;
}

}  // namespace dhrad
