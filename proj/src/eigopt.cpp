#include "dhrad/eigopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dhrad/types.hpp"

namespace dhrad
{

double envelope_value(const std::vector<QuadraticModel> &models, double x)
{
  double v = -std::numeric_limits<double>::infinity();
  for (const auto &q : models)
    v = std::max(v, q(x));
  return v;
}

std::pair<double, double> envelope_min(const std::vector<QuadraticModel> &models, double a,
                                       double b)
{
  std::vector<double> cand{a, b};
  const std::size_t k = models.size();
  for (std::size_t i = 0; i < k; ++i)
  {
    const auto &qi = models[i];
    if (qi.gamma > 0)
    {
      const double v = qi.c - qi.df / qi.gamma;
      if (v > a && v < b)
        cand.push_back(v);
    }
    for (std::size_t j = i + 1; j < k; ++j)
    {
      const auto &qj = models[j];
      // Difference q_i - q_j expanded around the midpoint of the centers: A y^2 + B y + C.
      const double m = 0.5 * (qi.c + qj.c);
      auto coeffs = [m](const QuadraticModel &q) {
        const double e = m - q.c;
        return std::array<double, 3>{0.5 * q.gamma, q.df + q.gamma * e,
                                     q.f + q.df * e + 0.5 * q.gamma * e * e};
      };
      const auto ci = coeffs(qi), cj = coeffs(qj);
      const double A = ci[0] - cj[0], B = ci[1] - cj[1], C = ci[2] - cj[2];
      auto push = [&](double y) {
        const double x = m + y;
        if (x > a && x < b)
          cand.push_back(x);
      };
      if (A == 0.0)
      {
        if (B != 0.0)
          push(-C / B);
        continue;
      }
      const double disc = B * B - 4.0 * A * C;
      if (disc < 0)
        continue;
      const double r = -0.5 * (B + std::copysign(std::sqrt(disc), B));
      if (r != 0.0)
      {
        push(r / A);
        push(C / r);
      }
      else
        push(0.0);
    }
  }
  double bx = a, bv = std::numeric_limits<double>::infinity();
  for (double x : cand)
  {
    const double v = envelope_value(models, x);
    if (v < bv)
    {
      bv = v;
      bx = x;
    }
  }
  return {bx, bv};
}

OptimizerOutcome minimize_pq(const Oracle &oracle, double a, double b, double gamma, double tol,
                             int max_iter, const PQOptions &opts)
{
  if (!(a <= b))
    throw ValidationError("minimize_pq: empty interval");
  if (!(tol > 0))
    throw ValidationError("minimize_pq: tol must be positive");

  OptimizerOutcome out;
  struct Point
  {
    double x;
    OracleValue raw, v;  // oracle output and the value used by the models
    bool penalized;
  };
  std::vector<Point> pts;
  double best_finite = std::numeric_limits<double>::infinity();

  auto cap = [&]() {
    if (opts.penalty)
      return *opts.penalty;
    if (!std::isfinite(best_finite))
      return 1.0;
    return best_finite > 0 ? opts.penalty_factor * best_finite
                           : best_finite + opts.penalty_factor * std::max(1.0, -best_finite);
  };

  double gamma_eff = gamma;
  auto rebuild = [&]() {
    out.models.clear();
    // Once a non-finite value is seen the models describe min(f, cap).
    const double c = cap();
    const bool capped = std::any_of(pts.begin(), pts.end(), [](const Point &p) { return p.penalized; });
    for (auto &p : pts)
      p.v = p.penalized || (capped && p.raw.f > c) ? OracleValue{c, 0.0} : p.raw;
    if (opts.adapt_curvature)
    {
      // Smallest curvature for which every model stays below every sample.
      for (const auto &p : pts)
        for (const auto &o : pts)
        {
          if (o.x == p.x)
            continue;
          const double d = o.x - p.x;
          const double need = 2.0 * (o.v.f - p.v.f - p.v.df * d) / (d * d);
          if (need < gamma_eff)
            gamma_eff = opts.curvature_safety * need;
        }
    }
    for (const auto &p : pts)
      out.models.push_back({p.x, p.v.f, p.v.df, gamma_eff});
  };

  auto evaluate = [&](double x) {
    OracleValue v = oracle(x);
    bool pen = !std::isfinite(v.f) || !std::isfinite(v.df);
    if (!pen)
      best_finite = std::min(best_finite, v.f);
    pts.push_back({x, v, v, pen});
    out.history.emplace_back(x, pen ? std::numeric_limits<double>::infinity() : v.f);
  };

  std::vector<double> init = opts.initial;
  if (init.empty())
    init.push_back(0.5 * (a + b));
  for (double x : init)
    evaluate(std::clamp(x, a, b));

  auto best_point = [&]() {
    const Point *bp = &pts.front();
    for (const auto &p : pts)
      if (p.v.f < bp->v.f)
        bp = &p;
    return *bp;
  };

  const double dup = 1e-15 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  for (;;)
  {
    rebuild();
    auto [xn, lower] = envelope_min(out.models, a, b);
    Point bp = best_point();
    out.x = bp.x;
    out.f = bp.v.f;
    out.lower_bound = lower;
    out.gap = bp.v.f - lower;
    if (out.gap <= tol * std::max(opts.scale_floor, std::abs(bp.v.f)))
    {
      out.converged = true;
      break;
    }
    if (out.iterations >= max_iter)
      break;
    bool seen = std::any_of(pts.begin(), pts.end(),
                            [&](const Point &p) { return std::abs(p.x - xn) <= dup; });
    if (seen)
      break;
    ++out.iterations;
    evaluate(xn);
  }
  if (!std::isfinite(best_finite))
    out.f = std::numeric_limits<double>::infinity();
  out.gamma = gamma_eff;
  return out;
}

OptimizerOutcome maximize_pq(const Oracle &oracle, double a, double b, double gamma, double tol,
                             int max_iter, const PQOptions &opts)
{
  Oracle neg = [&](double x) {
    OracleValue v = oracle(x);
    return OracleValue{-v.f, -v.df};
  };
  PQOptions o = opts;
  if (o.penalty)
    o.penalty = -*o.penalty;
  OptimizerOutcome out = minimize_pq(neg, a, b, -gamma, tol, max_iter, o);
  out.f = -out.f;
  out.lower_bound = -out.lower_bound;
  for (auto &h : out.history)
    h.second = -h.second;
  for (auto &q : out.models)
  {
    q.f = -q.f;
    q.df = -q.df;
    q.gamma = -q.gamma;
  }
  return out;
}

}  // namespace dhrad
