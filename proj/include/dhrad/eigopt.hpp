#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace dhrad
{

struct OracleValue
{
  double f = 0.0;
  double df = 0.0;
};

// Value and derivative at x. A non-finite f marks a penalty point.
using Oracle = std::function<OracleValue(double)>;

/// q(x) = f + df (x - c) + (γ/2)(x - c)^2
struct QuadraticModel
{
  double c = 0.0, f = 0.0, df = 0.0, gamma = 0.0;
  double operator()(double x) const
  {
    const double d = x - c;
    return f + df * d + 0.5 * gamma * d * d;
  }
};

double envelope_value(const std::vector<QuadraticModel> &models, double x);

/// Global minimizer of max_j q_j over [a, b] by enumerating endpoints, vertices and
/// pairwise intersections.
std::pair<double, double> envelope_min(const std::vector<QuadraticModel> &models, double a,
                                       double b);

struct OptimizerOutcome
{
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, double>> history;
  bool converged = false;
  double lower_bound = 0.0;  // min of the final model
  double gap = 0.0;          // f - lower_bound
  double gamma = 0.0;        // curvature of the final models
  std::vector<QuadraticModel> models;
};

struct PQOptions
{
  // Starting points; the interval midpoint when empty.
  std::vector<double> initial;
  // Fixed replacement for non-finite values. When unset the cap is
  // penalty_factor x (best finite value), updated as the best improves.
  std::optional<double> penalty;
  double penalty_factor = 10.0;
  // Floor of the convergence scale; 0 makes the test purely relative.
  double scale_floor = 1.0;
  // Lower γ whenever a model overshoots a sample (penalty samples included), to
  // curvature_safety x the curvature that sample demands.
  bool adapt_curvature = false;
  double curvature_safety = 2.0;
};

/// Minimizes f on [a, b] given γ <= inf f''. Converged when
/// f_best - min Q_k <= tol * max(scale_floor, |f_best|).
OptimizerOutcome minimize_pq(const Oracle &oracle, double a, double b, double gamma, double tol,
                             int max_iter, const PQOptions &opts = {});

/// Maximizes f on [a, b] given γ >= sup f''; minimize_pq on -f with curvature -γ.
OptimizerOutcome maximize_pq(const Oracle &oracle, double a, double b, double gamma, double tol,
                             int max_iter, const PQOptions &opts = {});

}  // namespace dhrad
