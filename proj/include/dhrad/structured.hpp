#pragma once

#include <functional>
#include <optional>

#include "dhrad/eigopt.hpp"
#include "dhrad/unstructured.hpp"

namespace dhrad
{

/// Pieces of the structured backward error at iω for Hermitian perturbations R + BΔB^H.
/// With W(iω) = (J-R)Q - iωI and T = B^H Q W^{-1} B:
///   H̃0 = T^H T = L L^H,  H0 = L^{-1} L^{-H},  H̃1 = L^{-1} T^H L^{-H},  H1 = i(H̃1 - H̃1^H).
struct StructuredPieces
{
  Mat H0_tilde, L, H0, H1_tilde, H1;
};

struct EtaOptions
{
  double gamma_inner = 1e-6;
  double inner_tol = 1e-14;
  int inner_max_iter = 500;
  double t_cap = 1e8;           // half-width limit of the t-interval
  bool derivative = true;       // central difference in ω
  std::optional<double> penalty;  // value reported when not attained (+inf if unset)
};

struct EtaEvaluation
{
  double value = 0.0;
  double derivative = 0.0;
  double t_star = 0.0;
  bool attained = false;
  bool h1_indefinite = false;
  bool h1_zero = false;
};

/// ω ↦ η̃(ω) for full data (through a shifted solver) or for small reduced data.
class EtaFunction
{
public:
  static EtaFunction full(const DHSystem &system, const Mat &B, const ShiftedSolver &solver);
  static EtaFunction reduced(const ReducedDH &red);

  StructuredPieces pieces(double omega) const;
  // Value only (derivative left at 0).
  EtaEvaluation value(double omega, const EtaOptions &opts = {}) const;
  EtaEvaluation eval(double omega, const EtaOptions &opts = {}) const;

private:
  std::function<Mat(double)> s_;  // W(iω)^{-1} B
  Mat QB_;
};

StructuredPieces assemble_h0_h1(const DHSystem &system, const Mat &B, double omega,
                                const ShiftedSolver *solver = nullptr);

/// sup_t λ_min(H0 + t H1) for Hermitian H0 > 0 and H1.
EtaEvaluation eta_from_pieces(const Mat &H0, const Mat &H1, const EtaOptions &opts = {});

EtaEvaluation eta_structured(const DHSystem &system, const Mat &B, double omega,
                             const EtaOptions &opts = {}, const ShiftedSolver *solver = nullptr);

struct StructuredOptions
{
  FrameworkOptions framework;
  EtaOptions eta;
  std::optional<double> gamma_outer;  // default -1e4 * scale / width^2
  double outer_tol = 1e-8;
  int outer_max_iter = 400;
  double penalty_factor = 10.0;
  std::optional<std::pair<double, double>> interval;
  int scan_points = 256;  // uniform grid of the value-only scan
  int refine_count = 6;   // scan minima, and samples next to non-finite ones, refined further
  int zoom_points = 32;   // points per bracket rescan
  int zoom_levels = 3;    // bracket rescans before minimize_pq
};

/// Minimizes η̃ over [a, b]; radius = sqrt(min η̃).
RadiusResult radius_structured_small(const DHSystem &system, const Mat &B, double a, double b,
                                     const StructuredOptions &opts = {},
                                     const ShiftedSolver *solver = nullptr);

/// Imaginary spectral range of (J-R)Q; [0, max |Im λ|] for real data, and a unit interval
/// when the spectrum is real.
std::pair<double, double> default_eta_interval(const DHSystem &system, bool real,
                                               Index dense_eig_limit = 1500,
                                               std::uint64_t seed = 0);

/// Reduced data for V_k: W_k = QV_k(V_k^H Q V_k)^{-1}, J_k, R_k, Q_k, B_k = W_k^H B.
ReducedDH reduce_structured(const DHSystem &system, const Mat &B, const Mat &V);

/// Subspace iteration with blocks [W(iω)^{-1}B, W(iω)^{-2}B].
RadiusResult radius_structured_sf(const DHSystem &system, const Mat &B,
                                  const StructuredOptions &opts = {},
                                  const ShiftedSolver *solver = nullptr);

/// Minimization of a given η̃ function; shared by the small-scale and subspace paths.
/// A value-only scan over a uniform grid and the initial points locates candidate minima and
/// samples bordering non-finite values. The brackets of the lowest ones are rescanned on finer grids and then handed to minimize_pq,
/// whose curvature is lowered whenever the models overshoot a sample.
OptimizerOutcome minimize_eta(const EtaFunction &eta, double a, double b,
                              const std::vector<double> &initial, const StructuredOptions &opts);

}  // namespace dhrad
