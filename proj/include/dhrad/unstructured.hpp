#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dhrad/hinf.hpp"

namespace dhrad
{

struct FrameworkOptions
{
  double eps = 1e-6;
  int k_max = 100;
  int rho = 20;
  std::optional<int> ell;  // min(10, n/4) when unset
  std::uint64_t seed = 0;
  double hinf_tol = 1e-10;
  // Overrides the eigenvalue-based initialization.
  std::vector<double> initial_points;
  // Dense eigensolves up to this size; Krylov estimates beyond it.
  Index dense_eig_limit = 1500;
  bool keep_reductions = false;
};

enum class Termination
{
  omega_close,
  f_close,
  max_iter
};

std::string to_string(Termination t);

struct RadiusResult
{
  double radius = 0.0;
  double f = 0.0;
  double omega = 0.0;
  int iterations = 0;
  Index subspace_dim = 0;
  std::vector<std::pair<double, double>> history;  // (ω_k, f_k)
  std::vector<Index> dims;                         // subspace dimension per iteration
  std::vector<double> seconds;                     // elapsed wall time at each iteration
  Termination termination = Termination::max_iter;
  std::vector<double> initial_points;
  std::vector<ReducedDH> reductions;  // one per iteration when keep_reductions is set
};

int default_ell(Index n);

/// Eigenvalues of (J-R)Q nearest to ρ equally spaced points of the imaginary spectral range,
/// ranked by σ_max(G(i Im z)); returns the top ℓ imaginary parts (exact duplicates removed).
std::vector<double> select_initial_points(const DHSystem &system, TransferKind kind,
                                          const RestrictionPair &restriction, int rho, int ell,
                                          const ShiftedSolver *solver = nullptr,
                                          Index dense_eig_limit = 1500, std::uint64_t seed = 0);

/// r(R; B, C) = r(J; B, C) by the R-side structure-preserving subspace iteration.
RadiusResult radius_rj(const DHSystem &system, const RestrictionPair &restriction,
                       const FrameworkOptions &opts = {}, const ShiftedSolver *solver = nullptr);

/// r(Q; B, C) by the Q-side iteration built from adjoint solves.
RadiusResult radius_q(const DHSystem &system, const RestrictionPair &restriction,
                      const FrameworkOptions &opts = {}, const ShiftedSolver *solver = nullptr);

/// Eigenvalues of A = (J-R)Q: all of them for small systems, Ritz estimates otherwise.
Vec spectrum_estimate(const DHSystem &system, Index dense_eig_limit, std::uint64_t seed,
                      int krylov_dim = 60);

/// Eigenvalue of A nearest to iy by shift-invert Arnoldi on D(iy)^{-1}.
Scalar nearest_eigenvalue(const ShiftedSolver &solver, double y, std::uint64_t seed,
                          int krylov_dim = 20);

}  // namespace dhrad
