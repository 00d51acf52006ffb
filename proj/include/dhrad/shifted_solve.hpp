#pragma once

#include <atomic>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>

#include "dhrad/dh_core.hpp"

namespace dhrad
{

/// Second-order (brake-form) model
///   M x'' + (D(Ω) + G(Ω)) x' + K(Ω) x = 0
/// with K(Ω) = K_E + Ω² K_g, D(Ω) = D_M + D_R / Ω and G(Ω) = Ω D_G.
struct SecondOrderDH
{
  SpMat M, DM, DR, KE, Kg, DG;
  std::optional<SpMat> N;
  double Omega = 1.0;

  Index q() const { return M.rows(); }
  SpMat K() const { return KE + Kg * Scalar(Omega * Omega); }
  SpMat D() const { return DM + DR * Scalar(1.0 / Omega); }
  SpMat G() const { return DG * Scalar(Omega); }
  bool has_circulatory() const { return N && N->nonZeros() > 0; }
};

/// Solves with D(iω) = iωI - (J-R)Q, caching one factorization per (ω, adjoint).
///
/// Every power-1 solve is followed by a residual check; the backward error
///   ||D X - RHS|| / (|ω| ||X|| + ||(J-R) Q X|| + ||RHS||)
/// must not exceed 1e-10, otherwise ShiftOnSpectrum is thrown. Power-2 solves reuse the
/// factorization for two sequential power-1 solves.
///
/// Solves at distinct frequencies may run concurrently; the cache takes a shared lock for
/// lookups and an exclusive lock for insertion.
class ShiftedSolver
{
public:
  explicit ShiftedSolver(std::size_t capacity = 16) : capacity_(capacity) {}
  virtual ~ShiftedSolver() = default;
  ShiftedSolver(const ShiftedSolver &) = delete;
  ShiftedSolver &operator=(const ShiftedSolver &) = delete;

  virtual const DHSystem &system() const = 0;

  Mat solve(double omega, const Mat &rhs, int power = 1, bool adjoint = false) const;

  // W(iω)^{-1} rhs where W(iω) = (J-R)Q - iωI = -D(iω).
  Mat solve_w(double omega, const Mat &rhs, int power = 1) const
  {
    Mat x = solve(omega, rhs, power, false);
    return power % 2 ? Mat(-x) : x;
  }

  std::size_t cache_size() const;
  std::size_t factorizations() const { return factorizations_.load(); }
  void clear_cache() const;

  class Factorization
  {
  public:
    virtual ~Factorization() = default;
    // D(iω)^{-1} x, or D(iω)^{-H} x for an adjoint factorization.
    virtual Mat solve(const Mat &x) const = 0;
  };

protected:
  virtual std::unique_ptr<Factorization> factor(double omega, bool adjoint) const = 0;

private:
  std::shared_ptr<const Factorization> lookup(double omega, bool adjoint) const;
  Mat solve_checked(double omega, const Mat &rhs, bool adjoint) const;

  using Key = std::pair<double, bool>;
  std::size_t capacity_;
  mutable std::shared_mutex mu_;
  mutable std::map<Key, std::shared_ptr<const Factorization>> cache_;
  mutable std::deque<Key> order_;
  mutable std::atomic<std::size_t> factorizations_{0};
};

/// Picks dense LU, sparse LU, or the implicit-Q pencil path from the system's storage.
/// The returned solver keeps a reference to the system.
std::unique_ptr<ShiftedSolver> make_solver(const DHSystem &system);

/// Block-elimination solver for brake-form systems (implicit Q, N = 0). Owns the DH system
/// it builds from the second-order data.
class BrakeSolver : public ShiftedSolver
{
public:
  explicit BrakeSolver(SecondOrderDH brake, std::size_t capacity = 16);
  const DHSystem &system() const override { return system_; }
  const SecondOrderDH &brake() const { return brake_; }

  // Solves (iωQ^{-1} - (J-R)) Z = rhs using factorizations of K(Ω) and K(Ω) + iω M̃(iω).
  Mat solve_pencil(double omega, const Mat &rhs, bool adjoint = false) const;

protected:
  std::unique_ptr<Factorization> factor(double omega, bool adjoint) const override;

private:
  struct Impl;
  SecondOrderDH brake_;
  DHSystem system_;
  std::shared_ptr<const Impl> impl_;
};

/// The implicit-Q DH system of a brake model: Q^{-1} = blockdiag(M, K(Ω)).
DHSystem brake_system(const SecondOrderDH &brake);

/// Dense explicit-Q assembly, Q = blockdiag(M, K(Ω))^{-1}. Guarded by q <= max_q.
DHSystem assemble_brake_dh(const SecondOrderDH &brake, Index max_q = 2000);

/// One-shot pencil solve (iωQ^{-1} - (J-R)) Z = rhs by block elimination.
Mat solve_secondorder(const SecondOrderDH &brake, double omega, const Mat &rhs);

void check_brake(const SecondOrderDH &brake);

}  // namespace dhrad
