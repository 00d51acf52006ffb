#pragma once

#include "dhrad/dh_core.hpp"
#include "dhrad/shifted_solve.hpp"

namespace dhrad
{

/// Which transfer function characterizes the radius.
///   rj: G_R(iω) = C Q D(iω)^{-1} B        (perturbations of R or J)
///   q:  G_Q(iω) = C D(iω)^{-1} (J - R) B  (perturbations of Q)
enum class TransferKind
{
  rj,
  q
};

struct SigmaEval
{
  double sigma = 0.0;
  double dsigma = 0.0;  // d sigma_max / d omega
  Vec u, v;             // G v = sigma u
  bool smooth = true;   // false when sigma_max is (numerically) multiple
};

// Largest singular value of G with its derivative Re(u^H dG v).
SigmaEval sigma_from(const Mat &G, const Mat *dG);

/// Transfer function of a large system evaluated through shifted solves.
class FullTransfer
{
public:
  FullTransfer(const DHSystem &system, TransferKind kind, const RestrictionPair &restriction,
               const ShiftedSolver &solver);

  Mat eval(double omega) const;
  Mat derivative(double omega) const;
  SigmaEval sigma(double omega, bool with_derivative = true) const;

  const Mat &B_tilde() const { return Bt_; }
  const Mat &C_tilde() const { return Ct_; }

private:
  const ShiftedSolver &solver_;
  Mat Bt_, Ct_;
};

/// Dense state-space triple (A, B, C) with G(s) = C (sI - A)^{-1} B.
struct StateSpace
{
  Mat A, B, C;

  Index k() const { return A.rows(); }
  bool is_real() const
  {
    return A.imag().isZero(0.0) && B.imag().isZero(0.0) && C.imag().isZero(0.0);
  }
  Mat eval(double omega) const;
  SigmaEval sigma(double omega, bool with_derivative = true) const;
};

enum class RadiusKind
{
  r,  // r(R; B, C) = r(J; B, C)
  j,
  q
};

/// (A_k, B_k, C_k) of the reduced transfer function for the chosen kind:
///   rj: ((J_k-R_k)Q_k, B_k, C_k Q_k);   q: ((J_k-R_k)Q_k, (J_k-R_k)B_k, C_k).
StateSpace reduced_state_space(const ReducedDH &red, TransferKind kind);

/// Full-order dense triple; for tests and small systems.
StateSpace full_state_space(const DHSystem &system, TransferKind kind,
                            const RestrictionPair &restriction);

Mat eval_transfer(const DHSystem &system, TransferKind kind, const RestrictionPair &restriction,
                  double omega, const ShiftedSolver *solver = nullptr);

SigmaEval sigma_max_with_derivative(const DHSystem &system, TransferKind kind,
                                    const RestrictionPair &restriction, double omega,
                                    const ShiftedSolver *solver = nullptr);

}  // namespace dhrad
