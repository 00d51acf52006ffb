#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dhrad/types.hpp"

namespace dhrad
{

enum class Storage
{
  dense,
  sparse
};

/// A dissipative Hamiltonian system x' = (J - R) Q x.
///
/// J is skew-Hermitian, R Hermitian positive semi-definite and Q Hermitian positive
/// definite. Q is either stored explicitly or implicitly through Q^{-1}; the latter is
/// the natural form for second-order models where Q^{-1} = blockdiag(M, K) is sparse and
/// Q itself is dense.
class DHSystem
{
public:
  DHSystem() = default;

  static DHSystem dense(Mat J, Mat R, Mat Q);
  static DHSystem sparse(SpMat J, SpMat R, SpMat Q);
  static DHSystem with_q_inverse(Operator J, Operator R, Operator Q_inverse);
  static DHSystem from_operators(Operator J, Operator R, Operator Q);

  Index n() const { return J_.rows(); }
  Storage storage() const { return J_.is_sparse() ? Storage::sparse : Storage::dense; }
  bool explicit_q() const { return !q_inverse_; }
  bool is_real() const { return real_; }

  const Operator &J() const { return J_; }
  const Operator &R() const { return R_; }
  // Q when explicit, Q^{-1} otherwise.
  const Operator &Q_data() const { return Q_; }

  Mat apply_J(const Mat &x) const { return J_ * x; }
  Mat apply_R(const Mat &x) const { return R_ * x; }
  Mat apply_Q(const Mat &x) const;
  // Requires implicit Q.
  Mat apply_Q_inverse(const Mat &x) const;
  Mat apply_JmR(const Mat &x) const { return J_ * x - R_ * x; }
  Mat apply_JmR_adjoint(const Mat &x) const { return J_.adjoint_times(x) - R_.adjoint_times(x); }
  // (J - R) Q x
  Mat apply_A(const Mat &x) const { return apply_JmR(apply_Q(x)); }

  Mat dense_J() const { return J_.to_dense(); }
  Mat dense_R() const { return R_.to_dense(); }
  Mat dense_Q() const;
  Mat dense_A() const { return (dense_J() - dense_R()) * dense_Q(); }

private:
  struct QInverse;
  void init();

  Operator J_, R_, Q_;
  std::shared_ptr<const QInverse> q_inverse_;
  bool real_ = false;
};

/// Restriction matrices for perturbations of the form B Δ C.
struct RestrictionPair
{
  Mat B;  // n x m
  Mat C;  // p x n
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }
  bool is_real() const { return B.imag().isZero(0.0) && C.imag().isZero(0.0); }
};

// Checks full column rank of B and full row rank of C.
void check_restriction(const RestrictionPair &rp, Index n);

enum class ReductionMode
{
  r_side,  // V orthonormal, W = QV(V^H Q V)^{-1}
  q_side   // W orthonormal, V = (J-R)^H W (W^H (J-R)^H W)^{-1}
};

struct ReducedDH
{
  Mat J, R, Q, B, C;
  Mat V, W;
  ReductionMode mode = ReductionMode::r_side;
  Index k() const { return J.rows(); }
  Mat A() const { return (J - R) * Q; }
};

struct Violation
{
  std::string property;
  double defect;
  double tolerance;
};

struct ValidationReport
{
  bool ok = true;
  std::vector<Violation> violations;
  std::optional<bool> asymptotically_stable;
  std::optional<double> spectral_abscissa;
};

/// Structure checks. Stability is checked by a dense eigensolve when n <= stability_limit.
ValidationReport validate_dh(const DHSystem &system, double tol = 1e-10,
                             Index stability_limit = 2000);

/// Removes structure defects up to tol (relative) by symmetrization; larger defects throw.
DHSystem symmetrize(const DHSystem &system, double tol = 1e-10);

/// W = QV(V^H Q V)^{-1}, so that W^H V = I and W V^H is an oblique projector.
Mat build_oblique_basis(const Mat &V, const DHSystem &system);
Mat build_oblique_basis(const Mat &V, const Mat &Q);

// V = (J-R)^H W (W^H (J-R)^H W)^{-1}
Mat build_oblique_basis_q_side(const Mat &W, const DHSystem &system);

ReducedDH reduce_dh(const DHSystem &system, const RestrictionPair &restriction, const Mat &V,
                    const Mat &W, ReductionMode mode);
ReducedDH reduce_r_side(const DHSystem &system, const RestrictionPair &restriction,
                        const Mat &V);
ReducedDH reduce_q_side(const DHSystem &system, const RestrictionPair &restriction,
                        const Mat &W);

struct Expansion
{
  Mat V;
  Index added = 0;
  bool expanded() const { return added > 0; }
};

/// Appends the block to the orthonormal basis V using two passes of classical Gram-Schmidt
/// per column. Columns whose residual falls below defl_tol times their incoming norm are
/// dropped.
Expansion expand_orthonormal(const Mat &V, const Mat &block, double defl_tol = 1e-12);

// [Re(X), Im(X)] as complex storage; spans the same space as [X, conj(X)].
Mat realify(const Mat &X);

double orthonormality_defect(const Mat &V);

}  // namespace dhrad
