#include "dhrad/dh_core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace dhrad
{

struct DHSystem::QInverse
{
  std::optional<Eigen::LDLT<Mat>> dense;
  std::optional<Eigen::SimplicialLDLT<SpMat>> sparse;

  Mat solve(const Mat &x) const
  {
    if (sparse)
      return sparse->solve(x);
    return dense->solve(x);
  }
};

DHSystem DHSystem::dense(Mat J, Mat R, Mat Q)
{
  return from_operators(Operator(std::move(J)), Operator(std::move(R)), Operator(std::move(Q)));
}

DHSystem DHSystem::sparse(SpMat J, SpMat R, SpMat Q)
{
  return from_operators(Operator(std::move(J)), Operator(std::move(R)), Operator(std::move(Q)));
}

DHSystem DHSystem::from_operators(Operator J, Operator R, Operator Q)
{
  DHSystem s;
  s.J_ = std::move(J);
  s.R_ = std::move(R);
  s.Q_ = std::move(Q);
  s.init();
  return s;
}

DHSystem DHSystem::with_q_inverse(Operator J, Operator R, Operator Q_inverse)
{
  DHSystem s;
  s.J_ = std::move(J);
  s.R_ = std::move(R);
  s.Q_ = std::move(Q_inverse);
  auto qi = std::make_shared<QInverse>();
  if (auto *sp = s.Q_.sparse())
  {
    qi->sparse.emplace(*sp);
    if (qi->sparse->info() != Eigen::Success)
      throw ValidationError("Q^{-1} factorization failed");
  }
  else
  {
    qi->dense.emplace(*s.Q_.dense());
  }
  s.q_inverse_ = std::move(qi);
  s.init();
  return s;
}

void DHSystem::init()
{
  const Index n = J_.rows();
  if (J_.cols() != n || R_.rows() != n || R_.cols() != n || Q_.rows() != n || Q_.cols() != n)
    throw ValidationError("dimension mismatch: J, R, Q must be square of equal size");
  real_ = J_.is_real() && R_.is_real() && Q_.is_real();
}

Mat DHSystem::apply_Q(const Mat &x) const
{
  if (q_inverse_)
    return q_inverse_->solve(x);
  return Q_ * x;
}

Mat DHSystem::apply_Q_inverse(const Mat &x) const
{
  if (!q_inverse_)
    throw std::logic_error("apply_Q_inverse requires a system with implicit Q");
  return Q_ * x;
}

Mat DHSystem::dense_Q() const
{
  if (q_inverse_)
    return q_inverse_->solve(Mat::Identity(n(), n()));
  return Q_.to_dense();
}

void check_restriction(const RestrictionPair &rp, Index n)
{
  if (rp.B.rows() != n || rp.C.cols() != n)
    throw ValidationError("restriction matrices do not match the system dimension");
  if (rp.m() == 0 || rp.p() == 0 || rp.m() > n || rp.p() > n)
    throw ValidationError("restriction matrices must have 1 <= m, p <= n");
  Eigen::ColPivHouseholderQR<Mat> qb(rp.B), qc(rp.C.adjoint());
  if (qb.rank() < rp.m())
    throw ValidationError("B does not have full column rank");
  if (qc.rank() < rp.p())
    throw ValidationError("C does not have full row rank");
}

namespace
{

double lambda_min_hermitian(const Mat &H)
{
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double hermitian_defect(const Operator &op, bool skew)
{
  if (auto *d = op.dense())
    return skew ? (*d + d->adjoint()).norm() : (*d - d->adjoint()).norm();
  const SpMat &s = *op.sparse();
  SpMat a = s.adjoint();
  return skew ? SpMat(s + a).norm() : SpMat(s - a).norm();
}

// Returns true when op + shift*I admits an LDL^H factorization with positive pivots.
bool sparse_positive_definite(const SpMat &s, double shift)
{
  SpMat I(s.rows(), s.cols());
  I.setIdentity();
  SpMat t = s + I * Scalar(shift);
  Eigen::SimplicialLDLT<SpMat> f(t);
  if (f.info() != Eigen::Success)
    return false;
  return (f.vectorD().real().array() > 0.0).all();
}

}  // namespace

ValidationReport validate_dh(const DHSystem &system, double tol, Index stability_limit)
{
  ValidationReport rep;
  const Index n = system.n();
  auto flag = [&](std::string what, double defect, double t) {
    rep.violations.push_back({std::move(what), defect, t});
  };

  const double nJ = system.J().norm();
  const double dJ = hermitian_defect(system.J(), true);
  if (dJ > tol * nJ)
    flag("J not skew-Hermitian", dJ, tol * nJ);

  const double nR = system.R().norm();
  const double dR = hermitian_defect(system.R(), false);
  if (dR > tol * nR)
    flag("R not Hermitian", dR, tol * nR);

  const bool small = n <= stability_limit;
  if (nR > 0.0)
  {
    if (small || !system.R().is_sparse())
    {
      Mat Rd = system.dense_R();
      double lmin = lambda_min_hermitian(0.5 * (Rd + Rd.adjoint()));
      if (lmin < -tol * nR)
        flag("R not positive semi-definite", -lmin, tol * nR);
    }
    else if (!sparse_positive_definite(*system.R().sparse(), tol * nR))
    {
      flag("R not positive semi-definite", tol * nR, tol * nR);
    }
  }

  // Q (or Q^{-1}) positive definite.
  const Operator &q = system.Q_data();
  const double nQ = q.norm();
  const double dQ = hermitian_defect(q, false);
  if (dQ > tol * nQ)
    flag(system.explicit_q() ? "Q not Hermitian" : "Q^{-1} not Hermitian", dQ, tol * nQ);
  if (small || !q.is_sparse())
  {
    Mat Qd = q.to_dense();
    double lmin = n > 0 ? lambda_min_hermitian(0.5 * (Qd + Qd.adjoint())) : 1.0;
    if (!(lmin > 0.0))
      flag("Q not positive definite", -lmin, 0.0);
  }
  else if (!sparse_positive_definite(*q.sparse(), 0.0))
  {
    flag("Q not positive definite", 0.0, 0.0);
  }

  if (small && rep.violations.empty() && n > 0)
  {
    Mat A = system.dense_A();
    Eigen::ComplexEigenSolver<Mat> es(A, false);
    double alpha = es.eigenvalues().real().maxCoeff();
    rep.spectral_abscissa = alpha;
    rep.asymptotically_stable = alpha < -1e-12 * std::max(A.norm(), 1e-300);
    if (!*rep.asymptotically_stable)
      flag("not asymptotically stable", alpha, 0.0);
  }

  rep.ok = rep.violations.empty();
  return rep;
}

DHSystem symmetrize(const DHSystem &system, double tol)
{
  auto fix = [&](const Operator &op, bool skew, const char *name) -> Operator {
    double defect = hermitian_defect(op, skew);
    double scale = op.norm();
    if (defect > tol * scale)
      throw ValidationError(std::string(name) + " structure defect " + std::to_string(defect) +
                            " exceeds repair tolerance");
    const double sgn = skew ? -1.0 : 1.0;
    if (auto *d = op.dense())
      return Operator(Mat(0.5 * (*d + sgn * d->adjoint())));
    const SpMat &s = *op.sparse();
    SpMat a = s.adjoint();
    return Operator(SpMat(0.5 * (s + sgn * a)));
  };
  Operator J = fix(system.J(), true, "J");
  Operator R = fix(system.R(), false, "R");
  Operator Q = fix(system.Q_data(), false, system.explicit_q() ? "Q" : "Q^{-1}");
  if (system.explicit_q())
    return DHSystem::from_operators(std::move(J), std::move(R), std::move(Q));
  return DHSystem::with_q_inverse(std::move(J), std::move(R), std::move(Q));
}

double orthonormality_defect(const Mat &V)
{
  if (V.cols() == 0)
    return 0.0;
  return (V.adjoint() * V - Mat::Identity(V.cols(), V.cols())).norm();
}

namespace
{

void require_basis(const Mat &V)
{
  if (V.cols() == 0)
    throw ValidationError("empty basis");
  if (orthonormality_defect(V) > 1e-8)
    throw ValidationError("basis not orthonormal");
}

Mat oblique_from_qv(const Mat &V, const Mat &QV)
{
  Mat M = V.adjoint() * QV;
  M = 0.5 * (M + M.adjoint());
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericalError("oblique basis breakdown: V^H Q V not positive definite");
  return llt.solve(QV.adjoint()).adjoint();
}

}  // namespace

Mat build_oblique_basis(const Mat &V, const DHSystem &system)
{
  require_basis(V);
  return oblique_from_qv(V, system.apply_Q(V));
}

Mat build_oblique_basis(const Mat &V, const Mat &Q)
{
  require_basis(V);
  return oblique_from_qv(V, Q * V);
}

Mat build_oblique_basis_q_side(const Mat &W, const DHSystem &system)
{
  require_basis(W);
  Mat Y = system.apply_JmR_adjoint(W);
  Mat M = W.adjoint() * Y;
  Eigen::PartialPivLU<Mat> lu(M.transpose());
  if (!(lu.rcond() > 1e-14))
    throw NumericalError("oblique basis breakdown: W^H (J-R)^H W singular");
  return lu.solve(Y.transpose()).transpose();
}

ReducedDH reduce_dh(const DHSystem &system, const RestrictionPair &restriction, const Mat &V,
                    const Mat &W, ReductionMode mode)
{
  if (V.cols() == 0 || W.cols() == 0)
    throw ValidationError("empty basis");
  if (V.cols() != W.cols() || V.rows() != system.n() || W.rows() != system.n())
    throw ValidationError("basis dimensions do not match");
  ReducedDH red;
  red.mode = mode;
  red.V = V;
  red.W = W;
  red.J = W.adjoint() * system.apply_J(W);
  red.R = W.adjoint() * system.apply_R(W);
  red.Q = V.adjoint() * system.apply_Q(V);
  if (mode == ReductionMode::r_side)
  {
    red.B = W.adjoint() * restriction.B;
    if (restriction.C.size() > 0)
      red.C = restriction.C * W;
  }
  else
  {
    red.B = V.adjoint() * restriction.B;
    if (restriction.C.size() > 0)
      red.C = restriction.C * V;
  }
  return red;
}

ReducedDH reduce_r_side(const DHSystem &system, const RestrictionPair &restriction,
                        const Mat &V)
{
  return reduce_dh(system, restriction, V, build_oblique_basis(V, system),
                   ReductionMode::r_side);
}

ReducedDH reduce_q_side(const DHSystem &system, const RestrictionPair &restriction,
                        const Mat &W)
{
  return reduce_dh(system, restriction, build_oblique_basis_q_side(W, system), W,
                   ReductionMode::q_side);
}

Expansion expand_orthonormal(const Mat &V, const Mat &block, double defl_tol)
{
  const Index n = block.rows();
  const Index k = V.cols();
  if (k > 0 && V.rows() != n)
    throw ValidationError("basis and block row counts differ");
  Mat out(n, k + block.cols());
  if (k > 0)
    out.leftCols(k) = V;
  Index cur = k;
  for (Index j = 0; j < block.cols(); ++j)
  {
    Vec x = block.col(j);
    const double nrm0 = x.norm();
    if (!(nrm0 > 0.0) || cur == n)
      continue;
    double prev = nrm0;
    double nrm = nrm0;
    for (int pass = 0; pass < 4; ++pass)
    {
      auto Q = out.leftCols(cur);
      x -= Q * (Q.adjoint() * x);
      nrm = x.norm();
      if (pass >= 1 && nrm >= 0.7 * prev)
        break;
      prev = nrm;
    }
    if (nrm <= defl_tol * nrm0)
      continue;
    out.col(cur++) = x / nrm;
  }
  out.conservativeResize(n, cur);
  return {std::move(out), cur - k};
}

Mat realify(const Mat &X)
{
  Mat out(X.rows(), 2 * X.cols());
  out.leftCols(X.cols()) = X.real().cast<Scalar>();
  out.rightCols(X.cols()) = X.imag().cast<Scalar>();
  return out;
}

}  // namespace dhrad
