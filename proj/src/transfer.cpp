#include "dhrad/transfer.hpp"

#include <Eigen/SVD>

namespace dhrad
{

SigmaEval sigma_from(const Mat &G, const Mat *dG)
{
  SigmaEval out;
  if (G.size() == 0)
    return out;
  Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &s = svd.singularValues();
  out.sigma = s(0);
  out.u = svd.matrixU().col(0);
  out.v = svd.matrixV().col(0);
  if (s.size() > 1 && s(0) - s(1) < 1e-12 * s(0))
    out.smooth = false;
  if (dG)
    out.dsigma = (out.u.adjoint() * (*dG) * out.v)(0).real();
  return out;
}

FullTransfer::FullTransfer(const DHSystem &system, TransferKind kind,
                           const RestrictionPair &restriction, const ShiftedSolver &solver)
  : solver_(solver)
{
  if (kind == TransferKind::rj)
  {
    Bt_ = restriction.B;
    // C Q = (Q C^H)^H since Q is Hermitian.
    Ct_ = system.apply_Q(restriction.C.adjoint()).adjoint();
  }
  else
  {
    Bt_ = system.apply_JmR(restriction.B);
    Ct_ = restriction.C;
  }
}

Mat FullTransfer::eval(double omega) const
{
  return Ct_ * solver_.solve(omega, Bt_, 1);
}

Mat FullTransfer::derivative(double omega) const
{
  // d/dω (iωI - A)^{-1} = -i (iωI - A)^{-2}
  return Scalar(0.0, -1.0) * (Ct_ * solver_.solve(omega, Bt_, 2));
}

SigmaEval FullTransfer::sigma(double omega, bool with_derivative) const
{
  Mat X1 = solver_.solve(omega, Bt_, 1);
  Mat G = Ct_ * X1;
  if (!with_derivative)
    return sigma_from(G, nullptr);
  Mat dG = Scalar(0.0, -1.0) * (Ct_ * solver_.solve(omega, X1, 1));
  return sigma_from(G, &dG);
}

Mat StateSpace::eval(double omega) const
{
  const Index n = A.rows();
  if (n == 0)
    return Mat::Zero(C.rows(), B.cols());
  Mat D = Scalar(0.0, omega) * Mat::Identity(n, n) - A;
  return C * D.partialPivLu().solve(B);
}

SigmaEval StateSpace::sigma(double omega, bool with_derivative) const
{
  const Index n = A.rows();
  if (n == 0)
    return sigma_from(Mat::Zero(C.rows(), B.cols()), nullptr);
  Mat D = Scalar(0.0, omega) * Mat::Identity(n, n) - A;
  Eigen::PartialPivLU<Mat> lu(D);
  Mat X1 = lu.solve(B);
  Mat G = C * X1;
  if (!with_derivative)
    return sigma_from(G, nullptr);
  Mat dG = Scalar(0.0, -1.0) * (C * lu.solve(X1));
  return sigma_from(G, &dG);
}

StateSpace reduced_state_space(const ReducedDH &red, TransferKind kind)
{
  StateSpace ss;
  Mat JmR = red.J - red.R;
  ss.A = JmR * red.Q;
  if (kind == TransferKind::rj)
  {
    ss.B = red.B;
    ss.C = red.C * red.Q;
  }
  else
  {
    ss.B = JmR * red.B;
    ss.C = red.C;
  }
  return ss;
}

StateSpace full_state_space(const DHSystem &system, TransferKind kind,
                            const RestrictionPair &restriction)
{
  StateSpace ss;
  Mat JmR = system.dense_J() - system.dense_R();
  Mat Q = system.dense_Q();
  ss.A = JmR * Q;
  if (kind == TransferKind::rj)
  {
    ss.B = restriction.B;
    ss.C = restriction.C * Q;
  }
  else
  {
    ss.B = JmR * restriction.B;
    ss.C = restriction.C;
  }
  return ss;
}

Mat eval_transfer(const DHSystem &system, TransferKind kind, const RestrictionPair &restriction,
                  double omega, const ShiftedSolver *solver)
{
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  return FullTransfer(system, kind, restriction, *solver).eval(omega);
}

SigmaEval sigma_max_with_derivative(const DHSystem &system, TransferKind kind,
                                    const RestrictionPair &restriction, double omega,
                                    const ShiftedSolver *solver)
{
  std::unique_ptr<ShiftedSolver> own;
  if (!solver)
  {
    own = make_solver(system);
    solver = own.get();
  }
  return FullTransfer(system, kind, restriction, *solver).sigma(omega, true);
}

}  // namespace dhrad
