#include "dhrad/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace dhrad
{

namespace
{

constexpr Index kDenseLimit = 3000;

double distance_to_spectrum(const Mat &A, double omega)
{
  Eigen::ComplexEigenSolver<Mat> es(A, false);
  if (es.info() != Eigen::Success)
    throw NumericalError("verification eigensolve failed");
  return (es.eigenvalues().array() - Scalar(0, omega)).abs().minCoeff();
}

}  // namespace

VerifyResult verify_unstructured(const DHSystem &system, RadiusKind kind,
                                 const RestrictionPair &restriction, double radius,
                                 double omega)
{
  if (system.n() > kDenseLimit)
    throw ValidationError("verification needs a dense eigensolve; n too large");
  check_restriction(restriction, system.n());
  const TransferKind tk = kind == RadiusKind::q ? TransferKind::q : TransferKind::rj;
  SigmaEval se = sigma_from(eval_transfer(system, tk, restriction, omega), nullptr);

  const Mat J = system.dense_J(), R = system.dense_R(), Q = system.dense_Q();
  const Scalar signs[] = {1.0, -1.0, Scalar(0, 1), Scalar(0, -1)};
  VerifyResult out;
  out.residual = INFINITY;
  for (Scalar s : signs)
  {
    Mat Delta = s * radius * se.v * se.u.adjoint();
    Mat P = restriction.B * Delta * restriction.C;
    Mat A;
    switch (kind)
    {
      case RadiusKind::j: A = (J + P - R) * Q; break;
      case RadiusKind::r: A = (J - (R + P)) * Q; break;
      case RadiusKind::q: A = (J - R) * (Q + P); break;
    }
    const double d = distance_to_spectrum(A, omega);
    if (d < out.residual)
    {
      out.residual = d;
      out.sign = s;
    }
  }
  out.ok = out.residual <= 1e-4 * (1.0 + std::abs(omega));
  if (!out.ok)
    out.warning = "verification failed";
  return out;
}

SpectraSummary sample_structured_spectra(const DHSystem &system, const Mat &B, double r,
                                         Index count, std::uint64_t seed, kernels::Exec exec)
{
  if (!(r >= 0))
    throw ValidationError("sample radius must be nonnegative");
  if (system.n() > kDenseLimit)
    throw ValidationError("spectra sampling needs dense eigensolves; n too large");
  const Mat J = system.dense_J(), R = system.dense_R(), Q = system.dense_Q();
  const Index m = B.cols();

  struct Sample
  {
    double min_abs_real, max_real;
  };
  auto one = [&](Index i) {
    std::mt19937_64 rng(seed * 0x100000001b3ULL + std::uint64_t(i));
    std::normal_distribution<double> nd;
    Mat X(m, m);
    for (Index c = 0; c < m; ++c)
      for (Index k = 0; k < m; ++k)
        X(k, c) = Scalar(nd(rng), nd(rng));
    Mat Delta = 0.5 * (X + X.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> hs(Delta, Eigen::EigenvaluesOnly);
    const double nrm = hs.eigenvalues().cwiseAbs().maxCoeff();
    Delta *= nrm > 0 ? r / nrm : 0.0;
    Mat A = (J - (R + B * Delta * B.adjoint())) * Q;
    Eigen::ComplexEigenSolver<Mat> es(A, false);
    auto re = es.eigenvalues().real().array();
    return Sample{re.abs().minCoeff(), re.maxCoeff()};
  };
  auto samples = kernels::map<Sample>(count, one, exec);

  SpectraSummary out;
  out.count = count;
  out.min_abs_real = INFINITY;
  out.max_real = -INFINITY;
  for (const auto &s : samples)
  {
    out.min_abs_real = std::min(out.min_abs_real, s.min_abs_real);
    out.max_real = std::max(out.max_real, s.max_real);
    if (s.max_real >= 0)
      ++out.crossings;
  }
  return out;
}

}  // namespace dhrad
