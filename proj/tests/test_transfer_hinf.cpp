#include "doctest.h"

#include "dhrad/dhrad.hpp"
#include "oracles.hpp"

using namespace dhrad;

namespace
{

DHSystem identity_system(Index n)
{
  return DHSystem::dense(Mat::Zero(n, n), Mat::Identity(n, n), Mat::Identity(n, n));
}

}  // namespace

TEST_CASE("transfer functions at omega = 0 for the identity case")
{
  DHSystem s = identity_system(2);
  RestrictionPair rp{Mat::Identity(2, 2), Mat::Identity(2, 2)};
  CHECK((eval_transfer(s, TransferKind::rj, rp, 0.0) - Mat::Identity(2, 2)).norm() <= 1e-15);
  CHECK((eval_transfer(s, TransferKind::q, rp, 0.0) + Mat::Identity(2, 2)).norm() <= 1e-15);
}

TEST_CASE("sigma_max derivative for the scalar case")
{
  // G(iω) = 1/(iω + 1): σ = 1/sqrt(1+ω²), σ' = -ω (1+ω²)^{-3/2}.
  DHSystem s = identity_system(1);
  RestrictionPair rp{Mat::Identity(1, 1), Mat::Identity(1, 1)};
  SigmaEval e = sigma_max_with_derivative(s, TransferKind::rj, rp, 1.0);
  CHECK(e.sigma == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(e.dsigma == doctest::Approx(-0.3535534).epsilon(1e-6));
}

TEST_CASE("full transfer agrees with explicit inversion")
{
  Problem p = gen_dense(25, 3);
  const Mat J = p.system.dense_J(), R = p.system.dense_R(), Q = p.system.dense_Q();
  const Mat A = (J - R) * Q;
  auto solver = make_solver(p.system);
  for (double w : {-2.0, 0.0, 0.4, 3.1})
  {
    Mat Gr = oracle::transfer(A, p.restriction.B, p.restriction.C * Q, w);
    Mat Gq = oracle::transfer(A, (J - R) * p.restriction.B, p.restriction.C, w);
    CHECK((eval_transfer(p.system, TransferKind::rj, p.restriction, w, solver.get()) - Gr).norm() <=
          1e-10 * Gr.norm());
    CHECK((eval_transfer(p.system, TransferKind::q, p.restriction, w, solver.get()) - Gq).norm() <=
          1e-10 * Gq.norm());
  }
}

TEST_CASE("sigma derivative matches central differences")
{
  Problem p = gen_dense(20, 8);
  for (TransferKind kind : {TransferKind::rj, TransferKind::q})
  {
    StateSpace ss = full_state_space(p.system, kind, p.restriction);
    for (double w : {0.3, 1.7})
    {
      SigmaEval e = ss.sigma(w);
      const double h = 1e-6;
      const double fd = (ss.sigma(w + h, false).sigma - ss.sigma(w - h, false).sigma) / (2 * h);
      CHECK(std::abs(e.dsigma - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("reduced state space of the full basis equals the full one")
{
  Problem p = gen_dense(15, 2);
  ReducedDH red = reduce_r_side(p.system, p.restriction, Mat::Identity(15, 15));
  for (TransferKind kind : {TransferKind::rj, TransferKind::q})
  {
    StateSpace a = reduced_state_space(red, kind), b = full_state_space(p.system, kind, p.restriction);
    CHECK((a.eval(0.8) - b.eval(0.8)).norm() <= 1e-10 * b.eval(0.8).norm());
  }
}

TEST_CASE("hinf closed forms")
{
  SUBCASE("first-order lag")
  {
    StateSpace ss{-Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1)};
    HinfResult r = hinf_norm_bb(ss);
    CHECK(r.norm == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(r.omega) <= 1e-6);
  }
  SUBCASE("lightly damped oscillator peaks near its resonance")
  {
    // A = [[0,1],[-1,-0.1]], B = e2, C = e1: |G(iω)| = 1/|1 - ω² + 0.1iω|.
    Mat A(2, 2), B = Mat::Zero(2, 1), C = Mat::Zero(1, 2);
    A << 0, 1, -1, -0.1;
    B(1) = 1;
    C(0) = 1;
    HinfResult r = hinf_norm_bb({A, B, C});
    const double w = std::sqrt(1 - 0.005);
    const double peak = 1.0 / std::abs(Scalar(1 - w * w, 0.1 * w));
    CHECK(r.norm == doctest::Approx(peak).epsilon(1e-10));
    CHECK(std::abs(std::abs(r.omega) - w) <= 1e-5);
  }
}

TEST_CASE("hinf matches a fine grid oracle")
{
  for (std::uint64_t seed : {1, 2, 3, 4})
  {
    Problem p = gen_dense(12, seed);
    StateSpace ss = full_state_space(p.system, TransferKind::rj, p.restriction);
    HinfResult r = hinf_norm_bb(ss);
    const double ref = oracle::hinf_grid(ss.A, ss.B, ss.C);
    CHECK(std::abs(r.norm - ref) <= 1e-8 * ref);
    CHECK(ss.sigma(r.omega, false).sigma == doctest::Approx(r.norm).epsilon(1e-10));
  }
}

TEST_CASE("level crossings lie on the level set")
{
  Problem p = gen_dense(10, 6);
  StateSpace ss = full_state_space(p.system, TransferKind::rj, p.restriction);
  const double g = 0.5 * hinf_norm_bb(ss).norm;
  std::vector<double> xs = level_crossings(ss, g);
  CHECK_FALSE(xs.empty());
  for (double x : xs)
    CHECK(ss.sigma(x, false).sigma >= g * (1 - 1e-6));
}

TEST_CASE("hinf rejects unstable input")
{
  StateSpace ss{Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1)};
  CHECK_THROWS_AS(hinf_norm_bb(ss), ValidationError);
}
