#include "doctest.h"

#include <random>

#include "dhrad/dhrad.hpp"

using namespace dhrad;

namespace
{

Mat random_mat(Index r, Index c, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Mat X(r, c);
  for (Index i = 0; i < X.size(); ++i)
    X(i) = Scalar(nd(rng), nd(rng));
  return X;
}

DHSystem identity_system(Index n)
{
  return DHSystem::dense(Mat::Zero(n, n), Mat::Identity(n, n), Mat::Identity(n, n));
}

}  // namespace

TEST_CASE("identity closed forms")
{
  DHSystem s = identity_system(3);
  auto solver = make_solver(s);
  Mat rhs = random_mat(3, 2, 1);
  CHECK((solver->solve(0.0, rhs) - rhs).norm() <= 1e-15);
  CHECK((solver->solve(1.0, rhs) - rhs / Scalar(1, 1)).norm() <= 1e-15);
  CHECK((solver->solve_w(1.0, rhs) + rhs / Scalar(1, 1)).norm() <= 1e-15);
}

TEST_CASE("power 2 equals two power-1 solves on a sparse system")
{
  Problem p = gen_sparse(50, 3);
  auto solver = make_solver(p.system);
  Mat rhs = random_mat(50, 2, 2);
  Mat x2 = solver->solve(0.7, rhs, 2);
  Mat xx = solver->solve(0.7, solver->solve(0.7, rhs, 1), 1);
  CHECK((x2 - xx).norm() <= 1e-9 * xx.norm());
}

TEST_CASE("dense and sparse solvers match a dense LU and its adjoint")
{
  for (bool sparse : {false, true})
  {
    Problem p = sparse ? gen_sparse(40, 5) : gen_dense(40, 5);
    const Index n = p.system.n();
    Mat D = Scalar(0, 1.3) * Mat::Identity(n, n) - p.system.dense_A();
    auto solver = make_solver(p.system);
    Mat rhs = random_mat(n, 3, 6);
    Mat ref = D.partialPivLu().solve(rhs);
    CHECK((solver->solve(1.3, rhs) - ref).norm() <= 1e-10 * ref.norm());
    Mat refa = D.adjoint().partialPivLu().solve(rhs);
    CHECK((solver->solve(1.3, rhs, 1, true) - refa).norm() <= 1e-10 * refa.norm());
  }
}

TEST_CASE("factorizations are cached per frequency")
{
  Problem p = gen_dense(20, 1);
  auto solver = make_solver(p.system);
  Mat rhs = random_mat(20, 1, 3);
  Mat a = solver->solve(2.0, rhs);
  const std::size_t f = solver->factorizations();
  Mat b = solver->solve(2.0, rhs);
  CHECK(solver->factorizations() == f);
  CHECK((a - b).norm() <= 1e-12 * a.norm());
  solver->solve(3.0, rhs);
  CHECK(solver->factorizations() == f + 1);
  solver->clear_cache();
  CHECK(solver->cache_size() == 0);
}

TEST_CASE("a shift on the spectrum is reported")
{
  // (J - R)Q with J = [[0,1],[-1,0]], R = 0 has eigenvalues ±i.
  Mat J(2, 2);
  J << 0, 1, -1, 0;
  DHSystem s = DHSystem::dense(J, Mat::Zero(2, 2), Mat::Identity(2, 2));
  auto solver = make_solver(s);
  CHECK_THROWS_AS(solver->solve(1.0, Mat::Identity(2, 1)), ShiftOnSpectrum);
}

TEST_CASE("second-order solve closed forms")
{
  SecondOrderDH b;
  auto one = [](double v) {
    SpMat m(1, 1);
    m.insert(0, 0) = v;
    return m;
  };
  b.M = one(1);
  b.DM = one(0);
  b.DR = one(0);
  b.KE = one(1);
  b.Kg = one(0);
  b.DG = one(0);
  b.Omega = 1.0;
  Mat w(2, 1);
  w << Scalar(2, 1), Scalar(-3, 0.5);
  Mat z = solve_secondorder(b, 0.0, w);
  CHECK(std::abs(z(0) + w(1)) <= 1e-14);
  CHECK(std::abs(z(1) - w(0)) <= 1e-14);

  b.DM = one(1);
  b.KE = one(2);
  DHSystem d = assemble_brake_dh(b);
  Mat P = Scalar(0, 1) * d.dense_Q().inverse() - (d.dense_J() - d.dense_R());
  Mat ref = P.partialPivLu().solve(w);
  CHECK((solve_secondorder(b, 1.0, w) - ref).norm() <= 1e-13 * ref.norm());
}

TEST_CASE("second-order solve matches the dense assembly for q = 30")
{
  SecondOrderDH b = gen_brake_toy(30, 4, 2.0);
  DHSystem d = assemble_brake_dh(b);
  Mat P = Scalar(0, 0.8) * d.dense_Q().inverse() - (d.dense_J() - d.dense_R());
  Mat rhs = random_mat(60, 2, 9);
  Mat ref = P.partialPivLu().solve(rhs);
  CHECK((solve_secondorder(b, 0.8, rhs) - ref).norm() <= 1e-9 * ref.norm());
}

TEST_CASE("brake solver agrees with the explicit dense solver")
{
  SecondOrderDH b = gen_brake_toy(20, 6, 1.5);
  BrakeSolver bs(b);
  DHSystem d = assemble_brake_dh(b);
  auto ds = make_solver(d);
  Mat rhs = random_mat(40, 2, 10);
  for (bool adj : {false, true})
  {
    Mat ref = ds->solve(0.9, rhs, 2, adj);
    CHECK((bs.solve(0.9, rhs, 2, adj) - ref).norm() <= 1e-9 * ref.norm());
  }
}

TEST_CASE("assemble_brake_dh blocks")
{
  auto eye = [](Index q, double v) {
    SpMat m(q, q);
    for (Index i = 0; i < q; ++i)
      m.insert(i, i) = v;
    return m;
  };
  SecondOrderDH b;
  const Index q = 3;
  b.M = eye(q, 1);
  b.DM = eye(q, 1);
  b.DR = eye(q, 2);
  b.KE = eye(q, 1);
  b.Kg = eye(q, 1);
  b.DG = SpMat(q, q);
  b.Omega = 1.0;
  DHSystem d = assemble_brake_dh(b);
  // J = [[-G, -K], [K, 0]] with K(1) = 2I.
  Mat J = d.dense_J();
  CHECK((J.topRightCorner(q, q) + 2.0 * Mat::Identity(q, q)).norm() <= 1e-14);
  CHECK((J.bottomLeftCorner(q, q) - 2.0 * Mat::Identity(q, q)).norm() <= 1e-14);
  b.Omega = 2.0;
  b.Kg = SpMat(q, q);
  Mat R = assemble_brake_dh(b).dense_R();
  CHECK((R.topLeftCorner(q, q) - 2.0 * Mat::Identity(q, q)).norm() <= 1e-14);
  CHECK(validate_dh(assemble_brake_dh(gen_brake_toy(10, 3, 1.0))).ok);
}

TEST_CASE("brake input checks")
{
  SecondOrderDH b = gen_brake_toy(4, 1, 1.0);
  b.Omega = 0.0;
  CHECK_THROWS_AS(check_brake(b), ValidationError);
}
