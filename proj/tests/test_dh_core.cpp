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

Mat random_pd(Index n, std::uint64_t seed)
{
  Mat X = random_mat(n, n, seed);
  return X * X.adjoint() + Mat::Identity(n, n);
}

Mat orthonormal(Index n, Index k, std::uint64_t seed)
{
  Eigen::HouseholderQR<Mat> qr(random_mat(n, k, seed));
  return qr.householderQ() * Mat::Identity(n, k);
}

}  // namespace

TEST_CASE("validate_dh accepts the identity case and reports stability")
{
  DHSystem s = DHSystem::dense(Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2));
  ValidationReport r = validate_dh(s);
  CHECK(r.ok);
  REQUIRE(r.asymptotically_stable.has_value());
  CHECK(*r.asymptotically_stable);
  CHECK(*r.spectral_abscissa == doctest::Approx(-1.0));
}

TEST_CASE("validate_dh flags a symmetric J")
{
  Mat J(2, 2);
  J << 0, 1, 1, 0;
  DHSystem s = DHSystem::dense(J, Mat::Identity(2, 2), Mat::Identity(2, 2));
  ValidationReport r = validate_dh(s);
  CHECK_FALSE(r.ok);
  bool found = false;
  for (const auto &v : r.violations)
    found = found || v.property == "J not skew-Hermitian";
  CHECK(found);
}

TEST_CASE("validate_dh flags indefinite R and Q")
{
  Mat R = Mat::Identity(2, 2);
  R(1, 1) = -1;
  CHECK_FALSE(validate_dh(DHSystem::dense(Mat::Zero(2, 2), R, Mat::Identity(2, 2))).ok);
  CHECK_FALSE(validate_dh(DHSystem::dense(Mat::Zero(2, 2), Mat::Identity(2, 2), R)).ok);
}

TEST_CASE("validate_dh on generated dense systems")
{
  for (std::uint64_t seed : {1, 2, 3})
    CHECK(validate_dh(gen_dense(40, seed).system).ok);
}

TEST_CASE("DHSystem rejects mismatched dimensions")
{
  CHECK_THROWS_AS(DHSystem::dense(Mat::Zero(2, 2), Mat::Identity(3, 3), Mat::Identity(2, 2)),
                  ValidationError);
}

TEST_CASE("implicit Q applies the inverse of Q^{-1}")
{
  Mat Qi = random_pd(6, 4);
  DHSystem s = DHSystem::with_q_inverse(Operator(Mat(Mat::Zero(6, 6))),
                                        Operator(Mat(Mat::Identity(6, 6))), Operator(Qi));
  CHECK_FALSE(s.explicit_q());
  Mat x = random_mat(6, 2, 5);
  CHECK((s.apply_Q(Qi * x) - x).norm() <= 1e-12 * x.norm());
  CHECK((s.dense_Q() * Qi - Mat::Identity(6, 6)).norm() <= 1e-12);
}

TEST_CASE("check_restriction rejects rank-deficient B")
{
  Mat B = Mat::Zero(4, 2);
  B(0, 0) = 1;
  CHECK_THROWS_AS(check_restriction({B, Mat::Identity(2, 4)}, 4), ValidationError);
  CHECK_NOTHROW(check_restriction({Mat::Identity(4, 2), Mat::Identity(2, 4)}, 4));
}

TEST_CASE("build_oblique_basis closed forms")
{
  Mat V = orthonormal(5, 2, 1);
  CHECK((build_oblique_basis(V, Mat(Mat::Identity(5, 5))) - V).norm() <= 1e-14);

  Mat e1 = Mat::Zero(2, 1);
  e1(0) = 1;
  Mat Q = Mat::Zero(2, 2);
  Q(0, 0) = 2;
  Q(1, 1) = 3;
  CHECK((build_oblique_basis(e1, Q) - e1).norm() <= 1e-15);
}

TEST_CASE("build_oblique_basis gives W^H V = I")
{
  Mat V = orthonormal(30, 6, 2);
  Mat W = build_oblique_basis(V, random_pd(30, 3));
  CHECK((W.adjoint() * V - Mat::Identity(6, 6)).norm() <= 1e-12);
}

TEST_CASE("build_oblique_basis rejects a non-orthonormal basis")
{
  Mat V = Mat::Ones(4, 2);
  CHECK_THROWS_AS(build_oblique_basis(V, Mat(Mat::Identity(4, 4))), ValidationError);
}

TEST_CASE("reduction with the full space reproduces the system")
{
  Problem p = gen_dense(12, 9);
  const Index n = 12;
  ReducedDH red = reduce_r_side(p.system, p.restriction, Mat::Identity(n, n));
  CHECK((red.J - p.system.dense_J()).norm() <= 1e-12 * p.system.dense_J().norm());
  CHECK((red.R - p.system.dense_R()).norm() <= 1e-12 * std::max(1.0, p.system.dense_R().norm()));
  CHECK((red.Q - p.system.dense_Q()).norm() <= 1e-12 * p.system.dense_Q().norm());
  CHECK((red.B - p.restriction.B).norm() <= 1e-12 * p.restriction.B.norm());
}

TEST_CASE("R-side and Q-side reductions preserve structure")
{
  Problem p = gen_dense(20, 4);
  Mat V = orthonormal(20, 4, 7);
  for (ReducedDH red : {reduce_r_side(p.system, p.restriction, V),
                        reduce_q_side(p.system, p.restriction, V)})
  {
    CHECK((red.J + red.J.adjoint()).norm() <= 1e-12 * red.J.norm());
    Eigen::SelfAdjointEigenSolver<Mat> er(0.5 * (red.R + red.R.adjoint()));
    CHECK(er.eigenvalues()(0) >= -1e-10 * std::max(1e-300, red.R.norm()));
    Eigen::SelfAdjointEigenSolver<Mat> eq(0.5 * (red.Q + red.Q.adjoint()));
    CHECK(eq.eigenvalues()(0) > 0);
    CHECK((red.W.adjoint() * red.V - Mat::Identity(4, 4)).norm() <= 1e-10);
  }
}

TEST_CASE("reduction with an empty basis is an error")
{
  Problem p = gen_dense(10, 1);
  CHECK_THROWS_AS(reduce_r_side(p.system, p.restriction, Mat(10, 0)), ValidationError);
}

TEST_CASE("expand_orthonormal")
{
  const Index n = 15;
  SUBCASE("plain orthonormalization from empty")
  {
    Expansion e = expand_orthonormal(Mat(n, 0), random_mat(n, 2, 1));
    CHECK(e.added == 2);
    CHECK(orthonormality_defect(e.V) <= 1e-12);
  }
  SUBCASE("dependent block adds nothing")
  {
    Mat V = orthonormal(n, 3, 2);
    Expansion e = expand_orthonormal(V, V * random_mat(3, 2, 3));
    CHECK_FALSE(e.expanded());
    CHECK(e.V.cols() == 3);
  }
  SUBCASE("repeated expansion stays orthonormal")
  {
    Mat V(n, 0);
    for (std::uint64_t s = 0; s < 6; ++s)
      V = expand_orthonormal(V, random_mat(n, 2, 10 + s)).V;
    CHECK(V.cols() == 12);
    CHECK(orthonormality_defect(V) <= 1e-12);
  }
}

TEST_CASE("realify spans the real and imaginary parts")
{
  Mat X = random_mat(6, 2, 8);
  Mat Y = realify(X);
  CHECK(Y.cols() == 4);
  CHECK(Y.imag().isZero(0.0));
  CHECK((Y.leftCols(2) + Scalar(0, 1) * Y.rightCols(2) - X).norm() <= 1e-15);
}

TEST_CASE("symmetrize removes small defects and refuses large ones")
{
  Problem p = gen_dense(8, 3);
  Mat J = p.system.dense_J();
  J(0, 1) += 1e-13;
  DHSystem s = symmetrize(DHSystem::dense(J, p.system.dense_R(), p.system.dense_Q()));
  Mat Js = s.dense_J();
  CHECK((Js + Js.adjoint()).norm() == doctest::Approx(0.0));
  J(0, 1) += 1.0;
  CHECK_THROWS_AS(symmetrize(DHSystem::dense(J, p.system.dense_R(), p.system.dense_Q())),
                  ValidationError);
}
