#include "dhrad/probgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

namespace dhrad
{

namespace
{

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double randn() { return normal_(gen_); }
  double rand() { return uniform_(gen_); }
  Index index(Index n) { return std::uniform_int_distribution<Index>(0, n - 1)(gen_); }
  RMat randn(Index r, Index c)
  {
    RMat X(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i)
        X(i, j) = randn();
    return X;
  }

private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Shift so the smallest eigenvalue becomes positive, as in the recipe.
void shift_pd(RMat &S, Rng &rng)
{
  Eigen::SelfAdjointEigenSolver<RMat> es(S, Eigen::EigenvaluesOnly);
  const double mineig = es.eigenvalues()(0);
  if (mineig < 1e-4)
    S.diagonal().array() += -mineig + 5.0 * rng.rand();
}

Index rank_draw(Index cap, Rng &rng)
{
  if (cap <= 0)
    return 0;
  return 1 + std::min<Index>(cap - 1, Index(std::floor(rng.rand() * double(cap))));
}

Eigen::SparseMatrix<double> banded_randn(Index n, Index bw, Rng &rng)
{
  std::vector<Eigen::Triplet<double>> t;
  for (Index j = 0; j < n; ++j)
    for (Index i = std::max<Index>(0, j - bw); i <= std::min<Index>(n - 1, j + bw); ++i)
      t.emplace_back(int(i), int(j), rng.randn());
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SpMat to_complex(const Eigen::SparseMatrix<double> &A)
{
  SpMat out = A.cast<Scalar>();
  out.makeCompressed();
  return out;
}

// Smallest eigenvalue of a sparse symmetric matrix: inverse iteration on S - σI with σ
// below the Gershgorin bound, so the target is the eigenvalue nearest σ.
double smallest_eig(const Eigen::SparseMatrix<double> &S, Rng &rng)
{
  const Index n = S.rows();
  double lower = INFINITY;
  for (Index k = 0; k < S.outerSize(); ++k)
  {
    double diag = 0, off = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(S, k); it; ++it)
    {
      if (it.row() == k)
        diag += it.value();
      else
        off += std::abs(it.value());
    }
    lower = std::min(lower, diag - off);
  }
  const double sigma = lower - 1.0;
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  Eigen::SparseMatrix<double> Ss = S - sigma * I;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> f(Ss);
  RVec x(n);
  for (Index i = 0; i < n; ++i)
    x(i) = rng.randn();
  x.normalize();
  double rq = 0;
  for (int it = 0; it < 200; ++it)
  {
    RVec y = f.solve(x);
    y.normalize();
    const double next = y.dot(S * y);
    x = y;
    if (it > 0 && std::abs(next - rq) <= 1e-12 * std::max(1.0, std::abs(next)))
    {
      rq = next;
      break;
    }
    rq = next;
  }
  return rq;
}

bool is_pd(const Eigen::SparseMatrix<double> &S)
{
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> f(S);
  return f.info() == Eigen::Success && (f.vectorD().array() > 0).all();
}

RestrictionPair random_restriction(Index n, Index m, Index p, Rng &rng)
{
  RestrictionPair rp;
  rp.B = rng.randn(n, m).cast<Scalar>();
  rp.C = rng.randn(p, n).cast<Scalar>();
  return rp;
}

}  // namespace

Family parse_family(const std::string &s)
{
  if (s == "dense")
    return Family::dense;
  if (s == "sparse" || s == "sparse_banded")
    return Family::sparse_banded;
  if (s == "brake" || s == "brake_toy")
    return Family::brake_toy;
  throw ValidationError("unknown family: " + s);
}

std::string to_string(Family f)
{
  switch (f)
  {
    case Family::dense: return "dense";
    case Family::sparse_banded: return "sparse_banded";
    case Family::brake_toy: return "brake_toy";
  }
  return "unknown";
}

Index default_rank_cap(Index n) { return std::max<Index>(1, n / 10); }

Problem gen_dense(Index n, std::uint64_t seed, std::optional<Index> rank_cap, Index m, Index p)
{
  if (n < 2)
    throw ValidationError("gen_dense: n must be >= 2");
  const Index cap = std::min(n, rank_cap.value_or(default_rank_cap(n)));
  Rng rng(seed);
  RMat A = rng.randn(n, n);
  RMat J = 0.5 * (A - A.transpose());
  RMat Q = rng.randn(n, n);
  Q = 0.5 * (Q + Q.transpose()).eval();
  shift_pd(Q, rng);

  const Index pr = rank_draw(cap, rng);
  RMat Rb = RMat::Zero(n, n);
  if (pr > 0)
  {
    RMat Rp = rng.randn(pr, pr);
    Rp = 0.5 * (Rp + Rp.transpose()).eval();
    shift_pd(Rp, rng);
    Rb.topLeftCorner(pr, pr) = Rp;
  }
  RMat X = rng.randn(n, n);
  RMat U = Eigen::HouseholderQR<RMat>(X).householderQ();
  RMat R = U.transpose() * Rb * U;
  R = 0.5 * (R + R.transpose()).eval();

  RestrictionPair rp = random_restriction(n, m, p, rng);
  return {DHSystem::dense(J.cast<Scalar>(), R.cast<Scalar>(), Q.cast<Scalar>()), rp, {}};
}

Problem gen_sparse(Index n, std::uint64_t seed, Index bandwidth, std::optional<Index> rank_cap,
                   Index m, Index p)
{
  if (n < 2)
    throw ValidationError("gen_sparse: n must be >= 2");
  if (bandwidth < 1)
    throw ValidationError("gen_sparse: bandwidth must be >= 1");
  const Index cap = std::min(n, rank_cap.value_or(default_rank_cap(n)));
  Rng rng(seed);
  using RSp = Eigen::SparseMatrix<double>;

  RSp A = banded_randn(n, bandwidth, rng);
  RSp J = 0.5 * (A - RSp(A.transpose()));

  // sprandn(n, n, 1/n): about n random entries, then symmetrized and banded.
  std::vector<Eigen::Triplet<double>> tq;
  for (Index k = 0; k < n; ++k)
  {
    Index i = rng.index(n), j = rng.index(n);
    double v = rng.randn();
    if (std::abs(i - j) <= bandwidth)
      tq.emplace_back(int(i), int(j), v);
  }
  RSp Qa(n, n);
  Qa.setFromTriplets(tq.begin(), tq.end());
  RSp Q = 0.5 * (Qa + RSp(Qa.transpose()));
  RSp I(n, n);
  I.setIdentity();
  const double mineig = smallest_eig(Q, rng);
  if (mineig < 1e-4)
    Q = Q + (-mineig + 5.0 * rng.rand()) * I;
  for (int guard = 0; !is_pd(Q) && guard < 20; ++guard)
    Q = Q + 1e-3 * double(1 << guard) * I;

  const Index pr = rank_draw(cap, rng);
  std::vector<Eigen::Triplet<double>> td;
  if (pr > 0)
  {
    const double h = double(n) / double(pr);
    for (Index j = 1; j <= pr; ++j)
    {
      const Index k = std::clamp<Index>(Index(std::floor(double(j) * h)), 1, n) - 1;
      td.emplace_back(int(k), int(k), 5.0 * rng.rand());
    }
  }
  RSp D(n, n);
  D.setFromTriplets(td.begin(), td.end(), [](double, double b) { return b; });
  RSp X = banded_randn(n, std::max<Index>(1, bandwidth / 2), rng);
  RSp R = RSp(X.transpose()) * D * X;
  R = 0.5 * (R + RSp(R.transpose()));
  R.prune(0.0);

  RestrictionPair rp = random_restriction(n, m, p, rng);
  return {DHSystem::sparse(to_complex(J), to_complex(R), to_complex(Q)), rp, {}};
}

SecondOrderDH gen_brake_toy(Index q, std::uint64_t seed, double Omega)
{
  if (q < 1)
    throw ValidationError("gen_brake_toy: q must be >= 1");
  if (!(Omega > 0))
    throw ValidationError("gen_brake_toy: Omega must be positive");
  Rng rng(seed);
  auto gram = [&](double scale) {
    RMat Y = rng.randn(q, q);
    return RMat(scale * (Y * Y.transpose()) / double(q));
  };
  auto sparse = [](const RMat &X) { return SpMat(X.cast<Scalar>().sparseView()); };

  RMat M = gram(1.0) + RMat::Identity(q, q);
  RMat DM = gram(0.05) + 0.01 * RMat::Identity(q, q);
  RMat DR = gram(0.01);
  RMat KE = gram(4.0) + RMat::Identity(q, q);
  RMat G0 = rng.randn(q, q);
  RMat DG = 0.05 * (G0 - G0.transpose());
  RMat K0 = rng.randn(q, q);
  RMat Kg = 0.5 * (K0 + K0.transpose()) / std::sqrt(double(q));

  double s = 1.0 / std::max(1.0, Omega * Omega);
  for (int tries = 0;; ++tries)
  {
    RMat K = KE + Omega * Omega * s * Kg;
    Eigen::LLT<RMat> llt(K);
    if (llt.info() == Eigen::Success && K.ldlt().vectorD().minCoeff() > 1e-8)
      break;
    if (tries >= 40)
      throw NumericalError("gen_brake_toy: K(Omega) indefinite after retries");
    s *= 0.5;
  }

  SecondOrderDH b;
  b.M = sparse(M);
  b.DM = sparse(DM);
  b.DR = sparse(DR);
  b.KE = sparse(KE);
  b.Kg = sparse(RMat(s * Kg));
  b.DG = sparse(DG);
  b.Omega = Omega;
  return b;
}

RestrictionPair gen_brake_restriction(Index q, std::uint64_t seed, Index m)
{
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  RestrictionPair rp;
  rp.B = rng.randn(2 * q, m).cast<Scalar>();
  rp.C = rp.B.transpose();
  return rp;
}

Problem generate(const GenSpec &spec)
{
  switch (spec.family)
  {
    case Family::dense: return gen_dense(spec.n, spec.seed, spec.rank_cap, spec.m, spec.p);
    case Family::sparse_banded:
      return gen_sparse(spec.n, spec.seed, spec.bandwidth, spec.rank_cap, spec.m, spec.p);
    case Family::brake_toy:
    {
      SecondOrderDH b = gen_brake_toy(spec.n, spec.seed, spec.Omega);
      return {brake_system(b), gen_brake_restriction(spec.n, spec.seed, spec.m), b};
    }
  }
  throw ValidationError("unknown family");
}

}  // namespace dhrad
