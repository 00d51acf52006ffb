#include "dhrad/shifted_solve.hpp"

#include <cmath>
#include <limits>
#include <mutex>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace dhrad
{

namespace
{

constexpr double kResidualTol = 1e-10;

using SparseLU = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

SpMat sparse_identity(Index n)
{
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

bool all_finite(const Mat &x)
{
  return x.allFinite();
}

class DenseFactorization : public ShiftedSolver::Factorization
{
public:
  explicit DenseFactorization(const Mat &D) : lu_(D) {}
  Mat solve(const Mat &x) const override { return lu_.solve(x); }
  double rcond() const { return lu_.rcond(); }

private:
  Eigen::PartialPivLU<Mat> lu_;
};

class SparseFactorization : public ShiftedSolver::Factorization
{
public:
  explicit SparseFactorization(const SpMat &D)
  {
    lu_.analyzePattern(D);
    lu_.factorize(D);
    ok_ = lu_.info() == Eigen::Success;
  }
  Mat solve(const Mat &x) const override
  {
    return lu_.solve(x);
  }
  bool ok() const { return ok_; }

private:
  SparseLU lu_;
  bool ok_ = false;
};

// D(iω)^{-1} = Q^{-1}·P(iω)^{-1} with P(iω) = iωQ^{-1} - (J-R), where "Q^{-1}·" is a product
// with the stored matrix. The adjoint is P^{-H}(Q^{-1}·x).
class PencilFactorization : public ShiftedSolver::Factorization
{
public:
  PencilFactorization(const DHSystem &sys, std::unique_ptr<ShiftedSolver::Factorization> p,
                      bool adjoint)
    : sys_(sys), p_(std::move(p)), adjoint_(adjoint)
  {
  }
  Mat solve(const Mat &x) const override
  {
    if (adjoint_)
      return p_->solve(sys_.apply_Q_inverse(x));
    return sys_.apply_Q_inverse(p_->solve(x));
  }

private:
  const DHSystem &sys_;
  std::unique_ptr<ShiftedSolver::Factorization> p_;
  bool adjoint_;
};

class DenseSolver : public ShiftedSolver
{
public:
  explicit DenseSolver(const DHSystem &sys) : sys_(sys), A_(sys.dense_A()) {}
  const DHSystem &system() const override { return sys_; }

protected:
  std::unique_ptr<Factorization> factor(double omega, bool adjoint) const override
  {
    const Index n = A_.rows();
    Mat D = Scalar(0.0, omega) * Mat::Identity(n, n) - A_;
    if (adjoint)
      D.adjointInPlace();
    auto f = std::make_unique<DenseFactorization>(D);
    if (!(f->rcond() > std::numeric_limits<double>::epsilon()))
      throw ShiftOnSpectrum(omega);
    return f;
  }

private:
  const DHSystem &sys_;
  Mat A_;
};

class SparseSolver : public ShiftedSolver
{
public:
  explicit SparseSolver(const DHSystem &sys) : sys_(sys)
  {
    SpMat JmR = sys.J().to_sparse() - sys.R().to_sparse();
    A_ = JmR * sys.Q_data().to_sparse();
    A_.makeCompressed();
  }
  const DHSystem &system() const override { return sys_; }

protected:
  std::unique_ptr<Factorization> factor(double omega, bool adjoint) const override
  {
    SpMat D = sparse_identity(A_.rows()) * Scalar(0.0, omega) - A_;
    if (adjoint)
      D = SpMat(D.adjoint());
    D.makeCompressed();
    auto f = std::make_unique<SparseFactorization>(D);
    if (!f->ok())
      throw ShiftOnSpectrum(omega);
    return f;
  }

private:
  const DHSystem &sys_;
  SpMat A_;
};

// Implicit Q given through Q^{-1}: factor P(iω) = iωQ^{-1} - (J-R).
class PencilSolver : public ShiftedSolver
{
public:
  explicit PencilSolver(const DHSystem &sys) : sys_(sys)
  {
    sparse_ = sys.J().is_sparse() && sys.R().is_sparse() && sys.Q_data().is_sparse();
  }
  const DHSystem &system() const override { return sys_; }

protected:
  std::unique_ptr<Factorization> factor(double omega, bool adjoint) const override
  {
    std::unique_ptr<Factorization> p;
    if (sparse_)
    {
      SpMat P = sys_.Q_data().to_sparse() * Scalar(0.0, omega) -
                (sys_.J().to_sparse() - sys_.R().to_sparse());
      if (adjoint)
        P = SpMat(P.adjoint());
      P.makeCompressed();
      auto f = std::make_unique<SparseFactorization>(P);
      if (!f->ok())
        throw ShiftOnSpectrum(omega);
      p = std::move(f);
    }
    else
    {
      Mat P = Scalar(0.0, omega) * sys_.Q_data().to_dense() - (sys_.dense_J() - sys_.dense_R());
      if (adjoint)
        P.adjointInPlace();
      auto f = std::make_unique<DenseFactorization>(P);
      if (!(f->rcond() > std::numeric_limits<double>::epsilon()))
        throw ShiftOnSpectrum(omega);
      p = std::move(f);
    }
    return std::make_unique<PencilFactorization>(sys_, std::move(p), adjoint);
  }

private:
  const DHSystem &sys_;
  bool sparse_ = false;
};

}  // namespace

std::shared_ptr<const ShiftedSolver::Factorization> ShiftedSolver::lookup(double omega,
                                                                          bool adjoint) const
{
  const Key key{omega, adjoint};
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end())
      return it->second;
  }
  std::shared_ptr<const Factorization> f = factor(omega, adjoint);
  ++factorizations_;
  std::unique_lock lock(mu_);
  auto [it, inserted] = cache_.emplace(key, f);
  if (!inserted)
    return it->second;
  order_.push_back(key);
  while (capacity_ > 0 && cache_.size() > capacity_)
  {
    cache_.erase(order_.front());
    order_.pop_front();
  }
  return f;
}

Mat ShiftedSolver::solve_checked(double omega, const Mat &rhs, bool adjoint) const
{
  auto f = lookup(omega, adjoint);
  Mat x = f->solve(rhs);
  if (!all_finite(x))
    throw ShiftOnSpectrum(omega);

  const DHSystem &sys = system();
  // D = iωI - (J-R)Q,  D^H = -iωI - Q(J-R)^H
  Mat Ax = adjoint ? sys.apply_Q(sys.apply_JmR_adjoint(x)) : sys.apply_A(x);
  const Scalar shift = adjoint ? Scalar(0.0, -omega) : Scalar(0.0, omega);
  const double res = (shift * x - Ax - rhs).norm();
  const double scale = std::abs(omega) * x.norm() + Ax.norm() + rhs.norm();
  if (!(res <= kResidualTol * scale))
    throw ShiftOnSpectrum(omega);
  return x;
}

Mat ShiftedSolver::solve(double omega, const Mat &rhs, int power, bool adjoint) const
{
  if (power < 1 || power > 2)
    throw std::invalid_argument("solve power must be 1 or 2");
  Mat x = solve_checked(omega, rhs, adjoint);
  if (power == 2)
    x = solve_checked(omega, x, adjoint);
  return x;
}

std::size_t ShiftedSolver::cache_size() const
{
  std::shared_lock lock(mu_);
  return cache_.size();
}

void ShiftedSolver::clear_cache() const
{
  std::unique_lock lock(mu_);
  cache_.clear();
  order_.clear();
}

std::unique_ptr<ShiftedSolver> make_solver(const DHSystem &system)
{
  if (!system.explicit_q())
    return std::make_unique<PencilSolver>(system);
  if (system.storage() == Storage::sparse && system.Q_data().is_sparse() &&
      system.R().is_sparse())
    return std::make_unique<SparseSolver>(system);
  return std::make_unique<DenseSolver>(system);
}

// ---------------------------------------------------------------------------------------
// Brake form

void check_brake(const SecondOrderDH &b)
{
  const Index q = b.q();
  if (!(b.Omega > 0.0))
    throw ValidationError("rotation speed Omega must be positive");
  auto check = [&](const SpMat &m, const char *name) {
    if (m.rows() != q || m.cols() != q)
      throw ValidationError(std::string("brake block ") + name + " has wrong dimensions");
  };
  check(b.DM, "D_M");
  check(b.DR, "D_R");
  check(b.KE, "K_E");
  check(b.Kg, "K_g");
  check(b.DG, "D_G");
  if (b.N)
    check(*b.N, "N");
}

namespace
{

SpMat block2(const SpMat &a11, const SpMat &a12, const SpMat &a21, const SpMat &a22)
{
  const Index q = a11.rows();
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(a11.nonZeros() + a12.nonZeros() + a21.nonZeros() + a22.nonZeros());
  auto put = [&](const SpMat &m, Index r0, Index c0) {
    for (Index k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
  };
  put(a11, 0, 0);
  put(a12, 0, q);
  put(a21, q, 0);
  put(a22, q, q);
  SpMat out(2 * q, 2 * q);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

struct BrakeBlocks
{
  SpMat J, R, Qinv;
};

BrakeBlocks brake_blocks(const SecondOrderDH &b)
{
  check_brake(b);
  const Index q = b.q();
  SpMat Z(q, q);
  SpMat K = b.K(), D = b.D(), G = b.G();
  SpMat halfN = b.N ? SpMat(*b.N * Scalar(0.5)) : Z;
  SpMat halfNh = SpMat(halfN.adjoint());
  BrakeBlocks out;
  out.J = block2(SpMat(-G), SpMat(-(K + halfN)), SpMat(K + halfNh), Z);
  out.R = block2(D, halfN, halfNh, Z);
  out.Qinv = block2(b.M, Z, Z, K);
  return out;
}

void require_pd(const SpMat &K, const char *what)
{
  Eigen::SimplicialLDLT<SpMat> f(K);
  if (f.info() != Eigen::Success || !(f.vectorD().real().array() > 0.0).all())
    throw ValidationError(std::string(what) + " is not positive definite");
}

}  // namespace

DHSystem brake_system(const SecondOrderDH &brake)
{
  require_pd(brake.K(), "K(Omega)");
  require_pd(brake.M, "M");
  BrakeBlocks b = brake_blocks(brake);
  return DHSystem::with_q_inverse(Operator(std::move(b.J)), Operator(std::move(b.R)),
                                  Operator(std::move(b.Qinv)));
}

DHSystem assemble_brake_dh(const SecondOrderDH &brake, Index max_q)
{
  if (brake.q() > max_q)
    throw ValidationError("brake model too large for dense assembly");
  require_pd(brake.K(), "K(Omega)");
  BrakeBlocks b = brake_blocks(brake);
  Mat Qinv(b.Qinv);
  Eigen::LLT<Mat> llt(Qinv);
  if (llt.info() != Eigen::Success)
    throw ValidationError("blockdiag(M, K(Omega)) is not positive definite");
  Mat Q = llt.solve(Mat::Identity(Qinv.rows(), Qinv.cols()));
  Q = 0.5 * (Q + Q.adjoint());
  return DHSystem::dense(Mat(b.J), Mat(b.R), std::move(Q));
}

struct BrakeSolver::Impl
{
  SpMat M, K, D, G;
  Eigen::SimplicialLDLT<SpMat> K_fact;
  bool general = false;  // N != 0: fall back to pencil LU
};

namespace
{

class BrakeFactorization : public ShiftedSolver::Factorization
{
public:
  BrakeFactorization(const DHSystem &sys, const Eigen::SimplicialLDLT<SpMat> &K_fact,
                     double omega, bool adjoint, SpMat Mt, std::unique_ptr<SparseFactorization> S)
    : sys_(sys), K_fact_(K_fact), omega_(omega), adjoint_(adjoint), Mt_(std::move(Mt)),
      S_(std::move(S))
  {
  }

  // Solves the pencil (iωQ^{-1} - (J-R)) Z = w, or its adjoint.
  Mat pencil(const Mat &w) const
  {
    const Index q = Mt_.rows();
    const Scalar iw(0.0, omega_);
    Mat W1 = w.topRows(q), W2 = w.bottomRows(q);
    Mat Z(w.rows(), w.cols());
    if (!adjoint_)
    {
      // (-K - iω M̃) Z1 = W2 - iω W1,  K Z2 = W1 - M̃ Z1
      Mat Z1 = -S_->solve(W2 - iw * W1);
      Mat Z2 = K_fact_.solve(W1 - Mt_ * Z1);
      Z << Z1, Z2;
    }
    else
    {
      // Z2 = -(K + iω M̃)^{-H} (W1 - M̃^H K^{-1} W2),  Z1 = K^{-1} W2 + iω Z2
      Mat KinvW2 = K_fact_.solve(W2);
      Mat Z2 = -S_->solve(W1 - Mt_.adjoint() * KinvW2);
      Mat Z1 = KinvW2 + iw * Z2;
      Z << Z1, Z2;
    }
    return Z;
  }

  Mat solve(const Mat &x) const override
  {
    if (adjoint_)
      return pencil(sys_.apply_Q_inverse(x));
    return sys_.apply_Q_inverse(pencil(x));
  }

private:
  const DHSystem &sys_;
  const Eigen::SimplicialLDLT<SpMat> &K_fact_;
  double omega_;
  bool adjoint_;
  SpMat Mt_;
  std::unique_ptr<SparseFactorization> S_;
};

std::unique_ptr<SparseFactorization> general_pencil(const DHSystem &sys, double omega,
                                                    bool adjoint)
{
  SpMat P = sys.Q_data().to_sparse() * Scalar(0.0, omega) -
            (sys.J().to_sparse() - sys.R().to_sparse());
  if (adjoint)
    P = SpMat(P.adjoint());
  P.makeCompressed();
  auto f = std::make_unique<SparseFactorization>(P);
  if (!f->ok())
    throw ShiftOnSpectrum(omega);
  return f;
}

}  // namespace

BrakeSolver::BrakeSolver(SecondOrderDH brake, std::size_t capacity)
  : ShiftedSolver(capacity), brake_(std::move(brake))
{
  system_ = brake_system(brake_);
  auto impl = std::make_shared<Impl>();
  impl->M = brake_.M;
  impl->K = brake_.K();
  impl->D = brake_.D();
  impl->G = brake_.G();
  impl->K_fact.compute(impl->K);
  if (impl->K_fact.info() != Eigen::Success)
    throw NumericalError("K(Omega) factorization failed");
  impl->general = brake_.has_circulatory();
  impl_ = std::move(impl);
}

std::unique_ptr<ShiftedSolver::Factorization> BrakeSolver::factor(double omega,
                                                                  bool adjoint) const
{
  if (impl_->general)
    return std::make_unique<PencilFactorization>(system_, general_pencil(system_, omega, adjoint),
                                                 adjoint);
  const Scalar iw(0.0, omega);
  SpMat Mt = impl_->M * iw + impl_->D + impl_->G;
  SpMat S = impl_->K + Mt * iw;
  if (adjoint)
    S = SpMat(S.adjoint());
  S.makeCompressed();
  auto f = std::make_unique<SparseFactorization>(S);
  if (!f->ok())
    throw ShiftOnSpectrum(omega);
  return std::make_unique<BrakeFactorization>(system_, impl_->K_fact, omega, adjoint,
                                              std::move(Mt), std::move(f));
}

Mat BrakeSolver::solve_pencil(double omega, const Mat &rhs, bool adjoint) const
{
  if (rhs.rows() != 2 * brake_.q())
    throw ValidationError("right-hand side has wrong row count for brake pencil");
  if (impl_->general)
    return general_pencil(system_, omega, adjoint)->solve(rhs);
  auto f = factor(omega, adjoint);
  return static_cast<const BrakeFactorization &>(*f).pencil(rhs);
}

Mat solve_secondorder(const SecondOrderDH &brake, double omega, const Mat &rhs)
{
  BrakeSolver solver(brake, 0);
  return solver.solve_pencil(omega, rhs, false);
}

}  // namespace dhrad
