#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dhrad
{

using Scalar = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<Scalar>;
using Index = Eigen::Index;

using namespace std::complex_literals;

// Error categories map onto CLI exit codes (2, 3, 4).
enum class ErrorKind
{
  validation,
  numerical,
  nonconvergence
};

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

struct ValidationError : Error
{
  explicit ValidationError(const std::string &what) : Error(ErrorKind::validation, what) {}
};

struct NumericalError : Error
{
  explicit NumericalError(const std::string &what) : Error(ErrorKind::numerical, what) {}
};

// Thrown when iω is (numerically) an eigenvalue of (J-R)Q.
struct ShiftOnSpectrum : NumericalError
{
  explicit ShiftOnSpectrum(double omega)
    : NumericalError("shift on spectrum (omega = " + std::to_string(omega) + ")"),
      omega(omega)
  {
  }
  double omega;
};

// A dense or sparse matrix behind one interface.
class Operator
{
public:
  Operator() : m_(Mat(0, 0)) {}
  Operator(Mat m) : m_(std::move(m)) {}
  Operator(SpMat m) : m_(std::move(m)) { std::get<SpMat>(m_).makeCompressed(); }

  bool is_sparse() const { return std::holds_alternative<SpMat>(m_); }
  Index rows() const
  {
    return std::visit([](const auto &m) { return m.rows(); }, m_);
  }
  Index cols() const
  {
    return std::visit([](const auto &m) { return m.cols(); }, m_);
  }

  Mat operator*(const Mat &x) const
  {
    return std::visit([&](const auto &m) -> Mat { return m * x; }, m_);
  }
  Mat adjoint_times(const Mat &x) const
  {
    return std::visit([&](const auto &m) -> Mat { return m.adjoint() * x; }, m_);
  }

  Mat to_dense() const
  {
    if (auto *d = std::get_if<Mat>(&m_))
      return *d;
    return Mat(std::get<SpMat>(m_));
  }
  SpMat to_sparse() const
  {
    if (auto *s = std::get_if<SpMat>(&m_))
      return *s;
    return std::get<Mat>(m_).sparseView();
  }

  const Mat *dense() const { return std::get_if<Mat>(&m_); }
  const SpMat *sparse() const { return std::get_if<SpMat>(&m_); }

  double norm() const
  {
    return std::visit([](const auto &m) { return m.norm(); }, m_);
  }
  bool is_real() const;

private:
  std::variant<Mat, SpMat> m_;
};

inline bool Operator::is_real() const
{
  if (auto *d = dense())
    return d->imag().isZero(0.0);
  const SpMat &s = *sparse();
  for (Index k = 0; k < s.nonZeros(); ++k)
    if (s.valuePtr()[k].imag() != 0.0)
      return false;
  return true;
}

}  // namespace dhrad
