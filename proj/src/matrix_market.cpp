#include "dhrad/matrix_market.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace dhrad
{

namespace
{

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Reader
{
  std::ifstream in;
  std::string path;
  int line = 0;

  [[noreturn]] void fail(const std::string &msg) const
  {
    throw ValidationError(path + ":" + std::to_string(line) + ": " + msg);
  }

  // Next non-comment, non-blank line.
  bool next(std::string &s)
  {
    while (std::getline(in, s))
    {
      ++line;
      if (!s.empty() && s.back() == '\r')
        s.pop_back();
      auto p = s.find_first_not_of(" \t");
      if (p == std::string::npos || s[p] == '%')
        continue;
      return true;
    }
    return false;
  }
};

enum class Field
{
  real,
  complex,
  integer,
  pattern
};
enum class Sym
{
  general,
  symmetric,
  skew,
  hermitian
};

Scalar mirror(Scalar v, Sym sym)
{
  switch (sym)
  {
    case Sym::symmetric: return v;
    case Sym::skew: return -v;
    case Sym::hermitian: return std::conj(v);
    default: return v;
  }
}

}  // namespace

Operator read_matrix_market(const std::string &path)
{
  Reader r;
  r.path = path;
  r.in.open(path);
  if (!r.in)
    throw ValidationError("cannot open " + path);

  std::string s;
  if (!std::getline(r.in, s))
    r.fail("empty file");
  ++r.line;
  std::istringstream hs(s);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    r.fail("missing %%MatrixMarket matrix header");
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate" && format != "array")
    r.fail("unknown format '" + format + "'");
  Field fld;
  if (field == "real" || field == "double")
    fld = Field::real;
  else if (field == "complex")
    fld = Field::complex;
  else if (field == "integer")
    fld = Field::integer;
  else if (field == "pattern" && format == "coordinate")
    fld = Field::pattern;
  else
    r.fail("unsupported field '" + field + "'");
  Sym sym;
  if (symmetry == "general")
    sym = Sym::general;
  else if (symmetry == "symmetric")
    sym = Sym::symmetric;
  else if (symmetry == "skew-symmetric")
    sym = Sym::skew;
  else if (symmetry == "hermitian" && fld == Field::complex)
    sym = Sym::hermitian;
  else
    r.fail("unsupported symmetry '" + symmetry + "'");

  if (!r.next(s))
    r.fail("missing size line");
  std::istringstream ss(s);
  long rows = -1, cols = -1, nnz = -1;
  ss >> rows >> cols;
  if (format == "coordinate")
    ss >> nnz;
  if (ss.fail() || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0))
    r.fail("malformed size line");
  if (sym != Sym::general && rows != cols)
    r.fail("symmetric storage requires a square matrix");

  auto read_value = [&](std::istringstream &ls) {
    double re = 1.0, im = 0.0;
    if (fld != Field::pattern)
      ls >> re;
    if (fld == Field::complex)
      ls >> im;
    if (ls.fail())
      r.fail("malformed entry");
    return Scalar(re, im);
  };

  if (format == "array")
  {
    Mat A = Mat::Zero(rows, cols);
    for (long j = 0; j < cols; ++j)
    {
      const long i0 = sym == Sym::general ? 0 : (sym == Sym::skew ? j + 1 : j);
      for (long i = i0; i < rows; ++i)
      {
        if (!r.next(s))
          r.fail("unexpected end of file");
        std::istringstream ls(s);
        Scalar v = read_value(ls);
        A(i, j) = v;
        if (sym != Sym::general && i != j)
          A(j, i) = mirror(v, sym);
      }
    }
    if (sym == Sym::hermitian)
      for (long i = 0; i < rows; ++i)
        if (A(i, i).imag() != 0.0)
          r.fail("hermitian matrix with non-real diagonal");
    if (r.next(s))
      r.fail("trailing data");
    return Operator(std::move(A));
  }

  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(std::size_t(sym == Sym::general ? nnz : 2 * nnz));
  for (long k = 0; k < nnz; ++k)
  {
    if (!r.next(s))
      r.fail("unexpected end of file (" + std::to_string(k) + " of " + std::to_string(nnz) +
             " entries)");
    std::istringstream ls(s);
    long i, j;
    ls >> i >> j;
    if (ls.fail())
      r.fail("malformed entry");
    if (i < 1 || i > rows || j < 1 || j > cols)
      r.fail("index out of range");
    Scalar v = read_value(ls);
    if (sym == Sym::skew && i == j)
      r.fail("diagonal entry in skew-symmetric storage");
    t.emplace_back(int(i - 1), int(j - 1), v);
    if (sym != Sym::general && i != j)
      t.emplace_back(int(j - 1), int(i - 1), mirror(v, sym));
  }
  if (r.next(s))
    r.fail("trailing data");
  SpMat A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  return Operator(std::move(A));
}

namespace
{

void write_entry(std::FILE *f, Scalar v, bool real)
{
  if (real)
    std::fprintf(f, " %.17g\n", v.real());
  else
    std::fprintf(f, " %.17g %.17g\n", v.real(), v.imag());
}

std::FILE *open_out(const std::string &path)
{
  std::FILE *f = std::fopen(path.c_str(), "w");
  if (!f)
    throw ValidationError("cannot write " + path);
  return f;
}

}  // namespace

void write_matrix_market(const std::string &path, const Mat &A)
{
  const bool real = A.imag().isZero(0.0);
  std::FILE *f = open_out(path);
  std::fprintf(f, "%%%%MatrixMarket matrix array %s general\n", real ? "real" : "complex");
  std::fprintf(f, "%ld %ld\n", long(A.rows()), long(A.cols()));
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i)
      write_entry(f, A(i, j), real);
  std::fclose(f);
}

void write_matrix_market(const std::string &path, const SpMat &A)
{
  bool real = true;
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (it.value().imag() != 0.0)
        real = false;
  std::FILE *f = open_out(path);
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate %s general\n", real ? "real" : "complex");
  std::fprintf(f, "%ld %ld %ld\n", long(A.rows()), long(A.cols()), long(A.nonZeros()));
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
    {
      std::fprintf(f, "%ld %ld", long(it.row() + 1), long(it.col() + 1));
      write_entry(f, it.value(), real);
    }
  std::fclose(f);
}

void write_matrix_market(const std::string &path, const Operator &A)
{
  if (auto *s = A.sparse())
    write_matrix_market(path, *s);
  else
    write_matrix_market(path, *A.dense());
}

}  // namespace dhrad
