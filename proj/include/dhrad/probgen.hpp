#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dhrad/dh_core.hpp"
#include "dhrad/shifted_solve.hpp"

namespace dhrad
{

enum class Family
{
  dense,
  sparse_banded,
  brake_toy
};

struct GenSpec
{
  Family family = Family::dense;
  Index n = 40;  // q for brake_toy (n = 2q)
  std::uint64_t seed = 0;
  Index bandwidth = 10;
  std::optional<Index> rank_cap;  // max(1, n/10) when unset
  Index m = 2, p = 2;
  double Omega = 1.0;
};

struct Problem
{
  DHSystem system;
  RestrictionPair restriction;
  std::optional<SecondOrderDH> brake;
};

Family parse_family(const std::string &s);
std::string to_string(Family f);

Index default_rank_cap(Index n);

/// Real dense DH system: J = (A - A^T)/2, Q = sym(randn) shifted to PD,
/// R = U^T blockdiag(R_p, 0) U with random size 1 <= p <= rank_cap.
Problem gen_dense(Index n, std::uint64_t seed, std::optional<Index> rank_cap = {}, Index m = 2,
                  Index p = 2);

/// Banded sparse DH system; R = X^T D X with D diagonal of rank <= rank_cap and X banded
/// with half the bandwidth.
Problem gen_sparse(Index n, std::uint64_t seed, Index bandwidth = 10,
                   std::optional<Index> rank_cap = {}, Index m = 2, Index p = 2);

/// Random second-order model with K(Ω) = K_E + Ω² K_g positive definite.
SecondOrderDH gen_brake_toy(Index q, std::uint64_t seed, double Omega);

/// Random B (2q x m) with C = B^T.
RestrictionPair gen_brake_restriction(Index q, std::uint64_t seed, Index m = 2);

Problem generate(const GenSpec &spec);

}  // namespace dhrad
