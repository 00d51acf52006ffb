#pragma once

#include <cstdint>
#include <string>

#include "dhrad/kernels.hpp"

namespace dhrad
{

struct VerifyResult
{
  double residual = 0.0;  // min over signs of dist(iω*, spectrum of the perturbed matrix)
  Scalar sign = 1.0;
  bool ok = false;
  std::string warning;
};

/// Rank-one perturbation Δ = s·radius·v u^H from the top singular pair at ω*, for
/// s ∈ {+1, -1, +i, -i}, applied as (J + BΔC - R)Q, (J - (R + BΔC))Q or (J - R)(Q + BΔC).
VerifyResult verify_unstructured(const DHSystem &system, RadiusKind kind,
                                 const RestrictionPair &restriction, double radius,
                                 double omega);

struct SpectraSummary
{
  double min_abs_real = 0.0;  // min |Re λ| over all samples
  double max_real = 0.0;      // max Re λ over all samples
  Index crossings = 0;        // samples with an eigenvalue in the closed right half plane
  Index count = 0;
};

/// Spectra of (J - (R + BΔB^H))Q for random Hermitian Δ with ||Δ||_2 = r. Sample i draws
/// from its own stream seeded by (seed, i), so serial and parallel runs agree exactly.
SpectraSummary sample_structured_spectra(const DHSystem &system, const Mat &B, double r,
                                         Index count, std::uint64_t seed,
                                         kernels::Exec exec = kernels::Exec::parallel);

}  // namespace dhrad
