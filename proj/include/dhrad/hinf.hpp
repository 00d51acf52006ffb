#pragma once

#include "dhrad/transfer.hpp"

namespace dhrad
{

struct HinfResult
{
  double norm = 0.0;
  double omega = 0.0;  // a global maximizer; nonnegative for real data
  int iterations = 0;
};

/// Level-set H∞ norm of C(sI-A)^{-1}B for a small dense stable triple.
/// At level γ the crossing frequencies are the imaginary eigenvalues of
///   [[A, BB^H/γ], [-C^H C/γ, -A^H]].
HinfResult hinf_norm_bb(const StateSpace &sys, double tol = 1e-10);

/// Imaginary parts of the level-γ crossings, sorted.
std::vector<double> level_crossings(const StateSpace &sys, double gamma);

}  // namespace dhrad
