#pragma once

#include "riagap/scm.hpp"

namespace riagap {

/// Binary C, L fixed at 0, M and Y shocks independent: every natural effect
/// equals its randomized analogue, so TE - TE^R = 0.
///   P(C=1) = 1/2, P(A=1|c) = 0.4 + 0.2c, P(M=1|c,a) = expit(-0.3 + 0.8a + 0.5c),
///   Y = 0.5c + a + m + 0.5am + N(0, 1).
DiscreteScm collapse_dgp();

/// Binary C and L where L moves M but not Y. Cross-world independence still
/// holds, so TE - TE^R = 0, and the influence function of TE - TE^R is not
/// degenerate (with L constant it vanishes identically at the truth).
///   P(L=1|c,a) = expit(-0.5 + a + 0.5c), P(M=1|c,a,l) = expit(-0.8 + 0.5a + 0.3c + 1.5l),
///   Y = 0.5c + a + m + 0.5am + N(0, 1).
DiscreteScm level_dgp();

/// Binary C and L with an A-L interaction in the mediator and an L-M
/// interaction in the outcome, so TE - TE^R != 0.
///   P(L=1|c,a) = expit(-0.5 + a + 0.5c),
///   P(M=1|c,a,l) = expit(-0.5 + 0.5a + 0.3c + b·a·l),
///   Y = 0.5c + a + l + m + kappa·l·m + N(0, 1).
DiscreteScm divergent_dgp(double b = 3.0, double kappa = 2.0);

}  // namespace riagap
