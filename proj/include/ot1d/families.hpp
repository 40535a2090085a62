#pragma once

#include "ot1d/lattice.hpp"

namespace ot1d {

// Named lattice families used by the sweeps, the command-line tool and the
// test suites. All constructors build exact probability vectors (log-space
// pmf evaluation, compensated normalization); infinite-support families are
// truncated symmetrically in probability.

LatticeDistribution rademacher();

// {-p with mass 1-p, 1-p with mass p}: a Bernoulli(p) draw minus its mean.
LatticeDistribution bernoulli_centered(double p);

// Sum of n centered Bernoulli(p) draws, i.e. binomial(n, p) shifted by -np.
// normalize additionally divides by sqrt(n p (1-p)).
LatticeDistribution binomial_centered(long n, double p, bool normalize = false);

// Sum of n independent signs; normalize divides by sqrt(n).
LatticeDistribution rademacher_sum(long n, bool normalize = false);

// Poisson(lambda), counts with cumulative discarded mass <= mass_tol
// trimmed from the two tails (split evenly), then renormalized.
LatticeDistribution poisson_raw(double lambda, double mass_tol = 1e-12);
LatticeDistribution poisson_centered(double lambda, double mass_tol = 1e-12);

// Poisson(lambda) restricted to counts k_lo..k_hi, renormalized. Explicit
// wide windows keep tilting and complex-plane cgf evaluations meaningful
// far from the bulk, where the default truncation error gets amplified
// exponentially. Counts whose pmf underflows double range are dropped.
LatticeDistribution poisson_window(double lambda, long k_lo, long k_hi,
                                   bool centered);

// n-fold sum of an independently drawn centered copy of base; normalize
// divides by the sum's standard deviation.
LatticeDistribution iid_sum(const LatticeDistribution& base, long n,
                            bool normalize = false);

// Cell-probability discretization of N(0, sigma^2) with the given grid
// step over [-half_width*sigma, half_width*sigma]; the end cells absorb
// the remaining tails, so the masses sum to one exactly.
LatticeDistribution gaussian_lattice(double sigma, double step,
                                     double half_width = 8.0);

}  // namespace ot1d
