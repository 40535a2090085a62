#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ot1d/lattice.hpp"

namespace ot1d {

// One grid evaluation of an inequality, stated as lhs <= constant * rhs.
struct BandPoint {
  std::string family;
  double x = 0.0;
  double eps = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Grid report for a family of inequalities. minimal_constant is the
// smallest c with lhs <= c * rhs over every point with rhs > 0; holds and
// violations are evaluated at supplied_constant with relative arithmetic
// slack 1e-12.
struct BandReport {
  std::string name;
  std::vector<BandPoint> points;
  double minimal_constant = 0.0;
  double supplied_constant = 1.0;
  bool holds = true;
  long violations = 0;
  std::vector<std::pair<std::string, double>> named_constants;
  std::vector<std::string> notes;
  std::string to_json() const;
  void write_csv(const std::string& path) const;
};

// Xi(x) = e^{x^2/2} integral_x^inf e^{-y^2/2} dy, x > 0, via the scaled
// complementary error function (no overflow, relative accuracy ~1e-13 up
// to x = 100).
double mills_ratio(double x);

// Verifies the four Mills-ratio / Gaussian-shift inequalities on the grid:
//   (a) 0 <= Xi(x) - Xi(x+eps) <= eps/x^2
//   (b) (1/x)(1 - 1/x^2) <= Xi(x) <= 1/x
//   (c) 1 - Phi_sigma(x+eps) <= (1 - Phi_sigma(x)) exp{-(2x eps + eps^2)/2 sigma^2}
//   (d) for x > eps: 1 - Phi_sigma(x) <= (1 - Phi_sigma(x-eps)) exp{-(2x eps - eps^2)/2 sigma^2}
// The Mills inequalities are scale-free; sigma enters (c)/(d) only.
BandReport mills_inequality_check(const std::vector<double>& x_grid,
                             const std::vector<double>& eps_grid,
                             double sigma = 1.0);
// Default grids: x in [0.1, 20], eps in [0.01, 5], 100 x 100 points.
BandReport mills_inequality_check();

// max{exp(-x^2/4 sigma^2), exp(-x/4 tau)}; the regime switch sits at
// x = sigma^2/tau.
double bernstein_tail(double sigma, double tau, double x);

// For every atom x >= 0 of a centered law: exact P{xi >= x} against
// bernstein_tail(sigma, tau, x). minimal_constant is the smallest
// multiplier m for which the bound with tau replaced by m*tau holds at
// every atom.
BandReport tail_bound_verify(const LatticeDistribution& d, double tau);

// |Fhat(t) - companion characteristic function| against
// (tau/6) sigma^2 |t|^3 exp(-sigma^2 t^2 / 3) over the grid; requires
// |t| tau <= 1. minimal_constant is the max ratio, which is also the
// minimal tau-multiplier since the right side is linear in tau.
BandReport cf_bound_report(const LatticeDistribution& d, double tau,
                           const std::vector<double>& t_grid);

// Esseen smoothing bound at level T:
//   (1/pi) integral_0^T |Fhat(t) - Phihat(t)|/t dt + 24/(pi T sqrt(2 pi) sigma),
// an upper bound for the Kolmogorov distance to the Gaussian companion.
double smoothing_rho_bound(const LatticeDistribution& d, double T);

// Quantile-coupling displacement constants against the Gaussian companion,
// from the exact (unclipped) per-atom partner ranges:
//   c7  = max displacement / tau over atoms |x| <= 2 sigma;
//   c11 = max displacement / (tau x^2 / sigma^2) over atoms with
//         2 sigma <= |x| <= c10 sigma^2 / tau, for c10 in {0.1, 0.2, 0.5}.
// Constants land in named_constants ("c7", "c11@0.1", ...); empty regions
// are recorded in notes, not errors. An outermost atom inside a region
// would make the exact displacement infinite (its exterior tail is zero);
// that is reported as +inf, faithfully.
BandReport coupling_band_report(const LatticeDistribution& f, double tau);

std::vector<double> linear_grid(double lo, double hi, int n);

}  // namespace ot1d
