#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ot1d/lattice.hpp"

namespace ot1d {

// Design commitment for every coupling-based quantity in this module: on
// the real line, the quantile (comonotone) coupling (F^{-1}(U), G^{-1}(U))
// minimizes E c(|X - Y|) for any convex cost c, so one-dimensional optimal
// transport reduces to quantile-space integrals. The exact LP solver below
// exists to validate that reduction empirically, and the test suite
// compares the two routes on random instances.

// Young-type cost psi: nonnegative, convex, increasing, psi(0) = 0.
class OrliczCost {
 public:
  enum class Kind { exp_minus_one, power, absolute };

  static OrliczCost exp_minus_one();
  static OrliczCost power(double p);  // |x|^p, p >= 1
  static OrliczCost absolute();

  Kind kind() const { return kind_; }
  double exponent() const { return p_; }
  double operator()(double x) const;  // psi(|x|)
  std::string name() const;

 private:
  OrliczCost(Kind k, double p);
  Kind kind_;
  double p_;
};

struct TransportResult {
  double value = 0.0;
  // For gauge distances: transport objective at the returned value.
  double objective_at_value = 0.0;
  // Accumulated quadrature / bisection error estimate.
  double quadrature_error = 0.0;
  int iterations = 0;
  std::string method;
  // Secondary-route value where a second route exists (e.g. the
  // quantile-space W1 against the CDF-space W1).
  double cross_check = 0.0;
  bool has_cross_check = false;
  std::string to_json() const;
};

// The map u -> (F^{-1}(u), G^{-1}(u)) on (0,1). Pushing Lebesgue measure
// through either coordinate recovers that marginal; the tie-breaking is
// right-continuous CDF with left-continuous generalized inverse.
struct QuantileCoupling {
  Law left;
  Law right;
  std::pair<double, double> operator()(double u) const;
};

// sup_x |F(x) - G(x)|, evaluated exactly at jump points and left limits
// for lattice laws and at density crossings for Gaussian pairs.
TransportResult kolmogorov_distance(const Law& f, const Law& g);

// inf{eps : G(x-eps)-eps <= F(x) <= G(x+eps)+eps for all x} by bisection
// over [0, kolmogorov]; the band condition is checked exactly at jump
// points / stationary points for each candidate eps.
TransportResult levy_distance(const Law& f, const Law& g);

// W1 via the CDF-space integral (closed-form Gaussian pieces); the
// quantile-space integral is computed independently and stored in
// cross_check. Throws if the two routes disagree beyond
// max(1e-8, 1e-6 * value).
TransportResult w1_distance(const Law& f, const Law& g);

// (integral_0^1 |F^{-1} - G^{-1}|^p du)^{1/p}, p >= 1, adaptive quadrature
// with exact tail handling.
TransportResult wp_distance(const Law& f, const Law& g, double p);

// integral_0^1 psi(|F^{-1}(u) - G^{-1}(u)| / a) du. Exponential costs use
// closed-form shifted-Gaussian pieces evaluated in log space; values whose
// exponent overflows are reported as +infinity.
double orlicz_objective(const Law& f, const Law& g, const OrliczCost& psi,
                        double a);

// Luxemburg gauge inf{a > 0 : orlicz_objective(f,g,psi,a) <= 1} by bracket
// and bisection; 0 when the laws coincide.
TransportResult orlicz_wasserstein(const Law& f, const Law& g,
                                   const OrliczCost& psi);

// Quantile-coupling cost sum over the northwest merge of the two mass
// sequences; this is the exact transport cost for convex costs.
double comonotone_cost(const LatticeDistribution& mu,
                       const LatticeDistribution& nu,
                       const std::function<double(double)>& cost_of_distance);

// Exact optimal transportation cost between two finitely supported laws by
// successive-shortest-path min-cost flow (no convexity assumption on the
// cost). Intended as an oracle; support sizes are capped.
double discrete_ot_oracle(const LatticeDistribution& mu,
                          const LatticeDistribution& nu,
                          const std::function<double(double)>& cost_of_distance,
                          std::size_t max_support = 200);

// Per-atom view of the quantile coupling against a Gaussian: the atom's
// quantile interval, its Gaussian partner range and the worst displacement
// over that range. Reported eta values clip the quantile level to
// [1e-14, 1 - 1e-14] (flagged); the *_exact fields keep the unclipped
// partner range computed from per-atom tail masses, which stay accurate
// far beyond the clip (infinite once the tail underflows doubles).
struct CouplingAtom {
  double x = 0.0;
  double mass = 0.0;
  double u_lo = 0.0, u_hi = 0.0;      // clipped quantile interval
  double eta_lo = 0.0, eta_hi = 0.0;  // partner range at clipped levels
  double max_displacement = 0.0;      // over the clipped range
  bool clipped_lo = false, clipped_hi = false;
  double cdf_lo = 0.0, sf_lo = 0.0;  // exact tails at the lower interval edge
  double cdf_hi = 0.0, sf_hi = 0.0;  // exact tails at the upper interval edge
  double eta_lo_exact = 0.0, eta_hi_exact = 0.0;
  double max_displacement_exact = 0.0;
};

std::vector<CouplingAtom> coupling_profile(const LatticeDistribution& f,
                                           const GaussianLaw& g);

}  // namespace ot1d
