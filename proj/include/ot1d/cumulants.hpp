#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ot1d/lattice.hpp"

namespace ot1d {

// Cumulants gamma_1..gamma_M via the moment recursion
//   gamma_m = mu_m - sum_{k=1}^{m-1} C(m-1,k-1) gamma_k mu_{m-k}.
// `condition[m-1]` is the largest term magnitude in that sum divided by
// |gamma_m|; orders whose condition exceeds 1e12 are flagged unreliable.
struct CumulantDiagnostics {
  std::vector<double> value;
  std::vector<double> condition;
  std::vector<bool> reliable;
};

CumulantDiagnostics cumulants_upto(const LatticeDistribution& d, int M);

inline constexpr int kMaxCumulantOrder = 16;
inline constexpr double kCumulantConditionLimit = 1e12;

struct OrderConstraint {
  int order = 0;         // cumulant/moment order, or grid index for grid checks
  double min_tau = 0.0;  // smallest tau satisfying that constraint
  double condition = 0.0;
};

struct A1GridInfo {
  std::vector<double> radial_fracs;
  int angular_count = 0;
  int quadrature_nodes = 0;
  double tau = 0.0;
};

struct ClassCertificate {
  std::string class_name;
  std::vector<OrderConstraint> order_constraints;
  double tau_estimate = 0.0;
  int max_order = 0;
  std::optional<double> holds_at;  // tau the certificate was checked against
  std::optional<bool> holds;
  std::optional<A1GridInfo> grid;
  std::string to_json() const;
};

// Minimal tau with |gamma_m| <= (1/2) m! tau^{m-2} gamma_2 for 3 <= m <= M.
ClassCertificate statulevicius_tau(const LatticeDistribution& d, int M);

// Minimal tau with |E xi^m| <= (1/2) m! tau^{m-2} E xi^2 for 3 <= m <= M;
// requires a centered law.
ClassCertificate bernstein_tau_1d(const LatticeDistribution& d, int M);

struct SakhanenkoResult {
  bool holds = false;
  double margin = 0.0;  // lhs / (tau * E xi^2); holds iff margin <= 1
  double lhs = 0.0;
  double rhs = 0.0;
};

// Checks E |xi|^3 exp(|xi|/tau) <= tau E xi^2.
SakhanenkoResult sakhanenko_holds(const LatticeDistribution& d, double tau);

// Third derivative of the cgf by the Cauchy integral formula over a circle
// of the given radius, trapezoid quadrature with branch tracking of the
// logarithm along the circle. Throws if the branch fails to close (a zero
// of the mgf inside the circle, i.e. the cgf is not analytic there).
std::complex<double> cgf_third_derivative(const LatticeDistribution& d,
                                          std::complex<double> z,
                                          double circle_radius, int nodes);

// Checks |phi'''(z)| <= tau sigma^2 on the polar grid
// z = (f/tau) e^{i theta}, f in radial_fracs, theta = 2 pi j/angular_count.
// Evaluation circles have radius min(0.005/tau, half the distance to the
// boundary |z| = 1/tau). Each grid entry records |phi'''(z)|/sigma^2, the
// smallest tau validating that point.
ClassCertificate a1_grid_check(const LatticeDistribution& d, double tau,
                               std::vector<double> radial_fracs = {0.25, 0.5,
                                                                   0.75, 0.99},
                               int angular_count = 64,
                               int quadrature_nodes = 512);

}  // namespace ot1d
