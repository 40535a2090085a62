#pragma once

#include <string>

#include "ot1d/lattice.hpp"

namespace ot1d {

// Exponential change of measure: the tilted law puts mass proportional to
// m_i exp(h x_i) on the same support as the base law.
struct TiltedLaw {
  LatticeDistribution base;
  double h = 0.0;
  double log_normalizer = 0.0;  // cgf of the base law at h
  LatticeDistribution tilted;
};

TiltedLaw esscher_transform(const LatticeDistribution& d, double h);

struct TiltSolution {
  double h = 0.0;
  int iterations = 0;
  double achieved_mean = 0.0;
  // Whether |x| <= sigma^2 / (4.8 tau); only evaluated when a tau is
  // supplied, informational either way.
  bool within_recommended_domain = true;
};

// Solves E xi(h) = x for the tilt parameter by safeguarded Newton on the
// tilted mean (monotone increasing, derivative = tilted variance).
// x must lie strictly inside the convex hull of the support and the law
// must be centered. Passing tau > 0 evaluates the recommended-domain flag.
TiltSolution solve_tilt(const LatticeDistribution& d, double x,
                        double tau = 0.0);

struct TiltDiagnostics {
  double h = 0.0;
  double tau = 0.0;
  double variance_ratio = 1.0;  // Var xi(h) / Var xi
  double band_lo = 1.0, band_hi = 1.0;  // 1 -+ |h| tau
  bool variance_in_band = true;
  // theta normalizations of the cgf at h and at ih:
  //   log E e^{h xi}  = (1/2) sigma^2 h^2 (1 + theta6 |h| tau / 3)
  //   log E e^{ih xi} = -(1/2) sigma^2 h^2 (1 + theta5 |h| tau / 3)
  double theta6 = 0.0;
  double theta5_abs = 0.0;
  bool theta6_ok = true;
  bool theta5_ok = true;
  double log_normalizer = 0.0;
  std::string to_json() const;
};

// Requires |h| tau < 1 and a centered law.
TiltDiagnostics tilt_diagnostics(const LatticeDistribution& d, double tau,
                                 double h);

}  // namespace ot1d
