#include "ot1d/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ot1d/kahan.hpp"

#include "json.hpp"

namespace ot1d {

namespace {

struct TiltedMoments {
  double log_normalizer;
  double mean;
  double variance;
  std::vector<double> weight;  // normalized tilted masses
};

// Stable tilted weights: w_i = m_i exp(h x_i - M) / sum, M = max h x_i.
TiltedMoments tilted_moments(const LatticeDistribution& d, double h) {
  const auto& xs = d.support();
  const auto& ms = d.mass();
  double shift = -std::numeric_limits<double>::infinity();
  for (double x : xs) shift = std::max(shift, h * x);
  TiltedMoments out;
  out.weight.resize(xs.size());
  KahanSum z;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.weight[i] = ms[i] * std::exp(h * xs[i] - shift);
    z.add(out.weight[i]);
  }
  const double total = z.value();
  if (!(total > 0.0))
    throw std::runtime_error("esscher_transform: tilted mass underflow");
  out.log_normalizer = shift + std::log(total);
  KahanSum m1;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.weight[i] /= total;
    m1.add(out.weight[i] * xs[i]);
  }
  out.mean = m1.value();
  KahanSum m2;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = xs[i] - out.mean;
    m2.add(out.weight[i] * c * c);
  }
  out.variance = m2.value();
  return out;
}

}  // namespace

TiltedLaw esscher_transform(const LatticeDistribution& d, double h) {
  if (!std::isfinite(h)) throw std::invalid_argument("esscher: h not finite");
  TiltedMoments tm = tilted_moments(d, h);
  return TiltedLaw{d, h, tm.log_normalizer,
                   LatticeDistribution::from_sorted(d.support(), tm.weight,
                                                    d.mass_tolerance())};
}

TiltSolution solve_tilt(const LatticeDistribution& d, double x, double tau) {
  if (d.size() < 2)
    throw std::domain_error("solve_tilt: law is a point mass");
  if (!(x > d.min_support() && x < d.max_support()))
    throw std::domain_error(
        "solve_tilt: target mean outside the open support hull");
  const double sigma2 = d.variance();
  const double sigma = std::sqrt(sigma2);
  if (!(sigma2 > 0.0))
    throw std::domain_error("solve_tilt: degenerate distribution");

  const double tol = 1e-10 * sigma;
  const double displacement = x - d.mean();
  TiltSolution sol;
  sol.within_recommended_domain =
      (tau <= 0.0) || (std::fabs(displacement) <= sigma2 / (4.8 * tau));

  if (std::fabs(displacement) <= tol) {
    sol.h = 0.0;
    sol.achieved_mean = d.mean();
    return sol;
  }

  // Bracket h by geometric expansion; the tilted mean is increasing in h.
  double h = displacement / sigma2;
  double step = 1.0 / sigma;
  double lo, hi;
  if (displacement > 0.0) {
    lo = 0.0;
    hi = std::max(h, step);
    while (tilted_moments(d, hi).mean < x) {
      lo = hi;
      hi += step;
      step *= 2.0;
      if (!std::isfinite(hi) || step > 1e12 / sigma)
        throw std::runtime_error("solve_tilt: failed to bracket");
    }
  } else {
    hi = 0.0;
    lo = std::min(h, -step);
    while (tilted_moments(d, lo).mean > x) {
      hi = lo;
      lo -= step;
      step *= 2.0;
      if (!std::isfinite(lo) || step > 1e12 / sigma)
        throw std::runtime_error("solve_tilt: failed to bracket");
    }
  }
  h = std::clamp(h, lo, hi);

  for (int it = 0; it < 200; ++it) {
    const TiltedMoments tm = tilted_moments(d, h);
    sol.iterations = it + 1;
    sol.achieved_mean = tm.mean;
    const double g = tm.mean - x;
    if (std::fabs(g) <= tol) {
      sol.h = h;
      return sol;
    }
    if (g > 0.0)
      hi = h;
    else
      lo = h;
    double next = h - g / tm.variance;  // Newton; derivative is the variance
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisect fallback
    if (next == h) next = 0.5 * (lo + hi);
    h = next;
  }
  throw std::runtime_error("solve_tilt: did not converge");
}

TiltDiagnostics tilt_diagnostics(const LatticeDistribution& d, double tau,
                                 double h) {
  if (!(tau > 0.0))
    throw std::invalid_argument("tilt_diagnostics: tau must be > 0");
  if (std::fabs(h) * tau >= 1.0)
    throw std::domain_error("tilt_diagnostics: requires |h| tau < 1");
  const double sigma2 = d.variance();
  if (!(sigma2 > 0.0))
    throw std::domain_error("tilt_diagnostics: degenerate distribution");

  TiltDiagnostics diag;
  diag.h = h;
  diag.tau = tau;
  const double ht = std::fabs(h) * tau;
  diag.band_lo = 1.0 - ht;
  diag.band_hi = 1.0 + ht;

  if (h == 0.0) {
    diag.variance_ratio = 1.0;
    diag.variance_in_band = true;
    diag.theta6 = 0.0;
    diag.theta5_abs = 0.0;
    diag.theta6_ok = diag.theta5_ok = true;
    diag.log_normalizer = 0.0;
    return diag;
  }

  const TiltedMoments tm = tilted_moments(d, h);
  diag.log_normalizer = tm.log_normalizer;
  diag.variance_ratio = tm.variance / sigma2;
  diag.variance_in_band =
      diag.variance_ratio >= diag.band_lo && diag.variance_ratio <= diag.band_hi;

  const double half_h2s2 = 0.5 * sigma2 * h * h;
  diag.theta6 = (tm.log_normalizer / half_h2s2 - 1.0) * 3.0 / ht;
  diag.theta6_ok = std::fabs(diag.theta6) <= 1.0;

  const std::complex<double> phi_ih = d.cgf(std::complex<double>(0.0, h));
  const std::complex<double> theta5 =
      (phi_ih / (-half_h2s2) - 1.0) * (3.0 / ht);
  diag.theta5_abs = std::abs(theta5);
  diag.theta5_ok = diag.theta5_abs <= 1.0;
  return diag;
}

std::string TiltDiagnostics::to_json() const {
  nlohmann::json j;
  j["h"] = h;
  j["tau"] = tau;
  j["variance_ratio"] = variance_ratio;
  j["band"] = {band_lo, band_hi};
  j["variance_in_band"] = variance_in_band;
  j["theta6"] = theta6;
  j["theta6_ok"] = theta6_ok;
  j["theta5_abs"] = theta5_abs;
  j["theta5_ok"] = theta5_ok;
  j["log_normalizer"] = log_normalizer;
  return j.dump(2);
}

}  // namespace ot1d
