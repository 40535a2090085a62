#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Standard-normal helpers shared by the distance, tilt and bound code.
//
// Requirements that shaped the implementation:
//   * cdf/sf must stay relatively accurate far into the tails (sf(38) is
//     still normal), so both are routed through erfc.
//   * quantile must be accurate to ~1e-15 in the argument over the whole
//     open interval, including arguments as small as 1e-300; Wichura's
//     PPND16 rational approximations plus one Newton polish provide that.
//   * erfcx (scaled complementary error function) is needed for Mills-ratio
//     evaluation up to x = 100 and for log-space Gaussian tail integrals;
//     it is evaluated directly for moderate x and by the asymptotic series
//     beyond, always with relative error well under 1e-13.

namespace ot1d::normal {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;

inline double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Upper tail 1 - cdf(z), accurate for large positive z.
inline double sf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

// exp(x^2) * erfc(x) for x >= 0.
inline double erfcx(double x) {
  if (x < 0.0) throw std::domain_error("erfcx: negative argument");
  if (x < 12.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series erfc(x) ~ exp(-x^2)/(x sqrt(pi)) * sum (-1)^k (2k-1)!!/(2x^2)^k.
  // At x >= 12 fifteen terms leave a remainder below 1e-20 relative.
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 15; ++k) {
    term *= -(2 * k - 1) * inv2x2;
    sum += term;
  }
  return sum / (x * 1.7724538509055160273);  // sqrt(pi)
}

// log(1 - cdf(z)) without underflow for large z.
inline double log_sf(double z) {
  if (z < 8.0) return std::log(sf(z));
  return -0.5 * z * z + std::log(0.5 * erfcx(z / kSqrt2));
}

// cdf(b) - cdf(a) for a <= b. Routed through the smaller tail so the
// subtraction happens between numbers of comparable size.
inline double cdf_diff(double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("cdf_diff: requires a <= b");
  if (a > 0.0) return sf(a) - sf(b);
  if (b < 0.0) return cdf(b) - cdf(a);
  return cdf(b) - cdf(a);
}

// log(cdf(b) - cdf(a)), relatively accurate even when both endpoints sit
// deep in the same tail (where the plain difference underflows).
inline double log_cdf_diff(double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("log_cdf_diff: requires a <= b");
  if (a == b) return -std::numeric_limits<double>::infinity();
  if (a > 0.0) {
    // sf(a) - sf(b) = sf(a) * (1 - sf(b)/sf(a))
    double log_sfa = log_sf(a);
    double ratio = 0.0;
    if (std::isfinite(b)) {
      ratio = (erfcx(b / kSqrt2) / erfcx(a / kSqrt2)) *
              std::exp(0.5 * (a * a - b * b));
    }
    return log_sfa + std::log1p(-ratio);
  }
  if (b < 0.0) return log_cdf_diff(-b, -a);
  double d = cdf_diff(a, b);
  return std::log(d);
}

namespace detail {

// Wichura's algorithm AS 241 (PPND16): rational approximations for the
// standard normal quantile, |error| ~ 1e-16 over p in (1e-316, 1).
inline double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  if (r <= 0.0) throw std::domain_error("normal quantile: p outside (0,1)");
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return (q < 0.0) ? -x : x;
}

}  // namespace detail

// Standard normal quantile with one Newton polish on top of PPND16.
inline double quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal quantile: p outside (0,1)");
  double x = detail::ppnd16(p);
  if (std::fabs(x) < 8.0) {
    const double d = pdf(x);
    if (d > 1e-300) x -= (cdf(x) - p) / d;
  } else {
    // Tail polish in log space: d/dx log sf(x) = -pdf(x)/sf(x).
    const double ax = std::fabs(x);
    const double target = std::log((x > 0.0) ? 1.0 - p : p);
    const double logs = log_sf(ax);
    const double deriv = -pdf(ax) / std::exp(logs);
    double corr = (logs - target) / deriv;
    x = (x > 0.0) ? ax - corr : -(ax - corr);
  }
  return x;
}

// Quantile of the upper tail: solves sf(x) = p. Accurate for p down to
// the smallest positive doubles.
inline double upper_quantile(double p) { return -quantile(p); }

}  // namespace ot1d::normal
