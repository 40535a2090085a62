#include "ot1d/families.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ot1d/kahan.hpp"
#include "ot1d/normal.hpp"

namespace ot1d {

namespace {

std::vector<double> poisson_log_pmf(double lambda, long k_lo, long k_hi) {
  std::vector<double> lp;
  lp.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  const double ll = std::log(lambda);
  for (long k = k_lo; k <= k_hi; ++k)
    lp.push_back(k * ll - lambda - std::lgamma(static_cast<double>(k) + 1.0));
  return lp;
}

}  // namespace

LatticeDistribution rademacher() {
  return make_lattice({-1.0, 1.0}, {0.5, 0.5});
}

LatticeDistribution bernoulli_centered(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("bernoulli_centered: p must lie in (0,1)");
  return make_lattice({-p, 1.0 - p}, {1.0 - p, p});
}

LatticeDistribution binomial_centered(long n, double p, bool normalize) {
  if (n < 1) throw std::invalid_argument("binomial_centered: n must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("binomial_centered: p must lie in (0,1)");
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  const double lp = std::log(p), lq = std::log1p(-p);
  const double scale = normalize ? 1.0 / std::sqrt(n * p * (1.0 - p)) : 1.0;
  std::vector<double> xs, ws;
  xs.reserve(static_cast<std::size_t>(n) + 1);
  ws.reserve(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) {
    const double lw = lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      k * lp + (n - k) * lq;
    const double w = std::exp(lw);  // underflows to 0 in extreme tails
    if (w > 0.0) {
      xs.push_back((k - n * p) * scale);
      ws.push_back(w);
    }
  }
  return LatticeDistribution::from_sorted(std::move(xs), std::move(ws));
}

LatticeDistribution rademacher_sum(long n, bool normalize) {
  if (n < 1) throw std::invalid_argument("rademacher_sum: n must be >= 1");
  // Sum of n signs = 2 Bin(n, 1/2) - n on the even/odd lattice {-n, ..., n}.
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  const double lhalf = -std::log(2.0) * n;
  const double scale = normalize ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
  std::vector<double> xs, ws;
  xs.reserve(static_cast<std::size_t>(n) + 1);
  ws.reserve(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) {
    const double lw =
        lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + lhalf;
    const double w = std::exp(lw);
    if (w > 0.0) {
      xs.push_back((2.0 * k - n) * scale);
      ws.push_back(w);
    }
  }
  return LatticeDistribution::from_sorted(std::move(xs), std::move(ws));
}

LatticeDistribution poisson_window(double lambda, long k_lo, long k_hi,
                                   bool centered) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("poisson_window: lambda must be positive");
  if (k_lo < 0 || k_hi < k_lo)
    throw std::invalid_argument("poisson_window: need 0 <= k_lo <= k_hi");
  const auto lp = poisson_log_pmf(lambda, k_lo, k_hi);
  std::vector<double> xs, ws;
  xs.reserve(lp.size());
  ws.reserve(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const double w = std::exp(lp[i]);
    if (w > 0.0) {
      xs.push_back(static_cast<double>(k_lo + static_cast<long>(i)) -
                   (centered ? lambda : 0.0));
      ws.push_back(w);
    }
  }
  return LatticeDistribution::from_sorted(std::move(xs), std::move(ws));
}

LatticeDistribution poisson_raw(double lambda, double mass_tol) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("poisson: lambda must be positive");
  if (!(mass_tol > 0.0 && mass_tol < 0.1))
    throw std::invalid_argument("poisson: mass_tol must lie in (0, 0.1)");
  // Starting window, widened until the boundary pmf clears the requested
  // tail tolerance (geometric tail bound) or falls off the bottom of
  // double range; a window clipped above mass_tol would silently hand the
  // last atom everything beyond it, which tail-sensitive functionals such
  // as the exponential-gauge transport cost amplify enormously. Then trim
  // each tail back to mass_tol/2.
  long hi0 =
      static_cast<long>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 40.0));
  const double log_goal = std::log(0.25 * mass_tol);
  const long step = static_cast<long>(std::ceil(std::sqrt(lambda))) + 16;
  for (;;) {
    const double edge = static_cast<double>(hi0);
    const double lp_edge =
        -lambda + edge * std::log(lambda) - std::lgamma(edge + 1.0);
    const double tail_factor = -std::log1p(-lambda / (edge + 1.0));
    if (lp_edge + tail_factor <= log_goal || lp_edge < -744.5) break;
    hi0 += step;
  }
  const auto lp = poisson_log_pmf(lambda, 0, hi0);
  std::vector<double> w(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) w[i] = std::exp(lp[i]);

  std::size_t lo = 0, hi = w.size();
  {
    KahanSum dropped;
    while (lo + 1 < hi && dropped.value() + w[lo] <= 0.5 * mass_tol) {
      dropped.add(w[lo]);
      ++lo;
    }
  }
  {
    KahanSum dropped;
    while (hi > lo + 1 && dropped.value() + w[hi - 1] <= 0.5 * mass_tol) {
      dropped.add(w[hi - 1]);
      --hi;
    }
  }
  std::vector<double> xs, ws;
  xs.reserve(hi - lo);
  ws.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    if (w[i] > 0.0) {
      xs.push_back(static_cast<double>(i));
      ws.push_back(w[i]);
    }
  }
  return LatticeDistribution::from_sorted(std::move(xs), std::move(ws));
}

LatticeDistribution poisson_centered(double lambda, double mass_tol) {
  const auto raw = poisson_raw(lambda, mass_tol);
  return affine(raw, 1.0, -lambda);
}

LatticeDistribution iid_sum(const LatticeDistribution& base, long n,
                            bool normalize) {
  if (n < 1) throw std::invalid_argument("iid_sum: n must be >= 1");
  LatticeDistribution centered =
      base.mean() == 0.0 ? base : affine(base, 1.0, -base.mean());
  LatticeDistribution sum = power_convolve(centered, n);
  if (!normalize) return sum;
  const double sd = std::sqrt(sum.variance());
  if (!(sd > 0.0)) throw std::invalid_argument("iid_sum: degenerate base law");
  return affine(sum, 1.0 / sd, 0.0);
}

LatticeDistribution gaussian_lattice(double sigma, double step,
                                     double half_width) {
  if (!(sigma > 0.0) || !(step > 0.0) || !(half_width > 0.0))
    throw std::invalid_argument("gaussian_lattice: parameters must be positive");
  const long m = std::lround(half_width * sigma / step);
  if (m < 1) throw std::invalid_argument("gaussian_lattice: fewer than 3 cells");
  std::vector<double> xs, ws;
  xs.reserve(static_cast<std::size_t>(2 * m + 1));
  ws.reserve(static_cast<std::size_t>(2 * m + 1));
  for (long j = -m; j <= m; ++j) {
    const double x = j * step;
    const double a = (j == -m) ? -std::numeric_limits<double>::infinity()
                               : (x - 0.5 * step) / sigma;
    const double b = (j == m) ? std::numeric_limits<double>::infinity()
                              : (x + 0.5 * step) / sigma;
    const double w = normal::cdf_diff(a, b);
    if (w > 0.0) {
      xs.push_back(x);
      ws.push_back(w);
    }
  }
  return LatticeDistribution::from_sorted(std::move(xs), std::move(ws));
}

}  // namespace ot1d
