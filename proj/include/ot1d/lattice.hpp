#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace ot1d {

// Finitely supported law on the real line. Invariants enforced on every
// construction path:
//   * support strictly increasing, every mass strictly positive,
//   * total mass 1 within the stored tolerance (construction renormalizes),
//   * cumulative and upper-tail prefix sums precomputed with compensated
//     summation; the upper tails are summed from the top so that extreme
//     tail probabilities keep full relative accuracy.
class LatticeDistribution {
 public:
  static constexpr double kDefaultMassTolerance = 1e-12;

  // Public factory: sorts, merges near-duplicate support points (relative
  // tolerance 1e-12, mass-weighted positions), drops atoms below
  // mass_tolerance and renormalizes.
  static LatticeDistribution make(std::vector<double> support,
                                  std::vector<double> mass,
                                  double mass_tolerance = kDefaultMassTolerance);

  // Factory for exact intermediate results (convolutions, tilts): expects
  // sorted support, merges near-duplicates, keeps every positive mass no
  // matter how small, renormalizes.
  static LatticeDistribution from_sorted(std::vector<double> support,
                                         std::vector<double> mass,
                                         double mass_tolerance = kDefaultMassTolerance);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& mass() const { return mass_; }
  double mass_tolerance() const { return mass_tolerance_; }
  std::size_t size() const { return support_.size(); }

  double min_support() const { return support_.front(); }
  double max_support() const { return support_.back(); }

  // Right-continuous distribution function.
  double cdf(double x) const;
  // Generalized inverse inf{x : F(x) >= u}, u in (0,1).
  double quantile(double u) const;

  // P{xi <= support[i]} (prefix sum) and P{xi >= support[i]} (suffix sum,
  // accumulated from the top).
  double lower_tail(std::size_t i) const { return cum_[i]; }
  double upper_tail(std::size_t i) const { return tail_[i]; }

  double mean() const { return mean_; }
  double variance() const { return variance_; }

  // Raw moments E xi^k for k = 0..k_max.
  std::vector<double> raw_moments(int k_max) const;

  // Cumulant generating function log E exp(z xi), principal branch, with a
  // log-sum-exp shift so large real parts cannot overflow.
  std::complex<double> cgf(std::complex<double> z) const;

 private:
  LatticeDistribution() = default;
  static LatticeDistribution finalize(std::vector<double> support,
                                      std::vector<double> mass,
                                      double mass_tolerance, bool drop_small);

  std::vector<double> support_, mass_, cum_, tail_;
  double mass_tolerance_ = kDefaultMassTolerance;
  double mean_ = 0.0, variance_ = 0.0;
};

// Gaussian law N(mean, variance), variance > 0.
class GaussianLaw {
 public:
  GaussianLaw(double mean, double variance);
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double sigma() const { return sigma_; }
  double cdf(double x) const;
  double quantile(double u) const;
  double density(double x) const;

 private:
  double mean_, variance_, sigma_;
};

using Law = std::variant<LatticeDistribution, GaussianLaw>;

// --- operations ---

LatticeDistribution make_lattice(std::vector<double> support,
                                 std::vector<double> mass,
                                 double mass_tolerance =
                                     LatticeDistribution::kDefaultMassTolerance);

// Distribution of the sum of independent draws. The result keeps every
// positive product mass (no tolerance-dropping) so that long convolution
// chains preserve extreme tails exactly. Throws when the support-pair count
// exceeds max_pairs.
LatticeDistribution convolve(const LatticeDistribution& a,
                             const LatticeDistribution& b,
                             std::size_t max_pairs = 10'000'000);

// n-fold convolution power by binary powering, n >= 1.
LatticeDistribution power_convolve(const LatticeDistribution& d, long n,
                                   std::size_t max_pairs = 10'000'000);

// Law of scale*xi + shift; scale may be negative, never zero.
LatticeDistribution affine(const LatticeDistribution& d, double scale,
                           double shift);

double cdf_eval(const Law& law, double x);
double quantile_eval(const Law& law, double u);

std::vector<double> moments(const LatticeDistribution& d, int k_max);
std::complex<double> cgf_eval(const LatticeDistribution& d,
                              std::complex<double> z);

// Gaussian with the same mean and variance; throws on zero variance.
GaussianLaw gaussian_companion(const LatticeDistribution& d);

double mean_of(const Law& law);
double variance_of(const Law& law);

// Text format: one "x mass" pair per line, '#' starts a comment.
LatticeDistribution load_law_file(const std::string& path);
void save_law_file(const LatticeDistribution& d, const std::string& path);

}  // namespace ot1d
