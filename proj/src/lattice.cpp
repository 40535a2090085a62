#include "ot1d/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ot1d/kahan.hpp"
#include "ot1d/normal.hpp"

namespace ot1d {

namespace {

constexpr double kSupportMergeRelTol = 1e-12;

double merge_eps(double x) {
  return kSupportMergeRelTol * std::max(1.0, std::fabs(x));
}

// Sorted (x, w) pairs -> merged strictly increasing support. Points closer
// than the relative merge tolerance collapse to their mass-weighted mean.
void merge_sorted_atoms(std::vector<double>& xs, std::vector<double>& ws) {
  std::size_t out = 0;
  std::size_t i = 0;
  const std::size_t n = xs.size();
  while (i < n) {
    double x = xs[i];
    double w = ws[i];
    std::size_t j = i + 1;
    while (j < n && xs[j] - xs[j - 1] <= merge_eps(xs[j])) {
      const double wj = ws[j];
      const double tot = w + wj;
      if (tot > 0.0) x += (xs[j] - x) * (wj / tot);
      w = tot;
      ++j;
    }
    xs[out] = x;
    ws[out] = w;
    ++out;
    i = j;
  }
  xs.resize(out);
  ws.resize(out);
}

}  // namespace

LatticeDistribution LatticeDistribution::finalize(std::vector<double> support,
                                                  std::vector<double> mass,
                                                  double mass_tolerance,
                                                  bool drop_small) {
  if (support.size() != mass.size())
    throw std::invalid_argument("lattice: support/mass size mismatch");
  if (support.empty()) throw std::invalid_argument("lattice: empty support");
  if (mass_tolerance < 0.0)
    throw std::invalid_argument("lattice: negative mass tolerance");
  for (double x : support)
    if (!std::isfinite(x))
      throw std::invalid_argument("lattice: non-finite support point");
  for (double w : mass) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("lattice: masses must be finite and >= 0");
  }

  merge_sorted_atoms(support, mass);

  // Drop zero (and, for user input, sub-tolerance) atoms.
  const double floor = drop_small ? mass_tolerance : 0.0;
  std::size_t out = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (mass[i] > floor) {
      support[out] = support[i];
      mass[out] = mass[i];
      ++out;
    }
  }
  support.resize(out);
  mass.resize(out);
  if (support.empty())
    throw std::invalid_argument("lattice: no mass left after truncation");

  KahanSum total;
  for (double w : mass) total.add(w);
  const double z = total.value();
  if (!(z > 0.0)) throw std::invalid_argument("lattice: zero total mass");
  for (double& w : mass) w /= z;

  LatticeDistribution d;
  d.support_ = std::move(support);
  d.mass_ = std::move(mass);
  d.mass_tolerance_ = mass_tolerance;

  const std::size_t n = d.support_.size();
  d.cum_.resize(n);
  d.tail_.resize(n);
  KahanSum lo;
  for (std::size_t i = 0; i < n; ++i) {
    lo.add(d.mass_[i]);
    d.cum_[i] = std::min(lo.value(), 1.0);
  }
  KahanSum hi;
  for (std::size_t i = n; i-- > 0;) {
    hi.add(d.mass_[i]);
    d.tail_[i] = std::min(hi.value(), 1.0);
  }

  KahanSum m1;
  for (std::size_t i = 0; i < n; ++i) m1.add(d.mass_[i] * d.support_[i]);
  d.mean_ = m1.value();
  KahanSum m2;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = d.support_[i] - d.mean_;
    m2.add(d.mass_[i] * c * c);
  }
  d.variance_ = m2.value();
  return d;
}

LatticeDistribution LatticeDistribution::make(std::vector<double> support,
                                              std::vector<double> mass,
                                              double mass_tolerance) {
  if (support.size() != mass.size())
    throw std::invalid_argument("lattice: support/mass size mismatch");
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  std::vector<double> xs(support.size()), ws(support.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    xs[i] = support[order[i]];
    ws[i] = mass[order[i]];
  }
  return finalize(std::move(xs), std::move(ws), mass_tolerance, true);
}

LatticeDistribution LatticeDistribution::from_sorted(std::vector<double> support,
                                                     std::vector<double> mass,
                                                     double mass_tolerance) {
  for (std::size_t i = 1; i < support.size(); ++i)
    if (!(support[i] >= support[i - 1]))
      throw std::invalid_argument("lattice: support not sorted");
  return finalize(std::move(support), std::move(mass), mass_tolerance, false);
}

double LatticeDistribution::cdf(double x) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double LatticeDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("lattice quantile: u outside (0,1)");
  auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) return support_.back();
  return support_[static_cast<std::size_t>(it - cum_.begin())];
}

std::vector<double> LatticeDistribution::raw_moments(int k_max) const {
  if (k_max < 0) throw std::invalid_argument("raw_moments: negative order");
  std::vector<KahanSum> acc(static_cast<std::size_t>(k_max) + 1);
  for (std::size_t i = 0; i < support_.size(); ++i) {
    double p = mass_[i];
    acc[0].add(p);
    for (int k = 1; k <= k_max; ++k) {
      p *= support_[i];
      acc[static_cast<std::size_t>(k)].add(p);
    }
  }
  std::vector<double> out(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = acc[k].value();
  return out;
}

std::complex<double> LatticeDistribution::cgf(std::complex<double> z) const {
  // log sum m_i exp(z x_i), shifted by max Re(z x) to avoid overflow.
  double shift = -std::numeric_limits<double>::infinity();
  const double re = z.real();
  for (double x : support_) shift = std::max(shift, re * x);
  KahanSum sre, sim;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const std::complex<double> t = std::exp(z * support_[i] - shift);
    sre.add(mass_[i] * t.real());
    sim.add(mass_[i] * t.imag());
  }
  const std::complex<double> s(sre.value(), sim.value());
  return shift + std::log(s);
}

GaussianLaw::GaussianLaw(double mean, double variance)
    : mean_(mean), variance_(variance) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
    throw std::invalid_argument("GaussianLaw: variance must be positive");
  sigma_ = std::sqrt(variance);
}

double GaussianLaw::cdf(double x) const {
  return normal::cdf((x - mean_) / sigma_);
}

double GaussianLaw::quantile(double u) const {
  return mean_ + sigma_ * normal::quantile(u);
}

double GaussianLaw::density(double x) const {
  return normal::pdf((x - mean_) / sigma_) / sigma_;
}

LatticeDistribution make_lattice(std::vector<double> support,
                                 std::vector<double> mass,
                                 double mass_tolerance) {
  return LatticeDistribution::make(std::move(support), std::move(mass),
                                   mass_tolerance);
}

namespace {

// Detect an arithmetic-progression support (binomial-type lattices); those
// convolve into dense index space without any sorting.
bool arithmetic_step(const std::vector<double>& xs, double& step) {
  if (xs.size() < 2) {
    step = 1.0;
    return true;
  }
  const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  if (!(h > 0.0)) return false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ideal = xs.front() + h * static_cast<double>(i);
    if (std::fabs(xs[i] - ideal) > merge_eps(ideal)) return false;
  }
  step = h;
  return true;
}

}  // namespace

LatticeDistribution convolve(const LatticeDistribution& a,
                             const LatticeDistribution& b,
                             std::size_t max_pairs) {
  const std::size_t na = a.size(), nb = b.size();
  if (na * nb > max_pairs)
    throw std::length_error("convolve: support pair count exceeds limit");

  double ha = 0.0, hb = 0.0;
  if (arithmetic_step(a.support(), ha) && arithmetic_step(b.support(), hb) &&
      (na == 1 || nb == 1 || std::fabs(ha - hb) <= merge_eps(ha))) {
    const double h = (na > 1) ? ha : hb;
    const std::size_t n = na + nb - 1;
    std::vector<double> w(n, 0.0), carry(n, 0.0);
    for (std::size_t i = 0; i < na; ++i) {
      const double wa = a.mass()[i];
      for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t k = i + j;
        const double y = wa * b.mass()[j] - carry[k];
        const double t = w[k] + y;
        carry[k] = (t - w[k]) - y;
        w[k] = t;
      }
    }
    const double x0 = a.min_support() + b.min_support();
    std::vector<double> xs(n);
    for (std::size_t k = 0; k < n; ++k)
      xs[k] = x0 + h * static_cast<double>(k);
    return LatticeDistribution::from_sorted(
        std::move(xs), std::move(w),
        std::max(a.mass_tolerance(), b.mass_tolerance()));
  }

  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      atoms.emplace_back(a.support()[i] + b.support()[j],
                         a.mass()[i] * b.mass()[j]);
  std::sort(atoms.begin(), atoms.end());
  std::vector<double> xs(atoms.size()), ws(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    xs[k] = atoms[k].first;
    ws[k] = atoms[k].second;
  }
  return LatticeDistribution::from_sorted(
      std::move(xs), std::move(ws),
      std::max(a.mass_tolerance(), b.mass_tolerance()));
}

LatticeDistribution power_convolve(const LatticeDistribution& d, long n,
                                   std::size_t max_pairs) {
  if (n < 1) throw std::invalid_argument("power_convolve: n must be >= 1");
  LatticeDistribution base = d;
  LatticeDistribution acc = d;
  bool have = false;
  while (n > 0) {
    if (n & 1) {
      acc = have ? convolve(acc, base, max_pairs) : base;
      have = true;
    }
    n >>= 1;
    if (n > 0) base = convolve(base, base, max_pairs);
  }
  return acc;
}

LatticeDistribution affine(const LatticeDistribution& d, double scale,
                           double shift) {
  if (scale == 0.0 || !std::isfinite(scale) || !std::isfinite(shift))
    throw std::invalid_argument("affine: scale must be nonzero and finite");
  const std::size_t n = d.size();
  std::vector<double> xs(n), ws(n);
  if (scale > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = scale * d.support()[i] + shift;
      ws[i] = d.mass()[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = scale * d.support()[n - 1 - i] + shift;
      ws[i] = d.mass()[n - 1 - i];
    }
  }
  return LatticeDistribution::from_sorted(std::move(xs), std::move(ws),
                                          d.mass_tolerance());
}

double cdf_eval(const Law& law, double x) {
  return std::visit([&](const auto& l) { return l.cdf(x); }, law);
}

double quantile_eval(const Law& law, double u) {
  return std::visit([&](const auto& l) { return l.quantile(u); }, law);
}

std::vector<double> moments(const LatticeDistribution& d, int k_max) {
  return d.raw_moments(k_max);
}

std::complex<double> cgf_eval(const LatticeDistribution& d,
                              std::complex<double> z) {
  return d.cgf(z);
}

GaussianLaw gaussian_companion(const LatticeDistribution& d) {
  if (!(d.variance() > 0.0))
    throw std::domain_error("gaussian_companion: degenerate distribution");
  return GaussianLaw(d.mean(), d.variance());
}

double mean_of(const Law& law) {
  return std::visit([](const auto& l) { return l.mean(); }, law);
}

double variance_of(const Law& law) {
  return std::visit([](const auto& l) { return l.variance(); }, law);
}

LatticeDistribution load_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open law file: " + path);
  std::vector<double> xs, ws;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, w;
    if (!(ls >> x)) continue;  // blank or comment-only line
    if (!(ls >> w)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'x mass' pair");
    }
    double extra;
    if (ls >> extra)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": trailing fields");
    xs.push_back(x);
    ws.push_back(w);
  }
  if (xs.empty()) throw std::runtime_error(path + ": no atoms found");
  return make_lattice(std::move(xs), std::move(ws));
}

void save_law_file(const LatticeDistribution& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write law file: " + path);
  out.precision(17);
  for (std::size_t i = 0; i < d.size(); ++i)
    out << d.support()[i] << ' ' << d.mass()[i] << '\n';
}

}  // namespace ot1d
