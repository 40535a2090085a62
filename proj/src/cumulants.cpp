#include "ot1d/cumulants.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ot1d/kahan.hpp"

#include "json.hpp"

namespace ot1d {

namespace {

void check_order(int M) {
  if (M < 2) throw std::invalid_argument("cumulants: order must be >= 2");
  if (M > kMaxCumulantOrder)
    throw std::invalid_argument("cumulants: order cap is 16");
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

CumulantDiagnostics cumulants_upto(const LatticeDistribution& d, int M) {
  check_order(M);
  const std::vector<double> mu = d.raw_moments(M);
  CumulantDiagnostics out;
  out.value.resize(static_cast<std::size_t>(M));
  out.condition.resize(static_cast<std::size_t>(M));
  out.reliable.resize(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) {
    KahanSum acc;
    double max_term = std::fabs(mu[static_cast<std::size_t>(m)]);
    acc.add(mu[static_cast<std::size_t>(m)]);
    for (int k = 1; k <= m - 1; ++k) {
      const double term = binom(m - 1, k - 1) *
                          out.value[static_cast<std::size_t>(k - 1)] *
                          mu[static_cast<std::size_t>(m - k)];
      acc.add(-term);
      max_term = std::max(max_term, std::fabs(term));
    }
    const double g = acc.value();
    const std::size_t idx = static_cast<std::size_t>(m - 1);
    out.value[idx] = g;
    out.condition[idx] = (g != 0.0) ? max_term / std::fabs(g)
                                    : (max_term > 0.0
                                           ? std::numeric_limits<double>::infinity()
                                           : 0.0);
    out.reliable[idx] = out.condition[idx] <= kCumulantConditionLimit;
  }
  return out;
}

ClassCertificate statulevicius_tau(const LatticeDistribution& d, int M) {
  check_order(M);
  if (!(d.variance() > 0.0))
    throw std::domain_error("statulevicius_tau: degenerate distribution");
  const CumulantDiagnostics cum = cumulants_upto(d, M);
  const double g2 = cum.value[1];
  if (!(g2 > 0.0))
    throw std::domain_error("statulevicius_tau: nonpositive second cumulant");

  ClassCertificate cert;
  cert.class_name = "statulevicius";
  cert.max_order = M;
  for (int m = 3; m <= M; ++m) {
    const double gm = cum.value[static_cast<std::size_t>(m - 1)];
    const double tau_m =
        std::pow(2.0 * std::fabs(gm) / (factorial(m) * g2),
                 1.0 / static_cast<double>(m - 2));
    cert.order_constraints.push_back(
        {m, tau_m, cum.condition[static_cast<std::size_t>(m - 1)]});
    cert.tau_estimate = std::max(cert.tau_estimate, tau_m);
  }
  return cert;
}

ClassCertificate bernstein_tau_1d(const LatticeDistribution& d, int M) {
  check_order(M);
  if (std::fabs(d.mean()) >
      1e-10 * std::max(1.0, std::sqrt(d.variance())))
    throw std::domain_error("bernstein_tau_1d: law must be centered");
  const std::vector<double> mu = d.raw_moments(M);
  const double m2 = mu[2];
  if (!(m2 > 0.0))
    throw std::domain_error("bernstein_tau_1d: degenerate distribution");

  ClassCertificate cert;
  cert.class_name = "bernstein";
  cert.max_order = M;
  for (int m = 3; m <= M; ++m) {
    const double tau_m =
        std::pow(2.0 * std::fabs(mu[static_cast<std::size_t>(m)]) /
                     (factorial(m) * m2),
                 1.0 / static_cast<double>(m - 2));
    cert.order_constraints.push_back({m, tau_m, 0.0});
    cert.tau_estimate = std::max(cert.tau_estimate, tau_m);
  }
  return cert;
}

SakhanenkoResult sakhanenko_holds(const LatticeDistribution& d, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("sakhanenko: tau must be > 0");
  KahanSum lhs, m2;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = std::fabs(d.support()[i]);
    const double w = d.mass()[i];
    lhs.add(w * x * x * x * std::exp(x / tau));
    m2.add(w * d.support()[i] * d.support()[i]);
  }
  SakhanenkoResult r;
  r.lhs = lhs.value();
  r.rhs = tau * m2.value();
  r.margin = (r.rhs > 0.0) ? r.lhs / r.rhs
                           : std::numeric_limits<double>::infinity();
  r.holds = r.lhs <= r.rhs;
  return r;
}

std::complex<double> cgf_third_derivative(const LatticeDistribution& d,
                                          std::complex<double> z,
                                          double circle_radius, int nodes) {
  if (!(circle_radius > 0.0))
    throw std::invalid_argument("cgf_third_derivative: radius must be > 0");
  if (nodes < 256)
    throw std::invalid_argument("cgf_third_derivative: need >= 256 nodes");

  // phi'''(z) = (3!/2 pi i) \oint phi(w)/(w-z)^4 dw
  //           = (3 / pi r^3) \int_0^{2pi} phi(z + r e^{i t}) e^{-3 i t} dt / 2
  // Trapezoid quadrature on the periodic integrand is spectrally accurate.
  // The principal-branch log can jump by 2 pi i along the circle, so the
  // imaginary part is unwound node to node; failure of the unwound branch
  // to close means the mgf has a zero inside the circle and the cgf is not
  // analytic on the evaluation disk.
  const double two_pi = 2.0 * std::numbers::pi;
  KahanSum acc_re, acc_im;
  double prev_im = 0.0;
  double first_im = 0.0;
  double wind = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double t = two_pi * j / nodes;
    const std::complex<double> w =
        z + circle_radius * std::complex<double>(std::cos(t), std::sin(t));
    std::complex<double> phi = d.cgf(w);
    if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag()))
      throw std::runtime_error("cgf_third_derivative: non-finite cgf value");
    double im = phi.imag() + wind;
    if (j == 0) {
      first_im = im;
    } else {
      while (im - prev_im > std::numbers::pi) {
        im -= two_pi;
        wind -= two_pi;
      }
      while (im - prev_im < -std::numbers::pi) {
        im += two_pi;
        wind += two_pi;
      }
    }
    prev_im = im;
    const std::complex<double> val(phi.real(), im);
    const std::complex<double> rot(std::cos(3.0 * t), -std::sin(3.0 * t));
    const std::complex<double> term = val * rot;
    acc_re.add(term.real());
    acc_im.add(term.imag());
  }
  // Closure check: continue the unwinding to the first node.
  {
    const std::complex<double> w0 = z + circle_radius;
    double im = d.cgf(w0).imag() + wind;
    while (im - prev_im > std::numbers::pi) im -= two_pi;
    while (im - prev_im < -std::numbers::pi) im += two_pi;
    if (std::fabs(im - first_im) > 1e-6)
      throw std::runtime_error(
          "cgf_third_derivative: branch fails to close; cgf not analytic on "
          "the evaluation circle");
  }
  const std::complex<double> mean(acc_re.value() / nodes,
                                  acc_im.value() / nodes);
  const double r3 = circle_radius * circle_radius * circle_radius;
  return 6.0 * mean / r3;
}

ClassCertificate a1_grid_check(const LatticeDistribution& d, double tau,
                               std::vector<double> radial_fracs,
                               int angular_count, int quadrature_nodes) {
  if (!(tau > 0.0)) throw std::invalid_argument("a1_grid_check: tau must be > 0");
  if (radial_fracs.empty() || angular_count < 1)
    throw std::invalid_argument("a1_grid_check: empty grid");
  for (double f : radial_fracs)
    if (!(f > 0.0 && f < 1.0))
      throw std::invalid_argument(
          "a1_grid_check: radial fractions must lie in (0,1)");
  const double sigma2 = d.variance();
  if (!(sigma2 > 0.0))
    throw std::domain_error("a1_grid_check: degenerate distribution");

  ClassCertificate cert;
  cert.class_name = "a1_grid";
  cert.holds_at = tau;
  A1GridInfo info;
  info.radial_fracs = radial_fracs;
  info.angular_count = angular_count;
  info.quadrature_nodes = quadrature_nodes;
  info.tau = tau;

  const double two_pi = 2.0 * std::numbers::pi;
  int idx = 0;
  double max_ratio = 0.0;
  for (double f : radial_fracs) {
    const double rz = f / tau;
    const double to_boundary = (1.0 / tau) - rz;
    const double radius = std::min(0.005 / tau, 0.5 * to_boundary);
    for (int j = 0; j < angular_count; ++j) {
      const double th = two_pi * j / angular_count;
      const std::complex<double> z(rz * std::cos(th), rz * std::sin(th));
      const std::complex<double> d3 =
          cgf_third_derivative(d, z, radius, quadrature_nodes);
      const double point_tau = std::abs(d3) / sigma2;
      cert.order_constraints.push_back({idx, point_tau, 0.0});
      max_ratio = std::max(max_ratio, point_tau);
      ++idx;
    }
  }
  cert.max_order = idx;
  cert.tau_estimate = max_ratio;
  cert.holds = max_ratio <= tau;
  cert.grid = info;
  return cert;
}

std::string ClassCertificate::to_json() const {
  nlohmann::json j;
  j["class"] = class_name;
  j["tau_estimate"] = tau_estimate;
  j["max_order"] = max_order;
  if (holds_at) j["holds_at"] = *holds_at;
  if (holds) j["holds"] = *holds;
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : order_constraints) {
    nlohmann::json e;
    e["order"] = c.order;
    e["min_tau"] = c.min_tau;
    if (c.condition > 0.0) e["condition"] = c.condition;
    cons.push_back(e);
  }
  j["order_constraints"] = cons;
  if (grid) {
    j["grid"] = {{"radial_fracs", grid->radial_fracs},
                 {"angular_count", grid->angular_count},
                 {"quadrature_nodes", grid->quadrature_nodes},
                 {"tau", grid->tau}};
  }
  return j.dump(2);
}

}  // namespace ot1d
