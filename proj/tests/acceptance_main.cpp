// Acceptance gate for the toolkit: twelve headline checks, one line each.
// Every tolerance and regression constant is pinned here, next to its
// check. The binary exits with the number of failed criteria, so a zero
// exit is the green light.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ot1d/bounds.hpp"
#include "ot1d/cumulants.hpp"
#include "ot1d/families.hpp"
#include "ot1d/lattice.hpp"
#include "ot1d/sweep.hpp"
#include "ot1d/tilt.hpp"
#include "ot1d/transport.hpp"

using namespace ot1d;

namespace {

// Regression locks: measured on the first verified run of this suite and
// frozen with ~5 percent headroom. A failure here means the numbers moved.
constexpr double kOrliczPoissonCeiling = 0.64;   // criterion 3, C* (measured 0.609)
constexpr double kCouplingC7Ceiling = 1.28;      // criterion 11 (measured 1.213)
constexpr double kCouplingC11Ceiling = 0.32;     // criterion 11 (measured 0.303)
constexpr double kLevyRateCeiling = 0.29;        // criterion 12, C_L (measured 0.268)

int g_failures = 0;

// Criterion 12 rides on the same sweep as 5 and 6 but must print last to
// keep the output in criterion order; the shared driver parks it here.
bool g_c12_ok = false;
std::string g_c12_detail = "not run";

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(int idx, const char* what, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, what,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::vector<LatticeDistribution> route_families() {
  return {
      binomial_centered(10, 0.5),
      binomial_centered(30, 0.3),
      binomial_centered(64, 0.5, true),
      binomial_centered(256, 0.7, true),
      poisson_centered(1.0),
      poisson_centered(4.0),
      poisson_centered(25.0),
      poisson_centered(100.0),
      rademacher_sum(1, true),
      rademacher_sum(16, true),
      rademacher_sum(256, true),
      rademacher_sum(1024, true),
  };
}

// criterion 1: the CDF-space and quantile-space W1 routes agree within
// max(1e-8, 1e-6 * value) on twelve families, in under 10 seconds.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  double max_gap = 0.0;
  int done = 0;
  try {
    for (const auto& law : route_families()) {
      const auto r = w1_distance(Law(law), Law(gaussian_companion(law)));
      if (!(std::isfinite(r.value) && r.value >= 0.0 && r.has_cross_check))
        throw std::runtime_error("malformed transport result");
      const double gap = std::fabs(r.value - r.cross_check);
      if (gap > std::max(1e-8, 1e-6 * r.value))
        throw std::runtime_error("route gap above tolerance");
      max_gap = std::max(max_gap, gap);
      ++done;
    }
    const double el = seconds_since(t0);
    report(1, "w1 route agreement across 12 families",
           done == 12 && el < 10.0,
           fmt("max gap %.3g, %.2fs", max_gap, el));
  } catch (const std::exception& e) {
    report(1, "w1 route agreement across 12 families", false,
           fmt("failed after %d families: %s", done, e.what()));
  }
}

// criterion 2: the quantile coupling matches the exact LP optimum for
// convex costs on 50 seeded random pairs, within 1e-8, in under 30 seconds.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> nd(2, 12);
  std::uniform_real_distribution<double> xd(-3.0, 3.0);
  std::uniform_real_distribution<double> wd(0.05, 1.0);
  const auto draw = [&]() {
    const int k = nd(rng);
    std::vector<double> xs;
    while (static_cast<int>(xs.size()) < k) {
      const double x = xd(rng);
      bool clear = true;
      for (double y : xs)
        if (std::fabs(x - y) < 1e-3) clear = false;
      if (clear) xs.push_back(x);
    }
    std::vector<double> ws(xs.size());
    for (double& w : ws) w = wd(rng);
    return make_lattice(std::move(xs), std::move(ws));
  };
  const std::vector<std::function<double(double)>> costs = {
      [](double d) { return d; },
      [](double d) { return d * d; },
      [](double d) { return std::expm1(d); },
  };
  double worst = 0.0;
  int checked = 0;
  try {
    for (int pair = 0; pair < 50; ++pair) {
      const auto mu = draw();
      const auto nu = draw();
      for (const auto& c : costs) {
        const double gap =
            std::fabs(comonotone_cost(mu, nu, c) - discrete_ot_oracle(mu, nu, c));
        worst = std::max(worst, gap);
        if (gap > 1e-8) throw std::runtime_error("coupling is not optimal");
        ++checked;
      }
    }
    const double el = seconds_since(t0);
    report(2, "quantile coupling equals the LP optimum (50 pairs x 3 costs)",
           checked == 150 && el < 30.0,
           fmt("max |gap| %.3g, %.2fs", worst, el));
  } catch (const std::exception& e) {
    report(2, "quantile coupling equals the LP optimum (50 pairs x 3 costs)",
           false, fmt("after %d checks: %s", checked, e.what()));
  }
}

// criterion 3: the exponential-gauge distance to the companion stays
// bounded along a poisson sweep (no growth past lambda = 10, plus an
// absolute regression ceiling), in under 5 minutes.
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.kind = "poisson";
  cfg.lambda_grid = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  cfg.metrics = {"wpsi"};
  cfg.psi = "exp";
  cfg.threads = 4;
  cfg.plateau_reference_param = 10.0;
  cfg.assertions = {{"wpsi_plateau_cap", 1.25},
                    {"max_wpsi", kOrliczPoissonCeiling}};
  try {
    const auto out = run_sweep(cfg);
    const double el = seconds_since(t0);
    bool ok = out.summary.all_rows_ok && out.summary.all_assertions_pass &&
              el < 300.0;
    std::string detail;
    for (const auto& a : out.summary.assertions)
      detail += fmt("%s %.4g<=%.4g%s ", a.name.c_str(), a.observed, a.bound,
                    a.pass ? "" : " VIOLATED");
    detail += fmt("%.1fs", el);
    report(3, "orlicz gauge stays bounded along the poisson sweep", ok,
           detail);
  } catch (const std::exception& e) {
    report(3, "orlicz gauge stays bounded along the poisson sweep", false,
           e.what());
  }
}

// criterion 4: for normalized sign sums the scaled column wpsi * sqrt(n)
// is flat within a factor 2 over n = 4..4096, in under 5 minutes.
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.kind = "rademacher_sum";
  cfg.n_grid = {4, 16, 64, 256, 1024, 4096};
  cfg.normalize = true;
  cfg.metrics = {"wpsi"};
  cfg.psi = "exp";
  cfg.threads = 4;
  cfg.assertions = {{"wpsi_scaled_spread", 2.0}};
  try {
    const auto out = run_sweep(cfg);
    const double el = seconds_since(t0);
    const auto& a = out.summary.assertions.at(0);
    report(4, "wpsi decays at the 1/sqrt(n) rate for sign sums",
           out.summary.all_rows_ok && a.pass && el < 300.0,
           fmt("spread of wpsi*sqrt(n): %.4g <= %.4g, %.1fs", a.observed,
               a.bound, el));
  } catch (const std::exception& e) {
    report(4, "wpsi decays at the 1/sqrt(n) rate for sign sums", false,
           e.what());
  }
}

// criteria 5, 6 and 12 share one sweep over normalized sign sums,
// n = 1..4096, tau = 1/sqrt(n).
void criteria_5_6_12() {
  SweepConfig cfg;
  cfg.kind = "rademacher_sum";
  cfg.n_grid = {1, 4, 16, 64, 256, 1024, 4096};
  cfg.normalize = true;
  cfg.metrics = {"rho", "levy", "w1", "smoothing"};
  cfg.threads = 4;
  cfg.assertions = {{"max_w1_over_tau", 3.0},
                    {"max_rho_sigma_over_tau", 2.0},
                    {"smoothing_bounds_rho", 0.0},
                    {"levy_rate_constant", kLevyRateCeiling}};
  try {
    const auto out = run_sweep(cfg);
    const auto& w1a = out.summary.assertions.at(0);
    const auto& rhoa = out.summary.assertions.at(1);
    const auto& smootha = out.summary.assertions.at(2);
    const auto& levya = out.summary.assertions.at(3);
    const bool rows_ok = out.summary.all_rows_ok;
    report(5, "w1 to the companion is at most 3 tau", rows_ok && w1a.pass,
           fmt("max w1/tau %.4g <= 3 over n = 1..4096", w1a.observed));
    report(6, "kolmogorov is at most 2 tau/sigma and the smoothing bound holds",
           rows_ok && rhoa.pass && smootha.pass,
           fmt("max rho*sigma/tau %.4g <= 2, max rho-smoothing %.3g <= 0",
               rhoa.observed, smootha.observed));
    g_c12_ok = rows_ok && levya.pass;
    g_c12_detail = fmt("max L/(sqrt(tau) log*^{1/4}) %.4g <= %.4g",
                       levya.observed, levya.bound);
  } catch (const std::exception& e) {
    report(5, "w1 to the companion is at most 3 tau", false, e.what());
    report(6, "kolmogorov is at most 2 tau/sigma and the smoothing bound holds",
           false, e.what());
    g_c12_ok = false;
    g_c12_detail = e.what();
  }
}

void criterion_12() {
  report(12, "levy distance obeys the sqrt(tau) log^(1/4) rate", g_c12_ok,
         g_c12_detail);
}

// criterion 7: the two-regime tail envelope holds at multiplier one at
// every atom of coin sums and sign sums, n up to 1000, in under 20 seconds.
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_multiplier = 0.0;
  bool all_hold = true;
  try {
    for (long n : {1L, 10L, 100L, 1000L}) {
      const auto coin = tail_bound_verify(binomial_centered(n, 0.5), 0.5);
      const auto sign = tail_bound_verify(rademacher_sum(n), 1.0);
      all_hold = all_hold && coin.holds && sign.holds &&
                 coin.violations == 0 && sign.violations == 0;
      worst_multiplier = std::max(
          {worst_multiplier, coin.minimal_constant, sign.minimal_constant});
    }
    const double el = seconds_since(t0);
    report(7, "bernstein-type tail envelope holds at multiplier 1",
           all_hold && worst_multiplier <= 1.0 + 1e-12 && el < 20.0,
           fmt("worst multiplier %.4g, %.2fs", worst_multiplier, el));
  } catch (const std::exception& e) {
    report(7, "bernstein-type tail envelope holds at multiplier 1", false,
           e.what());
  }
}

// criterion 8: the mills-ratio / gaussian-shift inequality grid is clean.
void criterion_8() {
  try {
    const auto r = mills_inequality_check();
    report(8, "mills-ratio and gaussian-shift inequalities on the default grid",
           r.holds && r.violations == 0,
           fmt("%zu points, %ld violations, minimal constant %.6f",
               r.points.size(), r.violations, r.minimal_constant));
  } catch (const std::exception& e) {
    report(8, "mills-ratio and gaussian-shift inequalities on the default grid",
           false, e.what());
  }
}

// criterion 9: cumulant-condition estimates hit their closed forms.
void criterion_9() {
  try {
    double worst = 0.0;
    for (double lambda : {1.0, 10.0, 100.0}) {
      const auto cert = statulevicius_tau(poisson_centered(lambda, 1e-15), 8);
      worst = std::max(worst, std::fabs(cert.tau_estimate - 1.0 / 3.0));
    }
    const double sign_gap = std::fabs(
        statulevicius_tau(rademacher(), 4).tau_estimate - 1.0 / std::sqrt(6.0));
    const auto base = binomial_centered(12, 0.3);
    const double t_base = statulevicius_tau(base, 8).tau_estimate;
    const double t_scaled =
        statulevicius_tau(affine(base, 2.7, 0.0), 8).tau_estimate;
    const double equivariance = std::fabs(t_scaled - 2.7 * t_base);
    const bool ok =
        worst <= 1e-9 && sign_gap <= 1e-12 && equivariance <= 1e-9 * t_scaled;
    report(9, "statulevicius tau estimates match closed forms", ok,
           fmt("poisson gap %.2g, sign-draw gap %.2g, equivariance %.2g",
               worst, sign_gap, equivariance));
  } catch (const std::exception& e) {
    report(9, "statulevicius tau estimates match closed forms", false,
           e.what());
  }
}

// criterion 10: exponential tilting solves its closed forms and inverts.
void criterion_10() {
  try {
    const double h_poisson =
        solve_tilt(poisson_window(4.0, 0, 80, true), 2.0).h;
    const double gap_p = std::fabs(h_poisson - std::log(1.5));

    const double h_sign = solve_tilt(rademacher(), 0.8).h;
    const double gap_s = std::fabs(h_sign - std::atanh(0.8));

    const auto tv_between = [](const LatticeDistribution& a,
                               const LatticeDistribution& b) {
      if (a.size() != b.size())
        throw std::runtime_error("tilted support changed size");
      double tv = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        tv += std::fabs(a.mass()[i] - b.mass()[i]);
      return 0.5 * tv;
    };

    // round trip: tilt by h then by -h restores the law in total variation
    const auto d = binomial_centered(20, 0.3);
    const double tv =
        tv_between(esscher_transform(esscher_transform(d, 0.7).tilted, -0.7).tilted, d);

    // rate shift: tilting poisson(4) by log 1.5 gives poisson(6)
    const double tv_rate = tv_between(
        esscher_transform(poisson_window(4.0, 0, 60, false), std::log(1.5)).tilted,
        poisson_window(6.0, 0, 60, false));

    const bool ok =
        gap_p <= 1e-9 && gap_s <= 1e-9 && tv <= 1e-12 && tv_rate <= 1e-10;
    report(10, "esscher tilts solve closed forms and invert", ok,
           fmt("tilt gaps %.2g / %.2g, round-trip tv %.2g, rate-shift tv %.2g",
               gap_p, gap_s, tv, tv_rate));
  } catch (const std::exception& e) {
    report(10, "esscher tilts solve closed forms and invert", false, e.what());
  }
}

// criterion 11: quantile-coupling displacement constants are stable in n
// (within a factor 2) and below their regression ceilings.
void criterion_11() {
  try {
    std::vector<double> c7s, c11s;
    for (long n : {16L, 64L, 256L, 1024L}) {
      const auto law = binomial_centered(n, 0.5, true);
      const double tau = 1.0 / std::sqrt(static_cast<double>(n));
      const auto r = coupling_band_report(law, tau);
      double c7 = -1.0, c11 = -1.0;
      for (const auto& [k, v] : r.named_constants) {
        if (k == "c7") c7 = v;
        if (k == "c11@0.5") c11 = v;
      }
      if (!(c7 > 0.0) || !std::isfinite(c7) || !(c11 > 0.0) ||
          !std::isfinite(c11))
        throw std::runtime_error("missing or non-finite coupling constant");
      c7s.push_back(c7);
      c11s.push_back(c11);
    }
    const auto spread = [](const std::vector<double>& v) {
      double lo = v[0], hi = v[0];
      for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      return hi / lo;
    };
    const double c7_hi = *std::max_element(c7s.begin(), c7s.end());
    const double c11_hi = *std::max_element(c11s.begin(), c11s.end());
    const bool ok = spread(c7s) <= 2.0 && spread(c11s) <= 2.0 &&
                    c7_hi <= kCouplingC7Ceiling &&
                    c11_hi <= kCouplingC11Ceiling;
    report(11, "coupling displacement constants are stable across n", ok,
           fmt("c7 max %.4g spread %.3g, c11 max %.4g spread %.3g", c7_hi,
               spread(c7s), c11_hi, spread(c11s)));
  } catch (const std::exception& e) {
    report(11, "coupling displacement constants are stable across n", false,
           e.what());
  }
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_6_12();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  std::printf("acceptance: %d of 12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
