#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ot1d/cumulants.hpp"
#include "ot1d/families.hpp"
#include "ot1d/lattice.hpp"

using namespace ot1d;

TEST_CASE("sign-draw cumulants from the log cosh series") {
  // log cosh z = z^2/2 - z^4/12 + z^6/45 - ...
  const auto c = cumulants_upto(rademacher(), 6);
  REQUIRE(c.value.size() == 6);
  CHECK(c.value[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(c.value[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.value[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(c.value[3] == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(c.value[4] == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  CHECK(c.value[5] == doctest::Approx(16.0).epsilon(1e-12));
  for (bool ok : c.reliable) CHECK(ok);
}

TEST_CASE("centered poisson cumulants are all lambda") {
  const auto d = poisson_window(3.0, 0, 60, true);
  const auto c = cumulants_upto(d, 6);
  CHECK(std::fabs(c.value[0]) <= 1e-10);
  for (int m = 2; m <= 6; ++m)
    CHECK(c.value[static_cast<std::size_t>(m - 1)] ==
          doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("cumulant conditioning is reported") {
  const auto c = cumulants_upto(poisson_window(100.0, 0, 400, true), 8);
  REQUIRE(c.condition.size() == 8);
  // high orders of a wide law cancel heavily but stay within the limit
  CHECK(c.condition[7] > 1e3);
  CHECK(c.condition[7] < 1e12);
  CHECK(c.reliable[7]);
  CHECK_THROWS(cumulants_upto(rademacher(), 17));
  CHECK_THROWS(cumulants_upto(rademacher(), 1));
}

TEST_CASE("statulevicius estimate for poisson laws is one third") {
  for (double lambda : {1.0, 10.0, 100.0}) {
    const auto cert = statulevicius_tau(poisson_centered(lambda, 1e-15), 8);
    CHECK(cert.tau_estimate == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    // the third-order constraint is the binding one
    CHECK(cert.order_constraints.front().order == 3);
    CHECK(cert.order_constraints.front().min_tau ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
}

TEST_CASE("statulevicius estimate for a sign draw") {
  const auto cert = statulevicius_tau(rademacher(), 4);
  CHECK(cert.tau_estimate == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
  REQUIRE(cert.order_constraints.size() == 2);
  CHECK(cert.order_constraints[0].min_tau == doctest::Approx(0.0).scale(1.0));
  CHECK(cert.order_constraints[1].order == 4);
}

TEST_CASE("statulevicius estimate scales like the law") {
  const auto d = binomial_centered(12, 0.3);
  const double t0 = statulevicius_tau(d, 8).tau_estimate;
  const double t1 = statulevicius_tau(affine(d, 2.7, 0.0), 8).tau_estimate;
  CHECK(t1 == doctest::Approx(2.7 * t0).epsilon(1e-9));

  const auto n = rademacher_sum(25, true);
  CHECK(statulevicius_tau(n, 4).tau_estimate ==
        doctest::Approx(1.0 / (std::sqrt(6.0) * 5.0)).epsilon(1e-9));
}

TEST_CASE("bernstein moment estimate") {
  const auto cert = bernstein_tau_1d(rademacher(), 4);
  CHECK(cert.tau_estimate ==
        doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));

  // a law bounded by tau0 satisfies the moment condition at tau0
  const double tau0 = 0.35;
  const auto b = affine(bernoulli_centered(0.5), 2.0 * tau0, 0.0);
  CHECK(bernstein_tau_1d(b, 8).tau_estimate <= tau0 * (1.0 + 1e-12));

  CHECK_THROWS(bernstein_tau_1d(make_lattice({0.0, 1.0}, {0.5, 0.5}), 4));
}

TEST_CASE("sakhanenko condition for a sign draw") {
  // lhs = e^{1/tau}, rhs = tau: holds iff tau >= 1.7632...
  const auto yes = sakhanenko_holds(rademacher(), 2.0);
  CHECK(yes.holds);
  CHECK(yes.lhs == doctest::Approx(std::exp(0.5)).epsilon(1e-13));
  CHECK(yes.rhs == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(yes.margin == doctest::Approx(std::exp(0.5) / 2.0).epsilon(1e-12));

  CHECK_FALSE(sakhanenko_holds(rademacher(), 1.0).holds);
  CHECK(sakhanenko_holds(rademacher(), 1.764).holds);
  CHECK_FALSE(sakhanenko_holds(rademacher(), 1.762).holds);
  CHECK_THROWS(sakhanenko_holds(rademacher(), 0.0));
}

TEST_CASE("cauchy third derivative matches closed forms on the real axis") {
  const auto r = rademacher();
  for (double z : {-1.2, -0.5, 0.0, 0.3, 0.9}) {
    const auto d3 = cgf_third_derivative(r, {z, 0.0}, 0.4, 512);
    const double expect =
        -2.0 * std::tanh(z) / (std::cosh(z) * std::cosh(z));
    CHECK(d3.real() == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
    CHECK(std::fabs(d3.imag()) <= 1e-9);
  }

  const auto p = poisson_window(2.0, 0, 100, true);
  for (double z : {-0.8, 0.0, 0.5, 1.0}) {
    const auto d3 = cgf_third_derivative(p, {z, 0.0}, 0.3, 512);
    CHECK(d3.real() == doctest::Approx(2.0 * std::exp(z)).epsilon(1e-8));
  }
}

TEST_CASE("cauchy third derivative detects a non-analytic disk") {
  // cosh has a zero at i pi/2; a circle of radius 2 around 0 encloses it
  CHECK_THROWS(cgf_third_derivative(rademacher(), {0.0, 0.0}, 2.0, 512));
  CHECK_THROWS(cgf_third_derivative(rademacher(), {0.0, 0.0}, 0.5, 128));
  CHECK_THROWS(cgf_third_derivative(rademacher(), {0.0, 0.0}, 0.0, 512));
}

TEST_CASE("analyticity grid check for poisson laws") {
  const auto p = poisson_window(2.0, 0, 100, true);
  // |phi'''(z)|/sigma^2 = e^{Re z}; at tau=1 the grid maximum is e^{0.99}
  const auto cert = a1_grid_check(p, 1.0, {0.25, 0.5, 0.99}, 16, 512);
  REQUIRE(cert.order_constraints.size() == 3 * 16);
  CHECK_FALSE(*cert.holds);
  CHECK(cert.tau_estimate == doctest::Approx(std::exp(0.99)).epsilon(1e-6));

  // every grid entry matches the closed form; enumeration is radial-major
  int idx = 0;
  for (double f : {0.25, 0.5, 0.99}) {
    for (int j = 0; j < 16; ++j) {
      const double th = 2.0 * std::numbers::pi * j / 16.0;
      const double expect = std::exp(f * std::cos(th));
      CHECK(cert.order_constraints[static_cast<std::size_t>(idx)].min_tau ==
            doctest::Approx(expect).epsilon(1e-8));
      ++idx;
    }
  }

  const auto ok = a1_grid_check(p, 2.8, {0.25, 0.5, 0.99}, 16, 512);
  CHECK(*ok.holds);
  CHECK(*ok.holds_at == doctest::Approx(2.8));
}

TEST_CASE("analyticity grid check flags a sign draw near its singularity") {
  // phi''' of log cosh blows up toward i pi/2, so tau = 1 fails...
  const auto bad = a1_grid_check(rademacher(), 1.0, {0.99}, 8, 512);
  CHECK_FALSE(*bad.holds);
  CHECK(bad.tau_estimate > 5.0);
  // ...while tau = 3 keeps the disk |z| <= 1/3 comfortably analytic
  const auto good = a1_grid_check(rademacher(), 3.0, {0.25, 0.5, 0.99}, 16, 512);
  CHECK(*good.holds);
}

TEST_CASE("certificates serialize to json") {
  const auto cert = statulevicius_tau(rademacher(), 4);
  const std::string j = cert.to_json();
  CHECK(j.find("\"statulevicius\"") != std::string::npos);
  CHECK(j.find("tau_estimate") != std::string::npos);
  const auto grid = a1_grid_check(poisson_window(2.0, 0, 60, true), 2.8,
                                  {0.5}, 8, 512);
  CHECK(grid.to_json().find("angular_count") != std::string::npos);
}
