#pragma once

#include <cmath>
#include <stdexcept>

// Adaptive Simpson quadrature with a running error estimate. The local
// acceptance test is the classical |S2 - S1| <= 15 tol with Richardson
// extrapolation of the accepted panel; the error field accumulates the
// extrapolation corrections, which bounds the true error well for the
// smooth integrands used here.

namespace ot1d::quad {

struct Accum {
  double value = 0.0;
  double error = 0.0;
  long evals = 0;
};

namespace detail {

template <class F>
void step(const F& f, double a, double b, double fa, double fm, double fb,
          double whole, double tol, int depth, Accum& acc) {
  if (acc.evals > 4'000'000)
    throw std::runtime_error("adaptive quadrature: refinement cap exceeded");
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  acc.evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    acc.value += left + right + delta / 15.0;
    acc.error += std::fabs(delta) / 15.0;
    return;
  }
  step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
  step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

template <class F>
void integrate(const F& f, double a, double b, double tol, Accum& acc) {
  if (!(b > a)) return;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  acc.evals += 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::step(f, a, b, fa, fm, fb, whole, tol, 30, acc);
}

// Integrate over [a,b], splitting at an interior kink if there is one.
template <class F>
void integrate_kink(const F& f, double a, double b, double kink, double tol,
                    Accum& acc) {
  if (kink > a && kink < b) {
    integrate(f, a, kink, 0.5 * tol, acc);
    integrate(f, kink, b, 0.5 * tol, acc);
  } else {
    integrate(f, a, b, tol, acc);
  }
}

}  // namespace ot1d::quad
