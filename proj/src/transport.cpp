#include "ot1d/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ot1d/kahan.hpp"
#include "ot1d/normal.hpp"
#include "ot1d/quad.hpp"

#include "json.hpp"

namespace ot1d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Standardized coordinates beyond this carry no double-precision Gaussian
// mass: sf(40) < 1e-349 underflows even after multiplication by any
// polynomially growing integrand. Quadrature pieces are clipped here and
// the discarded remainder is bounded analytically (it is exactly zero in
// double arithmetic).
constexpr double kGaussClip = 40.0;

using QuadAccum = quad::Accum;

// ---------------------------------------------------------------------
// Gaussian CDF antiderivatives.
//   ia(x) = integral_{-inf}^x Phi_{mu,sigma}(y) dy = sigma (t Phi(t) + phi(t))
//   ib(x) = integral_x^{inf} (1 - Phi_{mu,sigma}(y)) dy
//         = sigma (phi(t) - t sf(t)),  t = (x - mu)/sigma.
// Both vanish in their respective tail and stay accurate there because the
// shrinking factor is the CDF tail itself.

double gauss_ia(const GaussianLaw& g, double x) {
  const double t = (x - g.mean()) / g.sigma();
  return g.sigma() * (t * normal::cdf(t) + normal::pdf(t));
}

double gauss_ib(const GaussianLaw& g, double x) {
  const double t = (x - g.mean()) / g.sigma();
  return g.sigma() * (normal::pdf(t) - t * normal::sf(t));
}

// integral_a^b (Phi_{mu,sigma} - c) dx, grouped so that nearby endpoints
// cancel before the constant term is applied.
double ia_minus_c(const GaussianLaw& g, double c, double a, double b) {
  return (gauss_ia(g, b) - gauss_ia(g, a)) - c * (b - a);
}

// integral_a^b |c - Phi_{mu,sigma}(x)| dx for a CDF level c in [0,1].
double seg_abs_cdf(const GaussianLaw& g, double c, double a, double b) {
  if (c <= 0.0) return ia_minus_c(g, c, a, b);
  if (c >= 1.0) return -ia_minus_c(g, c, a, b);
  const double xs = g.mean() + g.sigma() * normal::quantile(c);
  if (xs <= a) return ia_minus_c(g, c, a, b);
  if (xs >= b) return -ia_minus_c(g, c, a, b);
  return ia_minus_c(g, c, xs, b) - ia_minus_c(g, c, a, xs);
}

// ---------------------------------------------------------------------
// Quantile-space partner machinery. A CDF level is carried as the exact
// pair (lower tail, upper tail), each accumulated on its own side, so the
// standardized partner coordinate can always be taken through the smaller
// tail and keeps full relative accuracy arbitrarily far out.

double q_two_sided(double cdf, double sf) {
  if (cdf <= 0.0) return -kInf;
  if (sf <= 0.0) return kInf;
  return (cdf <= sf) ? normal::quantile(cdf) : -normal::quantile(sf);
}

// Standardized partner edges of the atoms of f under the quantile coupling
// with a Gaussian: edge i separates atoms i-1 and i; edges 0 and K are at
// -inf/+inf. Monotonicity is enforced against rounding.
std::vector<double> partner_edges(const LatticeDistribution& f) {
  const std::size_t k = f.size();
  std::vector<double> q(k + 1);
  q[0] = -kInf;
  q[k] = kInf;
  for (std::size_t i = 1; i < k; ++i) {
    q[i] = q_two_sided(f.lower_tail(i - 1), f.upper_tail(i));
    if (q[i] < q[i - 1]) q[i] = q[i - 1];
  }
  return q;
}

// log integral_{tl}^{tu} exp((C + S t)/a) phi(t) dt by completing the
// square; infinite endpoints are legal.
double exp_piece_log(double C, double S, double a, double tl, double tu) {
  const double r = S / a;
  return C / a + 0.5 * r * r + normal::log_cdf_diff(tl - r, tu - r);
}

// integral_{tl}^{tu} (C + S t) phi(t) dt, caller guarantees the integrand
// is nonnegative on the range.
double abs_piece(double C, double S, double tl, double tu) {
  return C * normal::cdf_diff(tl, tu) + S * (normal::pdf(tl) - normal::pdf(tu));
}

// ---------------------------------------------------------------------
// candidate-point sups for Kolmogorov/Levy

double lattice_cdf_left(const LatticeDistribution& d, double x) {
  const auto& s = d.support();
  const auto it = std::lower_bound(s.begin(), s.end(), x);
  if (it == s.begin()) return 0.0;
  return d.lower_tail(static_cast<std::size_t>(it - s.begin()) - 1);
}

double law_cdf(const Law& law, double x) { return cdf_eval(law, x); }

double law_cdf_left(const Law& law, double x) {
  if (const auto* d = std::get_if<LatticeDistribution>(&law))
    return lattice_cdf_left(*d, x);
  return std::get<GaussianLaw>(law).cdf(x);
}

// Real solutions of phi_{m1,s1}(x) = phi_{m2,s2}(x).
std::vector<double> density_crossings(double m1, double s1, double m2,
                                      double s2) {
  std::vector<double> out;
  if (s1 == s2) {
    if (m1 != m2) out.push_back(0.5 * (m1 + m2));
    return out;
  }
  const double i1 = 1.0 / (s1 * s1), i2 = 1.0 / (s2 * s2);
  const double A = i1 - i2;
  const double B = -2.0 * (m1 * i1 - m2 * i2);
  const double C = m1 * m1 * i1 - m2 * m2 * i2 - 2.0 * std::log(s2 / s1);
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) {
    // Two distinct-variance Gaussian densities always cross; a negative
    // discriminant can only be rounding noise at a double root.
    if (disc > -1e-12 * std::fabs(B * B + 4.0 * A * C)) disc = 0.0;
    else return out;
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
  if (q != 0.0) {
    out.push_back(q / A);
    out.push_back(C / q);
  } else {
    out.push_back(-B / (2.0 * A));
  }
  return out;
}

// sup_x [F(x) - G(x + eps)], exact at jump points and their left limits.
double one_sided_excess(const Law& f, const Law& g, double eps) {
  std::vector<double> cand;
  if (const auto* df = std::get_if<LatticeDistribution>(&f))
    cand.insert(cand.end(), df->support().begin(), df->support().end());
  if (const auto* dg = std::get_if<LatticeDistribution>(&g))
    for (double y : dg->support()) cand.push_back(y - eps);
  if (cand.empty()) {
    const auto& gf = std::get<GaussianLaw>(f);
    const auto& gg = std::get<GaussianLaw>(g);
    cand = density_crossings(gf.mean(), gf.sigma(), gg.mean() - eps,
                             gg.sigma());
  }
  double best = 0.0;  // the sup is >= the limit 0 at -inf
  for (double x : cand) {
    best = std::max(best, law_cdf(f, x) - law_cdf(g, x + eps));
    best = std::max(best, law_cdf_left(f, x) - law_cdf_left(g, x + eps));
  }
  return best;
}

bool levy_band_holds(const Law& f, const Law& g, double eps) {
  const double slack = 1e-15;
  return one_sided_excess(f, g, eps) <= eps + slack &&
         one_sided_excess(g, f, eps) <= eps + slack;
}

// ---------------------------------------------------------------------
// W1 routes

// CDF-space route, lattice vs Gaussian: closed-form segment integrals.
double w1_cdf_route(const LatticeDistribution& f, const GaussianLaw& g) {
  const auto& x = f.support();
  const std::size_t k = f.size();
  KahanSum s;
  s.add(gauss_ia(g, x.front()));
  for (std::size_t i = 0; i + 1 < k; ++i)
    s.add(seg_abs_cdf(g, f.lower_tail(i), x[i], x[i + 1]));
  s.add(gauss_ib(g, x.back()));
  return s.value();
}

// CDF-space route, lattice vs lattice: |F - G| is constant between merged
// support points.
double w1_cdf_route(const LatticeDistribution& f,
                    const LatticeDistribution& g) {
  const auto& xs = f.support();
  const auto& ys = g.support();
  std::size_t i = 0, j = 0;
  double cf = 0.0, cg = 0.0;
  double prev = 0.0;
  bool have_prev = false;
  KahanSum s;
  while (i < xs.size() || j < ys.size()) {
    double z;
    if (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) z = xs[i];
    else z = ys[j];
    if (have_prev && z > prev) s.add(std::fabs(cf - cg) * (z - prev));
    while (i < xs.size() && xs[i] == z) cf = f.lower_tail(i++);
    while (j < ys.size() && ys[j] == z) cg = g.lower_tail(j++);
    prev = z;
    have_prev = true;
  }
  return s.value();
}

// CDF-space route, Gaussian vs Gaussian: the CDFs cross exactly once
// (never, for equal sigmas), so split the signed area there. D(x) below is
// integral_{-inf}^x (F - G); its limit at +inf is mean(g) - mean(f).
double w1_cdf_route(const GaussianLaw& f, const GaussianLaw& g) {
  if (f.sigma() == g.sigma()) return std::fabs(f.mean() - g.mean());
  const double total = g.mean() - f.mean();
  const double xs = (f.mean() * g.sigma() - g.mean() * f.sigma()) /
                    (g.sigma() - f.sigma());
  double d;
  if (xs >= std::max(f.mean(), g.mean()))
    d = total - (gauss_ib(g, xs) - gauss_ib(f, xs));
  else
    d = gauss_ia(f, xs) - gauss_ia(g, xs);
  return std::fabs(d) + std::fabs(total - d);
}

// phi-weighted quadrature over a standardized range. A wide panel such as
// [-40, -1] would hide all of its mass between the initial Simpson nodes
// and be accepted as zero, so the range is pre-split at a fixed ladder of
// standardized points (and at the caller's kink); every resulting panel
// has width comparable to the local decay scale of phi.
template <class F>
void gauss_weighted(const F& f, double a, double b, double kink, double tol,
                    QuadAccum& acc) {
  static constexpr double kLadder[] = {
      -32.0, -24.0, -16.0, -12.0, -9.0, -7.0, -5.5, -4.5, -3.5, -2.5,
      -1.5,  -0.5,  0.5,   1.5,   2.5,  3.5,  4.5,  5.5,  7.0,  9.0,
      12.0,  16.0,  24.0,  32.0};
  double cuts[32];
  int n = 0;
  cuts[n++] = a;
  for (double c : kLadder)
    if (c > a && c < b) cuts[n++] = c;
  if (kink > a && kink < b) cuts[n++] = kink;
  cuts[n++] = b;
  std::sort(cuts, cuts + n);
  const double per = tol / static_cast<double>(n - 1);
  for (int i = 0; i + 1 < n; ++i) quad::integrate(f, cuts[i], cuts[i + 1], per, acc);
}

// Quantile-space route, generic piece quadrature for |x - partner|^p.
// Each lattice atom owns one partner interval in standardized Gaussian
// coordinates; the integrand has a single kink where the partner passes
// the atom.
void quantile_power_pieces(const LatticeDistribution& f, const GaussianLaw& g,
                           double p, double piece_tol, QuadAccum& acc) {
  const auto q = partner_edges(f);
  const double mu = g.mean(), sg = g.sigma();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double ql = std::max(q[i], -kGaussClip);
    const double qu = std::min(q[i + 1], kGaussClip);
    if (!(qu > ql)) continue;
    const double xi = f.support()[i];
    const double kink = (xi - mu) / sg;
    auto integrand = [&](double t) {
      const double d = std::fabs(xi - (mu + sg * t));
      return (p == 1.0 ? d : std::pow(d, p)) * normal::pdf(t);
    };
    gauss_weighted(integrand, ql, qu, kink, piece_tol, acc);
  }
}

void quantile_power_gauss(const GaussianLaw& f, const GaussianLaw& g, double p,
                          double tol, QuadAccum& acc) {
  const double c = f.mean() - g.mean();
  const double s = f.sigma() - g.sigma();
  if (c == 0.0 && s == 0.0) return;
  auto integrand = [&](double t) {
    const double d = std::fabs(c + s * t);
    return (p == 1.0 ? d : std::pow(d, p)) * normal::pdf(t);
  };
  const double kink = (s != 0.0) ? -c / s : -kInf;
  gauss_weighted(integrand, -kGaussClip, kGaussClip, kink, tol, acc);
}

// Quantile-space route for W1. For two lattices the quantile integral is
// the exact northwest merge; against a Gaussian it is the piece quadrature
// above.
double w1_quantile_route(const Law& f, const Law& g, QuadAccum& acc,
                         double budget) {
  const auto* df = std::get_if<LatticeDistribution>(&f);
  const auto* dg = std::get_if<LatticeDistribution>(&g);
  if (df && dg) {
    acc.evals += static_cast<long>(df->size() + dg->size());
    return comonotone_cost(*df, *dg, [](double d) { return d; });
  }
  if (df && !dg) {
    quantile_power_pieces(*df, std::get<GaussianLaw>(g), 1.0,
                          budget / static_cast<double>(df->size()), acc);
    return acc.value;
  }
  if (!df && dg) {
    quantile_power_pieces(*dg, std::get<GaussianLaw>(f), 1.0,
                          budget / static_cast<double>(dg->size()), acc);
    return acc.value;
  }
  quantile_power_gauss(std::get<GaussianLaw>(f), std::get<GaussianLaw>(g), 1.0,
                       budget, acc);
  return acc.value;
}

double law_sigma(const Law& law) { return std::sqrt(variance_of(law)); }

}  // namespace

// ---------------------------------------------------------------------
// OrliczCost

OrliczCost::OrliczCost(Kind k, double p) : kind_(k), p_(p) {
  // Sample-grid sanity check of the Young-function invariants: psi(0) = 0,
  // nondecreasing, midpoint convex.
  if ((*this)(0.0) != 0.0) throw std::logic_error("orlicz cost: psi(0) != 0");
  double prev = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double x = 0.1 * i;
    const double v = (*this)(x);
    if (v + 1e-12 < prev)
      throw std::logic_error("orlicz cost: psi not nondecreasing");
    const double mid = (*this)(0.5 * x);
    if (mid > 0.5 * (v + (*this)(0.0)) + 1e-12)
      throw std::logic_error("orlicz cost: psi not convex");
    prev = v;
  }
}

OrliczCost OrliczCost::exp_minus_one() {
  return OrliczCost(Kind::exp_minus_one, 0.0);
}

OrliczCost OrliczCost::power(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("orlicz cost: power needs p >= 1");
  return OrliczCost(Kind::power, p);
}

OrliczCost OrliczCost::absolute() { return OrliczCost(Kind::absolute, 1.0); }

double OrliczCost::operator()(double x) const {
  const double ax = std::fabs(x);
  switch (kind_) {
    case Kind::exp_minus_one:
      return std::expm1(ax);
    case Kind::power:
      return std::pow(ax, p_);
    case Kind::absolute:
      return ax;
  }
  return 0.0;
}

std::string OrliczCost::name() const {
  switch (kind_) {
    case Kind::exp_minus_one:
      return "exp_minus_one";
    case Kind::power:
      return "power(" + std::to_string(p_) + ")";
    case Kind::absolute:
      return "absolute";
  }
  return "";
}

std::string TransportResult::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["objective_at_value"] = objective_at_value;
  j["quadrature_error"] = quadrature_error;
  j["iterations"] = iterations;
  j["method"] = method;
  if (has_cross_check) j["cross_check"] = cross_check;
  return j.dump();
}

std::pair<double, double> QuantileCoupling::operator()(double u) const {
  return {quantile_eval(left, u), quantile_eval(right, u)};
}

// ---------------------------------------------------------------------
// Kolmogorov

TransportResult kolmogorov_distance(const Law& f, const Law& g) {
  TransportResult r;
  r.method = "jump-enumeration";
  const auto* df = std::get_if<LatticeDistribution>(&f);
  const auto* dg = std::get_if<LatticeDistribution>(&g);
  double best = 0.0;
  long points = 0;
  auto scan = [&](const std::vector<double>& xs) {
    for (double x : xs) {
      best = std::max(best, std::fabs(law_cdf(f, x) - law_cdf(g, x)));
      best = std::max(best, std::fabs(law_cdf_left(f, x) - law_cdf_left(g, x)));
      ++points;
    }
  };
  if (df) scan(df->support());
  if (dg) scan(dg->support());
  if (!df && !dg) {
    r.method = "density-crossings";
    const auto& gf = std::get<GaussianLaw>(f);
    const auto& gg = std::get<GaussianLaw>(g);
    for (double x :
         density_crossings(gf.mean(), gf.sigma(), gg.mean(), gg.sigma())) {
      best = std::max(best, std::fabs(gf.cdf(x) - gg.cdf(x)));
      ++points;
    }
  }
  r.value = best;
  r.iterations = static_cast<int>(points);
  return r;
}

// ---------------------------------------------------------------------
// Levy

TransportResult levy_distance(const Law& f, const Law& g) {
  TransportResult r;
  r.method = "band-bisection";
  const double rho = kolmogorov_distance(f, g).value;
  if (rho <= 1e-15 || levy_band_holds(f, g, 0.0)) return r;
  double hi = rho;  // the band condition always holds at the Kolmogorov radius
  int guard = 0;
  while (!levy_band_holds(f, g, hi)) {
    hi = hi * 1.000001 + 1e-18;
    if (++guard > 64)
      throw std::logic_error("levy_distance: band condition failed at rho");
  }
  double lo = 0.0;
  int it = 0;
  while (hi - lo > 1e-11 * std::max(1.0, hi) && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (levy_band_holds(f, g, mid)) hi = mid;
    else lo = mid;
    ++it;
  }
  r.value = hi;
  r.iterations = it;
  r.quadrature_error = hi - lo;
  return r;
}

// ---------------------------------------------------------------------
// W1

TransportResult w1_distance(const Law& f, const Law& g) {
  TransportResult r;
  r.method = "cdf-integral";
  const auto* df = std::get_if<LatticeDistribution>(&f);
  const auto* dg = std::get_if<LatticeDistribution>(&g);
  double a;
  if (df && dg) a = w1_cdf_route(*df, *dg);
  else if (df) a = w1_cdf_route(*df, std::get<GaussianLaw>(g));
  else if (dg) a = w1_cdf_route(*dg, std::get<GaussianLaw>(f));
  else a = w1_cdf_route(std::get<GaussianLaw>(f), std::get<GaussianLaw>(g));

  QuadAccum acc;
  const double budget = std::max(1e-9, 1e-7 * a);
  const double b = w1_quantile_route(f, g, acc, budget);

  r.value = a;
  r.cross_check = b;
  r.has_cross_check = true;
  r.iterations = static_cast<int>(std::min<long>(acc.evals, 1 << 30));
  r.quadrature_error = std::max(acc.error, std::fabs(a - b));
  const double gate = std::max(1e-8, 1e-6 * std::max(std::fabs(a), std::fabs(b)));
  if (std::fabs(a - b) > gate)
    throw std::runtime_error(
        "w1_distance: CDF-space and quantile-space routes disagree (" +
        std::to_string(a) + " vs " + std::to_string(b) + ")");
  return r;
}

// ---------------------------------------------------------------------
// Wp

TransportResult wp_distance(const Law& f, const Law& g, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("wp_distance: needs p >= 1");
  TransportResult r;
  const auto* df = std::get_if<LatticeDistribution>(&f);
  const auto* dg = std::get_if<LatticeDistribution>(&g);
  if (df && dg) {
    r.method = "comonotone-sum";
    const double s =
        comonotone_cost(*df, *dg, [p](double d) { return std::pow(d, p); });
    r.value = std::pow(s, 1.0 / p);
    r.iterations = static_cast<int>(df->size() + dg->size());
    return r;
  }
  r.method = "quantile-quadrature";
  QuadAccum acc;
  if (df || dg) {
    const auto& lat = df ? *df : *dg;
    const auto& gau = std::get<GaussianLaw>(df ? g : f);
    quantile_power_pieces(lat, gau, p, 1e-12 / static_cast<double>(lat.size()),
                          acc);
  } else {
    const auto& gf = std::get<GaussianLaw>(f);
    const auto& gg = std::get<GaussianLaw>(g);
    quantile_power_gauss(gf, gg, p, 1e-13, acc);
    if (p == 2.0) {
      // closed form: E (c + s Z)^2 = c^2 + s^2
      const double c = gf.mean() - gg.mean();
      const double s = gf.sigma() - gg.sigma();
      r.cross_check = std::sqrt(c * c + s * s);
      r.has_cross_check = true;
    }
  }
  r.value = std::pow(std::max(acc.value, 0.0), 1.0 / p);
  if (acc.value > 0.0)
    r.quadrature_error = r.value * acc.error / (p * acc.value);
  r.iterations = static_cast<int>(std::min<long>(acc.evals, 1 << 30));
  return r;
}

// ---------------------------------------------------------------------
// Orlicz objective under the quantile coupling

namespace {

double objective_lattice_pair(const LatticeDistribution& mu,
                              const LatticeDistribution& nu,
                              const OrliczCost& psi, double a) {
  if (psi.kind() == OrliczCost::Kind::exp_minus_one) {
    // Sum w (e^{d/a} - 1) with each term formed in log space so tiny
    // weights against huge exponentials neither overflow prematurely nor
    // get lost.
    KahanSum s;
    std::size_t i = 0, j = 0;
    double ri = mu.mass()[0], rj = nu.mass()[0];
    while (ri >= 0.0 && rj >= 0.0) {
      const double w = std::min(ri, rj);
      if (w > 0.0) {
        const double d = std::fabs(mu.support()[i] - nu.support()[j]);
        const double lt = std::log(w) + d / a;
        if (lt > 709.0) return kInf;
        s.add(std::exp(lt) - w);
      }
      ri -= w;
      rj -= w;
      // refresh whichever side depleted; -1 marks exhaustion, and any mass
      // still left on the other side is rounding drift
      if (ri <= 0.0) ri = (i + 1 < mu.size()) ? mu.mass()[++i] : -1.0;
      if (rj <= 0.0) rj = (j + 1 < nu.size()) ? nu.mass()[++j] : -1.0;
    }
    return s.value();
  }
  return comonotone_cost(mu, nu,
                         [&](double d) { return psi(d / a); });
}

double objective_lattice_gauss(const LatticeDistribution& f,
                               const GaussianLaw& g, const OrliczCost& psi,
                               double a, QuadAccum& acc) {
  const auto q = partner_edges(f);
  const double mu = g.mean(), sg = g.sigma();
  KahanSum s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double xi = f.support()[i];
    const double c = xi - mu;
    const double kink = c / sg;
    const double ql = q[i], qu = q[i + 1];
    if (!(qu > ql)) continue;
    switch (psi.kind()) {
      case OrliczCost::Kind::exp_minus_one: {
        // Closed-form shifted-Gaussian pieces; total mass of the partner
        // intervals is 1, so the objective is sum exp(L) - 1 (the -1 is
        // applied by the caller via the mass sum below).
        const double tl = ql, tu = qu;
        if (kink > tl && kink < tu) {
          const double l1 = exp_piece_log(c, -sg, a, tl, kink);
          const double l2 = exp_piece_log(-c, sg, a, kink, tu);
          if (l1 > 708.0 || l2 > 708.0) { acc.value = kInf; return kInf; }
          s.add(std::exp(l1));
          s.add(std::exp(l2));
        } else if (kink >= tu) {  // partner below the atom: d = c - sg t
          const double l = exp_piece_log(c, -sg, a, tl, tu);
          if (l > 708.0) { acc.value = kInf; return kInf; }
          s.add(std::exp(l));
        } else {  // partner above the atom
          const double l = exp_piece_log(-c, sg, a, tl, tu);
          if (l > 708.0) { acc.value = kInf; return kInf; }
          s.add(std::exp(l));
        }
        break;
      }
      case OrliczCost::Kind::absolute: {
        if (kink > ql && kink < qu) {
          s.add(abs_piece(c, -sg, ql, kink) / a);
          s.add(abs_piece(-c, sg, kink, qu) / a);
        } else if (kink >= qu) {
          s.add(abs_piece(c, -sg, ql, qu) / a);
        } else {
          s.add(abs_piece(-c, sg, ql, qu) / a);
        }
        break;
      }
      case OrliczCost::Kind::power: {
        const double tl = std::max(ql, -kGaussClip);
        const double tu = std::min(qu, kGaussClip);
        if (!(tu > tl)) break;
        const double p = psi.exponent();
        auto integrand = [&](double t) {
          return std::pow(std::fabs(c - sg * t) / a, p) * normal::pdf(t);
        };
        gauss_weighted(integrand, tl, tu, kink,
                       1e-12 / static_cast<double>(f.size()), acc);
        break;
      }
    }
  }
  if (psi.kind() == OrliczCost::Kind::exp_minus_one) return s.value() - 1.0;
  if (psi.kind() == OrliczCost::Kind::absolute) return s.value();
  return acc.value;
}

double objective_gauss_pair(const GaussianLaw& f, const GaussianLaw& g,
                            const OrliczCost& psi, double a, QuadAccum& acc) {
  const double c = f.mean() - g.mean();
  const double s = f.sigma() - g.sigma();
  if (s == 0.0) return psi(c / a);
  switch (psi.kind()) {
    case OrliczCost::Kind::exp_minus_one: {
      const double kink = -c / s;
      const double l1 = exp_piece_log(-c, -s, a, -kInf, kink);
      const double l2 = exp_piece_log(c, s, a, kink, kInf);
      if (l1 > 708.0 || l2 > 708.0) return kInf;
      return std::exp(l1) + std::exp(l2) - 1.0;
    }
    case OrliczCost::Kind::absolute: {
      // folded-normal mean: E|c + s Z| = |c| erf(|c/s|/sqrt2) + 2|s| phi(c/s)
      const double q = std::fabs(c / s);
      return (std::fabs(c) * std::erf(q / normal::kSqrt2) +
              2.0 * std::fabs(s) * normal::pdf(q)) /
             a;
    }
    case OrliczCost::Kind::power: {
      const double p = psi.exponent();
      auto integrand = [&](double t) {
        return std::pow(std::fabs(c + s * t) / a, p) * normal::pdf(t);
      };
      gauss_weighted(integrand, -kGaussClip, kGaussClip, -c / s, 1e-13, acc);
      return acc.value;
    }
  }
  return 0.0;
}

}  // namespace

double orlicz_objective(const Law& f, const Law& g, const OrliczCost& psi,
                        double a) {
  if (!(a > 0.0)) throw std::invalid_argument("orlicz_objective: a must be positive");
  QuadAccum acc;
  const auto* df = std::get_if<LatticeDistribution>(&f);
  const auto* dg = std::get_if<LatticeDistribution>(&g);
  if (df && dg) return objective_lattice_pair(*df, *dg, psi, a);
  if (df) return objective_lattice_gauss(*df, std::get<GaussianLaw>(g), psi, a, acc);
  if (dg) return objective_lattice_gauss(*dg, std::get<GaussianLaw>(f), psi, a, acc);
  return objective_gauss_pair(std::get<GaussianLaw>(f),
                              std::get<GaussianLaw>(g), psi, a, acc);
}

// ---------------------------------------------------------------------
// Luxemburg gauge

TransportResult orlicz_wasserstein(const Law& f, const Law& g,
                                   const OrliczCost& psi) {
  TransportResult r;
  r.method = "gauge-bisection";
  // The quantile-route W1 seeds the bracket; psi convex with psi(1) >= ...
  // is not assumed beyond monotonicity of the objective in a.
  QuadAccum w1acc;
  const double w1 = w1_quantile_route(f, g, w1acc, 1e-9);
  const double scale =
      std::max({1e-300, law_sigma(f), law_sigma(g),
                std::fabs(mean_of(f) - mean_of(g))});
  if (w1 <= 1e-14 * std::max(1.0, scale)) {
    // coinciding laws: every positive a is admissible
    r.method = "degenerate";
    return r;
  }
  auto obj = [&](double a) { return orlicz_objective(f, g, psi, a); };
  double a0 = std::max(w1, 1e-12);
  int it = 0;
  double lo, hi;
  if (obj(a0) > 1.0) {
    do {
      lo = a0;
      a0 *= 2.0;
      if (++it > 2100)
        throw std::runtime_error("orlicz_wasserstein: no admissible scale");
    } while (obj(a0) > 1.0);
    hi = a0;
  } else {
    hi = a0;
    lo = 0.5 * a0;
    while (obj(lo) <= 1.0) {
      hi = lo;
      lo *= 0.5;
      ++it;
      if (lo < 1e-300) {
        r.value = 0.0;
        r.method = "degenerate";
        return r;
      }
    }
  }
  // Bisect to relative 1e-6 (absolute floor 1e-9), then keep halving until
  // the objective itself sits within 1e-5 of 1 so the reported pair
  // (value, objective) is self-consistent even for steep exponential costs.
  double obj_hi = obj(hi);
  while (it < 300) {
    const bool width_ok = (hi - lo) <= std::max(1e-9, 1e-6 * hi);
    if (width_ok && std::fabs(obj_hi - 1.0) <= 1e-5) break;
    if ((hi - lo) <= 8.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double mid = 0.5 * (lo + hi);
    const double om = obj(mid);
    if (om > 1.0) {
      lo = mid;
    } else {
      hi = mid;
      obj_hi = om;
    }
    ++it;
  }
  r.value = hi;
  r.objective_at_value = obj_hi;
  r.iterations = it;
  r.quadrature_error = hi - lo;
  return r;
}

// ---------------------------------------------------------------------
// couplings and the LP oracle

double comonotone_cost(const LatticeDistribution& mu,
                       const LatticeDistribution& nu,
                       const std::function<double(double)>& cost_of_distance) {
  std::size_t i = 0, j = 0;
  double ri = mu.mass()[0], rj = nu.mass()[0];
  KahanSum s;
  while (ri >= 0.0 && rj >= 0.0) {
    const double w = std::min(ri, rj);
    if (w > 0.0)
      s.add(w * cost_of_distance(std::fabs(mu.support()[i] - nu.support()[j])));
    ri -= w;
    rj -= w;
    // refresh whichever side depleted; -1 marks exhaustion, and any mass
    // still left on the other side is rounding drift (totals are both 1)
    if (ri <= 0.0) ri = (i + 1 < mu.size()) ? mu.mass()[++i] : -1.0;
    if (rj <= 0.0) rj = (j + 1 < nu.size()) ? nu.mass()[++j] : -1.0;
  }
  return s.value();
}

double discrete_ot_oracle(const LatticeDistribution& mu,
                          const LatticeDistribution& nu,
                          const std::function<double(double)>& cost_of_distance,
                          std::size_t max_support) {
  const std::size_t m = mu.size(), n = nu.size();
  if (m > max_support || n > max_support)
    throw std::invalid_argument("discrete_ot_oracle: support size over cap");
  std::vector<std::vector<double>> c(m, std::vector<double>(n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      c[i][j] = cost_of_distance(std::fabs(mu.support()[i] - nu.support()[j]));
      if (!std::isfinite(c[i][j]) || c[i][j] < 0.0)
        throw std::domain_error("discrete_ot_oracle: cost must be finite and nonnegative");
    }

  std::vector<double> supply = mu.mass();
  std::vector<double> demand = nu.mass();
  {  // equalize the two fp totals so the flow balances exactly
    double st = 0.0, dt = 0.0;
    for (double v : supply) st += v;
    for (double v : demand) dt += v;
    const double ratio = st / dt;
    for (double& v : demand) v *= ratio;
  }
  std::vector<std::vector<double>> flow(m, std::vector<double>(n, 0.0));

  // Successive shortest paths with node potentials; reduced costs stay
  // nonnegative, so plain dense Dijkstra suffices (graphs here are small).
  const std::size_t nn = m + n;
  std::vector<double> pot(nn, 0.0), dist(nn);
  std::vector<int> parent(nn);
  std::vector<char> done(nn);

  double remaining = 1.0;
  long rounds = 0;
  const long round_cap = static_cast<long>(10 * nn * nn + 1000);
  while (true) {
    remaining = 0.0;
    for (double v : supply) remaining += v;
    if (remaining <= 1e-13) break;
    if (++rounds > round_cap)
      throw std::logic_error("discrete_ot_oracle: augmentation cap exceeded");

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < m; ++i)
      if (supply[i] > 0.0) dist[i] = 0.0;

    for (std::size_t step = 0; step < nn; ++step) {
      std::size_t v = nn;
      double dv = kInf;
      for (std::size_t u = 0; u < nn; ++u)
        if (!done[u] && dist[u] < dv) { dv = dist[u]; v = u; }
      if (v == nn) break;
      done[v] = 1;
      if (v < m) {
        for (std::size_t j = 0; j < n; ++j) {
          const double rc = c[v][j] + pot[v] - pot[m + j];
          const double nd = dv + std::max(rc, 0.0);
          if (nd < dist[m + j]) {
            dist[m + j] = nd;
            parent[m + j] = static_cast<int>(v);
          }
        }
      } else {
        const std::size_t j = v - m;
        for (std::size_t i = 0; i < m; ++i) {
          if (flow[i][j] <= 0.0) continue;
          const double rc = -c[i][j] + pot[m + j] - pot[i];
          const double nd = dv + std::max(rc, 0.0);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = static_cast<int>(m + j);
          }
        }
      }
    }

    std::size_t t = nn;
    double dt = kInf;
    for (std::size_t j = 0; j < n; ++j)
      if (demand[j] > 0.0 && dist[m + j] < dt) { dt = dist[m + j]; t = m + j; }
    if (t == nn)
      throw std::logic_error("discrete_ot_oracle: no augmenting path");

    for (std::size_t u = 0; u < nn; ++u)
      pot[u] += std::min(dist[u], dt);

    // bottleneck along the parent path
    double amount = demand[t - m];
    for (std::size_t u = t; parent[u] >= 0;) {
      const std::size_t p = static_cast<std::size_t>(parent[u]);
      if (u >= m) {
        // forward arc p -> u consumes supply only at the root
        if (parent[p] < 0) amount = std::min(amount, supply[p]);
      } else {
        amount = std::min(amount, flow[u][p - m]);
      }
      u = p;
    }
    for (std::size_t u = t; parent[u] >= 0;) {
      const std::size_t p = static_cast<std::size_t>(parent[u]);
      if (u >= m) flow[p][u - m] += amount;
      else flow[u][p - m] -= amount;
      u = p;
    }
    // root of the path
    std::size_t root = t;
    while (parent[root] >= 0) root = static_cast<std::size_t>(parent[root]);
    supply[root] -= amount;
    demand[t - m] -= amount;
  }

  KahanSum total;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (flow[i][j] > 0.0) total.add(flow[i][j] * c[i][j]);
  return total.value();
}

// ---------------------------------------------------------------------
// coupling profile

std::vector<CouplingAtom> coupling_profile(const LatticeDistribution& f,
                                           const GaussianLaw& g) {
  constexpr double kClip = 1e-14;
  const std::size_t k = f.size();
  std::vector<CouplingAtom> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    CouplingAtom& a = out[i];
    a.x = f.support()[i];
    a.mass = f.mass()[i];
    a.cdf_lo = (i == 0) ? 0.0 : f.lower_tail(i - 1);
    a.sf_lo = f.upper_tail(i);
    a.cdf_hi = f.lower_tail(i);
    a.sf_hi = (i + 1 == k) ? 0.0 : f.upper_tail(i + 1);

    // exact partner range in tail coordinates (infinite at the outermost
    // edges, where the exterior tail is exactly zero)
    const double ql = q_two_sided(a.cdf_lo, a.sf_lo);
    const double qu = q_two_sided(a.cdf_hi, a.sf_hi);
    a.eta_lo_exact = g.mean() + g.sigma() * ql;
    a.eta_hi_exact = g.mean() + g.sigma() * qu;
    a.max_displacement_exact = std::max(std::fabs(a.x - a.eta_lo_exact),
                                        std::fabs(a.x - a.eta_hi_exact));

    // clipped report: levels pushed into [1e-14, 1 - 1e-14]; the clip is
    // detected on whichever tail is small so near-1 levels are not lost to
    // rounding
    auto clipped_q = [&](double cdf, double sf, bool& flag) {
      if (cdf < kClip) { flag = true; return normal::quantile(kClip); }
      if (sf < kClip) { flag = true; return -normal::quantile(kClip); }
      flag = false;
      return q_two_sided(cdf, sf);
    };
    const double qlc = clipped_q(a.cdf_lo, a.sf_lo, a.clipped_lo);
    const double quc = clipped_q(a.cdf_hi, a.sf_hi, a.clipped_hi);
    a.u_lo = a.clipped_lo ? ((a.cdf_lo < kClip) ? kClip : 1.0 - kClip) : a.cdf_lo;
    a.u_hi = a.clipped_hi ? ((a.cdf_hi < kClip) ? kClip : 1.0 - kClip) : a.cdf_hi;
    a.eta_lo = g.mean() + g.sigma() * qlc;
    a.eta_hi = g.mean() + g.sigma() * quc;
    a.max_displacement =
        std::max(std::fabs(a.x - a.eta_lo), std::fabs(a.x - a.eta_hi));
  }
  return out;
}

}  // namespace ot1d
