#pragma once

// Half-plane Blaschke factors and products, the mfun averaging bound,
// averaged -log|F| integrals, Poisson/Herglotz evaluation, the wedge pullback
// and lower-bound certificates for F = B exp(-G) on H = {Re z > 0}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtun/quadrature.hpp"

namespace magtun {

class HalfPlaneDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PhaseUndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DivergentIntegralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// B_a(z) = (z - a) / (z + conj a).
inline cd blaschke_factor(cd a, cd z) {
  if (!(a.real() > 0.0)) throw HalfPlaneDomainError("Blaschke zero must have Re a > 0");
  if (!(z.real() > 0.0)) throw HalfPlaneDomainError("Blaschke factor evaluated outside the half-plane");
  return (z - a) / (z + std::conj(a));
}

// -log|B_a(z)|. Far from a, -(1/2) log1p(-q) with q = 1 - |B_a|^2 =
// 4 Re a Re z / |z + conj a|^2 keeps digits that 1 - |B_a| would lose; near a,
// q rounds to 1 and the log of the ratio is used instead.
inline double neg_log_factor(cd a, cd z) {
  if (!(a.real() > 0.0)) throw HalfPlaneDomainError("Blaschke zero must have Re a > 0");
  if (!(z.real() > 0.0)) throw HalfPlaneDomainError("Blaschke factor evaluated outside the half-plane");
  double q = 4.0 * a.real() * z.real() / std::norm(z + std::conj(a));
  if (q < 0.5) return -0.5 * std::log1p(-q);
  double r = std::abs(z - a);
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(std::abs(z + std::conj(a))) - std::log(r);
}

// theta with exp(i theta) (1 - a) / (1 + conj a) > 0.
inline double normalizing_phase(cd a) {
  if (!(a.real() > 0.0)) throw HalfPlaneDomainError("Blaschke zero must have Re a > 0");
  if (a == cd(1.0)) throw PhaseUndefinedError("phase undefined for a zero at z = 1");
  double th = -std::arg((1.0 - a) / (1.0 + std::conj(a)));
  return th <= -std::numbers::pi ? th + 2.0 * std::numbers::pi : th;  // in (-pi, pi]
}

struct BudgetSums {
  double small_re = 0.0;      // sum over |a| < 1 of Re a
  double big_re_inv = 0.0;    // sum over |a| >= 1 of Re(1/a)
  double small_chain = 0.0;   // sum over |a| <= 1 of 2 Re a / |1 + a|^2 (lower bound for -log|B(1)|)
  double big_chain = 0.0;     // (1/2) sum over |a| >= 1 of (1 - |B_a(1)|^2)
};

struct BlaschkeZeroSet {
  std::vector<cd> zeros;
  std::vector<double> phases;
  double beta = 0.0;

  static BlaschkeZeroSet with_normalized_phases(std::vector<cd> zeros, double beta) {
    BlaschkeZeroSet s;
    s.zeros = std::move(zeros);
    for (cd a : s.zeros) s.phases.push_back(normalizing_phase(a));
    s.beta = beta;
    return s;
  }

  BudgetSums budget() const {
    BudgetSums b;
    for (cd a : zeros) {
      double ab = std::abs(a);
      double one_minus = 4.0 * a.real() / std::norm(1.0 + std::conj(a));  // 1 - |B_a(1)|^2
      if (ab < 1.0) b.small_re += a.real();
      else b.big_re_inv += (1.0 / a).real();
      if (ab <= 1.0) b.small_chain += 0.5 * one_minus;
      if (ab >= 1.0) b.big_chain += 0.5 * one_minus;
    }
    return b;
  }

  // Summability hypotheses with budget beta, and phase normalization.
  void validate() const {
    if (phases.size() != zeros.size()) throw HypothesisError("one phase per zero required");
    for (size_t i = 0; i < zeros.size(); ++i) {
      cd a = zeros[i];
      if (!(a.real() > 0.0)) throw HalfPlaneDomainError("Blaschke zero must have Re a > 0");
      cd v = std::polar(1.0, phases[i]) * (1.0 - a) / (1.0 + std::conj(a));
      if (std::abs(v.imag()) > 1e-12 * std::abs(v) || !(v.real() > 0.0))
        throw HypothesisError("phase " + std::to_string(i) + " does not make the factor positive at 1");
    }
    BudgetSums b = budget();
    if (b.small_re > beta) throw HypothesisError("sum of Re a over |a| < 1 exceeds beta");
    if (b.big_re_inv > beta) throw HypothesisError("sum of Re(1/a) over |a| >= 1 exceeds beta");
  }

  // Sum of Re a over zeros beyond the first n, the truncation tail.
  double tail_bound(size_t n) const {
    double t = 0.0;
    for (size_t i = n; i < zeros.size(); ++i) t += zeros[i].real();
    return t;
  }

  // Real-axis zeros inside [lo, hi].
  std::vector<double> real_zeros_in(double lo, double hi) const {
    std::vector<double> r;
    for (cd a : zeros)
      if (a.imag() == 0.0 && a.real() >= lo && a.real() <= hi) r.push_back(a.real());
    return r;
  }
};

inline cd blaschke_product(const BlaschkeZeroSet& s, cd z) {
  cd p = 1.0;
  for (size_t i = 0; i < s.zeros.size(); ++i) {
    cd f = blaschke_factor(s.zeros[i], z);
    p *= i < s.phases.size() ? std::polar(1.0, s.phases[i]) * f : f;
  }
  return p;
}

inline double neg_log_product(const BlaschkeZeroSet& s, cd z) {
  double v = 0.0;
  for (cd a : s.zeros) v += neg_log_factor(a, z);
  return v;
}

// --------------------------------------------------------------- mfun

inline double mfun(double x) {
  if (!(x > 0.0)) throw HalfPlaneDomainError("mfun needs x > 0");
  return std::min(x, 1.0 / x);
}

// (1/delta) int_delta^{2 delta} mfun(t / alpha) dt, piecewise closed form.
inline double avg_mfun(double alpha, double delta) {
  if (!(alpha > 0.0 && delta > 0.0)) throw HalfPlaneDomainError("avg_mfun needs positive arguments");
  if (alpha <= delta) return std::numbers::ln2 * alpha / delta;
  if (alpha >= 2.0 * delta) return 1.5 * delta / alpha;
  return ((alpha * alpha - delta * delta) / (2.0 * alpha) + alpha * std::log(2.0 * delta / alpha)) / delta;
}

// --------------------------------------------------------------- averaged -log|F|

struct AverageResult {
  double value = 0.0;
  double abs_err = 0.0;
  std::vector<double> breakpoints;
};

// (1/(b - a)) int_a^b g(t) dt for g = -log|F| with integrable log singularities
// at the given breakpoints; tanh-sinh per piece absorbs the endpoint logs.
template <class G>
AverageResult average_with_breaks(G&& g, double a, double b, std::vector<double> breaks, double rel_tol = 1e-12) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  AverageResult out;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i] < a || breaks[i + 1] > b) continue;
    auto q = integrate_tanh_sinh(g, breaks[i], breaks[i + 1], rel_tol);
    out.value += q.value;
    out.abs_err += q.abs_err;
  }
  out.value /= (b - a);
  out.abs_err /= (b - a);
  out.breakpoints = breaks;
  return out;
}

// Locates zeros of a callable F on [lo, hi]: scan for local minima of |F| on
// a uniform grid, refine each by golden section, keep those with |F| tiny
// against the scan maximum.
template <class F>
std::vector<double> locate_real_zeros(F&& f, double lo, double hi, int scan = 512) {
  std::vector<double> t(scan + 1), m(scan + 1);
  double mx = 0.0;
  int zero_run = 0;
  for (int i = 0; i <= scan; ++i) {
    t[i] = lo + (hi - lo) * i / scan;
    m[i] = std::abs(f(t[i]));
    mx = std::max(mx, m[i]);
    zero_run = m[i] == 0.0 ? zero_run + 1 : 0;
    if (zero_run >= 3) throw DivergentIntegralError("F vanishes on a subinterval; -log|F| is not integrable");
  }
  std::vector<double> zs;
  for (int i = 0; i <= scan; ++i) {
    bool left = i == 0 || m[i] <= m[i - 1], right = i == scan || m[i] <= m[i + 1];
    if (!(left && right)) continue;
    double a = t[std::max(i - 1, 0)], b = t[std::min(i + 1, scan)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = std::abs(f(c)), fd = std::abs(f(d));
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc, c = b - g * (b - a), fc = std::abs(f(c));
      } else {
        a = c, c = d, fc = fd, d = a + g * (b - a), fd = std::abs(f(d));
      }
    }
    double z = 0.5 * (a + b);
    if (std::abs(f(z)) <= 1e-10 * mx) zs.push_back(z);
  }
  return zs;
}

// (1/delta) int_delta^{2 delta} -log|F(t)| dt.
template <class F>
AverageResult avg_neg_log(F&& f, double delta, std::optional<std::vector<double>> zeros = std::nullopt) {
  if (!(delta > 0.0)) throw HalfPlaneDomainError("avg_neg_log needs delta > 0");
  std::vector<double> br = zeros ? *zeros : locate_real_zeros(f, delta, 2.0 * delta);
  auto g = [&](double t) { return -std::log(std::abs(f(t))); };
  return average_with_breaks(g, delta, 2.0 * delta, br);
}

// --------------------------------------------------------------- Herglotz

struct HerglotzAtom {
  double location = 0.0;
  double mass = 0.0;
};

struct HerglotzMeasure {
  std::vector<HerglotzAtom> atoms;
  double A = 0.0;  // linear coefficient

  double beta_measure() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass / (1.0 + a.location * a.location);
    return s;
  }
  double mass_at_zero() const {
    double s = 0.0;
    for (const auto& a : atoms)
      if (a.location == 0.0) s += a.mass;
    return s;
  }
  void validate() const {
    if (A < 0.0) throw HypothesisError("Herglotz linear coefficient must be >= 0");
    for (const auto& a : atoms)
      if (a.mass < 0.0) throw HypothesisError("Herglotz masses must be >= 0");
  }
};

// A x + sum m_i x / ((y - psi_i)^2 + x^2) at z = x + i y.
inline double herglotz_eval(const HerglotzMeasure& m, cd z) {
  const double x = z.real(), y = z.imag();
  if (!(x > 0.0)) throw HalfPlaneDomainError("Poisson integral evaluated outside the half-plane");
  double s = m.A * x;
  for (const auto& a : m.atoms) s += a.mass * x / ((y - a.location) * (y - a.location) + x * x);
  return s;
}

// The Poisson part alone (A = 0), u(t) for real t.
inline double poisson_part(const HerglotzMeasure& m, double t) {
  HerglotzMeasure p = m;
  p.A = 0.0;
  return herglotz_eval(p, cd(t));
}

// Intermediate bound on u(t) for 0 < t < 1 after splitting the measure at
// {0}, 0 < |psi| <= eta and |psi| > eta.
inline double poisson_split_bound(const HerglotzMeasure& m, double t, double eta, double beta) {
  double near = 0.0;
  for (const auto& a : m.atoms)
    if (a.location != 0.0 && std::abs(a.location) <= eta) near += a.mass / (1.0 + a.location * a.location);
  return (m.mass_at_zero() + near) / t + t * (1.0 + eta * eta) / (t * t + eta * eta) * beta;
}

// Given eps, an eta with near mass <= eps/2 and the largest t with the far
// term <= eps/2: below that t, u(t) - mu({0})/t <= eps/t.
struct RefinedThreshold {
  double eta = 0.0;
  double t_max = 0.0;
};

inline RefinedThreshold refined_threshold(const HerglotzMeasure& m, double eps, double beta) {
  std::vector<double> locs;
  for (const auto& a : m.atoms)
    if (a.location != 0.0 && a.mass > 0.0) locs.push_back(std::abs(a.location));
  std::sort(locs.begin(), locs.end());
  // Largest eta in the atom list whose near mass stays within eps/2.
  double eta = locs.empty() ? 1.0 : 0.5 * locs.front();
  for (double l : locs) {
    double near = 0.0;
    for (const auto& a : m.atoms)
      if (a.location != 0.0 && std::abs(a.location) <= l) near += a.mass / (1.0 + a.location * a.location);
    if (near <= 0.5 * eps) eta = l;
    else break;
  }
  // t (1 + eta^2) beta <= (eps/2)(t^2 + eta^2): smaller root of a quadratic in t.
  double a = 0.5 * eps, b = -(1.0 + eta * eta) * beta, c = 0.5 * eps * eta * eta;
  double disc = b * b - 4.0 * a * c;
  RefinedThreshold r;
  r.eta = eta;
  r.t_max = disc <= 0.0 ? 1.0 : std::min(1.0, (-b - std::sqrt(disc)) / (2.0 * a));
  return r;
}

// --------------------------------------------------------------- wedge

// F~(z) = F(z^{-alpha}) on the half-plane, principal branch.
template <class F>
auto wedge_pullback(F f, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw HalfPlaneDomainError("wedge opening alpha must be in (0, 1]");
  return [f, alpha](cd z) { return f(std::pow(z, -alpha)); };
}

// Image of [delta, 2 delta] under t -> t^{-alpha}.
inline std::pair<double, double> wedge_interval(double delta, double alpha) {
  return {std::pow(2.0 * delta, -alpha), std::pow(delta, -alpha)};
}

// Points of the wedge |Arg z| < alpha pi/2 for envelope checks.
inline std::vector<cd> wedge_samples(double alpha, int count, double r_lo = 0.1, double r_hi = 10.0) {
  std::vector<cd> z;
  int nr = std::max(1, int(std::sqrt(double(count))));
  int na = std::max(1, count / nr);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < na; ++j) {
      double r = r_lo * std::pow(r_hi / r_lo, (i + 0.5) / nr);
      double th = alpha * std::numbers::pi / 2.0 * (-0.95 + 1.9 * (j + 0.5) / na);
      z.push_back(std::polar(r, th));
    }
  return z;
}

// --------------------------------------------------------------- certificates

// F = B exp(-G) with Re G given by its Herglotz data.
struct FactoredFunction {
  BlaschkeZeroSet zeros;
  std::optional<HerglotzMeasure> g;

  double neg_log_abs(cd z) const {
    double v = neg_log_product(zeros, z);
    if (g) v += herglotz_eval(*g, z);
    return v;
  }
  std::vector<double> real_zeros(double lo, double hi) const { return zeros.real_zeros_in(lo, hi); }
};

struct LowerBoundCertificate {
  std::string mode;  // "half_plane" or "wedge"
  double delta_or_R = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double measured_avg = 0.0;
  double quad_err = 0.0;
  double theorem_bound = 0.0;
  double margin = 0.0;
  double mu0_estimate = 0.0;
};

// Constant in the wedge bound, from the final display of the covering argument.
inline constexpr double kWedgeConstant = 80.0;

// median of t (-log|F(t)|) over [delta, 2 delta]; the coefficient of 1/t.
inline double estimate_mu0(const FactoredFunction& f, double delta, int samples = 257) {
  std::vector<double> v;
  for (int i = 0; i < samples; ++i) {
    double t = delta * (1.0 + (i + 0.5) / samples);
    double x = t * f.neg_log_abs(cd(t));
    if (std::isfinite(x)) v.push_back(x);
  }
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

inline void check_point_budget(const FactoredFunction& f, double beta, double extra = 0.0) {
  double at1 = f.neg_log_abs(cd(1.0)) - extra;
  if (!(at1 <= beta))
    throw HypothesisError("-log|F(1)| = " + std::to_string(at1) + " exceeds beta = " + std::to_string(beta));
}

// Half-plane form: mean of -log|F| over [delta, 2 delta] against
// (18 + log 2 + (3/2) delta^2) beta / delta.
inline LowerBoundCertificate certify_half_plane(const FactoredFunction& f, double beta, double delta) {
  if (!(delta > 0.0 && delta < 0.25)) throw HypothesisError("half-plane certificate needs 0 < delta < 1/4");
  if (f.g) f.g->validate();
  check_point_budget(f, beta);
  auto g = [&](double t) { return f.neg_log_abs(cd(t)); };
  AverageResult avg = average_with_breaks(g, delta, 2.0 * delta, f.real_zeros(delta, 2.0 * delta));
  LowerBoundCertificate c;
  c.mode = "half_plane";
  c.delta_or_R = delta;
  c.beta = beta;
  c.measured_avg = avg.value;
  c.quad_err = avg.abs_err;
  c.theorem_bound = (18.0 + std::numbers::ln2 + 1.5 * delta * delta) * beta / delta;
  c.margin = c.theorem_bound - c.measured_avg;
  c.mu0_estimate = estimate_mu0(f, delta);
  return c;
}

// Wedge form: F(w) = U(w) F~(w^{-1/alpha}) with F~ the factored function on
// H, so F/U is bounded by 1 on the wedge. The mean of -log|F/U| over [R, 2R]
// is compared with 80 alpha 2^{1/alpha} (beta + log|U(1)|) R^{1/alpha}.
template <class U>
LowerBoundCertificate certify_wedge(const FactoredFunction& f, double beta, double R, double alpha, U envelope,
                                    int envelope_samples = 64) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw HypothesisError("wedge opening alpha must be in (0, 1]");
  if (!(R > std::pow(2.0, alpha))) throw HypothesisError("wedge certificate needs R > 2^alpha");
  if (f.g) f.g->validate();
  const double log_u1 = std::log(std::abs(envelope(cd(1.0))));
  // |F(1)| >= e^{-beta} for F = U F~.
  check_point_budget(f, beta, log_u1);
  for (cd w : wedge_samples(alpha, envelope_samples)) {
    cd u = envelope(w);
    if (u == cd(0.0)) throw HypothesisError("envelope vanishes in the wedge");
    // |F(w)| <= |U(w)| iff -log|F~(w^{-1/alpha})| >= 0
    if (f.neg_log_abs(std::pow(w, -1.0 / alpha)) < -1e-12)
      throw HypothesisError("|F| exceeds the envelope at a wedge sample");
  }
  auto g = [&](double s) { return f.neg_log_abs(cd(std::pow(s, -1.0 / alpha))); };
  std::vector<double> br;
  for (double z : f.real_zeros(std::pow(2.0 * R, -1.0 / alpha), std::pow(R, -1.0 / alpha)))
    br.push_back(std::pow(z, -alpha));
  AverageResult avg = average_with_breaks(g, R, 2.0 * R, br);
  LowerBoundCertificate c;
  c.mode = "wedge";
  c.delta_or_R = R;
  c.alpha = alpha;
  c.beta = beta;
  c.measured_avg = avg.value;
  c.quad_err = avg.abs_err;
  c.theorem_bound = kWedgeConstant * alpha * std::pow(2.0, 1.0 / alpha) * (beta + log_u1) * std::pow(R, 1.0 / alpha);
  c.margin = c.theorem_bound - c.measured_avg;
  // With s = t^{-alpha}, mu0 multiplies s^{1/alpha}.
  c.mu0_estimate = estimate_mu0(f, std::pow(2.0 * R, -1.0 / alpha));
  return c;
}

}  // namespace magtun
