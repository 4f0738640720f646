#pragma once

// Anisotropic magnetic harmonic oscillator
//   H = 1/2 [ (P + lambda B X^perp)^2 + lambda^2 (k1^2 x1^2 + k2^2 x2^2) ]
// in closed form: heat kernel q(x,y,s) (s = lambda t), ground state, E0, and
// the modified Green's function with the ground state projected out.
//
// All s-dependent coefficients are evaluated as ratios of "hatted" forms with
// the f+ f- factors cancelled and every hyperbolic scaled by exp(-f+ s / 2),
// so the same expressions serve s -> 0, s -> infinity and f- = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtun/grid_model.hpp"
#include "magtun/quadrature.hpp"

namespace magtun {

class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct WedgeLimits {
  double c_lambda = 0.5;  // |Im lambda| <= c_lambda Re lambda
  double c_B = 0.5;       // |B| bound required once lambda leaves the real axis
};

struct MHOParams {
  double k1 = 1.0, k2 = 2.0, B = 0.0;
  cd lambda = 1.0;
  double f_plus = 0.0, f_minus = 0.0;
  double eta = 0.0, zeta = 0.0, xi = 0.0;
  cd E0 = 0.0;
  bool degenerate = false;  // k1 == k2 and B == 0

  double omega1() const { return 0.5 * (f_plus + f_minus); }
  double omega2() const { return 0.5 * (f_plus - f_minus); }
  // Levels of H / lambda: f+/2 + n omega1 + m omega2.
  double first_gap() const { return omega2(); }
};

inline MHOParams mho_params(double k1, double k2, double B, cd lambda, WedgeLimits w = {}) {
  if (!(k1 > 0.0 && k2 > 0.0)) throw ParameterError("mho: k1, k2 must be positive");
  if (!(lambda.real() > 0.0)) throw ParameterError("mho: Re lambda must be positive");
  if (std::abs(lambda.imag()) > w.c_lambda * lambda.real())
    throw ParameterError("mho: lambda outside the wedge |Im lambda| <= c Re lambda");
  if (lambda.imag() != 0.0 && std::abs(B) > w.c_B)
    throw ParameterError("mho: |B| too large for complex lambda");
  MHOParams p;
  p.k1 = k1;
  p.k2 = k2;
  p.B = B;
  p.lambda = lambda;
  const double S = k1 + k2, d = k1 - k2;
  p.f_plus = std::sqrt(S * S + 4 * B * B);
  p.f_minus = std::sqrt(d * d + 4 * B * B);
  p.eta = p.f_plus * k1 / S;
  p.zeta = p.f_plus * k2 / S;
  p.xi = 2 * B * d / S;
  p.E0 = lambda * p.f_plus / 2.0;
  p.degenerate = (k1 == k2 && B == 0.0);
  return p;
}

namespace detail {

// sinh(u) e^{-E} / u, accurate for small u.
inline double shc_scaled(double u, double E) {
  if (std::abs(u) < 1e-4) return (1.0 + u * u / 6.0) * std::exp(-E);
  if (u > 30.0) return 0.5 * (std::exp(u - E) - std::exp(-u - E)) / u;
  return std::sinh(u) / u * std::exp(-E);
}

}  // namespace detail

// phi(w, s) = lambda [ A1 w1^2 + A2 w2^2 + B1 w3^2 + B2 w4^2 + i (G1 w1 w4 + G2 w2 w3) ],
// w = (x1 - y1, x2 - y2, x1 + y1, x2 + y2), and log P(s).
struct HeatCoefficients {
  double A1, A2, B1, B2, G1, G2;
  double logP;
  double khat_defect;  // 2 f+^2 Khat e^{-f+ s} / (k1+k2)^2 - 1, -> 0 as s -> infinity
};

inline HeatCoefficients heat_coefficients(const MHOParams& p, double s) {
  const double k1 = p.k1, k2 = p.k2, S = k1 + k2, d = k1 - k2;
  const double fp = p.f_plus, fm = p.f_minus;
  const double up = 0.5 * fp * s, um = 0.5 * fm * s;
  const double E = up;
  const double ep = std::exp(-2.0 * up);  // e^{-f+ s}
  const double chp = 0.5 * (1.0 + ep);
  const double chm = 0.5 * (std::exp(um - E) + std::exp(-um - E));
  const double shcp = detail::shc_scaled(up, E), shcm = detail::shc_scaled(um, E);
  // (cosh u+ - cosh u-) e^{-E} = 2 sinh(O1 s/2) sinh(O2 s/2) e^{-E}
  const double o1 = p.omega1(), o2 = p.omega2();
  const double chdiff = 0.5 * std::expm1(-o1 * s) * std::expm1(-o2 * s);
  const double khat = 0.5 * s * s * (S * S * shcp * shcp - d * d * shcm * shcm);
  auto ahat = [&](double ki, double di) { return ki * (chp + chm) * 0.5 * s * (S * shcp - di * shcm); };
  auto bhat = [&](double ki, double di) { return ki * chdiff * 0.5 * s * (S * shcp + di * shcm); };
  const double g1hat = (k1 * k1 - k2 * k2) * 0.5 * s * s * (shcm * shcm - shcp * shcp);
  const double g2hat = 2.0 * k1 * k2 * s * s * shcp * shcm;
  HeatCoefficients c;
  c.A1 = ahat(k1, d) / (2 * khat);
  c.A2 = ahat(k2, -d) / (2 * khat);
  c.B1 = bhat(k1, d) / (2 * khat);
  c.B2 = bhat(k2, -d) / (2 * khat);
  c.G1 = p.B * (g1hat - g2hat) / (2 * khat);
  c.G2 = p.B * (g1hat + g2hat) / (2 * khat);
  c.logP = -std::log(2 * std::numbers::pi) + 0.5 * std::log(2 * k1 * k2 / khat) - E;
  // f+ s shc+ = 1 - e^{-f+ s}
  const double t = fp * s * d * shcm / S;
  c.khat_defect = ep * (ep - 2.0) - t * t;
  return c;
}

struct KernelValue {
  cd log_value;          // log q (principal imaginary part not enforced)
  bool representable = true;  // false when |Re log q| > 700
  cd value() const { return representable ? std::exp(log_value) : cd(0.0); }
};

namespace detail {
inline cd phi_of(const MHOParams& p, const HeatCoefficients& c, const Vec2& x, const Vec2& y) {
  const double w1 = x(0) - y(0), w2 = x(1) - y(1), w3 = x(0) + y(0), w4 = x(1) + y(1);
  return p.lambda * cd(c.A1 * w1 * w1 + c.A2 * w2 * w2 + c.B1 * w3 * w3 + c.B2 * w4 * w4,
                       c.G1 * w1 * w4 + c.G2 * w2 * w3);
}

// exp(z) - 1 without cancellation for small |z|.
inline cd expm1_c(cd z) {
  const double x = z.real(), y = z.imag();
  const double sy = std::sin(0.5 * y);
  return cd(std::expm1(x) * std::cos(y) - 2.0 * sy * sy, std::exp(x) * std::sin(y));
}
}  // namespace detail

// q(x,y,s) = lambda P(s) exp(-phi), as a log so it survives |lambda| ~ 1e3.
inline KernelValue heat_kernel_log(const MHOParams& p, const Vec2& x, const Vec2& y, double s) {
  if (!(s > 0.0)) throw ParameterError("heat_kernel: s must be positive");
  HeatCoefficients c = heat_coefficients(p, s);
  KernelValue k;
  k.log_value = std::log(p.lambda) + c.logP - detail::phi_of(p, c, x, y);
  k.representable = std::abs(k.log_value.real()) <= 700.0;
  return k;
}

inline cd heat_kernel(const MHOParams& p, const Vec2& x, const Vec2& y, double s) {
  return heat_kernel_log(p, x, y, s).value();
}

// psi0(x) = (lambda^2 eta zeta / pi^2)^{1/4} exp(-(lambda/2)(eta x1^2 + zeta x2^2 - i xi x1 x2)),
// continued analytically in lambda (principal root, Re lambda > 0).
inline cd ground_state(const MHOParams& p, const Vec2& x) {
  cd norm = std::sqrt(p.lambda) * std::pow(p.eta * p.zeta, 0.25) / std::sqrt(std::numbers::pi);
  return norm * std::exp(-0.5 * p.lambda * cd(p.eta * x(0) * x(0) + p.zeta * x(1) * x(1), -p.xi * x(0) * x(1)));
}

// psi0*(y, conj lambda): the analytic partner used in the rank-one counterterm.
inline cd ground_state_dual(const MHOParams& p, const Vec2& y) {
  cd norm = std::sqrt(p.lambda) * std::pow(p.eta * p.zeta, 0.25) / std::sqrt(std::numbers::pi);
  return norm * std::exp(-0.5 * p.lambda * cd(p.eta * y(0) * y(0) + p.zeta * y(1) * y(1), p.xi * y(0) * y(1)));
}

// How the counterterm decays in s. `reduced` uses exp(-(E0/lambda) s), which
// is exp(-s H / lambda) restricted to the ground state; `literal` uses
// exp(-E0 s) and is kept to show that it fails the resolvent identity.
enum class CountertermScaling { reduced, literal };

inline cd log_counterterm(const MHOParams& p, const Vec2& x, const Vec2& y, double s,
                          CountertermScaling sc = CountertermScaling::reduced) {
  cd decay = sc == CountertermScaling::reduced ? cd(0.5 * p.f_plus * s) : p.E0 * s;
  cd lpair = std::log(p.lambda) + 0.5 * std::log(p.eta * p.zeta) - std::log(std::numbers::pi) -
             0.5 * p.lambda *
                 cd(p.eta * (x(0) * x(0) + y(0) * y(0)) + p.zeta * (x(1) * x(1) + y(1) * y(1)),
                    -p.xi * (x(0) * x(1) - y(0) * y(1)));
  return lpair - decay;
}

// q - counterterm. With the reduced scaling the leading constants and the
// exp(-f+ s/2) decay cancel analytically, leaving expm1 of a small exponent.
inline cd heat_minus_counterterm(const MHOParams& p, const Vec2& x, const Vec2& y, double s,
                                 CountertermScaling sc = CountertermScaling::reduced) {
  HeatCoefficients c = heat_coefficients(p, s);
  cd lct = log_counterterm(p, x, y, s, sc);
  if (sc == CountertermScaling::literal) {
    cd lq = std::log(p.lambda) + c.logP - detail::phi_of(p, c, x, y);
    return std::exp(lq) - std::exp(lct);
  }
  const double w1 = x(0) - y(0), w2 = x(1) - y(1), w3 = x(0) + y(0), w4 = x(1) + y(1);
  const double a1 = c.A1 - p.eta / 4, a2 = c.A2 - p.zeta / 4, b1 = c.B1 - p.eta / 4, b2 = c.B2 - p.zeta / 4;
  const double g1 = c.G1 + p.xi / 4, g2 = c.G2 + p.xi / 4;
  cd dphi = p.lambda * cd(a1 * w1 * w1 + a2 * w2 * w2 + b1 * w3 * w3 + b2 * w4 * w4, g1 * w1 * w4 + g2 * w2 * w3);
  cd dlog = -0.5 * std::log1p(c.khat_defect) - dphi;
  if (dlog.real() > 1.0) {
    cd lq = lct + dlog;
    return std::exp(lq) - std::exp(lct);
  }
  return std::exp(lct) * detail::expm1_c(dlog);
}

// --------------------------------------------------------- D(s) and bounds

struct RegionBounds {
  double c1 = 0.1, C1 = 10.0, c_sharp = 0.05;
  double C = 2.0, Cp = 0.0, c = 0.1;  // Cp fixed by continuity unless set via from_tail

  static RegionBounds from_log_branch(double C, double c) {
    if (!(C > 1.0)) throw ParameterError("D-bound needs C > 1");
    RegionBounds r;
    r.C = C;
    r.c = c;
    r.Cp = C * std::log(C) * std::exp(c);
    return r;
  }
  // Given C' and c, solve C log C = C' e^{-c} for C > 1.
  static RegionBounds from_tail(double Cp, double c) {
    if (!(Cp > 0.0)) throw ParameterError("D-bound needs C' > 0");
    double target = Cp * std::exp(-c);
    double C = std::max(1.5, target + 1.0);
    for (int it = 0; it < 100; ++it) {
      double f = C * std::log(C) - target, df = std::log(C) + 1.0;
      double step = f / df;
      C = std::max(1.0 + 1e-15, C - step);
      if (std::abs(step) < 1e-15 * C) break;
    }
    RegionBounds r;
    r.C = C;
    r.Cp = Cp;
    r.c = c;
    return r;
  }
};

inline double d_bound(double s, const RegionBounds& rb) {
  if (!(s > 0.0)) throw ParameterError("d_bound: s must be positive");
  if (s < 1.0) return rb.C * std::log(rb.C / s);
  return rb.Cp * std::exp(-rb.c * s);
}

// ------------------------------------------------- modified Green's function

struct GreenOptions {
  double rel_tol = 1e-10;
  double c_mu = -1.0;  // admissible Re mu < f+/2 + c_mu; default omega2 / 4
  RegionBounds regions{};
  CountertermScaling scaling = CountertermScaling::reduced;
};

struct GreenValue {
  cd value;
  double abs_err = 0.0;
  int evaluations = 0;
};

inline double default_c_mu(const MHOParams& p) { return 0.25 * p.omega2(); }

// G(x,y) = int_0^inf (e^{mu s}/lambda) [q(x,y,s) - e^{-f+ s/2} psi0(x) psi0*(y)] ds,
// the kernel of (H - mu lambda)^{-1} (1 - P0).
inline GreenValue modified_green(const MHOParams& p, const Vec2& x, const Vec2& y, cd mu, GreenOptions o = {}) {
  const double r = (x - y).norm();
  if (!(r > 0.0)) throw SingularityError("modified_green: x = y");
  const double c_mu = o.c_mu >= 0.0 ? o.c_mu : default_c_mu(p);
  if (!(mu.real() < 0.5 * p.f_plus + c_mu)) throw DivergenceError("modified_green: Re mu beyond f+/2 + c_mu");
  if (!(p.omega2() > 0.0)) throw DivergenceError("modified_green: no spectral gap");

  auto integrand = [&](double s) -> cd {
    return std::exp(mu * s) * heat_minus_counterterm(p, x, y, s, o.scaling) / p.lambda;
  };
  GreenValue out;
  auto add = [&](const QuadResult<cd>& q) {
    out.value += q.value;
    out.abs_err += q.abs_err;
    out.evaluations += q.evaluations;
  };

  // Small s: the integrand behaves like (1/s) exp(-lambda r^2 / (2 s)); work in
  // u = log s, start where the Gaussian factor is below e^{-800}.
  const double lr = p.lambda.real();
  const double nx = x.norm() + y.norm();
  const double c1 = o.regions.c1, C1 = o.regions.C1;
  const double s_lo = std::min(0.5 * c1, lr * r * r / 3200.0);
  std::vector<double> cuts = {s_lo, c1};
  for (double b : {r / std::max(nx, 1e-300), 1.0 / (std::abs(p.lambda) * (x.squaredNorm() + y.squaredNorm())),
                   0.5 * lr * r * r})
    if (b > s_lo && b < c1) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  // On (0, s_lo) q is below e^{-1600}; the counterterm part integrates in closed form.
  {
    const cd kappa = mu - (o.scaling == CountertermScaling::reduced ? cd(0.5 * p.f_plus) : p.E0);
    const cd z = kappa * s_lo;
    const cd ratio = std::abs(z) < 1e-8 ? 1.0 + 0.5 * z : detail::expm1_c(z) / z;
    const cd lct = log_counterterm(p, x, y, 0.0, o.scaling);
    out.value -= std::exp(lct) * s_lo * ratio / p.lambda;
  }
  auto in_log = [&](double u) -> cd {
    double s = std::exp(u);
    return s * integrand(s);
  };
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    add(integrate_gk(in_log, std::log(cuts[i]), std::log(cuts[i + 1]), o.rel_tol, 1e-300, 4000));
  // Middle region in s.
  for (double a = c1; a < C1; a = std::min(C1, a * 4.0)) {
    double b = std::min(C1, a * 4.0);
    add(integrate_gk(integrand, a, b, o.rel_tol, 1e-300, 2000));
  }
  // Tail: |q - ct| e^{Re mu s} decays at least like exp(-(f+/2 + omega2 - Re mu) s).
  const double rate = 0.5 * p.f_plus + p.omega2() - mu.real();
  double a = C1;
  const double step = 8.0 / rate;
  double scale = std::abs(out.value) + 1e-300;
  for (int k = 0; k < 400; ++k) {
    auto q = integrate_gk(integrand, a, a + step, o.rel_tol, 1e-300, 500);
    add(q);
    scale = std::max(scale, std::abs(out.value));
    a += step;
    if (std::abs(q.value) < 1e-17 * scale && std::abs(integrand(a)) * step < 1e-17 * scale) break;
  }
  return out;
}

// ------------------------------------------------------------ grid operators

// lambda-scaled MHO on a grid: 1/2 (P - A)^2 with field -2 lambda B, plus
// 1/2 lambda^2 (k1^2 x1^2 + k2^2 x2^2). Real lambda only.
inline SparseHermitianOp build_mho_operator(const MHOParams& p, const Grid2D& g) {
  if (p.lambda.imag() != 0.0) throw ParameterError("grid MHO needs real lambda");
  const double lam = p.lambda.real();
  Eigen::VectorXd V(g.size());
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      double x1 = g.x1(i), x2 = g.x2(j);
      V(g.index(i, j)) = 0.5 * lam * lam * (p.k1 * p.k1 * x1 * x1 + p.k2 * p.k2 * x2 * x2);
    }
  return assemble_magnetic(g, -2.0 * lam * p.B, V, 0.5);
}

// Pointwise residual of (H - mu lambda) on a callable, same stencil as the grid operator.
template <class F>
cd mho_stencil_apply(const MHOParams& p, double h, const Vec2& x, F&& f) {
  const double lam = p.lambda.real();
  double V = 0.5 * lam * lam * (p.k1 * p.k1 * x(0) * x(0) + p.k2 * p.k2 * x(1) * x(1));
  return stencil_apply(-2.0 * lam * p.B, 0.5, h, x, f, V);
}

// Half-width of a box holding the ground state to exp(-18) in amplitude:
// L = 6 / sqrt(lambda * min eig(2 k^2)).
inline double mho_box_half_width(const MHOParams& p) {
  double kmin = std::min(p.k1, p.k2);
  return 6.0 / std::sqrt(p.lambda.real() * 2.0 * kmin * kmin);
}

// ------------------------------------------------ physical oscillator link

// (P - (b lambda/2) X^perp)^2 + (lambda^2/2) <X, Hess X> equals 2 H for
// H with B = -b/2 and k_i^2 = hess_i / 2 in the Hessian eigenframe.
struct PhysicalMHO {
  MHOParams p;
  Eigen::Matrix2d Q;  // columns: Hessian eigenvectors, det Q = +1

  double e0() const { return p.f_plus; }                 // at lambda = 1
  double e1() const { return 2.0 * p.f_plus - p.f_minus; }
  cd ground_state(const Vec2& x) const { return magtun::ground_state(p, Q.transpose() * x); }
};

inline PhysicalMHO physical_mho(const Eigen::Matrix2d& hessian, double b, double lambda) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hessian);
  Eigen::Matrix2d Q = es.eigenvectors();
  if (Q.determinant() < 0) Q.col(1) = -Q.col(1);
  Eigen::Vector2d ev = es.eigenvalues();
  if (!(ev(0) > 0.0)) throw ParameterError("hessian must be positive definite");
  PhysicalMHO m;
  m.Q = Q;
  m.p = mho_params(std::sqrt(ev(0) / 2.0), std::sqrt(ev(1) / 2.0), -0.5 * b, lambda);
  return m;
}

}  // namespace magtun
