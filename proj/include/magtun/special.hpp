#pragma once

// Complex Gamma (Lanczos series with reflection) and the Tricomi function
// U(a,1,z) through its Laplace-type integral.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "magtun/quadrature.hpp"

namespace magtun {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {
// g = 7, n = 9 coefficients.
inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_c[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
}  // namespace detail

// log Gamma on the principal branch of the Lanczos form; continuous in the
// right half-plane, reflected for Re z < 1/2.
inline cd lgamma_c(cd z) {
  const double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    if (z.imag() == 0.0 && z.real() == std::floor(z.real()))
      throw DomainError("lgamma_c: pole at nonpositive integer");
    // Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return std::log(pi) - std::log(std::sin(pi * z)) - lgamma_c(1.0 - z);
  }
  z -= 1.0;
  cd x = detail::lanczos_c[0];
  for (int i = 1; i < 9; ++i) x += detail::lanczos_c[i] / (z + double(i));
  cd t = z + detail::lanczos_g + 0.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cd gamma_c(cd z) {
  const double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    if (z.imag() == 0.0 && z.real() == std::floor(z.real()))
      throw DomainError("gamma_c: pole at nonpositive integer");
    return pi / (std::sin(pi * z) * gamma_c(1.0 - z));
  }
  return std::exp(lgamma_c(z));
}

// I(a,w) = Gamma(a) U(a,1,w) = int_0^inf e^{-tw} t^{a-1} (1+t)^{-a} dt,
// Re a > 0, Re w > 0. Split at t0: near part as t0^a/a plus a tanh-sinh
// integral of t^{a-1}(g(t)-1), far part by adaptive Gauss-Kronrod in log t.
inline QuadResult<cd> gamma_tricomi_u1(cd a, cd w, double rel_tol = 1e-12) {
  if (!(a.real() > 0.0)) throw DomainError("tricomi: Re a must be positive");
  if (!(w.real() > 0.0)) throw DomainError("tricomi: Re z must be positive");
  QuadResult<cd> out;
  const double t0 = std::min(0.5, 0.5 / std::abs(w));
  // log g(t) = -t w - a log(1+t)
  auto gm1 = [&](double t) -> cd {
    cd e = -t * w - a * std::log1p(t);
    if (std::abs(e) < 1e-3) {
      // expm1 for complex argument via series
      cd term = e, sum = e;
      for (int k = 2; k < 12; ++k) {
        term *= e / double(k);
        sum += term;
      }
      return sum;
    }
    return std::exp(e) - 1.0;
  };
  cd near_closed = std::exp(a * std::log(t0)) / a;
  // t^{a-1}(g-1) = O(t^a); below 1e-290 it is negligible and 1/t would overflow.
  auto near_f = [&](double t) -> cd { return t < 1e-290 ? cd(0.0) : std::exp((a - 1.0) * std::log(t)) * gm1(t); };
  auto near = integrate_tanh_sinh(near_f, 0.0, t0, 1e-14);

  // Far part: t = e^u, dt = e^u du.
  const double wr = w.real();
  double t_max = std::max(4.0 * t0, (800.0 + 2.0 * std::abs(a)) / wr);
  // Include the saddle of (t/(1+t))^a e^{-tw} when a is large.
  t_max = std::max(t_max, 50.0 * std::sqrt(std::abs(a) / wr));
  auto far_f = [&](double u) -> cd {
    double t = std::exp(u);
    cd e = u * a - a * std::log1p(t) - t * w;
    if (e.real() < -745.0) return 0.0;
    return std::exp(e);
  };
  auto far = integrate_gk(far_f, std::log(t0), std::log(t_max), rel_tol * 0.1, 0.0, 4000);

  out.value = near_closed + near.value + far.value;
  out.abs_err = near.abs_err + far.abs_err + 1e-16 * std::abs(near_closed);
  out.evaluations = near.evaluations + far.evaluations;
  return out;
}

// Tricomi U(a,1,z) on the integral-representation domain.
inline cd tricomi_u(cd a, cd z, double rel_tol = 1e-12) {
  return gamma_tricomi_u1(a, z, rel_tol).value / gamma_c(a);
}

}  // namespace magtun
