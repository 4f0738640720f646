#pragma once

// One-dimensional quadrature: Gauss-Legendre panels, adaptive Gauss-Kronrod,
// and tanh-sinh for endpoint singularities. Integrands may return double or
// std::complex<double>.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace magtun {

using cd = std::complex<double>;

template <class T>
struct QuadResult {
  T value{};
  double abs_err = 0.0;
  int evaluations = 0;
};

namespace detail {

inline double mag(double x) { return std::abs(x); }
inline double mag(const cd& x) { return std::abs(x); }

}  // namespace detail

// Nodes and weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> x, w;

  explicit GaussLegendre(int n) : x(n), w(n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: n must be positive");
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  static const GaussLegendre& cached(int n) {
    static std::mutex m;
    static std::map<int, GaussLegendre> table;
    std::lock_guard<std::mutex> lock(m);
    auto it = table.find(n);
    if (it == table.end()) it = table.emplace(n, GaussLegendre(n)).first;
    return it->second;
  }

  template <class F>
  auto integrate(F&& f, double a, double b) const {
    using T = std::decay_t<decltype(f(a))>;
    T s{};
    double c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + r * x[i]);
    return T(s * r);
  }
};

// Kronrod 21-point extension of Gauss 10 (QUADPACK qk21 tables).
namespace detail {
inline constexpr std::array<double, 11> xgk21 = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> wgk21 = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478166, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg10 = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class F>
auto gk21(F& f, double a, double b) {
  using T = std::decay_t<decltype(f(a))>;
  double c = 0.5 * (a + b), r = 0.5 * (b - a);
  T fc = f(c);
  T k = wgk21[10] * fc;
  T g{};
  for (int j = 0; j < 10; ++j) {
    double dx = r * xgk21[j];
    T f1 = f(c - dx), f2 = f(c + dx);
    k += wgk21[j] * (f1 + f2);
    if (j % 2 == 1) g += wg10[j / 2] * (f1 + f2);
  }
  k *= r;
  g *= r;
  return std::pair<T, double>(k, mag(T(k - g)));
}
}  // namespace detail

// Adaptive Gauss-Kronrod with global error control.
template <class F>
auto integrate_gk(F f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0,
                  int max_intervals = 2000) {
  using T = std::decay_t<decltype(f(a))>;
  struct Seg {
    double a, b;
    T val;
    double err;
    bool operator<(const Seg& o) const { return err < o.err; }
  };
  QuadResult<T> out;
  if (a == b) return out;
  std::priority_queue<Seg> heap;
  auto [v0, e0] = detail::gk21(f, a, b);
  out.evaluations = 21;
  heap.push({a, b, v0, e0});
  T total = v0;
  double err = e0;
  int count = 1;
  while (count < max_intervals) {
    double tol = std::max(abs_tol, rel_tol * detail::mag(total));
    if (err <= tol) break;
    Seg s = heap.top();
    heap.pop();
    double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) {
      heap.push(s);
      break;
    }
    auto [v1, e1] = detail::gk21(f, s.a, m);
    auto [v2, e2] = detail::gk21(f, m, s.b);
    out.evaluations += 42;
    total += (v1 + v2) - s.val;
    err += (e1 + e2) - s.err;
    heap.push({s.a, m, v1, e1});
    heap.push({m, s.b, v2, e2});
    ++count;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().val;
    esum += heap.top().err;
    heap.pop();
  }
  out.value = sum;
  out.abs_err = esum;
  return out;
}

// Tanh-sinh on [a,b]. Nodes near an endpoint are formed as endpoint + distance,
// so with a = 0 the smallest abscissae carry full relative precision.
template <class F>
auto integrate_tanh_sinh(F f, double a, double b, double rel_tol = 1e-13, int max_level = 12) {
  using T = std::decay_t<decltype(f(a))>;
  QuadResult<T> out;
  if (a == b) return out;
  const double half = 0.5 * (b - a);
  const double pi2 = 0.5 * std::numbers::pi;
  auto node = [&](double t, double& x, double& w) -> bool {
    double u = pi2 * std::sinh(t);
    double ch = std::cosh(u);
    w = half * pi2 * std::cosh(t) / (ch * ch);
    double e = std::exp(-2.0 * std::abs(u));
    double dist = (b - a) * e / (1.0 + e);
    if (!(dist > 0.0)) return false;
    x = t < 0 ? a + dist : b - dist;
    return x > a && x < b;
  };
  // Truncate where weights underflow.
  const double tmax = 6.5;
  double h = 1.0;
  T sum{};
  {
    double x, w;
    if (node(0.0, x, w)) sum += w * f(x), ++out.evaluations;
    for (double t = h; t <= tmax; t += h) {
      if (node(t, x, w)) sum += w * f(x), ++out.evaluations;
      if (node(-t, x, w)) sum += w * f(x), ++out.evaluations;
    }
  }
  T est = sum * h;
  double prev_diff = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    T add{};
    for (double t = h; t <= tmax; t += 2.0 * h) {
      double x, w;
      if (node(t, x, w)) add += w * f(x), ++out.evaluations;
      if (node(-t, x, w)) add += w * f(x), ++out.evaluations;
    }
    sum += add;
    T next = sum * h;
    double diff = detail::mag(T(next - est));
    est = next;
    out.abs_err = diff;
    if (level >= 3 && (diff <= rel_tol * detail::mag(est) || (diff == 0.0 && prev_diff == 0.0))) break;
    prev_diff = diff;
  }
  out.value = est;
  return out;
}

}  // namespace magtun
