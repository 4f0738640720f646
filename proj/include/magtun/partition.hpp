#pragma once

// Dyadic annular partition of unity chi_0..chi_N on R^2 with companions psi_nu
// equal to 1 on supp chi_nu, radial profiles built from one smoothed step.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace magtun {

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Smoothed step S on [0,1]: S(0) = 0, S(1) = 1. order >= 1 gives the degree
// 2 order + 1 polynomial with `order` vanishing derivatives at both ends;
// order = 0 gives the C-infinity ratio of exp(-1/x) bumps.
class SmoothStep {
 public:
  explicit SmoothStep(int order = 4) : order_(order) {
    if (order < 0 || order > 12) throw PartitionError("smooth step order must be in [0, 12]");
    // S(x) = x^{k+1} sum_j binom(k+j, j) binom(2k+1, k-j) (-x)^j, k = order
    const int k = order;
    for (int j = 0; j <= k; ++j) coeff_.push_back(binom(k + j, j) * binom(2 * k + 1, k - j) * (j % 2 ? -1.0 : 1.0));
  }
  int order() const { return order_; }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (order_ == 0) {
      auto e = [](double t) { return std::exp(-1.0 / t); };
      return e(x) / (e(x) + e(1.0 - x));
    }
    double s = 0.0;
    for (int j = int(coeff_.size()) - 1; j >= 0; --j) s = s * x + coeff_[j];
    return std::clamp(s * std::pow(x, order_ + 1), 0.0, 1.0);  // Horner rounding can overshoot by ~1e-15
  }

  // 1 below lo, 0 above hi.
  double down(double s, double lo, double hi) const { return 1.0 - (*this)((s - lo) / (hi - lo)); }

 private:
  static double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }
  int order_;
  std::vector<double> coeff_;
};

struct DyadicPartition {
  double delta = 0.0, R = 0.0;
  int N = 0;
  SmoothStep step;

  // vartheta: 1 on [0,1], 0 on [2, inf)
  double vartheta(double s) const { return step.down(s, 1.0, 2.0); }
  // sigma_0: 1 on [0,2], 0 on [3, inf)
  double sigma0(double s) const { return step.down(s, 2.0, 3.0); }
  // sigma: 1 on [1/2, 2], supported in [1/3, 3]
  double sigma(double s) const { return step((s - 1.0 / 3.0) / (1.0 / 6.0)) * step.down(s, 2.0, 3.0); }
  // sigma_inf: 0 on [0, 1/2], 1 on [1, inf)
  double sigma_inf(double s) const { return step((s - 0.5) / 0.5); }

  double delta_nu(int nu) const { return std::ldexp(delta, nu); }

  double chi_r(int nu, double r) const {
    if (nu == 0) return vartheta(r / delta);
    if (nu == N) return 1.0 - vartheta(r / delta_nu(N - 1));  // closes the telescoping sum
    return std::clamp(vartheta(r / delta_nu(nu)) - vartheta(r / delta_nu(nu - 1)), 0.0, 1.0);
  }
  double psi_r(int nu, double r) const {
    if (nu == 0) return sigma0(r / delta);
    if (nu == N) return sigma_inf(r / delta_nu(N - 1));
    return sigma(r / delta_nu(nu));
  }
  double chi(int nu, const Eigen::Vector2d& x) const { return chi_r(nu, x.norm()); }
  double psi(int nu, const Eigen::Vector2d& x) const { return psi_r(nu, x.norm()); }

  // Annulus (inner, outer) containing supp chi_nu; outer = inf for nu = N.
  std::pair<double, double> chi_support(int nu) const {
    if (nu == 0) return {0.0, 2.0 * delta};
    if (nu == N) return {delta_nu(N - 1), INFINITY};
    return {delta_nu(nu - 1), delta_nu(nu + 1)};
  }
  // Open sets U_nu containing supp psi_nu.
  std::pair<double, double> u_set(int nu) const {
    if (nu == 0) return {0.0, 8.0 * delta};
    if (nu == N) return {std::ldexp(delta, N - 3), INFINITY};
    return {std::ldexp(delta, nu - 3), std::ldexp(delta, nu + 3)};
  }

  int overlap_count(double r) const {
    int c = 0;
    for (int nu = 0; nu <= N; ++nu) c += psi_r(nu, r) != 0.0;
    return c;
  }
};

inline int partition_size(double delta, double R) { return int(std::ceil(std::log2(R / delta) - 1e-12)); }

inline DyadicPartition build_partition(double delta, double R, int order = 4) {
  if (!(delta > 0.0)) throw PartitionError("partition needs delta > 0");
  if (!(R > 8.0 * delta)) throw PartitionError("partition needs R > 8 delta");
  DyadicPartition p;
  p.delta = delta;
  p.R = R;
  p.N = partition_size(delta, R);
  p.step = SmoothStep(order);
  return p;
}

// delta = Lambda^{-1/2 + eta}.
inline double mesoscopic_delta(double Lambda, double eta) { return std::pow(Lambda, -0.5 + eta); }

struct DerivativeReport {
  int order = 0;
  std::vector<double> maxima;  // per nu = 1..N-1 (interior annuli)
  std::vector<double> scales;  // delta_nu
  double exponent = 0.0;       // fitted slope of log max against log delta_nu
};

struct PartitionReport {
  double max_sum_defect = 0.0;
  int max_overlap = 0;
  double max_chi = 0.0;
  bool psi_covers_chi = true;
  bool supports_ok = true;
  std::vector<DerivativeReport> derivatives;
};

// Finite-difference radial derivatives (central stencils of order 2) on a
// fine grid across the support of each interior chi_nu, with step scaled to
// delta_nu; the fitted exponent should be -order.
inline DerivativeReport derivative_scaling(const DyadicPartition& p, int order, int samples = 4000) {
  if (order < 1 || order > 3) throw PartitionError("derivative order must be 1, 2 or 3");
  DerivativeReport rep;
  rep.order = order;
  for (int nu = 1; nu <= p.N - 1; ++nu) {
    auto [lo, hi] = p.chi_support(nu);
    const double h = 1e-3 * p.delta_nu(nu);
    auto f = [&](double r) { return p.chi_r(nu, r); };
    double mx = 0.0;
    for (int i = 0; i <= samples; ++i) {
      double r = lo + (hi - lo) * i / samples;
      double d;
      if (order == 1) d = (f(r + h) - f(r - h)) / (2 * h);
      else if (order == 2) d = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h);
      else d = (f(r + 2 * h) - 2 * f(r + h) + 2 * f(r - h) - f(r - 2 * h)) / (2 * h * h * h);
      mx = std::max(mx, std::abs(d));
    }
    rep.maxima.push_back(mx);
    rep.scales.push_back(p.delta_nu(nu));
  }
  const int n = int(rep.maxima.size());
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      double x = std::log(rep.scales[i]), y = std::log(rep.maxima[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

// Sum-to-one, overlap, range, psi = 1 on supp chi and support containment,
// sampled on `points` radii log-spread over [delta/10, 4 R] plus the
// breakpoints 2^k delta.
inline PartitionReport verify_partition(const DyadicPartition& p, int max_order = 3, int points = 10000) {
  PartitionReport rep;
  std::vector<double> radii;
  const double lo = 0.1 * p.delta, hi = 4.0 * std::max(p.R, p.delta_nu(p.N));
  for (int i = 0; i < points; ++i) radii.push_back(lo * std::pow(hi / lo, (i + 0.5) / points));
  for (int k = -1; k <= p.N + 2; ++k) radii.push_back(std::ldexp(p.delta, k));
  radii.push_back(0.0);
  for (double r : radii) {
    double s = 0.0;
    for (int nu = 0; nu <= p.N; ++nu) {
      double c = p.chi_r(nu, r);
      s += c;
      rep.max_chi = std::max(rep.max_chi, c);
      if (c != 0.0) {
        if (p.psi_r(nu, r) != 1.0) rep.psi_covers_chi = false;
        auto [a, b] = p.chi_support(nu);
        if (r < a || r > b) rep.supports_ok = false;
      }
      if (p.psi_r(nu, r) != 0.0) {
        auto [a, b] = p.u_set(nu);
        if (!(r > a || nu == 0) || !(r < b)) rep.supports_ok = false;
      }
    }
    rep.max_sum_defect = std::max(rep.max_sum_defect, std::abs(s - 1.0));
    rep.max_overlap = std::max(rep.max_overlap, p.overlap_count(r));
  }
  for (int k = 1; k <= max_order; ++k) rep.derivatives.push_back(derivative_scaling(p, k));
  return rep;
}

}  // namespace magtun
