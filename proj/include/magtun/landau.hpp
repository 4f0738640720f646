#pragma once

// Landau operator H = (P - A)^2, A = (B/2) x^perp: heat kernel, resolvent
// kernel through Gamma(a) U(a,1,w), application of the resolvent to compactly
// supported grid data, and a fitted off-diagonal decay rate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "magtun/grid_model.hpp"
#include "magtun/parallel.hpp"
#include "magtun/quadrature.hpp"
#include "magtun/special.hpp"

namespace magtun {

class PoleError : public std::domain_error {
 public:
  PoleError(const std::string& what, double distance) : std::domain_error(what), distance(distance) {}
  double distance;
};

using CMat = Eigen::MatrixXcd;

inline double wedge(const Vec2& x, const Vec2& y) { return x(0) * y(1) - x(1) * y(0); }

// log of (B / (4 pi sinh(B t))) exp(-(B/4) coth(B t) |x-y|^2 - i (B/2) x^y).
inline cd landau_heat_kernel_log(cd B, const Vec2& x, const Vec2& y, double t) {
  if (!(t > 0.0)) throw ParameterError("landau heat kernel: t must be positive");
  const double r2 = (x - y).squaredNorm();
  cd bt = B * t;
  cd lpref, gauss;
  if (std::abs(bt) < 1e-4) {
    // B/sinh(Bt) = (1/t)(1 - (Bt)^2/6), (B/4) coth(Bt) = (1/(4t))(1 + (Bt)^2/3)
    lpref = -std::log(4.0 * std::numbers::pi * t) + std::log1p(-(bt * bt).real() / 6.0) + cd(0, -(bt * bt).imag() / 6.0);
    gauss = (1.0 + bt * bt / 3.0) / (4.0 * t);
  } else {
    // sinh(Bt) = e^{Bt}(1 - e^{-2Bt})/2, stable for large Re Bt
    cd e2 = std::exp(-2.0 * bt);
    lpref = std::log(B / (2.0 * std::numbers::pi)) - bt - std::log(1.0 - e2);
    gauss = 0.25 * B * (1.0 + e2) / (1.0 - e2);
  }
  return lpref - gauss * r2 - cd(0, 0.5) * B * wedge(x, y);
}

inline cd landau_heat_kernel(cd B, const Vec2& x, const Vec2& y, double t) {
  cd l = landau_heat_kernel_log(B, x, y, t);
  return l.real() < -745.0 ? cd(0.0) : std::exp(l);
}

struct LandauKernelParams {
  cd B = 1.0;
  cd z = 0.0;
  double pole_guard = 1e-10;

  cd a() const { return 0.5 - z / (2.0 * B); }
  // Distance from a to the nearest point of {0, -1, -2, ...}.
  double pole_distance() const {
    cd av = a();
    double n = std::max(0.0, std::round(-av.real()));
    return std::abs(av + n);
  }
  void validate() const {
    if (!(B.real() > 0.0)) throw ParameterError("landau: Re B must be positive");
    double d = pole_distance();
    if (d < pole_guard)
      throw PoleError("landau: spectral parameter within " + std::to_string(d) + " of a Landau level", d);
    if (!(a().real() > 0.0))
      throw DomainError("landau: Re(1/2 - z/2B) must be positive (integral representation)");
  }
};

// Radial part of the resolvent kernel:
// (1/4 pi) Gamma(a) U(a, 1, B r^2/2) exp(-B r^2/4), a = 1/2 - z/2B.
inline cd landau_radial(const LandauKernelParams& p, double r, double rel_tol = 1e-12) {
  if (!(r > 0.0)) throw ParameterError("landau resolvent kernel: x = y");
  cd w = 0.5 * p.B * r * r;
  cd I = gamma_tricomi_u1(p.a(), w, rel_tol).value;
  return I * std::exp(-0.5 * w) / (4.0 * std::numbers::pi);
}

inline cd landau_resolvent_kernel(const LandauKernelParams& p, const Vec2& x, const Vec2& y) {
  p.validate();
  return landau_radial(p, (x - y).norm()) * std::exp(cd(0, -0.5) * p.B * wedge(x, y));
}

// Punctured lattice rule for a logarithmic singularity: for smooth compactly
// supported g, int log|v| g(v) dv = h^2 [sum_{v != 0} log|v| g(v) + (log h + c) g(0)] + O(h^4),
// with c obtained by Richardson extrapolation of Gaussian test integrals.
inline constexpr double kLogLatticeCorrection = -1.3105329259;

// Origin weight (divided by h^2) for the radial kernel, which behaves as
// -(1/2 pi) log r + beta near 0.
inline cd landau_origin_weight(const LandauKernelParams& p, double h) {
  const double alpha = -0.5 / std::numbers::pi;
  const double r0 = 1e-4 * h;
  cd beta = landau_radial(p, r0) - alpha * std::log(r0);
  return alpha * (std::log(h) + kLogLatticeCorrection) + beta;
}

// Radial kernel values on lattice displacements, indexed by m^2 + n^2.
class LatticeKernelTable {
 public:
  LatticeKernelTable(const LandauKernelParams& p, double h, int max_step, int threads = 1) {
    p.validate();
    const int maxd2 = 2 * max_step * max_step;
    values_.assign(maxd2 + 1, cd(0.0));
    std::vector<char> used(maxd2 + 1, 0);
    for (int m = 0; m <= max_step; ++m)
      for (int n = m; n <= max_step; ++n) used[m * m + n * n] = 1;
    std::vector<int> todo;
    for (int d = 1; d <= maxd2; ++d)
      if (used[d]) todo.push_back(d);
    parallel_for(int(todo.size()), threads, [&](int k) {
      int d = todo[k];
      values_[d] = landau_radial(p, h * std::sqrt(double(d)));
    });
    values_[0] = landau_origin_weight(p, h);
  }
  cd operator()(int m, int n) const { return values_[m * m + n * n]; }

 private:
  std::vector<cd> values_;
};

struct LandauApplyOptions {
  double target_margin = -1.0;  // targets within this distance of the support box; < 0 means all nodes
  int threads = 1;
};

// (R f)(x) = sum_y K(x,y) f(y) h^2, the kernel sampled at lattice points with
// the corrected weight on the diagonal. The phase exp(-i(B/2)(x1 y2 - x2 y1)) is a
// product of two separable factors.
inline Field apply_landau_resolvent(const LandauKernelParams& p, const Field& f, LandauApplyOptions o = {}) {
  p.validate();
  const Grid2D& g = f.grid;
  int i0 = g.n1, i1 = -1, j0 = g.n2, j1 = -1;
  std::vector<int> src;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      if (f.at(i, j) != cd(0.0)) {
        src.push_back(g.index(i, j));
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
      }
  Field out(g);
  if (src.empty()) return out;
  if (i0 == 0 || j0 == 0 || i1 == g.n1 - 1 || j1 == g.n2 - 1)
    throw GridError("landau resolvent: support touches the grid boundary");
  int ti0 = 0, ti1 = g.n1 - 1, tj0 = 0, tj1 = g.n2 - 1;
  if (o.target_margin >= 0.0) {
    int mm = int(std::ceil(o.target_margin / g.h));
    ti0 = std::max(0, i0 - mm);
    ti1 = std::min(g.n1 - 1, i1 + mm);
    tj0 = std::max(0, j0 - mm);
    tj1 = std::min(g.n2 - 1, j1 + mm);
  }
  const int max_step = std::max({ti1 - i0, i1 - ti0, tj1 - j0, j1 - tj0});
  LatticeKernelTable K(p, g.h, max_step, o.threads);
  // phase(x, y) = e1(i_x, j_y) * e2(j_x, i_y), e1 = exp(-i B/2 x1 y2), e2 = exp(+i B/2 x2 y1)
  const cd hb = cd(0, 0.5) * p.B;
  std::vector<int> si(src.size()), sj(src.size());
  for (size_t k = 0; k < src.size(); ++k) {
    si[k] = src[k] / g.n2;
    sj[k] = src[k] % g.n2;
  }
  const double h2 = g.h * g.h;
  // E1(ti, j) = exp(-i B/2 x1(ti) x2(j)), E2(tj, i) = exp(+i B/2 x2(tj) x1(i))
  CMat E1(g.n1, g.n2), E2(g.n2, g.n1);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      E1(i, j) = std::exp(-hb * g.x1(i) * g.x2(j));
      E2(j, i) = std::exp(hb * g.x2(j) * g.x1(i));
    }
  std::vector<cd> fs(src.size());
  for (size_t k = 0; k < src.size(); ++k) fs[k] = f.values(src[k]);
  const int nt = ti1 - ti0 + 1;
  parallel_for(nt, o.threads, [&](int r) {
    int ti = ti0 + r;
    for (int tj = tj0; tj <= tj1; ++tj) {
      cd acc = 0.0;
      for (size_t k = 0; k < src.size(); ++k) {
        int m = std::abs(ti - si[k]), n = std::abs(tj - sj[k]);
        acc += K(m, n) * E1(ti, sj[k]) * E2(tj, si[k]) * fs[k];
      }
      out.at(ti, tj) = acc * h2;
    }
  });
  return out;
}

// ------------------------------------------------------------ decay rate

struct DecayFit {
  double rate = 0.0;
  double band = 0.0;     // two standard errors of the slope
  double decades = 0.0;  // dynamic range of the measured norms
  bool low_dynamic_range = false;
  std::vector<double> distances, log_norms;
};

// Least-squares slope of log ||chi_S R chi_K|| against dist(S, K): K is the
// disc of radius `source_radius` at the origin, S the lattice annulus
// {d <= |x| - source_radius < d + h} for each d in `distances`. The operator
// norm is approximated by the response to the normalized indicator of K.
inline DecayFit offdiag_decay_rate(const LandauKernelParams& p, double h, double source_radius,
                                   const std::vector<double>& distances, int threads = 1) {
  p.validate();
  if (distances.size() < 3) throw ParameterError("decay fit needs at least three distances");
  const int rs = int(std::floor(source_radius / h));
  std::vector<std::pair<int, int>> src;
  for (int m = -rs; m <= rs; ++m)
    for (int n = -rs; n <= rs; ++n)
      if (h * std::hypot(m, n) <= source_radius) src.push_back({m, n});
  const double dmax = *std::max_element(distances.begin(), distances.end());
  const int reach = int(std::ceil((source_radius + dmax + h) / h)) + 1;
  LatticeKernelTable K(p, h, reach + rs, threads);
  const double fval = 1.0 / std::sqrt(double(src.size()) * h * h);
  DecayFit fit;
  for (double d : distances) {
    double lo = source_radius + d, hi = lo + h;
    double acc = 0.0;
    int count = 0;
    int R = int(std::ceil(hi / h));
    for (int a = -R; a <= R; ++a)
      for (int b = -R; b <= R; ++b) {
        double r = h * std::hypot(a, b);
        if (r < lo || r >= hi) continue;
        Vec2 x(a * h, b * h);
        cd u = 0.0;
        for (auto [m, n] : src) {
          Vec2 y(m * h, n * h);
          u += K(std::abs(a - m), std::abs(b - n)) * std::exp(cd(0, -0.5) * p.B * wedge(x, y));
        }
        acc += std::norm(u * fval * h * h) * h * h;
        ++count;
      }
    if (count == 0) throw ParameterError("decay fit: annulus contains no lattice points");
    fit.distances.push_back(d);
    fit.log_norms.push_back(0.5 * std::log(acc));
  }
  const int n = int(fit.distances.size());
  double mx = 0, my = 0;
  for (int k = 0; k < n; ++k) {
    mx += fit.distances[k];
    my += fit.log_norms[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    sxx += (fit.distances[k] - mx) * (fit.distances[k] - mx);
    sxy += (fit.distances[k] - mx) * (fit.log_norms[k] - my);
  }
  double slope = sxy / sxx;
  double ss = 0;
  for (int k = 0; k < n; ++k) {
    double e = fit.log_norms[k] - (my + slope * (fit.distances[k] - mx));
    ss += e * e;
  }
  fit.rate = -slope;
  fit.band = n > 2 ? 2.0 * std::sqrt(ss / (n - 2) / sxx) : 0.0;
  auto [lo, hi] = std::minmax_element(fit.log_norms.begin(), fit.log_norms.end());
  fit.decades = (*hi - *lo) / std::log(10.0);
  fit.low_dynamic_range = fit.decades < 4.0;
  return fit;
}

inline void write_decay_csv(const DecayFit& fit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "distance,log_norm,fitted_rate,band\n";
  out.precision(17);
  for (size_t k = 0; k < fit.distances.size(); ++k)
    out << fit.distances[k] << ',' << fit.log_norms[k] << ',' << fit.rate << ',' << fit.band << '\n';
}

}  // namespace magtun
