#pragma once

// Verification suites shared by the CLI check subcommands and the acceptance
// runner. Each check compares a library route against an independent one
// (closed form, series, generic eigensolver, quadrature) or tests a bound,
// and reports the measured value next to its limit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magtun/blaschke.hpp"
#include "magtun/green_bound.hpp"
#include "magtun/landau.hpp"
#include "magtun/mho.hpp"
#include "magtun/partition.hpp"
#include "magtun/quadrature.hpp"
#include "magtun/special.hpp"
#include "magtun/spectral.hpp"
#include "magtun/tunneling.hpp"

namespace magtun::suites {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;  // measured quantity
  double limit = 0.0;  // threshold it is compared against
  std::string detail;
  double seconds = 0.0;
};

inline bool all_pass(const std::vector<Check>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass; });
}

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// Runs f, which fills value/limit/pass/detail, and records wall time. An
// exception becomes a failed check carrying its message.
inline Check timed(const std::string& name, const std::function<void(Check&)>& f) {
  Check c;
  c.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    f(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

// ------------------------------------------------------------- oracles

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!).
inline double e1_series(double x) {
  const double euler_gamma = 0.57721566490153286061;
  double sum = 0.0, term = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -x / k;
    sum += term / k;
  }
  return -euler_gamma - std::log(x) - sum;
}

// Trapezoid sum_z K1(x,z) K2(z,y) h^2 over [-L, L]^2.
template <class K1, class K2>
cd compose_on_box(const Vec2& x, const Vec2& y, double L, double h, K1&& k1, K2&& k2) {
  const int n = int(std::round(2 * L / h));
  cd acc = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Vec2 z(-L + i * h, -L + j * h);
      acc += k1(x, z) * k2(z, y);
    }
  return acc * h * h;
}

// ---------------------------------------------------------------- MHO

struct MhoSuiteConfig {
  double lambda = 30.0, k1 = 1.0, k2 = 2.0, B = 0.5;
  int grid_n = 200;
  double grid_L = 0.0;  // 0: decay rule
  double semigroup_s = 0.3, semigroup_sp = 0.5;
  GreenBoundConstants green{};
  int green_tuples = 200;
  unsigned green_seed = 98765u;
};

inline std::vector<Check> mho_suite(const MhoSuiteConfig& cfg) {
  std::vector<Check> out;
  MHOParams p = mho_params(cfg.k1, cfg.k2, cfg.B, cfg.lambda);
  SpectralResult res;
  Grid2D g;
  out.push_back(timed("mho.ground_energy", [&](Check& c) {
    double L = cfg.grid_L > 0 ? cfg.grid_L : mho_box_half_width(p);
    g = Grid2D::square(L, cfg.grid_n);
    res = lowest_eigs(build_mho_operator(p, g), 1);
    c.value = std::abs(res.eigenvalues[0] / p.E0.real() - 1.0);
    c.limit = 5e-3;
    c.pass = c.value <= c.limit;
    c.detail = "E_grid=" + fmt(res.eigenvalues[0]) + " E0=" + fmt(p.E0.real()) + " grid " +
               std::to_string(g.n1) + "^2 L=" + fmt(g.L1);
  }));
  out.push_back(timed("mho.ground_overlap", [&](Check& c) {
    if (res.eigenvectors.empty()) throw std::runtime_error("no grid eigenvector");
    Field psi = Field::sample(g, [&](const Vec2& x) { return ground_state(p, x); });
    psi.normalize();
    c.value = std::abs(1.0 - std::abs(psi.inner(res.eigenvectors[0])));
    c.limit = 1e-3;
    c.pass = c.value <= c.limit;
  }));
  out.push_back(timed("mho.semigroup", [&](Check& c) {
    // unit-lambda kernel, two (x, y) pairs
    MHOParams q = mho_params(cfg.k1, cfg.k2, cfg.B, 1.0);
    auto K = [&](double s) { return [&q, s](const Vec2& a, const Vec2& b) { return heat_kernel(q, a, b, s); }; };
    c.limit = 1e-6;
    for (auto [x, y] : {std::pair{Vec2(0.2, -0.3), Vec2(-0.4, 0.1)}, std::pair{Vec2(0.0, 0.5), Vec2(0.7, 0.0)}}) {
      cd lhs = compose_on_box(x, y, 5.0, 0.04, K(cfg.semigroup_s), K(cfg.semigroup_sp));
      cd rhs = heat_kernel(q, x, y, cfg.semigroup_s + cfg.semigroup_sp);
      c.value = std::max(c.value, std::abs(lhs - rhs) / std::abs(rhs));
    }
    c.pass = c.value <= c.limit;
  }));
  out.push_back(timed("mho.green_size_bound", [&](Check& c) {
    using namespace bound_sampling;
    RegionBounds shape = RegionBounds::from_log_branch(cfg.green.shape_C, cfg.green.shape_c);
    int violations = 0;
    double worst = 0.0;
    for (const auto& t : sample_green_tuples(cfg.green_tuples, cfg.green_seed)) {
      double r = green_abs(t) / (cfg.green.C * d_bound(cfg.green.c * t.arg(), shape));
      worst = std::max(worst, r);
      violations += r > 1.0;
    }
    c.value = worst;
    c.limit = 1.0;
    c.pass = violations == 0;
    c.detail = std::to_string(violations) + " of " + std::to_string(cfg.green_tuples) + " tuples above the bound";
  }));
  out.push_back(timed("mho.green_resolvent_residual", [&](Check& c) {
    MHOParams q = mho_params(1.0, 2.0, 0.5, 3.0);
    const Vec2 y(0.1, -0.15);
    const double mu = 0.3, h = 2e-3;
    GreenOptions o;
    o.rel_tol = 1e-13;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 12; ++k)
      for (double r : {0.25, 0.5}) {
        Vec2 x = y + r * Vec2(std::cos(0.5 * k + 0.1), std::sin(0.5 * k + 0.1));
        auto G = [&](const Vec2& z) { return modified_green(q, z, y, mu, o).value; };
        cd lhs = mho_stencil_apply(q, h, x, G) - mu * q.lambda * G(x);
        cd proj = ground_state(q, x) * ground_state_dual(q, y);
        num = std::max(num, std::abs(lhs + proj));
        den = std::max(den, std::abs(proj));
      }
    c.value = num / den;
    c.limit = 1e-3;
    c.pass = c.value <= c.limit;
  }));
  return out;
}

// -------------------------------------------------------------- Landau

struct LandauSuiteConfig {
  double lambda = 40.0, b = 0.2, mu = 0.5;
  std::vector<double> decay_lambdas{20.0, 40.0, 80.0};
  unsigned seed = 17;
  int threads = 1;
  std::vector<DecayFit>* fits = nullptr;  // optional sink for the decay fits
};

inline LandauKernelParams well_regime(cd lambda, double b, double mu) {
  LandauKernelParams p;
  p.B = b * lambda;
  p.z = -lambda * lambda + mu * lambda;
  return p;
}

inline std::vector<Check> landau_suite(const LandauSuiteConfig& cfg) {
  std::vector<Check> out;
  out.push_back(timed("landau.semigroup", [&](Check& c) {
    const double B = 2.0, t = 0.3, tp = 0.5;
    Vec2 x(0.2, -0.1), y(-0.3, 0.4);
    cd lhs = compose_on_box(
        x, y, 5.0, 0.03, [&](const Vec2& a, const Vec2& z) { return landau_heat_kernel(B, a, z, t); },
        [&](const Vec2& z, const Vec2& b) { return landau_heat_kernel(B, z, b, tp); });
    cd ref = landau_heat_kernel(B, x, y, t + tp);
    c.value = std::abs(lhs - ref) / std::abs(ref);
    c.limit = 1e-6;
    c.pass = c.value <= c.limit;
  }));
  out.push_back(timed("landau.tricomi_unit", [&](Check& c) {
    double oracle = std::exp(1.0) * e1_series(1.0);
    cd u = tricomi_u(1.0, 1.0);
    c.value = std::abs(u - oracle) / std::abs(u);
    c.limit = 1e-8;
    c.pass = c.value <= c.limit;
    c.detail = "U(1,1,1)=" + fmt(u.real());
  }));
  out.push_back(timed("landau.pole_slope", [&](Check& c) {
    const double B = 2.0;
    Vec2 x(0.1, 0.0), y(-0.2, 0.3);
    std::vector<double> ld, lk;
    for (double d : {1e-2, 1e-3, 1e-4, 1e-5}) {
      LandauKernelParams p;
      p.B = B;
      p.z = B - d;
      ld.push_back(std::log(d));
      lk.push_back(std::log(std::abs(landau_resolvent_kernel(p, x, y))));
    }
    double slope = (lk.back() - lk.front()) / (ld.back() - ld.front());
    c.value = std::abs(slope + 1.0);
    c.limit = 0.05;
    c.pass = c.value <= c.limit;
    c.detail = "slope=" + fmt(slope);
  }));
  out.push_back(timed("landau.bump_residual", [&](Check& c) {
    LandauKernelParams p = well_regime(cfg.lambda, cfg.b, cfg.mu);
    Grid2D g = Grid2D::square(0.7, 281);
    SparseHermitianOp H = assemble_magnetic(g, cfg.b * cfg.lambda, Eigen::VectorXd::Zero(g.size()));
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0, 1);
    LandauApplyOptions o;
    o.target_margin = 0.35;
    o.threads = cfg.threads;
    c.limit = 1e-3;
    for (int t = 0; t < 5; ++t) {
      Vec2 ctr(0.2 * u(rng) - 0.1, 0.2 * u(rng) - 0.1);
      double rho = 0.15 + 0.05 * u(rng), k = 3.0 * u(rng);
      Field f = Field::sample(g, [&](const Vec2& y) {
        double q = (y - ctr).squaredNorm() / (rho * rho);
        return q >= 1.0 ? cd(0.0) : std::pow(1.0 - q, 6) * std::polar(1.0, k * y(0));
      });
      Field Rf = apply_landau_resolvent(p, f, o);
      CVec res = H.apply(Rf.values) - p.z * Rf.values - f.values;
      // nodes whose stencil stays inside the computed target box
      int lo1 = g.n1, hi1 = 0, lo2 = g.n2, hi2 = 0;
      for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
          if (Rf.at(i, j) != cd(0.0))
            lo1 = std::min(lo1, i), hi1 = std::max(hi1, i), lo2 = std::min(lo2, j), hi2 = std::max(hi2, j);
      double num = 0.0;
      for (int i = lo1 + 1; i < hi1; ++i)
        for (int j = lo2 + 1; j < hi2; ++j) num += std::norm(res(g.index(i, j)));
      c.value = std::max(c.value, std::sqrt(num) / f.values.norm());
    }
    c.pass = c.value <= c.limit;
  }));
  out.push_back(timed("landau.decay_monotone", [&](Check& c) {
    std::vector<double> d = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    double prev = 0.0, min_step = INFINITY;
    bool ok = true;
    std::string rates;
    for (double lam : cfg.decay_lambdas) {
      DecayFit fit = offdiag_decay_rate(well_regime(lam, cfg.b, cfg.mu), 0.005, 0.03, d, cfg.threads);
      ok = ok && fit.rate > 0.0 && fit.rate > prev && !fit.low_dynamic_range;
      min_step = std::min(min_step, fit.rate - prev);
      prev = fit.rate;
      rates += (rates.empty() ? "" : " ") + fmt(fit.rate);
      if (cfg.fits) cfg.fits->push_back(fit);
    }
    c.value = min_step;
    c.limit = 0.0;
    c.pass = ok;
    c.detail = "rates " + rates;
  }));
  return out;
}

// ------------------------------------------------------------ Blaschke

inline std::vector<cd> random_zeros(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cd> z;
  for (int i = 0; i < n; ++i) {
    double r = std::pow(10.0, -2.0 + 3.0 * u(rng));
    double th = (u(rng) - 0.5) * 0.98 * std::numbers::pi;
    cd a = std::polar(r, th);
    if (std::abs(a - 1.0) < 1e-3) a += 0.01;
    z.push_back(a);
  }
  return z;
}

inline HerglotzMeasure random_measure(std::mt19937_64& rng, int n, bool atom_at_zero) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HerglotzMeasure m;
  for (int i = 0; i < n; ++i) m.atoms.push_back({4.0 * (u(rng) - 0.5), 0.5 * u(rng)});
  if (atom_at_zero) m.atoms.push_back({0.0, 0.2 + u(rng)});
  m.A = 0.3 * u(rng);
  return m;
}

struct BlaschkeSuiteConfig {
  unsigned long long seed = 4242;
  int factor_samples = 20000;
  int mfun_pairs = 1000;
  int instances = 50;
  int measures = 100;
  std::vector<LowerBoundCertificate>* certificates = nullptr;
};

inline std::vector<Check> blaschke_suite(const BlaschkeSuiteConfig& cfg) {
  std::vector<Check> out;
  out.push_back(timed("blaschke.single_factor", [&](Check& c) {
    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> lu(-3.0, 3.0), v(-4.0, 4.0);
    int fails = 0;
    for (int k = 0; k < cfg.factor_samples; ++k) {
      cd a(std::pow(10.0, lu(rng)), v(rng));
      double t = std::pow(10.0, lu(rng));
      double lhs = neg_log_factor(a, t);
      // the real zero Re a dominates, and away from t ~ Re a the m-function does
      double r1 = lhs / (neg_log_factor(a.real(), t) * (1.0 + 1e-13) + 1e-300);
      c.value = std::max(c.value, r1);
      fails += r1 > 1.0;
      double x = a.real() / t;
      if (x < 0.5 || x > 2.0) {
        double r2 = lhs / (4.0 * mfun(x) * (1.0 + 1e-13));
        c.value = std::max(c.value, r2);
        fails += r2 > 1.0;
      }
    }
    c.limit = 1.0;
    c.pass = fails == 0;
    c.detail = std::to_string(fails) + " violations in " + std::to_string(cfg.factor_samples) + " samples";
  }));
  out.push_back(timed("blaschke.avg_mfun", [&](Check& c) {
    std::mt19937_64 rng(cfg.seed + 2);
    std::uniform_real_distribution<double> lu(-3.0, 3.0);
    double worst_q = 0.0;
    for (int k = 0; k < cfg.mfun_pairs; ++k) {
      double alpha = std::pow(10.0, lu(rng)), delta = std::pow(10.0, lu(rng));
      if (k % 4 == 0) alpha = delta * (1.0 + (k % 100) / 100.0);
      double avg = avg_mfun(alpha, delta);
      c.value = std::max(c.value, avg / (1.5 * mfun(delta / alpha)));
      if (k % 10 == 0) {  // closed form against adaptive quadrature
        auto f = [&](double t) { return mfun(t / alpha); };
        double q = (alpha > delta && alpha < 2 * delta)
                       ? integrate_gk(f, delta, alpha).value + integrate_gk(f, alpha, 2 * delta).value
                       : integrate_gk(f, delta, 2 * delta).value;
        worst_q = std::max(worst_q, std::abs(avg - q / delta) / avg);
      }
    }
    c.limit = 1.0;
    c.pass = c.value <= 1.0 + 1e-13 && worst_q <= 1e-12;
    c.detail = "max avg/(1.5 m)=" + fmt(c.value) + ", closed form vs quadrature " + fmt(worst_q);
  }));
  out.push_back(timed("blaschke.certificate_margins", [&](Check& c) {
    std::mt19937_64 rng(cfg.seed);
    double worst = INFINITY;
    int n = 0;
    for (int k = 0; k < cfg.instances; ++k) {
      FactoredFunction f;
      f.zeros = BlaschkeZeroSet::with_normalized_phases(random_zeros(rng, 1 + k % 12), 0.0);
      if (k % 4 == 1) f.zeros.zeros.push_back(0.05 + 0.01 * k), f.zeros.phases.push_back(0.0);
      f.g = random_measure(rng, 1 + k % 5, k % 3 == 0);
      double beta = f.neg_log_abs(1.0);
      for (double d : {0.02, 0.05, 0.1, 0.2, 0.24}) {
        auto cert = certify_half_plane(f, beta, d);
        worst = std::min(worst, cert.margin);
        ++n;
        if (cfg.certificates) cfg.certificates->push_back(cert);
      }
    }
    c.value = worst;
    c.limit = 0.0;
    c.pass = worst >= 0.0;
    c.detail = std::to_string(n) + " certificates";
  }));
  out.push_back(timed("blaschke.mu0_recovery", [&](Check& c) {
    std::mt19937_64 rng(cfg.seed + 3);
    for (int k = 0; k < 10; ++k) {
      FactoredFunction f;
      f.zeros = BlaschkeZeroSet::with_normalized_phases(random_zeros(rng, 5), 0.0);
      f.g = random_measure(rng, 4, false);
      const double m0 = 0.5 + 0.2 * k;
      f.g->atoms.push_back({0.0, m0});
      double beta = f.neg_log_abs(1.0);
      auto cert = certify_half_plane(f, beta, 0.001);
      c.value = std::max(c.value, std::abs(cert.mu0_estimate - m0) / m0);
    }
    c.limit = 0.1;
    c.pass = c.value <= c.limit;
  }));
  // u(t) <= beta / t, the split bound, and the eps-refined bound below its threshold
  out.push_back(timed("herglotz.poisson_bounds", [&](Check& c) {
    std::mt19937_64 rng(cfg.seed + 4);
    const double ts[] = {1e-3, 2e-3, 5e-3, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    int fails = 0, refined = 0;
    for (int k = 0; k < cfg.measures; ++k) {
      HerglotzMeasure m = random_measure(rng, 1 + k % 9, k % 2 == 0);
      const double beta = m.beta_measure() * (1.0 + 1e-12);
      for (double t : ts) {
        double u = poisson_part(m, t);
        c.value = std::max(c.value, u * t / beta);
        fails += u < 0.0 || u > beta / t;
        for (double eta : {0.05, 0.3, 1.0}) fails += u > poisson_split_bound(m, t, eta, beta) * (1 + 1e-12);
      }
      for (double eps : {0.5 * beta, 0.1 * beta}) {
        RefinedThreshold th = refined_threshold(m, eps, beta);
        for (double t : ts)
          if (t <= th.t_max) {
            fails += poisson_part(m, t) - m.mass_at_zero() / t > eps / t * (1 + 1e-12);
            ++refined;
          }
      }
    }
    c.limit = 1.0;
    c.pass = fails == 0 && refined > 0;
    c.detail = std::to_string(fails) + " violations, " + std::to_string(refined) + " refined-bound checks";
  }));
  return out;
}

// ------------------------------------------------------------ partition

struct PartitionSuiteConfig {
  double delta = 1e-4, R = 2.0;
  int order = 4;
  PartitionReport* report = nullptr;
};

inline std::vector<Check> partition_suite(const PartitionSuiteConfig& cfg) {
  PartitionReport rep;
  Check build = timed("partition.build", [&](Check& c) {
    rep = verify_partition(build_partition(cfg.delta, cfg.R, cfg.order));
    c.pass = true;
  });
  if (!build.pass) return {build};
  if (cfg.report) *cfg.report = rep;
  std::vector<Check> out;
  Check s{"partition.sum_to_one", rep.max_sum_defect <= 1e-12, rep.max_sum_defect, 1e-12, "", build.seconds};
  out.push_back(s);
  out.push_back({"partition.overlap", rep.max_overlap <= 4, double(rep.max_overlap), 4.0, "", 0.0});
  out.push_back({"partition.supports", rep.psi_covers_chi && rep.supports_ok && rep.max_chi <= 1.0, rep.max_chi, 1.0,
                 "psi = 1 on supp chi and supports inside U", 0.0});
  Check d{"partition.derivative_exponents", true, 0.0, 0.1, "", 0.0};
  for (const auto& dr : rep.derivatives) {
    double dev = std::abs(dr.exponent + dr.order);
    d.value = std::max(d.value, dev);
    d.detail += (d.detail.empty() ? "" : " ") + std::string("k=") + std::to_string(dr.order) + ":" + fmt(dr.exponent);
  }
  d.pass = d.value <= d.limit && rep.derivatives.size() == 3;
  out.push_back(d);
  return out;
}

// ------------------------------------------------------------ tunneling

inline ModelParams radial_model(double lambda, double a, double d1, double b) {
  ModelParams p;
  p.lambda = lambda;
  p.a = a;
  p.d1 = d1;
  p.b = b;
  p.hessian = WellSpec::radial(a).hessian();
  return p;
}

struct ReductionSuiteConfig {
  double lambda = 15.0, a = 0.5, d1 = 0.6, b = 0.5, h = 0.04;
  int pairs = 100;
  unsigned long long seed = 2718;
};

inline std::vector<Check> reduction_suite(const ReductionSuiteConfig& cfg) {
  std::vector<Check> out;
  out.push_back(timed("tunneling.reduction_vs_direct", [&](Check& c) {
    ModelParams p = radial_model(cfg.lambda, cfg.a, cfg.d1, cfg.b);
    WellSpec w = WellSpec::radial(p.a);
    auto H = build_operator(p, double_well_grid(p, cfg.h), double_well(p, w));
    PhysicalMHO m = physical_mho(p.hessian, p.b, p.lambda);
    Contour ct = contour_for_ground(p, m.e0(), m.e1());
    SplittingResult s = splitting_direct(H, ct);
    Quasimodes q = quasimodes(p, H, ct);
    auto red = gram_and_m(q.minus, q.plus, H);
    c.value = std::abs(red.splitting() - s.delta) / s.delta;
    c.limit = 1e-6;
    c.pass = c.value <= c.limit && !s.warning && q.rank == 2;
    c.detail = "Delta=" + fmt(s.delta) + " rank=" + std::to_string(q.rank) + " nodes=" + std::to_string(q.nodes);
  }));
  out.push_back(timed("tunneling.reduction_vs_generalized_eig", [&](Check& c) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    auto rnd = [&] {
      Mat2c A;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) A(i, j) = cd(nd(rng), nd(rng));
      return A;
    };
    for (int k = 0; k < cfg.pairs; ++k) {
      Mat2c X = rnd(), Y = rnd();
      Mat2c G = X.adjoint() * X + 0.1 * Mat2c::Identity();
      Mat2c M = 0.5 * (Y + Y.adjoint());
      double gap = generalized_gap(G, M);
      c.value = std::max(c.value, std::abs(reduce_2x2(G, M).splitting() - gap) / std::max(1.0, gap));
    }
    c.limit = 1e-12;
    c.pass = c.value <= c.limit;
    c.detail = std::to_string(cfg.pairs) + " random (G, M) pairs";
  }));
  return out;
}

struct RatioSuiteConfig {
  double a = 0.1, d1 = 0.3, h = 0.005;
  std::vector<double> lambdas{20.0, 30.0, 45.0};
  std::vector<double> bs{0.0, 0.05};
  int threads = 1;
  std::vector<RatioRow>* rows = nullptr;
};

inline std::vector<Check> ratio_suite(const RatioSuiteConfig& cfg) {
  std::vector<RatioRow> rows(cfg.lambdas.size() * cfg.bs.size());
  Check run = timed("tunneling.ratio_points", [&](Check& c) {
    parallel_for(int(rows.size()), cfg.threads, [&](int k) {
      double b = cfg.bs[k / cfg.lambdas.size()], lam = cfg.lambdas[k % cfg.lambdas.size()];
      rows[k] = ratio_point(radial_model(lam, cfg.a, cfg.d1, b), WellSpec::radial(cfg.a), {.h = cfg.h});
    });
    c.pass = true;
  });
  if (!run.pass) return {run};
  if (cfg.rows) *cfg.rows = rows;
  Check band{"tunneling.ratio_band", true, 0.0, 0.2, "", run.seconds};
  Check mono{"tunneling.ratio_monotone", true, 0.0, 0.0, "", 0.0};
  double min_dev_drop = INFINITY;
  for (size_t ib = 0; ib < cfg.bs.size(); ++ib) {
    double prev = INFINITY;
    band.detail += (ib ? "; " : "") + std::string("b=") + fmt(cfg.bs[ib]) + ":";
    for (size_t il = 0; il < cfg.lambdas.size(); ++il) {
      const RatioRow& r = rows[ib * cfg.lambdas.size() + il];
      double dev = std::abs(r.ratio - 1.0);
      band.value = std::max(band.value, dev);
      band.detail += " " + fmt(r.ratio);
      if (il) min_dev_drop = std::min(min_dev_drop, prev - dev);
      mono.pass = mono.pass && dev <= prev;
      prev = dev;
    }
  }
  band.pass = band.value <= band.limit;
  mono.value = min_dev_drop;
  mono.detail = "smallest decrease of |ratio - 1| between consecutive lambda";
  return {band, mono};
}

}  // namespace magtun::suites
