#pragma once

// Random admissible tuples for the modified Green's function size bound,
// shared by the calibration tool, the tests and the verification suites.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtun/mho.hpp"

namespace magtun {

// Frozen constants of |G| <= C D(c |lambda| |x-y| (|x|+|y|)) with the region
// shape D(shape_C, shape_c); produced by tools/calibrate_green_bound.
struct GreenBoundConstants {
  double C = 0.0, c = 0.0, shape_C = 2.0, shape_c = 1.0;
};

inline GreenBoundConstants load_green_bound_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read green bound constants " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return {j.at("C").get<double>(), j.at("c").get<double>(), j.at("shape_C").get<double>(),
          j.at("shape_c").get<double>()};
}

}  // namespace magtun

namespace magtun::bound_sampling {

struct GreenTuple {
  double B;
  cd lambda, mu;
  Vec2 x, y;
  double arg() const { return std::abs(lambda) * (x - y).norm() * (x.norm() + y.norm()); }
};

inline constexpr double kBoundK1 = 1.0, kBoundK2 = 2.0;

inline std::vector<GreenTuple> sample_green_tuples(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GreenTuple> out;
  while (int(out.size()) < n) {
    GreenTuple t;
    t.B = u(rng) - 0.5;
    double re = std::exp(std::log(200.0) * u(rng));
    t.lambda = cd(re, (u(rng) - 0.5) * re);
    MHOParams p = mho_params(kBoundK1, kBoundK2, t.B, t.lambda);
    double top = 0.5 * p.f_plus + 0.9 * default_c_mu(p);
    t.mu = cd(top - 6.0 * u(rng), 4.0 * (u(rng) - 0.5));
    t.x = Vec2(2 * u(rng) - 1, 2 * u(rng) - 1);
    t.y = Vec2(2 * u(rng) - 1, 2 * u(rng) - 1);
    if ((t.x - t.y).norm() < 0.02) continue;
    out.push_back(t);
  }
  return out;
}

// D with fixed shape C = 2, unit decay; the calibrated constants scale it.
inline RegionBounds bound_shape() { return RegionBounds::from_log_branch(2.0, 1.0); }

inline double green_abs(const GreenTuple& t) {
  GreenOptions o;
  o.rel_tol = 1e-9;
  MHOParams p = mho_params(kBoundK1, kBoundK2, t.B, t.lambda);
  return std::abs(modified_green(p, t.x, t.y, t.mu, o).value);
}

}  // namespace magtun::bound_sampling
