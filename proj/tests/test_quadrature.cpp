#include <gtest/gtest.h>

#include <cmath>

#include "magtun/quadrature.hpp"

using namespace magtun;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto& gl = GaussLegendre::cached(8);
  // degree 15 is the exactness limit for 8 nodes
  double v = gl.integrate([](double x) { return std::pow(x, 14) + 3 * x * x; }, -1.0, 1.0);
  EXPECT_NEAR(v, 2.0 / 15.0 + 2.0, 1e-14);
  double w = 0.0;
  for (double wi : gl.w) w += wi;
  EXPECT_NEAR(w, 2.0, 1e-14);
}

TEST(GaussKronrod, SmoothAndPeaked) {
  auto r = integrate_gk([](double x) { return std::exp(-x * x); }, -10.0, 10.0, 1e-13);
  EXPECT_NEAR(r.value, std::sqrt(M_PI), 1e-13);
  auto p = integrate_gk([](double x) { return 1e-4 / (x * x + 1e-8); }, -1.0, 1.0, 1e-12);
  EXPECT_NEAR(p.value, 2.0 * std::atan(1e4) * 1e-4 / 1e-4, 1e-9);
}

TEST(GaussKronrod, ComplexIntegrand) {
  auto r = integrate_gk([](double x) { return std::exp(cd(0, 1) * x); }, 0.0, M_PI);
  EXPECT_NEAR(std::abs(r.value - cd(0, 2)), 0.0, 1e-13);
}

TEST(TanhSinh, EndpointSingularities) {
  auto r = integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  auto l = integrate_tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0);
  EXPECT_NEAR(l.value, -1.0, 1e-12);
  // t^{-0.9} is steep; the endpoint-relative node placement keeps it accurate
  auto s = integrate_tanh_sinh([](double x) { return std::pow(x, -0.9); }, 0.0, 1.0);
  EXPECT_NEAR(s.value, 10.0, 1e-8);
}
