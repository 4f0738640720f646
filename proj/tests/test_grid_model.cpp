#include <gtest/gtest.h>

#include <random>

#include "magtun/grid_model.hpp"
#include "magtun/spectral.hpp"

using namespace magtun;

namespace {

ModelParams small_params(double lambda, double b) {
  ModelParams p;
  p.lambda = lambda;
  p.b = b;
  p.a = 0.5;
  p.d1 = 0.6;
  p.hessian = WellSpec::radial(0.5).hessian();
  return p;
}

}  // namespace

TEST(Well, ClosedFormValues) {
  ModelParams p = small_params(1.0, 0.0);
  p.a = 1.0;
  Grid2D g = Grid2D::square(2.0, 41);
  WellSpec w = WellSpec::anisotropic(Eigen::Matrix2d::Identity(), 4);
  Field f = build_well(w, p, g, Vec2(0.0, 0.0));
  EXPECT_EQ(f.at(20, 20).real(), -1.0);
  // |x|^2 = 0.5 at x = (0.5, 0.5)
  EXPECT_NEAR(w(Vec2(0.5, 0.5)), -0.0625, 1e-15);
  EXPECT_EQ(w(Vec2(1.0, 0.0)), 0.0);
  EXPECT_EQ(w(Vec2(0.8, 0.7)), 0.0);
}

TEST(Well, SamplesStayInRangeWithCompactSupport) {
  ModelParams p = small_params(1.0, 0.0);
  Eigen::Matrix2d S;
  S << 9.0, 1.0, 1.0, 5.0;
  WellSpec w = WellSpec::anisotropic(S, 6);
  p.a = w.support_radius();
  Grid2D g = Grid2D::square(1.0, 81);
  Vec2 c(0.25, -0.25);
  Field f = build_well(w, p, g, c);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      double v = f.at(i, j).real();
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 0.0);
      Vec2 y = g.point(i, j) - c;
      if (y.dot(S * y) >= 1.0) { EXPECT_EQ(v, 0.0); }
    }
}

TEST(Well, NumericalHessianMatchesShape) {
  Eigen::Matrix2d S;
  S << 3.0, 0.5, 0.5, 2.0;
  for (int p : {4, 5}) {
    WellSpec w = WellSpec::anisotropic(S, p);
    const double e = 1e-4;
    Eigen::Matrix2d H;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Vec2 ei = Vec2::Unit(i) * e, ej = Vec2::Unit(j) * e;
        H(i, j) = (w(ei + ej) - w(ei - ej) - w(ej - ei) + w(-ei - ej)) / (4 * e * e);
      }
    EXPECT_LE((H - w.hessian()).norm() / w.hessian().norm(), 1e-4);
  }
}

TEST(Well, Errors) {
  ModelParams p = small_params(1.0, 0.0);
  Grid2D g = Grid2D::square(0.3, 11);
  EXPECT_THROW(build_well(WellSpec::radial(0.5), p, g, Vec2::Zero()), GridError);
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(WellSpec::anisotropic(bad).validate(), ParameterError);
}

TEST(Operator, ExactlyHermitianWithFivePointStencil) {
  ModelParams p = small_params(6.0, 0.3);
  Grid2D g = Grid2D::rect(1.6, 1.0, 0.05);
  auto op = build_operator(p, g, double_well(p, WellSpec::radial(p.a)));
  EXPECT_EQ(op.max_nonhermiticity(), 0.0);
  for (int r = 0; r < op.mat.outerSize(); ++r) EXPECT_LE(op.mat.outerIndexPtr()[r + 1] - op.mat.outerIndexPtr()[r], 5);
}

TEST(Operator, ZeroFieldIsRealSymmetric) {
  ModelParams p = small_params(6.0, 0.0);
  Grid2D g = Grid2D::square(1.0, 41);
  auto op = build_operator(p, g, {{WellSpec::radial(p.a), Vec2::Zero()}});
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (SparseHermitianOp::Matrix::InnerIterator it(op.mat, k); it; ++it) EXPECT_EQ(it.value().imag(), 0.0);
}

TEST(Operator, UniformFluxThroughEveryPlaquette) {
  std::mt19937_64 rng(7);
  for (double B : {0.5, 3.0, 17.0}) {
    ModelParams p = small_params(1.0, B);
    Grid2D g = Grid2D::square(2.0, 41);
    auto op = build_operator(p, g, {});
    std::uniform_int_distribution<int> ui(0, g.n1 - 2), uj(0, g.n2 - 2);
    const cd expected = std::polar(1.0, -B * g.h * g.h);
    auto el = [&](int a, int b) { return op.mat.coeff(a, b); };
    for (int t = 0; t < 100; ++t) {
      int i = ui(rng), j = uj(rng);
      int a = g.index(i, j), b = g.index(i + 1, j), c = g.index(i + 1, j + 1), d = g.index(i, j + 1);
      cd prod = el(a, b) * el(b, c) * el(c, d) * el(d, a);
      prod /= std::abs(prod);
      EXPECT_NEAR(std::abs(prod - expected), 0.0, 1e-12);
    }
  }
}

TEST(Operator, LandauGroundLevel) {
  ModelParams p = small_params(10.0, 1.0);  // B = 10
  Grid2D g = Grid2D::square(2.5, 81);
  auto op = build_operator(p, g, {});
  EigOptions o;
  o.tol = 1e-5;  // edge states crowd the bottom of the level; the Ritz value converges long before the vector
  auto res = lowest_eigs(op, 1, o);
  EXPECT_NEAR(res.eigenvalues[0] / p.blambda(), 1.0, 0.05);
}

TEST(Operator, GaugeOriginShiftIsUnitaryConjugation) {
  ModelParams p = small_params(5.0, 0.8);
  Grid2D g = Grid2D::rect(1.4, 0.9, 0.1);
  auto wells = double_well(p, WellSpec::radial(p.a));
  auto op0 = build_operator(p, g, wells);
  Vec2 s(3 * g.h, -2 * g.h);
  auto op1 = build_operator(p, g, wells, s);
  // A_s = A_0 - (B/2) s^perp = A_0 + grad chi with chi(x) = -(B/2) s^perp . x
  const double B = p.blambda();
  const Vec2 sp(-s(1), s(0));
  CVec phase(g.size());
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) phase(g.index(i, j)) = std::polar(1.0, -0.5 * B * sp.dot(g.point(i, j)));
  CMat U = phase.asDiagonal();
  CMat lhs = CMat(op1.mat);
  CMat rhs = U * CMat(op0.mat) * U.adjoint();
  EXPECT_LE((lhs - rhs).norm() / lhs.norm(), 1e-13);
  auto e0 = dense_lowest(op0, 6), e1 = dense_lowest(op1, 6);
  for (int k = 0; k < 6; ++k)
    EXPECT_NEAR(e1.eigenvalues[k], e0.eigenvalues[k], 1e-10 * std::abs(e0.eigenvalues[k]));
}

TEST(Operator, CenterMustBeCommensurate) {
  ModelParams p = small_params(5.0, 0.0);
  Grid2D g = Grid2D::square(2.0, 41);
  EXPECT_THROW(build_operator(p, g, {{WellSpec::radial(p.a), Vec2(0.333, 0.0)}}), CommensurabilityError);
}

TEST(Translation, IdentityAndInversePair) {
  Grid2D g = Grid2D::square(1.0, 41);
  Field f = Field::sample(g, [](const Vec2& x) { return std::exp(-60 * x.squaredNorm()) * cd(1.0, x(0)); });
  Field id = magnetic_translate(f, Vec2::Zero(), 3.0);
  EXPECT_EQ((id.values - f.values).norm(), 0.0);
  Vec2 z(4 * g.h, -3 * g.h);
  Field back = magnetic_translate(magnetic_translate(f, z, 3.0), -z, 3.0);
  // f is negligible near the boundary strips lost to zero fill
  EXPECT_LE((back.values - f.values).norm() / f.values.norm(), 1e-12);
  EXPECT_THROW(magnetic_translate(f, Vec2(0.01, 0.0), 3.0), CommensurabilityError);
}

TEST(Translation, ConjugatesPotentialByShift) {
  ModelParams p = small_params(4.0, 0.7);
  Grid2D g = Grid2D::square(1.5, 61);
  WellSpec w = WellSpec::radial(p.a);
  Field v = build_well(w, p, g, Vec2::Zero());
  Vec2 d(p.d1, 0.0);
  Field vd = build_well(w, p, g, d);
  Field f = Field::sample(g, [](const Vec2& x) { return cd(std::cos(3 * x(0)), std::sin(2 * x(1))); });
  const double B = p.blambda();
  Field t = magnetic_translate(f, -d, B);
  for (int k = 0; k < g.size(); ++k) t.values(k) *= v.values(k);
  Field lhs = magnetic_translate(t, d, B);
  auto [s1, s2] = g.steps(d);
  for (int i = std::abs(s1); i < g.n1 - std::abs(s1); ++i)
    for (int j = std::abs(s2); j < g.n2 - std::abs(s2); ++j)
      EXPECT_NEAR(std::abs(lhs.at(i, j) - vd.at(i, j) * f.at(i, j)), 0.0, 1e-14);
}

TEST(Translation, CommutesWithLandauStencilInInterior) {
  ModelParams p = small_params(3.0, 1.3);
  Grid2D g = Grid2D::square(1.5, 61);
  auto op = build_operator(p, g, {});
  Field f = Field::sample(g, [](const Vec2& x) { return cd(std::exp(-8 * (x - Vec2(0.2, -0.1)).squaredNorm()), 0.3); });
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      if (i < 8 || j < 8 || i >= g.n1 - 8 || j >= g.n2 - 8) f.at(i, j) = 0.0;
  Vec2 z(5 * g.h, 2 * g.h);
  Field a = op.apply(magnetic_translate(f, z, p.blambda()));
  Field b = magnetic_translate(op.apply(f), z, p.blambda());
  EXPECT_LE((a.values - b.values).norm() / a.values.norm(), 1e-13);
}

TEST(Grid, RectRoundsExtentsToSpacing) {
  Grid2D g = Grid2D::rect(1.01, 0.5, 0.1);
  EXPECT_NEAR(g.L1, 1.1, 1e-12);
  EXPECT_EQ(g.n1, 23);
  EXPECT_NEAR(g.x1(g.n1 - 1), g.L1, 1e-12);
  Grid2D s = Grid2D::square(1.0, 11);
  EXPECT_NEAR(s.h, 0.2, 1e-15);
}
