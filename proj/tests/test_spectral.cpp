#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "magtun/spectral.hpp"

using namespace magtun;

namespace {

SparseHermitianOp harmonic(const Grid2D& g, double omega, double B = 0.0) {
  Eigen::VectorXd V(g.size());
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) V(g.index(i, j)) = omega * omega * g.point(i, j).squaredNorm();
  return assemble_magnetic(g, B, V);
}

SparseHermitianOp diagonal(std::vector<double> d) {
  SparseHermitianOp op;
  op.mat.resize(int(d.size()), int(d.size()));
  for (int i = 0; i < int(d.size()); ++i) op.mat.insert(i, i) = d[i];
  op.mat.makeCompressed();
  return op;
}

}  // namespace

TEST(LowestEigs, DirichletLaplacianSpectrum) {
  Grid2D g = Grid2D::rect(1.0, 0.5, 0.05);
  auto op = assemble_magnetic(g, 0.0, Eigen::VectorXd::Zero(g.size()));
  auto one_d = [&](int n, int j) { return 2.0 / (g.h * g.h) * (1.0 - std::cos(std::numbers::pi * j / (n + 1))); };
  std::vector<double> exact;
  for (int j = 1; j <= 6; ++j)
    for (int k = 1; k <= 6; ++k) exact.push_back(one_d(g.n1, j) + one_d(g.n2, k));
  std::sort(exact.begin(), exact.end());
  auto r = lowest_eigs(op, 5);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(r.eigenvalues[k], exact[k], 1e-10 * exact[k]) << k;
}

TEST(LowestEigs, AgreesWithDenseSolver) {
  Grid2D g = Grid2D::square(1.0, 20);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  Eigen::VectorXd V(g.size());
  for (int i = 0; i < g.size(); ++i) V(i) = u(rng);
  auto op = assemble_magnetic(g, 3.0, V);
  EigOptions o;
  o.method = EigOptions::Method::shift_invert;
  auto it = lowest_eigs(op, 6, o);
  auto dn = dense_lowest(op, 6);
  for (int k = 0; k < 6; ++k)
    EXPECT_NEAR(it.eigenvalues[k], dn.eigenvalues[k], 1e-9 * std::abs(dn.eigenvalues[k])) << k;
  o.method = EigOptions::Method::plain;
  auto pl = lowest_eigs(op, 6, o);
  for (int k = 0; k < 6; ++k)
    EXPECT_NEAR(pl.eigenvalues[k], dn.eigenvalues[k], 1e-9 * std::abs(dn.eigenvalues[k])) << k;
}

TEST(LowestEigs, ResultInvariants) {
  Grid2D g = Grid2D::square(1.5, 61);
  auto op = harmonic(g, 6.0, 4.0);
  auto r = lowest_eigs(op, 4);
  ASSERT_EQ(r.eigenvalues.size(), 4u);
  EXPECT_TRUE(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  auto [lo, hi] = gershgorin(op);
  for (int k = 0; k < 4; ++k) {
    EXPECT_LE(r.residuals[k], 1e-9 * std::max(std::abs(lo), std::abs(hi))) << k;
    CVec res = op.apply(r.eigenvectors[k].values) - r.eigenvalues[k] * r.eigenvectors[k].values;
    EXPECT_NEAR(res.norm() / r.eigenvectors[k].values.norm(), r.residuals[k], 1e-6 * r.residuals[k] + 1e-12);
  }
  EXPECT_LE(r.orthogonality_defect, 1e-8);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(r.eigenvectors[a].norm(), 1.0, 1e-10);
}

TEST(LowestEigs, SecondOrderConvergenceToOscillator) {
  // -Delta + omega^2 |x|^2 has ground energy 2 omega.
  const double omega = 10.0;
  std::vector<double> err;
  for (double h : {0.04, 0.02}) {
    Grid2D g = Grid2D::rect(1.2, 1.2, h);
    err.push_back(lowest_eigs(harmonic(g, omega), 1).eigenvalues[0] - 2.0 * omega);
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.2);
}

TEST(LowestEigs, NonConvergenceCarriesResiduals) {
  Grid2D g = Grid2D::square(1.0, 60);
  auto op = harmonic(g, 3.0);
  EigOptions o;
  o.method = EigOptions::Method::plain;
  o.max_cycles = 1;
  o.steps = 2;
  try {
    lowest_eigs(op, 3, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.best_residuals.size(), 3u);
  }
}

TEST(Contour, GroundContourFormula) {
  ModelParams p;
  p.lambda = 1.0;
  Contour c = contour_for_ground(p, 1.0, 3.0);
  EXPECT_EQ(c.center, cd(0.0));
  EXPECT_EQ(c.radius, 1.0);
  EXPECT_EQ(c.m, 32);
  p.lambda = 7.0;
  c = contour_for_ground(p, 1.5, 4.0);
  EXPECT_NEAR(std::abs(c.node(0, 32) - cd(-49.0 + 0.5 * (1.5 + 4.0) * 7.0)), 0.0, 1e-12);
  EXPECT_THROW(contour_for_ground(p, 2.0, 2.0), ParameterError);
  EXPECT_EQ(enclosed_count(c, {-40.0, -30.0, 0.0}), 2);
  EXPECT_NEAR(contour_clearance(c, {-38.375}), 8.625 / 8.75, 1e-12);
}

TEST(Riesz, DiagonalOperator) {
  auto op = diagonal({1.0, 5.0});
  Contour c{1.0, 2.0, 32};
  RieszProjector P(op, c);
  CMat F(2, 1);
  F << cd(0.3, 1.0), cd(-2.0, 0.5);
  CMat PF = P.project(F).values;
  EXPECT_LE(std::abs(PF(0, 0) - F(0, 0)), 1e-12);
  // trapezoid error for the outside level decays like (radius / distance)^m
  EXPECT_LE(std::abs(PF(1, 0)), 2.0 * std::pow(0.5, 32) * std::abs(F(1, 0)));
  EXPECT_GE(std::abs(PF(1, 0)), 1e-3 * std::pow(0.5, 32));
}

TEST(Riesz, SolveFailureNamesNode) {
  auto op = diagonal({1.0, 5.0});
  Contour c{3.0, 2.0, 4};  // nodes at 5, 3+2i, 1, 3-2i
  RieszProjector P(op, c, {.pair_conjugate_nodes = false});
  CMat F = CMat::Ones(2, 1);
  try {
    P.apply(F, 4);
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    EXPECT_TRUE(e.node == 0 || e.node == 2) << e.node;
  }
}

class RieszOnOscillator : public ::testing::Test {
 protected:
  void SetUp() override {
    g = Grid2D::square(1.5, 41);
    op = harmonic(g, 4.0, 1.0);
    eig = lowest_eigs(op, 4);
    c = Contour{eig.eigenvalues[0], 0.4 * (eig.eigenvalues[1] - eig.eigenvalues[0]), 32};
  }
  Grid2D g;
  SparseHermitianOp op;
  SpectralResult eig;
  Contour c;
};

TEST_F(RieszOnOscillator, IdempotentAndFixesGroundState) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  Field f(g);
  for (int i = 0; i < g.size(); ++i) f.values(i) = cd(nd(rng), nd(rng));
  RieszProjector P(op, c);
  auto r = P.project(f.values);
  EXPECT_LE(r.idempotence_defect, 1e-8);
  CMat PP = P.apply(r.values, r.nodes);
  EXPECT_LE((PP - r.values).norm(), 1e-8 * f.values.norm());
  Field phi = eig.eigenvectors[0];
  Field pphi = riesz_project(op, c, phi);
  EXPECT_LE((pphi.values - phi.values).norm(), 1e-8 * phi.values.norm());
  // the image is the ground eigenvector direction
  cd ov = phi.inner(Field(g, r.values.col(0)));
  EXPECT_LE((r.values.col(0) - ov * phi.values).norm(), 1e-8 * f.values.norm());
}

TEST_F(RieszOnOscillator, TrapezoidConvergedAt32Nodes) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> nd;
  CMat F(g.size(), 2);
  for (int i = 0; i < F.size(); ++i) F(i) = cd(nd(rng), nd(rng));
  RieszProjector P(op, c);
  CMat a = P.apply(F, 32), b = P.apply(F, 64);
  EXPECT_LE((a - b).norm(), 1e-10 * F.norm());
}

TEST_F(RieszOnOscillator, CommutesWithOperator) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  CMat F(g.size(), 3);
  for (int i = 0; i < F.size(); ++i) F(i) = cd(nd(rng), nd(rng));
  RieszProjector P(op, c);
  CMat HF = op.mat * F;
  CMat lhs = P.apply(HF, 64), rhs = op.mat * P.apply(F, 64);
  EXPECT_LE((lhs - rhs).norm(), 1e-8 * HF.norm());
}

TEST_F(RieszOnOscillator, RankEqualsEnclosedCount) {
  RieszProjector P1(op, c);
  EXPECT_EQ(projector_rank(P1, g.size(), 4, 32, 1), 1);
  // widen to enclose the first three levels
  double lo = eig.eigenvalues[0], top = eig.eigenvalues[2];
  Contour c3{0.5 * (lo + top), 0.5 * (top - lo) + 0.3 * (eig.eigenvalues[3] - top), 32};
  ASSERT_EQ(enclosed_count(c3, eig.eigenvalues), 3);
  RieszProjector P3(op, c3);
  EXPECT_EQ(projector_rank(P3, g.size(), 6, 128, 2), 3);
}
