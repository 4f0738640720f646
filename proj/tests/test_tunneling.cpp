#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "magtun/tunneling.hpp"

using namespace magtun;

namespace {

ModelParams wide_well(double lambda, double d1, double b = 0.0) {
  ModelParams p;
  p.lambda = lambda;
  p.a = 0.5;
  p.d1 = d1;
  p.b = b;
  p.hessian = WellSpec::radial(p.a).hessian();
  return p;
}

}  // namespace

TEST(Cutoff, SmoothStepBetweenHalfAndThreeQuarters) {
  const double a = 0.4;
  EXPECT_EQ(cutoff_chi(0.0, a), 1.0);
  EXPECT_EQ(cutoff_chi(0.5 * a, a), 1.0);
  EXPECT_EQ(cutoff_chi(0.75 * a, a), 0.0);
  EXPECT_EQ(cutoff_chi(a, a), 0.0);
  EXPECT_NEAR(cutoff_chi(0.625 * a, a), 0.5, 1e-15);
  double prev = 1.0;
  for (double r = 0.5 * a; r <= 0.75 * a; r += 0.01 * a) {
    double v = cutoff_chi(r, a);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
}

TEST(Hopping, ZeroFieldIsRealAndNegative) {
  ModelParams p = wide_well(10.0, 0.6);
  WellSpec w = WellSpec::radial(p.a);
  Grid2D g = double_well_grid(p, 0.04);
  GroundState gs = single_well_ground_state(p, w, g);
  ASSERT_TRUE(gs.verified) << gs.residual;
  HoppingResult r = hopping_coefficient(p, w, gs);
  EXPECT_LT(r.rho.real(), 0.0);
  EXPECT_LE(std::abs(r.rho.imag()), 1e-10 * r.abs_rho);
  EXPECT_LT(r.quadrature_error, 1e-3 * r.abs_rho);
}

TEST(Hopping, IndependentOfEigenvectorPhase) {
  ModelParams p = wide_well(12.0, 0.6, 0.7);
  WellSpec w = WellSpec::radial(p.a);
  Grid2D g = double_well_grid(p, 0.04);
  GroundState gs = single_well_ground_state(p, w, g);
  cd r0 = hopping_coefficient(p, w, gs).rho;
  for (double th : {0.4, 2.1, -2.9}) {
    GroundState rotated = gs;
    rotated.phi.values *= std::polar(1.0, th);
    cd r = hopping_coefficient(p, w, rotated).rho;
    EXPECT_LE(std::abs(r - r0), 1e-12 * std::abs(r0)) << th;
  }
}

TEST(Hopping, RejectsUnverifiedGroundState) {
  ModelParams p = wide_well(10.0, 0.6);
  WellSpec w = WellSpec::radial(p.a);
  Grid2D g = double_well_grid(p, 0.04);
  GroundState gs = single_well_ground_state(p, w, g);
  gs.verified = false;
  EXPECT_THROW(hopping_coefficient(p, w, gs), PreconditionError);
}

TEST(Hopping, SecondOrderInGridSpacing) {
  ModelParams p = wide_well(10.0, 0.64);
  WellSpec w = WellSpec::radial(p.a);
  std::vector<cd> rho;
  for (double h : {0.08, 0.04, 0.02}) {
    Grid2D g = double_well_grid(p, h);
    rho.push_back(hopping_coefficient(p, w, single_well_ground_state(p, w, g)).rho);
  }
  double ratio = std::abs(rho[0] - rho[1]) / std::abs(rho[1] - rho[2]);
  EXPECT_NEAR(ratio, 4.0, 0.6);
}

TEST(Hopping, MatchesHalfSplitting) {
  ModelParams p = wide_well(15.0, 0.6, 0.5);
  WellSpec w = WellSpec::radial(p.a);
  RatioRow r = ratio_point(p, w, {.h = 0.04});
  EXPECT_NEAR(r.ratio, 1.0, 1e-3);
  EXPECT_GT(r.Delta, 0.0);
}

TEST(Gauge, SpectrumIndependentOfGaugeOrigin) {
  ModelParams p = wide_well(6.0, 0.3, 1.0);
  p.a = 0.25;
  p.hessian = WellSpec::radial(p.a).hessian();
  WellSpec w = WellSpec::radial(p.a);
  Grid2D g = Grid2D::rect(1.0, 0.6, 0.1);
  auto H0 = build_operator(p, g, double_well(p, w));
  auto H1 = build_operator(p, g, double_well(p, w), Vec2(0.37, -0.21));
  auto e0 = dense_lowest(H0, 4), e1 = dense_lowest(H1, 4);
  double scale = std::abs(e0.eigenvalues[0]);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(e0.eigenvalues[k], e1.eigenvalues[k], 1e-10 * scale) << k;
  EXPECT_NEAR(e0.eigenvalues[1] - e0.eigenvalues[0], e1.eigenvalues[1] - e1.eigenvalues[0], 1e-10 * scale);
}

TEST(Reduction, SigmaInvariantUnderUnimodularCongruence) {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> nd;
  auto rnd = [&] {
    Mat2c A;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) A(i, j) = cd(nd(rng), nd(rng));
    return A;
  };
  for (int k = 0; k < 100; ++k) {
    Mat2c X = rnd(), Y = rnd(), T = rnd();
    Mat2c G = X.adjoint() * X + 0.1 * Mat2c::Identity();
    Mat2c M = 0.5 * (Y + Y.adjoint());
    T /= std::sqrt(T.determinant());
    auto r = reduce_2x2(G, M);
    auto rt = reduce_2x2(T.adjoint() * G * T, T.adjoint() * M * T);
    EXPECT_LE(std::abs(rt.sigma - r.sigma), 1e-12 * std::max(1.0, std::abs(r.sigma)) * T.squaredNorm() * T.squaredNorm())
        << k;
    EXPECT_LE(std::abs(r.sigma.imag()), 1e-12 * std::max(1.0, std::abs(r.sigma))) << k;
    EXPECT_GE(r.sigma.real(), -1e-12 * std::max(1.0, std::abs(r.sigma))) << k;
    EXPECT_LE(std::abs(r.gamma.imag()), 1e-12 * std::abs(r.gamma)) << k;
    double gap = generalized_gap(G, M);
    EXPECT_NEAR(r.splitting(), gap, 1e-10 * std::max(1.0, gap)) << k;
  }
}

TEST(Reduction, SingularGramianRejected) {
  Mat2c G;
  G << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(reduce_2x2(G, Mat2c::Identity()), DegenerateQuasimodeError);
}

TEST(Splitting, PositiveAndDecreasingInSeparation) {
  double prev = 1e300;
  for (double d1 : {0.56, 0.64, 0.72}) {
    ModelParams p = wide_well(10.0, d1);
    WellSpec w = WellSpec::radial(p.a);
    auto H = build_operator(p, double_well_grid(p, 0.04), double_well(p, w));
    SplittingResult s = splitting_direct(H);
    EXPECT_GT(s.delta, 0.0) << d1;
    EXPECT_LT(s.delta, prev) << d1;
    prev = s.delta;
  }
}

TEST(Quasimodes, ReductionReproducesDirectSplitting) {
  ModelParams p = wide_well(15.0, 0.6, 0.5);
  WellSpec w = WellSpec::radial(p.a);
  auto H = build_operator(p, double_well_grid(p, 0.04), double_well(p, w));
  PhysicalMHO m = physical_mho(p.hessian, p.b, p.lambda);
  Contour c = contour_for_ground(p, m.e0(), m.e1());
  SplittingResult s = splitting_direct(H, c);
  EXPECT_FALSE(s.warning);
  Quasimodes q = quasimodes(p, H, c);
  EXPECT_EQ(q.rank, 2);
  EXPECT_LE(q.norm_defect, 1.0 / std::sqrt(p.lambda));
  auto red = gram_and_m(q.minus, q.plus, H);
  EXPECT_NEAR(red.splitting(), s.delta, 1e-6 * s.delta);
  EXPECT_NEAR(generalized_gap(red.G, red.M), s.delta, 1e-6 * s.delta);
}

TEST(Quasimodes, ContourEnclosingThirdLevelRaises) {
  ModelParams p = wide_well(10.0, 0.6);
  WellSpec w = WellSpec::radial(p.a);
  auto H = build_operator(p, double_well_grid(p, 0.06), double_well(p, w));
  PhysicalMHO m = physical_mho(p.hessian, p.b, p.lambda);
  Contour c = contour_for_ground(p, m.e0(), m.e1());
  try {
    quasimodes(p, H, c, {.m_max = 64});
    FAIL() << "expected ClusterError";
  } catch (const ClusterError& e) {
    EXPECT_GT(e.rank, 2);
  }
}

TEST(Report, CsvHeaderAndRowCount) {
  std::vector<RatioRow> rows(2, RatioRow{10, 0, 0.6, -1, -0.9, 0.1, 0.05, 1, 1e-9, 100, 2.0});
  std::ostringstream os;
  write_ratio_csv(rows, os);
  std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), kRatioCsvHeader);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}
