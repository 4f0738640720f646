#pragma once

// Hopping coefficient, quasimodes, the 2x2 Gramian reduction and direct
// splitting for the symmetric double well at +-d, d = (d1, 0).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "magtun/grid_model.hpp"
#include "magtun/mho.hpp"
#include "magtun/spectral.hpp"

namespace magtun {

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ClusterError : public std::runtime_error {
 public:
  ClusterError(const std::string& what, int rank) : std::runtime_error(what), rank(rank) {}
  int rank;
};

class DegenerateQuasimodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid for a double well (and its single-well reference): covers the far
// well's translate at -2d plus a decay margin.
inline Grid2D double_well_grid(const ModelParams& p, double h) {
  double m1 = std::max(0.5, 12.0 / p.lambda), m2 = std::max(0.4, 10.0 / p.lambda);
  return Grid2D::rect(2.0 * p.d1 + p.a + m1, p.a + m2, h);
}

struct GroundState {
  Field phi;
  double energy = 0.0;
  double residual = 0.0;  // ||(H - E) phi|| / (||phi|| ||H||_Gershgorin)
  bool verified = false;
};

// Lowest eigenpair of the single well at the origin, with a residual check.
inline GroundState single_well_ground_state(const ModelParams& p, const WellSpec& w, const Grid2D& g,
                                            double residual_tol = 1e-10, EigOptions o = {}) {
  auto op = build_operator(p, g, {{w, Vec2::Zero()}});
  SpectralResult r = lowest_eigs(op, 1, o);
  GroundState gs;
  gs.phi = r.eigenvectors[0];
  gs.energy = r.eigenvalues[0];
  CVec res = op.apply(gs.phi.values) - gs.energy * gs.phi.values;
  auto [lo, hi] = gershgorin(op);
  gs.residual = res.norm() / gs.phi.values.norm() / std::max(std::abs(lo), std::abs(hi));
  gs.verified = gs.residual <= residual_tol;
  return gs;
}

// Multiply by a global phase so that <psi0_MHO, phi> > 0.
inline void fix_phase_by_mho_overlap(Field& phi, const ModelParams& p) {
  PhysicalMHO m = physical_mho(p.hessian, p.b, p.lambda);
  Field ref = Field::sample(phi.grid, [&](const Vec2& x) { return m.ground_state(x); });
  cd ov = ref.inner(phi);
  if (std::abs(ov) == 0.0) throw PreconditionError("ground state orthogonal to the oscillator reference");
  phi.values *= std::conj(ov) / std::abs(ov);
}

struct HoppingResult {
  cd rho = 0.0;
  double abs_rho = 0.0;
  double quadrature_error = 0.0;  // |rho_h - rho_2h| / 3 from the even sub-lattice
  std::string phase_convention = "phi0 phase fixed by <psi0_MHO, phi0> > 0";
};

// rho0 = lambda^2 h^2 sum_x conj(phi0(x+d)) v(x+d) exp(i b lambda d1 x2) phi0(x-d),
// over the support of v(. + d).
inline HoppingResult hopping_coefficient(const ModelParams& p, const WellSpec& w, const GroundState& gs) {
  if (!gs.verified) throw PreconditionError("hopping coefficient needs a residual-verified ground state");
  const Field& phi0 = gs.phi;
  const Grid2D& g = phi0.grid;
  Field phi = phi0;
  fix_phase_by_mho_overlap(phi, p);
  auto [s1, s2] = g.steps(Vec2(p.d1, 0.0), "well offset");
  (void)s2;
  const double B = p.blambda(), lam2 = p.lambda * p.lambda;
  const int o1 = g.n1 / 2, o2 = g.n2 / 2;  // sub-lattice anchored at the centre node
  cd fine = 0.0, coarse = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      Vec2 x = g.point(i, j);
      double v = w(x + Vec2(p.d1, 0.0));
      if (v == 0.0) continue;
      int ip = i + s1, im = i - s1;
      if (ip >= g.n1 || im < 0) throw GridError("hopping: grid does not contain x +- d");
      cd term = std::conj(phi.at(ip, j)) * v * std::polar(1.0, B * p.d1 * x(1)) * phi.at(im, j);
      fine += term;
      if ((i - o1) % 2 == 0 && (j - o2) % 2 == 0) coarse += term;
    }
  const double h2 = g.h * g.h;
  HoppingResult r;
  r.rho = lam2 * h2 * fine;
  r.abs_rho = std::abs(r.rho);
  r.quadrature_error = std::abs(r.rho - lam2 * 4.0 * h2 * coarse) / 3.0;
  return r;
}

// ------------------------------------------------------------- quasimodes

// C-infinity step: 1 on [0, a/2], 0 on [3a/4, inf).
inline double cutoff_chi(double r, double a) {
  auto psi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  double t = (0.75 * a - r) / (0.25 * a);
  if (t >= 1.0) return 1.0;
  if (t <= 0.0) return 0.0;
  return psi(t) / (psi(t) + psi(1.0 - t));
}

struct Quasimodes {
  Field minus, plus;          // psi_{-d}, psi_{+d}
  Field trial_minus, trial_plus;
  int rank = 0;
  int nodes = 0;
  double idempotence_defect = 0.0;
  double norm_defect = 0.0;     // max | ||psi|| - 1 |
  double overlap = 0.0;         // |<psi_-, psi_+>|
};

// Phi_{+-d} = chi(|x -+ d|) (R^{+-d} psi0_MHO)(x), projected with the Riesz
// projector of the contour. Four random probes ride along in the same solves
// to measure the projector rank.
inline Quasimodes quasimodes(const ModelParams& p, const SparseHermitianOp& H, const Contour& c,
                             RieszOptions ro = {}, unsigned long long seed = 7) {
  const Grid2D& g = H.grid;
  PhysicalMHO m = physical_mho(p.hessian, p.b, p.lambda);
  const double B = p.blambda();
  auto trial = [&](double sgn) {
    Vec2 d(sgn * p.d1, 0.0), dp(0.0, sgn * p.d1);
    return Field::sample(g, [&](const Vec2& x) {
      double chi = cutoff_chi((x - d).norm(), p.a);
      if (chi == 0.0) return cd(0.0);
      return chi * std::polar(1.0, 0.5 * B * x.dot(dp)) * m.ground_state(x - d);
    });
  };
  Quasimodes q;
  q.trial_minus = trial(-1.0);
  q.trial_plus = trial(1.0);
  const int probes = 4;
  CMat F(g.size(), 2 + probes);
  F.col(0) = q.trial_minus.values;
  F.col(1) = q.trial_plus.values;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const double scale = 1.0 / std::sqrt(double(g.size()) * g.h * g.h);
  for (int k = 0; k < probes; ++k)
    for (int r = 0; r < g.size(); ++r) F(r, 2 + k) = scale * cd(nd(rng), nd(rng));
  RieszProjector P(H, c, ro);
  RieszResult rr = P.project(F);
  Eigen::JacobiSVD<CMat> svd(rr.values);
  const auto& s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) q.rank += s(i) > 1e-6 * s(0);
  q.nodes = rr.nodes;
  q.idempotence_defect = rr.idempotence_defect;
  if (q.rank != 2) throw ClusterError("contour encloses " + std::to_string(q.rank) + " eigenvalues, expected 2", q.rank);
  q.minus = Field(g, rr.values.col(0));
  q.plus = Field(g, rr.values.col(1));
  q.norm_defect = std::max(std::abs(q.minus.norm() - 1.0), std::abs(q.plus.norm() - 1.0));
  q.overlap = std::abs(q.minus.inner(q.plus));
  return q;
}

// ------------------------------------------------------------- 2x2 reduction

using Mat2c = Eigen::Matrix2cd;

struct TwoByTwoReduction {
  Mat2c G, M;
  cd gamma = 0.0;  // det G
  cd sigma = 0.0;  // tr(adj(G) M)^2 - 4 det G det M
  double gram_defect = 0.0;  // ||G - I||
  double splitting() const { return std::sqrt(std::abs(sigma)) / std::abs(gamma); }
};

inline Mat2c adjugate(const Mat2c& A) {
  Mat2c r;
  r << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
  return r;
}

inline TwoByTwoReduction reduce_2x2(const Mat2c& G, const Mat2c& M) {
  TwoByTwoReduction t;
  t.G = G;
  t.M = M;
  t.gamma = G.determinant();
  if (std::abs(t.gamma) <= 1e-14 * G.squaredNorm())
    throw DegenerateQuasimodeError("Gramian is singular; quasimodes are linearly dependent");
  cd tr = (adjugate(G) * M).trace();
  t.sigma = tr * tr - 4.0 * t.gamma * M.determinant();
  t.gram_defect = (G - Mat2c::Identity()).norm();
  return t;
}

inline TwoByTwoReduction gram_and_m(const Field& psi_minus, const Field& psi_plus, const SparseHermitianOp& H) {
  const Field* psi[2] = {&psi_minus, &psi_plus};
  Field Hpsi[2] = {H.apply(psi_minus), H.apply(psi_plus)};
  Mat2c G, M;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      G(a, b) = psi[a]->inner(*psi[b]);
      M(a, b) = psi[a]->inner(Hpsi[b]);
    }
  return reduce_2x2(G, M);
}

// Generalized-eigenvalue gap of M v = E G v, the oracle for sqrt(sigma)/|det G|.
inline double generalized_gap(const Mat2c& G, const Mat2c& M) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat2c> es(M, G);
  return es.eigenvalues()(1) - es.eigenvalues()(0);
}

// ------------------------------------------------------------- direct splitting

struct SplittingResult {
  double E0 = 0.0, E1 = 0.0, E2 = 0.0;
  double delta = 0.0;
  double clearance = 0.0;  // relative distance of the eigenvalues to the contour, if one was given
  bool warning = false;    // cluster not cleanly separated from E2
  SpectralResult spectrum;
};

inline SplittingResult splitting_direct(const SparseHermitianOp& H, const std::optional<Contour>& c = std::nullopt,
                                        EigOptions o = {}) {
  SplittingResult s;
  s.spectrum = lowest_eigs(H, 3, o);
  s.E0 = s.spectrum.eigenvalues[0];
  s.E1 = s.spectrum.eigenvalues[1];
  s.E2 = s.spectrum.eigenvalues[2];
  s.delta = s.E1 - s.E0;
  if (c) {
    s.clearance = contour_clearance(*c, {s.E0, s.E1, s.E2});
    s.warning = enclosed_count(*c, {s.E0, s.E1, s.E2}) != 2 || s.clearance < 0.05;
  } else {
    s.warning = (s.E2 - s.E1) < 10.0 * s.delta;
  }
  return s;
}

// ------------------------------------------------------------- ratio report

struct RatioRow {
  double lambda, b, d1, E0, E1, Delta, abs_rho, ratio, quad_err;
  int grid_n;
  double grid_L;
};

struct RatioOptions {
  double h = 0.005;
  EigOptions eig{};
};

inline RatioRow ratio_point(const ModelParams& p, const WellSpec& w, RatioOptions o = {}) {
  Grid2D g = double_well_grid(p, o.h);
  GroundState gs = single_well_ground_state(p, w, g, 1e-10, o.eig);
  HoppingResult hop = hopping_coefficient(p, w, gs);
  auto H = build_operator(p, g, double_well(p, w));
  SplittingResult sp = splitting_direct(H, std::nullopt, o.eig);
  RatioRow r;
  r.lambda = p.lambda;
  r.b = p.b;
  r.d1 = p.d1;
  r.E0 = sp.E0;
  r.E1 = sp.E1;
  r.Delta = sp.delta;
  r.abs_rho = hop.abs_rho;
  r.ratio = sp.delta / (2.0 * hop.abs_rho);
  r.quad_err = hop.quadrature_error;
  r.grid_n = g.size();
  r.grid_L = g.L1;
  return r;
}

inline std::vector<RatioRow> ratio_report(ModelParams p, const WellSpec& w, const std::vector<double>& lambdas,
                                          RatioOptions o = {}) {
  std::vector<RatioRow> rows;
  for (double lam : lambdas) {
    p.lambda = lam;
    rows.push_back(ratio_point(p, w, o));
  }
  return rows;
}

inline const char* kRatioCsvHeader = "lambda,b,d1,E0,E1,Delta,abs_rho,ratio,quad_err,grid_n,grid_L";

inline void write_ratio_csv(const std::vector<RatioRow>& rows, std::ostream& out) {
  out << kRatioCsvHeader << '\n';
  out.precision(17);
  for (const auto& r : rows)
    out << r.lambda << ',' << r.b << ',' << r.d1 << ',' << r.E0 << ',' << r.E1 << ',' << r.Delta << ',' << r.abs_rho
        << ',' << r.ratio << ',' << r.quad_err << ',' << r.grid_n << ',' << r.grid_L << '\n';
}

}  // namespace magtun
