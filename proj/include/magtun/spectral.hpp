#pragma once

// Low eigenpairs of SparseHermitianOp (block Krylov with full
// reorthogonalization and restarts, on a shift-inverted or spectrally
// flipped operator; dense fallback for small grids) and the Riesz projector
// by trapezoid quadrature of resolvent solves on a circle.

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtun/grid_model.hpp"
#include "magtun/parallel.hpp"

namespace magtun {

using CMat = Eigen::MatrixXcd;

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best)
      : std::runtime_error(what), best_residuals(std::move(best)) {}
  std::vector<double> best_residuals;
};

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, int node) : std::runtime_error(what), node(node) {}
  int node;
};

struct SpectralResult {
  std::vector<double> eigenvalues;
  std::vector<Field> eigenvectors;
  std::vector<double> residuals;
  double orthogonality_defect = 0.0;
  std::string method;
  int iterations = 0;
};

struct EigOptions {
  enum class Method { automatic, shift_invert, plain, dense };
  Method method = Method::automatic;
  double tol = 1e-12;  // residual bound relative to the Gershgorin norm bound
  unsigned long long seed = 20240611ULL;
  int block = 0;       // 0: k + 2
  int steps = 8;       // Krylov blocks per restart cycle
  int max_cycles = 200;
  std::optional<double> shift;  // shift-invert pole; default below the spectrum
  int dense_max_points = 48 * 48;
};

// Gershgorin interval containing the spectrum.
inline std::pair<double, double> gershgorin(const SparseHermitianOp& op) {
  double lo = 1e300, hi = -1e300;
  for (int r = 0; r < op.mat.outerSize(); ++r) {
    double d = 0.0, off = 0.0;
    for (SparseHermitianOp::Matrix::InnerIterator it(op.mat, r); it; ++it) {
      if (it.col() == r)
        d = it.value().real();
      else
        off += std::abs(it.value());
    }
    lo = std::min(lo, d - off);
    hi = std::max(hi, d + off);
  }
  return {lo, hi};
}

namespace detail {

inline Field to_field(const Grid2D& g, const CVec& x) {
  Field f(g, x);
  f.normalize();
  return f;
}

inline void finish(SpectralResult& res, const SparseHermitianOp& op) {
  const int k = int(res.eigenvalues.size());
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return res.eigenvalues[a] < res.eigenvalues[b]; });
  SpectralResult s;
  s.method = res.method;
  s.iterations = res.iterations;
  for (int i : order) {
    s.eigenvalues.push_back(res.eigenvalues[i]);
    s.eigenvectors.push_back(res.eigenvectors[i]);
  }
  for (int i = 0; i < k; ++i) {
    const CVec& v = s.eigenvectors[i].values;
    double r = (op.mat * v - s.eigenvalues[i] * v).norm() / v.norm();
    s.residuals.push_back(r);
  }
  double od = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) od = std::max(od, std::abs(s.eigenvectors[i].inner(s.eigenvectors[j])));
  s.orthogonality_defect = od;
  res = std::move(s);
}

// Orthonormalize the columns of Y against Q (two passes of classical
// Gram-Schmidt) and among themselves; dependent columns are replaced by
// random directions.
inline CMat orthonormal_extension(const CMat& Q, CMat Y, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  for (int pass = 0; pass < 2; ++pass)
    if (Q.cols() > 0) Y -= Q * (Q.adjoint() * Y);
  for (int c = 0; c < Y.cols(); ++c) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      double before = Y.col(c).norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (Q.cols() > 0) Y.col(c) -= Q * (Q.adjoint() * Y.col(c));
        if (c > 0) Y.col(c) -= Y.leftCols(c) * (Y.leftCols(c).adjoint() * Y.col(c));
      }
      double after = Y.col(c).norm();
      if (after > 1e-10 * std::max(before, 1e-300) && after > 0.0) {
        Y.col(c) /= after;
        break;
      }
      for (int r = 0; r < Y.rows(); ++r) Y(r, c) = cd(nd(rng), nd(rng));
    }
  }
  return Y;
}

}  // namespace detail

inline SpectralResult dense_lowest(const SparseHermitianOp& op, int k) {
  CMat A = CMat(op.mat);
  Eigen::SelfAdjointEigenSolver<CMat> es(A);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", {});
  SpectralResult res;
  res.method = "dense";
  for (int i = 0; i < k; ++i) {
    res.eigenvalues.push_back(es.eigenvalues()(i));
    res.eigenvectors.push_back(detail::to_field(op.grid, es.eigenvectors().col(i)));
  }
  detail::finish(res, op);
  return res;
}

// Largest-end Ritz pairs of a Hermitian linear map T given as a block apply.
// Returns (theta, X) for the `want` largest eigenvalues; `accept` decides
// convergence per column.
inline std::pair<Eigen::VectorXd, CMat> block_krylov_largest(
    int n, int want, const std::function<CMat(const CMat&)>& T, const EigOptions& o,
    const std::function<std::vector<double>(const Eigen::VectorXd&, const CMat&)>& residuals, double tol_abs,
    int& cycles_out) {
  const int p = o.block > 0 ? std::max(o.block, want) : want + 2;
  const int s = std::max(2, o.steps);
  const int q = 2 * p;  // Ritz vectors kept across a restart
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> nd;
  CMat X(n, p);
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < n; ++r) X(r, c) = cd(nd(rng), nd(rng));
  X = detail::orthonormal_extension(CMat(n, 0), X, rng);
  CMat TX = T(X);
  std::vector<double> best(want, 1e300);
  for (int cycle = 0; cycle < o.max_cycles; ++cycle) {
    const int k0 = int(X.cols());
    CMat V(n, k0 + p * s), W(n, k0 + p * s);
    V.leftCols(k0) = X;
    W.leftCols(k0) = TX;
    int cols = k0;
    for (int j = 1; j <= s; ++j) {
      // The first extension continues from the leading Ritz block.
      const int src = j == 1 ? 0 : cols - p;
      CMat Y = detail::orthonormal_extension(V.leftCols(cols), W.middleCols(src, p), rng);
      V.middleCols(cols, p) = Y;
      W.middleCols(cols, p) = T(Y);
      cols += p;
    }
    CMat Hm = V.adjoint() * W;
    Hm = 0.5 * (Hm + CMat(Hm.adjoint()));
    Eigen::SelfAdjointEigenSolver<CMat> es(Hm);
    const int m = int(Hm.rows());
    const int keep = std::min(q, m);
    Eigen::VectorXd theta(keep);
    CMat Yr(m, keep);
    for (int c = 0; c < keep; ++c) {
      theta(c) = es.eigenvalues()(m - 1 - c);
      Yr.col(c) = es.eigenvectors().col(m - 1 - c);
    }
    X = V * Yr;
    TX = W * Yr;
    std::vector<double> r = residuals(theta.head(want), X.leftCols(want));
    bool done = true;
    for (int c = 0; c < want; ++c) {
      best[c] = std::min(best[c], r[c]);
      if (!(r[c] <= tol_abs)) done = false;
    }
    cycles_out = cycle + 1;
    if (done) return {theta.head(want), X.leftCols(want)};
  }
  throw ConvergenceError("block Krylov did not converge", best);
}

inline SpectralResult lowest_eigs(const SparseHermitianOp& op, int k, EigOptions o = {}) {
  const int n = op.dim();
  if (k < 1 || k >= n / 2) throw std::invalid_argument("lowest_eigs: need 1 <= k << dimension");
  auto method = o.method;
  if (method == EigOptions::Method::automatic)
    method = n <= o.dense_max_points ? EigOptions::Method::dense : EigOptions::Method::shift_invert;
  if (method == EigOptions::Method::dense) return dense_lowest(op, k);

  auto [glo, ghi] = gershgorin(op);
  const double scale = std::max(std::abs(glo), std::abs(ghi));
  const double tol_abs = o.tol * scale;
  SpectralResult res;
  int cycles = 0;
  auto h_residuals = [&](std::vector<double>& E, const CMat& X) {
    std::vector<double> r(X.cols());
    for (int c = 0; c < X.cols(); ++c) {
      CVec hx = op.mat * X.col(c);
      E[c] = std::real(X.col(c).dot(hx));
      r[c] = (hx - E[c] * X.col(c)).norm();
    }
    return r;
  };
  std::vector<double> E(k);

  if (method == EigOptions::Method::shift_invert) {
    const double sigma = o.shift ? *o.shift : glo - 1e-2 * std::max(1.0, std::abs(glo)) - 1.0;
    Eigen::SparseMatrix<cd, Eigen::ColMajor, int> A = op.mat;
    Eigen::SparseMatrix<cd, Eigen::ColMajor, int> I(n, n);
    I.setIdentity();
    A -= sigma * I;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<cd, Eigen::ColMajor, int>, Eigen::Lower,
                         Eigen::AMDOrdering<int>>
        llt(A);
    if (llt.info() != Eigen::Success)
      throw ConvergenceError("shift-invert factorization failed (shift not below spectrum?)", {});
    auto T = [&](const CMat& Y) -> CMat { return llt.solve(Y); };
    auto resid = [&](const Eigen::VectorXd&, const CMat& X) { return h_residuals(E, X); };
    auto [theta, X] = block_krylov_largest(n, k, T, o, resid, tol_abs, cycles);
    h_residuals(E, X);
    res.method = "shift-invert block Krylov";
    for (int c = 0; c < k; ++c) {
      res.eigenvalues.push_back(E[c]);
      res.eigenvectors.push_back(detail::to_field(op.grid, X.col(c)));
    }
  } else {
    const double c0 = ghi;
    auto T = [&](const CMat& Y) -> CMat { return c0 * Y - op.mat * Y; };
    auto resid = [&](const Eigen::VectorXd&, const CMat& X) { return h_residuals(E, X); };
    auto [theta, X] = block_krylov_largest(n, k, T, o, resid, tol_abs, cycles);
    h_residuals(E, X);
    res.method = "block Krylov";
    for (int c = 0; c < k; ++c) {
      res.eigenvalues.push_back(E[c]);
      res.eigenvectors.push_back(detail::to_field(op.grid, X.col(c)));
    }
  }
  res.iterations = cycles;
  detail::finish(res, op);
  return res;
}

// ---------------------------------------------------------------- contours

struct Contour {
  cd center = 0.0;
  double radius = 1.0;
  int m = 32;
  cd z(cd xi) const { return center + radius * xi; }
  cd node(int j, int count) const {
    return z(std::polar(1.0, 2.0 * std::numbers::pi * j / count));
  }
};

// z(xi) = -lambda^2 + e0 lambda + (e1 - e0) xi lambda / 2.
inline Contour contour_for_ground(const ModelParams& p, double e0_mho, double e1_mho) {
  if (!(e1_mho > e0_mho)) throw ParameterError("contour needs e1 > e0");
  Contour c;
  c.center = -p.lambda * p.lambda + e0_mho * p.lambda;
  c.radius = 0.5 * (e1_mho - e0_mho) * p.lambda;
  c.m = 32;
  return c;
}

// Smallest distance from an eigenvalue list to the circle, relative to the radius.
inline double contour_clearance(const Contour& c, const std::vector<double>& eigs) {
  double d = 1e300;
  for (double e : eigs) d = std::min(d, std::abs(std::abs(cd(e) - c.center) - c.radius));
  return d / c.radius;
}

inline int enclosed_count(const Contour& c, const std::vector<double>& eigs) {
  int n = 0;
  for (double e : eigs) n += std::abs(cd(e) - c.center) < c.radius;
  return n;
}

struct RieszOptions {
  int m_max = 1024;
  double idempotence_tol = 1e-8;
  int threads = 1;
  bool pair_conjugate_nodes = true;  // uses (conj z - H) = (z - H)^* on a real-centered contour
};

struct RieszResult {
  CMat values;  // projected columns
  int nodes = 0;
  double idempotence_defect = 0.0;
};

class RieszProjector {
 public:
  RieszProjector(const SparseHermitianOp& op, Contour c, RieszOptions o = {})
      : op_(op), c_(c), o_(o) {
    A_ = op.mat;
    I_.resize(op.dim(), op.dim());
    I_.setIdentity();
  }

  const Contour& contour() const { return c_; }

  // Trapezoid rule with `m` nodes, (1/m) sum r xi_j (z_j - H)^{-1} F.
  CMat apply(const CMat& F, int m) const { return sum_nodes(F, m, 1, 0) / double(m); }

  // Adaptive: m doubles from the contour's default until Pi(Pi F) = Pi F to
  // the configured tolerance. Node sums are nested, so each doubling only
  // solves at the new nodes for the first application.
  RieszResult project(const CMat& F) const {
    RieszResult out;
    int m = c_.m;
    CMat S = sum_nodes(F, m, 1, 0);
    const double fn = F.norm();
    while (true) {
      CMat P = S / double(m);
      CMat PP = apply(P, m);
      out.idempotence_defect = (PP - P).norm() / std::max(fn, 1e-300);
      out.nodes = m;
      if (out.idempotence_defect <= o_.idempotence_tol || 2 * m > o_.m_max) {
        out.values = P;
        return out;
      }
      S += sum_nodes(F, 2 * m, 2, 1);
      m *= 2;
    }
  }

 private:
  // Sum over nodes j = offset, offset + stride, ... < m of r xi_j R(z_j) F.
  CMat sum_nodes(const CMat& F, int m, int stride, int offset) const {
    std::vector<int> js;
    for (int j = offset; j < m; j += stride) js.push_back(j);
    const bool pair = o_.pair_conjugate_nodes && c_.center.imag() == 0.0;
    // With pairing, node j and m - j share one factorization.
    std::vector<std::pair<int, int>> tasks;  // (j, partner or -1)
    std::vector<bool> done(m, false);
    for (int j : js) {
      if (done[j]) continue;
      int partner = (m - j) % m;
      bool has_partner = pair && partner != j && std::find(js.begin(), js.end(), partner) != js.end();
      tasks.push_back({j, has_partner ? partner : -1});
      done[j] = true;
      if (has_partner) done[partner] = true;
    }
    std::vector<CMat> parts(tasks.size());
    parallel_for(int(tasks.size()), o_.threads, [&](int t) {
      auto [j, partner] = tasks[t];
      cd xi = std::polar(1.0, 2.0 * std::numbers::pi * j / m);
      cd z = c_.z(xi);
      Eigen::SparseMatrix<cd, Eigen::ColMajor, int> M = z * I_ - A_;
      Eigen::SparseLU<Eigen::SparseMatrix<cd, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
      lu.compute(M);
      if (lu.info() != Eigen::Success)
        throw SolveError("resolvent factorization failed at contour node " + std::to_string(j) + " of " +
                             std::to_string(m),
                         j);
      CMat X = lu.solve(F);
      CMat acc = (c_.radius * xi) * X;
      if (partner >= 0) {
        CMat Y = lu.adjoint().solve(F);
        acc += (c_.radius * std::conj(xi)) * Y;
      }
      parts[t] = std::move(acc);
    });
    CMat S = CMat::Zero(F.rows(), F.cols());
    for (auto& p : parts) S += p;
    return S;
  }

  const SparseHermitianOp& op_;
  Contour c_;
  RieszOptions o_;
  Eigen::SparseMatrix<cd, Eigen::ColMajor, int> A_, I_;
};

inline Field riesz_project(const SparseHermitianOp& op, const Contour& c, const Field& f, RieszOptions o = {}) {
  RieszProjector P(op, c, o);
  CMat F = f.values;
  RieszResult r = P.project(F);
  return Field(f.grid, r.values.col(0));
}

// Numerical rank of the projector from its action on random probes.
inline int projector_rank(const RieszProjector& P, int dim, int probes, int m, unsigned long long seed,
                          double rel_tol = 1e-6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CMat F(dim, probes);
  for (int c = 0; c < probes; ++c)
    for (int r = 0; r < dim; ++r) F(r, c) = cd(nd(rng), nd(rng));
  CMat PF = P.apply(F, m);
  Eigen::JacobiSVD<CMat> svd(PF);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) rank += s(i) > rel_tol * s(0);
  return rank;
}

}  // namespace magtun
