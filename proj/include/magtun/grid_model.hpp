#pragma once

// Physical parameters, sampling grid, compactly supported wells and the
// Peierls-phase discretization of (P - A)^2 + V with A = (B/2) (x - o)^perp.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace magtun {

using cd = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using CVec = Eigen::VectorXcd;

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CommensurabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ModelParams {
  double lambda = 20.0;
  double b = 0.0;
  double d1 = 0.3;
  double a = 0.1;
  Eigen::Matrix2d hessian = 800.0 * Eigen::Matrix2d::Identity();  // radial p=4 well, a=0.1
  cd mu = 0.0;
  double epsilon = 0.5;
  double separation_C = 2.0;

  double blambda() const { return b * lambda; }

  void validate() const {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (b < 0.0) throw ParameterError("b must be nonnegative");
    if (d1 < 0.0) throw ParameterError("d1 must be nonnegative");
    if (!(a > 0.0)) throw ParameterError("a must be positive");
    if (std::abs(hessian(0, 1) - hessian(1, 0)) > 1e-12 * hessian.norm())
      throw ParameterError("hessian must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hessian);
    if (!(es.eigenvalues()(0) > 0.0)) throw ParameterError("hessian must be positive definite");
    if (!(epsilon > 0.0 && epsilon < M_PI / 2)) throw ParameterError("epsilon must lie in (0, pi/2)");
    if (separation_C < 2.0) throw ParameterError("separation constant must be >= 2");
  }

  void validate_double_well() const {
    validate();
    if (!(2.0 * d1 > separation_C * a))
      throw ParameterError("double well needs 2*d1 > C*a");
  }

  double min_hessian_eig() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hessian);
    return es.eigenvalues()(0);
  }
};

// Nodes x1 = -L1 + i h, x2 = -L2 + j h. Dirichlet: the wall sits one spacing
// outside the outermost nodes.
struct Grid2D {
  double L1 = 1.0, L2 = 1.0, h = 0.1;
  int n1 = 21, n2 = 21;

  Grid2D() = default;

  static Grid2D square(double L, int n) {
    if (!(L > 0.0) || n < 3) throw GridError("grid needs L > 0 and n >= 3");
    Grid2D g;
    g.L1 = g.L2 = L;
    g.n1 = g.n2 = n;
    g.h = 2.0 * L / (n - 1);
    return g;
  }

  // Rectangle with spacing h; half-extents rounded up to multiples of h.
  static Grid2D rect(double L1, double L2, double h) {
    if (!(L1 > 0.0 && L2 > 0.0 && h > 0.0)) throw GridError("grid needs positive extents and spacing");
    Grid2D g;
    g.h = h;
    int m1 = int(std::ceil(L1 / h - 1e-9)), m2 = int(std::ceil(L2 / h - 1e-9));
    g.L1 = m1 * h;
    g.L2 = m2 * h;
    g.n1 = 2 * m1 + 1;
    g.n2 = 2 * m2 + 1;
    return g;
  }

  int size() const { return n1 * n2; }
  int index(int i, int j) const { return i * n2 + j; }
  double x1(int i) const { return -L1 + i * h; }
  double x2(int j) const { return -L2 + j * h; }
  Vec2 point(int i, int j) const { return {x1(i), x2(j)}; }
  bool operator==(const Grid2D& o) const {
    return n1 == o.n1 && n2 == o.n2 && h == o.h && L1 == o.L1 && L2 == o.L2;
  }

  // Integer steps for a vector that must be a lattice vector.
  std::pair<int, int> steps(const Vec2& z, const char* what = "vector") const {
    double s1 = z(0) / h, s2 = z(1) / h;
    long r1 = std::lround(s1), r2 = std::lround(s2);
    if (std::abs(s1 - r1) > 1e-9 * std::max(1.0, std::abs(s1)) ||
        std::abs(s2 - r2) > 1e-9 * std::max(1.0, std::abs(s2)))
      throw CommensurabilityError(std::string(what) + " is not an integer multiple of h");
    return {int(r1), int(r2)};
  }
};

struct Field {
  Grid2D grid;
  CVec values;

  Field() = default;
  explicit Field(const Grid2D& g) : grid(g), values(CVec::Zero(g.size())) {}
  Field(const Grid2D& g, CVec v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw GridError("field size does not match grid");
  }

  template <class F>
  static Field sample(const Grid2D& g, F&& f) {
    Field out(g);
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) out.values(g.index(i, j)) = f(g.point(i, j));
    return out;
  }

  cd& at(int i, int j) { return values(grid.index(i, j)); }
  cd at(int i, int j) const { return values(grid.index(i, j)); }

  double norm2() const { return grid.h * grid.h * values.squaredNorm(); }
  double norm() const { return std::sqrt(norm2()); }
  cd inner(const Field& o) const { return grid.h * grid.h * values.dot(o.values); }
  void normalize() { values /= norm(); }
};

struct WellSpec {
  enum class Kind { anisotropic_bump, radial_bump, custom_samples };
  Kind kind = Kind::radial_bump;
  int exponent = 4;
  Eigen::Matrix2d shape = Eigen::Matrix2d::Identity();
  // For custom_samples: v(x - center) and its support radius.
  std::function<double(const Vec2&)> custom;
  double custom_radius = 0.0;

  static WellSpec radial(double a, int p = 4) {
    WellSpec w;
    w.kind = Kind::radial_bump;
    w.exponent = p;
    w.shape = Eigen::Matrix2d::Identity() / (a * a);
    return w;
  }
  static WellSpec anisotropic(const Eigen::Matrix2d& S, int p = 4) {
    WellSpec w;
    w.kind = Kind::anisotropic_bump;
    w.exponent = p;
    w.shape = S;
    return w;
  }
  // The bump whose Hessian at 0 equals the given matrix: S = H / (2p).
  static WellSpec from_hessian(const Eigen::Matrix2d& H, int p = 4) {
    return anisotropic(H / (2.0 * p), p);
  }

  void validate() const {
    if (kind == Kind::custom_samples) {
      if (!custom || !(custom_radius > 0.0)) throw ParameterError("custom well needs sampler and radius");
      return;
    }
    if (exponent < 4) throw ParameterError("well exponent must be >= 4");
    if (std::abs(shape(0, 1) - shape(1, 0)) > 1e-12 * shape.norm())
      throw ParameterError("shape matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape);
    if (!(es.eigenvalues()(0) > 0.0)) throw ParameterError("shape matrix must be positive definite");
  }

  double support_radius() const {
    if (kind == Kind::custom_samples) return custom_radius;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape);
    return 1.0 / std::sqrt(es.eigenvalues()(0));
  }

  Eigen::Matrix2d hessian() const { return 2.0 * exponent * shape; }

  double operator()(const Vec2& y) const {
    if (kind == Kind::custom_samples) return custom(y);
    double q = y.dot(shape * y);
    if (q >= 1.0) return 0.0;
    return -std::pow(1.0 - q, exponent);
  }
};

struct SparseHermitianOp {
  using Matrix = Eigen::SparseMatrix<cd, Eigen::RowMajor, int>;
  Matrix mat;
  Grid2D grid;
  ModelParams params;
  double field = 0.0;          // B of the vector potential
  double kinetic_scale = 1.0;
  Vec2 gauge_origin = Vec2::Zero();
  Eigen::VectorXd potential;   // diagonal multiplication part

  int dim() const { return int(mat.rows()); }
  CVec apply(const CVec& f) const { return mat * f; }
  Field apply(const Field& f) const { return Field(f.grid, mat * f.values); }
  double max_nonhermiticity() const {
    Matrix d = mat - Matrix(mat.adjoint());
    double m = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
      for (Matrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
  }
};

// Matrix element phase for the hop x -> y along a lattice bond,
// exp(-i int_x^y A . dl), midpoint rule (exact for linear A).
inline cd bond_phase(double B, const Vec2& o, const Vec2& x, const Vec2& y) {
  Vec2 m = 0.5 * (x + y) - o;
  Vec2 dl = y - x;
  double integral = 0.5 * B * (-m(1) * dl(0) + m(0) * dl(1));
  return std::polar(1.0, -integral);
}

// kinetic_scale * lattice (P - A)^2 + diag(potential), Dirichlet.
inline SparseHermitianOp assemble_magnetic(const Grid2D& g, double B, const Eigen::VectorXd& potential,
                                           double kinetic_scale = 1.0, const Vec2& origin = Vec2::Zero()) {
  if (potential.size() != g.size()) throw GridError("potential size does not match grid");
  const double h2 = g.h * g.h;
  const double t = kinetic_scale / h2;
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(size_t(g.size()) * 5);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      int r = g.index(i, j);
      Vec2 x = g.point(i, j);
      trip.emplace_back(r, r, cd(4.0 * t + potential(r), 0.0));
      if (i + 1 < g.n1) {
        int c = g.index(i + 1, j);
        cd ph = bond_phase(B, origin, x, g.point(i + 1, j));
        trip.emplace_back(r, c, -t * ph);
        trip.emplace_back(c, r, -t * std::conj(ph));
      }
      if (j + 1 < g.n2) {
        int c = g.index(i, j + 1);
        cd ph = bond_phase(B, origin, x, g.point(i, j + 1));
        trip.emplace_back(r, c, -t * ph);
        trip.emplace_back(c, r, -t * std::conj(ph));
      }
    }
  SparseHermitianOp op;
  op.mat.resize(g.size(), g.size());
  op.mat.setFromTriplets(trip.begin(), trip.end());
  op.mat.makeCompressed();
  op.grid = g;
  op.field = B;
  op.kinetic_scale = kinetic_scale;
  op.gauge_origin = origin;
  op.potential = potential;
  return op;
}

// Pointwise action of the same stencil on a callable, for residual checks of
// closed-form kernels at nodes that need not lie on a stored grid.
template <class F>
cd stencil_apply(double B, double kinetic_scale, double h, const Vec2& x, F&& f, double potential_at_x,
                 const Vec2& origin = Vec2::Zero()) {
  const Vec2 e1(h, 0.0), e2(0.0, h);
  cd fx = f(x);
  cd s = 4.0 * fx;
  for (const Vec2& e : {e1, e2, Vec2(-e1), Vec2(-e2)}) s -= bond_phase(B, origin, x, x + e) * f(x + e);
  return kinetic_scale * s / (h * h) + potential_at_x * fx;
}

inline Field build_well(const WellSpec& spec, const ModelParams& params, const Grid2D& grid, const Vec2& center) {
  spec.validate();
  double r = spec.support_radius();
  if (r > params.a * (1.0 + 1e-12))
    throw ParameterError("well support radius exceeds a");
  if (std::abs(center(0)) + r > grid.L1 + 1e-12 || std::abs(center(1)) + r > grid.L2 + 1e-12)
    throw GridError("grid does not cover the well support");
  return Field::sample(grid, [&](const Vec2& x) { return cd(spec(x - center), 0.0); });
}

// wells: 0 (Landau), 1 or 2 entries; the potential is lambda^2 * sum v.
inline SparseHermitianOp build_operator(const ModelParams& params, const Grid2D& grid,
                                        const std::vector<std::pair<WellSpec, Vec2>>& wells,
                                        const Vec2& gauge_origin = Vec2::Zero()) {
  params.validate();
  if (wells.size() > 2) throw ParameterError("at most two wells");
  Eigen::VectorXd V = Eigen::VectorXd::Zero(grid.size());
  for (const auto& [spec, c] : wells) {
    grid.steps(c, "well center");
    Field w = build_well(spec, params, grid, c);
    V += params.lambda * params.lambda * w.values.real();
  }
  SparseHermitianOp op = assemble_magnetic(grid, params.blambda(), V, 1.0, gauge_origin);
  op.params = params;
  return op;
}

inline std::vector<std::pair<WellSpec, Vec2>> double_well(const ModelParams& p, const WellSpec& w) {
  p.validate_double_well();
  return {{w, Vec2(-p.d1, 0.0)}, {w, Vec2(p.d1, 0.0)}};
}

// (R^z f)(x) = exp(i (B/2) x . z^perp) f(x - z), zero fill past the boundary.
inline Field magnetic_translate(const Field& f, const Vec2& z, double blambda) {
  const Grid2D& g = f.grid;
  auto [s1, s2] = g.steps(z, "translation");
  Field out(g);
  const Vec2 zp(-z(1), z(0));
  for (int i = 0; i < g.n1; ++i) {
    int si = i - s1;
    if (si < 0 || si >= g.n1) continue;
    for (int j = 0; j < g.n2; ++j) {
      int sj = j - s2;
      if (sj < 0 || sj >= g.n2) continue;
      out.at(i, j) = std::polar(1.0, 0.5 * blambda * g.point(i, j).dot(zp)) * f.at(si, sj);
    }
  }
  return out;
}

// Coordinate-format text dump: "row col re im" per stored entry, 0-based.
inline void export_coo(const SparseHermitianOp& op, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "# " << op.dim() << " " << op.dim() << " " << op.mat.nonZeros() << "\n";
  os << std::setprecision(17);
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (SparseHermitianOp::Matrix::InnerIterator it(op.mat, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag() << "\n";
}

}  // namespace magtun
