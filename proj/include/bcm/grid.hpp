#pragma once

// Uniform node-centred grids and the stencil operators shared by every
// model component.
//
// Nodes sit at x_i = x0 + i*dx, i = 0..nx-1 (likewise in y). Each node owns a
// control volume of wx*wy*dx^2 where the weight is 1/2 on the outermost
// nodes and 1 elsewhere, so integrate() is the trapezoidal rule and the flux
// operators below conserve exactly that quadrature. Zero-flux boundaries are
// realised by mirror ghosts reflected about the boundary node
// (f[-1] = f[1]).

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <utility>
#include <string>

#include "bcm/errors.hpp"

namespace bcm {

struct GridSpec {
  int nx = 101;
  int ny = 101;  ///< 1 for one-dimensional runs
  double dx = 0.05;
  double x0 = 0.0;
  double y0 = 0.0;

  bool is_1d() const { return ny == 1; }
  double x(int i) const { return x0 + i * dx; }
  double y(int j) const { return y0 + j * dx; }
  double extent_x() const { return (nx - 1) * dx; }
  double extent_y() const { return is_1d() ? 0.0 : (ny - 1) * dx; }
  Eigen::Index size() const { return Eigen::Index(nx) * ny; }

  /// Throws StructuralError unless nx >= 3, ny == 1 or ny >= 3, dx > 0.
  void validate() const {
    if (nx < 3) throw StructuralError("GridSpec: nx must be >= 3");
    if (!(ny == 1 || ny >= 3)) throw StructuralError("GridSpec: ny must be 1 or >= 3");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw StructuralError("GridSpec: dx must be positive");
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw StructuralError("GridSpec: non-finite origin");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Square domain [x0, x0+extent]^2 with the given spacing.
inline GridSpec square_grid(double extent, double dx, double x0 = 0.0, double y0 = 0.0) {
  const int n = static_cast<int>(std::lround(extent / dx)) + 1;
  GridSpec g{n, n, dx, x0, y0};
  g.validate();
  return g;
}

inline GridSpec line_grid(double extent, double dx, double x0 = 0.0) {
  const int n = static_cast<int>(std::lround(extent / dx)) + 1;
  GridSpec g{n, 1, dx, x0, 0.0};
  g.validate();
  return g;
}

/// Row-major node array: row j is the line y = y_j, column i is x = x_i.
template <typename Scalar>
using NodeArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Real-valued field sampled on the nodes of a GridSpec.
template <typename Scalar>
class BasicField {
 public:
  using Array = NodeArray<Scalar>;

  BasicField() = default;

  explicit BasicField(const GridSpec& spec, Scalar fill = Scalar(0))
      : spec_(spec), values_(Array::Constant(spec.ny, spec.nx, fill)) {
    spec_.validate();
  }

  BasicField(const GridSpec& spec, Array values) : spec_(spec), values_(std::move(values)) {
    spec_.validate();
    check_shape();
  }

  /// Samples fn(x, y) at every node.
  template <typename Fn>
  static BasicField sample(const GridSpec& spec, Fn&& fn) {
    BasicField f(spec);
    for (int j = 0; j < spec.ny; ++j)
      for (int i = 0; i < spec.nx; ++i) f.values_(j, i) = fn(spec.x(i), spec.y(j));
    return f;
  }

  const GridSpec& spec() const { return spec_; }
  Array& values() { return values_; }
  const Array& values() const { return values_; }

  /// Node (i, j) with i along x.
  Scalar& operator()(int i, int j) { return values_(j, i); }
  Scalar operator()(int i, int j) const { return values_(j, i); }

  int nx() const { return spec_.nx; }
  int ny() const { return spec_.ny; }

  bool all_finite() const { return values_.allFinite(); }

  Scalar max() const { return values_.maxCoeff(); }
  Scalar min() const { return values_.minCoeff(); }

  void check_shape() const {
    if (values_.rows() != spec_.ny || values_.cols() != spec_.nx)
      throw StructuralError("field dimensions do not match grid spec");
  }

  BasicField& operator+=(const BasicField& o) {
    require_same_grid(*this, o);
    values_ += o.values_;
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    require_same_grid(*this, o);
    values_ -= o.values_;
    return *this;
  }
  BasicField& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(Scalar s, BasicField a) { return a *= s; }
  friend BasicField operator*(BasicField a, Scalar s) { return a *= s; }

  friend void require_same_grid(const BasicField& a, const BasicField& b) {
    if (!(a.spec_ == b.spec_)) throw StructuralError("fields live on different grids");
    a.check_shape();
    b.check_shape();
  }

 private:
  GridSpec spec_{};
  Array values_{};
};

template <typename Scalar>
struct BasicVectorField {
  BasicField<Scalar> x;
  BasicField<Scalar> y;
};

using ScalarField = BasicField<double>;
using VectorField = BasicVectorField<double>;

enum class FaceAverage { Arithmetic, Harmonic };

namespace detail {

/// Node divergence of face fluxes. `fx` holds the x-flux on the nx-1 faces of
/// each row, `fy` the y-flux on the ny-1 faces of each column; boundary faces
/// carry zero flux. Boundary nodes divide by their half control volume.
template <typename Scalar>
NodeArray<Scalar> divergence_of_faces(const GridSpec& g, const NodeArray<Scalar>& fx,
                                      const NodeArray<Scalar>* fy) {
  const Scalar inv_dx = Scalar(1) / Scalar(g.dx);
  NodeArray<Scalar> div = NodeArray<Scalar>::Zero(g.ny, g.nx);
  div.leftCols(g.nx - 1) += fx;
  div.rightCols(g.nx - 1) -= fx;
  div.col(0) *= Scalar(2);
  div.col(g.nx - 1) *= Scalar(2);
  if (fy != nullptr && !g.is_1d()) {
    NodeArray<Scalar> dy = NodeArray<Scalar>::Zero(g.ny, g.nx);
    dy.topRows(g.ny - 1) += *fy;
    dy.bottomRows(g.ny - 1) -= *fy;
    dy.row(0) *= Scalar(2);
    dy.row(g.ny - 1) *= Scalar(2);
    div += dy;
  }
  return div * inv_dx;
}

template <typename Scalar>
NodeArray<Scalar> face_mean(const NodeArray<Scalar>& a, const NodeArray<Scalar>& b,
                            FaceAverage mode) {
  if (mode == FaceAverage::Arithmetic) return Scalar(0.5) * (a + b);
  // Harmonic mean with the D = 0 limit taken as zero conductance.
  const NodeArray<Scalar> s = a + b;
  return (s > Scalar(0)).select(Scalar(2) * a * b / s.max(std::numeric_limits<Scalar>::min()),
                                Scalar(0));
}

}  // namespace detail

/// Five-point Laplacian with mirror ghosts (zero normal derivative).
template <typename Scalar>
BasicField<Scalar> laplacian(const BasicField<Scalar>& f) {
  f.check_shape();
  const GridSpec& g = f.spec();
  const auto& v = f.values();
  const Scalar inv_dx = Scalar(1) / Scalar(g.dx);
  NodeArray<Scalar> fx = (v.rightCols(g.nx - 1) - v.leftCols(g.nx - 1)) * inv_dx;
  if (g.is_1d()) return {g, detail::divergence_of_faces<Scalar>(g, fx, nullptr)};
  NodeArray<Scalar> fy = (v.bottomRows(g.ny - 1) - v.topRows(g.ny - 1)) * inv_dx;
  return {g, detail::divergence_of_faces<Scalar>(g, fx, &fy)};
}

/// Central differences in the interior, one-sided on the boundary. The y
/// component of a 1D field is identically zero.
template <typename Scalar>
BasicVectorField<Scalar> gradient(const BasicField<Scalar>& f) {
  f.check_shape();
  const GridSpec& g = f.spec();
  const auto& v = f.values();
  const Scalar inv_dx = Scalar(1) / Scalar(g.dx);
  const Scalar half_inv_dx = Scalar(0.5) * inv_dx;

  NodeArray<Scalar> gx(g.ny, g.nx);
  gx.middleCols(1, g.nx - 2) = (v.rightCols(g.nx - 2) - v.leftCols(g.nx - 2)) * half_inv_dx;
  gx.col(0) = (v.col(1) - v.col(0)) * inv_dx;
  gx.col(g.nx - 1) = (v.col(g.nx - 1) - v.col(g.nx - 2)) * inv_dx;

  NodeArray<Scalar> gy = NodeArray<Scalar>::Zero(g.ny, g.nx);
  if (!g.is_1d()) {
    gy.middleRows(1, g.ny - 2) = (v.bottomRows(g.ny - 2) - v.topRows(g.ny - 2)) * half_inv_dx;
    gy.row(0) = (v.row(1) - v.row(0)) * inv_dx;
    gy.row(g.ny - 1) = (v.row(g.ny - 1) - v.row(g.ny - 2)) * inv_dx;
  }
  return {BasicField<Scalar>(g, std::move(gx)), BasicField<Scalar>(g, std::move(gy))};
}

/// Counter-clockwise rotation of the gradient: (-df/dy, df/dx).
template <typename Scalar>
BasicVectorField<Scalar> perp_gradient(const BasicField<Scalar>& f) {
  auto grad = gradient(f);
  grad.y.values() = -grad.y.values();
  return {std::move(grad.y), std::move(grad.x)};
}

template <typename Scalar>
BasicField<Scalar> gradient_norm(const BasicField<Scalar>& f) {
  const auto grad = gradient(f);
  return {f.spec(), (grad.x.values().square() + grad.y.values().square()).sqrt()};
}

/// Face diffusivities for a node diffusivity field; x faces first.
template <typename Scalar>
std::pair<NodeArray<Scalar>, NodeArray<Scalar>> face_coefficients(
    const BasicField<Scalar>& D, FaceAverage mode = FaceAverage::Arithmetic) {
  const GridSpec& g = D.spec();
  const auto& v = D.values();
  NodeArray<Scalar> dxf = detail::face_mean<Scalar>(v.leftCols(g.nx - 1), v.rightCols(g.nx - 1), mode);
  NodeArray<Scalar> dyf;
  if (!g.is_1d())
    dyf = detail::face_mean<Scalar>(v.topRows(g.ny - 1), v.bottomRows(g.ny - 1), mode);
  return {std::move(dxf), std::move(dyf)};
}

/// Conservative div(D grad c) with face-averaged D and zero boundary flux.
template <typename Scalar>
BasicField<Scalar> div_flux(const BasicField<Scalar>& D, const BasicField<Scalar>& c,
                            FaceAverage mode = FaceAverage::Arithmetic) {
  require_same_grid(D, c);
  if ((D.values() < Scalar(0)).any())
    throw ContractError("div_flux: diffusivity must be non-negative");
  const GridSpec& g = c.spec();
  const auto& v = c.values();
  const Scalar inv_dx = Scalar(1) / Scalar(g.dx);
  auto [dxf, dyf] = face_coefficients(D, mode);
  NodeArray<Scalar> fx = dxf * (v.rightCols(g.nx - 1) - v.leftCols(g.nx - 1)) * inv_dx;
  if (g.is_1d()) return {g, detail::divergence_of_faces<Scalar>(g, fx, nullptr)};
  NodeArray<Scalar> fy = dyf * (v.bottomRows(g.ny - 1) - v.topRows(g.ny - 1)) * inv_dx;
  return {g, detail::divergence_of_faces<Scalar>(g, fx, &fy)};
}

/// Divergence of a node-valued vector field, using face-averaged normal
/// components and zero flux through the domain boundary. Integrates to zero.
template <typename Scalar>
BasicField<Scalar> div_vector(const BasicVectorField<Scalar>& q) {
  require_same_grid(q.x, q.y);
  const GridSpec& g = q.x.spec();
  const auto& qx = q.x.values();
  NodeArray<Scalar> fx = Scalar(0.5) * (qx.leftCols(g.nx - 1) + qx.rightCols(g.nx - 1));
  if (g.is_1d()) return {g, detail::divergence_of_faces<Scalar>(g, fx, nullptr)};
  const auto& qy = q.y.values();
  NodeArray<Scalar> fy = Scalar(0.5) * (qy.topRows(g.ny - 1) + qy.bottomRows(g.ny - 1));
  return {g, detail::divergence_of_faces<Scalar>(g, fx, &fy)};
}

/// Trapezoidal quadrature weights (1, 1/2 on edges, 1/4 on corners).
template <typename Scalar = double>
NodeArray<Scalar> quadrature_weights(const GridSpec& g) {
  NodeArray<Scalar> w = NodeArray<Scalar>::Ones(g.ny, g.nx);
  w.col(0) *= Scalar(0.5);
  w.col(g.nx - 1) *= Scalar(0.5);
  if (!g.is_1d()) {
    w.row(0) *= Scalar(0.5);
    w.row(g.ny - 1) *= Scalar(0.5);
  }
  return w;
}

/// Trapezoidal integral; dx^2 cell area in 2D, dx length in 1D.
template <typename Scalar>
Scalar integrate(const BasicField<Scalar>& f) {
  f.check_shape();
  const GridSpec& g = f.spec();
  const auto& v = f.values();
  // Interior sum plus half edges and quarter corners, without allocating.
  Scalar total = v.sum();
  Scalar edges = v.col(0).sum() + v.col(g.nx - 1).sum();
  Scalar corners = 0;
  if (!g.is_1d()) {
    edges += v.row(0).sum() + v.row(g.ny - 1).sum();
    corners = v(0, 0) + v(0, g.nx - 1) + v(g.ny - 1, 0) + v(g.ny - 1, g.nx - 1);
  }
  total = total - Scalar(0.5) * edges + Scalar(0.25) * corners;
  const Scalar cell = g.is_1d() ? Scalar(g.dx) : Scalar(g.dx * g.dx);
  return total * cell;
}

/// Pointwise map of a field through a scalar function.
template <typename Scalar, typename Fn>
BasicField<Scalar> map(const BasicField<Scalar>& f, Fn&& fn) {
  BasicField<Scalar> out(f.spec());
  out.values() = f.values().unaryExpr(std::forward<Fn>(fn));
  return out;
}

}  // namespace bcm
