#include "bcm/chemo.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <vector>

#include "bcm/errors.hpp"

namespace bcm {

void ChemoParams::validate() const {
  if (!(D0 > 0.0)) throw ConfigError("chemo.D0 must be positive");
  if (!(k >= 0.0)) throw ConfigError("chemo.k must be non-negative");
  if (!(sigma >= 0.0)) throw ConfigError("chemo.sigma must be non-negative");
  if (!(s > 0.0)) throw ConfigError("chemo.s must be positive");
  if (!(substep_safety > 0.0 && substep_safety <= 1.0))
    throw ConfigError("chemo.substep_safety must lie in (0, 1]");
  if (!(c0 >= 0.0)) throw ConfigError("chemo.c0 must be non-negative");
  if (!std::isfinite(phi_star)) throw ConfigError("chemo.phi_star must be finite");
}

void ChemoState::validate() const {
  require_same_grid(c, D);
  require_same_grid(c, source);
  if ((D.values() < 0.0).any()) throw ContractError("diffusivity must be non-negative");
  if (fixed_right && !c.spec().is_1d()) throw StructuralError("held right node is 1D only");
}

ScalarField diffusivity_single(const ScalarField& phi, const ChemoParams& cp) {
  ScalarField D(phi.spec());
  D.values() = cp.D0 / (1.0 + ((phi.values() - cp.phi_star) / cp.s).exp());
  return D;
}

ScalarField diffusivity_multi(const PhaseSet& ps, const ChemoParams& cp) {
  const GridSpec& g = ps.spec();
  NodeArray<double> denom = NodeArray<double>::Ones(g.ny, g.nx);
  for (const auto& p : ps.phases) denom += ((p.phi.values() - cp.phi_star) / cp.s).exp();
  if (cp.include_epithelium) denom += ((ps.epithelium.values() - cp.phi_star) / cp.s).exp();
  const NodeArray<double> inner = denom.inverse();
  return {g, cp.D0 * inner.square() * (3.0 - 2.0 * inner)};
}

ScalarField secretion_field(const ScalarField& phi_oct, double sigma) {
  ScalarField s = gradient_norm(phi_oct);
  s.values() *= sigma;
  return s;
}

ChemoState make_chamber_chemo(const PhaseSet& ps, const ChemoParams& cp, double time) {
  ChemoState st;
  st.c = ScalarField(ps.spec(), cp.c0);
  st.time = time;
  update_from_phases(st, ps, cp);
  return st;
}

void update_from_phases(ChemoState& st, const PhaseSet& ps, const ChemoParams& cp) {
  const int oct = ps.index_of(CellType::Oocyte);
  if (oct < 0) throw StructuralError("chamber chemo needs an oocyte phase");
  st.D = diffusivity_multi(ps, cp);
  st.source = secretion_field(ps[oct].phi, cp.sigma);
}

ScalarField chemo_rhs(const ChemoState& st, const ChemoParams& cp) {
  st.validate();
  ScalarField r = div_flux(st.D, st.c, cp.face_average);
  r.values() += st.source.values() - cp.k * st.c.values();
  if (st.fixed_right) r.values()(0, r.nx() - 1) = 0.0;
  return r;
}

int substep_count(const ChemoState& st, const ChemoParams& cp, double dt_outer) {
  const double dmax = st.D.max();
  if (!(dmax > 0.0)) return 1;
  const double dx = st.c.spec().dx;
  const double dt_max = cp.substep_safety * dx * dx / (4.0 * dmax);
  // Guard against 100.00000000000001 rounding up to 101.
  const double ratio = dt_outer / dt_max;
  return std::max(1, static_cast<int>(std::ceil(ratio * (1.0 - 1e-12))));
}

namespace {

/// Per-node neighbour coefficients of div(D grad .), boundary half volumes
/// folded in; each is zero where the neighbour lies outside the domain.
struct Stencil {
  NodeArray<double> east, west, north, south;
};

Stencil build_stencil(const ScalarField& D, FaceAverage mode) {
  const GridSpec& g = D.spec();
  const double inv = 1.0 / (g.dx * g.dx);
  auto [fx, fy] = face_coefficients(D, mode);
  Stencil st;
  st.east = NodeArray<double>::Zero(g.ny, g.nx);
  st.west = NodeArray<double>::Zero(g.ny, g.nx);
  st.north = NodeArray<double>::Zero(g.ny, g.nx);
  st.south = NodeArray<double>::Zero(g.ny, g.nx);
  st.east.leftCols(g.nx - 1) = fx * inv;
  st.west.rightCols(g.nx - 1) = fx * inv;
  st.east.col(0) *= 2.0;
  st.west.col(g.nx - 1) *= 2.0;
  if (!g.is_1d()) {
    st.north.topRows(g.ny - 1) = fy * inv;
    st.south.bottomRows(g.ny - 1) = fy * inv;
    st.north.row(0) *= 2.0;
    st.south.row(g.ny - 1) *= 2.0;
  }
  return st;
}

}  // namespace

ChemoState step_chemo(const ChemoState& st, const ChemoParams& cp, double dt_outer) {
  if (!(dt_outer > 0.0)) throw ConfigError("step_chemo: dt_outer must be positive");
  st.validate();
  const GridSpec& g = st.c.spec();
  const int n_sub = substep_count(st, cp, dt_outer);
  const double dt = dt_outer / n_sub;
  const Stencil sc = build_stencil(st.D, cp.face_average);
  const int ny = g.ny, nx = g.nx;

  // Ghost-padded buffers; ghosts are multiplied by zero coefficients.
  NodeArray<double> cur = NodeArray<double>::Zero(ny + 2, nx + 2);
  NodeArray<double> nxt = NodeArray<double>::Zero(ny + 2, nx + 2);
  cur.block(1, 1, ny, nx) = st.c.values();
  const NodeArray<double>& src = st.source.values();
  const double decay = cp.k;

  for (int s = 0; s < n_sub; ++s) {
    const auto c = cur.block(1, 1, ny, nx);
    if (g.is_1d()) {
      nxt.block(1, 1, ny, nx) =
          c + dt * (sc.east * (cur.block(1, 2, ny, nx) - c) + sc.west * (cur.block(1, 0, ny, nx) - c) -
                    decay * c + src);
    } else {
      nxt.block(1, 1, ny, nx) =
          c + dt * (sc.east * (cur.block(1, 2, ny, nx) - c) + sc.west * (cur.block(1, 0, ny, nx) - c) +
                    sc.north * (cur.block(2, 1, ny, nx) - c) +
                    sc.south * (cur.block(0, 1, ny, nx) - c) - decay * c + src);
    }
    if (st.fixed_right) nxt(1, nx) = *st.fixed_right;
    cur.swap(nxt);
  }

  ChemoState out = st;
  out.c.values() = cur.block(1, 1, ny, nx);
  out.time = st.time + dt_outer;
  return out;
}

ScalarField steady_solve(const ChemoState& st, const ChemoParams& cp) {
  st.validate();
  if (!(cp.k > 0.0) && !st.fixed_right)
    throw ContractError("steady_solve: needs k > 0 or a held boundary node");
  const GridSpec& g = st.c.spec();
  const int nx = g.nx, ny = g.ny;
  const auto idx = [nx](int i, int j) { return j * nx + i; };
  const NodeArray<double> w = quadrature_weights(g);
  auto [fx, fy] = face_coefficients(st.D, cp.face_average);
  const double inv = 1.0 / (g.dx * g.dx);
  const int held = st.fixed_right ? idx(nx - 1, 0) : -1;
  const double held_value = st.fixed_right.value_or(0.0);

  // Weighted (symmetric) form: sum_f a_f (c_p - c_q) + w_p k c_p = w_p s_p.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(g.size());
  Eigen::VectorXd diag(g.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      rhs[idx(i, j)] = w(j, i) * st.source.values()(j, i);
      diag[idx(i, j)] = w(j, i) * cp.k;
    }
  const auto couple = [&](int p, int q, double a) {
    if (p == held && q == held) return;
    if (p == held) {
      diag[q] += a;
      rhs[q] += a * held_value;
    } else if (q == held) {
      diag[p] += a;
      rhs[p] += a * held_value;
    } else {
      diag[p] += a;
      diag[q] += a;
      trip.emplace_back(p, q, -a);
      trip.emplace_back(q, p, -a);
    }
  };
  for (int j = 0; j < ny; ++j) {
    const double wy = g.is_1d() ? 1.0 : (j == 0 || j == ny - 1 ? 0.5 : 1.0);
    for (int i = 0; i + 1 < nx; ++i) couple(idx(i, j), idx(i + 1, j), fx(j, i) * inv * wy);
  }
  if (!g.is_1d())
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
        couple(idx(i, j), idx(i, j + 1), fy(j, i) * inv * wx);
      }
  if (held >= 0) {
    diag[held] = 1.0;
    rhs[held] = held_value;
  }
  for (Eigen::Index p = 0; p < g.size(); ++p) trip.emplace_back(p, p, diag[p]);

  Eigen::SparseMatrix<double> A(g.size(), g.size());
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw NumericalError("steady_solve: factorisation failed");
  const Eigen::VectorXd sol = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !sol.allFinite())
    throw NumericalError("steady_solve: solve failed");

  ScalarField c(g);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) c(i, j) = sol[idx(i, j)];
  return c;
}

SteadyResult relax_to_steady(const ChemoState& st, const ChemoParams& cp,
                             const SteadyOptions& opt) {
  if (!(opt.tol > 0.0)) throw ConfigError("relax_to_steady: tol must be positive");
  ChemoState cur = st;
  if (opt.warm_start) {
    cur.c = steady_solve(st, cp);
    // The direct solve can undershoot zero by round-off far from sources.
    cur.c.values() = cur.c.values().max(0.0);
  }
  double residual = 0.0;
  for (int n = 1; n <= opt.max_steps; ++n) {
    ChemoState next = step_chemo(cur, cp, opt.dt_outer);
    residual = (next.c.values() - cur.c.values()).abs().maxCoeff() / opt.dt_outer;
    cur = std::move(next);
    if (residual < opt.tol) return {std::move(cur), n, residual};
  }
  throw ConvergenceError("chemoattractant did not reach steady state within max_steps", residual);
}

}  // namespace bcm
