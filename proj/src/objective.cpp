#include "shapeopt/objective.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shapeopt/errors.hpp"
#include "shapeopt/heaviside.hpp"
#include "shapeopt/shapes.hpp"

namespace shapeopt {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

SpMat diff_matrix(const Grid& grid, Diff which) {
  const int n = grid.num_nodes();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 3);
  for_each_diff_entry(grid, which, [&](int row, int col, double value) {
    trips.emplace_back(row, col, value);
  });
  SpMat m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

struct WOperator::Impl {
  GridPtr grid;
  SpMat aw;
  Vec wd;
  mutable std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> fact;

  const Eigen::SimplicialLDLT<SpMat>& factorization() const {
    if (!fact) {
      auto f = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
      f->compute(aw);
      if (f->info() != Eigen::Success) {
        throw solver_error("WOperator: factorization of the Gram matrix failed");
      }
      fact = std::move(f);
    }
    return *fact;
  }
};

WOperator::WOperator(GridPtr grid) : impl_(std::make_shared<Impl>()) {
  if (!grid) throw std::invalid_argument("WOperator: null grid");
  impl_->grid = grid;
  const Vec wd = to_vec(grid->weights_d());
  const Vec wde = to_vec(grid->weights_d_minus_e());
  impl_->wd = wd;

  SpMat aw = SpMat(wd.asDiagonal());
  aw += SpMat(wde.asDiagonal());
  const SpMat dx = diff_matrix(*grid, Diff::X);
  const SpMat dy = diff_matrix(*grid, Diff::Y);
  const SpMat dxx = diff_matrix(*grid, Diff::XX);
  const SpMat dyy = diff_matrix(*grid, Diff::YY);
  const SpMat dxy = dy * dx;
  const auto de = wde.asDiagonal();
  aw += SpMat(dx.transpose() * de * dx);
  aw += SpMat(dy.transpose() * de * dy);
  aw += SpMat(dxx.transpose() * de * dxx);
  aw += SpMat(dyy.transpose() * de * dyy);
  aw += SpMat(2.0 * (dxy.transpose() * de * dxy));
  aw.makeCompressed();
  impl_->aw = std::move(aw);
}

const GridPtr& WOperator::grid() const { return impl_->grid; }

double WOperator::inner(const Field& u, const Field& v) const {
  if (!same_grid(u, v) || u.grid_ptr().get() != impl_->grid.get()) {
    throw std::invalid_argument("WOperator::inner: grid mismatch");
  }
  const Vec uv = to_vec(u.values());
  const Vec vv = to_vec(v.values());
  return uv.dot(impl_->aw * vv);
}

double WOperator::norm_w(const Field& u) const { return std::sqrt(inner(u, u)); }

Field WOperator::apply(const Field& u) const {
  if (u.grid_ptr().get() != impl_->grid.get()) {
    throw std::invalid_argument("WOperator::apply: grid mismatch");
  }
  const Vec out = impl_->aw * to_vec(u.values());
  Field r(impl_->grid);
  for (int k = 0; k < r.size(); ++k) r[k] = out[k];
  return r;
}

Field WOperator::riesz_l2(const Field& u) const {
  Field r = apply(u);
  for (int k = 0; k < r.size(); ++k) r[k] /= impl_->wd[k];
  return r;
}

Field WOperator::solve_w(const Field& u) const {
  if (u.grid_ptr().get() != impl_->grid.get()) {
    throw std::invalid_argument("WOperator::solve_w: grid mismatch");
  }
  Vec rhs = to_vec(u.values());
  rhs.array() *= impl_->wd.array();
  const Vec out = impl_->factorization().solve(rhs);
  Field r(impl_->grid);
  for (int k = 0; k < r.size(); ++k) r[k] = out[k];
  r.check_finite("WOperator::solve_w");
  return r;
}

ProblemData::ProblemData(Field f_, Field y_d_, double alpha_, NonsmoothMap beta_, Field anchor_)
    : f(std::move(f_)),
      y_d(std::move(y_d_)),
      alpha(alpha_),
      beta(std::move(beta_)),
      anchor(std::move(anchor_)) {
  if (!same_grid(f, y_d) || !same_grid(f, anchor)) {
    throw std::invalid_argument("ProblemData: fields live on different grids");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("ProblemData: alpha must be >= 0");
  f.check_finite("ProblemData f");
  y_d.check_finite("ProblemData y_d");
  anchor.check_finite("ProblemData anchor");
  w = std::make_shared<const WOperator>(f.grid_ptr());
}

bool in_f_discrete(const Field& g) {
  const Grid& grid = g.grid();
  for (int k = 0; k < g.size(); ++k) {
    if (grid.in_e(k) && g[k] > 0.0) return false;
  }
  return true;
}

ObjectiveBreakdown j_eps_parts(const ProblemData& data, Smoothing s, const Field& g,
                               StateSolve* state_out) {
  if (!same_grid(g, data.f)) throw std::invalid_argument("j_eps: grid mismatch");
  if (!in_f_discrete(g)) {
    throw std::invalid_argument("j_eps: control is positive somewhere on E");
  }
  StateSolve state = solve_state(data.beta, s, g, data.f, data.solver);
  const Field diff_y = state.y - data.y_d;
  ObjectiveBreakdown parts;
  parts.tracking = integrate(diff_y * diff_y, Region::E);
  Field one_minus_h(g.grid_ptr(), 1.0);
  one_minus_h -= heaviside_eps(s, g);
  parts.volume = data.alpha * integrate(one_minus_h, Region::D);
  const Field dg = g - data.anchor;
  parts.proximal = 0.5 * data.w->inner(dg, dg);
  parts.total = parts.tracking + parts.volume + parts.proximal;
  if (state_out) *state_out = std::move(state);
  return parts;
}

double j_eps(const ProblemData& data, Smoothing s, const Field& g) {
  return j_eps_parts(data, s, g).total;
}

double J_sharp(const ProblemData& data, const Field& g) {
  const FsReport report = validate_fs(g);
  if (!report.pass()) {
    throw std::invalid_argument("J_sharp: control fails the admissibility checks");
  }
  const ShapeMask mask = extract_shape(g);
  const StateSolve state = solve_masked(data.beta, mask, data.f, data.solver);
  const Field diff_y = state.y - data.y_d;
  const double tracking = integrate(diff_y * diff_y, Region::E);
  return tracking + data.alpha * area_via_heaviside(g);
}

Field gradient_from_state(const ProblemData& data, Smoothing s, const Field& g,
                          const StateSolve& state) {
  const Field p = solve_adjoint(data.beta, s, g, state.y, data.y_d, data.solver);
  const Field hp = heaviside_eps_prime(s, g);
  const Field aw_term = data.w->riesz_l2(g - data.anchor);
  Field grad(g.grid_ptr());
  for (int k = 0; k < g.size(); ++k) {
    double v = 0.0;
    if (data.solver.eps_g_source) v += s.eps * p[k];
    v -= hp[k] * state.y[k] * p[k] / s.eps;
    v -= data.alpha * hp[k];
    v += aw_term[k];
    grad[k] = v;
  }
  grad.check_finite("gradient_j_eps");
  return grad;
}

Field gradient_j_eps(const ProblemData& data, Smoothing s, const Field& g) {
  StateSolve state{Field(g.grid_ptr())};
  j_eps_parts(data, s, g, &state);
  return gradient_from_state(data, s, g, state);
}

JEpsEval eval_j_eps(const ProblemData& data, Smoothing s, const Field& g) {
  StateSolve state{Field(g.grid_ptr())};
  const ObjectiveBreakdown parts = j_eps_parts(data, s, g, &state);
  Field grad = gradient_from_state(data, s, g, state);
  return JEpsEval{parts, std::move(state), std::move(grad)};
}

}  // namespace shapeopt
