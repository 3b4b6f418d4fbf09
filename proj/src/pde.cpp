#include "shapeopt/pde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Unknown numbering over a node subset; excluded nodes hold value zero.
struct DirichletSystem {
  const Grid* grid = nullptr;
  std::vector<int> unknown_of_node;  // -1 where eliminated
  std::vector<int> node_of_unknown;
  SpMat A;  // negative five-point Laplacian over the unknowns

  int size() const { return static_cast<int>(node_of_unknown.size()); }
};

DirichletSystem build_system(const Grid& g, const std::vector<std::uint8_t>& is_unknown) {
  DirichletSystem sys;
  sys.grid = &g;
  sys.unknown_of_node.assign(g.num_nodes(), -1);
  for (int k = 0; k < g.num_nodes(); ++k)
    if (is_unknown[k]) {
      sys.unknown_of_node[k] = static_cast<int>(sys.node_of_unknown.size());
      sys.node_of_unknown.push_back(k);
    }
  const int m = sys.size();
  const double ih2 = 1.0 / (g.h() * g.h());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(m) * 5);
  for (int u = 0; u < m; ++u) {
    const int k = sys.node_of_unknown[u];
    const int i = g.node_i(k), j = g.node_j(k);
    trip.emplace_back(u, u, 4.0 * ih2);
    const int nb[4] = {g.node(i - 1, j), g.node(i + 1, j), g.node(i, j - 1),
                       g.node(i, j + 1)};
    for (int kn : nb) {
      const int un = sys.unknown_of_node[kn];
      if (un >= 0) trip.emplace_back(u, un, -ih2);
    }
  }
  sys.A.resize(m, m);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  return sys;
}

// Interior nodes of D: the standard eliminated-boundary Poisson layout.
DirichletSystem interior_system(const Grid& g) {
  std::vector<std::uint8_t> unknown(g.num_nodes(), 0);
  for (int k = 0; k < g.num_nodes(); ++k)
    if (!g.on_boundary(k)) unknown[k] = 1;
  return build_system(g, unknown);
}

double l2_residual(const Grid& g, const Vec& r) { return g.h() * r.norm(); }

Vec apply_f(const DirichletSystem& sys, const NonsmoothMap& beta, const Vec& c,
            const Vec& rhs, const Vec& y) {
  Vec r = sys.A * y - rhs;
  for (int u = 0; u < sys.size(); ++u) r[u] += beta(y[u]) + c[u] * y[u];
  return r;
}

struct NonlinearResult {
  Vec y;
  int newton_iters = 0;
  int picard_steps = 0;
  double residual = 0.0;
};

// Damped semismooth Newton on F(y) = A y + beta(y) + c .* y - rhs with a
// shifted Picard fallback when the line search stalls.
NonlinearResult solve_nonlinear(const DirichletSystem& sys, const NonsmoothMap& beta,
                                const Vec& c, const Vec& rhs, const SolverConfig& cfg) {
  const int m = sys.size();
  NonlinearResult res;
  res.y = Vec::Zero(m);
  const double rhs_norm = l2_residual(*sys.grid, rhs);
  const double tol = cfg.tol_rel * (1.0 + rhs_norm);

  Eigen::SimplicialLDLT<SpMat> ldlt;
  SpMat J = sys.A;  // reused; pattern includes the full diagonal
  for (int u = 0; u < m; ++u) J.coeffRef(u, u) += 0.0;
  J.makeCompressed();
  ldlt.analyzePattern(J);

  std::vector<double> history;
  Vec r = apply_f(sys, beta, c, rhs, res.y);
  double rnorm = l2_residual(*sys.grid, r);

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (!std::isfinite(rnorm))
      throw solver_error("state solve: residual became non-finite", history);
    history.push_back(rnorm);
    if (rnorm <= tol) {
      res.residual = rnorm;
      return res;
    }

    J = sys.A;
    for (int u = 0; u < m; ++u)
      J.coeffRef(u, u) += beta.subderivative(res.y[u]) + c[u];
    ldlt.factorize(J);
    if (ldlt.info() != Eigen::Success)
      throw solver_error("state solve: Jacobian factorization failed", history);
    const Vec step = ldlt.solve(-r);

    // Backtracking on the residual norm.
    double t = 1.0;
    bool accepted = false;
    Vec y_trial, r_trial;
    double rnorm_trial = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      y_trial = res.y + t * step;
      r_trial = apply_f(sys, beta, c, rhs, y_trial);
      rnorm_trial = l2_residual(*sys.grid, r_trial);
      if (std::isfinite(rnorm_trial) && rnorm_trial <= (1.0 - 1e-4 * t) * rnorm) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (accepted) {
      res.y = y_trial;
      r = r_trial;
      rnorm = rnorm_trial;
      ++res.newton_iters;
      continue;
    }

    // Picard fallback: monotone fixed point with a Lipschitz shift.
    const double bound = res.y.lpNorm<Eigen::Infinity>() + step.lpNorm<Eigen::Infinity>() + 1.0;
    const double lambda = beta.lipschitz_constant(bound) + 1.0;
    J = sys.A;
    for (int u = 0; u < m; ++u) J.coeffRef(u, u) += c[u] + lambda;
    ldlt.factorize(J);
    if (ldlt.info() != Eigen::Success)
      throw solver_error("state solve: Picard factorization failed", history);
    Vec b = rhs + lambda * res.y;
    for (int u = 0; u < m; ++u) b[u] -= beta(res.y[u]);
    res.y = ldlt.solve(b);
    r = apply_f(sys, beta, c, rhs, res.y);
    rnorm = l2_residual(*sys.grid, r);
    ++res.picard_steps;
  }
  history.push_back(rnorm);
  if (rnorm <= tol) {
    res.residual = rnorm;
    return res;
  }
  throw solver_error("state solve: no convergence within iteration budget", history);
}

Field scatter(const GridPtr& grid, const DirichletSystem& sys, const Vec& y) {
  Field out(grid, 0.0);
  for (int u = 0; u < sys.size(); ++u) out[sys.node_of_unknown[u]] = y[u];
  out.check_finite("pde solution");
  return out;
}

}  // namespace

StateSolve solve_state(const NonsmoothMap& beta, Smoothing s, const Field& g,
                       const Field& f, const SolverConfig& cfg) {
  if (!same_grid(g, f)) throw std::invalid_argument("solve_state: grid mismatch");
  const Grid& grid = g.grid();
  const DirichletSystem sys = interior_system(grid);
  const int m = sys.size();
  Vec c(m), rhs(m);
  for (int u = 0; u < m; ++u) {
    const int k = sys.node_of_unknown[u];
    c[u] = heaviside_eps(s, g[k]) / s.eps;
    rhs[u] = f[k] + (cfg.eps_g_source ? s.eps * g[k] : 0.0);
  }
  NonlinearResult r = solve_nonlinear(sys, beta, c, rhs, cfg);
  StateSolve out{scatter(g.grid_ptr(), sys, r.y), r.newton_iters, r.picard_steps,
                 r.residual, l2_residual(grid, rhs)};
  return out;
}

StateSolve solve_masked(const NonsmoothMap& beta, const ShapeMask& mask,
                        const Field& f, const SolverConfig& cfg) {
  const Grid& grid = *mask.grid;
  if (f.grid_ptr().get() != mask.grid.get())
    throw std::invalid_argument("solve_masked: grid mismatch");
  for (int k = 0; k < grid.num_nodes(); ++k)
    if (grid.in_e(k) && !mask.component[k])
      throw std::invalid_argument("solve_masked: mask does not contain E");

  std::vector<std::uint8_t> unknown = mask.component;
  for (int k : mask.boundary_nodes) unknown[k] = 0;
  const DirichletSystem sys = build_system(grid, unknown);
  if (sys.size() == 0) throw std::invalid_argument("solve_masked: empty interior");
  const int m = sys.size();
  Vec c = Vec::Zero(m), rhs(m);
  for (int u = 0; u < m; ++u) rhs[u] = f[sys.node_of_unknown[u]];
  NonlinearResult r = solve_nonlinear(sys, beta, c, rhs, cfg);
  return StateSolve{scatter(mask.grid, sys, r.y), r.newton_iters, r.picard_steps,
                    r.residual, l2_residual(grid, rhs)};
}

Field solve_adjoint(const NonsmoothMap& beta, Smoothing s, const Field& g,
                    const Field& y, const Field& y_d, const SolverConfig& cfg) {
  if (!same_grid(g, y) || !same_grid(g, y_d))
    throw std::invalid_argument("solve_adjoint: grid mismatch");
  const Grid& grid = g.grid();
  const DirichletSystem sys = interior_system(grid);
  const int m = sys.size();
  const double h2 = grid.h() * grid.h();
  const std::vector<double>& we = grid.weights_e();

  SpMat J = sys.A;
  for (int u = 0; u < m; ++u) {
    const int k = sys.node_of_unknown[u];
    J.coeffRef(u, u) += beta.subderivative(y[k]) + heaviside_eps(s, g[k]) / s.eps;
  }
  Vec rhs(m);
  for (int u = 0; u < m; ++u) {
    const int k = sys.node_of_unknown[u];
    rhs[u] = 2.0 * (y[k] - y_d[k]) * (we[k] / h2);
  }
  Eigen::SimplicialLDLT<SpMat> ldlt(J);
  if (ldlt.info() != Eigen::Success)
    throw solver_error("adjoint solve: factorization failed");
  const Vec p = ldlt.solve(rhs);
  const double res = l2_residual(grid, Vec(J * p - rhs));
  if (res > cfg.tol_rel * (1.0 + l2_residual(grid, rhs)))
    throw solver_error("adjoint solve: residual tolerance not met");
  return scatter(g.grid_ptr(), sys, p);
}

AprioriRecord apriori_record(const StateSolve& solve, Smoothing s, const Field& g) {
  return AprioriRecord{norm(g, Norm::L2_D), norm(solve.y, Norm::H1_D), s.eps};
}

AprioriReport apriori_bound_check(std::span<const AprioriRecord> records) {
  AprioriReport rep;
  rep.count = static_cast<int>(records.size());
  if (records.empty()) return rep;
  if (records.size() == 1) {
    rep.c1 = records[0].y_h1;
    return rep;
  }
  // Least squares fit y = c1 + c2 x.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : records) {
    sx += r.g_l2;
    sy += r.y_h1;
    sxx += r.g_l2 * r.g_l2;
    sxy += r.g_l2 * r.y_h1;
  }
  const double n = double(records.size());
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-14 * (1.0 + n * sxx)) {
    rep.c1 = sy / n;
    rep.c2 = 0.0;
  } else {
    rep.c2 = (n * sxy - sx * sy) / det;
    rep.c1 = (sy - rep.c2 * sx) / n;
  }
  double ymax = 0.0, dev = 0.0;
  for (const auto& r : records) {
    ymax = std::max(ymax, std::abs(r.y_h1));
    dev = std::max(dev, std::abs(r.y_h1 - (rep.c1 + rep.c2 * r.g_l2)));
  }
  rep.max_rel_residual = dev / (1e-12 + ymax);
  return rep;
}

}  // namespace shapeopt
