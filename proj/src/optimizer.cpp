#include "shapeopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

void clamp_on_e(Field& g) {
  const Grid& grid = g.grid();
  for (int k = 0; k < g.size(); ++k) {
    if (grid.in_e(k) && g[k] > 0.0) g[k] = 0.0;
  }
}

bool in_ball(const Field& g, const Ball& ball, double tol) {
  return norm(g - ball.center, Norm::L2_D) <= ball.radius * (1.0 + tol) + tol;
}

}  // namespace

Field project_f(Field g, const std::optional<Ball>& ball) {
  clamp_on_e(g);
  if (!ball) return g;
  if (!same_grid(g, ball->center)) {
    throw std::invalid_argument("project_f: ball center on a different grid");
  }
  if (!(ball->radius > 0.0)) {
    throw std::invalid_argument("project_f: ball radius must be > 0");
  }
  for (int round = 0; round < 20; ++round) {
    const Field d = g - ball->center;
    const double dist = norm(d, Norm::L2_D);
    if (dist <= ball->radius * (1.0 + 1e-13)) break;
    g = ball->center + (ball->radius / dist) * d;
    clamp_on_e(g);
  }
  clamp_on_e(g);
  return g;
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("optimizer: max_iters must be >= 1");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) {
    throw std::invalid_argument("optimizer: armijo_c1 must lie in (0, 1)");
  }
  if (!(shrink > 0.0 && shrink < 1.0)) {
    throw std::invalid_argument("optimizer: shrink must lie in (0, 1)");
  }
  if (!(step0 > 0.0)) throw std::invalid_argument("optimizer: step0 must be > 0");
  if (!(step_floor > 0.0 && step_floor <= step0)) {
    throw std::invalid_argument("optimizer: step_floor must lie in (0, step0]");
  }
  if (!(grad_tol > 0.0)) throw std::invalid_argument("optimizer: grad_tol must be > 0");
  if (trust_radius && !(*trust_radius > 0.0)) {
    throw std::invalid_argument("optimizer: trust_radius must be > 0 when set");
  }
  if (!(schedule.eps0 > 0.0) || !(schedule.eps_min > 0.0) ||
      schedule.eps_min > schedule.eps0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("optimizer: schedule needs 0 < eps_min <= eps0");
  }
  if (!(schedule.ratio > 0.0 && schedule.ratio < 1.0)) {
    throw std::invalid_argument("optimizer: schedule ratio must lie in (0, 1)");
  }
  if (interior_layers < 0) {
    throw std::invalid_argument("optimizer: interior_layers must be >= 0");
  }
  if (!(cert_target_rel > 0.0)) {
    throw std::invalid_argument("optimizer: cert_target_rel must be > 0");
  }
  if (cert_m_start < 1) throw std::invalid_argument("optimizer: cert_m_start must be >= 1");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::GradTol: return "grad_tol";
    case StopReason::StepFloor: return "step_floor";
    case StopReason::MaxIters: return "max_iters";
  }
  return "unknown";
}

FixedEpsResult minimize_fixed_eps(const ProblemData& data, Smoothing s, Field g0,
                                  const OptimizerConfig& cfg) {
  cfg.validate();
  if (!same_grid(g0, data.f)) {
    throw std::invalid_argument("minimize_fixed_eps: control on a different grid");
  }
  std::optional<Ball> ball;
  if (cfg.trust_radius) ball = Ball{data.anchor, *cfg.trust_radius / 2.0};
  if (!in_f_discrete(g0)) {
    throw std::invalid_argument("minimize_fixed_eps: g0 is positive somewhere on E");
  }
  if (ball && !in_ball(g0, *ball, 1e-10)) {
    throw std::invalid_argument("minimize_fixed_eps: g0 lies outside the trust ball");
  }

  Field g = std::move(g0);
  JEpsEval cur = eval_j_eps(data, s, g);
  int evals = 1;
  std::vector<IterRecord> trace;
  trace.reserve(static_cast<std::size_t>(cfg.max_iters));

  StopReason stop = StopReason::MaxIters;
  double t = cfg.step0;
  int iters = 0;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const double gn = norm(cur.grad, Norm::L2_D);
    if (gn <= cfg.grad_tol) {
      stop = StopReason::GradTol;
      break;
    }
    const Field dir = cfg.precondition ? data.w->solve_w(cur.grad) : cur.grad;
    const double slope = inner_l2_d(cur.grad, dir);
    if (!(slope > 0.0)) {
      stop = StopReason::GradTol;
      break;
    }

    bool accepted = false;
    Field trial(g.grid_ptr());
    ObjectiveBreakdown trial_parts;
    StateSolve trial_state{Field(g.grid_ptr())};
    while (t >= cfg.step_floor) {
      trial = project_f(g - t * dir, ball);
      trial_parts = j_eps_parts(data, s, trial, &trial_state);
      ++evals;
      if (trial_parts.total <= cur.parts.total - cfg.armijo_c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= cfg.shrink;
    }
    if (!accepted) {
      stop = StopReason::StepFloor;
      break;
    }

    const auto [gain, loss] = shape_distance(trial, g);
    IterRecord rec;
    rec.iter = iter;
    rec.eps = s.eps;
    rec.j = trial_parts.total;
    rec.tracking = trial_parts.tracking;
    rec.volume = trial_parts.volume;
    rec.proximal = trial_parts.proximal;
    rec.step = t;
    rec.grad_norm = gn;
    rec.dist_anchor_l2 = norm(trial - data.anchor, Norm::L2_D);
    rec.shape_gain = gain;
    rec.shape_loss = loss;
    trace.push_back(rec);

    g = std::move(trial);
    cur.parts = trial_parts;
    cur.grad = gradient_from_state(data, s, g, trial_state);
    cur.state = std::move(trial_state);
    iters = iter;
    t = std::min(t / cfg.shrink, 1e6);
  }

  const double gn_final = norm(cur.grad, Norm::L2_D);
  return FixedEpsResult{std::move(g),  cur.parts, std::move(cur.state),
                        std::move(cur.grad), gn_final, stop,
                        iters,         evals,     std::move(trace)};
}

ContinuationResult continuation(const ProblemData& data, Field g_init,
                                const OptimizerConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();

  // Reference data on the anchor's shape for the per-phase diagnostics.
  bool have_anchor_shape = false;
  std::optional<ShapeMask> anchor_mask;
  std::optional<Field> anchor_y;
  std::vector<std::uint8_t> interior_mask, exterior_mask;
  if (validate_fs(data.anchor).pass()) {
    anchor_mask = extract_shape(data.anchor);
    anchor_y = solve_masked(data.beta, *anchor_mask, data.f, data.solver).y;
    interior_mask = interior_nodes(*anchor_mask, cfg.interior_layers);
    exterior_mask = exterior_nodes(*anchor_mask);
    have_anchor_shape = true;
  }

  ContinuationResult out{std::move(g_init), {}, {}, false, {}, false, {}, {}, {}, 0.0};
  double eps = cfg.schedule.eps0;
  while (eps >= cfg.schedule.eps_min * (1.0 - 1e-12)) {
    std::optional<FixedEpsResult> phase_run;
    try {
      phase_run = minimize_fixed_eps(data, Smoothing{eps}, out.g, cfg);
    } catch (const solver_error& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      return out;
    }
    FixedEpsResult& phase = *phase_run;

    PhaseRecord rec;
    rec.eps = eps;
    rec.iters = phase.iters;
    rec.evals = phase.evals;
    rec.stop = phase.stop;
    rec.j_end = phase.parts.total;
    rec.parts_end = phase.parts;
    rec.grad_norm_end = phase.grad_norm;
    rec.dist_w_anchor = data.w->norm_w(phase.g - data.anchor);
    if (have_anchor_shape) {
      rec.anchor_shape_diag = true;
      const Field dy = phase.state.y - *anchor_y;
      rec.interior_gap_l2 = std::sqrt(integrate_mask(dy * dy, interior_mask));
      rec.exterior_mass = integrate_mask(phase.state.y * phase.state.y, exterior_mask);
      const auto [gain, loss] = shape_distance(phase.g, data.anchor);
      rec.shape_gain_vs_anchor = gain;
      rec.shape_loss_vs_anchor = loss;
    }
    out.phases.push_back(rec);
    for (const IterRecord& r : phase.trace) out.trace.push_back(r);
    out.g = std::move(phase.g);

    eps *= cfg.schedule.ratio;
  }

  // Certification: project the final control to an admissible shape function
  // and run the reference solve on the extracted shape.
  try {
    const double target = cfg.cert_target_rel * std::max(norm(out.g, Norm::L2_D), 1e-12);
    out.projection = project_to_fs(out.g, target, rng, cfg.cert_m_start);
    out.shape = extract_shape(out.projection->g);
    out.masked_state = solve_masked(data.beta, *out.shape, data.f, data.solver);
    const Field diff_y = out.masked_state->y - data.y_d;
    out.j_sharp = integrate(diff_y * diff_y, Region::E) +
                  data.alpha * area_via_heaviside(out.projection->g);
    out.certified = true;
  } catch (const solver_error& e) {
    out.aborted = true;
    out.abort_reason = e.what();
  }
  return out;
}

}  // namespace shapeopt
