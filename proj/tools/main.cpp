#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "shapeopt/config.hpp"
#include "shapeopt/density.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/field_io.hpp"
#include "shapeopt/objective.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/pde.hpp"
#include "shapeopt/shapes.hpp"
#include "shapeopt/verify.hpp"

namespace fsys = std::filesystem;

namespace {

using namespace shapeopt;

fsys::path ensure_out(const RunConfig& cfg) {
  fsys::path out(cfg.out_dir);
  fsys::create_directories(out);
  return out;
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", s);
  return buf;
}

int cmd_solve_state(const RunConfig& cfg) {
  const Problem p = build_problem(cfg);
  const Smoothing s{cfg.opt.schedule.eps0};
  const StateSolve sol = solve_state(p.data.beta, s, p.g_init, p.data.f, p.data.solver);
  const fsys::path out = ensure_out(cfg);
  field_to_csv(sol.y, out / "y.csv");
  const double err = norm(sol.y - p.data.y_d, Norm::L2_D);
  write_report({{"eps", format_double(s.eps)},
                {"newton_iters", std::to_string(sol.newton_iters)},
                {"picard_steps", std::to_string(sol.picard_steps)},
                {"residual", format_double(sol.residual)},
                {"max_abs_y", format_double(sol.y.max_abs())},
                {"l2_error_vs_y_d", format_double(err)}},
               out / "report.txt");
  std::cout << "l2_error_vs_y_d = " << format_double(err) << "\n"
            << "wrote " << (out / "y.csv").string() << "\n";
  return 0;
}

int cmd_solve_shape(const RunConfig& cfg) {
  const Problem p = build_problem(cfg);
  const FsReport rep = validate_fs(p.g_init);
  if (!rep.pass()) {
    throw config_error("solve-shape: g_init is not an admissible shape function"
                       " (max_g_on_e=" +
                       format_double(rep.max_g_on_e) +
                       ", min_g_on_boundary=" + format_double(rep.min_g_on_boundary) +
                       ", min_transversality=" + format_double(rep.min_transversality) + ")");
  }
  const ShapeMask mask = extract_shape(p.g_init);
  const StateSolve sol = solve_masked(p.data.beta, mask, p.data.f, p.data.solver);
  const fsys::path out = ensure_out(cfg);
  field_to_csv(sol.y, out / "y.csv");
  mask_to_csv(p.grid, mask.component, out / "mask.csv");
  write_report({{"area", format_double(mask.area)},
                {"area_via_heaviside", format_double(area_via_heaviside(p.g_init))},
                {"boundary_node_count", std::to_string(mask.boundary_nodes.size())},
                {"newton_iters", std::to_string(sol.newton_iters)},
                {"residual", format_double(sol.residual)},
                {"j_sharp", format_double(J_sharp(p.data, p.g_init))}},
               out / "report.txt");
  std::cout << "shape area = " << format_double(mask.area) << "\n"
            << "wrote " << (out / "y.csv").string() << "\n";
  return 0;
}

int cmd_certify(const RunConfig& cfg) {
  const Problem p = build_problem(cfg);
  std::mt19937_64 rng(cfg.seed);
  const double target =
      cfg.opt.cert_target_rel * std::max(norm(p.g_init, Norm::L2_D), 1e-12);
  const FsProjection proj = project_to_fs(p.g_init, target, rng, cfg.opt.cert_m_start);
  const ShapeMask mask = extract_shape(proj.g);
  const StateSolve sol = solve_masked(p.data.beta, mask, p.data.f, p.data.solver);
  const fsys::path out = ensure_out(cfg);
  field_to_csv(proj.g, out / "g_certified.csv");
  mask_to_csv(p.grid, mask.component, out / "mask.csv");
  field_to_csv(sol.y, out / "y.csv");
  write_report({{"error_l2", format_double(proj.error_l2)},
                {"target_error", format_double(target)},
                {"final_m", std::to_string(proj.final_m)},
                {"delta", format_double(proj.delta)},
                {"area", format_double(mask.area)},
                {"min_transversality", format_double(proj.report.min_transversality)}},
               out / "report.txt");
  std::cout << "certified; error_l2 = " << format_double(proj.error_l2) << "\n";
  return 0;
}

int cmd_optimize(const RunConfig& cfg) {
  const Problem p = build_problem(cfg);
  std::mt19937_64 rng(cfg.seed);
  const ContinuationResult res = continuation(p.data, p.g_init, cfg.opt, rng);
  const fsys::path out = ensure_out(cfg);

  {
    std::ofstream tr(out / "trace.csv");
    if (!tr) throw config_error("cannot open for writing: " + (out / "trace.csv").string());
    tr << "iter,eps,j,tracking,volume,proximal,step,grad_norm,dist_anchor_l2,"
          "shape_gain,shape_loss\n";
    for (const IterRecord& it : res.trace) {
      tr << it.iter << ',' << format_double(it.eps) << ',' << format_double(it.j) << ','
         << format_double(it.tracking) << ',' << format_double(it.volume) << ','
         << format_double(it.proximal) << ',' << format_double(it.step) << ','
         << format_double(it.grad_norm) << ',' << format_double(it.dist_anchor_l2) << ','
         << format_double(it.shape_gain) << ',' << format_double(it.shape_loss) << '\n';
    }
    if (!tr) throw config_error("write failed: " + (out / "trace.csv").string());
  }
  {
    std::ofstream ph(out / "phases.csv");
    if (!ph) throw config_error("cannot open for writing: " + (out / "phases.csv").string());
    ph << "eps,iters,evals,stop,j_end,grad_norm_end,dist_w_anchor,interior_gap_l2,"
          "exterior_mass,shape_gain_vs_anchor,shape_loss_vs_anchor\n";
    for (const PhaseRecord& q : res.phases) {
      ph << format_double(q.eps) << ',' << q.iters << ',' << q.evals << ','
         << to_string(q.stop) << ',' << format_double(q.j_end) << ','
         << format_double(q.grad_norm_end) << ',' << format_double(q.dist_w_anchor) << ','
         << format_double(q.interior_gap_l2) << ',' << format_double(q.exterior_mass)
         << ',' << format_double(q.shape_gain_vs_anchor) << ','
         << format_double(q.shape_loss_vs_anchor) << '\n';
    }
    if (!ph) throw config_error("write failed: " + (out / "phases.csv").string());
  }
  field_to_csv(res.g, out / "g_final.csv");
  if (res.projection) field_to_csv(res.projection->g, out / "g_certified.csv");
  if (res.shape) mask_to_csv(p.grid, res.shape->component, out / "mask.csv");
  if (res.masked_state) field_to_csv(res.masked_state->y, out / "y.csv");

  std::vector<std::pair<std::string, std::string>> rep = {
      {"phases", std::to_string(res.phases.size())},
      {"iterations", std::to_string(res.trace.size())},
      {"aborted", res.aborted ? "1" : "0"},
      {"certified", res.certified ? "1" : "0"}};
  if (res.aborted) rep.emplace_back("abort_reason", res.abort_reason);
  if (!res.phases.empty())
    rep.emplace_back("j_end", format_double(res.phases.back().j_end));
  if (res.certified) {
    rep.emplace_back("j_sharp", format_double(res.j_sharp));
    rep.emplace_back("area", format_double(res.shape->area));
  }
  if (res.projection && validate_fs(p.data.anchor).pass()) {
    const auto [gain, loss] = shape_distance(res.projection->g, p.data.anchor);
    rep.emplace_back("sym_diff_vs_anchor", format_double(gain + loss));
  }
  write_report(rep, out / "summary.txt");

  if (res.aborted) {
    std::cerr << "aborted: " << res.abort_reason << "\n";
    return 3;
  }
  std::cout << "phases = " << res.phases.size()
            << ", j_end = " << format_double(res.phases.back().j_end)
            << ", certified = " << (res.certified ? "yes" : "no") << "\n"
            << "wrote " << (out / "summary.txt").string() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  VerifyOptions opts;
  opts.seed = cfg.seed;
  opts.break_heps = cfg.verify_break_heps;
  opts.recovery_grid_n = cfg.grid_nx;
  const std::vector<CheckResult> results = run_all_checks(opts);
  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CheckResult& c = results[i];
    if (!c.pass) ++failed;
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << c.name << " ("
              << fmt_seconds(c.seconds) << " s) " << c.detail << "\n";
  }
  if (failed == 0) {
    std::cout << "all " << results.size() << " checks passed\n";
    return 0;
  }
  std::cout << failed << " of " << results.size() << " checks failed\n";
  return 1;
}

int cmd_export_vtk(const RunConfig& cfg, const std::string& positional) {
  const std::string in = positional.empty() ? cfg.in_csv : positional;
  if (in.empty())
    throw config_error("export-vtk: no input CSV (positional argument or in_csv key)");
  const GridPtr grid = cfg.make_grid();
  const Field f = field_from_csv(grid, in);
  const fsys::path out = ensure_out(cfg);
  const std::string stem = fsys::path(in).stem().string();
  const fsys::path vtk = out / (stem + ".vtk");
  field_to_vtk(f, stem, vtk);
  std::cout << "wrote " << vtk.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D shape and topology optimization by fixed-domain penalization"};
  app.require_subcommand(1);
  std::string config_path, out_dir, in_path;
  std::uint64_t seed = 0;
  int grid_n = 0;
  app.add_option("--config", config_path, "configuration file (key=value lines)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--grid", grid_n, "nodes per side (overrides the config)");
  CLI::App* c_state =
      app.add_subcommand("solve-state", "penalized state solve on the holdall domain");
  CLI::App* c_shape =
      app.add_subcommand("solve-shape", "reference solve on the zero-sublevel shape");
  CLI::App* c_cert =
      app.add_subcommand("certify", "project the control to an admissible shape function");
  CLI::App* c_opt =
      app.add_subcommand("optimize", "smoothing continuation with certification");
  CLI::App* c_ver =
      app.add_subcommand("verify", "run the property suites and print a pass/fail table");
  CLI::App* c_vtk = app.add_subcommand("export-vtk", "convert a field CSV to a VTK file");
  c_vtk->add_option("input", in_path, "field CSV (defaults to the in_csv config key)");
  // Accept the shared flags in either position relative to the subcommand.
  for (CLI::App* sub : {c_state, c_shape, c_cert, c_opt, c_ver, c_vtk}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    KeyValues kv;
    if (!config_path.empty()) kv = KeyValues::parse_file(config_path);
    if (app.count("--out") > 0) kv.set("out", out_dir);
    if (app.count("--seed") > 0) kv.set("seed", std::to_string(seed));
    if (app.count("--grid") > 0) kv.set("grid_n", std::to_string(grid_n));
    const RunConfig cfg = RunConfig::from_kv(kv);
    if (c_state->parsed()) return cmd_solve_state(cfg);
    if (c_shape->parsed()) return cmd_solve_shape(cfg);
    if (c_cert->parsed()) return cmd_certify(cfg);
    if (c_opt->parsed()) return cmd_optimize(cfg);
    if (c_ver->parsed()) return cmd_verify(cfg);
    if (c_vtk->parsed()) return cmd_export_vtk(cfg, in_path);
    return 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const solver_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
