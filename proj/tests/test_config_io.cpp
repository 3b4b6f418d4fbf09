#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "shapeopt/config.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/field_io.hpp"
#include "shapeopt/shapes.hpp"

using namespace shapeopt;
namespace fsys = std::filesystem;

namespace {

struct TempDir {
  fsys::path path;
  TempDir() {
    path = fsys::temp_directory_path() /
           ("shapeopt-test-" + std::to_string(std::random_device{}()));
    fsys::create_directories(path);
  }
  ~TempDir() { fsys::remove_all(path); }
};

std::string slurp(const fsys::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("key value parsing handles comments, quotes, and duplicates") {
  const KeyValues kv = KeyValues::parse_text(
      "# leading comment\n"
      "plain = 3.5\n"
      "quoted = \"a # not a comment\"  # trailing comment\n"
      "flag=on\n"
      "\n",
      "<test>");
  CHECK(kv.has("plain"));
  CHECK(kv.get_double("plain", 0.0) == 3.5);
  CHECK(kv.get_string("quoted", "") == "a # not a comment");
  CHECK(kv.get_bool("flag", false));
  CHECK_FALSE(kv.has("missing"));
  CHECK(kv.get_int("missing", 7) == 7);

  CHECK_THROWS_AS(KeyValues::parse_text("a=1\na=2\n", "<dup>"), config_error);
  CHECK_THROWS_AS(KeyValues::parse_text("just a line\n", "<bad>"), config_error);
  CHECK_THROWS_AS(KeyValues::parse_file("/nonexistent/path.cfg"), config_error);
}

TEST_CASE("typed getters validate their literals") {
  KeyValues kv = KeyValues::parse_text(
      "t1=true\nt2=1\nt3=on\nf1=false\nf2=0\nf3=off\nbadbool=yes\n"
      "num=1.5e-3\nbadnum=abc\nint=42\n",
      "<test>");
  CHECK(kv.get_bool("t1", false));
  CHECK(kv.get_bool("t2", false));
  CHECK(kv.get_bool("t3", false));
  CHECK_FALSE(kv.get_bool("f1", true));
  CHECK_FALSE(kv.get_bool("f2", true));
  CHECK_FALSE(kv.get_bool("f3", true));
  CHECK_THROWS_AS(kv.get_bool("badbool", false), config_error);
  CHECK(kv.get_double("num", 0.0) == 1.5e-3);
  CHECK_THROWS_AS(kv.get_double("badnum", 0.0), config_error);
  CHECK(kv.get_int("int", 0) == 42);
  CHECK_THROWS_AS(kv.get_int("num", 0), config_error);
}

TEST_CASE("unread keys are rejected, reads and sets interact") {
  KeyValues kv = KeyValues::parse_text("a=1\nb=2\n", "<test>");
  (void)kv.get_int("a", 0);
  CHECK_THROWS_AS(kv.reject_unread(), config_error);
  (void)kv.get_int("b", 0);
  CHECK_NOTHROW(kv.reject_unread());
  // A set after the read marks the key unread again.
  kv.set("b", "3");
  CHECK_THROWS_AS(kv.reject_unread(), config_error);
  (void)kv.get_int("b", 0);
  CHECK_NOTHROW(kv.reject_unread());
}

TEST_CASE("run config round trips through key values") {
  KeyValues kv = KeyValues::parse_text(
      "grid_n = 33\n"
      "alpha = 0.25\n"
      "beta = pwl:-1,1;0.5,1,2\n"
      "f = constant:2\n"
      "y_d = gaussian:0.5,0.5,0.2,1\n"
      "g_init = disk:0.5,0.5,0.25\n"
      "eps0 = 0.2\n"
      "eps_ratio = 0.25\n"
      "eps_min = 0.01\n"
      "opt_max_iters = 7\n"
      "seed = 99\n"
      "out = somewhere\n",
      "<test>");
  const RunConfig cfg = RunConfig::from_kv(kv);
  CHECK(cfg.grid_nx == 33);
  CHECK(cfg.grid_ny == 33);
  CHECK(cfg.alpha == 0.25);
  CHECK(cfg.beta_spec == "pwl:-1,1;0.5,1,2");
  CHECK(cfg.opt.schedule.eps0 == 0.2);
  CHECK(cfg.opt.schedule.ratio == 0.25);
  CHECK(cfg.opt.max_iters == 7);
  CHECK(cfg.seed == 99);
  CHECK(cfg.out_dir == "somewhere");
  CHECK(cfg.make_beta()(2.0) == doctest::Approx(3.0));
  const GridPtr g = cfg.make_grid();
  CHECK(g->nx() == 33);

  KeyValues unknown = KeyValues::parse_text("gird_n = 33\n", "<typo>");
  CHECK_THROWS_AS(RunConfig::from_kv(unknown), config_error);
}

TEST_CASE("run config validation catches bad ranges") {
  KeyValues small = KeyValues::parse_text("grid_n = 2\n", "<test>");
  CHECK_THROWS_AS(RunConfig::from_kv(small), config_error);
  KeyValues eps = KeyValues::parse_text("eps0 = 0.01\neps_min = 0.1\n", "<test>");
  CHECK_THROWS_AS(RunConfig::from_kv(eps), config_error);
  KeyValues alpha = KeyValues::parse_text("alpha = -1\n", "<test>");
  CHECK_THROWS_AS(RunConfig::from_kv(alpha), config_error);
  KeyValues beta = KeyValues::parse_text("beta = nope\n", "<test>");
  CHECK_THROWS_AS(RunConfig::from_kv(beta), config_error);
}

TEST_CASE("field generators match their closed forms") {
  const GridPtr g = Grid::make_unit(33);
  const Field c = make_field(g, "constant:2.5");
  CHECK(c.min() == 2.5);
  CHECK(c.max() == 2.5);

  const Field gs = make_field(g, "gaussian:0.5,0.5,0.2,1.5");
  CHECK(gs.at(16, 16) == doctest::Approx(1.5));
  const double r2 = 2.0 * (1.0 / 32.0) * (1.0 / 32.0);
  CHECK(gs.at(17, 17) == doctest::Approx(1.5 * std::exp(-r2 / (2.0 * 0.04))));

  const Field d = make_field(g, "disk:0.5,0.5,0.25");
  CHECK(d.at(16, 16) == doctest::Approx(-0.25));
  CHECK(d.at(0, 0) == doctest::Approx(std::hypot(0.5, 0.5) - 0.25));

  const Field dq = make_field(g, "disk_quad:0.5,0.5,0.25");
  CHECK(dq.at(16, 16) == doctest::Approx(-0.0625));
  CHECK(dq.at(0, 0) == doctest::Approx(0.5 - 0.0625));

  const Field rc = make_field(g, "rect:0.25,0.25,0.75,0.75");
  CHECK(rc.at(16, 16) == doctest::Approx(-0.25));
  CHECK(rc.at(0, 0) == doctest::Approx(std::hypot(0.25, 0.25)));

  const Field sum = make_field(g, "constant:1+disk:0.5,0.5,0.25");
  CHECK(sum.at(16, 16) == doctest::Approx(0.75));

  CHECK_THROWS_AS(make_field(g, "unknown:1"), config_error);
  CHECK_THROWS_AS(make_field(g, "gaussian:0.5"), config_error);
  CHECK_THROWS_AS(make_field(g, "constant:abc"), config_error);
}

TEST_CASE("observation generator solves on the reference shape") {
  const GridPtr g = Grid::make_unit(33);
  const NonsmoothMap beta = NonsmoothMap::max0();
  const Field f(g, 1.0);
  const SolverConfig cfg;
  const Field obs = make_observation(g, "state_of:disk:0.5,0.5,0.3", beta, f, cfg);
  const ShapeMask mask = extract_shape(make_field(g, "disk:0.5,0.5,0.3"));
  const StateSolve ms = solve_masked(beta, mask, f, cfg);
  CHECK((obs - ms.y).max_abs() == 0.0);
  // Plain generators pass through.
  const Field plain = make_observation(g, "constant:0.5", beta, f, cfg);
  CHECK(plain.max() == 0.5);
  // Inner shape must be admissible.
  CHECK_THROWS_AS(make_observation(g, "state_of:constant:-1", beta, f, cfg),
                  config_error);
}

TEST_CASE("double formatting round trips exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double v = uni(rng) * std::pow(10.0, int(rng() % 20) - 10);
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(std::stod(format_double(0.1)) == 0.1);
  CHECK(std::stod(format_double(-0.0)) == 0.0);
  CHECK(std::stod(format_double(1e-300)) == 1e-300);
}

TEST_CASE("field csv round trips bitwise") {
  TempDir tmp;
  const GridPtr g = Grid::make_unit(17);
  const Field f = Field::from_function(
      g, [](double x, double y) { return std::sin(9.1 * x) * std::cos(3.7 * y) / 3.0; });
  const fsys::path p = tmp.path / "f.csv";
  field_to_csv(f, p);
  const Field back = field_from_csv(g, p);
  for (int k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);

  // Same content on a second write: byte-identical files.
  const fsys::path p2 = tmp.path / "f2.csv";
  field_to_csv(f, p2);
  CHECK(slurp(p) == slurp(p2));

  // Wrong grid is rejected.
  const GridPtr g2 = Grid::make_unit(33);
  CHECK_THROWS_AS(field_from_csv(g2, p), config_error);
  CHECK_THROWS_AS(field_from_csv(g, tmp.path / "missing.csv"), config_error);

  // Header tampering is detected.
  std::ofstream bad(tmp.path / "bad.csv");
  bad << "i,j,x,y\n0,0,0,0\n";
  bad.close();
  CHECK_THROWS_AS(field_from_csv(g, tmp.path / "bad.csv"), config_error);
}

TEST_CASE("mask csv round trips and rejects non-binary values") {
  TempDir tmp;
  const GridPtr g = Grid::make_unit(17);
  const ShapeMask mask = extract_shape(make_field(g, "disk:0.5,0.5,0.3"));
  const fsys::path p = tmp.path / "mask.csv";
  mask_to_csv(g, mask.component, p);
  const std::vector<std::uint8_t> back = mask_from_csv(g, p);
  CHECK(back == mask.component);

  Field notmask(g, 0.5);
  const fsys::path q = tmp.path / "half.csv";
  field_to_csv(notmask, q);
  CHECK_THROWS_AS(mask_from_csv(g, q), config_error);
}

TEST_CASE("vtk export writes a structured points header") {
  TempDir tmp;
  const GridPtr g = Grid::make_unit(9);
  const Field f(g, 1.25);
  const fsys::path p = tmp.path / "f.vtk";
  field_to_vtk(f, "control", p);
  const std::string text = slurp(p);
  CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(text.find("DIMENSIONS 9 9 1") != std::string::npos);
  CHECK(text.find("control") != std::string::npos);
}

TEST_CASE("report files are plain key=value lines") {
  TempDir tmp;
  const fsys::path p = tmp.path / "report.txt";
  write_report({{"alpha", "0.5"}, {"iters", "12"}},p);
  CHECK(slurp(p) == "alpha=0.5\niters=12\n");
}

TEST_CASE("problem assembly wires the configured pieces together") {
  KeyValues kv = KeyValues::parse_text(
      "grid_n = 33\n"
      "f = constant:1\n"
      "y_d = state_of:disk:0.5,0.5,0.3\n"
      "g_init = disk:0.5,0.5,0.3\n"
      "alpha = 0.01\n",
      "<test>");
  const RunConfig cfg = RunConfig::from_kv(kv);
  const Problem prob = build_problem(cfg);
  CHECK(prob.grid->nx() == 33);
  CHECK(prob.data.alpha == 0.01);
  CHECK(in_f_discrete(prob.g_init));
  // Anchor defaults to the initial control.
  CHECK((prob.data.anchor - prob.g_init).max_abs() == 0.0);
  // The observation is the masked solve on the named shape.
  const ShapeMask mask = extract_shape(prob.g_init);
  const StateSolve ms = solve_masked(prob.data.beta, mask, prob.data.f, cfg.solver);
  CHECK((prob.data.y_d - ms.y).max_abs() == 0.0);
}

TEST_CASE("disk shaped e region is honored by the grid factory") {
  KeyValues kv = KeyValues::parse_text(
      "grid_n = 33\ne_shape = disk\ne_cx = 0.5\ne_cy = 0.5\ne_r = 0.1\n", "<test>");
  const RunConfig cfg = RunConfig::from_kv(kv);
  const GridPtr g = cfg.make_grid();
  int count = 0;
  for (int k = 0; k < g->num_nodes(); ++k)
    if (g->in_e(k)) ++count;
  CHECK(count > 0);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i)
      if (g->in_e(g->node(i, j)))
        CHECK(std::hypot(g->x(i) - 0.5, g->y(j) - 0.5) <= 0.1 + 1e-12);
}
