#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "shapeopt/grid.hpp"
#include "shapeopt/nonsmooth.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/pde.hpp"

namespace shapeopt {

/// Flat key=value configuration: one pair per line, '#' starts a comment,
/// values optionally double-quoted. Reads are tracked so a consumer can
/// reject keys it never looked at.
class KeyValues {
 public:
  KeyValues() = default;

  static KeyValues parse_file(const std::string& path);
  static KeyValues parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  /// Inserts or overwrites (used for command-line overrides).
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws config_error listing every key that was never read.
  void reject_unread() const;

 private:
  std::string origin_ = "<empty>";
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> read_;
};

struct RunConfig {
  int grid_nx = 65;
  int grid_ny = 65;
  Rect domain{0.0, 0.0, 1.0, 1.0};
  ERegion e{};

  std::string f_gen = "constant:1";
  std::string y_d_gen = "constant:0";
  std::string g_init_gen = "disk:0.5,0.5,0.3";
  std::string anchor_gen;  ///< empty reuses g_init
  double alpha = 1e-3;
  std::string beta_spec = "max0";

  SolverConfig solver{};
  OptimizerConfig opt{};

  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool verify_break_heps = false;
  std::string in_csv;  ///< export-vtk input when no positional path is given

  static RunConfig from_file(const std::string& path);
  /// Consumes kv and rejects unread keys.
  static RunConfig from_kv(KeyValues& kv);
  /// Throws config_error on out-of-range values.
  void validate() const;

  GridPtr make_grid() const;
  NonsmoothMap make_beta() const;
};

/// Evaluates an analytic field generator: constant:V,
/// gaussian:cx,cy,sigma,amp, disk:cx,cy,r (signed distance),
/// disk_quad:cx,cy,r, rect:x0,y0,x1,y1 (signed distance), csv:PATH,
/// or a '+'-joined sum of those.
Field make_field(const GridPtr& grid, const std::string& spec);

/// make_field extended with "state_of:SHAPE": the masked reference solve on
/// the shape of the inner generator (which must pass validate_fs).
Field make_observation(const GridPtr& grid, const std::string& spec,
                       const NonsmoothMap& beta, const Field& f,
                       const SolverConfig& cfg);

struct Problem {
  GridPtr grid;
  ProblemData data;
  Field g_init;
};

/// Materializes the grid, problem fields, and nonlinearity. Geometry or
/// generator mistakes surface as config_error.
Problem build_problem(const RunConfig& cfg);

}  // namespace shapeopt
