#include "shapeopt/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "shapeopt/errors.hpp"
#include "shapeopt/field_io.hpp"
#include "shapeopt/objective.hpp"
#include "shapeopt/shapes.hpp"

namespace shapeopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  }
  return true;
}

double parse_double(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || t.empty() || errno == ERANGE || !std::isfinite(v)) {
    throw config_error(where + ": not a finite number: '" + text + "'");
  }
  return v;
}

long long parse_ll(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || t.empty() || errno == ERANGE) {
    throw config_error(where + ": not an integer: '" + text + "'");
  }
  return v;
}

std::vector<double> parse_params(const std::string& where, const std::string& text,
                                 std::size_t count) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(where, item));
  if (out.size() != count) {
    throw config_error(where + ": expected " + std::to_string(count) +
                       " comma-separated numbers, got '" + text + "'");
  }
  return out;
}

/// Splits on '+' separators between generators; a '+' inside a number (sign
/// or exponent) is never followed by a letter, which generator names always
/// start with.
std::vector<std::string> split_terms(const std::string& spec) {
  std::vector<std::string> terms;
  std::size_t start = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec[i] != '+') continue;
    std::size_t j = i + 1;
    while (j < spec.size() && std::isspace(static_cast<unsigned char>(spec[j]))) ++j;
    if (j < spec.size() && std::isalpha(static_cast<unsigned char>(spec[j]))) {
      terms.push_back(trim(spec.substr(start, i - start)));
      start = i + 1;
    }
  }
  terms.push_back(trim(spec.substr(start)));
  return terms;
}

Field eval_term(const GridPtr& grid, const std::string& term) {
  const std::size_t colon = term.find(':');
  const std::string name = colon == std::string::npos ? term : trim(term.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : trim(term.substr(colon + 1));
  const std::string where = "generator '" + name + "'";

  if (name == "constant") {
    const auto p = parse_params(where, args, 1);
    return Field(grid, p[0]);
  }
  if (name == "gaussian") {
    const auto p = parse_params(where, args, 4);
    if (!(p[2] > 0.0)) throw config_error(where + ": sigma must be > 0");
    const double cx = p[0], cy = p[1], s2 = 2.0 * p[2] * p[2], amp = p[3];
    return Field::from_function(grid, [=](double x, double y) {
      const double dx = x - cx, dy = y - cy;
      return amp * std::exp(-(dx * dx + dy * dy) / s2);
    });
  }
  if (name == "disk") {
    const auto p = parse_params(where, args, 3);
    if (!(p[2] > 0.0)) throw config_error(where + ": radius must be > 0");
    const double cx = p[0], cy = p[1], r = p[2];
    return Field::from_function(grid, [=](double x, double y) {
      return std::hypot(x - cx, y - cy) - r;
    });
  }
  if (name == "disk_quad") {
    const auto p = parse_params(where, args, 3);
    if (!(p[2] > 0.0)) throw config_error(where + ": radius must be > 0");
    const double cx = p[0], cy = p[1], r2 = p[2] * p[2];
    return Field::from_function(grid, [=](double x, double y) {
      const double dx = x - cx, dy = y - cy;
      return dx * dx + dy * dy - r2;
    });
  }
  if (name == "rect") {
    const auto p = parse_params(where, args, 4);
    if (!(p[2] > p[0]) || !(p[3] > p[1])) {
      throw config_error(where + ": requires x0 < x1 and y0 < y1");
    }
    const double cx = 0.5 * (p[0] + p[2]), cy = 0.5 * (p[1] + p[3]);
    const double hx = 0.5 * (p[2] - p[0]), hy = 0.5 * (p[3] - p[1]);
    return Field::from_function(grid, [=](double x, double y) {
      const double qx = std::abs(x - cx) - hx, qy = std::abs(y - cy) - hy;
      const double ox = std::max(qx, 0.0), oy = std::max(qy, 0.0);
      return std::hypot(ox, oy) + std::min(std::max(qx, qy), 0.0);
    });
  }
  if (name == "csv") {
    if (args.empty()) throw config_error(where + ": missing path");
    return field_from_csv(grid, args);
  }
  throw config_error("unknown field generator '" + name + "'");
}

}  // namespace

KeyValues KeyValues::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KeyValues KeyValues::parse_text(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    // Strip comments outside quotes.
    bool quoted = false;
    std::string body;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      body.push_back(c);
    }
    body = trim(body);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw config_error(where + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (!valid_key(key)) throw config_error(where + ": invalid key '" + key + "'");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (kv.kv_.count(key)) throw config_error(where + ": duplicate key '" + key + "'");
    kv.kv_[key] = value;
  }
  return kv;
}

bool KeyValues::has(const std::string& key) const { return kv_.count(key) != 0; }

void KeyValues::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
  read_.erase(key);
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  read_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  read_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_double("key '" + key + "'", it->second);
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  read_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const long long v = parse_ll("key '" + key + "'", it->second);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw config_error("key '" + key + "': out of int range");
  }
  return static_cast<int>(v);
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  read_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string t = trim(it->second);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || t.empty() || errno == ERANGE ||
      t.find('-') != std::string::npos) {
    throw config_error("key '" + key + "': not an unsigned integer: '" + it->second + "'");
  }
  return static_cast<std::uint64_t>(v);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  read_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw config_error("key '" + key + "': not a boolean: '" + v + "'");
}

void KeyValues::reject_unread() const {
  std::string bad;
  for (const auto& [key, value] : kv_) {
    if (!read_.count(key)) bad += (bad.empty() ? "" : ", ") + key;
  }
  if (!bad.empty()) {
    throw config_error(origin_ + ": unknown or inapplicable keys: " + bad);
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  KeyValues kv = KeyValues::parse_file(path);
  return from_kv(kv);
}

RunConfig RunConfig::from_kv(KeyValues& kv) {
  RunConfig c;
  const int n = kv.get_int("grid_n", 65);
  c.grid_nx = kv.get_int("grid_nx", n);
  c.grid_ny = kv.get_int("grid_ny", n);
  c.domain.x0 = kv.get_double("domain_x0", c.domain.x0);
  c.domain.y0 = kv.get_double("domain_y0", c.domain.y0);
  c.domain.x1 = kv.get_double("domain_x1", c.domain.x1);
  c.domain.y1 = kv.get_double("domain_y1", c.domain.y1);

  const std::string shape = kv.get_string("e_shape", "rect");
  if (shape == "rect") {
    Rect r = ERegion{}.rect;
    r.x0 = kv.get_double("e_x0", r.x0);
    r.y0 = kv.get_double("e_y0", r.y0);
    r.x1 = kv.get_double("e_x1", r.x1);
    r.y1 = kv.get_double("e_y1", r.y1);
    c.e = ERegion::rectangle(r);
  } else if (shape == "disk") {
    const double cx = kv.get_double("e_cx", 0.5);
    const double cy = kv.get_double("e_cy", 0.5);
    const double r = kv.get_double("e_r", 0.125);
    c.e = ERegion::disk_region(cx, cy, r);
  } else {
    throw config_error("key 'e_shape': expected rect or disk, got '" + shape + "'");
  }

  c.f_gen = kv.get_string("f", c.f_gen);
  c.y_d_gen = kv.get_string("y_d", c.y_d_gen);
  c.g_init_gen = kv.get_string("g_init", c.g_init_gen);
  c.anchor_gen = kv.get_string("anchor", c.anchor_gen);
  c.alpha = kv.get_double("alpha", c.alpha);
  c.beta_spec = kv.get_string("beta", c.beta_spec);

  c.solver.tol_rel = kv.get_double("newton_tol_rel", c.solver.tol_rel);
  c.solver.max_iters = kv.get_int("newton_max_iters", c.solver.max_iters);
  c.solver.eps_g_source = kv.get_bool("eps_g_source", c.solver.eps_g_source);

  c.opt.schedule.eps0 = kv.get_double("eps0", c.opt.schedule.eps0);
  c.opt.schedule.ratio = kv.get_double("eps_ratio", c.opt.schedule.ratio);
  c.opt.schedule.eps_min = kv.get_double("eps_min", c.opt.schedule.eps_min);
  c.opt.max_iters = kv.get_int("opt_max_iters", c.opt.max_iters);
  c.opt.armijo_c1 = kv.get_double("opt_armijo_c1", c.opt.armijo_c1);
  c.opt.shrink = kv.get_double("opt_step_shrink", c.opt.shrink);
  c.opt.step0 = kv.get_double("opt_step0", c.opt.step0);
  c.opt.step_floor = kv.get_double("opt_step_floor", c.opt.step_floor);
  c.opt.grad_tol = kv.get_double("opt_grad_tol", c.opt.grad_tol);
  const double trust = kv.get_double("opt_trust_radius", 0.0);
  if (trust > 0.0) c.opt.trust_radius = trust;
  c.opt.precondition = kv.get_bool("opt_precondition", c.opt.precondition);
  c.opt.interior_layers = kv.get_int("opt_interior_layers", c.opt.interior_layers);
  c.opt.cert_target_rel = kv.get_double("cert_target_rel", c.opt.cert_target_rel);
  c.opt.cert_m_start = kv.get_int("cert_m_start", c.opt.cert_m_start);

  c.out_dir = kv.get_string("out", c.out_dir);
  c.seed = kv.get_u64("seed", c.seed);
  c.verify_break_heps = kv.get_bool("verify_break_heps", c.verify_break_heps);
  c.in_csv = kv.get_string("in_csv", c.in_csv);

  kv.reject_unread();
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (grid_nx < 3 || grid_ny < 3) throw config_error("grid needs at least 3 nodes per axis");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
    throw config_error("domain rectangle is empty");
  }
  if (!(alpha >= 0.0)) throw config_error("alpha must be >= 0");
  if (!(solver.tol_rel > 0.0)) throw config_error("newton_tol_rel must be > 0");
  if (solver.max_iters < 1) throw config_error("newton_max_iters must be >= 1");
  if (out_dir.empty()) throw config_error("out directory must not be empty");
  try {
    (void)NonsmoothMap::parse(beta_spec);
    opt.validate();
  } catch (const config_error&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
}

GridPtr RunConfig::make_grid() const {
  try {
    return Grid::make(grid_nx, grid_ny, domain, e);
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("grid: ") + e.what());
  }
}

NonsmoothMap RunConfig::make_beta() const { return NonsmoothMap::parse(beta_spec); }

Field make_field(const GridPtr& grid, const std::string& spec) {
  const std::vector<std::string> terms = split_terms(spec);
  if (terms.empty() || (terms.size() == 1 && terms[0].empty())) {
    throw config_error("empty field generator");
  }
  Field acc = eval_term(grid, terms[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) acc += eval_term(grid, terms[i]);
  acc.check_finite("field generator");
  return acc;
}

Field make_observation(const GridPtr& grid, const std::string& spec,
                       const NonsmoothMap& beta, const Field& f,
                       const SolverConfig& cfg) {
  const std::string t = spec;
  const std::string prefix = "state_of:";
  if (t.rfind(prefix, 0) == 0) {
    const Field g = make_field(grid, t.substr(prefix.size()));
    if (!validate_fs(g).pass()) {
      throw config_error("state_of: the inner generator is not an admissible shape function");
    }
    return solve_masked(beta, extract_shape(g), f, cfg).y;
  }
  return make_field(grid, spec);
}

Problem build_problem(const RunConfig& cfg) {
  const GridPtr grid = cfg.make_grid();
  try {
    Field f = make_field(grid, cfg.f_gen);
    const NonsmoothMap beta = cfg.make_beta();
    Field y_d = make_observation(grid, cfg.y_d_gen, beta, f, cfg.solver);
    Field g_init = make_field(grid, cfg.g_init_gen);
    Field anchor = cfg.anchor_gen.empty() ? g_init : make_field(grid, cfg.anchor_gen);
    ProblemData data(std::move(f), std::move(y_d), cfg.alpha, beta, std::move(anchor));
    data.solver = cfg.solver;
    return Problem{grid, std::move(data), std::move(g_init)};
  } catch (const config_error&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
}

}  // namespace shapeopt
