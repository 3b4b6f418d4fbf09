#include "shapeopt/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open for reading: " + path.string());
  return in;
}

struct CsvRow {
  int i, j;
  double x, y, value;
};

std::vector<CsvRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,j,x,y,value", 0) != 0)
    throw config_error("bad CSV header in " + path.string());
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    CsvRow r{};
    char* end = nullptr;
    const char* s = line.c_str();
    r.i = static_cast<int>(std::strtol(s, &end, 10));
    if (*end != ',') throw config_error(path.string() + ": parse error on line " + std::to_string(lineno));
    s = end + 1;
    r.j = static_cast<int>(std::strtol(s, &end, 10));
    if (*end != ',') throw config_error(path.string() + ": parse error on line " + std::to_string(lineno));
    s = end + 1;
    r.x = std::strtod(s, &end);
    if (*end != ',') throw config_error(path.string() + ": parse error on line " + std::to_string(lineno));
    s = end + 1;
    r.y = std::strtod(s, &end);
    if (*end != ',') throw config_error(path.string() + ": parse error on line " + std::to_string(lineno));
    s = end + 1;
    r.value = std::strtod(s, &end);
    rows.push_back(r);
  }
  return rows;
}

void check_row_coords(const Grid& g, const CsvRow& r, const std::filesystem::path& path) {
  if (r.i < 0 || r.i >= g.nx() || r.j < 0 || r.j >= g.ny())
    throw config_error(path.string() + ": node index out of range");
  const double tol = 1e-9 * (1.0 + std::abs(g.h()));
  if (std::abs(r.x - g.x(r.i)) > tol || std::abs(r.y - g.y(r.j)) > tol)
    throw config_error(path.string() + ": node coordinates do not match the grid");
}

}  // namespace

void field_to_csv(const Field& f, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "i,j,x,y,value\n";
  const Grid& g = f.grid();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      out << i << ',' << j << ',' << format_double(g.x(i)) << ','
          << format_double(g.y(j)) << ',' << format_double(f.at(i, j)) << '\n';
  if (!out) throw config_error("write failed: " + path.string());
}

Field field_from_csv(const GridPtr& grid, const std::filesystem::path& path) {
  const std::vector<CsvRow> rows = read_rows(path);
  if (static_cast<int>(rows.size()) != grid->num_nodes())
    throw config_error(path.string() + ": node count does not match the grid");
  Field f(grid, 0.0);
  for (const CsvRow& r : rows) {
    check_row_coords(*grid, r, path);
    f.at(r.i, r.j) = r.value;
  }
  f.check_finite("field_from_csv");
  return f;
}

void mask_to_csv(const GridPtr& grid, const std::vector<std::uint8_t>& mask,
                 const std::filesystem::path& path) {
  if (static_cast<int>(mask.size()) != grid->num_nodes())
    throw std::invalid_argument("mask_to_csv: mask size mismatch");
  std::ofstream out = open_out(path);
  out << "i,j,x,y,value\n";
  for (int j = 0; j < grid->ny(); ++j)
    for (int i = 0; i < grid->nx(); ++i)
      out << i << ',' << j << ',' << format_double(grid->x(i)) << ','
          << format_double(grid->y(j)) << ',' << int(mask[grid->node(i, j)] ? 1 : 0)
          << '\n';
  if (!out) throw config_error("write failed: " + path.string());
}

std::vector<std::uint8_t> mask_from_csv(const GridPtr& grid,
                                        const std::filesystem::path& path) {
  const std::vector<CsvRow> rows = read_rows(path);
  if (static_cast<int>(rows.size()) != grid->num_nodes())
    throw config_error(path.string() + ": node count does not match the grid");
  std::vector<std::uint8_t> mask(grid->num_nodes(), 0);
  for (const CsvRow& r : rows) {
    check_row_coords(*grid, r, path);
    if (r.value != 0.0 && r.value != 1.0)
      throw config_error(path.string() + ": mask values must be 0 or 1");
    mask[grid->node(r.i, r.j)] = r.value != 0.0 ? 1 : 0;
  }
  return mask;
}

void field_to_vtk(const Field& f, const std::string& name,
                  const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  const Grid& g = f.grid();
  out << "# vtk DataFile Version 3.0\n"
      << name << "\nASCII\nDATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << g.nx() << ' ' << g.ny() << " 1\n"
      << "ORIGIN " << format_double(g.domain().x0) << ' '
      << format_double(g.domain().y0) << " 0\n"
      << "SPACING " << format_double(g.h()) << ' ' << format_double(g.h()) << " 1\n"
      << "POINT_DATA " << g.num_nodes() << "\n"
      << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < f.size(); ++k) out << format_double(f[k]) << '\n';
  if (!out) throw config_error("write failed: " + path.string());
}

void write_report(const std::vector<std::pair<std::string, std::string>>& entries,
                  const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  if (!out) throw config_error("write failed: " + path.string());
}

}  // namespace shapeopt
