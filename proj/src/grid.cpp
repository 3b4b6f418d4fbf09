#include "shapeopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

int snap_index(double coord, double origin, double h) {
  return static_cast<int>(std::lround((coord - origin) / h));
}

}  // namespace

std::shared_ptr<const Grid> Grid::make(int nx, int ny, const Rect& domain,
                                       const ERegion& e) {
  if (nx < 3 || ny < 3)
    throw std::invalid_argument("Grid: need at least 3 nodes per axis");
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw std::invalid_argument("Grid: empty domain");

  const double hx = domain.width() / (nx - 1);
  const double hy = domain.height() / (ny - 1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw std::invalid_argument("Grid: spacing must match on both axes");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->nx_ = nx;
  g->ny_ = ny;
  g->h_ = hx;
  g->domain_ = domain;
  g->e_ = e;
  const int n = nx * ny;
  g->e_mask_.assign(n, 0);

  const double h = hx;
  if (e.kind == ERegion::Kind::Rectangle) {
    int i0 = snap_index(e.rect.x0, domain.x0, h);
    int i1 = snap_index(e.rect.x1, domain.x0, h);
    int j0 = snap_index(e.rect.y0, domain.y0, h);
    int j1 = snap_index(e.rect.y1, domain.y0, h);
    if (i0 >= i1 || j0 >= j1)
      throw std::invalid_argument("Grid: observation rectangle collapses on this grid");
    // Stored E is the snapped rectangle.
    g->e_.rect = Rect{g->x(i0), g->y(j0), g->x(i1), g->y(j1)};
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) g->e_mask_[g->node(i, j)] = 1;
  } else {
    const DiskSpec& d = e.disk;
    if (d.r <= 0.0) throw std::invalid_argument("Grid: observation disk radius <= 0");
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double dx = g->x(i) - d.cx, dy = g->y(j) - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) g->e_mask_[g->node(i, j)] = 1;
      }
  }

  double gap = std::numeric_limits<double>::infinity();
  int count = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!g->e_mask_[g->node(i, j)]) continue;
      ++count;
      const double dist = std::min(std::min(g->x(i) - domain.x0, domain.x1 - g->x(i)),
                                   std::min(g->y(j) - domain.y0, domain.y1 - g->y(j)));
      gap = std::min(gap, dist);
    }
  if (count == 0) throw std::invalid_argument("Grid: observation region contains no node");
  if (gap + 1e-12 < 2.0 * h)
    throw std::invalid_argument("Grid: observation region closer than 2h to the outer boundary");
  g->e_node_count_ = count;
  g->e_gap_ = gap;

  // Quadrature: every cell spreads h^2/4 onto its corners; restricted to a
  // node set this counts exactly the cells whose corners all belong to it.
  const double quarter = 0.25 * h * h;
  g->w_d_.assign(n, 0.0);
  g->w_e_.assign(n, 0.0);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int c[4] = {g->node(i, j), g->node(i + 1, j), g->node(i, j + 1),
                        g->node(i + 1, j + 1)};
      for (int k : c) g->w_d_[k] += quarter;
      if (g->e_mask_[c[0]] && g->e_mask_[c[1]] && g->e_mask_[c[2]] && g->e_mask_[c[3]])
        for (int k : c) g->w_e_[k] += quarter;
    }
  g->w_de_.resize(n);
  for (int k = 0; k < n; ++k) g->w_de_[k] = g->w_d_[k] - g->w_e_[k];

  return g;
}

std::shared_ptr<const Grid> Grid::make_unit(int n) {
  return make(n, n, Rect{}, ERegion{});
}

std::shared_ptr<const Grid> Grid::make_unit(int n, const ERegion& e) {
  return make(n, n, Rect{}, e);
}

std::vector<double> Grid::mask_weights(const std::vector<std::uint8_t>& mask) const {
  if (static_cast<int>(mask.size()) != num_nodes())
    throw std::invalid_argument("mask_weights: mask size mismatch");
  std::vector<double> w(num_nodes(), 0.0);
  const double quarter = 0.25 * h_ * h_;
  for (int j = 0; j + 1 < ny_; ++j)
    for (int i = 0; i + 1 < nx_; ++i) {
      const int c[4] = {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
      if (mask[c[0]] && mask[c[1]] && mask[c[2]] && mask[c[3]])
        for (int k : c) w[k] += quarter;
    }
  return w;
}

Field::Field(GridPtr grid, double fill)
    : grid_(std::move(grid)), v_(grid_->num_nodes(), fill) {
  if (!std::isfinite(fill)) throw std::invalid_argument("Field: non-finite fill value");
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != grid_->num_nodes())
    throw std::invalid_argument("Field: value count does not match grid");
  check_finite("Field construction");
}

Field Field::from_function(const GridPtr& grid,
                           const std::function<double(double, double)>& f) {
  Field out(grid);
  for (int j = 0; j < grid->ny(); ++j)
    for (int i = 0; i < grid->nx(); ++i)
      out.at(i, j) = f(grid->x(i), grid->y(j));
  out.check_finite("Field::from_function");
  return out;
}

double Field::min() const { return *std::min_element(v_.begin(), v_.end()); }
double Field::max() const { return *std::max_element(v_.begin(), v_.end()); }
double Field::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& o) {
  if (!same_grid(*this, o)) throw std::invalid_argument("Field +=: grid mismatch");
  for (int k = 0; k < size(); ++k) v_[k] += o.v_[k];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  if (!same_grid(*this, o)) throw std::invalid_argument("Field -=: grid mismatch");
  for (int k = 0; k < size(); ++k) v_[k] -= o.v_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : v_) v *= s;
  return *this;
}

void Field::check_finite(const char* where) const {
  for (double v : v_)
    if (!std::isfinite(v))
      throw solver_error(std::string(where) + ": field contains a non-finite value");
}

bool same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() == b.grid_ptr()) return true;
  const Grid& ga = a.grid();
  const Grid& gb = b.grid();
  return ga.nx() == gb.nx() && ga.ny() == gb.ny() &&
         std::abs(ga.h() - gb.h()) <= 1e-14 &&
         std::abs(ga.domain().x0 - gb.domain().x0) <= 1e-14 &&
         std::abs(ga.domain().y0 - gb.domain().y0) <= 1e-14;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field operator*(const Field& a, const Field& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("Field *: grid mismatch");
  Field out = a;
  for (int k = 0; k < out.size(); ++k) out[k] *= b[k];
  return out;
}

Field apply(const Field& f, const std::function<double(double)>& fn) {
  Field out = f;
  for (int k = 0; k < out.size(); ++k) out[k] = fn(out[k]);
  return out;
}

double integrate(const Field& f, Region region) {
  const Grid& g = f.grid();
  const std::vector<double>* w = nullptr;
  switch (region) {
    case Region::D: w = &g.weights_d(); break;
    case Region::E: w = &g.weights_e(); break;
    case Region::DMinusEbar: w = &g.weights_d_minus_e(); break;
  }
  double s = 0.0;
  for (int k = 0; k < f.size(); ++k) s += (*w)[k] * f[k];
  return s;
}

double integrate_mask(const Field& f, const std::vector<std::uint8_t>& mask) {
  const std::vector<double> w = f.grid().mask_weights(mask);
  double s = 0.0;
  for (int k = 0; k < f.size(); ++k) s += w[k] * f[k];
  return s;
}

double inner_l2_d(const Field& a, const Field& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("inner_l2_d: grid mismatch");
  const std::vector<double>& w = a.grid().weights_d();
  double s = 0.0;
  for (int k = 0; k < a.size(); ++k) s += w[k] * a[k] * b[k];
  return s;
}

namespace {

// One row of a one-dimensional difference stencil along either axis.
struct Stencil {
  int cols[3];
  double coef[3];
  int count;
};

// First derivative along a line of m nodes with spacing h, position p.
Stencil d1_row(int p, int m, double h) {
  Stencil s{};
  if (p == 0) {
    s = {{0, 1, 2}, {-1.5 / h, 2.0 / h, -0.5 / h}, 3};
  } else if (p == m - 1) {
    s = {{m - 3, m - 2, m - 1}, {0.5 / h, -2.0 / h, 1.5 / h}, 3};
  } else {
    s = {{p - 1, p + 1, 0}, {-0.5 / h, 0.5 / h, 0.0}, 2};
  }
  return s;
}

// Second derivative; the one-sided rows reuse the adjacent interior stencil.
Stencil d2_row(int p, int m, double h) {
  const double ih2 = 1.0 / (h * h);
  int c = std::clamp(p, 1, m - 2);
  Stencil s{{c - 1, c, c + 1}, {ih2, -2.0 * ih2, ih2}, 3};
  return s;
}

template <typename RowFn>
void emit_axis_entries(const Grid& g, bool along_x, RowFn row,
                       const std::function<void(int, int, double)>& cb) {
  if (along_x) {
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        Stencil s = row(i, g.nx(), g.h());
        for (int t = 0; t < s.count; ++t) cb(g.node(i, j), g.node(s.cols[t], j), s.coef[t]);
      }
  } else {
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        Stencil s = row(j, g.ny(), g.h());
        for (int t = 0; t < s.count; ++t) cb(g.node(i, j), g.node(i, s.cols[t]), s.coef[t]);
      }
  }
}

}  // namespace

void for_each_diff_entry(const Grid& g, Diff d,
                         const std::function<void(int, int, double)>& cb) {
  switch (d) {
    case Diff::X: emit_axis_entries(g, true, d1_row, cb); return;
    case Diff::Y: emit_axis_entries(g, false, d1_row, cb); return;
    case Diff::XX: emit_axis_entries(g, true, d2_row, cb); return;
    case Diff::YY: emit_axis_entries(g, false, d2_row, cb); return;
    case Diff::XY:
      throw std::invalid_argument("for_each_diff_entry: compose X and Y for XY");
  }
}

Field diff(const Field& f, Diff d) {
  if (d == Diff::XY) return diff(diff(f, Diff::X), Diff::Y);
  Field out(f.grid_ptr(), 0.0);
  for_each_diff_entry(f.grid(), d,
                      [&](int row, int col, double c) { out[row] += c * f[col]; });
  return out;
}

double norm(const Field& f, Norm kind) {
  const Grid& g = f.grid();
  switch (kind) {
    case Norm::L2_D:
      return std::sqrt(integrate(f * f, Region::D));
    case Norm::L2_E:
      return std::sqrt(integrate(f * f, Region::E));
    case Norm::H1_D: {
      const Field fx = diff(f, Diff::X), fy = diff(f, Diff::Y);
      double s = 0.0;
      const std::vector<double>& w = g.weights_d();
      for (int k = 0; k < f.size(); ++k)
        s += w[k] * (f[k] * f[k] + fx[k] * fx[k] + fy[k] * fy[k]);
      return std::sqrt(s);
    }
    case Norm::W: {
      const Field fx = diff(f, Diff::X), fy = diff(f, Diff::Y);
      const Field fxx = diff(f, Diff::XX), fyy = diff(f, Diff::YY);
      const Field fxy = diff(f, Diff::XY);
      const std::vector<double>& wd = g.weights_d();
      const std::vector<double>& wde = g.weights_d_minus_e();
      double s = 0.0;
      for (int k = 0; k < f.size(); ++k) {
        s += wd[k] * f[k] * f[k];
        s += wde[k] * (f[k] * f[k] + fx[k] * fx[k] + fy[k] * fy[k] +
                       fxx[k] * fxx[k] + 2.0 * fxy[k] * fxy[k] + fyy[k] * fyy[k]);
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

}  // namespace shapeopt
