#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace shapeopt {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

struct DiskSpec {
  double cx = 0.5, cy = 0.5, r = 0.15;
};

/// Observation region E. Rectangles snap to grid nodes; disks are realized
/// as the set of nodes inside the circle.
struct ERegion {
  enum class Kind { Rectangle, Disk };
  Kind kind = Kind::Rectangle;
  Rect rect{0.375, 0.375, 0.625, 0.625};
  DiskSpec disk{};

  static ERegion rectangle(const Rect& r) {
    ERegion e;
    e.kind = Kind::Rectangle;
    e.rect = r;
    return e;
  }
  static ERegion disk_region(double cx, double cy, double r) {
    ERegion e;
    e.kind = Kind::Disk;
    e.disk = {cx, cy, r};
    return e;
  }
};

/// Uniform tensor grid on an axis-aligned rectangle D with equal spacing on
/// both axes and a designated observation region E at least 2h away from ∂D.
/// Node (i, j) sits at (x0 + i h, y0 + j h), index = j * nx + i (row-major).
class Grid {
 public:
  static std::shared_ptr<const Grid> make(int nx, int ny, const Rect& domain,
                                          const ERegion& e);
  /// Unit square with n nodes per axis and the default centered E rectangle.
  static std::shared_ptr<const Grid> make_unit(int n);
  static std::shared_ptr<const Grid> make_unit(int n, const ERegion& e);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int num_nodes() const { return nx_ * ny_; }
  double h() const { return h_; }
  const Rect& domain() const { return domain_; }
  const ERegion& e_region() const { return e_; }

  int node(int i, int j) const { return j * nx_ + i; }
  int node_i(int k) const { return k % nx_; }
  int node_j(int k) const { return k / nx_; }
  double x(int i) const { return domain_.x0 + i * h_; }
  double y(int j) const { return domain_.y0 + j * h_; }

  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }
  bool on_boundary(int k) const { return on_boundary(node_i(k), node_j(k)); }

  bool in_e(int k) const { return e_mask_[k] != 0; }
  bool in_e(int i, int j) const { return in_e(node(i, j)); }
  const std::vector<std::uint8_t>& e_mask() const { return e_mask_; }
  int e_node_count() const { return e_node_count_; }

  /// Trapezoid weights over D; sum equals |D| exactly up to roundoff.
  const std::vector<double>& weights_d() const { return w_d_; }
  /// Cell-union weights over E (h^2/4 per incident cell fully inside E).
  /// For a node-aligned rectangle this reproduces the trapezoid rule on it.
  const std::vector<double>& weights_e() const { return w_e_; }
  /// weights_d - weights_e, the quadrature for integrals over D minus closure(E).
  const std::vector<double>& weights_d_minus_e() const { return w_de_; }

  /// Cell-union weights of an arbitrary node mask: a cell contributes h^2/4
  /// to each corner when all four corners are mask nodes.
  std::vector<double> mask_weights(const std::vector<std::uint8_t>& mask) const;

  /// Geometric distance from the E node set to ∂D (minimum over E nodes).
  double e_gap_to_boundary() const { return e_gap_; }

 private:
  Grid() = default;

  int nx_ = 0, ny_ = 0;
  double h_ = 0.0;
  Rect domain_;
  ERegion e_;
  std::vector<std::uint8_t> e_mask_;
  int e_node_count_ = 0;
  std::vector<double> w_d_, w_e_, w_de_;
  double e_gap_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Nodal scalar field bound to a grid. Values must stay finite.
class Field {
 public:
  explicit Field(GridPtr grid, double fill = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  static Field from_function(const GridPtr& grid,
                             const std::function<double(double, double)>& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int size() const { return static_cast<int>(v_.size()); }

  double operator[](int k) const { return v_[k]; }
  double& operator[](int k) { return v_[k]; }
  double at(int i, int j) const { return v_[grid_->node(i, j)]; }
  double& at(int i, int j) { return v_[grid_->node(i, j)]; }

  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double min() const;
  double max() const;
  double max_abs() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

  /// Throws solver_error when a NaN or Inf is present.
  void check_finite(const char* where) const;

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

bool same_grid(const Field& a, const Field& b);

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
/// Elementwise product.
Field operator*(const Field& a, const Field& b);

Field apply(const Field& f, const std::function<double(double)>& fn);

enum class Region { D, E, DMinusEbar };

double integrate(const Field& f, Region region);
double integrate_mask(const Field& f, const std::vector<std::uint8_t>& mask);

enum class Norm { L2_D, L2_E, H1_D, W };

double norm(const Field& f, Norm kind);
double inner_l2_d(const Field& a, const Field& b);

/// First and second difference quotients. X/Y are central inside and
/// second-order one-sided on ∂D; XX/YY are the tight three-point stencils,
/// shifted by one node on ∂D; XY is the composition Y after X.
enum class Diff { X, Y, XX, YY, XY };

Field diff(const Field& f, Diff d);

/// Enumerates the matrix entries (row, col, coeff) of a difference operator.
/// Diff::XY is not enumerable here; compose the X and Y operators instead.
void for_each_diff_entry(const Grid& g, Diff d,
                         const std::function<void(int, int, double)>& cb);

}  // namespace shapeopt
