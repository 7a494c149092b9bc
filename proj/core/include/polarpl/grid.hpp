#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "polarpl/extended.hpp"

namespace polarpl {

// A point of the base space. Only the first dim() coordinates are meaningful.
using Point = std::array<double, 2>;

/// Extended-real-valued function sampled on a uniform grid over an
/// axis-aligned box in R^n, n in {1,2}. Values are non-negative extended
/// reals; outside the box the function is treated as +inf, so every
/// GridFunction has a compact effective domain. Values are immutable once a
/// function has been handed to an operation; all operations are pure.
class GridFunction {
 public:
  GridFunction(int dim, Point lo, Point hi, std::array<int, 2> shape);

  static GridFunction sample(int dim, Point lo, Point hi, std::array<int, 2> shape,
                             const std::function<double(const Point&)>& fn);
  static GridFunction constant(int dim, Point lo, Point hi, std::array<int, 2> shape, double value);

  int dim() const { return dim_; }
  int shape(int axis) const { return shape_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double step(int axis) const { return step_[axis]; }
  // Largest per-axis grid step; the "h" of every grid-based error bound.
  double h_max() const;
  std::size_t size() const { return values_.size(); }

  double coord(int axis, int index) const { return lo_[axis] + step_[axis] * index; }
  Point node_point(std::size_t flat) const;
  std::size_t flat_index(int i, int j = 0) const { return static_cast<std::size_t>(i) * inner_ + j; }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double at(int i, int j = 0) const { return values_[flat_index(i, j)]; }
  double& at(int i, int j = 0) { return values_[flat_index(i, j)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Multilinear interpolation of node values; +inf outside the box or when
  /// any stencil node is +inf (a conservative upper bound for convex data).
  double eval(const Point& x) const;
  double eval1(double x) const { return eval({x, 0.0}); }
  bool in_box(const Point& x) const;

  bool same_layout(const GridFunction& other) const;
  /// Largest finite node value; 0 when every node is +inf.
  double max_finite() const;
  double min_value() const;
  bool all_infinite() const;
  bool has_infinite() const;

  std::string layout_string() const;

 private:
  int dim_;
  Point lo_{}, hi_{};
  std::array<int, 2> shape_{};
  Point step_{};
  std::size_t inner_ = 1;  // stride of axis 0 (== shape[1] when dim == 2)
  std::vector<double> values_;
};

// Nodewise algebra. Layouts must match.
GridFunction add(const GridFunction& f, const GridFunction& g);
GridFunction scale(const GridFunction& f, double c);  // c > 0
GridFunction map(const GridFunction& f, const std::function<double(double)>& fn);
// phi = -log f (f in [0,1]; f = 0 maps to +inf).
GridFunction neg_log(const GridFunction& f);
// f = exp(-phi) (phi = +inf maps to 0).
GridFunction exp_neg(const GridFunction& phi);
// Resample onto a new layout through multilinear interpolation.
GridFunction resample(const GridFunction& f, int dim, Point lo, Point hi, std::array<int, 2> shape);

/// Composite quadrature settings: each grid cell is split into 2^refinement
/// panels per axis; the rule is applied per panel. The refinement error
/// estimate of an integral is |I_k - I_{k-1}|.
struct Quadrature {
  enum class Rule { midpoint, trapezoid };
  Rule rule = Rule::midpoint;
  int refinement = 0;
};

struct IntegralResult {
  double value = 0.0;
  double refinement_error = 0.0;  // |I_k - I_{k-1}|, 0 when refinement == 0
};

// Optional weight density on the base space; empty means Lebesgue.
using DensityFn = std::function<double(const Point&)>;

/// integral over the box of integrand(node value interpolant) * density.
/// The integrand receives extended values; it must map +inf to 0 for the
/// integral to make sense (e.g. v -> exp(-v)).
IntegralResult integrate_transformed(const GridFunction& f, const std::function<double(double)>& integrand,
                                     const DensityFn& density, const Quadrature& q);

/// integral of exp(-phi) d(density * Lebesgue); nodes with phi = +inf
/// contribute 0. Throws if the density is non-finite at a quadrature node.
double integrate_exp_neg(const GridFunction& phi, const DensityFn& density = {}, const Quadrature& q = {});
IntegralResult integrate_exp_neg_result(const GridFunction& phi, const DensityFn& density = {},
                                        const Quadrature& q = {});

/// Plain integral of f (f finite a.e.); used for value-side functions.
double integrate(const GridFunction& f, const DensityFn& density = {}, const Quadrature& q = {});

/// (integral of f^p)^(1/p), p > 0. Throws if f has an infinite node.
double lp_norm(const GridFunction& f, double p, const Quadrature& q = {});

/// Truncation diagnostic: the largest value of integrand(f) on the box
/// boundary nodes. Reported with verification results so the box-truncation
/// error of improper integrals stays visible.
double boundary_max(const GridFunction& f, const std::function<double(double)>& integrand);

}  // namespace polarpl
