#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polarpl/grid.hpp"

namespace polarpl {

/// Polar K° = {y : <x,y> <= 1 for all x in K} of a finite sample of K,
/// kept as the reduced generator list (1D: extremes, 2D: hull vertices).
struct PolarSet {
  int dim = 1;
  std::vector<Point> generators;

  bool contains(const Point& y, double tol = 1e-9) const;
};

/// Polar of a sampled set. Throws if the sample is empty.
PolarSet polar_set(std::span<const Point> pts, int dim);
/// Polar of the sublevel set {x : K(x) <= level} of an indicator-style grid.
PolarSet polar_set(const GridFunction& k, double level);

struct TransformOptions {
  // Output box = input box scaled by `factor` about the origin unless an
  // explicit box/shape is given. Duals of compactly supported functions grow
  // linearly, hence the default headroom.
  double factor = 4.0;
  std::optional<Point> out_lo, out_hi;
  std::optional<std::array<int, 2>> out_shape;
};

/// Legendre transform: (L phi)(y) = sup_x { <x,y> - phi(x) }, discrete sup
/// over phi's grid nodes (exact for the interpolant in 1D, and in 2D the
/// per-cell bilinear objective also attains its max at a node).
/// Throws if phi is identically +inf.
GridFunction legendre(const GridFunction& phi, const TransformOptions& opts = {});

/// Polarity transform. Output is 0 at y = 0, +inf for y outside the polar of
/// the zero set Z = {phi <= z_tol}, and otherwise
///   sup over { x : phi(x) > z_tol } of (<x,y> - 1)/phi(x),
/// where nodes with phi(x) = +inf contribute exactly 0 (c/inf = 0) and the
/// region outside the box counts as +inf, so the sup is always >= 0.
/// The empty sup is 0, matching sup(emptyset) = 0.
GridFunction polarity(const GridFunction& phi, const TransformOptions& opts = {});

/// Gauge transform: (J phi)(x) = inf { r > 0 : phi(x/r) <= 1/r }, a discrete
/// inf over a logarithmic r-grid followed by a bisection polish of the
/// bracketing interval. inf over the empty set is +inf.
GridFunction gauge(const GridFunction& phi, const TransformOptions& opts = {});

struct GaugeOptions {
  double r_min = 1e-6;
  double r_max = 1e6;
  int r_samples = 2049;
  int polish_steps = 40;
};
GridFunction gauge(const GridFunction& phi, const TransformOptions& opts, const GaugeOptions& gopts);

// z_tol used by polarity's zero-set detection.
double zero_set_tolerance(const GridFunction& phi);

/// The point map F(x, z) = (x/z, 1/z) on R^n x R^+; an involution that
/// exchanges epi-graphs and star-shaped sets. Throws if z <= 0.
struct EpiPoint {
  Point x{};
  double z = 0.0;
};
EpiPoint f_map(const EpiPoint& p, int dim);

/// |det DF(x,z)| = z^{-(n+2)}. Throws if z <= 0.
double f_jacobian_abs_det(const EpiPoint& p, int dim);

/// Finite sample of a region of R^n x R^+ (epi-graphs and their F-images).
struct EpiPointSet {
  enum class Kind { epi_sample, f_image };
  int dim = 1;
  Kind kind = Kind::epi_sample;
  std::vector<EpiPoint> points;
  // When the set was produced from a generating function, membership can be
  // decided exactly through the epigraph test instead of nearest-neighbour
  // distance. For kind == f_image of epi(phi): (w,v) in F(epi phi) iff
  // phi(w/v) < 1/v.
  std::optional<GridFunction> generator;
};

/// Samples F(epi(phi)): per grid fiber x, points (x, phi(x)+delta) for a
/// log-spaced ladder of offsets delta, mapped through f_map.
EpiPointSet epi_image(const GridFunction& phi, int samples_per_fiber = 12);

struct StarShapedReport {
  bool star_shaped = true;
  double worst_margin = 0.0;  // most positive violation of membership
  EpiPoint witness_point{};
  double witness_lambda = 1.0;
};

/// True iff lambda*p stays in the set (membership via the generator's
/// epigraph test when available, nearest-neighbour distance otherwise) for
/// every sampled point p and lambda in a sampled (0,1].
StarShapedReport check_star_shaped(const EpiPointSet& s, double tol, int lambda_samples = 16);

// Default output layout used by the transforms.
void default_output_layout(const GridFunction& in, const TransformOptions& opts, Point& lo, Point& hi,
                           std::array<int, 2>& shape);

}  // namespace polarpl
