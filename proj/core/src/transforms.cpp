#include "polarpl/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polarpl/geometry.hpp"
#include "polarpl/parallel.hpp"

namespace polarpl {

void default_output_layout(const GridFunction& in, const TransformOptions& opts, Point& lo, Point& hi,
                           std::array<int, 2>& shape) {
  for (int a = 0; a < in.dim(); ++a) {
    lo[a] = opts.out_lo ? (*opts.out_lo)[a] : in.lo(a) * opts.factor;
    hi[a] = opts.out_hi ? (*opts.out_hi)[a] : in.hi(a) * opts.factor;
    shape[a] = opts.out_shape ? (*opts.out_shape)[a] : in.shape(a);
  }
  if (in.dim() == 1) {
    lo[1] = hi[1] = 0.0;
    shape[1] = 1;
  }
}

double zero_set_tolerance(const GridFunction& phi) { return 1e-9 * (1.0 + phi.max_finite()); }

bool PolarSet::contains(const Point& y, double tol) const {
  for (const Point& g : generators) {
    double dot = g[0] * y[0];
    if (dim == 2) dot += g[1] * y[1];
    if (dot > 1.0 + tol) return false;
  }
  return true;
}

PolarSet polar_set(std::span<const Point> pts, int dim) {
  if (pts.empty()) throw std::invalid_argument("polar_set: empty set");
  PolarSet ps;
  ps.dim = dim;
  if (dim == 1) {
    // Only the two extremes constrain the polar.
    double mn = pts[0][0], mx = pts[0][0];
    for (const Point& p : pts) {
      mn = std::min(mn, p[0]);
      mx = std::max(mx, p[0]);
    }
    ps.generators.push_back({mn, 0.0});
    if (mx != mn) ps.generators.push_back({mx, 0.0});
  } else {
    std::vector<Point2> raw(pts.begin(), pts.end());
    auto hull = convex_hull_2d(std::move(raw));
    for (const Point2& p : hull) ps.generators.push_back({p[0], p[1]});
  }
  return ps;
}

PolarSet polar_set(const GridFunction& k, double level) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] <= level) pts.push_back(k.node_point(i));
  return polar_set(std::span<const Point>(pts), k.dim());
}

GridFunction legendre(const GridFunction& phi, const TransformOptions& opts) {
  if (phi.all_infinite())
    throw std::domain_error("legendre: phi is identically +inf; the transform leaves [0,inf]");
  Point lo, hi;
  std::array<int, 2> shape{};
  default_output_layout(phi, opts, lo, hi, shape);
  GridFunction out(phi.dim(), lo, hi, shape);

  const int in0 = phi.shape(0), in1 = phi.dim() == 2 ? phi.shape(1) : 1;
  const std::size_t rows = static_cast<std::size_t>(shape[0]);
  parallel_for_each(rows, [&](std::size_t oi) {
    for (int oj = 0; oj < (out.dim() == 2 ? shape[1] : 1); ++oj) {
      const double y0 = out.coord(0, static_cast<int>(oi));
      const double y1 = out.dim() == 2 ? out.coord(1, oj) : 0.0;
      double best = -kInf;
      for (int i = 0; i < in0; ++i) {
        const double x0y = phi.coord(0, i) * y0;
        for (int j = 0; j < in1; ++j) {
          const double v = phi.at(i, j);
          if (is_inf(v)) continue;
          const double cand = (phi.dim() == 2 ? x0y + phi.coord(1, j) * y1 : x0y) - v;
          if (cand > best) best = cand;
        }
      }
      out.at(static_cast<int>(oi), oj) = best;
    }
  });
  return out;
}

GridFunction polarity(const GridFunction& phi, const TransformOptions& opts) {
  Point lo, hi;
  std::array<int, 2> shape{};
  default_output_layout(phi, opts, lo, hi, shape);
  GridFunction out(phi.dim(), lo, hi, shape);

  const double ztol = zero_set_tolerance(phi);
  std::vector<Point> zero_nodes;
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (phi[i] <= ztol) zero_nodes.push_back(phi.node_point(i));
  std::optional<PolarSet> zpolar;
  if (!zero_nodes.empty()) zpolar = polar_set(std::span<const Point>(zero_nodes), phi.dim());

  // Collect the nodes that feed the sup once: coordinates and values with
  // phi > ztol and phi finite. The infinite region (both infinite nodes and
  // everything outside the box) contributes exactly 0 = (<x,y>-1)/inf, which
  // is the seed of the sup below; this is what truncates the sup at 0 on
  // functions with bounded effective domain.
  std::vector<double> xs0, xs1, vals;
  xs0.reserve(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double v = phi[i];
    if (v > ztol && is_finite(v)) {
      const Point p = phi.node_point(i);
      xs0.push_back(p[0]);
      xs1.push_back(p[1]);
      vals.push_back(v);
    }
  }

  const std::size_t m = vals.size();
  const std::size_t rows = static_cast<std::size_t>(shape[0]);
  parallel_for_each(rows, [&](std::size_t oi) {
    for (int oj = 0; oj < (out.dim() == 2 ? shape[1] : 1); ++oj) {
      const Point y{out.coord(0, static_cast<int>(oi)), out.dim() == 2 ? out.coord(1, oj) : 0.0};
      if (zpolar && !zpolar->contains(y)) {
        out.at(static_cast<int>(oi), oj) = kInf;
        continue;
      }
      double best = 0.0;
      if (out.dim() == 2) {
        for (std::size_t k = 0; k < m; ++k) {
          const double cand = (xs0[k] * y[0] + xs1[k] * y[1] - 1.0) / vals[k];
          if (cand > best) best = cand;
        }
      } else {
        for (std::size_t k = 0; k < m; ++k) {
          const double cand = (xs0[k] * y[0] - 1.0) / vals[k];
          if (cand > best) best = cand;
        }
      }
      out.at(static_cast<int>(oi), oj) = best;
    }
  });
  return out;
}

GridFunction gauge(const GridFunction& phi, const TransformOptions& opts) { return gauge(phi, opts, {}); }

GridFunction gauge(const GridFunction& phi, const TransformOptions& opts, const GaugeOptions& gopts) {
  Point lo, hi;
  std::array<int, 2> shape{};
  TransformOptions o = opts;
  default_output_layout(phi, o, lo, hi, shape);
  GridFunction out(phi.dim(), lo, hi, shape);

  std::vector<double> rgrid(gopts.r_samples);
  const double llo = std::log(gopts.r_min), lhi = std::log(gopts.r_max);
  for (int k = 0; k < gopts.r_samples; ++k)
    rgrid[k] = std::exp(llo + (lhi - llo) * k / (gopts.r_samples - 1));

  const auto qualifies = [&](const Point& x, double r) {
    const Point xr{x[0] / r, phi.dim() == 2 ? x[1] / r : 0.0};
    const double v = phi.eval(xr);
    return is_finite(v) && v <= 1.0 / r;
  };

  const std::size_t rows = static_cast<std::size_t>(shape[0]);
  parallel_for_each(rows, [&](std::size_t oi) {
    for (int oj = 0; oj < (out.dim() == 2 ? shape[1] : 1); ++oj) {
      const Point x{out.coord(0, static_cast<int>(oi)), out.dim() == 2 ? out.coord(1, oj) : 0.0};
      int first = -1;
      for (int k = 0; k < gopts.r_samples; ++k) {
        if (qualifies(x, rgrid[k])) {
          first = k;
          break;
        }
      }
      double result = kInf;
      if (first >= 0) {
        // Polish the bracket [previous non-qualifying r, first qualifying r].
        double hi_r = rgrid[first];
        double lo_r = first > 0 ? rgrid[first - 1] : 0.0;
        for (int s = 0; s < gopts.polish_steps; ++s) {
          const double mid = 0.5 * (lo_r + hi_r);
          if (mid <= 0.0) break;
          if (qualifies(x, mid))
            hi_r = mid;
          else
            lo_r = mid;
        }
        result = hi_r;
      }
      out.at(static_cast<int>(oi), oj) = result;
    }
  });
  return out;
}

EpiPoint f_map(const EpiPoint& p, int dim) {
  if (!(p.z > 0.0)) throw std::domain_error("f_map: z must be strictly positive");
  EpiPoint q;
  q.x[0] = p.x[0] / p.z;
  if (dim == 2) q.x[1] = p.x[1] / p.z;
  q.z = 1.0 / p.z;
  return q;
}

double f_jacobian_abs_det(const EpiPoint& p, int dim) {
  if (!(p.z > 0.0)) throw std::domain_error("f_jacobian_abs_det: z must be strictly positive");
  return std::pow(p.z, -(dim + 2));
}

EpiPointSet epi_image(const GridFunction& phi, int samples_per_fiber) {
  EpiPointSet s;
  s.dim = phi.dim();
  s.kind = EpiPointSet::Kind::f_image;
  s.generator = phi;
  const int S = std::max(2, samples_per_fiber);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double v = phi[i];
    if (!is_finite(v)) continue;  // empty fiber
    const Point x = phi.node_point(i);
    const double scale = 1.0 + v;
    for (int k = 0; k < S; ++k) {
      // offsets from 1e-9 to 1e2 of the fiber scale, log-spaced
      const double delta = scale * std::pow(10.0, -9.0 + 11.0 * k / (S - 1));
      s.points.push_back(f_map(EpiPoint{x, v + delta}, phi.dim()));
    }
  }
  return s;
}

StarShapedReport check_star_shaped(const EpiPointSet& s, double tol, int lambda_samples) {
  if (s.points.empty()) throw std::invalid_argument("check_star_shaped: empty set");
  StarShapedReport rep;
  rep.worst_margin = -kInf;

  const auto membership_margin = [&](const EpiPoint& q) -> double {
    // positive margin = outside the set by that much
    if (s.generator) {
      if (s.kind == EpiPointSet::Kind::f_image) {
        // (w, v) in F(epi phi)  iff  phi(w/v) < 1/v
        const Point u{q.x[0] / q.z, s.dim == 2 ? q.x[1] / q.z : 0.0};
        const double v = s.generator->eval(u);
        return is_inf(v) ? kInf : v - 1.0 / q.z;
      }
      // epi sample: (x, z) in epi(phi) iff phi(x) < z
      const double v = s.generator->eval(q.x);
      return is_inf(v) ? kInf : v - q.z;
    }
    double best = kInf;
    for (const EpiPoint& p : s.points) {
      double d2 = (p.x[0] - q.x[0]) * (p.x[0] - q.x[0]) + (p.z - q.z) * (p.z - q.z);
      if (s.dim == 2) d2 += (p.x[1] - q.x[1]) * (p.x[1] - q.x[1]);
      best = std::min(best, d2);
    }
    return std::sqrt(best);
  };

  for (const EpiPoint& p : s.points) {
    for (int j = 1; j <= lambda_samples; ++j) {
      const double lam = static_cast<double>(j) / lambda_samples;
      EpiPoint q{{lam * p.x[0], lam * p.x[1]}, lam * p.z};
      const double margin = membership_margin(q);
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.witness_point = p;
        rep.witness_lambda = lam;
      }
    }
  }
  rep.star_shaped = rep.worst_margin <= tol;
  return rep;
}

}  // namespace polarpl
