#include "polarpl/convolutions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "polarpl/parallel.hpp"
#include "polarpl/transforms.hpp"

namespace polarpl {

std::vector<double> chebyshev_t_grid(int t_samples, std::optional<double> lambda) {
  if (t_samples < 3) throw std::invalid_argument("t_samples must be >= 3");
  std::vector<double> ts;
  ts.reserve(t_samples + 3);
  for (int i = 0; i < t_samples; ++i)
    ts.push_back(0.5 * (1.0 - std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * t_samples))));
  // Splice in the weights that make equality cases resolve exactly. The grid
  // stays symmetric under t -> 1-t.
  ts.push_back(0.5);
  if (lambda) {
    ts.push_back(*lambda);
    ts.push_back(1.0 - *lambda);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.front() <= 0.0 || ts.back() >= 1.0) throw std::invalid_argument("t grid must stay inside (0,1)");
  return ts;
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0,1)");
}

struct NodeCache {
  std::vector<double> x0, x1, v;
};

NodeCache cache_nodes(const GridFunction& f, int stride) {
  NodeCache c;
  const int s = std::max(1, stride);
  for (int i = 0; i < f.shape(0); i += s) {
    for (int j = 0; j < (f.dim() == 2 ? f.shape(1) : 1); j += s) {
      c.x0.push_back(f.coord(0, i));
      c.x1.push_back(f.dim() == 2 ? f.coord(1, j) : 0.0);
      c.v.push_back(f.at(i, j));
    }
  }
  return c;
}

GridFunction make_output(const GridFunction& phi, const GridFunction& psi, const ConvolutionParams& params,
                         bool minkowski_average, double lambda) {
  const int dim = phi.dim();
  if (psi.dim() != dim) throw std::invalid_argument("convolution: dimension mismatch");
  Point lo{}, hi{};
  std::array<int, 2> shape{1, 1};
  for (int a = 0; a < dim; ++a) {
    if (minkowski_average) {
      lo[a] = (1.0 - lambda) * phi.lo(a) + lambda * psi.lo(a);
      hi[a] = (1.0 - lambda) * phi.hi(a) + lambda * psi.hi(a);
    } else {
      lo[a] = std::min(phi.lo(a), psi.lo(a));
      hi[a] = std::max(phi.hi(a), psi.hi(a));
    }
    shape[a] = std::max(phi.shape(a), psi.shape(a));
    if (params.out_lo) lo[a] = (*params.out_lo)[a];
    if (params.out_hi) hi[a] = (*params.out_hi)[a];
    if (params.out_shape) shape[a] = (*params.out_shape)[a];
  }
  return GridFunction(dim, lo, hi, shape);
}

// Shared double-inf core:
//   out(z) = inf_t inf_x max{ wf(t) phi(x), wg(t) psi((z-(1-t)x)/t) }.
GridFunction ginf_core(const GridFunction& phi, const GridFunction& psi, const std::vector<double>& ts,
                       const std::function<double(double)>& wf, const std::function<double(double)>& wg,
                       GridFunction out, int stride) {
  const NodeCache nodes = cache_nodes(phi, stride);
  const std::size_t m = nodes.v.size();
  const int dim = out.dim();
  const int cols = dim == 2 ? out.shape(1) : 1;

  std::vector<double> wfs(ts.size()), wgs(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    wfs[k] = wf(ts[k]);
    wgs[k] = wg(ts[k]);
  }

  parallel_for_each(static_cast<std::size_t>(out.shape(0)), [&](std::size_t oi) {
    for (int oj = 0; oj < cols; ++oj) {
      const double z0 = out.coord(0, static_cast<int>(oi));
      const double z1 = dim == 2 ? out.coord(1, oj) : 0.0;
      double best = kInf;
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const double t = ts[k];
        const double a = wfs[k], b = wgs[k];
        const double inv_t = 1.0 / t;
        const double ratio = (1.0 - t) * inv_t;
        for (std::size_t n = 0; n < m; ++n) {
          const double pv = nodes.v[n];
          if (is_inf(pv)) continue;
          const double side_f = a * pv;
          if (side_f >= best) continue;  // max can only be larger
          const Point y{z0 * inv_t - ratio * nodes.x0[n], dim == 2 ? z1 * inv_t - ratio * nodes.x1[n] : 0.0};
          const double qv = psi.eval(y);
          if (is_inf(qv)) continue;
          const double cand = std::max(side_f, b * qv);
          if (cand < best) best = cand;
        }
      }
      out.at(static_cast<int>(oi), oj) = best;
    }
  });
  return out;
}

}  // namespace

GridFunction inf_conv(const GridFunction& phi, const GridFunction& psi, double lambda,
                      const ConvolutionParams& params) {
  check_lambda(lambda);
  GridFunction out = make_output(phi, psi, params, /*minkowski_average=*/true, lambda);
  const NodeCache nodes = cache_nodes(phi, params.x_stride);
  const std::size_t m = nodes.v.size();
  const int dim = out.dim();
  const int cols = dim == 2 ? out.shape(1) : 1;
  const double w1 = 1.0 - lambda, w2 = lambda;
  const double inv_l = 1.0 / lambda, ratio = (1.0 - lambda) / lambda;

  parallel_for_each(static_cast<std::size_t>(out.shape(0)), [&](std::size_t oi) {
    for (int oj = 0; oj < cols; ++oj) {
      const double z0 = out.coord(0, static_cast<int>(oi));
      const double z1 = dim == 2 ? out.coord(1, oj) : 0.0;
      double best = kInf;
      for (std::size_t n = 0; n < m; ++n) {
        const double pv = nodes.v[n];
        if (is_inf(pv)) continue;
        const double base = w1 * pv;
        if (base >= best) continue;
        const Point y{z0 * inv_l - ratio * nodes.x0[n], dim == 2 ? z1 * inv_l - ratio * nodes.x1[n] : 0.0};
        const double qv = psi.eval(y);
        if (is_inf(qv)) continue;
        const double cand = base + w2 * qv;
        if (cand < best) best = cand;
      }
      out.at(static_cast<int>(oi), oj) = best;
    }
  });
  return out;
}

GridFunction ginf_conv(const GridFunction& phi, const GridFunction& psi, double lambda,
                       const ConvolutionParams& params) {
  check_lambda(lambda);
  const auto ts = chebyshev_t_grid(params.t_samples, lambda);
  const double il = 1.0 / lambda, iml = 1.0 / (1.0 - lambda);
  return ginf_core(
      phi, psi, ts, [iml](double t) { return (1.0 - t) * iml; }, [il](double t) { return t * il; },
      make_output(phi, psi, params, false, lambda), params.x_stride);
}

GridFunction ginf_conv_unweighted(const GridFunction& phi, const GridFunction& psi,
                                  const ConvolutionParams& params) {
  const auto ts = chebyshev_t_grid(params.t_samples);
  return ginf_core(
      phi, psi, ts, [](double t) { return 1.0 - t; }, [](double t) { return t; },
      make_output(phi, psi, params, false, 0.5), params.x_stride);
}

GridFunction ginf_conv_epi_oracle(const GridFunction& phi, const GridFunction& psi, double lambda,
                                  const ConvolutionParams& params) {
  check_lambda(lambda);
  GridFunction out = make_output(phi, psi, params, false, lambda);
  const int dim = out.dim();

  // F-image samples as (w, 1/z) pairs; the fiber ladders reach from just
  // above the graph (which determines the lower envelope) to far above it.
  struct FSample {
    double w0, w1, v;
  };
  const auto sample_image = [&](const GridFunction& f) {
    std::vector<FSample> pts;
    const int L = std::max(2, params.line_samples);
    const int s = std::max(1, params.x_stride);
    for (int i = 0; i < f.shape(0); i += s) {
      for (int j = 0; j < (f.dim() == 2 ? f.shape(1) : 1); j += s) {
        const double val = f.at(i, j);
        if (is_inf(val)) continue;
        const double x0 = f.coord(0, i);
        const double x1 = f.dim() == 2 ? f.coord(1, j) : 0.0;
        const double scale = 1.0 + val;
        for (int k = 0; k < L; ++k) {
          const double z = val + scale * std::pow(10.0, -9.0 + 11.0 * k / (L - 1));
          pts.push_back({x0 / z, x1 / z, 1.0 / z});
        }
      }
    }
    return pts;
  };
  const std::vector<FSample> a = sample_image(phi);
  const std::vector<FSample> b = sample_image(psi);
  if (a.empty() || b.empty()) {
    std::fill(out.values().begin(), out.values().end(), kInf);
    return out;
  }

  const double w1 = 1.0 - lambda, w2 = lambda;
  const int n0 = out.shape(0), n1 = dim == 2 ? out.shape(1) : 1;
  const double inv_h0 = 1.0 / out.step(0);
  const double inv_h1 = dim == 2 ? 1.0 / out.step(1) : 0.0;

  // Per-thread envelopes merged by min: order-independent, so the result is
  // deterministic for any schedule.
  const std::size_t cells = out.size();
  const int workers = worker_count();
  std::vector<std::vector<double>> local(workers, std::vector<double>(cells, kInf));
  std::vector<std::size_t> owner_of_chunk;
  const std::size_t chunk = (a.size() + workers - 1) / workers;
  parallel_for(a.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double>& env = local[std::min<std::size_t>(begin / std::max<std::size_t>(chunk, 1), workers - 1)];
    for (std::size_t ia = begin; ia < end; ++ia) {
      const FSample& p = a[ia];
      for (const FSample& q : b) {
        const double cv = w1 * p.v + w2 * q.v;
        const double c0 = w1 * p.w0 + w2 * q.w0;
        const double z0 = c0 / cv;
        const int i = static_cast<int>(std::lround((z0 - out.lo(0)) * inv_h0));
        if (i < 0 || i >= n0) continue;
        int j = 0;
        if (dim == 2) {
          const double c1 = w1 * p.w1 + w2 * q.w1;
          const double z1 = c1 / cv;
          j = static_cast<int>(std::lround((z1 - out.lo(1)) * inv_h1));
          if (j < 0 || j >= n1) continue;
        }
        const double height = 1.0 / cv;
        double& cell = env[static_cast<std::size_t>(i) * n1 + j];
        if (height < cell) cell = height;
      }
    }
  });
  for (std::size_t c = 0; c < cells; ++c) {
    double m = kInf;
    for (int w = 0; w < workers; ++w) m = std::min(m, local[w][c]);
    out[c] = m;
  }
  return out;
}

GridFunction ginf_conv_m(const std::vector<GridFunction>& phis, const ConvolutionParams& params) {
  if (phis.size() < 2) throw std::invalid_argument("ginf_conv_m: need at least two functions");
  const std::size_t m = phis.size();
  if (m == 2) return ginf_conv_unweighted(phis[0], phis[1], params);
  if (m > 3) {
    // The epi-graph construction is associative; fold pairwise.
    GridFunction acc = ginf_conv_unweighted(phis[0], phis[1], params);
    for (std::size_t i = 2; i < m; ++i) acc = ginf_conv_unweighted(acc, phis[i], params);
    return acc;
  }

  // m == 3: direct inf over sampled simplex weights and decompositions
  // z = t1 x1 + t2 x2 + t3 x3.
  const GridFunction& f1 = phis[0];
  const GridFunction& f2 = phis[1];
  const GridFunction& f3 = phis[2];
  const int dim = f1.dim();
  if (f2.dim() != dim || f3.dim() != dim) throw std::invalid_argument("ginf_conv_m: dimension mismatch");

  Point lo{}, hi{};
  std::array<int, 2> shape{1, 1};
  for (int a = 0; a < dim; ++a) {
    lo[a] = std::min({f1.lo(a), f2.lo(a), f3.lo(a)});
    hi[a] = std::max({f1.hi(a), f2.hi(a), f3.hi(a)});
    shape[a] = std::max({f1.shape(a), f2.shape(a), f3.shape(a)});
    if (params.out_lo) lo[a] = (*params.out_lo)[a];
    if (params.out_hi) hi[a] = (*params.out_hi)[a];
    if (params.out_shape) shape[a] = (*params.out_shape)[a];
  }
  GridFunction out(dim, lo, hi, shape);

  // Simplex weights: product construction over a coarse interior grid plus
  // the barycenter (exact for the m-copies identity).
  const int S = std::max(5, params.t_samples / 4);
  const auto side = chebyshev_t_grid(S);
  std::vector<std::array<double, 3>> weights;
  for (double u : side)
    for (double v : side) weights.push_back({u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)});
  weights.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});

  const int stride = std::max(params.x_stride, dim == 2 ? 4 : 2);
  const NodeCache n1c = cache_nodes(f1, stride);
  const NodeCache n2c = cache_nodes(f2, stride);
  const int cols = dim == 2 ? out.shape(1) : 1;

  parallel_for_each(static_cast<std::size_t>(out.shape(0)), [&](std::size_t oi) {
    for (int oj = 0; oj < cols; ++oj) {
      const double z0 = out.coord(0, static_cast<int>(oi));
      const double z1 = dim == 2 ? out.coord(1, oj) : 0.0;
      double best = kInf;
      for (const auto& t : weights) {
        const double inv_t3 = 1.0 / t[2];
        for (std::size_t i = 0; i < n1c.v.size(); ++i) {
          const double v1 = n1c.v[i];
          if (is_inf(v1)) continue;
          const double s1 = t[0] * v1;
          if (s1 >= best) continue;
          for (std::size_t j = 0; j < n2c.v.size(); ++j) {
            const double v2 = n2c.v[j];
            if (is_inf(v2)) continue;
            const double s2 = std::max(s1, t[1] * v2);
            if (s2 >= best) continue;
            const Point x3{(z0 - t[0] * n1c.x0[i] - t[1] * n2c.x0[j]) * inv_t3,
                           dim == 2 ? (z1 - t[0] * n1c.x1[i] - t[1] * n2c.x1[j]) * inv_t3 : 0.0};
            const double v3 = f3.eval(x3);
            if (is_inf(v3)) continue;
            const double cand = std::max(s2, t[2] * v3);
            if (cand < best) best = cand;
          }
        }
      }
      out.at(static_cast<int>(oi), oj) = best;
    }
  });
  return out;
}

PolarSumResult polar_of_sum(const GridFunction& phi, const GridFunction& psi, const ConvolutionParams& params) {
  GridFunction psi_aligned =
      phi.same_layout(psi) ? psi
                           : resample(psi, phi.dim(), {phi.lo(0), phi.lo(1)}, {phi.hi(0), phi.hi(1)},
                                      {phi.shape(0), phi.dim() == 2 ? phi.shape(1) : 1});
  GridFunction direct = polarity(add(phi, psi_aligned));
  GridFunction a_phi = polarity(phi);
  GridFunction a_psi = polarity(psi);
  ConvolutionParams p = params;
  p.out_lo = Point{direct.lo(0), direct.lo(1)};
  p.out_hi = Point{direct.hi(0), direct.hi(1)};
  p.out_shape = {direct.shape(0), direct.dim() == 2 ? direct.shape(1) : 1};
  GridFunction formula = ginf_conv_unweighted(a_phi, a_psi, p);
  return {std::move(formula), std::move(direct)};
}

std::string theorem_name(Theorem t) {
  switch (t) {
    case Theorem::classical: return "classical-pl";
    case Theorem::polar: return "polar-pl";
    case Theorem::lp: return "lp";
  }
  return "?";
}

GridFunction minimal_h(const GridFunction& f, const GridFunction& g, double lambda, Theorem theorem, double p,
                       const ConvolutionParams& params) {
  check_lambda(lambda);
  (void)p;
  if (!f.same_layout(g)) throw std::invalid_argument("minimal_h: f and g must share a layout");
  if (f.max_finite() <= 0.0 || g.max_finite() <= 0.0)
    throw std::domain_error("minimal_h: degenerate instance (f or g identically zero)");
  ConvolutionParams prm = params;
  if (!prm.out_lo) {
    prm.out_lo = Point{f.lo(0), f.lo(1)};
    prm.out_hi = Point{f.hi(0), f.hi(1)};
    prm.out_shape = {f.shape(0), f.dim() == 2 ? f.shape(1) : 1};
  }
  const double tol = 1.0 + 1e-12;
  switch (theorem) {
    case Theorem::classical: {
      if (f.max_finite() > tol || g.max_finite() > tol)
        throw std::domain_error("minimal_h(classical): f, g must map into [0,1]; rescale first");
      return exp_neg(inf_conv(neg_log(f), neg_log(g), lambda, prm));
    }
    case Theorem::polar: {
      if (f.max_finite() > tol || g.max_finite() > tol)
        throw std::domain_error("minimal_h(polar): f, g must map into [0,1]; rescale first");
      return exp_neg(ginf_conv(neg_log(f), neg_log(g), lambda, prm));
    }
    case Theorem::lp: {
      const double wf = 1.0 - lambda, wg = lambda;
      GridFunction phi = map(f, [wf](double v) { return v == 0.0 ? kInf : wf / v; });
      GridFunction psi = map(g, [wg](double v) { return v == 0.0 ? kInf : wg / v; });
      GridFunction eta = ginf_conv(phi, psi, lambda, prm);
      return map(eta, [](double v) {
        if (is_inf(v)) return 0.0;
        return v == 0.0 ? kInf : 1.0 / v;
      });
    }
  }
  throw std::logic_error("minimal_h: unknown theorem");
}

HypothesisReport check_hypothesis(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                                  double lambda, Theorem theorem, const ConvolutionParams& params,
                                  double tolerance) {
  check_lambda(lambda);
  HypothesisReport rep;
  rep.tolerance = tolerance;

  // Work with the same dual representation the minimal-h construction uses
  // (phi-space for the exponent theorems, reciprocal space for lp); the
  // sweep then reproduces the construction's infimum exactly and a
  // constructed h never false-fails on interpolation noise.
  GridFunction df = theorem == Theorem::lp
                        ? map(f, [lambda](double v) { return v == 0.0 ? kInf : (1.0 - lambda) / v; })
                        : neg_log(f);
  GridFunction dg = theorem == Theorem::lp ? map(g, [lambda](double v) { return v == 0.0 ? kInf : lambda / v; })
                                           : neg_log(g);

  std::vector<double> ts;
  if (theorem == Theorem::classical)
    ts = {lambda};
  else
    ts = chebyshev_t_grid(params.t_samples, lambda);

  const NodeCache nodes = cache_nodes(df, params.x_stride);
  const int dim = h.dim();
  const int cols = dim == 2 ? h.shape(1) : 1;
  const double iml = 1.0 / (1.0 - lambda), il = 1.0 / lambda;

  struct Worst {
    double violation = kInf;  // LHS - RHS, most negative tracked
    double t = 0.0;
    Point x{}, y{};
  };
  std::vector<Worst> per_row(static_cast<std::size_t>(h.shape(0)));

  parallel_for_each(static_cast<std::size_t>(h.shape(0)), [&](std::size_t oi) {
    Worst w;
    w.violation = kInf;
    double worst_gap = -kInf;  // max over z of RHS(z) - LHS(z)
    for (int oj = 0; oj < cols; ++oj) {
      const double z0 = h.coord(0, static_cast<int>(oi));
      const double z1 = dim == 2 ? h.coord(1, oj) : 0.0;
      const double lhs_raw = h.at(static_cast<int>(oi), oj);

      // best dual value over candidates = the construction's infimum at z
      double best = kInf;
      double best_t = 0.0;
      Point best_x{}, best_y{};
      for (double t : ts) {
        const double a = theorem == Theorem::classical ? 1.0 - lambda : (1.0 - t) * iml;
        const double b = theorem == Theorem::classical ? lambda : t * il;
        const double tt = theorem == Theorem::classical ? lambda : t;
        const double inv_t = 1.0 / tt;
        const double ratio = (1.0 - tt) * inv_t;
        for (std::size_t n = 0; n < nodes.v.size(); ++n) {
          const double pv = nodes.v[n];
          if (is_inf(pv)) continue;
          const double side_f = a * pv;
          if (theorem != Theorem::classical && side_f >= best) continue;
          const Point y{z0 * inv_t - ratio * nodes.x0[n], dim == 2 ? z1 * inv_t - ratio * nodes.x1[n] : 0.0};
          const double qv = dg.eval(y);
          if (is_inf(qv)) continue;
          const double cand = theorem == Theorem::classical ? side_f + b * qv : std::max(side_f, b * qv);
          if (cand < best) {
            best = cand;
            best_t = tt;
            best_x = {nodes.x0[n], nodes.x1[n]};
            best_y = y;
          }
        }
      }
      if (is_inf(best)) continue;  // RHS = 0 everywhere on this fiber
      // RHS in value space
      const double rhs = theorem == Theorem::lp ? 1.0 / best : std::exp(-best);
      const double lhs = is_inf(lhs_raw) ? kInf : lhs_raw;
      const double gap = rhs - lhs;  // positive = violated by that much
      if (gap > worst_gap) {
        worst_gap = gap;
        w.violation = lhs - rhs;
        w.t = best_t;
        w.x = best_x;
        w.y = best_y;
      }
    }
    per_row[oi] = w;
  });

  rep.worst_violation = 0.0;
  bool found = false;
  for (const auto& w : per_row) {
    if (is_inf(w.violation)) continue;
    if (!found || w.violation < rep.worst_violation) {
      rep.worst_violation = w.violation;
      rep.witness_t = w.t;
      rep.witness_x = w.x;
      rep.witness_y = w.y;
      found = true;
    }
  }
  if (!found) rep.worst_violation = 0.0;
  rep.passed = rep.worst_violation >= -tolerance;
  return rep;
}

}  // namespace polarpl
