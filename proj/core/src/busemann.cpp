#include "polarpl/busemann.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "polarpl/convolutions.hpp"
#include "polarpl/parallel.hpp"
#include "polarpl/rng.hpp"

namespace polarpl {

AmbientFn zero_potential() {
  return [](const Vec4&) { return 0.0; };
}

AmbientFn max_affine_potential(std::vector<std::pair<Vec4, double>> terms) {
  if (terms.empty()) return zero_potential();
  return [terms = std::move(terms)](const Vec4& q) {
    double v = -kInf;
    for (const auto& [a, b] : terms) {
      double dot = b;
      for (int i = 0; i < 4; ++i) dot += a[i] * q[i];
      v = std::max(v, dot);
    }
    return v;
  };
}

AmbientFn alpha_plus_z_potential(GridFunction alpha, int n) {
  return [alpha = std::move(alpha), n](const Vec4& q) {
    const double a = alpha.eval({q[0], n == 2 ? q[1] : 0.0});
    return is_inf(a) ? kInf : a + q[n + 1];
  };
}

Vec4 SlabRegion::ambient(const Point& x, double r) const {
  const double nu = std::hypot(u[0], u[1]);
  Vec4 q{};
  q[0] = x[0];
  if (n == 2) q[1] = x[1];
  q[n] = r * u[0] / nu;
  q[n + 1] = r * u[1] / nu;
  return q;
}

bool SlabRegion::contains(const Point& x, double r, double tol) const {
  const double lo = r_lo.eval(x);
  if (is_inf(lo) || r < lo - tol) return false;
  if (r_hi) {
    const double hi = r_hi->eval(x);
    if (is_inf(hi) || r > hi + tol) return false;
  }
  return true;
}

namespace {

double norm2(const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); }

struct SliceFrame {
  double n0 = 1.0, n1 = 1.0, nl = 1.0;  // |x0|, |x1|, |x_lambda|
  double lambda = 0.5;
};

// Exact crossing of the segment between p = (x_p, r_p along u0) and
// q = (x_q, r_q along u1) with the half-space H_{x_lambda}. The crossing
// parameter solves the 2x2 system in the (s,z)-plane.
struct Crossing {
  Point x{};
  double r = 0.0;
  double t = 0.0;
};

bool segment_crossing(const SliceFrame& fr, const Point& xp, double rp, const Point& xq, double rq,
                      Crossing& out) {
  const double num = rp * fr.lambda * fr.n1;
  const double den = num + rq * (1.0 - fr.lambda) * fr.n0;
  if (den <= 0.0) return false;  // both endpoints on E; handled by the caller
  const double t = num / den;
  const double c = t * rq / (fr.lambda * fr.n1);
  out.t = t;
  out.r = c * fr.nl;
  out.x[0] = (1.0 - t) * xp[0] + t * xq[0];
  out.x[1] = (1.0 - t) * xp[1] + t * xq[1];
  return true;
}

struct FiberSamples {
  std::vector<Point> x;
  std::vector<double> lo, hi;  // hi = +inf when unbounded
};

FiberSamples fiber_table(const SlabRegion& k) {
  FiberSamples fs;
  const GridFunction& g = k.r_lo;
  for (int i = 0; i < g.shape(0); ++i) {
    for (int j = 0; j < (g.dim() == 2 ? g.shape(1) : 1); ++j) {
      const double lo = g.at(i, j);
      if (is_inf(lo)) continue;
      double hi = kInf;
      if (k.r_hi) {
        hi = k.r_hi->at(i, j);
        if (is_inf(hi) || hi < lo) continue;
      }
      fs.x.push_back({g.coord(0, i), g.dim() == 2 ? g.coord(1, j) : 0.0});
      fs.lo.push_back(lo);
      fs.hi.push_back(hi);
    }
  }
  return fs;
}

}  // namespace

KLambdaResult build_k_lambda(const SlabRegion& k0, const SlabRegion& k1, const std::array<double, 2>& x0,
                             const std::array<double, 2>& x1, double lambda, const KLambdaOptions& opts) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("build_k_lambda: lambda must be in (0,1)");
  const double det = x0[0] * x1[1] - x0[1] * x1[0];
  if (std::abs(det) <= 1e-12 * norm2(x0) * norm2(x1))
    throw std::invalid_argument("build_k_lambda: x0 and x1 must be linearly independent");
  const bool unbounded = !k0.r_hi && !k1.r_hi;
  if (static_cast<bool>(k0.r_hi) != static_cast<bool>(k1.r_hi))
    throw std::invalid_argument("build_k_lambda: mixed bounded/unbounded sets are not supported");

  SliceFrame fr;
  fr.n0 = norm2(x0);
  fr.n1 = norm2(x1);
  fr.lambda = lambda;
  const std::array<double, 2> xl{(1.0 - lambda) * x0[0] + lambda * x1[0],
                                 (1.0 - lambda) * x0[1] + lambda * x1[1]};
  fr.nl = norm2(xl);

  const FiberSamples f0 = fiber_table(k0);
  const FiberSamples f1 = fiber_table(k1);
  if (f0.x.empty() || f1.x.empty()) throw std::invalid_argument("build_k_lambda: K0 or K1 is empty");

  std::vector<Crossing> crossings;
  crossings.reserve(f0.x.size() * 4 + opts.pair_samples);

  // Boundary pairs trace the radial envelopes (the crossing height is
  // monotone in both endpoint heights); random interior pairs fill the
  // fibers in between.
  const double cap0 = 40.0, cap1 = 40.0;  // surrogate heights for ladders
  const auto boundary_vals = [&](const FiberSamples& fs, std::size_t i) {
    std::array<double, 2> v{fs.lo[i], fs.hi[i]};
    if (is_inf(v[1])) v[1] = fs.lo[i] + cap0;
    return v;
  };
  Crossing c;
  for (std::size_t i = 0; i < f0.x.size(); ++i) {
    const auto b0 = boundary_vals(f0, i);
    for (std::size_t j = 0; j < f1.x.size(); ++j) {
      const auto b1 = boundary_vals(f1, j);
      for (double rp : b0)
        for (double rq : b1)
          if (segment_crossing(fr, f0.x[i], rp, f1.x[j], rq, c)) crossings.push_back(c);
      if (b0[0] <= 1e-12 && b1[0] <= 1e-12) {
        // both fibers touch E; the whole segment of base points lies in H_l
        for (int s = 1; s < 8; ++s) {
          const double t = s / 8.0;
          crossings.push_back({{(1.0 - t) * f0.x[i][0] + t * f1.x[j][0],
                                (1.0 - t) * f0.x[i][1] + t * f1.x[j][1]},
                               0.0, t});
        }
      }
    }
  }
  Rng rng(opts.seed, 0xB05E);
  for (int k = 0; k < opts.pair_samples; ++k) {
    const std::size_t i = rng.below(f0.x.size());
    const std::size_t j = rng.below(f1.x.size());
    const double hi0 = is_inf(f0.hi[i]) ? f0.lo[i] + cap0 : f0.hi[i];
    const double hi1 = is_inf(f1.hi[j]) ? f1.lo[j] + cap1 : f1.hi[j];
    const double rp = rng.uniform(f0.lo[i], hi0);
    const double rq = rng.uniform(f1.lo[j], hi1);
    if (segment_crossing(fr, f0.x[i], rp, f1.x[j], rq, c)) crossings.push_back(c);
  }
  if (crossings.empty()) throw std::runtime_error("build_k_lambda: empty slice (x_lambda outside the cone)");

  // Fit the fiber-interval region on a fresh grid over the crossing extent.
  const int dim = k0.r_lo.dim();
  Point lo{kInf, kInf}, hi{-kInf, -kInf};
  for (const Crossing& cr : crossings) {
    for (int a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], cr.x[a]);
      hi[a] = std::max(hi[a], cr.x[a]);
    }
  }
  std::array<int, 2> shape{opts.out_shape[0], dim == 2 ? opts.out_shape[1] : 1};
  for (int a = 0; a < dim; ++a) {
    const double pad = std::max(1e-9, 1e-6 * (hi[a] - lo[a]));
    lo[a] -= pad;
    hi[a] += pad;
  }
  GridFunction rlo(dim, lo, hi, shape);
  GridFunction rhi(dim, lo, hi, shape);
  std::fill(rlo.values().begin(), rlo.values().end(), kInf);
  std::fill(rhi.values().begin(), rhi.values().end(), -1.0);
  const double ih0 = 1.0 / rlo.step(0);
  const double ih1 = dim == 2 ? 1.0 / rlo.step(1) : 0.0;
  for (const Crossing& cr : crossings) {
    const int i = std::clamp(static_cast<int>(std::lround((cr.x[0] - rlo.lo(0)) * ih0)), 0, shape[0] - 1);
    const int j = dim == 2 ? std::clamp(static_cast<int>(std::lround((cr.x[1] - rlo.lo(1)) * ih1)), 0,
                                        shape[1] - 1)
                           : 0;
    double& lo_cell = rlo.at(i, j);
    double& hi_cell = rhi.at(i, j);
    lo_cell = std::min(lo_cell, cr.r);
    hi_cell = std::max(hi_cell, cr.r);
  }
  for (std::size_t idx = 0; idx < rhi.size(); ++idx)
    if (rhi[idx] < 0.0) rhi[idx] = kInf;  // empty fiber marker in both grids

  KLambdaResult res;
  res.region.n = dim;
  res.region.u = xl;
  res.region.r_lo = std::move(rlo);
  if (!unbounded) res.region.r_hi = std::move(rhi);
  res.points.reserve(crossings.size());
  for (const Crossing& cr : crossings) {
    SlabRegion tmp = res.region;
    res.points.push_back(tmp.ambient(cr.x, cr.r));
  }
  return res;
}

double slab_integral(const SlabRegion& k, const AmbientFn& psi, const SlabIntegralOptions& opts) {
  const GridFunction& g = k.r_lo;
  const int dim = g.dim();
  const int cols = dim == 2 ? g.shape(1) : 1;
  const double cell = g.step(0) * (dim == 2 ? g.step(1) : 1.0);

  std::vector<double> fiber_vals(g.size(), 0.0);
  parallel_for_each(static_cast<std::size_t>(g.shape(0)), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < cols; ++j) {
      const double r0 = g.at(i, j);
      if (is_inf(r0)) continue;
      const Point x{g.coord(0, i), dim == 2 ? g.coord(1, j) : 0.0};
      const auto integrand = [&](double r) {
        const double v = psi(k.ambient(x, r));
        return is_inf(v) ? 0.0 : std::exp(-v);
      };
      double total = 0.0;
      if (k.r_hi) {
        const double r1 = k.r_hi->at(i, j);
        if (is_inf(r1) || r1 <= r0) continue;
        const int m = opts.r_samples;
        const double hr = (r1 - r0) / m;
        for (int s = 0; s < m; ++s) total += integrand(r0 + (s + 0.5) * hr) * hr;
      } else {
        // March blocks until the log-concave tail is exhausted.
        const double psi0 = psi(k.ambient(x, r0));
        if (is_inf(psi0)) continue;
        double r = r0;
        const double block = std::max(1.0, 0.05 * (std::abs(r0) + 1.0));
        const int per_block = std::max(16, opts.r_samples / 16);
        int guard = 0;
        while (true) {
          const double hr = block / per_block;
          double part = 0.0;
          for (int s = 0; s < per_block; ++s) part += integrand(r + (s + 0.5) * hr) * hr;
          total += part;
          r += block;
          const double psir = psi(k.ambient(x, r));
          if (is_finite(psir) && psir - psi0 > opts.r_cut) break;
          if (part < 1e-14 * (1.0 + total)) break;
          if (r > opts.r_cap || ++guard > 100000)
            throw std::runtime_error("slab_integral: divergent fiber at x = " + std::to_string(x[0]));
        }
      }
      fiber_vals[g.flat_index(i, j)] = total;
    }
  });

  // Trapezoid weights across the fiber grid.
  double sum = 0.0;
  for (int i = 0; i < g.shape(0); ++i) {
    const double wi = (i == 0 || i == g.shape(0) - 1) ? 0.5 : 1.0;
    for (int j = 0; j < cols; ++j) {
      const double wj = (dim == 2 && (j == 0 || j == cols - 1)) ? 0.5 : 1.0;
      sum += wi * wj * fiber_vals[g.flat_index(i, j)];
    }
  }
  return sum * cell;
}

VerificationReport verify_busemann(const BusemannInstance& inst, const BusemannOptions& opts) {
  const double l = inst.lambda;
  if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("verify_busemann: lambda must be in (0,1)");
  const double det = inst.x0[0] * inst.x1[1] - inst.x0[1] * inst.x1[0];
  if (std::abs(det) <= 1e-12 * norm2(inst.x0) * norm2(inst.x1))
    throw std::invalid_argument("verify_busemann: x0 and x1 must be linearly independent");

  const std::array<double, 2> xl{(1.0 - l) * inst.x0[0] + l * inst.x1[0],
                                 (1.0 - l) * inst.x0[1] + l * inst.x1[1]};
  SliceFrame fr{norm2(inst.x0), norm2(inst.x1), norm2(xl), l};

  VerificationReport rep;
  rep.theorem = "busemann";
  rep.rel_tol = opts.rel_tol;
  rep.grid_shape = {inst.k0.r_lo.shape(0)};
  rep.t_samples = opts.k_lambda.t_samples;
  rep.instance = {{"descriptor", inst.descriptor}, {"lambda", l}};
  rep.hypothesis_checked = true;

  SlabRegion klam;
  if (inst.k_lambda) {
    klam = *inst.k_lambda;
    // Hypothesis inclusion spot-check: sampled crossings must land inside.
    const FiberSamples f0 = fiber_table(inst.k0);
    const FiberSamples f1 = fiber_table(inst.k1);
    Rng rng(99, 0x17C);
    const double tol = opts.inclusion_tol_factor *
                       (klam.r_lo.h_max() + inst.k0.r_lo.h_max() + inst.k1.r_lo.h_max());
    for (int s = 0; s < opts.inclusion_samples; ++s) {
      const std::size_t i = rng.below(f0.x.size());
      const std::size_t j = rng.below(f1.x.size());
      const double hi0 = is_inf(f0.hi[i]) ? f0.lo[i] + 40.0 : f0.hi[i];
      const double hi1 = is_inf(f1.hi[j]) ? f1.lo[j] + 40.0 : f1.hi[j];
      Crossing c;
      if (!segment_crossing(fr, f0.x[i], rng.uniform(f0.lo[i], hi0), f1.x[j], rng.uniform(f1.lo[j], hi1), c))
        continue;
      if (!klam.contains(c.x, c.r, tol)) {
        std::ostringstream os;
        os << "verify_busemann: supplied K_lambda violates the hypothesis inclusion at witness (x=" << c.x[0];
        if (inst.n == 2) os << "," << c.x[1];
        os << ", r=" << c.r << ", t=" << c.t << ")";
        throw std::runtime_error(os.str());
      }
    }
  } else {
    klam = build_k_lambda(inst.k0, inst.k1, inst.x0, inst.x1, l, opts.k_lambda).region;
  }

  const auto sides = [&](const SlabIntegralOptions& io) {
    const double i0 = slab_integral(inst.k0, inst.psi, io);
    const double i1 = slab_integral(inst.k1, inst.psi, io);
    const double il = slab_integral(klam, inst.psi, io);
    if (i0 <= 0.0 || i1 <= 0.0 || il <= 0.0)
      throw std::runtime_error("verify_busemann: a section integral vanishes");
    const double lhs = fr.nl / il;
    const double rhs = (1.0 - l) * fr.n0 / i0 + l * fr.n1 / i1;
    return std::array<double, 3>{lhs, rhs, rhs * (1.0 + opts.rel_tol) - lhs};
  };
  const auto fin = sides(opts.integral);
  SlabIntegralOptions coarse = opts.integral;
  coarse.r_samples = std::max(32, opts.integral.r_samples / 2);
  const auto prev = sides(coarse);

  rep.lhs = fin[0];
  rep.rhs = fin[1];
  rep.margin = rep.lhs - rep.rhs;  // <= 0 is the good direction here
  if ((prev[2] < 0.0) != (fin[2] < 0.0))
    rep.verdict = Verdict::inconclusive;
  else
    rep.verdict = fin[2] >= 0.0 ? Verdict::pass : Verdict::fail;
  return rep;
}

Vec4 f_tilde(const Vec4& q, int n) {
  const double z = q[n + 1];
  if (!(z > 0.0)) throw std::domain_error("f_tilde: z must be strictly positive");
  Vec4 out{};
  for (int i = 0; i <= n; ++i) out[i] = q[i] / z;
  out[n + 1] = 1.0 / z;
  return out;
}

ReductionReport reduction_check(const ReductionEmbedding& emb, const ReductionOptions& opts) {
  if (!(emb.s0 > 0.0 && emb.s1 > emb.s0))
    throw std::invalid_argument("reduction_check: need 0 < s0 < s1");
  const int n = emb.phi0.dim();
  const double l = emb.lambda;
  const double sl = (1.0 - l) * emb.s0 + l * emb.s1;
  ReductionReport rep;

  GridFunction phil = emb.phi_lambda ? *emb.phi_lambda : ginf_conv(emb.phi0, emb.phi1, l, opts.conv);
  const AmbientFn psi = alpha_plus_z_potential(emb.alpha, n);

  // (a) integral identity for i = 0, lambda, 1
  const std::array<const GridFunction*, 3> phis{&emb.phi0, &phil, &emb.phi1};
  const std::array<double, 3> svals{emb.s0, sl, emb.s1};
  const DensityFn weight = [&](const Point& x) {
    const double a = emb.alpha.eval(x);
    return is_inf(a) ? 0.0 : std::exp(-a);
  };
  for (int i = 0; i < 3; ++i) {
    const double ci = std::hypot(1.0, svals[i]);
    SlabRegion ki;
    ki.n = n;
    ki.u = {svals[i], 1.0};
    ki.r_lo = map(*phis[i], [ci](double v) { return is_inf(v) ? v : ci * v; });
    const double left = integrate_exp_neg(*phis[i], weight, opts.quad);
    const double right = slab_integral(ki, psi) / ci;
    const double rel = std::abs(left - right) / std::max({std::abs(left), std::abs(right), 1e-30});
    rep.identity_rel_err[i] = rel;
    if (rel > opts.identity_rel_tol) {
      rep.identity_ok = false;
      rep.failures.push_back("integral identity failed at i=" + std::to_string(i) +
                             " (rel err " + std::to_string(rel) + ")");
    }
  }

  // (b) involution and (c) segment-to-segment on random ambient points
  Rng rng(opts.seed, 0xF7);
  const auto random_point = [&]() {
    Vec4 q{};
    for (int a = 0; a < n; ++a) q[a] = rng.uniform(-3.0, 3.0);
    q[n] = rng.uniform(-3.0, 3.0);
    q[n + 1] = rng.uniform(0.15, 5.0);
    return q;
  };
  for (int k = 0; k < opts.random_points; ++k) {
    const Vec4 q = random_point();
    const Vec4 qq = f_tilde(f_tilde(q, n), n);
    double err = 0.0;
    for (int a = 0; a < n + 2; ++a) err = std::max(err, std::abs(qq[a] - q[a]) / (1.0 + std::abs(q[a])));
    rep.involution_err = std::max(rep.involution_err, err);
  }
  rep.involution_ok = rep.involution_err <= 1e-12;
  if (!rep.involution_ok) rep.failures.push_back("F~ o F~ deviates from identity");

  for (int k = 0; k < opts.random_points / 4; ++k) {
    const Vec4 p = random_point();
    const Vec4 q = random_point();
    const Vec4 fp = f_tilde(p, n), fq = f_tilde(q, n);
    // direction of the image chord
    Vec4 d{};
    double dn = 0.0;
    for (int a = 0; a < n + 2; ++a) {
      d[a] = fq[a] - fp[a];
      dn += d[a] * d[a];
    }
    dn = std::sqrt(dn);
    for (int s = 1; s < opts.segment_samples; ++s) {
      const double th = static_cast<double>(s) / opts.segment_samples;
      Vec4 m{};
      for (int a = 0; a < n + 2; ++a) m[a] = (1.0 - th) * p[a] + th * q[a];
      const Vec4 fm = f_tilde(m, n);
      // distance of fm from the line through fp, fq
      double dot = 0.0;
      for (int a = 0; a < n + 2; ++a) dot += (fm[a] - fp[a]) * d[a];
      dot /= (dn * dn);
      double dist2 = 0.0;
      for (int a = 0; a < n + 2; ++a) {
        const double res = fm[a] - fp[a] - dot * d[a];
        dist2 += res * res;
      }
      rep.collinearity_residual = std::max(rep.collinearity_residual, std::sqrt(dist2));
    }
  }
  rep.segments_ok = rep.collinearity_residual <= opts.collinearity_tol;
  if (!rep.segments_ok) rep.failures.push_back("F~ image of a segment is not collinear");

  // (d) ((1-t)K0 + tK1) cap H_lambda inside K_lambda for phi_lambda built
  // through the geometric inf-convolution.
  const double c0 = std::hypot(1.0, emb.s0), c1 = std::hypot(1.0, emb.s1), cl = std::hypot(1.0, sl);
  SliceFrame fr{c0, c1, cl, l};
  const double slack =
      5.0 * (phil.h_max() + 1.0 / opts.conv.t_samples) * (1.0 + std::max(0.0, phil.max_finite()));
  rep.worst_inclusion_margin = kInf;
  const GridFunction& p0 = emb.phi0;
  const GridFunction& p1 = emb.phi1;
  for (int k = 0; k < opts.inclusion_pairs; ++k) {
    // sample k0 in K0, k1 in K1 as epigraph points above random fibers
    const auto sample_above = [&](const GridFunction& phi) -> std::optional<std::pair<Point, double>> {
      const int i = static_cast<int>(rng.below(phi.shape(0)));
      const int j = phi.dim() == 2 ? static_cast<int>(rng.below(phi.shape(1))) : 0;
      const double v = phi.at(i, j);
      if (is_inf(v)) return {};
      const double z = v + std::pow(10.0, rng.uniform(-6.0, 0.7));
      return std::make_pair(Point{phi.coord(0, i), phi.dim() == 2 ? phi.coord(1, j) : 0.0}, z);
    };
    const auto a = sample_above(p0);
    const auto b = sample_above(p1);
    if (!a || !b) continue;
    Crossing c;
    if (!segment_crossing(fr, a->first, a->second * c0, b->first, b->second * c1, c)) continue;
    const double z_c = c.r / cl;
    const double need = phil.eval(c.x);
    if (is_inf(need)) {
      rep.inclusion_ok = false;
      rep.failures.push_back("inclusion: crossing left the phi_lambda grid");
      continue;
    }
    const double margin = z_c - need;  // >= -slack expected
    rep.worst_inclusion_margin = std::min(rep.worst_inclusion_margin, margin);
  }
  if (is_inf(rep.worst_inclusion_margin)) rep.worst_inclusion_margin = 0.0;
  if (rep.worst_inclusion_margin < -slack) {
    rep.inclusion_ok = false;
    rep.failures.push_back("inclusion margin " + std::to_string(rep.worst_inclusion_margin) +
                           " below slack " + std::to_string(-slack));
  }

  rep.all_passed = rep.identity_ok && rep.involution_ok && rep.segments_ok && rep.inclusion_ok;
  return rep;
}

}  // namespace polarpl
