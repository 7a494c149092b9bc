#include "polarpl/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "polarpl/rng.hpp"

namespace polarpl {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["theorem"] = theorem;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["margin"] = margin;
  j["rel_tol"] = rel_tol;
  j["resolution"] = {{"grid", grid_shape}, {"t_samples", t_samples}};
  j["hypothesis_check"] = {{"checked", hypothesis_checked},
                           {"passed", hypothesis_passed},
                           {"worst_violation", worst_violation},
                           {"witness", {{"t", witness_t}, {"x", witness_x}, {"y", witness_y}}}};
  j["instance"] = instance.is_null() ? nlohmann::json::object() : instance;
  j["truncation_bound"] = truncation_bound;
  j["verdict"] = verdict_name(verdict);
  return j;
}

VerificationReport VerificationReport::from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.theorem = j.at("theorem").get<std::string>();
  r.lhs = j.at("lhs").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.margin = j.at("margin").get<double>();
  r.rel_tol = j.at("rel_tol").get<double>();
  r.grid_shape = j.at("resolution").at("grid").get<std::vector<int>>();
  r.t_samples = j.at("resolution").at("t_samples").get<int>();
  const auto& h = j.at("hypothesis_check");
  r.hypothesis_checked = h.at("checked").get<bool>();
  r.hypothesis_passed = h.at("passed").get<bool>();
  r.worst_violation = h.at("worst_violation").get<double>();
  r.witness_t = h.at("witness").at("t").get<double>();
  r.witness_x = h.at("witness").at("x").get<std::vector<double>>();
  r.witness_y = h.at("witness").at("y").get<std::vector<double>>();
  r.instance = j.at("instance");
  r.truncation_bound = j.at("truncation_bound").get<double>();
  const std::string v = j.at("verdict").get<std::string>();
  r.verdict = v == "pass" ? Verdict::pass : v == "fail" ? Verdict::fail : Verdict::inconclusive;
  return r;
}

namespace {

GridFunction align_to(const GridFunction& f, const GridFunction& ref) {
  if (f.same_layout(ref)) return f;
  return resample(f, ref.dim(), {ref.lo(0), ref.lo(1)}, {ref.hi(0), ref.hi(1)},
                  {ref.shape(0), ref.dim() == 2 ? ref.shape(1) : 1});
}

double value_integral(const GridFunction& f, const DensityFn& w, const Quadrature& q) {
  return integrate_transformed(
             f, [](double v) { return is_inf(v) ? 0.0 : v; }, w, q)
      .value;
}

std::vector<int> shape_of(const GridFunction& f) {
  std::vector<int> s{f.shape(0)};
  if (f.dim() == 2) s.push_back(f.shape(1));
  return s;
}

struct CoreSpec {
  Theorem theorem;
  std::string name;
  double mean_p;  // p of the conclusion mean
};

// Shared body of the classical / polar / weighted-polar verifiers.
VerificationReport verify_mean_core(const CoreSpec& spec, const GridFunction& f_in, const GridFunction& g_in,
                                    double lambda, const std::optional<GridFunction>& alpha,
                                    const std::optional<GridFunction>& h_in, const VerifyOptions& opts) {
  GridFunction f = f_in;
  GridFunction g = align_to(g_in, f);
  if (f.has_infinite() || g.has_infinite())
    throw std::domain_error(spec.name + ": f and g must be finite value functions");

  // Common rescale into [0,1]; the factor multiplies back into both reported
  // sides (the conclusion means are 1-homogeneous).
  const double s = std::max({1.0, f.max_finite(), g.max_finite()});
  if (s > 1.0) {
    const double inv = 1.0 / s;
    f = map(f, [inv](double v) { return v * inv; });
    g = map(g, [inv](double v) { return v * inv; });
  }
  std::optional<GridFunction> h;
  if (h_in) {
    GridFunction ha = align_to(*h_in, f);
    if (s > 1.0) {
      const double inv = 1.0 / s;
      ha = map(ha, [inv](double v) { return is_inf(v) ? v : v * inv; });
    }
    h = std::move(ha);
  } else {
    h = minimal_h(f, g, lambda, spec.theorem, 1.0, opts.conv);
  }

  DensityFn weight{};
  if (alpha) {
    const GridFunction aw = align_to(*alpha, f);
    if (!midpoint_convex_spot_check(aw, 2000, 17))
      throw std::domain_error(spec.name + ": alpha fails the convexity spot-check (log-concavity hypothesis)");
    weight = [aw](const Point& x) {
      const double v = aw.eval(x);
      return is_inf(v) ? 0.0 : std::exp(-v);
    };
  }

  VerificationReport rep;
  rep.theorem = spec.name;
  rep.rel_tol = opts.rel_tol;
  rep.grid_shape = shape_of(f);
  rep.t_samples = spec.theorem == Theorem::classical ? 1 : opts.conv.t_samples;
  rep.instance = opts.instance_descriptor.is_null() ? nlohmann::json::object() : opts.instance_descriptor;
  rep.instance["lambda"] = lambda;
  rep.instance["scale"] = s;

  const double hyp_scale = std::max(1.0, h->max_finite());
  const HypothesisReport hyp =
      check_hypothesis(f, g, *h, lambda, spec.theorem, opts.conv, opts.hyp_tol * hyp_scale + 5e-3 * hyp_scale);
  rep.hypothesis_checked = true;
  rep.hypothesis_passed = hyp.passed;
  rep.worst_violation = hyp.worst_violation;
  rep.witness_t = hyp.witness_t;
  rep.witness_x.assign(hyp.witness_x.begin(), hyp.witness_x.begin() + f.dim());
  rep.witness_y.assign(hyp.witness_y.begin(), hyp.witness_y.begin() + f.dim());

  const auto tolerated_margin = [&](int refinement) {
    Quadrature q = opts.quad;
    q.refinement = refinement;
    const double fi = s * value_integral(f, weight, q);
    const double gi = s * value_integral(g, weight, q);
    const double hi = s * value_integral(*h, weight, q);
    if (spec.mean_p < 0.0 && (fi <= 0.0 || gi <= 0.0))
      throw std::domain_error(spec.name + ": integral of f or g vanishes; the harmonic mean degenerates");
    const double rhs = p_mean(fi, gi, lambda, spec.mean_p);
    return std::array<double, 3>{hi, rhs, hi - rhs * (1.0 - opts.rel_tol)};
  };

  const auto fin = tolerated_margin(opts.quad.refinement);
  rep.lhs = fin[0];
  rep.rhs = fin[1];
  rep.margin = rep.lhs - rep.rhs;
  bool flipped = false;
  if (opts.quad.refinement > 0) {
    const auto prev = tolerated_margin(opts.quad.refinement - 1);
    flipped = (prev[2] < 0.0) != (fin[2] < 0.0);
  }
  rep.truncation_bound =
      std::max({boundary_max(f, [](double v) { return is_inf(v) ? 0.0 : v; }),
                boundary_max(g, [](double v) { return is_inf(v) ? 0.0 : v; }),
                boundary_max(*h, [](double v) { return is_inf(v) ? 0.0 : v; })}) *
      s;

  if (!hyp.passed)
    rep.verdict = Verdict::fail;
  else if (flipped)
    rep.verdict = Verdict::inconclusive;
  else
    rep.verdict = fin[2] >= 0.0 ? Verdict::pass : Verdict::fail;
  return rep;
}

}  // namespace

VerificationReport verify_classical_pl(const GridFunction& f, const GridFunction& g, double lambda,
                                       const std::optional<GridFunction>& h, const VerifyOptions& opts) {
  return verify_mean_core({Theorem::classical, "classical-pl", 0.0}, f, g, lambda, {}, h, opts);
}

VerificationReport verify_polar_pl(const GridFunction& f, const GridFunction& g, double lambda,
                                   const std::optional<GridFunction>& h, const VerifyOptions& opts) {
  return verify_mean_core({Theorem::polar, "polar-pl", -1.0}, f, g, lambda, {}, h, opts);
}

VerificationReport verify_polar_pl_measure(const GridFunction& f, const GridFunction& g, double lambda,
                                           const GridFunction& alpha, const std::optional<GridFunction>& h,
                                           const VerifyOptions& opts) {
  return verify_mean_core({Theorem::polar, "polar-pl-mu", -1.0}, f, g, lambda, alpha, h, opts);
}

VerificationReport verify_lp(const GridFunction& f_in, const GridFunction& g_in, double p,
                             const std::optional<GridFunction>& h_in, const VerifyOptions& opts) {
  if (!(p > 0.0)) throw std::invalid_argument("verify_lp: p must be > 0");
  const double lambda = 0.5;  // any interior weight gives the same h
  GridFunction f = f_in;
  GridFunction g = align_to(g_in, f);
  std::optional<GridFunction> h =
      h_in ? std::optional<GridFunction>(align_to(*h_in, f)) : minimal_h(f, g, lambda, Theorem::lp, p, opts.conv);

  VerificationReport rep;
  rep.theorem = "lp";
  rep.rel_tol = opts.rel_tol;
  rep.grid_shape = shape_of(f);
  rep.t_samples = opts.conv.t_samples;
  rep.instance = opts.instance_descriptor.is_null() ? nlohmann::json::object() : opts.instance_descriptor;
  rep.instance["p"] = p;

  const double hyp_scale = std::max(1.0, h->max_finite());
  const HypothesisReport hyp =
      check_hypothesis(f, g, *h, lambda, Theorem::lp, opts.conv, opts.hyp_tol * hyp_scale + 5e-3 * hyp_scale);
  rep.hypothesis_checked = true;
  rep.hypothesis_passed = hyp.passed;
  rep.worst_violation = hyp.worst_violation;
  rep.witness_t = hyp.witness_t;
  rep.witness_x.assign(hyp.witness_x.begin(), hyp.witness_x.begin() + f.dim());
  rep.witness_y.assign(hyp.witness_y.begin(), hyp.witness_y.begin() + f.dim());

  const auto tolerated_margin = [&](int refinement) {
    Quadrature q = opts.quad;
    q.refinement = refinement;
    const double nf = lp_norm(f, p, q);
    const double ng = lp_norm(g, p, q);
    const double nh = lp_norm(*h, p, q);
    if (!std::isfinite(nf) || !std::isfinite(ng) || !std::isfinite(nh))
      throw std::domain_error("verify_lp: infinite norm");
    return std::array<double, 3>{nh, nf + ng, nh - (nf + ng) * (1.0 - opts.rel_tol)};
  };
  const auto fin = tolerated_margin(opts.quad.refinement);
  rep.lhs = fin[0];
  rep.rhs = fin[1];
  rep.margin = rep.lhs - rep.rhs;
  bool flipped = false;
  if (opts.quad.refinement > 0) {
    const auto prev = tolerated_margin(opts.quad.refinement - 1);
    flipped = (prev[2] < 0.0) != (fin[2] < 0.0);
  }
  rep.truncation_bound = std::max(boundary_max(f, [](double v) { return is_inf(v) ? 0.0 : v; }),
                                  boundary_max(g, [](double v) { return is_inf(v) ? 0.0 : v; }));

  if (!hyp.passed)
    rep.verdict = Verdict::fail;
  else if (flipped)
    rep.verdict = Verdict::inconclusive;
  else
    rep.verdict = fin[2] >= 0.0 ? Verdict::pass : Verdict::fail;
  return rep;
}

InstanceGenerator InstanceGenerator::defaults(Kind kind, std::uint64_t seed, int n) {
  InstanceGenerator g;
  g.kind = kind;
  g.seed = seed;
  g.n = n;
  if (n == 2) {
    g.lo = {-7.0, -7.0};
    g.hi = {7.0, 7.0};
    g.shape = {129, 129};
    g.anchor_slope_min = 0.8;
    g.anchor_slope_max = 2.0;
    g.terms = 6;
  }
  return g;
}

namespace {

struct AffineTerm {
  Point a{};
  double b = 0.0;
};

std::vector<AffineTerm> max_affine_terms(const InstanceGenerator& gen, Rng& rng) {
  std::vector<AffineTerm> terms;
  if (gen.n == 1) {
    // Two anchors keep the function coercive in both directions.
    terms.push_back({{rng.uniform(gen.anchor_slope_min, gen.anchor_slope_max), 0.0},
                     rng.uniform(gen.offset_min, gen.offset_max)});
    terms.push_back({{-rng.uniform(gen.anchor_slope_min, gen.anchor_slope_max), 0.0},
                     rng.uniform(gen.offset_min, gen.offset_max)});
    for (int k = 2; k < gen.terms; ++k)
      terms.push_back({{rng.uniform(-gen.extra_slope_max, gen.extra_slope_max), 0.0},
                       rng.uniform(gen.offset_min, gen.extra_offset_max)});
  } else {
    for (int d = 0; d < 4; ++d) {
      const double c = rng.uniform(gen.anchor_slope_min, gen.anchor_slope_max);
      Point a{0.0, 0.0};
      a[d % 2] = (d < 2 ? c : -c);
      terms.push_back({a, rng.uniform(gen.offset_min, gen.offset_max)});
    }
    for (int k = 4; k < gen.terms; ++k) {
      const double ang = rng.uniform(0.0, 6.283185307179586);
      const double c = rng.uniform(0.2, gen.extra_slope_max);
      terms.push_back({{c * std::cos(ang), c * std::sin(ang)}, rng.uniform(gen.offset_min, gen.extra_offset_max)});
    }
  }
  return terms;
}

double eval_max_affine(const std::vector<AffineTerm>& terms, const Point& x, int n) {
  double v = 0.0;
  for (const auto& t : terms) {
    double dot = t.a[0] * x[0];
    if (n == 2) dot += t.a[1] * x[1];
    v = std::max(v, dot - t.b);
  }
  return v;
}

}  // namespace

GridFunction generate(const InstanceGenerator& gen) {
  Rng rng(gen.seed, 0x1CE);
  switch (gen.kind) {
    case InstanceGenerator::Kind::cvx0_max_affine: {
      const auto terms = max_affine_terms(gen, rng);
      return GridFunction::sample(gen.n, gen.lo, gen.hi, gen.shape,
                                  [&](const Point& x) { return eval_max_affine(terms, x, gen.n); });
    }
    case InstanceGenerator::Kind::log_concave: {
      InstanceGenerator inner = gen;
      inner.kind = InstanceGenerator::Kind::cvx0_max_affine;
      const GridFunction phi = generate(inner);
      return exp_neg(phi);
    }
    case InstanceGenerator::Kind::bounded_measurable: {
      // Random step function supported on a sub-box; deliberately rough.
      const int pieces = 6 + static_cast<int>(rng.below(9));
      std::vector<double> cuts{gen.lo[0]};
      for (int k = 1; k < pieces; ++k) cuts.push_back(rng.uniform(gen.lo[0], gen.hi[0]));
      cuts.push_back(gen.hi[0]);
      std::sort(cuts.begin(), cuts.end());
      std::vector<double> vals(cuts.size() - 1);
      for (auto& v : vals) v = rng.coin(0.2) ? 0.0 : rng.uniform(0.05, 1.0);
      const double support = rng.uniform(0.4, 0.9) * std::min(-gen.lo[0], gen.hi[0]);
      return GridFunction::sample(gen.n, gen.lo, gen.hi, gen.shape, [&](const Point& x) {
        bool inside = true;
        for (int a = 0; a < gen.n; ++a) inside = inside && std::abs(x[a]) <= support;
        if (!inside) return 0.0;
        const auto it = std::upper_bound(cuts.begin(), cuts.end(), x[0]);
        const std::size_t idx = std::min(vals.size() - 1, static_cast<std::size_t>(it - cuts.begin()) - 1);
        return vals[idx];
      });
    }
    case InstanceGenerator::Kind::indicator_convex: {
      Point a{}, b{};
      for (int d = 0; d < gen.n; ++d) {
        a[d] = rng.uniform(0.25, 0.85) * -gen.lo[d];
        b[d] = rng.uniform(0.25, 0.85) * gen.hi[d];
      }
      return GridFunction::sample(gen.n, gen.lo, gen.hi, gen.shape, [&](const Point& x) {
        for (int d = 0; d < gen.n; ++d)
          if (x[d] < -a[d] || x[d] > b[d]) return 0.0;
        return 1.0;
      });
    }
  }
  throw std::logic_error("generate: unknown kind");
}

bool midpoint_convex_spot_check(const GridFunction& f, int triples, std::uint64_t seed, double tol) {
  Rng rng(seed, 0xC0);
  for (int k = 0; k < triples; ++k) {
    Point x{}, y{}, mid{};
    for (int a = 0; a < f.dim(); ++a) {
      x[a] = rng.uniform(f.lo(a), f.hi(a));
      y[a] = rng.uniform(f.lo(a), f.hi(a));
      mid[a] = 0.5 * (x[a] + y[a]);
    }
    const double vx = f.eval(x), vy = f.eval(y);
    if (is_inf(vx) || is_inf(vy)) continue;
    const double vm = f.eval(mid);
    if (is_inf(vm) || vm > 0.5 * (vx + vy) + tol + 1e-12 * (1.0 + std::abs(vx) + std::abs(vy))) return false;
  }
  return true;
}

const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0.1, 0.25, 0.5, 0.75, 0.9};
  return grid;
}

std::vector<SweepRow> sweep_suite(const std::string& suite, int count, std::uint64_t seed,
                                  const VerifyOptions& opts) {
  if (suite != "polar" && suite != "classical" && suite != "lp")
    throw std::invalid_argument("sweep: unknown suite '" + suite + "' (polar|classical|lp)");
  static const std::array<double, 3> p_grid{0.5, 1.0, 2.0};
  std::vector<SweepRow> rows;
  rows.reserve(count);
  for (int k = 0; k < count; ++k) {
    const std::uint64_t sk = seed + 7919ULL * static_cast<std::uint64_t>(k);
    const double lambda = default_lambda_grid()[k % default_lambda_grid().size()];
    const GridFunction f = generate(InstanceGenerator::defaults(InstanceGenerator::Kind::log_concave, sk));
    const GridFunction g =
        generate(InstanceGenerator::defaults(InstanceGenerator::Kind::log_concave, sk ^ 0x5DEECE66DULL));
    VerifyOptions vo = opts;
    vo.instance_descriptor = {{"seed", sk}};
    VerificationReport rep;
    double p = 0.0;
    if (suite == "polar") {
      rep = verify_polar_pl(f, g, lambda, {}, vo);
    } else if (suite == "classical") {
      rep = verify_classical_pl(f, g, lambda, {}, vo);
    } else {
      p = p_grid[k % p_grid.size()];
      rep = verify_lp(f, g, p, {}, vo);
    }
    std::ostringstream res;
    res << "N=" << rep.grid_shape[0] << ",T=" << rep.t_samples;
    rows.push_back({sk, lambda, p, rep.lhs, rep.rhs, rep.margin, rep.verdict, res.str()});
  }
  return rows;
}

}  // namespace polarpl
