#include "polarpl/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polarpl/io.hpp"
#include "polarpl/rng.hpp"

namespace polarpl {

double p_mean(double a, double b, double lambda, double p) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("p_mean: arguments must be non-negative");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("p_mean: lambda must lie in [0,1]");
  if (std::isinf(p)) return p > 0 ? std::max(a, b) : std::min(a, b);
  if (p == 0.0) return std::pow(a, 1.0 - lambda) * std::pow(b, lambda);
  if (p < 0.0 && (a == 0.0 || b == 0.0)) return 0.0;
  if (p > 0.0 && (a == 0.0 || b == 0.0)) {
    // continue through the formula; 0^p = 0 is fine for p > 0
  }
  return std::pow((1.0 - lambda) * std::pow(a, p) + lambda * std::pow(b, p), 1.0 / p);
}

double borell_kappa(double kappa, int n) {
  const double denom = 1.0 - n * kappa;
  if (denom == 0.0) throw std::domain_error("borell_kappa: pole at n*kappa = 1");
  return kappa / denom;
}

NamedMeasure NamedMeasure::weighted(GridFunction alpha_grid) {
  NamedMeasure m;
  m.tag = Tag::weighted;
  m.n = alpha_grid.dim();
  m.alpha = std::move(alpha_grid);
  return m;
}

int NamedMeasure::ambient_dim() const {
  switch (tag) {
    case Tag::lebesgue:
    case Tag::weighted: return n;
    default: return n + 1;
  }
}

double NamedMeasure::density(const std::array<double, 3>& q) const {
  switch (tag) {
    case Tag::lebesgue: return 1.0;
    case Tag::weighted: {
      const double a = alpha->eval({q[0], n == 2 ? q[1] : 0.0});
      return is_inf(a) ? 0.0 : std::exp(-a);
    }
    case Tag::mu: return std::exp(-q[n]);
    case Tag::nu: {
      const double z = q[n];
      return z > 0.0 ? std::exp(-1.0 / z) * std::pow(z, -(n + 2)) : 0.0;
    }
    case Tag::mu_p: {
      const double z = q[n];
      return z > 0.0 ? p * std::pow(z, -(p + 1.0)) : 0.0;
    }
    case Tag::nu_p: {
      const double z = q[n];
      return z > 0.0 ? p * std::pow(z, p - (n + 1.0)) : 0.0;
    }
  }
  return 0.0;
}

DensityFn NamedMeasure::base_density() const {
  if (tag == Tag::lebesgue) return {};
  if (tag == Tag::weighted) {
    const GridFunction a = *alpha;
    return [a](const Point& x) {
      const double v = a.eval(x);
      return is_inf(v) ? 0.0 : std::exp(-v);
    };
  }
  throw std::invalid_argument("measure '" + name() + "' is not evaluable on the base space");
}

std::string NamedMeasure::name() const {
  switch (tag) {
    case Tag::lebesgue: return "lebesgue";
    case Tag::mu: return "mu";
    case Tag::nu: return "nu";
    case Tag::mu_p: return "mu_p:" + std::to_string(p);
    case Tag::nu_p: return "nu_p:" + std::to_string(p);
    case Tag::weighted: return "weighted";
  }
  return "?";
}

NamedMeasure parse_measure(const std::string& text, int n) {
  const auto colon = text.find(':');
  const std::string head = colon == std::string::npos ? text : text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "lebesgue") return NamedMeasure::lebesgue(n);
  if (head == "mu") return NamedMeasure::mu(n);
  if (head == "nu") return NamedMeasure::nu(n);
  if (head == "mu_p" || head == "nu_p") {
    if (arg.empty()) throw std::invalid_argument("measure " + head + " needs a parameter, e.g. " + head + ":2");
    const double pv = std::stod(arg);
    if (!(pv > 0.0)) throw std::invalid_argument("measure " + head + ": p must be > 0");
    return head == "mu_p" ? NamedMeasure::mu_p(pv, n) : NamedMeasure::nu_p(pv, n);
  }
  if (head == "weighted") {
    if (arg.empty()) throw std::invalid_argument("measure weighted needs a grid file, e.g. weighted:alpha.json");
    return NamedMeasure::weighted(load_grid(arg));
  }
  throw std::invalid_argument("unknown measure '" + text + "'");
}

ConcavityReport kappa_concavity_check(const std::function<double(const std::array<double, 3>&)>& density,
                                      int ambient_dim, double kappa, const std::array<double, 3>& box_lo,
                                      const std::array<double, 3>& box_hi, int sample_count, std::uint64_t seed,
                                      double tol) {
  ConcavityReport rep;
  rep.seed = seed;
  rep.worst_margin = kInf;
  Rng rng(seed, 0xC0CAFE);
  for (int s = 0; s < sample_count; ++s) {
    std::array<double, 3> x{}, y{}, mid{};
    const double lam = rng.uniform(0.02, 0.98);
    for (int a = 0; a < ambient_dim; ++a) {
      x[a] = rng.uniform(box_lo[a], box_hi[a]);
      y[a] = rng.uniform(box_lo[a], box_hi[a]);
      mid[a] = (1.0 - lam) * x[a] + lam * y[a];
    }
    const double dx = density(x), dy = density(y), dm = density(mid);
    const double margin = dm - p_mean(dx, dy, lam, kappa);
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness_x = x;
      rep.witness_y = y;
      rep.witness_lambda = lam;
    }
  }
  rep.passed = rep.worst_margin >= -tol;
  return rep;
}

namespace {

// Volume of the sublevel set {x in box : interp(phi)(x) < s}, exact on the
// interpolant in 1D (cells with an infinite node count as above any level,
// consistent with eval's stencil convention).
double level_measure(const GridFunction& phi, double s) {
  if (phi.dim() == 1) {
    double len = 0.0;
    const double h = phi.step(0);
    for (int i = 0; i + 1 < phi.shape(0); ++i) {
      const double v0 = phi.at(i), v1 = phi.at(i + 1);
      if (!is_finite(v0) || !is_finite(v1)) continue;
      const bool b0 = v0 < s, b1 = v1 < s;
      if (b0 && b1) {
        len += h;
      } else if (b0 != b1) {
        const double frac = (s - v0) / (v1 - v0);  // crossing of the chord
        len += h * (b0 ? frac : 1.0 - frac);
      }
    }
    return len;
  }
  // 2D: corner-count fraction per cell (first order).
  double area = 0.0;
  const double cell = phi.step(0) * phi.step(1);
  for (int i = 0; i + 1 < phi.shape(0); ++i) {
    for (int j = 0; j + 1 < phi.shape(1); ++j) {
      const double v00 = phi.at(i, j), v01 = phi.at(i, j + 1);
      const double v10 = phi.at(i + 1, j), v11 = phi.at(i + 1, j + 1);
      if (!is_finite(v00) || !is_finite(v01) || !is_finite(v10) || !is_finite(v11)) continue;
      const int c = (v00 < s) + (v01 < s) + (v10 < s) + (v11 < s);
      if (c) area += cell * (c / 4.0);
    }
  }
  return area;
}

// z-only factor of the epigraph measures: d m(x,z) = g(z) dx dz.
double z_density(const NamedMeasure& m, double z) {
  switch (m.tag) {
    case NamedMeasure::Tag::mu: return std::exp(-z);
    case NamedMeasure::Tag::nu: return z > 0.0 ? std::exp(-1.0 / z) * std::pow(z, -(m.n + 2)) : 0.0;
    case NamedMeasure::Tag::mu_p: return z > 0.0 ? m.p * std::pow(z, -(m.p + 1.0)) : 0.0;
    case NamedMeasure::Tag::nu_p: return z > 0.0 ? m.p * std::pow(z, m.p - (m.n + 1.0)) : 0.0;
    default: throw std::invalid_argument("measure '" + m.name() + "' has no epigraph form");
  }
}

double integrate_log_z(const NamedMeasure& m, const GridFunction& phi, double z_min, double z_max,
                       int z_samples) {
  // F-image slices: section at height z has n-volume z^n * |{u: phi(u) < 1/z}|.
  double total = 0.0;
  double prev_z = z_min;
  double prev_f = z_density(m, z_min) * std::pow(z_min, phi.dim()) * level_measure(phi, 1.0 / z_min);
  const double lr = std::log(z_max / z_min);
  for (int k = 1; k < z_samples; ++k) {
    const double z = z_min * std::exp(lr * k / (z_samples - 1));
    const double f = z_density(m, z) * std::pow(z, phi.dim()) * level_measure(phi, 1.0 / z);
    total += 0.5 * (prev_f + f) * (z - prev_z);
    prev_z = z;
    prev_f = f;
  }
  return total;
}

}  // namespace

EpiMeasureResult measure_of_epi(const GridFunction& phi, const NamedMeasure& m, EpiRoute route,
                                const EpiMeasureOptions& opts) {
  if (m.tag == NamedMeasure::Tag::lebesgue || m.tag == NamedMeasure::Tag::weighted)
    throw std::invalid_argument("measure_of_epi: '" + m.name() + "' lives on the base space, not on epigraphs");
  if (m.n != phi.dim())
    throw std::invalid_argument("measure_of_epi: measure base dimension " + std::to_string(m.n) +
                                " does not match phi (dim " + std::to_string(phi.dim()) + ")");
  EpiMeasureResult res;

  if (route == EpiRoute::epi) {
    if (m.tag == NamedMeasure::Tag::mu) {
      // Vertical integral is exp(-phi(x)); reduces to the shared quadrature.
      const IntegralResult ir = integrate_exp_neg_result(phi, {}, opts.quad);
      res.value = ir.value;
      res.refinement_error = ir.refinement_error;
      res.truncation_bound = boundary_max(phi, [](double v) { return is_inf(v) ? 0.0 : std::exp(-v); });
      return res;
    }
    if (m.tag == NamedMeasure::Tag::mu_p) {
      const double pp = m.p;
      const IntegralResult ir = integrate_transformed(
          phi, [pp](double v) { return is_inf(v) ? 0.0 : std::pow(v, -pp); }, {}, opts.quad);
      if (!std::isfinite(ir.value))
        throw std::runtime_error("measure_of_epi(mu_p): divergent integral (phi reaches 0)");
      res.value = ir.value;
      res.refinement_error = ir.refinement_error;
      res.truncation_bound = boundary_max(phi, [pp](double v) { return is_inf(v) ? 0.0 : std::pow(v, -pp); });
      return res;
    }
    // nu / nu_p over an epigraph: numeric vertical tail via a cumulative
    // log-z table.
    const int zs = opts.z_samples;
    std::vector<double> zg(zs), tail(zs);
    const double lr = std::log(opts.z_max / opts.z_min);
    for (int k = 0; k < zs; ++k) zg[k] = opts.z_min * std::exp(lr * k / (zs - 1));
    tail[zs - 1] = 0.0;
    for (int k = zs - 1; k-- > 0;) {
      const double f0 = z_density(m, zg[k]), f1 = z_density(m, zg[k + 1]);
      tail[k] = tail[k + 1] + 0.5 * (f0 + f1) * (zg[k + 1] - zg[k]);
    }
    const auto fiber = [&](double v) -> double {
      if (is_inf(v)) return 0.0;
      const double z = std::clamp(v, opts.z_min, opts.z_max);
      const double t = std::log(z / opts.z_min) / lr * (zs - 1);
      const int i = std::min(static_cast<int>(t), zs - 2);
      const double frac = t - i;
      return tail[i] + frac * (tail[i + 1] - tail[i]);
    };
    const IntegralResult ir = integrate_transformed(phi, fiber, {}, opts.quad);
    res.value = ir.value;
    res.refinement_error = ir.refinement_error;
    res.truncation_bound = z_density(m, opts.z_max) * opts.z_max;
    if (!std::isfinite(res.value)) throw std::runtime_error("measure_of_epi: divergent epigraph integral");
    return res;
  }

  // F-image route.
  const double full = integrate_log_z(m, phi, opts.z_min, opts.z_max, opts.z_samples);
  const double half = integrate_log_z(m, phi, opts.z_min, opts.z_max, opts.z_samples / 2);
  res.value = full;
  res.refinement_error = std::abs(full - half);
  // Mass estimates just outside the z-window.
  const double low = z_density(m, opts.z_min) * std::pow(opts.z_min, phi.dim() + 1) *
                     level_measure(phi, 1.0 / opts.z_min);
  const double high = z_density(m, opts.z_max) * std::pow(opts.z_max, phi.dim() + 1) *
                      level_measure(phi, 1.0 / opts.z_max);
  res.truncation_bound = low + high;
  if (!std::isfinite(res.value) || (res.value > 0.0 && res.truncation_bound > 0.05 * res.value))
    throw std::runtime_error("measure_of_epi: non-convergent F-image integral (truncation bound " +
                             std::to_string(res.truncation_bound) + " vs value " + std::to_string(res.value) +
                             ")");
  return res;
}

}  // namespace polarpl
