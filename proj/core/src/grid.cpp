#include "polarpl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace polarpl {

GridFunction::GridFunction(int dim, Point lo, Point hi, std::array<int, 2> shape)
    : dim_(dim), lo_(lo), hi_(hi), shape_(shape) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("GridFunction: dim must be 1 or 2");
  std::size_t total = 1;
  for (int a = 0; a < dim_; ++a) {
    if (shape_[a] < 2) throw std::invalid_argument("GridFunction: shape must be >= 2 per axis");
    if (!(lo_[a] < hi_[a])) throw std::invalid_argument("GridFunction: lo < hi required per axis");
    step_[a] = (hi_[a] - lo_[a]) / (shape_[a] - 1);
    total *= static_cast<std::size_t>(shape_[a]);
  }
  if (dim_ == 1) {
    shape_[1] = 1;
    lo_[1] = 0.0;
    hi_[1] = 0.0;
    step_[1] = 0.0;
  }
  inner_ = static_cast<std::size_t>(shape_[1]);
  values_.assign(total, 0.0);
}

GridFunction GridFunction::sample(int dim, Point lo, Point hi, std::array<int, 2> shape,
                                  const std::function<double(const Point&)>& fn) {
  GridFunction g(dim, lo, hi, shape);
  for (int i = 0; i < g.shape_[0]; ++i) {
    for (int j = 0; j < g.shape_[1]; ++j) {
      Point x{g.coord(0, i), dim == 2 ? g.coord(1, j) : 0.0};
      g.at(i, j) = fn(x);
    }
  }
  return g;
}

GridFunction GridFunction::constant(int dim, Point lo, Point hi, std::array<int, 2> shape, double value) {
  GridFunction g(dim, lo, hi, shape);
  std::fill(g.values_.begin(), g.values_.end(), value);
  return g;
}

double GridFunction::h_max() const {
  double h = step_[0];
  if (dim_ == 2) h = std::max(h, step_[1]);
  return h;
}

Point GridFunction::node_point(std::size_t flat) const {
  const int i = static_cast<int>(flat / inner_);
  const int j = static_cast<int>(flat % inner_);
  return {coord(0, i), dim_ == 2 ? coord(1, j) : 0.0};
}

double GridFunction::eval(const Point& x) const {
  // Locate the cell; anything outside the box is +inf.
  int idx[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int a = 0; a < dim_; ++a) {
    const double t = (x[a] - lo_[a]) / step_[a];
    if (t < -1e-12 || t > shape_[a] - 1 + 1e-12) return kInf;
    double tc = std::clamp(t, 0.0, static_cast<double>(shape_[a] - 1));
    int i = static_cast<int>(tc);
    if (i >= shape_[a] - 1) i = shape_[a] - 2;
    idx[a] = i;
    frac[a] = tc - i;
  }
  if (dim_ == 1) {
    const double v0 = at(idx[0]);
    const double v1 = at(idx[0] + 1);
    if (is_inf(v0) || is_inf(v1)) return kInf;
    return v0 + frac[0] * (v1 - v0);
  }
  const double v00 = at(idx[0], idx[1]);
  const double v01 = at(idx[0], idx[1] + 1);
  const double v10 = at(idx[0] + 1, idx[1]);
  const double v11 = at(idx[0] + 1, idx[1] + 1);
  if (is_inf(v00) || is_inf(v01) || is_inf(v10) || is_inf(v11)) return kInf;
  const double a0 = v00 + frac[1] * (v01 - v00);
  const double a1 = v10 + frac[1] * (v11 - v10);
  return a0 + frac[0] * (a1 - a0);
}

bool GridFunction::in_box(const Point& x) const {
  for (int a = 0; a < dim_; ++a)
    if (x[a] < lo_[a] - 1e-12 || x[a] > hi_[a] + 1e-12) return false;
  return true;
}

bool GridFunction::same_layout(const GridFunction& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (shape_[a] != other.shape_[a]) return false;
    if (std::abs(lo_[a] - other.lo_[a]) > 1e-12 || std::abs(hi_[a] - other.hi_[a]) > 1e-12) return false;
  }
  return true;
}

double GridFunction::max_finite() const {
  double m = 0.0;
  bool any = false;
  for (double v : values_) {
    if (is_finite(v)) {
      m = any ? std::max(m, v) : v;
      any = true;
    }
  }
  return any ? m : 0.0;
}

double GridFunction::min_value() const {
  double m = kInf;
  for (double v : values_) m = std::min(m, v);
  return m;
}

bool GridFunction::all_infinite() const {
  for (double v : values_)
    if (is_finite(v)) return false;
  return true;
}

bool GridFunction::has_infinite() const {
  for (double v : values_)
    if (is_inf(v)) return true;
  return false;
}

std::string GridFunction::layout_string() const {
  std::ostringstream os;
  os << "dim=" << dim_ << " box=";
  for (int a = 0; a < dim_; ++a) os << "[" << lo_[a] << "," << hi_[a] << "]";
  os << " shape=";
  for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << shape_[a];
  return os.str();
}

namespace {

void require_same_layout(const GridFunction& f, const GridFunction& g, const char* op) {
  if (!f.same_layout(g))
    throw std::invalid_argument(std::string(op) + ": layout mismatch (" + f.layout_string() + " vs " +
                                g.layout_string() + ")");
}

}  // namespace

GridFunction add(const GridFunction& f, const GridFunction& g) {
  require_same_layout(f, g, "add");
  GridFunction out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] + g[i];
  return out;
}

GridFunction scale(const GridFunction& f, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scale: c must be positive finite");
  GridFunction out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ext_scale(c, f[i]);
  return out;
}

GridFunction map(const GridFunction& f, const std::function<double(double)>& fn) {
  GridFunction out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(f[i]);
  return out;
}

GridFunction neg_log(const GridFunction& f) {
  return map(f, [](double v) {
    if (v < 0.0) throw std::domain_error("neg_log: negative value");
    return v == 0.0 ? kInf : -std::log(v);
  });
}

GridFunction exp_neg(const GridFunction& phi) {
  return map(phi, [](double v) { return is_inf(v) ? 0.0 : std::exp(-v); });
}

GridFunction resample(const GridFunction& f, int dim, Point lo, Point hi, std::array<int, 2> shape) {
  return GridFunction::sample(dim, lo, hi, shape, [&](const Point& x) { return f.eval(x); });
}

namespace {

// One pass of the composite rule at a given refinement level.
double quad_pass(const GridFunction& f, const std::function<double(double)>& integrand,
                 const DensityFn& density, Quadrature::Rule rule, int level) {
  const int panels_per_cell = 1 << level;
  const int dim = f.dim();
  double sum = 0.0;
  const auto weight_at = [&](const Point& x) {
    if (!density) return 1.0;
    const double w = density(x);
    if (!std::isfinite(w))
      throw std::runtime_error("integrate: non-finite density at node (" + std::to_string(x[0]) +
                               (dim == 2 ? "," + std::to_string(x[1]) : "") + ")");
    return w;
  };
  if (dim == 1) {
    const int panels = (f.shape(0) - 1) * panels_per_cell;
    const double hp = f.step(0) / panels_per_cell;
    if (rule == Quadrature::Rule::midpoint) {
      for (int k = 0; k < panels; ++k) {
        const Point x{f.lo(0) + (k + 0.5) * hp, 0.0};
        sum += integrand(f.eval(x)) * weight_at(x) * hp;
      }
    } else {
      for (int k = 0; k <= panels; ++k) {
        const Point x{f.lo(0) + k * hp, 0.0};
        const double w = (k == 0 || k == panels) ? 0.5 : 1.0;
        sum += w * integrand(f.eval(x)) * weight_at(x) * hp;
      }
    }
    return sum;
  }
  const int panels0 = (f.shape(0) - 1) * panels_per_cell;
  const int panels1 = (f.shape(1) - 1) * panels_per_cell;
  const double hp0 = f.step(0) / panels_per_cell;
  const double hp1 = f.step(1) / panels_per_cell;
  if (rule == Quadrature::Rule::midpoint) {
    for (int i = 0; i < panels0; ++i) {
      const double x0 = f.lo(0) + (i + 0.5) * hp0;
      for (int j = 0; j < panels1; ++j) {
        const Point x{x0, f.lo(1) + (j + 0.5) * hp1};
        sum += integrand(f.eval(x)) * weight_at(x) * hp0 * hp1;
      }
    }
  } else {
    for (int i = 0; i <= panels0; ++i) {
      const double wi = (i == 0 || i == panels0) ? 0.5 : 1.0;
      const double x0 = f.lo(0) + i * hp0;
      for (int j = 0; j <= panels1; ++j) {
        const double wj = (j == 0 || j == panels1) ? 0.5 : 1.0;
        const Point x{x0, f.lo(1) + j * hp1};
        sum += wi * wj * integrand(f.eval(x)) * weight_at(x) * hp0 * hp1;
      }
    }
  }
  return sum;
}

}  // namespace

IntegralResult integrate_transformed(const GridFunction& f, const std::function<double(double)>& integrand,
                                     const DensityFn& density, const Quadrature& q) {
  IntegralResult res;
  double prev = 0.0;
  for (int level = 0; level <= q.refinement; ++level) {
    const double v = quad_pass(f, integrand, density, q.rule, level);
    if (level == q.refinement) {
      res.value = v;
      res.refinement_error = q.refinement > 0 ? std::abs(v - prev) : 0.0;
    }
    prev = v;
  }
  return res;
}

IntegralResult integrate_exp_neg_result(const GridFunction& phi, const DensityFn& density, const Quadrature& q) {
  return integrate_transformed(
      phi, [](double v) { return is_inf(v) ? 0.0 : std::exp(-v); }, density, q);
}

double integrate_exp_neg(const GridFunction& phi, const DensityFn& density, const Quadrature& q) {
  return integrate_exp_neg_result(phi, density, q).value;
}

double integrate(const GridFunction& f, const DensityFn& density, const Quadrature& q) {
  return integrate_transformed(
             f, [](double v) { return is_inf(v) ? kInf : v; }, density, q)
      .value;
}

double lp_norm(const GridFunction& f, double p, const Quadrature& q) {
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be > 0");
  if (f.has_infinite()) throw std::domain_error("lp_norm: f is infinite on a node set of positive measure");
  const double ip = integrate_transformed(
                        f, [p](double v) { return std::pow(v, p); }, {}, q)
                        .value;
  return std::pow(ip, 1.0 / p);
}

double boundary_max(const GridFunction& f, const std::function<double(double)>& integrand) {
  double m = 0.0;
  const int n0 = f.shape(0);
  if (f.dim() == 1) {
    m = std::max(integrand(f.at(0)), integrand(f.at(n0 - 1)));
    return m;
  }
  const int n1 = f.shape(1);
  for (int i = 0; i < n0; ++i) {
    m = std::max(m, integrand(f.at(i, 0)));
    m = std::max(m, integrand(f.at(i, n1 - 1)));
  }
  for (int j = 0; j < n1; ++j) {
    m = std::max(m, integrand(f.at(0, j)));
    m = std::max(m, integrand(f.at(n0 - 1, j)));
  }
  return m;
}

}  // namespace polarpl
