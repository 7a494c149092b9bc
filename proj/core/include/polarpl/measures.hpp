#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "polarpl/grid.hpp"

namespace polarpl {

/// p-average of non-negative numbers,
///   M_p^lambda(a, b) = ((1-lambda) a^p + lambda b^p)^(1/p),
/// with the limit branches M_0 = a^(1-lambda) b^lambda, M_{+inf} = max,
/// M_{-inf} = min, and M_p = 0 whenever p <= 0 and one argument is 0.
double p_mean(double a, double b, double lambda, double p);

/// Borell correspondence between measure and density concavity:
/// kappa_n = kappa / (1 - n*kappa). Throws at the pole n*kappa = 1.
double borell_kappa(double kappa, int n);

/// Measures used by the epi-graph identities. `n` is the base dimension of
/// the functions whose epi-graphs are measured; mu/nu/mu_p/nu_p live on
/// R^n x R (or R^n x R^+), lebesgue/weighted live on R^n itself.
struct NamedMeasure {
  enum class Tag { lebesgue, mu, nu, mu_p, nu_p, weighted };
  Tag tag = Tag::lebesgue;
  int n = 1;
  double p = 1.0;                        // mu_p / nu_p parameter
  std::optional<GridFunction> alpha;     // weighted: density exp(-alpha), alpha convex

  static NamedMeasure lebesgue(int n = 1) { return {Tag::lebesgue, n, 1.0, {}}; }
  static NamedMeasure mu(int n = 1) { return {Tag::mu, n, 1.0, {}}; }
  static NamedMeasure nu(int n = 1) { return {Tag::nu, n, 1.0, {}}; }
  static NamedMeasure mu_p(double p, int n = 1) { return {Tag::mu_p, n, p, {}}; }
  static NamedMeasure nu_p(double p, int n = 1) { return {Tag::nu_p, n, p, {}}; }
  static NamedMeasure weighted(GridFunction alpha_grid);

  /// Dimension of the space the measure lives on.
  int ambient_dim() const;
  /// Density at an ambient point (coordinates x_1..x_n[, z]). Zero outside
  /// the measure's domain (z <= 0 for nu, mu_p, nu_p).
  double density(const std::array<double, 3>& q) const;
  /// Base-space weight for lebesgue/weighted; throws for epigraph measures.
  DensityFn base_density() const;
  std::string name() const;
};

/// Parses the CLI measure syntax:
///   mu | nu | mu_p:2 | nu_p:2 | lebesgue | weighted:alpha.json
NamedMeasure parse_measure(const std::string& text, int n = 1);

struct ConcavityReport {
  bool passed = true;
  double worst_margin = 0.0;  // most negative density((1-l)x+ly) - M_kappa
  std::array<double, 3> witness_x{}, witness_y{};
  double witness_lambda = 0.5;
  std::uint64_t seed = 0;
};

/// Samples triples (x, y, lambda) in `box_lo..box_hi` and tests the density-
/// level kappa-concavity inequality within tol. Statistical, seed-recorded.
ConcavityReport kappa_concavity_check(const std::function<double(const std::array<double, 3>&)>& density,
                                      int ambient_dim, double kappa, const std::array<double, 3>& box_lo,
                                      const std::array<double, 3>& box_hi, int sample_count,
                                      std::uint64_t seed, double tol = 1e-9);

enum class EpiRoute { epi, f_epi };

struct EpiMeasureResult {
  double value = 0.0;
  double refinement_error = 0.0;
  double truncation_bound = 0.0;  // estimated mass outside the z-window
};

struct EpiMeasureOptions {
  // z-window for the improper vertical integrals (nu, nu_p, mu_p); the mass
  // outside is estimated and reported as truncation_bound.
  double z_min = 1e-4;
  double z_max = 1e4;
  int z_samples = 4096;
  Quadrature quad{};
};

/// Measure of the (possibly F-mapped) epi-graph of phi:
///   route epi:   m({(x,z): z > phi(x)})
///   route f_epi: m(F(epi phi)), F(x,z) = (x/z, 1/z)
/// For mu and mu_p the vertical fiber integral has a closed form
/// (exp(-phi(x)) and phi(x)^-p), so the epi route reduces to the shared
/// base-space quadrature. The F-image route integrates the density over the
/// image region directly: per z-slice the section {w : phi(w/z) < 1/z} is
/// measured on the interpolant and the slices are accumulated over a
/// logarithmic z-grid. Throws when the refinement diverges.
EpiMeasureResult measure_of_epi(const GridFunction& phi, const NamedMeasure& m, EpiRoute route,
                                const EpiMeasureOptions& opts = {});

}  // namespace polarpl
