#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "polarpl/convolutions.hpp"
#include "polarpl/grid.hpp"
#include "polarpl/measures.hpp"

namespace polarpl {

enum class Verdict { pass, fail, inconclusive };
std::string verdict_name(Verdict v);

/// Result of one inequality check. verdict == pass iff
/// lhs >= rhs * (1 - rel_tol) (resp. the mirrored test for upper-bound
/// theorems) and the hypothesis check passed; inconclusive when the sign of
/// the tolerated margin flipped between the last two quadrature refinements.
struct VerificationReport {
  std::string theorem;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs
  double rel_tol = 0.02;
  std::vector<int> grid_shape;
  int t_samples = 0;
  bool hypothesis_checked = false;
  bool hypothesis_passed = true;
  double worst_violation = 0.0;
  double witness_t = 0.0;
  std::vector<double> witness_x, witness_y;
  nlohmann::json instance;  // seed or file references, lambda, p, scale
  double truncation_bound = 0.0;
  Verdict verdict = Verdict::pass;

  nlohmann::ordered_json to_json() const;
  static VerificationReport from_json(const nlohmann::json& j);
};

struct VerifyOptions {
  double rel_tol = 0.02;
  ConvolutionParams conv{};
  Quadrature quad{Quadrature::Rule::midpoint, 2};
  double hyp_tol = 1e-7;  // scaled by max h internally
  nlohmann::json instance_descriptor;
};

/// Classical Prekopa-Leindler: hypothesis at t = lambda,
/// conclusion integral(h) >= M_0^lambda(integral f, integral g).
/// f, g are rescaled into [0,1] by their common max; the scale multiplies
/// back into the reported integrals. h defaults to minimal_h(classical).
VerificationReport verify_classical_pl(const GridFunction& f, const GridFunction& g, double lambda,
                                       const std::optional<GridFunction>& h = {},
                                       const VerifyOptions& opts = {});

/// Polar Prekopa-Leindler: hypothesis over every t in (0,1),
/// conclusion integral(h) >= M_{-1}^lambda(integral f, integral g).
VerificationReport verify_polar_pl(const GridFunction& f, const GridFunction& g, double lambda,
                                   const std::optional<GridFunction>& h = {}, const VerifyOptions& opts = {});

/// Same with both sides integrated against the log-concave weight
/// exp(-alpha). alpha must pass a sampled midpoint-convexity spot-check.
VerificationReport verify_polar_pl_measure(const GridFunction& f, const GridFunction& g, double lambda,
                                           const GridFunction& alpha, const std::optional<GridFunction>& h = {},
                                           const VerifyOptions& opts = {});

/// Lp version: hypothesis h((1-t)x+ty) >= min{f(x)/(1-t), g(y)/t},
/// conclusion ||h||_p >= ||f||_p + ||g||_p. Throws on infinite norms.
VerificationReport verify_lp(const GridFunction& f, const GridFunction& g, double p,
                             const std::optional<GridFunction>& h = {}, const VerifyOptions& opts = {});

/// Deterministic instance generators targeting the function classes of the
/// verified theorems.
struct InstanceGenerator {
  enum class Kind { cvx0_max_affine, log_concave, bounded_measurable, indicator_convex };
  Kind kind = Kind::cvx0_max_affine;
  std::uint64_t seed = 0;
  int n = 1;
  int terms = 4;  // max-affine term count (anchors included)
  // Anchor slopes keep the instances coercive enough that box truncation
  // stays below the grid-error budget of the transform identities.
  double anchor_slope_min = 0.6, anchor_slope_max = 2.5;
  double offset_min = 0.05, offset_max = 0.8;
  double extra_slope_max = 2.5, extra_offset_max = 1.5;
  Point lo{-12.0, -12.0}, hi{12.0, 12.0};
  std::array<int, 2> shape{513, 513};

  static InstanceGenerator defaults(Kind kind, std::uint64_t seed, int n = 1);
};

/// Deterministic function of the seed. cvx0 outputs satisfy phi >= 0,
/// phi(0) = 0 and midpoint convexity; log-concave outputs lie in [0,1];
/// indicator outputs are 1 on an interval (or box) containing 0.
GridFunction generate(const InstanceGenerator& gen);

// Convexity spot-check used by generators and the weighted verifier.
bool midpoint_convex_spot_check(const GridFunction& f, int triples, std::uint64_t seed, double tol = 1e-7);

// Default lambda grid for sweeps.
const std::vector<double>& default_lambda_grid();

struct SweepRow {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double p = 0.0;
  double lhs = 0.0, rhs = 0.0, margin = 0.0;
  Verdict verdict = Verdict::pass;
  std::string resolution;
};

/// Runs `count` seeded instances of one suite; lambda (and p for lp) cycle
/// through their default grids.
std::vector<SweepRow> sweep_suite(const std::string& suite, int count, std::uint64_t seed,
                                  const VerifyOptions& opts = {});

}  // namespace polarpl
