#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polarpl/grid.hpp"
#include "polarpl/inequalities.hpp"

namespace polarpl {

// Ambient points of R^{n+2}, n in {1,2}: coordinates (x_1..x_n, s, z).
using Vec4 = std::array<double, 4>;

/// Convex potential on the ambient space, evaluated in closed form.
using AmbientFn = std::function<double(const Vec4&)>;

AmbientFn zero_potential();
/// max_i(<a_i, q> + b_i); convex for any terms.
AmbientFn max_affine_potential(std::vector<std::pair<Vec4, double>> terms);
/// psi(x, s, z) = alpha(x) + z, the potential of the reduction embedding.
AmbientFn alpha_plus_z_potential(GridFunction alpha, int n);

/// A subset of the half-space H_u = E + R^+ u (E = span of the first n
/// coordinates, u in the (s,z)-plane), parametrized by E-coordinates x and
/// the radial coordinate r >= 0 along u/|u|:
///   K = { x + r*u/|u| : x in the E-box, r_lo(x) <= r <= r_hi(x) }.
/// r_hi absent means fibers unbounded above (epi-graph style sets).
struct SlabRegion {
  int n = 1;
  std::array<double, 2> u{0.0, 1.0};  // direction in the (s,z)-plane
  GridFunction r_lo;
  std::optional<GridFunction> r_hi;

  Vec4 ambient(const Point& x, double r) const;
  bool contains(const Point& x, double r, double tol) const;
};

struct BusemannInstance {
  int n = 1;
  std::array<double, 2> x0{}, x1{};  // linearly independent, (s,z)-plane coords
  double lambda = 0.5;
  SlabRegion k0, k1;
  std::optional<SlabRegion> k_lambda;  // minimal construction when absent
  AmbientFn psi = zero_potential();
  std::string descriptor;
};

struct KLambdaOptions {
  int t_samples = 33;       // interior t used by the tolerance sampler
  int pair_samples = 20000; // random pairs in addition to the boundary sweep
  int fiber_samples = 9;    // radial samples per fiber when sampling K_i
  std::uint64_t seed = 1;
  std::array<int, 2> out_shape{257, 257};
};

struct KLambdaResult {
  std::vector<Vec4> points;  // sampled crossings of segments with H_lambda
  SlabRegion region;         // fiber-interval fit of the crossing set
};

/// Minimal admissible K_lambda: the one-step convex hull of K0, K1 sliced by
/// H_{x_lambda}. Every sampled pair (k0, k1) contributes the exact crossing
/// of its segment with H_lambda (the crossing parameter solves a 2x2 system
/// in the (s,z)-plane); boundary pairs trace the radial envelopes. Throws if
/// x0, x1 are linearly dependent or the crossing set is empty.
KLambdaResult build_k_lambda(const SlabRegion& k0, const SlabRegion& k1, const std::array<double, 2>& x0,
                             const std::array<double, 2>& x1, double lambda, const KLambdaOptions& opts = {});

struct SlabIntegralOptions {
  int r_samples = 512;      // radial quadrature points per fiber
  double r_cut = 60.0;      // unbounded fibers stop once psi - psi_min > r_cut
  double r_cap = 1e6;       // hard radial cap; hitting it flags divergence
};

/// integral of exp(-psi) over K with respect to (n+1)-dimensional Hausdorff
/// measure on the half-space. Throws when an unbounded fiber fails to decay.
double slab_integral(const SlabRegion& k, const AmbientFn& psi, const SlabIntegralOptions& opts = {});

struct BusemannOptions {
  double rel_tol = 0.02;
  KLambdaOptions k_lambda{};
  SlabIntegralOptions integral{};
  // Tolerance for the hypothesis inclusion spot-check of a supplied K_lambda.
  double inclusion_tol_factor = 2.0;
  int inclusion_samples = 4000;
};

/// Checks |x_lambda| / integral(K_lambda) <= (1-lambda)|x0|/integral(K0)
///                                           + lambda |x1|/integral(K1).
/// A supplied K_lambda is spot-checked against the hypothesis inclusion
/// first; a violation throws with the witness point in the message.
VerificationReport verify_busemann(const BusemannInstance& inst, const BusemannOptions& opts = {});

struct ReductionEmbedding {
  double s0 = 1.0, s1 = 2.0;  // 0 < s0 < s1
  double lambda = 0.5;
  GridFunction phi0, phi1;
  std::optional<GridFunction> phi_lambda;  // default: phi0 gbox_lambda phi1
  GridFunction alpha;                      // convex weight on R^n
};

/// The fractional linear involution (x, s, z) -> (x/z, s/z, 1/z).
Vec4 f_tilde(const Vec4& q, int n);

struct ReductionReport {
  bool all_passed = true;
  // (a) weighted-integral identity for i = 0, lambda, 1
  std::array<double, 3> identity_rel_err{};
  bool identity_ok = true;
  // (b) F~ o F~ = id on random points
  double involution_err = 0.0;
  bool involution_ok = true;
  // (c) F~ maps segments to segments
  double collinearity_residual = 0.0;
  bool segments_ok = true;
  // (d) ((1-t)K0 + tK1) cap H_lambda inside K_lambda
  double worst_inclusion_margin = 0.0;
  bool inclusion_ok = true;
  std::vector<std::string> failures;
};

struct ReductionOptions {
  Quadrature quad{Quadrature::Rule::midpoint, 2};
  ConvolutionParams conv{};
  int random_points = 200;
  int segment_samples = 33;
  int inclusion_pairs = 4000;
  std::uint64_t seed = 7;
  double identity_rel_tol = 2e-3;
  double collinearity_tol = 1e-9;
};

ReductionReport reduction_check(const ReductionEmbedding& emb, const ReductionOptions& opts = {});

}  // namespace polarpl
