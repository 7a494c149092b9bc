#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polarpl/grid.hpp"

namespace polarpl {

/// Sampling parameters for the convolution infima. t is sampled in the open
/// interval (0,1) (Chebyshev-like, symmetric under t -> 1-t) so that every
/// weight is strictly positive and 0*inf never appears. When a lambda is
/// supplied to an operation, {lambda, 1-lambda, 1/2} are spliced into the
/// grid; equality cases then resolve exactly instead of to grid accuracy.
struct ConvolutionParams {
  int t_samples = 65;
  int line_samples = 12;  // epi-route samples per fiber
  int x_stride = 1;       // decomposition-search stride (coarse grids in 2D)
  std::optional<Point> out_lo, out_hi;
  std::optional<std::array<int, 2>> out_shape;
};

std::vector<double> chebyshev_t_grid(int t_samples, std::optional<double> lambda = {});

/// Classical infimal convolution:
///   (phi box_lambda psi)(z) = inf { (1-lambda) phi(x) + lambda psi(y) :
///                                   z = (1-lambda) x + lambda y },
/// the pullback of the Minkowski average of epi-graphs. Discrete inf over x
/// on phi's grid with y evaluated by interpolation. inf(emptyset) = +inf.
GridFunction inf_conv(const GridFunction& phi, const GridFunction& psi, double lambda,
                      const ConvolutionParams& params = {});

/// Geometric lambda-inf-convolution through the inf-max formula
///   (phi gbox_lambda psi)(z) =
///     inf_{0<t<1} inf_{z=(1-t)x+ty} max{ (1-t)/(1-lambda) phi(x), t/lambda psi(y) }.
/// Output over-estimates the true value and converges from above under
/// refinement of the t/x sampling.
GridFunction ginf_conv(const GridFunction& phi, const GridFunction& psi, double lambda,
                       const ConvolutionParams& params = {});

/// Unweighted geometric inf-convolution (the lambda weights absorbed):
///   (phi gbox psi)(z) = inf_t inf_{z=(1-t)x+ty} max{ (1-t)phi(x), t psi(y) }.
GridFunction ginf_conv_unweighted(const GridFunction& phi, const GridFunction& psi,
                                  const ConvolutionParams& params = {});

/// Independent epi-graph route: samples F(epi phi) and F(epi psi), forms the
/// pairwise combinations (1-lambda) p + lambda q, maps back through F and
/// keeps the lower envelope per output fiber. Serves as the defining oracle
/// for the formula-based ginf_conv.
GridFunction ginf_conv_epi_oracle(const GridFunction& phi, const GridFunction& psi, double lambda,
                                  const ConvolutionParams& params = {});

/// m-function unweighted geometric inf-convolution:
///   inf over simplex weights t (strictly positive, sum 1) and decompositions
///   z = sum t_i x_i of max_i { t_i phi_i(x_i) }.
/// Direct simplex sampling for m <= 3; larger m folds pairwise (the epi-graph
/// construction is associative).
GridFunction ginf_conv_m(const std::vector<GridFunction>& phis, const ConvolutionParams& params = {});

/// Polar of a sum evaluated two ways.
struct PolarSumResult {
  GridFunction via_formula;  // inf-max formula applied to the polars
  GridFunction direct;       // polarity(phi + psi)
};
PolarSumResult polar_of_sum(const GridFunction& phi, const GridFunction& psi,
                            const ConvolutionParams& params = {});

enum class Theorem { classical, polar, lp };
std::string theorem_name(Theorem t);

/// Pointwise-smallest h satisfying the respective theorem's hypothesis, up to
/// one-sided discretization (over-estimates of the infima shrink h):
///   classical: h = exp(-(phi box_lambda psi)),        phi = -log f, psi = -log g
///   polar:     h = exp(-(phi gbox_lambda psi))
///   lp:        h = 1/eta, eta = ((1-lambda)/f) gbox_lambda (lambda/g), lambda = 1/2
/// f, g must map into [0,1] for classical/polar. Throws on an identically
/// zero f or g.
GridFunction minimal_h(const GridFunction& f, const GridFunction& g, double lambda, Theorem theorem,
                       double p = 1.0, const ConvolutionParams& params = {});

struct HypothesisReport {
  bool passed = true;
  double worst_violation = 0.0;  // most negative LHS - RHS over the sweep
  double witness_t = 0.0;
  Point witness_x{}, witness_y{};
  double tolerance = 0.0;
};

/// Sweeps sampled (t, x, y) triples (z on h's nodes, x on f's nodes, y by
/// interpolation) and reports the worst violation of
///   classical: h((1-l)x+ly)  >= f(x)^(1-l) g(y)^l            (t = lambda only)
///   polar:     h((1-t)x+ty)  >= min{ f(x)^((1-t)/(1-l)), g(y)^(t/l) }
///   lp:        h((1-t)x+ty)  >= min{ f(x)/(1-t), g(y)/t }.
HypothesisReport check_hypothesis(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                                  double lambda, Theorem theorem, const ConvolutionParams& params = {},
                                  double tolerance = 1e-7);

}  // namespace polarpl
