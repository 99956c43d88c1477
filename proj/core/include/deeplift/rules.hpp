#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "deeplift/graph.hpp"
#include "deeplift/tensor.hpp"

// Local multiplier rules m_xy for single layers. Each rule guarantees summation-to-delta
// for its layer: sum_x m_xy * delta_x == delta_y.
namespace deeplift::rules {

// Threshold on |delta_x| below which the rescale rule falls back to the derivative at the
// reference, and below which the max rule stops forming delta_y / delta_x.
inline constexpr double kStableEpsilon = 1e-7;

// Crossings of maxout pieces closer than this in path time are merged.
inline constexpr double kCrossingTolerance = 1e-12;

// Affine and Conv1D: the multipliers are the weights themselves.
const Tensor& affine_multipliers(const op::Affine& layer);

// delta_out / delta_in, or `derivative_at_reference` when |delta_in| < epsilon.
double rescale_multiplier(double delta_in, double delta_out, double derivative_at_reference,
                          double epsilon = kStableEpsilon);

// Derivative of a single-input nonlinearity at x. `slope` is the PReLU slope (ignored otherwise).
// ReLU/PReLU use the left derivative at exactly 0.
double activation_derivative(const NodeKind& kind, double x, double slope = 0.0);

// Applies a single-input nonlinearity.
double activate(const NodeKind& kind, double x, double slope = 0.0);

// Max over a window. The whole delta_y is credited to the current argmax. On exact ties the
// first tied input with |delta| > epsilon wins, falling back to the first tied input; the
// multiplier form delta_y / delta_winner exists only when |delta_winner| > epsilon.
struct MaxRouting {
  std::size_t winner = 0;
  double delta_out = 0.0;
  double contribution = 0.0;
  std::optional<double> multiplier;
};
MaxRouting route_max(std::span<const double> values, std::span<const double> references,
                     double epsilon = kStableEpsilon);

// Element-wise product y = x1 * x2: m1 = ref2 + delta2 / 2, m2 = ref1 + delta1 / 2.
struct ProductMultipliers {
  double first;
  double second;
};
ProductMultipliers product_multipliers(double reference1, double delta1, double reference2, double delta2);

// One linear stretch of the upper envelope along the path t in [0, 1].
struct Segment {
  std::size_t piece;
  double begin;
  double end;

  double fraction() const { return end - begin; }
};

// Upper envelope of affine pieces restricted to the straight path from reference to input.
// Segments are contiguous, cover [0, 1] and have strictly increasing boundaries.
struct SegmentDecomposition {
  std::vector<Segment> segments;

  // Piece dominating at path time t (right-continuous at boundaries).
  std::size_t piece_at(double t) const;
};

// Envelope of lines value_i(t) = offsets[i] + slopes[i] * t on [0, 1]. At t = 0 ties go to
// the larger slope, then the lower index.
SegmentDecomposition upper_envelope(std::span<const double> offsets, std::span<const double> slopes,
                                    double tolerance = kCrossingTolerance);

// Decomposition for output unit `unit` of a maxout layer along reference -> input.
SegmentDecomposition maxout_segments(const op::Maxout& layer, std::size_t unit, std::span<const double> reference,
                                     std::span<const double> input);

// m_x = sum_s l(s) * w(s)_x for one output unit.
std::vector<double> maxout_multipliers(const op::Maxout& layer, std::size_t unit,
                                       const SegmentDecomposition& decomposition);

}  // namespace deeplift::rules
