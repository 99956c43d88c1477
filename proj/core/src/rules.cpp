#include "deeplift/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deeplift/error.hpp"
#include "layers.hpp"
#include "reverse_sweep.hpp"

namespace deeplift::rules {

using detail::overloaded;

const Tensor& affine_multipliers(const op::Affine& layer) { return layer.weights; }

double rescale_multiplier(double delta_in, double delta_out, double derivative_at_reference, double epsilon) {
  if (std::abs(delta_in) < epsilon) return derivative_at_reference;
  return delta_out / delta_in;
}

double activation_derivative(const NodeKind& kind, double x, double slope) {
  return std::visit(overloaded{
                        [&](const op::ReLU&) { return x > 0 ? 1.0 : 0.0; },
                        [&](const op::PReLU&) { return x > 0 ? 1.0 : slope; },
                        [&](const op::Sigmoid&) { return layers::sigmoid_derivative(x); },
                        [&](const op::Tanh&) { return layers::tanh_derivative(x); },
                        [&](const auto&) -> double {
                          throw AttributionError(std::string(kind_name(kind)) + " is not a single-input nonlinearity");
                        },
                    },
                    kind);
}

double activate(const NodeKind& kind, double x, double slope) {
  return std::visit(overloaded{
                        [&](const op::ReLU&) { return x > 0 ? x : 0.0; },
                        [&](const op::PReLU&) { return x > 0 ? x : slope * x; },
                        [&](const op::Sigmoid&) { return layers::sigmoid(x); },
                        [&](const op::Tanh&) { return std::tanh(x); },
                        [&](const auto&) -> double {
                          throw AttributionError(std::string(kind_name(kind)) + " is not a single-input nonlinearity");
                        },
                    },
                    kind);
}

MaxRouting route_max(std::span<const double> values, std::span<const double> references, double epsilon) {
  if (values.empty() || values.size() != references.size()) {
    throw ShapeError("route_max needs equally sized, non-empty value and reference windows");
  }
  MaxRouting r;
  const auto top = std::max_element(values.begin(), values.end());
  r.winner = static_cast<std::size_t>(top - values.begin());
  r.delta_out = *top - *std::max_element(references.begin(), references.end());
  r.contribution = r.delta_out;
  // Among exactly tied maxima, take the first one that still admits the ratio form. Ties
  // are common after a ReLU, where the first zero may sit at its reference while another
  // zero carries the whole delta.
  for (std::size_t i = r.winner; i < values.size(); ++i) {
    if (values[i] != *top) continue;
    const double delta = values[i] - references[i];
    if (std::abs(delta) > epsilon) {
      r.winner = i;
      r.multiplier = r.delta_out / delta;
      break;
    }
  }
  return r;
}

ProductMultipliers product_multipliers(double reference1, double delta1, double reference2, double delta2) {
  return {reference2 + 0.5 * delta2, reference1 + 0.5 * delta1};
}

std::size_t SegmentDecomposition::piece_at(double t) const {
  for (const auto& s : segments) {
    if (t < s.end) return s.piece;
  }
  return segments.back().piece;
}

SegmentDecomposition upper_envelope(std::span<const double> offsets, std::span<const double> slopes,
                                    double tolerance) {
  const std::size_t n = offsets.size();
  if (n == 0 || slopes.size() != n) throw ShapeError("upper_envelope needs matching, non-empty offsets and slopes");

  // Dominating piece at t = 0: highest value, then steepest, then lowest index.
  std::size_t current = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (offsets[i] > offsets[current] || (offsets[i] == offsets[current] && slopes[i] > slopes[current])) {
      current = i;
    }
  }

  SegmentDecomposition result;
  double t = 0.0;
  while (true) {
    // Earliest crossing by a steeper piece; near-simultaneous crossings go to the steepest.
    double next = std::numeric_limits<double>::infinity();
    std::size_t successor = current;
    for (std::size_t i = 0; i < n; ++i) {
      if (slopes[i] <= slopes[current]) continue;
      double crossing = (offsets[current] - offsets[i]) / (slopes[i] - slopes[current]);
      crossing = std::max(crossing, t);
      if (crossing < next - tolerance) {
        next = crossing;
        successor = i;
      } else if (crossing <= next + tolerance && slopes[i] > slopes[successor]) {
        next = std::min(next, crossing);
        successor = i;
      }
    }
    if (successor == current || next >= 1.0 - tolerance) {
      result.segments.push_back({current, t, 1.0});
      break;
    }
    if (next - t > tolerance) {
      result.segments.push_back({current, t, next});
      t = next;
    }
    current = successor;
  }
  return result;
}

SegmentDecomposition maxout_segments(const op::Maxout& layer, std::size_t unit, std::span<const double> reference,
                                     std::span<const double> input) {
  const auto pieces = layers::maxout_pieces(layer);
  const auto units = layers::maxout_units(layer);
  const auto fan_in = layers::maxout_fan_in(layer);
  if (unit >= units || reference.size() != fan_in || input.size() != fan_in) {
    throw ShapeError("maxout_segments: unit or vector size does not match the layer");
  }
  std::vector<double> offsets(pieces);
  std::vector<double> slopes(pieces);
  for (std::size_t p = 0; p < pieces; ++p) {
    const double* row = layer.weights.values().data() + (p * units + unit) * fan_in;
    offsets[p] = layers::maxout_piece_value(layer, p, unit, reference);
    double slope = 0.0;
    for (std::size_t i = 0; i < fan_in; ++i) slope += row[i] * (input[i] - reference[i]);
    slopes[p] = slope;
  }
  return upper_envelope(offsets, slopes);
}

std::vector<double> maxout_multipliers(const op::Maxout& layer, std::size_t unit,
                                       const SegmentDecomposition& decomposition) {
  const auto units = layers::maxout_units(layer);
  const auto fan_in = layers::maxout_fan_in(layer);
  std::vector<double> m(fan_in, 0.0);
  for (const auto& s : decomposition.segments) {
    const double l = s.fraction();
    const double* row = layer.weights.values().data() + (s.piece * units + unit) * fan_in;
    for (std::size_t i = 0; i < fan_in; ++i) m[i] += l * row[i];
  }
  return m;
}

}  // namespace deeplift::rules
