#pragma once

// Dense kernels shared by forward evaluation, gradients, multipliers and relevance.

#include <cmath>
#include <cstddef>
#include <span>

#include "deeplift/graph.hpp"
#include "deeplift/tensor.hpp"

namespace deeplift::layers {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

inline double tanh_derivative(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

// y = W x + b
void affine_forward(const op::Affine& a, std::span<const double> x, std::span<double> y);
// gx += W^T g
void affine_backward_input(const op::Affine& a, std::span<const double> g, std::span<double> gx);
// gW += g x^T, gb += g
void affine_backward_params(std::span<const double> x, std::span<const double> g, Tensor& gw, Tensor& gb);

void conv_forward(const op::Conv1D& c, const Tensor& x, Tensor& y);
void conv_backward_input(const op::Conv1D& c, const Tensor& g, Tensor& gx);
void conv_backward_params(const op::Conv1D& c, const Tensor& x, const Tensor& g, Tensor& gf, Tensor& gb);

// Half-open row range [begin, end) covered by pooling window `w`.
struct Window {
  std::size_t begin;
  std::size_t end;
};
Window pool_window(const op::MaxPool1D& p, std::size_t length, std::size_t w);

// Channels of a rank-1 or rank-2 tensor (rank 1 counts as one channel).
inline std::size_t channels_of(const Shape& s) { return s.size() == 2 ? s[1] : 1; }

// Row of the first maximum in window w, channel c.
std::size_t pool_argmax(const op::MaxPool1D& p, const Tensor& x, std::size_t w, std::size_t c);

void maxpool_forward(const op::MaxPool1D& p, const Tensor& x, Tensor& y);

// Value of piece `piece` for output unit `unit`.
double maxout_piece_value(const op::Maxout& m, std::size_t piece, std::size_t unit, std::span<const double> x);
std::size_t maxout_pieces(const op::Maxout& m);
std::size_t maxout_units(const op::Maxout& m);
std::size_t maxout_fan_in(const op::Maxout& m);
// Piece achieving the max (first on ties).
std::size_t maxout_active_piece(const op::Maxout& m, std::size_t unit, std::span<const double> x);

// Per-channel slope index for flat element i of a tensor whose last extent is `channels`.
inline std::size_t channel_of(std::size_t i, std::size_t channels) { return i % channels; }

}  // namespace deeplift::layers
