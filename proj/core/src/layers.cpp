#include "layers.hpp"

#include <algorithm>

namespace deeplift::layers {

void affine_forward(const op::Affine& a, std::span<const double> x, std::span<double> y) {
  const auto out = a.weights.shape()[0];
  const auto in = a.weights.shape()[1];
  const double* w = a.weights.values().data();
  for (std::size_t j = 0; j < out; ++j) {
    double acc = a.bias[j];
    const double* row = w + j * in;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[j] = acc;
  }
}

void affine_backward_input(const op::Affine& a, std::span<const double> g, std::span<double> gx) {
  const auto out = a.weights.shape()[0];
  const auto in = a.weights.shape()[1];
  const double* w = a.weights.values().data();
  for (std::size_t j = 0; j < out; ++j) {
    const double gj = g[j];
    if (gj == 0.0) continue;
    const double* row = w + j * in;
    for (std::size_t i = 0; i < in; ++i) gx[i] += gj * row[i];
  }
}

void affine_backward_params(std::span<const double> x, std::span<const double> g, Tensor& gw, Tensor& gb) {
  const auto out = gw.shape()[0];
  const auto in = gw.shape()[1];
  double* w = gw.values().data();
  for (std::size_t j = 0; j < out; ++j) {
    const double gj = g[j];
    gb[j] += gj;
    if (gj == 0.0) continue;
    double* row = w + j * in;
    for (std::size_t i = 0; i < in; ++i) row[i] += gj * x[i];
  }
}

void conv_forward(const op::Conv1D& c, const Tensor& x, Tensor& y) {
  const auto count = c.filters.shape()[0];
  const auto width = c.filters.shape()[1];
  const auto channels = c.filters.shape()[2];
  const auto positions = y.shape()[0];
  const double* f = c.filters.values().data();
  const double* xv = x.values().data();
  double* yv = y.values().data();
  const std::size_t span = width * channels;
  for (std::size_t p = 0; p < positions; ++p) {
    const double* patch = xv + p * c.stride * channels;
    for (std::size_t k = 0; k < count; ++k) {
      const double* filt = f + k * span;
      double acc = c.bias[k];
      for (std::size_t e = 0; e < span; ++e) acc += filt[e] * patch[e];
      yv[p * count + k] = acc;
    }
  }
}

void conv_backward_input(const op::Conv1D& c, const Tensor& g, Tensor& gx) {
  const auto count = c.filters.shape()[0];
  const auto width = c.filters.shape()[1];
  const auto channels = c.filters.shape()[2];
  const auto positions = g.shape()[0];
  const double* f = c.filters.values().data();
  const std::size_t span = width * channels;
  double* gxv = gx.values().data();
  for (std::size_t p = 0; p < positions; ++p) {
    double* patch = gxv + p * c.stride * channels;
    for (std::size_t k = 0; k < count; ++k) {
      const double gk = g[p * count + k];
      if (gk == 0.0) continue;
      const double* filt = f + k * span;
      for (std::size_t e = 0; e < span; ++e) patch[e] += gk * filt[e];
    }
  }
}

void conv_backward_params(const op::Conv1D& c, const Tensor& x, const Tensor& g, Tensor& gf, Tensor& gb) {
  const auto count = c.filters.shape()[0];
  const auto width = c.filters.shape()[1];
  const auto channels = c.filters.shape()[2];
  const auto positions = g.shape()[0];
  const std::size_t span = width * channels;
  const double* xv = x.values().data();
  double* gfv = gf.values().data();
  for (std::size_t p = 0; p < positions; ++p) {
    const double* patch = xv + p * c.stride * channels;
    for (std::size_t k = 0; k < count; ++k) {
      const double gk = g[p * count + k];
      gb[k] += gk;
      if (gk == 0.0) continue;
      double* filt = gfv + k * span;
      for (std::size_t e = 0; e < span; ++e) filt[e] += gk * patch[e];
    }
  }
}

Window pool_window(const op::MaxPool1D& p, std::size_t length, std::size_t w) {
  const std::size_t begin = w * p.stride;
  return {begin, std::min(begin + p.width, length)};
}

std::size_t pool_argmax(const op::MaxPool1D& p, const Tensor& x, std::size_t w, std::size_t c) {
  const auto length = x.shape()[0];
  const auto channels = channels_of(x.shape());
  const auto win = pool_window(p, length, w);
  std::size_t best = win.begin;
  double best_value = x[win.begin * channels + c];
  for (std::size_t r = win.begin + 1; r < win.end; ++r) {
    const double v = x[r * channels + c];
    if (v > best_value) {
      best_value = v;
      best = r;
    }
  }
  return best;
}

void maxpool_forward(const op::MaxPool1D& p, const Tensor& x, Tensor& y) {
  const auto channels = channels_of(x.shape());
  const auto windows = y.shape()[0];
  for (std::size_t w = 0; w < windows; ++w) {
    for (std::size_t c = 0; c < channels; ++c) {
      y[w * channels + c] = x[pool_argmax(p, x, w, c) * channels + c];
    }
  }
}

std::size_t maxout_pieces(const op::Maxout& m) { return m.weights.shape()[0]; }
std::size_t maxout_units(const op::Maxout& m) { return m.weights.shape()[1]; }
std::size_t maxout_fan_in(const op::Maxout& m) { return m.weights.shape()[2]; }

double maxout_piece_value(const op::Maxout& m, std::size_t piece, std::size_t unit, std::span<const double> x) {
  const auto units = maxout_units(m);
  const auto in = maxout_fan_in(m);
  const double* row = m.weights.values().data() + (piece * units + unit) * in;
  double acc = m.bias[piece * units + unit];
  for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
  return acc;
}

std::size_t maxout_active_piece(const op::Maxout& m, std::size_t unit, std::span<const double> x) {
  std::size_t best = 0;
  double best_value = maxout_piece_value(m, 0, unit, x);
  for (std::size_t p = 1; p < maxout_pieces(m); ++p) {
    const double v = maxout_piece_value(m, p, unit, x);
    if (v > best_value) {
      best_value = v;
      best = p;
    }
  }
  return best;
}

}  // namespace deeplift::layers
