#include "deeplift/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "deeplift/error.hpp"
#include "layers.hpp"
#include "reverse_sweep.hpp"

namespace deeplift {

using detail::overloaded;

GradientTrace::GradientTrace(const Graph& graph, Target target, std::vector<Tensor> gradients)
    : graph_(&graph), target_(std::move(target)), gradients_(std::move(gradients)) {}

const Tensor& GradientTrace::at(std::string_view id) const { return gradients_.at(graph_->index_of(id)); }

ParameterGradients ParameterGradients::zeros_like(const Graph& graph) {
  ParameterGradients g;
  g.per_node.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (const Tensor* p : parameters(graph.node(i).kind)) g.per_node[i].emplace_back(p->shape());
  }
  return g;
}

void ParameterGradients::add(const ParameterGradients& other) {
  for (std::size_t i = 0; i < per_node.size(); ++i) {
    for (std::size_t k = 0; k < per_node[i].size(); ++k) per_node[i][k] += other.per_node[i][k];
  }
}

void ParameterGradients::scale(double factor) {
  for (auto& node : per_node) {
    for (auto& t : node) {
      for (double& v : t.values()) v *= factor;
    }
  }
}

std::vector<Tensor> backpropagate(const Graph& graph, const ForwardTrace& trace, std::size_t seed_node,
                                  const Tensor& seed, ParameterGradients* params) {
  auto local = [&](std::size_t i, const Tensor& g, std::span<Tensor* const> gin) {
    const auto& node = graph.node(i);
    const auto& ins = graph.input_indices(i);
    const Tensor& x = trace.at(ins[0]);
    const Tensor& y = trace.at(i);
    std::visit(
        overloaded{
            [&](const op::Input&) {},
            [&](const op::Affine& a) {
              layers::affine_backward_input(a, g.values(), gin[0]->values());
              if (params) {
                auto& pg = params->per_node[i];
                layers::affine_backward_params(x.values(), g.values(), pg[0], pg[1]);
              }
            },
            [&](const op::Conv1D& c) {
              layers::conv_backward_input(c, g, *gin[0]);
              if (params) {
                auto& pg = params->per_node[i];
                layers::conv_backward_params(c, x, g, pg[0], pg[1]);
              }
            },
            [&](const op::MaxPool1D& p) {
              const auto channels = layers::channels_of(x.shape());
              for (std::size_t w = 0; w < y.shape()[0]; ++w) {
                for (std::size_t c = 0; c < channels; ++c) {
                  (*gin[0])[layers::pool_argmax(p, x, w, c) * channels + c] += g[w * channels + c];
                }
              }
            },
            [&](const op::ReLU&) {
              for (std::size_t k = 0; k < x.size(); ++k) {
                if (x[k] > 0) (*gin[0])[k] += g[k];
              }
            },
            [&](const op::PReLU& p) {
              const auto channels = p.slope.size();
              for (std::size_t k = 0; k < x.size(); ++k) {
                const auto c = layers::channel_of(k, channels);
                if (x[k] > 0) {
                  (*gin[0])[k] += g[k];
                } else {
                  (*gin[0])[k] += g[k] * p.slope[c];
                  if (params) params->per_node[i][0][c] += g[k] * x[k];
                }
              }
            },
            [&](const op::Sigmoid&) {
              for (std::size_t k = 0; k < x.size(); ++k) (*gin[0])[k] += g[k] * y[k] * (1.0 - y[k]);
            },
            [&](const op::Tanh&) {
              for (std::size_t k = 0; k < x.size(); ++k) (*gin[0])[k] += g[k] * (1.0 - y[k] * y[k]);
            },
            [&](const op::Maxout& m) {
              const auto units = layers::maxout_units(m);
              const auto in = layers::maxout_fan_in(m);
              for (std::size_t j = 0; j < units; ++j) {
                if (g[j] == 0.0) continue;
                const auto piece = layers::maxout_active_piece(m, j, x.values());
                const std::size_t row = (piece * units + j) * in;
                for (std::size_t k = 0; k < in; ++k) (*gin[0])[k] += g[j] * m.weights[row + k];
                if (params) {
                  auto& pg = params->per_node[i];
                  for (std::size_t k = 0; k < in; ++k) pg[0][row + k] += g[j] * x[k];
                  pg[1][piece * units + j] += g[j];
                }
              }
            },
            [&](const op::ElementwiseProduct&) {
              const Tensor& x2 = trace.at(ins[1]);
              for (std::size_t k = 0; k < x.size(); ++k) {
                (*gin[0])[k] += g[k] * x2[k];
                (*gin[1])[k] += g[k] * x[k];
              }
            },
            [&](const op::Softmax&) {
              double dot = 0.0;
              for (std::size_t k = 0; k < y.size(); ++k) dot += g[k] * y[k];
              for (std::size_t k = 0; k < y.size(); ++k) (*gin[0])[k] += y[k] * (g[k] - dot);
            },
        },
        node.kind);
  };
  return detail::reverse_sweep(graph, seed_node, seed, local);
}

GradientTrace backward(const Graph& graph, const ForwardTrace& trace, const Target& target) {
  const auto t = graph.find(target.node);
  if (!t) throw GraphError("unknown target node '" + target.node + "'");
  Tensor seed(graph.node(*t).output_shape);
  if (target.index >= seed.size()) {
    throw GraphError("target index " + std::to_string(target.index) + " out of range for '" + target.node + "'");
  }
  seed[target.index] = 1.0;
  return GradientTrace(graph, target, backpropagate(graph, trace, *t, seed, nullptr));
}

std::vector<std::uint32_t> activation_pattern(const Graph& graph, const ForwardTrace& trace) {
  std::vector<std::uint32_t> pattern;
  for (auto i : graph.order()) {
    const auto& node = graph.node(i);
    if (is<op::Input>(node.kind)) continue;
    const Tensor& x = trace.at(graph.input_indices(i)[0]);
    std::visit(overloaded{
                   [&](const op::ReLU&) {
                     for (double v : x.values()) pattern.push_back(v > 0);
                   },
                   [&](const op::PReLU&) {
                     for (double v : x.values()) pattern.push_back(v > 0);
                   },
                   [&](const op::MaxPool1D& p) {
                     const auto channels = layers::channels_of(x.shape());
                     for (std::size_t w = 0; w < node.output_shape[0]; ++w) {
                       for (std::size_t c = 0; c < channels; ++c) {
                         pattern.push_back(static_cast<std::uint32_t>(layers::pool_argmax(p, x, w, c)));
                       }
                     }
                   },
                   [&](const op::Maxout& m) {
                     for (std::size_t j = 0; j < layers::maxout_units(m); ++j) {
                       pattern.push_back(static_cast<std::uint32_t>(layers::maxout_active_piece(m, j, x.values())));
                     }
                   },
                   [](const auto&) {},
               },
               node.kind);
  }
  return pattern;
}

namespace {

double target_value(const Graph& graph, const InputMap& inputs, const Target& target) {
  return forward(graph, inputs).at(target.node)[target.index];
}

// True when some +-step probe changes the piecewise-linear regime.
bool probes_cross_kink(const Graph& graph, const InputMap& inputs, double step) {
  const auto base = activation_pattern(graph, forward(graph, inputs));
  for (const auto& [id, tensor] : inputs) {
    for (std::size_t k = 0; k < tensor.size(); ++k) {
      for (double sign : {-1.0, 1.0}) {
        InputMap probe = inputs;
        probe.at(id)[k] += sign * step;
        if (activation_pattern(graph, forward(graph, probe)) != base) return true;
      }
    }
  }
  return false;
}

}  // namespace

FiniteDifferenceReport finite_difference_check(const Graph& graph, const InputMap& inputs, const Target& target,
                                               const FiniteDifferenceOptions& options) {
  FiniteDifferenceReport report;
  InputMap point = inputs;
  std::mt19937_64 rng(options.perturb_seed);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  int attempts = 0;
  while (probes_cross_kink(graph, point, options.step)) {
    if (attempts++ >= options.max_perturbations) {
      report.note = "kink could not be avoided after " + std::to_string(options.max_perturbations) + " perturbations";
      return report;
    }
    for (auto& [id, tensor] : point) {
      for (double& v : tensor.values()) v += jitter(rng);
    }
    report.perturbed = true;
  }
  if (report.perturbed) {
    report.note = "input at a kink; perturbed " + std::to_string(attempts) + " time(s) before differencing";
  }

  const auto trace = forward(graph, point);
  const auto grads = backward(graph, trace, target);
  for (const auto& [id, tensor] : point) {
    const Tensor& analytic = grads.at(id);
    for (std::size_t k = 0; k < tensor.size(); ++k) {
      InputMap plus = point;
      InputMap minus = point;
      plus.at(id)[k] += options.step;
      minus.at(id)[k] -= options.step;
      const double numeric =
          (target_value(graph, plus, target) - target_value(graph, minus, target)) / (2.0 * options.step);
      const double a = analytic[k];
      const double diff = std::abs(a - numeric);
      const double scale = std::max({std::abs(a), std::abs(numeric), options.relative_floor});
      report.max_absolute_deviation = std::max(report.max_absolute_deviation, diff);
      report.max_relative_deviation = std::max(report.max_relative_deviation, diff / scale);
      ++report.checked;
    }
  }
  report.passed = report.max_relative_deviation <= options.tolerance;
  return report;
}

}  // namespace deeplift
