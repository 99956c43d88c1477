#include "deeplift/forward.hpp"

#include <algorithm>
#include <cmath>

#include "deeplift/error.hpp"
#include "layers.hpp"

namespace deeplift {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

template <class F>
Tensor map_elements(const Tensor& x, F&& f) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i], i);
  return y;
}

}  // namespace

ForwardTrace::ForwardTrace(const Graph& graph, std::vector<Tensor> activations)
    : graph_(&graph), activations_(std::move(activations)) {}

const Tensor& ForwardTrace::at(std::string_view id) const { return activations_.at(graph_->index_of(id)); }

const Tensor& ForwardTrace::output() const {
  if (graph_->outputs().empty()) throw GraphError("graph declares no outputs");
  return at(graph_->outputs().front());
}

Tensor evaluate_node(const NodeSpec& node, std::span<const Tensor* const> in) {
  const Tensor& x = *in[0];
  return std::visit(
      overloaded{
          [&](const op::Input&) { return x; },
          [&](const op::Affine& a) {
            Tensor y(node.output_shape);
            layers::affine_forward(a, x.values(), y.values());
            return y;
          },
          [&](const op::Conv1D& c) {
            Tensor y(node.output_shape);
            layers::conv_forward(c, x, y);
            return y;
          },
          [&](const op::MaxPool1D& p) {
            Tensor y(node.output_shape);
            layers::maxpool_forward(p, x, y);
            return y;
          },
          [&](const op::ReLU&) { return map_elements(x, [](double v, std::size_t) { return v > 0 ? v : 0.0; }); },
          [&](const op::PReLU& p) {
            const auto channels = p.slope.size();
            return map_elements(x, [&](double v, std::size_t i) {
              return v > 0 ? v : p.slope[layers::channel_of(i, channels)] * v;
            });
          },
          [&](const op::Sigmoid&) { return map_elements(x, [](double v, std::size_t) { return layers::sigmoid(v); }); },
          [&](const op::Tanh&) { return map_elements(x, [](double v, std::size_t) { return std::tanh(v); }); },
          [&](const op::Maxout& m) {
            Tensor y(node.output_shape);
            for (std::size_t j = 0; j < y.size(); ++j) {
              y[j] = layers::maxout_piece_value(m, layers::maxout_active_piece(m, j, x.values()), j, x.values());
            }
            return y;
          },
          [&](const op::ElementwiseProduct&) { return hadamard(x, *in[1]); },
          [&](const op::Softmax&) {
            const double top = *std::max_element(x.values().begin(), x.values().end());
            Tensor y(x.shape());
            double total = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
              y[i] = std::exp(x[i] - top);
              total += y[i];
            }
            for (double& v : y.values()) v /= total;
            return y;
          },
      },
      node.kind);
}

ForwardTrace forward(const Graph& graph, const InputMap& inputs) {
  const auto& order = graph.order();
  std::vector<Tensor> acts(graph.size());
  std::vector<const Tensor*> args;
  for (auto i : order) {
    const auto& node = graph.node(i);
    if (is<op::Input>(node.kind)) {
      auto it = inputs.find(node.id);
      if (it == inputs.end()) throw EvaluationError("missing input tensor for '" + node.id + "'");
      if (it->second.shape() != node.output_shape) {
        throw EvaluationError("input '" + node.id + "' has shape " + to_string(it->second.shape()) +
                              ", expected " + to_string(node.output_shape));
      }
      if (!it->second.all_finite()) throw EvaluationError("input '" + node.id + "' contains non-finite values");
      acts[i] = it->second;
      continue;
    }
    args.clear();
    for (auto j : graph.input_indices(i)) args.push_back(&acts[j]);
    acts[i] = evaluate_node(node, args);
  }
  return ForwardTrace(graph, std::move(acts));
}

InputMap single_input(const Graph& graph, Tensor input) {
  auto ids = graph.input_ids();
  if (ids.size() != 1) {
    throw EvaluationError("graph has " + std::to_string(ids.size()) + " Input nodes; pass an input map");
  }
  InputMap map;
  map.emplace(ids.front(), std::move(input));
  return map;
}

ForwardTrace forward(const Graph& graph, const Tensor& input) { return forward(graph, single_input(graph, input)); }

}  // namespace deeplift
