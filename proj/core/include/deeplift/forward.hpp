#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeplift/graph.hpp"
#include "deeplift/tensor.hpp"

namespace deeplift {

using InputMap = std::map<std::string, Tensor, std::less<>>;

// Per-node activations from one evaluation. Holds a pointer to the graph it was computed
// from, so the graph must outlive the trace.
class ForwardTrace {
 public:
  ForwardTrace(const Graph& graph, std::vector<Tensor> activations);

  const Graph& graph() const { return *graph_; }
  const Tensor& at(std::size_t index) const { return activations_.at(index); }
  const Tensor& at(std::string_view id) const;
  std::span<const Tensor> activations() const { return activations_; }

  // Activation of the first declared output.
  const Tensor& output() const;

 private:
  const Graph* graph_;
  std::vector<Tensor> activations_;
};

// Evaluates every node. Throws EvaluationError for missing or non-finite inputs and
// GraphError for structurally broken graphs.
ForwardTrace forward(const Graph& graph, const InputMap& inputs);

// Convenience for graphs with exactly one Input node.
ForwardTrace forward(const Graph& graph, const Tensor& input);

// Applies one node's layer semantics.
Tensor evaluate_node(const NodeSpec& node, std::span<const Tensor* const> inputs);

// Input map for graphs with exactly one Input node.
InputMap single_input(const Graph& graph, Tensor input);

}  // namespace deeplift
