#pragma once

#include <cstddef>
#include <vector>

#include "deeplift/graph.hpp"
#include "deeplift/tensor.hpp"

namespace deeplift::detail {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// Reverse-topological accumulation shared by gradients, multipliers and relevance.
// `local(node_index, upstream, input_accumulators)` adds the node's contribution to each
// predecessor's accumulator; fan-out sums naturally. Only ancestors of `target` are visited;
// every other node keeps a zero tensor of its declared shape.
template <class Local>
std::vector<Tensor> reverse_sweep(const Graph& graph, std::size_t target, Tensor seed, Local&& local) {
  const auto& order = graph.order();
  const auto relevant = graph.ancestors_of(target);
  std::vector<Tensor> acc;
  acc.reserve(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) acc.emplace_back(graph.node(i).output_shape);
  acc[target] = std::move(seed);

  std::vector<Tensor*> inputs;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto i = *it;
    if (!relevant[i] || is<op::Input>(graph.node(i).kind)) continue;
    inputs.clear();
    for (auto j : graph.input_indices(i)) inputs.push_back(&acc[j]);
    local(i, static_cast<const Tensor&>(acc[i]), inputs);
  }
  return acc;
}

}  // namespace deeplift::detail
