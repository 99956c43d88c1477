#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeplift/forward.hpp"
#include "deeplift/graph.hpp"

namespace deeplift {

// d target / d activation for every node of the graph (zero for nodes the target does
// not depend on).
class GradientTrace {
 public:
  GradientTrace(const Graph& graph, Target target, std::vector<Tensor> gradients);

  const Target& target() const { return target_; }
  const Tensor& at(std::size_t index) const { return gradients_.at(index); }
  const Tensor& at(std::string_view id) const;
  std::span<const Tensor> gradients() const { return gradients_; }

 private:
  const Graph* graph_;
  Target target_;
  std::vector<Tensor> gradients_;
};

// Gradients of the trainable tensors, indexed [node index][parameter slot] in the
// order returned by parameters(NodeKind&).
struct ParameterGradients {
  std::vector<std::vector<Tensor>> per_node;

  static ParameterGradients zeros_like(const Graph& graph);
  void add(const ParameterGradients& other);
  void scale(double factor);
};

GradientTrace backward(const Graph& graph, const ForwardTrace& trace, const Target& target);

// Reverse pass seeded with an arbitrary upstream tensor at `seed_node`. Accumulates
// parameter gradients into `params` when non-null. Returns per-node activation gradients.
std::vector<Tensor> backpropagate(const Graph& graph, const ForwardTrace& trace, std::size_t seed_node,
                                  const Tensor& seed, ParameterGradients* params);

struct FiniteDifferenceReport {
  double max_relative_deviation = 0.0;
  double max_absolute_deviation = 0.0;
  std::size_t checked = 0;
  bool passed = false;
  bool perturbed = false;
  std::string note;
};

struct FiniteDifferenceOptions {
  double step = 1e-5;
  double tolerance = 1e-6;
  // Denominator floor of the relative deviation |a - n| / max(|a|, |n|, floor).
  double relative_floor = 1e-3;
  std::uint64_t perturb_seed = 17;
  int max_perturbations = 25;
};

// Compares analytic gradients of `target` w.r.t. every input element with central
// differences. When a +-step probe changes the activation pattern (a ReLU sign, a pool
// argmax, a maxout piece) the input sits at a kink; it is then jittered and retried, and
// the report says so.
FiniteDifferenceReport finite_difference_check(const Graph& graph, const InputMap& inputs, const Target& target,
                                               const FiniteDifferenceOptions& options = {});

// Piecewise-linear regime of a trace: ReLU/PReLU signs, pool argmaxes and maxout pieces.
std::vector<std::uint32_t> activation_pattern(const Graph& graph, const ForwardTrace& trace);

}  // namespace deeplift
