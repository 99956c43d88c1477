#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeplift/forward.hpp"
#include "deeplift/graph.hpp"
#include "deeplift/rules.hpp"

namespace deeplift {

// Activations of every node under the reference input.
struct ReferenceState {
  InputMap input;
  ForwardTrace trace;
};

ReferenceState compute_reference(const Graph& graph, InputMap reference_input);

// All-zero reference input for every Input node.
InputMap zero_reference(const Graph& graph);

// delta_n = A_n - A_n^0 for every node.
class DeltaState {
 public:
  DeltaState(const ForwardTrace& actual, const ReferenceState& reference);

  const Tensor& at(std::size_t index) const { return deltas_.at(index); }
  const Tensor& at(std::string_view id) const;

 private:
  const Graph* graph_;
  std::vector<Tensor> deltas_;
};

// m_{x,t} for every node x and the selected target t.
class MultiplierMap {
 public:
  MultiplierMap(const Graph& graph, Target target, std::vector<Tensor> multipliers);

  const Target& target() const { return target_; }
  const Graph& graph() const { return *graph_; }
  const Tensor& at(std::size_t index) const { return multipliers_.at(index); }
  const Tensor& at(std::string_view id) const;

 private:
  const Graph* graph_;
  Target target_;
  std::vector<Tensor> multipliers_;
};

struct RuleOptions {
  double stable_epsilon = rules::kStableEpsilon;
};

// Reverse sweep accumulating m_xt = sum_{y in outputs(x)} m_xy m_yt, seeded with m_tt = 1.
// Throws AttributionError when a Softmax sits between the target and the inputs.
MultiplierMap propagate_multipliers(const Graph& graph, const ForwardTrace& trace, const ReferenceState& reference,
                                    const Target& target, const RuleOptions& options = {});

struct InputAttribution {
  std::string node;
  Tensor delta;
  Tensor multiplier;
  Tensor contribution;
};

// Per-feature scores for one sample. For DeepLIFT, residual = |sum C - delta_t|.
struct ContributionReport {
  std::string method;
  Target target;
  std::vector<InputAttribution> inputs;
  double target_delta = 0.0;
  double total = 0.0;
  double residual = 0.0;

  const InputAttribution& input(std::string_view node) const;
  // Contributions of the single Input node.
  const Tensor& scores() const;
};

// C = m * delta over every Input node.
ContributionReport contributions(const MultiplierMap& multipliers, const DeltaState& deltas);

// Automatic selection picks the node feeding the final Sigmoid/Softmax so that saturation
// of the head does not attenuate scores; `index` picks the unit (class) there.
struct TargetRequest {
  std::optional<std::string> node;
  std::size_t index = 0;
};

Target select_attribution_target(const Graph& graph, const TargetRequest& request);

// True when the first output is a Softmax fed by an Affine layer.
bool has_softmax_head(const Graph& graph);

// Full DeepLIFT pipeline for one sample: reference, deltas, multipliers, contributions.
ContributionReport deeplift_attribution(const Graph& graph, const InputMap& input, const InputMap& reference,
                                        const Target& target, const RuleOptions& options = {});

}  // namespace deeplift
