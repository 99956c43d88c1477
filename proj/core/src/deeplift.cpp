#include "deeplift/deeplift.hpp"

#include <cmath>

#include "deeplift/error.hpp"
#include "layers.hpp"
#include "reverse_sweep.hpp"

namespace deeplift {

using detail::overloaded;

ReferenceState compute_reference(const Graph& graph, InputMap reference_input) {
  auto trace = forward(graph, reference_input);
  return {std::move(reference_input), std::move(trace)};
}

InputMap zero_reference(const Graph& graph) {
  InputMap ref;
  for (const auto& id : graph.input_ids()) ref.emplace(id, Tensor(graph.node(id).output_shape));
  return ref;
}

DeltaState::DeltaState(const ForwardTrace& actual, const ReferenceState& reference) : graph_(&actual.graph()) {
  if (&reference.trace.graph() != graph_) throw AttributionError("trace and reference come from different graphs");
  deltas_.reserve(graph_->size());
  for (std::size_t i = 0; i < graph_->size(); ++i) deltas_.push_back(actual.at(i) - reference.trace.at(i));
}

const Tensor& DeltaState::at(std::string_view id) const { return deltas_.at(graph_->index_of(id)); }

MultiplierMap::MultiplierMap(const Graph& graph, Target target, std::vector<Tensor> multipliers)
    : graph_(&graph), target_(std::move(target)), multipliers_(std::move(multipliers)) {}

const Tensor& MultiplierMap::at(std::string_view id) const { return multipliers_.at(graph_->index_of(id)); }

MultiplierMap propagate_multipliers(const Graph& graph, const ForwardTrace& trace, const ReferenceState& reference,
                                    const Target& target, const RuleOptions& options) {
  const auto t = graph.find(target.node);
  if (!t) throw AttributionError("unknown target node '" + target.node + "'");
  Tensor seed(graph.node(*t).output_shape);
  if (target.index >= seed.size()) {
    throw AttributionError("target index " + std::to_string(target.index) + " out of range for '" + target.node + "'");
  }
  seed[target.index] = 1.0;
  const double eps = options.stable_epsilon;
  const ForwardTrace& ref = reference.trace;

  auto local = [&](std::size_t i, const Tensor& m, std::span<Tensor* const> min) {
    const auto& node = graph.node(i);
    const auto& ins = graph.input_indices(i);
    const Tensor& x = trace.at(ins[0]);
    const Tensor& x0 = ref.at(ins[0]);
    const Tensor& y = trace.at(i);
    const Tensor& y0 = ref.at(i);

    auto rescale = [&](auto slope_of) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (m[k] == 0.0) continue;
        const double d = rules::activation_derivative(node.kind, x0[k], slope_of(k));
        (*min[0])[k] += m[k] * rules::rescale_multiplier(x[k] - x0[k], y[k] - y0[k], d, eps);
      }
    };
    auto no_slope = [](std::size_t) { return 0.0; };

    std::visit(
        overloaded{
            [&](const op::Input&) {},
            [&](const op::Affine& a) { layers::affine_backward_input(a, m.values(), min[0]->values()); },
            [&](const op::Conv1D& c) { layers::conv_backward_input(c, m, *min[0]); },
            [&](const op::MaxPool1D& p) {
              const auto channels = layers::channels_of(x.shape());
              const auto length = x.shape()[0];
              std::vector<double> values;
              std::vector<double> refs;
              for (std::size_t w = 0; w < y.shape()[0]; ++w) {
                const auto win = layers::pool_window(p, length, w);
                for (std::size_t c = 0; c < channels; ++c) {
                  const double upstream = m[w * channels + c];
                  if (upstream == 0.0) continue;
                  values.clear();
                  refs.clear();
                  for (std::size_t r = win.begin; r < win.end; ++r) {
                    values.push_back(x[r * channels + c]);
                    refs.push_back(x0[r * channels + c]);
                  }
                  const auto routing = rules::route_max(values, refs, eps);
                  // Without a usable delta at the winner the gradient (1) stands in for the ratio.
                  const double local_m = routing.multiplier.value_or(1.0);
                  (*min[0])[(win.begin + routing.winner) * channels + c] += upstream * local_m;
                }
              }
            },
            [&](const op::ReLU&) { rescale(no_slope); },
            [&](const op::PReLU& p) {
              const auto channels = p.slope.size();
              rescale([&](std::size_t k) { return p.slope[layers::channel_of(k, channels)]; });
            },
            [&](const op::Sigmoid&) { rescale(no_slope); },
            [&](const op::Tanh&) { rescale(no_slope); },
            [&](const op::Maxout& mo) {
              for (std::size_t j = 0; j < y.size(); ++j) {
                if (m[j] == 0.0) continue;
                const auto segments = rules::maxout_segments(mo, j, x0.values(), x.values());
                const auto local_m = rules::maxout_multipliers(mo, j, segments);
                for (std::size_t k = 0; k < local_m.size(); ++k) (*min[0])[k] += m[j] * local_m[k];
              }
            },
            [&](const op::ElementwiseProduct&) {
              const Tensor& x2 = trace.at(ins[1]);
              const Tensor& x20 = ref.at(ins[1]);
              for (std::size_t k = 0; k < x.size(); ++k) {
                const auto pm = rules::product_multipliers(x0[k], x[k] - x0[k], x20[k], x2[k] - x20[k]);
                (*min[0])[k] += m[k] * pm.first;
                (*min[1])[k] += m[k] * pm.second;
              }
            },
            [&](const op::Softmax&) {
              throw AttributionError("Softmax node '" + node.id +
                                     "' lies between the target and the inputs; target its pre-activation instead");
            },
        },
        node.kind);
  };
  return MultiplierMap(graph, target, detail::reverse_sweep(graph, *t, seed, local));
}

const InputAttribution& ContributionReport::input(std::string_view node) const {
  for (const auto& in : inputs) {
    if (in.node == node) return in;
  }
  throw AttributionError("report has no input '" + std::string(node) + "'");
}

const Tensor& ContributionReport::scores() const {
  if (inputs.size() != 1) throw AttributionError("report covers " + std::to_string(inputs.size()) + " inputs");
  return inputs.front().contribution;
}

ContributionReport contributions(const MultiplierMap& multipliers, const DeltaState& deltas) {
  const Graph& graph = multipliers.graph();
  ContributionReport report;
  report.method = "deeplift";
  report.target = multipliers.target();
  for (const auto& id : graph.input_ids()) {
    const auto i = graph.index_of(id);
    InputAttribution a{id, deltas.at(i), multipliers.at(i), hadamard(multipliers.at(i), deltas.at(i))};
    report.total += sum(a.contribution);
    report.inputs.push_back(std::move(a));
  }
  report.target_delta = deltas.at(report.target.node)[report.target.index];
  report.residual = std::abs(report.total - report.target_delta);
  return report;
}

bool has_softmax_head(const Graph& graph) {
  if (graph.outputs().empty()) return false;
  const auto out = graph.index_of(graph.outputs().front());
  if (!is<op::Softmax>(graph.node(out).kind)) return false;
  return is<op::Affine>(graph.node(graph.input_indices(out)[0]).kind);
}

Target select_attribution_target(const Graph& graph, const TargetRequest& request) {
  Target target;
  if (request.node) {
    target = {*request.node, request.index};
  } else {
    if (graph.outputs().size() != 1) {
      throw AttributionError("automatic target selection needs exactly one graph output; pass an explicit target");
    }
    const auto out = graph.index_of(graph.outputs().front());
    const auto& head = graph.node(out);
    if (!is<op::Sigmoid>(head.kind) && !is<op::Softmax>(head.kind)) {
      throw AttributionError("output '" + head.id + "' is a " + std::string(kind_name(head.kind)) +
                             ", not a Sigmoid or Softmax head; choose the target explicitly");
    }
    target = {head.inputs.front(), request.index};
  }
  const auto i = graph.find(target.node);
  if (!i) throw AttributionError("unknown target node '" + target.node + "'");
  if (target.index >= element_count(graph.node(*i).output_shape)) {
    throw AttributionError("target index " + std::to_string(target.index) + " out of range for '" + target.node + "'");
  }
  return target;
}

ContributionReport deeplift_attribution(const Graph& graph, const InputMap& input, const InputMap& reference,
                                        const Target& target, const RuleOptions& options) {
  for (const auto& [id, tensor] : input) {
    auto it = reference.find(id);
    if (it == reference.end() || it->second.shape() != tensor.shape()) {
      throw AttributionError("reference for '" + id + "' is missing or shaped differently from the input");
    }
  }
  const auto trace = forward(graph, input);
  const auto ref = compute_reference(graph, reference);
  const auto multipliers = propagate_multipliers(graph, trace, ref, target, options);
  return contributions(multipliers, DeltaState(trace, ref));
}

}  // namespace deeplift
