#include "deeplift/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "deeplift/autodiff.hpp"
#include "deeplift/error.hpp"
#include "deeplift/parallel.hpp"
#include "layers.hpp"
#include "reverse_sweep.hpp"

namespace deeplift {

using detail::overloaded;

ContributionReport gradient_times_input(const Graph& graph, const InputMap& input, const Target& target,
                                        const InputMap* reference) {
  const auto trace = forward(graph, input);
  const auto grads = backward(graph, trace, target);
  const InputMap ref = reference ? *reference : zero_reference(graph);
  const auto ref_trace = forward(graph, ref);

  ContributionReport report;
  report.method = "grad_input";
  report.target = target;
  for (const auto& id : graph.input_ids()) {
    const auto i = graph.index_of(id);
    Tensor delta = trace.at(i) - ref_trace.at(i);
    Tensor score = hadamard(grads.at(i), delta);
    report.total += sum(score);
    report.inputs.push_back({id, std::move(delta), grads.at(i), std::move(score)});
  }
  report.target_delta = trace.at(target.node)[target.index] - ref_trace.at(target.node)[target.index];
  report.residual = std::abs(report.total - report.target_delta);
  return report;
}

RelevanceTrace::RelevanceTrace(const Graph& graph, Target target, double epsilon, std::vector<Tensor> relevance,
                               double absorbed)
    : graph_(&graph),
      target_(std::move(target)),
      epsilon_(epsilon),
      relevance_(std::move(relevance)),
      absorbed_(absorbed) {}

const Tensor& RelevanceTrace::at(std::string_view id) const { return relevance_.at(graph_->index_of(id)); }

namespace {

double sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

RelevanceTrace lrp_epsilon(const Graph& graph, const InputMap& input, const Target& target, double epsilon) {
  const auto trace = forward(graph, input);
  const auto t = graph.find(target.node);
  if (!t) throw AttributionError("unknown target node '" + target.node + "'");
  Tensor seed(graph.node(*t).output_shape);
  if (target.index >= seed.size()) throw AttributionError("target index out of range for '" + target.node + "'");
  seed[target.index] = trace.at(*t)[target.index];

  double absorbed = 0.0;
  // Ratio R_j / (z_j + eps sign(z_j)); zero when the stabilized denominator vanishes.
  auto ratios = [&](const Tensor& relevance, const Tensor& z) {
    Tensor s(z.shape());
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double d = z[j] + epsilon * sign(z[j]);
      s[j] = d != 0.0 ? relevance[j] / d : 0.0;
    }
    return s;
  };

  auto local = [&](std::size_t i, const Tensor& r, std::span<Tensor* const> rin) {
    const auto& node = graph.node(i);
    const Tensor& a = trace.at(graph.input_indices(i)[0]);
    const Tensor& z = trace.at(i);
    std::visit(overloaded{
                   [&](const op::Affine& layer) {
                     const Tensor s = ratios(r, z);
                     Tensor back(a.shape());
                     layers::affine_backward_input(layer, s.values(), back.values());
                     for (std::size_t k = 0; k < a.size(); ++k) (*rin[0])[k] += a[k] * back[k];
                     for (std::size_t j = 0; j < z.size(); ++j) {
                       absorbed += (layer.bias[j] + epsilon * sign(z[j])) * s[j];
                     }
                   },
                   [&](const op::Conv1D& layer) {
                     const Tensor s = ratios(r, z);
                     Tensor back(a.shape());
                     layers::conv_backward_input(layer, s, back);
                     for (std::size_t k = 0; k < a.size(); ++k) (*rin[0])[k] += a[k] * back[k];
                     const auto count = layer.bias.size();
                     for (std::size_t j = 0; j < z.size(); ++j) {
                       absorbed += (layer.bias[j % count] + epsilon * sign(z[j])) * s[j];
                     }
                   },
                   [&](const op::MaxPool1D& p) {
                     const auto channels = layers::channels_of(a.shape());
                     for (std::size_t w = 0; w < z.shape()[0]; ++w) {
                       for (std::size_t c = 0; c < channels; ++c) {
                         (*rin[0])[layers::pool_argmax(p, a, w, c) * channels + c] += r[w * channels + c];
                       }
                     }
                   },
                   [&](const op::ReLU&) { *rin[0] += r; },
                   [&](const op::PReLU&) { *rin[0] += r; },
                   [&](const auto&) {
                     throw AttributionError("LRP does not support " + std::string(kind_name(node.kind)) + " node '" +
                                            node.id + "'");
                   },
               },
               node.kind);
  };
  auto relevance = detail::reverse_sweep(graph, *t, seed, local);
  return RelevanceTrace(graph, target, epsilon, std::move(relevance), absorbed);
}

ContributionReport lrp_report(const Graph& graph, const InputMap& input, const Target& target, double epsilon) {
  const auto trace = lrp_epsilon(graph, input, target, epsilon);
  ContributionReport report;
  report.method = "lrp";
  report.target = target;
  for (const auto& id : graph.input_ids()) {
    const Tensor& x = input.at(id);
    const Tensor& r = trace.at(id);
    Tensor ratio(x.shape());
    for (std::size_t k = 0; k < x.size(); ++k) ratio[k] = x[k] != 0.0 ? r[k] / x[k] : 0.0;
    report.total += sum(r);
    report.inputs.push_back({id, x, std::move(ratio), r});
  }
  report.target_delta = trace.at(target.node)[target.index];
  report.residual = std::abs(report.total + trace.absorbed() - report.target_delta);
  return report;
}

EnsembleMember draw_ensemble_member(const EnsembleSpec& spec, std::mt19937_64& rng) {
  if (spec.min_layers < 1 || spec.max_layers < spec.min_layers || spec.min_width < 1 ||
      spec.max_width < spec.min_width || spec.input_width < 1) {
    throw Error("invalid ensemble spec");
  }
  std::uniform_int_distribution<std::size_t> layer_count(spec.min_layers, spec.max_layers);
  std::uniform_int_distribution<std::size_t> width(spec.min_width, spec.max_width);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> bias(-0.5, 0.5);

  for (std::size_t attempt = 0;; ++attempt) {
    const auto layers_n = layer_count(rng);
    std::vector<NodeSpec> nodes;
    nodes.push_back({"input", op::Input{}, {}, {spec.input_width}});
    std::string prev = "input";
    std::size_t fan_in = spec.input_width;
    for (std::size_t l = 0; l < layers_n; ++l) {
      const bool last = l + 1 == layers_n;
      const std::size_t out = last ? 1 : width(rng);
      Tensor w({out, fan_in});
      Tensor b({out});
      const double scale = std::sqrt(3.0 / static_cast<double>(fan_in));
      for (double& v : w.values()) v = unit(rng) * scale;
      for (double& v : b.values()) v = bias(rng);
      const std::string dense = "layer" + std::to_string(l) + "_dense";
      nodes.push_back({dense, op::Affine{std::move(w), std::move(b)}, {prev}, {out}});
      prev = dense;
      if (!last) {
        const std::string act = "layer" + std::to_string(l) + "_relu";
        nodes.push_back({act, op::ReLU{}, {prev}, {out}});
        prev = act;
      }
      fan_in = out;
    }
    Graph graph(std::move(nodes), {prev});
    Tensor x({spec.input_width});
    for (double& v : x.values()) v = unit(rng);
    InputMap input{{"input", x}};

    const auto trace = forward(graph, input);
    bool small = false;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      if (!is<op::Affine>(graph.node(i).kind)) continue;
      for (double v : trace.at(i).values()) small = small || std::abs(v) < spec.min_preactivation;
    }
    if (!small) return {std::move(graph), std::move(input), Target{prev, 0}, attempt};
  }
}

double EquivalenceReport::worst(std::size_t epsilon_index) const {
  double w = 0.0;
  for (std::size_t n = 0; n < nets(); ++n) w = std::max(w, rows[n * epsilons.size() + epsilon_index].max_rel_dev);
  return w;
}

double EquivalenceReport::fraction_decreasing() const {
  if (nets() == 0) return 0.0;
  std::size_t good = 0;
  for (std::size_t n = 0; n < nets(); ++n) {
    bool decreasing = true;
    for (std::size_t e = 1; e < epsilons.size(); ++e) {
      decreasing = decreasing && rows[n * epsilons.size() + e].max_rel_dev < rows[n * epsilons.size() + e - 1].max_rel_dev;
    }
    good += decreasing;
  }
  return static_cast<double>(good) / static_cast<double>(nets());
}

EquivalenceReport equivalence_report(const EnsembleSpec& spec, std::span<const double> epsilons, std::size_t threads) {
  EquivalenceReport report;
  report.epsilons.assign(epsilons.begin(), epsilons.end());
  std::mt19937_64 rng(spec.seed);
  std::vector<EnsembleMember> members;
  for (std::size_t n = 0; n < spec.nets; ++n) {
    members.push_back(draw_ensemble_member(spec, rng));
    report.resamples += members.back().resamples;
  }

  report.rows.resize(spec.nets * epsilons.size());
  parallel_for(spec.nets, threads, [&](std::size_t n) {
    const auto& m = members[n];
    const auto gi = gradient_times_input(m.graph, m.input, m.target);
    const Tensor& g = gi.input("input").contribution;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      const auto lrp = lrp_epsilon(m.graph, m.input, m.target, epsilons[e]);
      const Tensor& r = lrp.at("input");
      EquivalenceRow row{n, epsilons[e], 0.0, 0.0};
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double dev = std::abs(r[k] - g[k]) / (std::abs(g[k]) + 1e-12);
        row.max_rel_dev = std::max(row.max_rel_dev, dev);
        row.mean_rel_dev += dev / static_cast<double>(g.size());
      }
      report.rows[n * epsilons.size() + e] = row;
    }
  });
  return report;
}

void write_equivalence_tsv(std::ostream& out, const EquivalenceReport& report) {
  out << "net_id\tepsilon\tmax_rel_dev\tmean_rel_dev\n";
  out << std::setprecision(6);
  for (const auto& row : report.rows) {
    out << row.net_id << '\t' << row.epsilon << '\t' << row.max_rel_dev << '\t' << row.mean_rel_dev << '\n';
  }
}

}  // namespace deeplift
