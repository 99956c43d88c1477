#include "deeplift/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deeplift/error.hpp"
#include "deeplift/forward.hpp"
#include "deeplift/metrics.hpp"
#include "deeplift/parallel.hpp"
#include "layers.hpp"
#include "reverse_sweep.hpp"

namespace deeplift {

using detail::overloaded;

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(path.string() + ": training config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "epochs") {
        base.epochs = value.get<std::size_t>();
      } else if (key == "batch_size") {
        base.batch_size = value.get<std::size_t>();
      } else if (key == "learning_rate") {
        base.learning_rate = value.get<double>();
      } else if (key == "momentum") {
        base.momentum = value.get<double>();
      } else if (key == "threads") {
        base.threads = value.get<std::size_t>();
      } else {
        throw FormatError(path.string() + ": unknown training config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (base.batch_size == 0) throw FormatError(path.string() + ": batch_size must be positive");
  return base;
}

Head find_head(const Graph& graph) {
  if (graph.outputs().empty()) throw TrainingError("graph declares no outputs");
  const auto out = graph.index_of(graph.outputs().front());
  const auto& node = graph.node(out);
  const auto units = element_count(node.output_shape);
  if (is<op::Sigmoid>(node.kind) && units == 1) return {out, graph.input_indices(out)[0], false};
  if (is<op::Softmax>(node.kind) && units == 2) return {out, graph.input_indices(out)[0], true};
  throw TrainingError("training needs a 1-unit Sigmoid or 2-unit Softmax output; '" + node.id + "' is a " +
                      std::string(kind_name(node.kind)) + " with " + std::to_string(units) + " unit(s)");
}

namespace {

// Cross-entropy and its gradient w.r.t. the logits, computed from the logits for stability.
double loss_and_grad(const Head& head, const Tensor& logits, int label, Tensor* grad) {
  if (!head.softmax) {
    const double z = logits[0];
    const double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
    if (grad) (*grad)[0] = layers::sigmoid(z) - label;
    return loss;
  }
  const double top = std::max(logits[0], logits[1]);
  const double lse = top + std::log(std::exp(logits[0] - top) + std::exp(logits[1] - top));
  if (grad) {
    for (std::size_t k = 0; k < 2; ++k) (*grad)[k] = std::exp(logits[k] - lse) - (static_cast<int>(k) == label);
  }
  return lse - logits[static_cast<std::size_t>(label)];
}

double probability(const Head& head, const ForwardTrace& trace) {
  const Tensor& out = trace.at(head.output);
  return head.softmax ? out[1] : out[0];
}

}  // namespace

std::vector<double> predict(const Graph& graph, std::span<const LabeledSample> samples, std::size_t threads) {
  const auto head = find_head(graph);
  std::vector<double> probs(samples.size());
  parallel_for(samples.size(), threads,
               [&](std::size_t i) { probs[i] = probability(head, forward(graph, samples[i].input)); });
  return probs;
}

double mean_loss(const Graph& graph, std::span<const LabeledSample> samples, std::size_t threads) {
  if (samples.empty()) return 0.0;
  const auto head = find_head(graph);
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const auto trace = forward(graph, samples[i].input);
    losses[i] = loss_and_grad(head, trace.at(head.logits), samples[i].label, nullptr);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(samples.size());
}

void initialize_parameters(Graph& graph, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill_uniform = [&](Tensor& t, std::size_t fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : t.values()) v = dist(rng);
  };
  for (auto i : graph.order()) {
    NodeKind kind = graph.node(i).kind;
    std::visit(overloaded{
                   [&](op::Affine& a) {
                     fill_uniform(a.weights, a.weights.shape()[1]);
                     a.bias.fill(0.0);
                   },
                   [&](op::Conv1D& c) {
                     fill_uniform(c.filters, c.filters.shape()[1] * c.filters.shape()[2]);
                     c.bias.fill(0.0);
                   },
                   [&](op::Maxout& m) {
                     fill_uniform(m.weights, m.weights.shape()[2]);
                     m.bias.fill(0.0);
                   },
                   [&](op::PReLU& p) { p.slope.fill(0.25); },
                   [](auto&) {},
               },
               kind);
    graph.set_kind(i, std::move(kind));
  }
}

double train_step(Graph& graph, std::span<const LabeledSample* const> batch, const TrainConfig& config,
                  MomentumState& state) {
  if (batch.empty()) return 0.0;
  const auto head = find_head(graph);
  if (state.velocity.per_node.empty()) state.velocity = ParameterGradients::zeros_like(graph);

  std::vector<ParameterGradients> per_sample(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), config.threads, [&](std::size_t s) {
    const auto trace = forward(graph, batch[s]->input);
    Tensor seed(graph.node(head.logits).output_shape);
    losses[s] = loss_and_grad(head, trace.at(head.logits), batch[s]->label, &seed);
    per_sample[s] = ParameterGradients::zeros_like(graph);
    backpropagate(graph, trace, head.logits, seed, &per_sample[s]);
  });

  const double loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(batch.size());
  if (!std::isfinite(loss)) throw TrainingError("non-finite loss; lower the learning rate");

  ParameterGradients total = std::move(per_sample[0]);
  for (std::size_t s = 1; s < per_sample.size(); ++s) total.add(per_sample[s]);
  total.scale(1.0 / static_cast<double>(batch.size()));

  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (total.per_node[i].empty()) continue;
    NodeKind kind = graph.node(i).kind;
    auto params = parameters(kind);
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& v = state.velocity.per_node[i][k];
      const auto& g = total.per_node[i][k];
      for (std::size_t e = 0; e < v.size(); ++e) {
        v[e] = config.momentum * v[e] - config.learning_rate * g[e];
        (*params[k])[e] += v[e];
      }
    }
    graph.set_kind(i, std::move(kind));
  }
  return loss;
}

TrainResult train_loop(Graph graph, std::span<const LabeledSample> train, std::span<const LabeledSample> validation,
                       const TrainConfig& config, std::ostream* progress) {
  require_valid(graph);
  find_head(graph);
  if (train.empty()) throw TrainingError("empty training set");
  if (config.batch_size == 0) throw TrainingError("batch_size must be positive");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  MomentumState state;
  TrainResult result;

  std::vector<int> val_labels;
  for (const auto& s : validation) val_labels.push_back(s.label);
  const bool both_classes = std::count(val_labels.begin(), val_labels.end(), 1) > 0 &&
                            std::count(val_labels.begin(), val_labels.end(), 0) > 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    std::vector<const LabeledSample*> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
        batch.push_back(&train[order[k]]);
      }
      weighted += train_step(graph, batch, config, state) * static_cast<double>(batch.size());
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = weighted / static_cast<double>(train.size());
    if (!validation.empty()) {
      stats.val_loss = mean_loss(graph, validation, config.threads);
      if (!std::isfinite(stats.val_loss)) {
        throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
      }
      if (both_classes) stats.val_auroc = auroc(predict(graph, validation, config.threads), val_labels);
    }
    result.curve.push_back(stats);
    if (progress) {
      *progress << "epoch " << epoch << " train_loss " << stats.train_loss << " val_loss " << stats.val_loss
                << " val_auroc " << stats.val_auroc << '\n';
    }
  }
  result.graph = std::move(graph);
  return result;
}

void write_loss_curve(std::ostream& out, std::span<const EpochStats> curve) {
  out << "epoch\ttrain_loss\tval_loss\tval_auroc\n";
  out << std::setprecision(10);
  for (const auto& s : curve) {
    out << s.epoch << '\t' << s.train_loss << '\t' << s.val_loss << '\t' << s.val_auroc << '\n';
  }
}

}  // namespace deeplift
