#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "deeplift/autodiff.hpp"
#include "deeplift/graph.hpp"
#include "deeplift/tensor.hpp"

namespace deeplift {

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t threads = 1;
};

// Reads a JSON object with any of: seed, epochs, batch_size, learning_rate, momentum, threads.
// Missing keys keep the values already in `base`.
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base = {});

struct LabeledSample {
  Tensor input;
  int label = 0;  // 0 or 1
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_auroc = 0.0;
};

struct TrainResult {
  Graph graph;
  std::vector<EpochStats> curve;
};

// Classification head of a trainable graph: a 1-unit Sigmoid or a 2-unit Softmax output
// fed by `logits`.
struct Head {
  std::size_t output;
  std::size_t logits;
  bool softmax;
};
Head find_head(const Graph& graph);

// Probability of class 1 for each sample.
std::vector<double> predict(const Graph& graph, std::span<const LabeledSample> samples, std::size_t threads = 1);

// Mean cross-entropy over the samples.
double mean_loss(const Graph& graph, std::span<const LabeledSample> samples, std::size_t threads = 1);

// Fills Affine/Conv1D/Maxout weights with U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases,
// and PReLU slopes of 0.25. Deterministic in `seed`.
void initialize_parameters(Graph& graph, std::uint64_t seed);

// Momentum buffers, one per trainable tensor.
struct MomentumState {
  ParameterGradients velocity;
};

// One SGD-with-momentum step on a mini-batch. Returns the batch's mean loss.
// Per-sample gradients are reduced in sample order, so results are independent of `threads`.
double train_step(Graph& graph, std::span<const LabeledSample* const> batch, const TrainConfig& config,
                  MomentumState& state);

// Shuffled mini-batch training. Throws TrainingError on a non-finite loss.
TrainResult train_loop(Graph graph, std::span<const LabeledSample> train, std::span<const LabeledSample> validation,
                       const TrainConfig& config, std::ostream* progress = nullptr);

// TSV with columns epoch, train_loss, val_loss, val_auroc.
void write_loss_curve(std::ostream& out, std::span<const EpochStats> curve);

}  // namespace deeplift
