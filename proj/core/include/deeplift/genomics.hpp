#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeplift/graph.hpp"
#include "deeplift/tensor.hpp"
#include "deeplift/train.hpp"

namespace deeplift::genomics {

inline constexpr std::string_view kAlphabet = "ACGT";
inline constexpr std::string_view kGata = "GATA";
inline constexpr std::string_view kCagatg = "CAGATG";

struct MotifSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::string motif;

  bool operator==(const MotifSpan&) const = default;
};

struct SequenceExample {
  std::string id;
  std::string sequence;
  int label = 0;  // 1 = both motifs present
  std::vector<MotifSpan> spans;

  bool operator==(const SequenceExample&) const = default;
};

struct DatasetSpec {
  std::size_t n_train = 4000;
  std::size_t n_val = 500;
  std::size_t n_test = 500;
  std::size_t length = 200;
  std::uint64_t seed = 7;
  double substitution_rate = 0.1;
  // Positives plant min_copies..max_copies instances of each motif; negatives 1..2 of one motif.
  std::size_t min_copies = 2;
  std::size_t max_copies = 3;
};

struct Dataset {
  std::vector<SequenceExample> train;
  std::vector<SequenceExample> validation;
  std::vector<SequenceExample> test;
};

// Background bases are i.i.d. uniform; motif instances go to uniform non-overlapping
// positions and each base mutates to a different base with the substitution rate.
// Every split has its own seed stream derived from spec.seed and is balanced 50/50.
// Throws std::invalid_argument when the motifs cannot fit in the sequence length.
Dataset generate_dataset(const DatasetSpec& spec);
std::vector<SequenceExample> generate_split(const DatasetSpec& spec, std::size_t count, std::uint64_t split_seed,
                                            std::string_view id_prefix);

// L x 4 one-hot matrix, columns A, C, G, T. Throws std::invalid_argument on other letters.
Tensor one_hot_encode(std::string_view sequence);
std::string one_hot_decode(const Tensor& encoded);

// One group per row of an L x 4 one-hot input (each row sums to 1).
std::vector<ConstraintGroup> one_hot_constraint_groups(const std::string& node, std::size_t length);

// FASTA-like text: ">id label=1 spans=12-16:GATA,90-96:CAGATG" then the sequence line.
void write_fasta(std::ostream& out, std::span<const SequenceExample> examples);
std::vector<SequenceExample> read_fasta(std::istream& in, std::string_view source = "<stream>");

struct CnnSpec {
  std::size_t length = 200;
  std::size_t filters = 20;
  std::size_t filter_width = 15;
  std::size_t pool_width = 50;
  std::size_t pool_stride = 50;
  bool pool_ceil_mode = true;
  std::size_t hidden = 200;
  std::uint64_t seed = 11;
};

// conv -> PReLU -> maxpool -> dense -> PReLU -> dense -> PReLU -> dense(1) -> sigmoid,
// with per-row one-hot constraint groups on the input.
Graph build_genomics_cnn(const CnnSpec& spec);

std::vector<LabeledSample> to_samples(std::span<const SequenceExample> examples);

// Contribution of the base actually present at each position of an L x 4 score matrix.
std::vector<double> present_base_scores(const Tensor& scores, std::string_view sequence);

// Positive score mass inside the example's spans (optionally only spans of one motif)
// divided by all positive score mass; 0 when there is no positive mass.
double motif_recovery_score(std::span<const double> position_scores, const SequenceExample& example,
                            std::optional<std::string_view> motif = std::nullopt);

// Fraction of positions covered by the example's spans.
double span_coverage(const SequenceExample& example);

struct ComparisonRow {
  std::string id;
  double probability = 0.0;
  double deeplift = 0.0;
  double grad_input = 0.0;
  double deeplift_gata = 0.0;
  double grad_input_gata = 0.0;
  double deeplift_cagatg = 0.0;
  double grad_input_cagatg = 0.0;
  double coverage = 0.0;
  double residual = 0.0;
  double target_delta = 0.0;
  std::vector<double> deeplift_track;
  std::vector<double> grad_input_track;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  double mean_deeplift = 0.0;
  double mean_grad_input = 0.0;
  double win_rate = 0.0;  // share of rows where deeplift >= grad_input
  double gata_gap = 0.0;  // mean(deeplift_gata - grad_input_gata)
  double cagatg_gap = 0.0;
  double mean_coverage = 0.0;
  double max_relative_residual = 0.0;
};

struct CompareOptions {
  // Keep only positives the model classifies correctly (probability > 0.5).
  bool only_correct = true;
  std::size_t threads = 1;
};

// DeepLIFT on the constraint-normalized model with an all-zero reference versus
// gradient x input on the model as trained, both targeting the pre-sigmoid logit.
Comparison compare_methods(const Graph& trained, std::span<const SequenceExample> examples,
                           const CompareOptions& options = {});

// Columns id, probability, deeplift, grad_input, deeplift_gata, grad_input_gata,
// deeplift_cagatg, grad_input_cagatg, coverage, residual; then summary comment lines.
void write_comparison_tsv(std::ostream& out, const Comparison& comparison);

// Columns sample_id, position, base, deeplift, grad_input.
void write_score_tracks(std::ostream& out, const Comparison& comparison, std::span<const SequenceExample> examples);

// Everything needed to regenerate the benchmark end to end.
struct BenchmarkSpec {
  DatasetSpec data;
  CnnSpec cnn;
  TrainConfig train{.seed = 1, .epochs = 20, .batch_size = 32, .learning_rate = 0.003, .momentum = 0.9, .threads = 1};
};

struct BenchmarkResult {
  Dataset data;
  TrainResult training;
  double test_auroc = 0.0;
  Comparison comparison;
};

// Generate, train, score the test split and compare attributions on it.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec, std::ostream* progress = nullptr);

}  // namespace deeplift::genomics
