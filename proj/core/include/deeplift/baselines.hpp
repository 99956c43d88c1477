#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "deeplift/deeplift.hpp"
#include "deeplift/forward.hpp"
#include "deeplift/graph.hpp"

namespace deeplift {

// Score_i = d target / d x_i * (x_i - ref_i), with ref = 0 when `reference` is null.
// The report's multiplier column holds the gradient.
ContributionReport gradient_times_input(const Graph& graph, const InputMap& input, const Target& target,
                                        const InputMap* reference = nullptr);

// Per-node LRP relevances. `absorbed` is the relevance taken up by bias and epsilon terms,
// so sum(input relevance) + absorbed equals the seeded target activation.
class RelevanceTrace {
 public:
  RelevanceTrace(const Graph& graph, Target target, double epsilon, std::vector<Tensor> relevance, double absorbed);

  const Target& target() const { return target_; }
  double epsilon() const { return epsilon_; }
  double absorbed() const { return absorbed_; }
  const Tensor& at(std::size_t index) const { return relevance_.at(index); }
  const Tensor& at(std::string_view id) const;

 private:
  const Graph* graph_;
  Target target_;
  double epsilon_;
  std::vector<Tensor> relevance_;
  double absorbed_;
};

// Epsilon-stabilized LRP: R_i = sum_j z_ij / (z_j + eps * sign(z_j)) R_j with z_ij = a_i w_ij
// and z_j including the bias. Max pooling routes all relevance to the recorded argmax;
// ReLU/PReLU pass relevance through unchanged. The target is seeded with its activation.
// Throws AttributionError on any other layer kind between target and inputs.
RelevanceTrace lrp_epsilon(const Graph& graph, const InputMap& input, const Target& target, double epsilon);

// LRP input relevances packaged like the other attribution methods.
ContributionReport lrp_report(const Graph& graph, const InputMap& input, const Target& target, double epsilon);

// Random ReLU MLPs with nonzero biases for the LRP / gradient x input comparison.
struct EnsembleSpec {
  std::size_t nets = 100;
  std::size_t min_layers = 2;  // affine layers, including the 1-unit output
  std::size_t max_layers = 4;
  std::size_t input_width = 8;
  std::size_t min_width = 4;
  std::size_t max_width = 12;
  double min_preactivation = 1e-6;
  std::uint64_t seed = 1;
};

struct EnsembleMember {
  Graph graph;
  InputMap input;
  Target target;
  std::size_t resamples = 0;
};

// Draws a net and an input, redrawing until every pre-activation has magnitude at least
// spec.min_preactivation.
EnsembleMember draw_ensemble_member(const EnsembleSpec& spec, std::mt19937_64& rng);

struct EquivalenceRow {
  std::size_t net_id = 0;
  double epsilon = 0.0;
  double max_rel_dev = 0.0;
  double mean_rel_dev = 0.0;
};

struct EquivalenceReport {
  std::vector<double> epsilons;
  std::vector<EquivalenceRow> rows;  // net-major, epsilons in the given order
  std::size_t resamples = 0;

  std::size_t nets() const { return epsilons.empty() ? 0 : rows.size() / epsilons.size(); }
  // Largest max_rel_dev over nets at the given epsilon position.
  double worst(std::size_t epsilon_index) const;
  // Fraction of nets whose max_rel_dev strictly decreases along the epsilon list.
  double fraction_decreasing() const;
};

// Relative deviation |lrp - gi| / (|gi| + 1e-12) between input-layer LRP relevances and
// gradient x input, per net and epsilon.
EquivalenceReport equivalence_report(const EnsembleSpec& spec, std::span<const double> epsilons,
                                     std::size_t threads = 1);

// TSV with columns net_id, epsilon, max_rel_dev, mean_rel_dev; rows are net-major with the
// epsilons in the order they were requested.
void write_equivalence_tsv(std::ostream& out, const EquivalenceReport& report);

}  // namespace deeplift
