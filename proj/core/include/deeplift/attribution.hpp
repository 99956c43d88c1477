#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeplift/deeplift.hpp"
#include "deeplift/forward.hpp"
#include "deeplift/graph.hpp"

namespace deeplift {

enum class Method { DeepLift, GradientTimesInput, LrpEpsilon };

enum class ReferenceMode {
  Zeros,
  // All-zero input after constrained-input weight normalization of the model.
  NormalizedZeros,
};

// Accepts "deeplift", "grad_input" and "lrp". Throws std::invalid_argument otherwise.
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

ReferenceMode parse_reference_mode(std::string_view name);

struct AttributionRequest {
  Method method = Method::DeepLift;
  TargetRequest target;
  ReferenceMode reference = ReferenceMode::Zeros;
  std::optional<InputMap> reference_input;  // overrides `reference` when set
  double epsilon = 1e-9;                    // LRP only
  RuleOptions rules;
};

// Model actually used for a request: constraint-normalized for NormalizedZeros, and
// softmax mean-normalized when the target is picked automatically on a Softmax head.
Graph prepare_model(const Graph& graph, const AttributionRequest& request);

// Scores one sample. `prepared` must come from prepare_model with the same request.
ContributionReport attribute(const Graph& prepared, const InputMap& input, const AttributionRequest& request);

// Input rows for a single-Input graph. Each line holds one sample's values in row-major
// order, separated by tabs, commas or spaces; blank lines and '#' lines are skipped.
std::vector<Tensor> read_vector_tsv(std::istream& in, const Shape& shape, std::string_view source = "<stream>");

// Header "# target=... method=... max_residual=...", then one row per feature with columns
// sample_id, feature_index, feature_label, delta, multiplier, contribution, residual (per sample).
void write_attribution_tsv(std::ostream& out, std::span<const ContributionReport> reports,
                           std::span<const std::string> sample_ids,
                           std::span<const std::string> feature_labels = {});

}  // namespace deeplift
