#include "deeplift/normalize.hpp"

#include <algorithm>
#include <map>

#include "deeplift/error.hpp"

namespace deeplift {

namespace {

// Mean of get(0..n-1), accumulated as offsets from the first value so that a column of
// identical weights has a mean equal to that weight and normalizes to exact zeros.
template <class Get>
double shifted_mean(std::size_t n, Get get) {
  const double first = get(0);
  double offset = 0.0;
  for (std::size_t k = 1; k < n; ++k) offset += get(k) - first;
  return first + offset / static_cast<double>(n);
}

}  // namespace

Graph mean_normalize_softmax_weights(const Graph& graph) {
  if (graph.outputs().empty()) throw GraphError("graph declares no outputs");
  const auto out = graph.index_of(graph.outputs().front());
  if (!is<op::Softmax>(graph.node(out).kind)) {
    throw GraphError("mean normalization needs a Softmax head; '" + graph.node(out).id + "' is a " +
                     std::string(kind_name(graph.node(out).kind)));
  }
  const auto logits = graph.input_indices(out).front();
  if (!is<op::Affine>(graph.node(logits).kind)) {
    throw GraphError("mean normalization needs an Affine layer feeding the Softmax; '" + graph.node(logits).id +
                     "' is a " + std::string(kind_name(graph.node(logits).kind)));
  }
  Graph result = graph;
  auto layer = std::get<op::Affine>(graph.node(logits).kind);
  const auto classes = layer.weights.shape()[0];
  const auto fan_in = layer.weights.shape()[1];
  for (std::size_t i = 0; i < fan_in; ++i) {
    const double mean = shifted_mean(classes, [&](std::size_t j) { return layer.weights.at(j, i); });
    for (std::size_t j = 0; j < classes; ++j) layer.weights.at(j, i) -= mean;
  }
  result.set_kind(logits, std::move(layer));
  return result;
}

namespace {

void normalize_affine(op::Affine& layer, const ConstraintGroup& group) {
  const auto out = layer.weights.shape()[0];
  for (std::size_t j = 0; j < out; ++j) {
    const double mu =
        shifted_mean(group.indices.size(), [&](std::size_t k) { return layer.weights.at(j, group.indices[k]); });
    for (auto i : group.indices) layer.weights.at(j, i) -= mu;
    layer.bias[j] += group.constant * mu;
  }
}

// Filters are shared across positions, so each row must carry the same constraint.
void normalize_conv(op::Conv1D& layer, const Shape& input_shape, const std::vector<const ConstraintGroup*>& groups,
                    const std::string& node) {
  const auto length = input_shape[0];
  const auto channels = input_shape[1];
  std::map<std::size_t, const ConstraintGroup*> by_row;
  std::vector<std::size_t> channel_set;
  double constant = 0.0;
  for (const auto* g : groups) {
    const auto row = g->indices.front() / channels;
    std::vector<std::size_t> chans;
    for (auto k : g->indices) {
      if (k / channels != row) {
        throw GraphError("constraint group on '" + node + "' spans several rows of a Conv1D input");
      }
      chans.push_back(k % channels);
    }
    std::sort(chans.begin(), chans.end());
    if (by_row.empty()) {
      channel_set = chans;
      constant = g->constant;
    } else if (chans != channel_set || g->constant != constant) {
      throw GraphError("constraint groups on '" + node + "' differ between rows; Conv1D filters are shared");
    }
    if (!by_row.emplace(row, g).second) {
      throw GraphError("several constraint groups on row " + std::to_string(row) + " of '" + node + "'");
    }
  }
  if (by_row.size() != length) {
    throw GraphError("Conv1D consumer of '" + node + "' needs a constraint group on every input row");
  }

  const auto count = layer.filters.shape()[0];
  const auto width = layer.filters.shape()[1];
  auto& f = layer.filters;
  for (std::size_t k = 0; k < count; ++k) {
    double shift = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double mu =
          shifted_mean(channel_set.size(), [&](std::size_t q) { return f[(k * width + j) * channels + channel_set[q]]; });
      for (auto c : channel_set) f[(k * width + j) * channels + c] -= mu;
      shift += constant * mu;
    }
    layer.bias[k] += shift;
  }
}

}  // namespace

Graph normalize_constrained_weights(const Graph& graph) {
  std::map<std::string, std::vector<const ConstraintGroup*>> by_node;
  for (const auto& g : graph.constraint_groups()) {
    if (g.indices.empty()) throw GraphError("empty constraint group on '" + g.node + "'");
    by_node[g.node].push_back(&g);
  }

  Graph result = graph;
  for (const auto& [node, groups] : by_node) {
    const auto source = graph.index_of(node);
    const auto count = element_count(graph.node(source).output_shape);
    for (const auto* g : groups) {
      for (auto k : g->indices) {
        if (k >= count) throw GraphError("constraint index " + std::to_string(k) + " out of range for '" + node + "'");
      }
    }
    for (auto consumer : graph.consumer_indices(source)) {
      NodeKind kind = result.node(consumer).kind;
      if (auto* affine = std::get_if<op::Affine>(&kind)) {
        for (const auto* g : groups) normalize_affine(*affine, *g);
      } else if (auto* conv = std::get_if<op::Conv1D>(&kind)) {
        normalize_conv(*conv, graph.node(source).output_shape, groups, node);
      } else {
        throw GraphError("constraint group on '" + node + "' feeds " + std::string(kind_name(kind)) + " node '" +
                         graph.node(consumer).id + "', which has no input weights to normalize");
      }
      result.set_kind(consumer, std::move(kind));
    }
  }
  return result;
}

}  // namespace deeplift
