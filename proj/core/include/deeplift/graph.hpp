#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "deeplift/tensor.hpp"

namespace deeplift {

// Layer kinds. Parameter layouts are row-major:
//   Affine:  weights [out, in] (input is flattened), bias [out]
//   Conv1D:  input [length, channels], filters [count, width, channels], bias [count],
//            output [(length - width) / stride + 1, count]; cross-correlation, no flip
//   MaxPool1D: input [length] or [length, channels]; ceil_mode keeps a trailing partial window
//   PReLU:   slope [channels], channels = last input extent
//   Maxout:  weights [pieces, out, in], bias [pieces, out]
namespace op {
struct Input {};
struct Affine {
  Tensor weights;
  Tensor bias;
};
struct Conv1D {
  Tensor filters;
  Tensor bias;
  std::size_t stride = 1;
};
struct MaxPool1D {
  std::size_t width = 1;
  std::size_t stride = 1;
  bool ceil_mode = false;
};
struct ReLU {};
struct PReLU {
  Tensor slope;
};
struct Sigmoid {};
struct Tanh {};
struct Maxout {
  Tensor weights;
  Tensor bias;
};
struct ElementwiseProduct {};
struct Softmax {};
}  // namespace op

using NodeKind = std::variant<op::Input, op::Affine, op::Conv1D, op::MaxPool1D, op::ReLU, op::PReLU,
                              op::Sigmoid, op::Tanh, op::Maxout, op::ElementwiseProduct, op::Softmax>;

std::string_view kind_name(const NodeKind& kind);

template <class Op>
bool is(const NodeKind& kind) {
  return std::holds_alternative<Op>(kind);
}

struct NodeSpec {
  std::string id;
  NodeKind kind;
  std::vector<std::string> inputs;
  Shape output_shape;
};

// A scalar inside a node's output, addressed by flat index.
struct Target {
  std::string node;
  std::size_t index = 0;

  bool operator==(const Target&) const = default;
};

std::string to_string(const Target& target);

// A set of flattened element indices of one node whose activations always sum to `constant`.
struct ConstraintGroup {
  std::string node;
  std::vector<std::size_t> indices;
  double constant = 1.0;
};

// Feedforward DAG of typed layers. Node storage is sorted by id; structure is fixed at
// construction. Parameter values of an existing node may be replaced in place (training),
// which never alters the topology.
class Graph {
 public:
  Graph() = default;
  // Throws GraphError on duplicate or empty ids. Other structural problems are reported
  // by validate_graph and surface as GraphError from order().
  Graph(std::vector<NodeSpec> nodes, std::vector<std::string> outputs,
        std::vector<ConstraintGroup> constraint_groups = {});

  std::span<const NodeSpec> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const NodeSpec& node(std::size_t index) const { return nodes_[index]; }
  const NodeSpec& node(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;

  const std::vector<std::string>& outputs() const { return outputs_; }
  const std::vector<ConstraintGroup>& constraint_groups() const { return constraint_groups_; }

  // Resolved predecessor indices of a node, in declared order.
  const std::vector<std::size_t>& input_indices(std::size_t index) const;
  const std::vector<std::size_t>& consumer_indices(std::size_t index) const;

  // Ids of Input nodes, sorted.
  std::vector<std::string> input_ids() const;

  // Deterministic topological order (ties broken lexicographically by id).
  // Throws GraphError on a cycle or a dangling input reference.
  const std::vector<std::size_t>& order() const;

  // Indices of all nodes the given node depends on, including itself.
  std::vector<bool> ancestors_of(std::size_t index) const;

  // Replace the parameters of an existing node. The kind and wiring must match.
  void set_kind(std::size_t index, NodeKind kind);

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<std::string> outputs_;
  std::vector<ConstraintGroup> constraint_groups_;
  std::vector<std::vector<std::size_t>> inputs_;
  std::vector<std::vector<std::size_t>> consumers_;
  std::vector<std::size_t> order_;
  std::string structure_error_;
};

struct Violation {
  enum class Kind { Cycle, DanglingId, Arity, ShapeMismatch, BadParameter, Unreachable, BadOutput, BadConstraint };
  Kind kind;
  std::string node;
  std::string message;
};

std::string_view violation_name(Violation::Kind kind);

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Violation::Kind kind) const;
  std::string summary() const;
};

ValidationReport validate_graph(const Graph& graph);

// Throws GraphError with the report summary when validation fails.
void require_valid(const Graph& graph);

std::vector<std::string> topo_order(const Graph& graph);

// Output shape a node produces for the given input shapes. Throws ShapeError.
Shape infer_output_shape(const NodeKind& kind, std::span<const Shape> input_shapes);

// Number of trainable scalars in the graph.
std::size_t parameter_count(const Graph& graph);

// Trainable tensors of a node, in a fixed order per kind.
std::vector<Tensor*> parameters(NodeKind& kind);
std::vector<const Tensor*> parameters(const NodeKind& kind);

}  // namespace deeplift
