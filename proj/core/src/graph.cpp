#include "deeplift/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include "deeplift/error.hpp"

namespace deeplift {

namespace {

constexpr std::size_t kMissing = static_cast<std::size_t>(-1);

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void expect(bool cond, const std::string& message) {
  if (!cond) throw ShapeError(message);
}

void expect_single_input(std::span<const Shape> in, std::string_view kind) {
  expect(in.size() == 1, std::string(kind) + " takes exactly one input, got " + std::to_string(in.size()));
}

}  // namespace

std::string_view kind_name(const NodeKind& kind) {
  return std::visit(overloaded{
                        [](const op::Input&) { return std::string_view("Input"); },
                        [](const op::Affine&) { return std::string_view("Affine"); },
                        [](const op::Conv1D&) { return std::string_view("Conv1D"); },
                        [](const op::MaxPool1D&) { return std::string_view("MaxPool1D"); },
                        [](const op::ReLU&) { return std::string_view("ReLU"); },
                        [](const op::PReLU&) { return std::string_view("PReLU"); },
                        [](const op::Sigmoid&) { return std::string_view("Sigmoid"); },
                        [](const op::Tanh&) { return std::string_view("Tanh"); },
                        [](const op::Maxout&) { return std::string_view("Maxout"); },
                        [](const op::ElementwiseProduct&) { return std::string_view("ElementwiseProduct"); },
                        [](const op::Softmax&) { return std::string_view("Softmax"); },
                    },
                    kind);
}

std::string to_string(const Target& target) { return target.node + ":" + std::to_string(target.index); }

Graph::Graph(std::vector<NodeSpec> nodes, std::vector<std::string> outputs,
             std::vector<ConstraintGroup> constraint_groups)
    : nodes_(std::move(nodes)), outputs_(std::move(outputs)), constraint_groups_(std::move(constraint_groups)) {
  std::sort(nodes_.begin(), nodes_.end(), [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty()) throw GraphError("node with empty id");
    if (i > 0 && nodes_[i].id == nodes_[i - 1].id) throw GraphError("duplicate node id '" + nodes_[i].id + "'");
  }

  const std::size_t n = nodes_.size();
  inputs_.assign(n, {});
  consumers_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& in : nodes_[i].inputs) {
      auto j = find(in);
      if (!j) {
        if (structure_error_.empty()) {
          structure_error_ = "node '" + nodes_[i].id + "' references unknown input '" + in + "'";
        }
        inputs_[i].push_back(kMissing);
        continue;
      }
      inputs_[i].push_back(*j);
      consumers_[*j].push_back(i);
    }
  }
  if (!structure_error_.empty()) return;

  // Kahn's algorithm; the min-heap over indices is a lexicographic tie-break since storage is sorted.
  std::vector<std::size_t> pending(n);
  for (std::size_t i = 0; i < n; ++i) pending[i] = inputs_[i].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    auto i = ready.top();
    ready.pop();
    order_.push_back(i);
    for (auto c : consumers_[i]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (order_.size() != n) {
    std::string members;
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i] > 0) members += (members.empty() ? "" : ",") + nodes_[i].id;
    }
    structure_error_ = "cycle among nodes {" + members + "}";
    order_.clear();
  }
}

std::optional<std::size_t> Graph::find(std::string_view id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const NodeSpec& n, std::string_view key) { return n.id < key; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t Graph::index_of(std::string_view id) const {
  auto i = find(id);
  if (!i) throw GraphError("unknown node '" + std::string(id) + "'");
  return *i;
}

const NodeSpec& Graph::node(std::string_view id) const { return nodes_[index_of(id)]; }

const std::vector<std::size_t>& Graph::input_indices(std::size_t index) const { return inputs_.at(index); }

const std::vector<std::size_t>& Graph::consumer_indices(std::size_t index) const { return consumers_.at(index); }

std::vector<std::string> Graph::input_ids() const {
  std::vector<std::string> ids;
  for (const auto& n : nodes_) {
    if (is<op::Input>(n.kind)) ids.push_back(n.id);
  }
  return ids;
}

const std::vector<std::size_t>& Graph::order() const {
  if (!structure_error_.empty()) throw GraphError(structure_error_);
  return order_;
}

std::vector<bool> Graph::ancestors_of(std::size_t index) const {
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::size_t> stack{index};
  seen.at(index) = true;
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (auto j : inputs_[i]) {
      if (j != kMissing && !seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

void Graph::set_kind(std::size_t index, NodeKind kind) {
  auto& node = nodes_.at(index);
  if (node.kind.index() != kind.index()) {
    throw GraphError("set_kind on '" + node.id + "' cannot change " + std::string(kind_name(node.kind)) + " to " +
                     std::string(kind_name(kind)));
  }
  node.kind = std::move(kind);
}

Shape infer_output_shape(const NodeKind& kind, std::span<const Shape> in) {
  return std::visit(
      overloaded{
          [&](const op::Input&) -> Shape {
            throw ShapeError("Input nodes declare their shape; nothing to infer");
          },
          [&](const op::Affine& a) -> Shape {
            expect_single_input(in, "Affine");
            expect(a.weights.rank() == 2, "Affine weights must be rank 2 [out, in]");
            const auto out = a.weights.shape()[0];
            const auto fan_in = a.weights.shape()[1];
            expect(fan_in == element_count(in[0]), "Affine weight matrix " + to_string(a.weights.shape()) +
                                                       " does not accept input of shape " + to_string(in[0]));
            expect(a.bias.shape() == Shape{out}, "Affine bias must have shape [" + std::to_string(out) + "]");
            return {out};
          },
          [&](const op::Conv1D& c) -> Shape {
            expect_single_input(in, "Conv1D");
            expect(in[0].size() == 2, "Conv1D input must be rank 2 [length, channels], got " + to_string(in[0]));
            expect(c.filters.rank() == 3, "Conv1D filters must be rank 3 [count, width, channels]");
            const auto count = c.filters.shape()[0];
            const auto width = c.filters.shape()[1];
            const auto channels = c.filters.shape()[2];
            expect(channels == in[0][1], "Conv1D filters expect " + std::to_string(channels) +
                                             " channels, input has " + std::to_string(in[0][1]));
            expect(c.bias.shape() == Shape{count}, "Conv1D bias must have shape [" + std::to_string(count) + "]");
            expect(c.stride >= 1, "Conv1D stride must be positive");
            expect(in[0][0] >= width, "Conv1D input length shorter than filter width");
            return {(in[0][0] - width) / c.stride + 1, count};
          },
          [&](const op::MaxPool1D& p) -> Shape {
            expect_single_input(in, "MaxPool1D");
            expect(in[0].size() == 1 || in[0].size() == 2, "MaxPool1D input must be rank 1 or 2");
            expect(p.width >= 1 && p.stride >= 1, "MaxPool1D width and stride must be positive");
            const auto length = in[0][0];
            expect(length >= p.width, "MaxPool1D input length shorter than pool width");
            std::size_t windows = (length - p.width) / p.stride + 1;
            // Ceil mode keeps a trailing partial window as long as it starts inside the input.
            if (p.ceil_mode && (length - p.width) % p.stride != 0 && windows * p.stride < length) ++windows;
            Shape out = in[0];
            out[0] = windows;
            return out;
          },
          [&](const op::ReLU&) -> Shape {
            expect_single_input(in, "ReLU");
            return in[0];
          },
          [&](const op::PReLU& p) -> Shape {
            expect_single_input(in, "PReLU");
            expect(p.slope.shape() == Shape{in[0].back()},
                   "PReLU slope must have one entry per channel (" + std::to_string(in[0].back()) + ")");
            return in[0];
          },
          [&](const op::Sigmoid&) -> Shape {
            expect_single_input(in, "Sigmoid");
            return in[0];
          },
          [&](const op::Tanh&) -> Shape {
            expect_single_input(in, "Tanh");
            return in[0];
          },
          [&](const op::Maxout& m) -> Shape {
            expect_single_input(in, "Maxout");
            expect(m.weights.rank() == 3, "Maxout weights must be rank 3 [pieces, out, in]");
            const auto pieces = m.weights.shape()[0];
            const auto out = m.weights.shape()[1];
            expect(m.weights.shape()[2] == element_count(in[0]),
                   "Maxout pieces do not accept input of shape " + to_string(in[0]));
            expect(m.bias.shape() == (Shape{pieces, out}), "Maxout bias must have shape [pieces, out]");
            return {out};
          },
          [&](const op::ElementwiseProduct&) -> Shape {
            expect(in.size() == 2, "ElementwiseProduct takes exactly two inputs, got " + std::to_string(in.size()));
            expect(in[0] == in[1], "ElementwiseProduct operands differ: " + to_string(in[0]) + " vs " +
                                       to_string(in[1]));
            return in[0];
          },
          [&](const op::Softmax&) -> Shape {
            expect_single_input(in, "Softmax");
            return in[0];
          },
      },
      kind);
}

std::string_view violation_name(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::Cycle: return "cycle";
    case Violation::Kind::DanglingId: return "dangling-id";
    case Violation::Kind::Arity: return "arity";
    case Violation::Kind::ShapeMismatch: return "shape-mismatch";
    case Violation::Kind::BadParameter: return "bad-parameter";
    case Violation::Kind::Unreachable: return "unreachable";
    case Violation::Kind::BadOutput: return "bad-output";
    case Violation::Kind::BadConstraint: return "bad-constraint";
  }
  return "unknown";
}

bool ValidationReport::has(Violation::Kind kind) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violation_name(violations[i].kind) << " at '" << violations[i].node << "': " << violations[i].message;
  }
  return os.str();
}

ValidationReport validate_graph(const Graph& graph) {
  ValidationReport report;
  auto add = [&](Violation::Kind k, const std::string& node, std::string msg) {
    report.violations.push_back({k, node, std::move(msg)});
  };

  bool dangling = false;
  bool any_input = false;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& n = graph.node(i);
    if (is<op::Input>(n.kind)) {
      any_input = true;
      if (!n.inputs.empty()) add(Violation::Kind::Arity, n.id, "Input nodes take no inputs");
      if (n.output_shape.empty() || element_count(n.output_shape) == 0) {
        add(Violation::Kind::ShapeMismatch, n.id, "Input needs a non-empty shape with positive extents");
      }
    } else if (n.inputs.empty()) {
      add(Violation::Kind::Arity, n.id, std::string(kind_name(n.kind)) + " node has no inputs");
    }
    for (const auto& in : n.inputs) {
      if (!graph.find(in)) {
        add(Violation::Kind::DanglingId, n.id, "input '" + in + "' does not exist");
        dangling = true;
      }
    }
    for (const Tensor* p : parameters(n.kind)) {
      if (!p->all_finite()) add(Violation::Kind::BadParameter, n.id, "parameters contain non-finite values");
    }
  }
  if (!any_input) add(Violation::Kind::Unreachable, "", "graph has no Input node");
  for (const auto& out : graph.outputs()) {
    if (!graph.find(out)) add(Violation::Kind::BadOutput, out, "declared output does not exist");
  }
  if (graph.outputs().empty()) add(Violation::Kind::BadOutput, "", "graph declares no outputs");
  if (dangling) return report;

  const std::vector<std::size_t>* order = nullptr;
  try {
    order = &graph.order();
  } catch (const GraphError& e) {
    add(Violation::Kind::Cycle, "", e.what());
    return report;
  }

  // Shapes along topological order; nodes downstream of a bad shape are skipped.
  std::vector<bool> shape_ok(graph.size(), true);
  for (auto i : *order) {
    const auto& n = graph.node(i);
    if (is<op::Input>(n.kind)) continue;
    std::vector<Shape> in_shapes;
    bool upstream_ok = true;
    for (auto j : graph.input_indices(i)) {
      upstream_ok = upstream_ok && shape_ok[j];
      in_shapes.push_back(graph.node(j).output_shape);
    }
    if (!upstream_ok) {
      shape_ok[i] = false;
      continue;
    }
    try {
      auto inferred = infer_output_shape(n.kind, in_shapes);
      if (inferred != n.output_shape) {
        add(Violation::Kind::ShapeMismatch, n.id,
            "declared output shape " + to_string(n.output_shape) + " but layer produces " + to_string(inferred));
        shape_ok[i] = false;
      }
    } catch (const ShapeError& e) {
      auto kind = (is<op::ElementwiseProduct>(n.kind) && n.inputs.size() != 2) ? Violation::Kind::Arity
                                                                                  : Violation::Kind::ShapeMismatch;
      add(kind, n.id, e.what());
      shape_ok[i] = false;
    }
  }

  for (const auto& g : graph.constraint_groups()) {
    auto idx = graph.find(g.node);
    if (!idx) {
      add(Violation::Kind::BadConstraint, g.node, "constraint group names an unknown node");
      continue;
    }
    const auto count = element_count(graph.node(*idx).output_shape);
    if (g.indices.empty()) add(Violation::Kind::BadConstraint, g.node, "constraint group is empty");
    for (auto k : g.indices) {
      if (k >= count) {
        add(Violation::Kind::BadConstraint, g.node, "constraint index " + std::to_string(k) + " out of range");
        break;
      }
    }
  }
  return report;
}

void require_valid(const Graph& graph) {
  auto report = validate_graph(graph);
  if (!report.ok()) throw GraphError("invalid graph: " + report.summary());
}

std::vector<std::string> topo_order(const Graph& graph) {
  std::vector<std::string> ids;
  for (auto i : graph.order()) ids.push_back(graph.node(i).id);
  return ids;
}

std::vector<Tensor*> parameters(NodeKind& kind) {
  return std::visit(overloaded{
                        [](op::Affine& a) -> std::vector<Tensor*> { return {&a.weights, &a.bias}; },
                        [](op::Conv1D& c) -> std::vector<Tensor*> { return {&c.filters, &c.bias}; },
                        [](op::PReLU& p) -> std::vector<Tensor*> { return {&p.slope}; },
                        [](op::Maxout& m) -> std::vector<Tensor*> { return {&m.weights, &m.bias}; },
                        [](auto&) -> std::vector<Tensor*> { return {}; },
                    },
                    kind);
}

std::vector<const Tensor*> parameters(const NodeKind& kind) {
  auto& mutable_kind = const_cast<NodeKind&>(kind);
  auto ptrs = parameters(mutable_kind);
  return {ptrs.begin(), ptrs.end()};
}

std::size_t parameter_count(const Graph& graph) {
  std::size_t total = 0;
  for (const auto& n : graph.nodes()) {
    for (const Tensor* p : parameters(n.kind)) total += p->size();
  }
  return total;
}

}  // namespace deeplift
