#include "deeplift/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deeplift/error.hpp"

namespace deeplift {

namespace {

using nlohmann::json;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

constexpr const char* kFormatTag = "deeplift-model";

json tensor_to_json(const Tensor& t) { return json{{"shape", t.shape()}, {"values", t.storage()}}; }

json node_to_json(const NodeSpec& n) {
  json j{{"id", n.id}, {"kind", std::string(kind_name(n.kind))}, {"inputs", n.inputs}, {"output_shape", n.output_shape}};
  std::visit(overloaded{
                 [&](const op::Affine& a) {
                   j["weights"] = tensor_to_json(a.weights);
                   j["bias"] = tensor_to_json(a.bias);
                 },
                 [&](const op::Conv1D& c) {
                   j["filters"] = tensor_to_json(c.filters);
                   j["bias"] = tensor_to_json(c.bias);
                   j["stride"] = c.stride;
                 },
                 [&](const op::MaxPool1D& p) {
                   j["width"] = p.width;
                   j["stride"] = p.stride;
                   j["ceil_mode"] = p.ceil_mode;
                 },
                 [&](const op::PReLU& p) { j["slope"] = tensor_to_json(p.slope); },
                 [&](const op::Maxout& m) {
                   j["weights"] = tensor_to_json(m.weights);
                   j["bias"] = tensor_to_json(m.bias);
                 },
                 [](const auto&) {},
             },
             n.kind);
  return j;
}

// Reads JSON fields while tracking a path for error messages.
class Reader {
 public:
  Reader(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(path_ + ": " + what); }

  Reader field(const std::string& name) const {
    if (!value_.is_object()) fail("expected an object");
    auto it = value_.find(name);
    if (it == value_.end()) fail("missing field '" + name + "'");
    return Reader(*it, path_ + "." + name);
  }

  bool has(const std::string& name) const { return value_.is_object() && value_.contains(name); }

  Reader item(std::size_t i) const { return Reader(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t length() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }

  std::size_t count() const {
    if (!value_.is_number_unsigned()) fail("expected a non-negative integer");
    return value_.get<std::size_t>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected a boolean");
    return value_.get<bool>();
  }

  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<int>();
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < length(); ++i) out.push_back(item(i).string());
    return out;
  }

  std::vector<std::size_t> counts() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < length(); ++i) out.push_back(item(i).count());
    return out;
  }

  Tensor tensor() const {
    auto shape = field("shape").counts();
    auto values_reader = field("values");
    std::vector<double> values;
    values.reserve(values_reader.length());
    for (std::size_t i = 0; i < values_reader.length(); ++i) values.push_back(values_reader.item(i).number());
    try {
      return Tensor(std::move(shape), std::move(values));
    } catch (const ShapeError& e) {
      fail(e.what());
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& value_;
  std::string path_;
};

NodeKind parse_kind(const Reader& r) {
  const auto kind = r.field("kind").string();
  if (kind == "Input") return op::Input{};
  if (kind == "Affine") return op::Affine{r.field("weights").tensor(), r.field("bias").tensor()};
  if (kind == "Conv1D") return op::Conv1D{r.field("filters").tensor(), r.field("bias").tensor(), r.field("stride").count()};
  if (kind == "MaxPool1D") {
    op::MaxPool1D p{r.field("width").count(), r.field("stride").count(), false};
    if (r.has("ceil_mode")) p.ceil_mode = r.field("ceil_mode").boolean();
    return p;
  }
  if (kind == "ReLU") return op::ReLU{};
  if (kind == "PReLU") return op::PReLU{r.field("slope").tensor()};
  if (kind == "Sigmoid") return op::Sigmoid{};
  if (kind == "Tanh") return op::Tanh{};
  if (kind == "Maxout") return op::Maxout{r.field("weights").tensor(), r.field("bias").tensor()};
  if (kind == "ElementwiseProduct") return op::ElementwiseProduct{};
  if (kind == "Softmax") return op::Softmax{};
  r.field("kind").fail("unknown node kind '" + kind + "'");
}

std::string location_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

// One node or constraint group per line: readable in a diff, compact on disk.
std::string serialize_model(const Graph& graph) {
  std::string out = "{\n";
  out += " \"format\": " + json(kFormatTag).dump() + ",\n";
  out += " \"version\": " + std::to_string(kModelFormatVersion) + ",\n";
  out += " \"outputs\": " + json(graph.outputs()).dump() + ",\n";
  auto list = [&out](const char* key, const std::vector<json>& items, bool last) {
    out += " \"" + std::string(key) + "\": [";
    for (std::size_t i = 0; i < items.size(); ++i) {
      out += i == 0 ? "\n  " : ",\n  ";
      out += items[i].dump();
    }
    out += items.empty() ? "]" : "\n ]";
    out += last ? "\n" : ",\n";
  };
  std::vector<json> nodes;
  for (const auto& n : graph.nodes()) nodes.push_back(node_to_json(n));
  std::vector<json> groups;
  for (const auto& g : graph.constraint_groups()) {
    groups.push_back(json{{"node", g.node}, {"indices", g.indices}, {"constant", g.constant}});
  }
  list("nodes", nodes, false);
  list("constraint_groups", groups, true);
  out += "}\n";
  return out;
}

Graph parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError("model parse error at " + location_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  Reader root(doc, "$");
  if (!doc.is_object()) root.fail("model file must be a JSON object");
  if (root.has("format") && root.field("format").string() != kFormatTag) {
    root.field("format").fail("not a deeplift model file");
  }
  const int version = root.field("version").integer();
  if (version != kModelFormatVersion) {
    root.field("version").fail("unsupported model version " + std::to_string(version) + " (this build reads version " +
                               std::to_string(kModelFormatVersion) + ")");
  }

  std::vector<NodeSpec> nodes;
  auto node_list = root.field("nodes");
  for (std::size_t i = 0; i < node_list.length(); ++i) {
    auto r = node_list.item(i);
    NodeSpec n;
    n.id = r.field("id").string();
    n.kind = parse_kind(r);
    n.inputs = r.has("inputs") ? r.field("inputs").strings() : std::vector<std::string>{};
    n.output_shape = r.field("output_shape").counts();
    nodes.push_back(std::move(n));
  }
  auto outputs = root.field("outputs").strings();

  std::vector<ConstraintGroup> groups;
  if (root.has("constraint_groups")) {
    auto list = root.field("constraint_groups");
    for (std::size_t i = 0; i < list.length(); ++i) {
      auto r = list.item(i);
      groups.push_back({r.field("node").string(), r.field("indices").counts(), r.field("constant").number()});
    }
  }
  try {
    return Graph(std::move(nodes), std::move(outputs), std::move(groups));
  } catch (const GraphError& e) {
    throw FormatError(std::string("$.nodes: ") + e.what());
  }
}

void save_model(const Graph& graph, const std::filesystem::path& path) {
  require_valid(graph);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << serialize_model(graph);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Graph load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_model(buffer.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace deeplift
