#include "random_graphs.hpp"

#include <cmath>
#include <vector>

#include "deeplift/error.hpp"

namespace deeplift::testing {

namespace {

class Builder {
 public:
  explicit Builder(std::mt19937_64& rng) : rng_(rng) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

  Tensor random_tensor(Shape shape, double scale) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = uniform(-scale, scale);
    return t;
  }

  std::string add(std::string prefix, NodeKind kind, std::vector<std::string> inputs, Shape shape) {
    std::string id = prefix + std::to_string(nodes_.size());
    nodes_.push_back({id, std::move(kind), std::move(inputs), std::move(shape)});
    return id;
  }

  std::string affine(const std::string& from, std::size_t out) {
    const auto fan_in = element_count(shape_of(from));
    const double scale = 1.5 / std::sqrt(static_cast<double>(fan_in));
    return add("affine", op::Affine{random_tensor({out, fan_in}, scale), random_tensor({out}, 0.5)}, {from}, {out});
  }

  std::string activation(const std::string& from) {
    const auto shape = shape_of(from);
    switch (pick(0, 3)) {
      case 0:
        return add("relu", op::ReLU{}, {from}, shape);
      case 1:
        return add("prelu", op::PReLU{random_tensor({shape.back()}, 0.5)}, {from}, shape);
      case 2:
        return add("sigmoid", op::Sigmoid{}, {from}, shape);
      default:
        return add("tanh", op::Tanh{}, {from}, shape);
    }
  }

  std::string maxout(const std::string& from, std::size_t out) {
    const auto fan_in = element_count(shape_of(from));
    const auto pieces = pick(2, 4);
    const double scale = 1.5 / std::sqrt(static_cast<double>(fan_in));
    return add("maxout", op::Maxout{random_tensor({pieces, out, fan_in}, scale), random_tensor({pieces, out}, 0.5)},
               {from}, {out});
  }

  std::string product(const std::string& from, std::size_t width) {
    const auto left = activation(affine(from, width));
    const auto right = affine(from, width);
    return add("product", op::ElementwiseProduct{}, {left, right}, {width});
  }

  std::string pool(const std::string& from) {
    const auto shape = shape_of(from);
    const auto length = shape[0];
    const auto width = pick(1, std::min<std::size_t>(3, length));
    const auto stride = pick(1, width);
    const bool ceil = pick(0, 1) == 1;
    Shape out = shape;
    out[0] = (length - width) / stride + 1 + (ceil && (length - width) % stride != 0 ? 1 : 0);
    return add("pool", op::MaxPool1D{width, stride, ceil}, {from}, out);
  }

  const Shape& shape_of(const std::string& id) const {
    for (const auto& n : nodes_) {
      if (n.id == id) return n.output_shape;
    }
    throw GraphError("builder lost node " + id);
  }

  std::vector<NodeSpec> take() { return std::move(nodes_); }

 private:
  std::mt19937_64& rng_;
  std::vector<NodeSpec> nodes_;
};

RandomCase finish(Builder& b, const std::string& output, Target target, std::string family,
                  std::mt19937_64& rng) {
  RandomCase c{Graph(b.take(), {output}), {}, {}, std::move(target), std::move(family)};
  require_valid(c.graph);
  c.input = random_inputs(c.graph, rng);
  c.reference = random_inputs(c.graph, rng, 0.5);
  return c;
}

RandomCase vector_case(std::mt19937_64& rng, std::size_t index) {
  Builder b(rng);
  std::string cur = b.add("input", op::Input{}, {}, {b.pick(2, 6)});
  const auto depth = b.pick(2, 5);
  for (std::size_t layer = 0; layer < depth; ++layer) {
    const auto width = b.pick(2, 6);
    // Make sure maxout, product and pooling each appear early in every cycle of draws.
    const auto choice = layer == 0 ? index % 4 : b.pick(0, 3);
    switch (choice) {
      case 0:
        cur = b.activation(b.affine(cur, width));
        break;
      case 1:
        cur = b.maxout(cur, width);
        break;
      case 2:
        cur = b.product(cur, width);
        break;
      default:
        cur = b.pool(b.activation(b.affine(cur, width + 1)));
        break;
    }
  }
  const auto logit = b.affine(cur, 1);
  const auto out = b.add("sigmoid", op::Sigmoid{}, {logit}, {1});
  return finish(b, out, Target{out, 0}, "vector", rng);
}

RandomCase conv_case(std::mt19937_64& rng) {
  Builder b(rng);
  const auto length = b.pick(6, 14);
  const auto channels = b.pick(1, 4);
  std::string cur = b.add("input", op::Input{}, {}, {length, channels});
  const auto count = b.pick(1, 4);
  const auto width = b.pick(1, 4);
  const auto stride = b.pick(1, 2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(width * channels));
  cur = b.add("conv", op::Conv1D{b.random_tensor({count, width, channels}, scale), b.random_tensor({count}, 0.5), stride},
              {cur}, {(length - width) / stride + 1, count});
  cur = b.pool(b.activation(cur));
  cur = b.activation(b.affine(cur, b.pick(2, 5)));
  const auto logit = b.affine(cur, 1);
  return finish(b, logit, Target{logit, 0}, "conv", rng);
}

RandomCase softmax_case(std::mt19937_64& rng) {
  Builder b(rng);
  std::string cur = b.add("input", op::Input{}, {}, {b.pick(2, 6)});
  cur = b.activation(b.affine(cur, b.pick(2, 6)));
  const auto classes = b.pick(2, 4);
  const auto logits = b.affine(cur, classes);
  const auto out = b.add("softmax", op::Softmax{}, {logits}, {classes});
  return finish(b, out, Target{logits, b.pick(0, classes - 1)}, "softmax", rng);
}

}  // namespace

RandomCase draw_random_case(std::mt19937_64& rng, std::size_t index) {
  switch (index % 5) {
    case 3:
      return conv_case(rng);
    case 4:
      return softmax_case(rng);
    default:
      return vector_case(rng, index);
  }
}

InputMap random_inputs(const Graph& graph, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> unit(-scale, scale);
  InputMap inputs;
  for (const auto& id : graph.input_ids()) {
    Tensor t(graph.node(id).output_shape);
    for (double& v : t.values()) v = unit(rng);
    inputs.emplace(id, std::move(t));
  }
  return inputs;
}

Tensor random_one_hot(std::size_t length, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> base(0, 3);
  Tensor t({length, 4});
  for (std::size_t r = 0; r < length; ++r) t.at(r, base(rng)) = 1.0;
  return t;
}

}  // namespace deeplift::testing
