#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "deeplift/autodiff.hpp"
#include "deeplift/error.hpp"
#include "deeplift/genomics.hpp"
#include "deeplift/model_io.hpp"
#include "deeplift/train.hpp"
#include "random_graphs.hpp"

namespace deeplift {
namespace {

// y = ReLU(x1 + 2 x2 + 2), t = 0.1 + 0.2 y
Graph dead_relu_net() {
  return Graph({{"x", op::Input{}, {}, {2}},
                {"h", op::Affine{Tensor({1, 2}, {1, 2}), Tensor({1}, {2})}, {"x"}, {1}},
                {"y", op::ReLU{}, {"h"}, {1}},
                {"t", op::Affine{Tensor({1, 1}, {0.2}), Tensor({1}, {0.1})}, {"y"}, {1}}},
               {"t"});
}

TEST(Backward, AffineGradientIsWeightRow) {
  const Graph g({{"x", op::Input{}, {}, {3}},
                 {"a", op::Affine{Tensor({2, 3}, {1, 2, 3, 4, 5, 6}), Tensor({2}, {7, 8})}, {"x"}, {2}}},
                {"a"});
  const auto trace = forward(g, Tensor::from_vector({0.3, -1, 2}));
  const auto grads = backward(g, trace, {"a", 1});
  EXPECT_EQ(grads.at("x").storage(), (std::vector<double>{4, 5, 6}));
  EXPECT_EQ(grads.at("a").storage(), (std::vector<double>{0, 1}));
}

TEST(Backward, DeadReluGradientIsZeroAtMinusOne) {
  const auto g = dead_relu_net();
  const auto trace = forward(g, Tensor::from_vector({-1, -1}));
  EXPECT_DOUBLE_EQ(trace.output()[0], 0.1);
  const auto grads = backward(g, trace, {"t", 0});
  EXPECT_EQ(grads.at("x")[0], 0.0);
  EXPECT_EQ(grads.at("x")[1], 0.0);
}

TEST(Backward, MaxPoolGradientIsOneHotPerWindow) {
  const Graph g({{"x", op::Input{}, {}, {6, 2}}, {"p", op::MaxPool1D{3, 3, false}, {"x"}, {2, 2}}}, {"p"});
  const Tensor x({6, 2}, {1, 5, 3, 5, 3, 0, -1, 2, 4, 2, 0, 9});
  const auto trace = forward(g, x);
  // Seed every output with 1: each window then passes exactly one unit of gradient.
  const auto grads = backpropagate(g, trace, g.index_of("p"), Tensor::filled({2, 2}, 1.0), nullptr);
  const Tensor& gx = grads[g.index_of("x")];
  EXPECT_EQ(gx.storage(), (std::vector<double>{0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1}));
}

TEST(Backward, UnknownTargetThrows) {
  const auto g = dead_relu_net();
  const auto trace = forward(g, Tensor::from_vector({1, 1}));
  EXPECT_THROW(backward(g, trace, {"nope", 0}), Error);
}

TEST(FiniteDifference, LinearModelIsNearlyExact) {
  const Graph g({{"x", op::Input{}, {}, {4}},
                 {"a", op::Affine{Tensor({1, 4}, {0.5, -1.5, 2.0, 0.25}), Tensor({1}, {0.3})}, {"x"}, {1}}},
                {"a"});
  const auto report = finite_difference_check(g, single_input(g, Tensor::from_vector({1, 2, 3, 4})), {"a", 0});
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.max_relative_deviation, 1e-9);
  EXPECT_FALSE(report.perturbed);
}

TEST(FiniteDifference, RandomMlpsWithinTolerance) {
  std::mt19937_64 rng(41);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto c = testing::draw_random_case(rng, i);
    const auto report = finite_difference_check(c.graph, c.input, c.target);
    EXPECT_TRUE(report.passed) << "case " << i << " (" << c.shape_family
                               << "): deviation " << report.max_relative_deviation << ' ' << report.note;
    checked += report.checked;
  }
  EXPECT_GT(checked, 300u);
}

TEST(FiniteDifference, GenomicsCnnOnRandomInput) {
  const auto g = genomics::build_genomics_cnn({});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor x({200, 4});
  for (double& v : x.values()) v = u(rng);
  FiniteDifferenceOptions options;
  options.tolerance = 1e-5;
  const auto report = finite_difference_check(g, single_input(g, x), {"logit", 0}, options);
  EXPECT_TRUE(report.passed) << report.max_relative_deviation << ' ' << report.note;
}

TEST(FiniteDifference, InputOnReluKinkIsPerturbedAndNoted) {
  const auto g = dead_relu_net();
  // x1 + 2 x2 + 2 = 0 exactly: the ReLU sits on its kink.
  const auto report = finite_difference_check(g, single_input(g, Tensor::from_vector({0, -1})), {"t", 0});
  EXPECT_TRUE(report.perturbed);
  EXPECT_FALSE(report.note.empty());
  EXPECT_TRUE(report.passed) << report.note;
}

std::vector<LabeledSample> separable_toy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<LabeledSample> out;
  while (out.size() < n) {
    const double a = u(rng);
    const double b = u(rng);
    const double margin = a + 0.5 * b;
    if (std::abs(margin) < 0.2) continue;
    out.push_back({Tensor::from_vector({a, b}), margin > 0 ? 1 : 0});
  }
  return out;
}

Graph logistic_net(std::uint64_t seed) {
  Graph g({{"x", op::Input{}, {}, {2}},
           {"h", op::Affine{Tensor({4, 2}), Tensor({4})}, {"x"}, {4}},
           {"h_act", op::PReLU{Tensor({4})}, {"h"}, {4}},
           {"logit", op::Affine{Tensor({1, 4}), Tensor({1})}, {"h_act"}, {1}},
           {"p", op::Sigmoid{}, {"logit"}, {1}}},
          {"p"});
  initialize_parameters(g, seed);
  return g;
}

TEST(Training, SeparableToyReachesFullAccuracy) {
  const auto data = separable_toy(200, 4);
  TrainConfig config;
  config.epochs = 200;
  config.batch_size = 200;
  config.learning_rate = 0.05;
  const auto result = train_loop(logistic_net(3), data, data, config);
  const auto probs = predict(result.graph, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += (probs[i] > 0.5) == (data[i].label == 1);
  EXPECT_EQ(correct, data.size());
  ASSERT_EQ(result.curve.size(), 200u);
  for (std::size_t e = 1; e < result.curve.size(); ++e) {
    EXPECT_LE(result.curve[e].train_loss, result.curve[e - 1].train_loss + 1e-12) << "epoch " << e + 1;
  }
}

TEST(Training, SameSeedAndThreadCountIndependence) {
  const auto data = separable_toy(96, 5);
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 16;
  const auto a = train_loop(logistic_net(1), data, data, config);
  const auto b = train_loop(logistic_net(1), data, data, config);
  config.threads = 3;
  const auto c = train_loop(logistic_net(1), data, data, config);
  EXPECT_EQ(serialize_model(a.graph), serialize_model(b.graph));
  EXPECT_EQ(serialize_model(a.graph), serialize_model(c.graph));
}

TEST(Training, DivergenceIsReported) {
  const auto data = separable_toy(32, 6);
  TrainConfig config;
  config.epochs = 50;
  config.batch_size = 32;
  config.learning_rate = 1e200;
  EXPECT_THROW(train_loop(logistic_net(1), data, data, config), TrainingError);
}

TEST(Training, RequiresClassificationHead) {
  Graph g({{"x", op::Input{}, {}, {2}}, {"a", op::Affine{Tensor({1, 2}), Tensor({1})}, {"x"}, {1}}}, {"a"});
  EXPECT_THROW(find_head(g), TrainingError);
}

TEST(Training, InitializationIsBoundedAndDeterministic) {
  auto a = genomics::build_genomics_cnn({});
  auto b = genomics::build_genomics_cnn({});
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  const auto& conv = std::get<op::Conv1D>(a.node("conv1").kind);
  const double bound = std::sqrt(6.0 / 60.0);
  EXPECT_LE(max_abs(conv.filters), bound);
  EXPECT_EQ(max_abs(conv.bias), 0.0);
  EXPECT_EQ(std::get<op::PReLU>(a.node("conv1_prelu").kind).slope[0], 0.25);
}

}  // namespace
}  // namespace deeplift
