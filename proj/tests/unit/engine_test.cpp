#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "deeplift/baselines.hpp"
#include "deeplift/deeplift.hpp"
#include "deeplift/error.hpp"
#include "deeplift/genomics.hpp"
#include "deeplift/normalize.hpp"
#include "deeplift/rules.hpp"
#include "random_graphs.hpp"

namespace deeplift {
namespace {

Tensor vec(std::vector<double> v) { return Tensor::from_vector(std::move(v)); }

InputMap at(std::vector<double> v) { return {{"x", vec(std::move(v))}}; }

Graph dead_relu_net() {
  return Graph({{"x", op::Input{}, {}, {2}},
                {"h", op::Affine{Tensor({1, 2}, {1, 2}), Tensor({1}, {2})}, {"x"}, {1}},
                {"y", op::ReLU{}, {"h"}, {1}},
                {"t", op::Affine{Tensor({1, 1}, {0.2}), Tensor({1}, {0.1})}, {"y"}, {1}}},
               {"t"});
}

// --- local rules -----------------------------------------------------------------------------

TEST(AffineRule, MultiplierIsWeight) {
  const Graph g({{"x", op::Input{}, {}, {1}}, {"y", op::Affine{Tensor({1, 1}, {3}), Tensor({1}, {1})}, {"x"}, {1}}},
                {"y"});
  const auto r = deeplift_attribution(g, at({2}), at({0}), {"y", 0});
  EXPECT_EQ(r.inputs[0].multiplier[0], 3.0);
  EXPECT_EQ(r.inputs[0].contribution[0], 6.0);
  EXPECT_EQ(r.target_delta, 6.0);
}

TEST(AffineRule, RandomLayerSumsToDelta) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor w({5, 7});
    Tensor b({5});
    for (double& v : w.values()) v = u(rng);
    for (double& v : b.values()) v = u(rng);
    const Graph g({{"x", op::Input{}, {}, {7}}, {"y", op::Affine{w, b}, {"x"}, {5}}}, {"y"});
    const auto x = testing::random_inputs(g, rng);
    const auto ref = testing::random_inputs(g, rng);
    for (std::size_t j = 0; j < 5; ++j) {
      const auto r = deeplift_attribution(g, x, ref, {"y", j});
      EXPECT_NEAR(r.total, r.target_delta, 1e-12);
    }
  }
}

TEST(AffineRule, InputAtReferenceContributesNothing) {
  const auto g = dead_relu_net();
  const auto r = deeplift_attribution(g, at({0.7, -0.2}), at({0.7, -0.2}), {"t", 0});
  EXPECT_EQ(r.inputs[0].contribution.storage(), (std::vector<double>{0, 0}));
  EXPECT_EQ(r.target_delta, 0.0);
}

TEST(MaxRule, RoutesDeltaToCurrentArgmax) {
  const double values[] = {3, 5};
  const double refs[] = {4, 1};
  const auto r = rules::route_max(values, refs);
  EXPECT_EQ(r.winner, 1u);
  EXPECT_EQ(r.delta_out, 1.0);
  EXPECT_EQ(r.contribution, 1.0);
  ASSERT_TRUE(r.multiplier);
  EXPECT_DOUBLE_EQ(*r.multiplier, 0.25);
}

TEST(MaxRule, TieGoesToLowestIndex) {
  const double values[] = {2, 2, 1};
  const double refs[] = {0, 1, 3};
  const auto r = rules::route_max(values, refs);
  EXPECT_EQ(r.winner, 0u);
  EXPECT_EQ(r.contribution, r.delta_out);
}

TEST(MaxRule, TiedZerosPreferInputThatMoved) {
  // After a ReLU: both inputs are 0, only the second had a positive reference.
  const double values[] = {0, 0, -1};
  const double refs[] = {0, 0.5, 0};
  const auto r = rules::route_max(values, refs);
  EXPECT_EQ(r.winner, 1u);
  EXPECT_EQ(r.delta_out, -0.5);
  ASSERT_TRUE(r.multiplier);
  EXPECT_EQ(*r.multiplier, 1.0);
}

TEST(MaxRule, WinnerAtReferenceHasNoMultiplierForm) {
  const double values[] = {1, 4};
  const double refs[] = {5, 4};
  const auto r = rules::route_max(values, refs);
  EXPECT_EQ(r.winner, 1u);
  EXPECT_EQ(r.delta_out, -1.0);
  EXPECT_FALSE(r.multiplier);
}

TEST(MaxRule, PoolSummationHoldsPerWindow) {
  const Graph g({{"x", op::Input{}, {}, {4}}, {"p", op::MaxPool1D{2, 2, false}, {"x"}, {2}}}, {"p"});
  const auto r = deeplift_attribution(g, at({3, 5, 2, 2}), at({4, 1, 0, 0}), {"p", 0});
  EXPECT_EQ(r.inputs[0].contribution.storage(), (std::vector<double>{0, 1, 0, 0}));
  const auto same = deeplift_attribution(g, at({3, 5, 2, 2}), at({3, 5, 2, 2}), {"p", 1});
  EXPECT_EQ(same.total, 0.0);
}

TEST(RescaleRule, DeadReluMultiplierFromZeroReference) {
  EXPECT_DOUBLE_EQ(rules::rescale_multiplier(-3.0, -2.0, 1.0), 2.0 / 3.0);
}

TEST(RescaleRule, TanhFromZeroToThree) {
  const Graph g({{"x", op::Input{}, {}, {1}}, {"t", op::Tanh{}, {"x"}, {1}}}, {"t"});
  const auto r = deeplift_attribution(g, at({3}), at({0}), {"t", 0});
  EXPECT_NEAR(r.inputs[0].multiplier[0], std::tanh(3.0) / 3.0, 1e-15);
  EXPECT_NEAR(r.inputs[0].multiplier[0], 0.33168, 1e-5);
}

TEST(RescaleRule, SigmoidFallsBackToDerivativeNearReference) {
  const double x0 = 0.8;
  const double s = 1.0 / (1.0 + std::exp(-x0));
  const Graph g({{"x", op::Input{}, {}, {1}}, {"s", op::Sigmoid{}, {"x"}, {1}}}, {"s"});
  const auto r = deeplift_attribution(g, at({x0 + 1e-9}), at({x0}), {"s", 0});
  EXPECT_DOUBLE_EQ(r.inputs[0].multiplier[0], s * (1 - s));
}

TEST(RescaleRule, ContinuousAcrossStableEpsilon) {
  for (const NodeKind& kind : {NodeKind{op::Sigmoid{}}, NodeKind{op::Tanh{}}}) {
    for (double x0 : {-2.0, -0.3, 0.0, 1.1}) {
      const double d = rules::activation_derivative(kind, x0);
      for (double dx : {0.5e-7, 0.99e-7, 1.01e-7, 2e-7, -1.01e-7}) {
        const double dy = rules::activate(kind, x0 + dx) - rules::activate(kind, x0);
        EXPECT_LT(std::abs(rules::rescale_multiplier(dx, dy, d) - d), 1e-6) << kind_name(kind) << " at " << x0;
      }
    }
  }
}

TEST(ProductRule, HandExpansions) {
  auto p = rules::product_multipliers(0, 2, 0, 3);
  EXPECT_EQ(p.first * 2, 3.0);
  EXPECT_EQ(p.second * 3, 3.0);
  p = rules::product_multipliers(1, 2, 1, 3);
  EXPECT_EQ(p.first * 2, 5.0);
  EXPECT_EQ(p.second * 3, 6.0);
  p = rules::product_multipliers(1.5, 2, 4, 0);
  EXPECT_EQ(p.first * 2, 2 * 4.0);
  EXPECT_EQ(p.second * 0, 0.0);
}

TEST(ProductRule, GraphNodeSplitsDelta) {
  const Graph g({{"a", op::Input{}, {}, {1}}, {"b", op::Input{}, {}, {1}}, {"p", op::ElementwiseProduct{}, {"a", "b"}, {1}}},
                {"p"});
  const InputMap x{{"a", vec({3})}, {"b", vec({4})}};
  const InputMap ref{{"a", vec({1})}, {"b", vec({1})}};
  const auto r = deeplift_attribution(g, x, ref, {"p", 0});
  EXPECT_EQ(r.input("a").contribution[0], 5.0);
  EXPECT_EQ(r.input("b").contribution[0], 6.0);
  EXPECT_EQ(r.target_delta, 11.0);
}

// --- maxout ----------------------------------------------------------------------------------

op::Maxout two_piece() { return op::Maxout{Tensor({2, 1, 1}, {1, 2}), Tensor({2, 1}, {0, -1})}; }

TEST(Maxout, TwoPieceHandExample) {
  const double ref[] = {0};
  const double x[] = {2};
  const auto d = rules::maxout_segments(two_piece(), 0, ref, x);
  ASSERT_EQ(d.segments.size(), 2u);
  EXPECT_EQ(d.segments[0].piece, 0u);
  EXPECT_DOUBLE_EQ(d.segments[0].end, 0.5);
  EXPECT_EQ(d.segments[1].piece, 1u);
  EXPECT_DOUBLE_EQ(d.segments[0].fraction(), 0.5);
  EXPECT_DOUBLE_EQ(d.segments[1].fraction(), 0.5);
  const auto m = rules::maxout_multipliers(two_piece(), 0, d);
  EXPECT_DOUBLE_EQ(m[0], 1.5);

  const Graph g({{"x", op::Input{}, {}, {1}}, {"m", two_piece(), {"x"}, {1}}}, {"m"});
  const auto r = deeplift_attribution(g, at({2}), at({0}), {"m", 0});
  EXPECT_DOUBLE_EQ(r.inputs[0].contribution[0], 3.0);
  EXPECT_DOUBLE_EQ(r.target_delta, 3.0);
}

TEST(Maxout, SinglePieceReducesToAffine) {
  const op::Maxout m{Tensor({1, 1, 3}, {1, -2, 0.5}), Tensor({1, 1}, {0.7})};
  const double ref[] = {0, 0, 0};
  const double x[] = {1, 2, 3};
  const auto d = rules::maxout_segments(m, 0, ref, x);
  ASSERT_EQ(d.segments.size(), 1u);
  EXPECT_EQ(d.segments[0].fraction(), 1.0);
  EXPECT_EQ(rules::maxout_multipliers(m, 0, d), (std::vector<double>{1, -2, 0.5}));
}

TEST(Maxout, DegeneratePathIsOneSegment) {
  const double p[] = {0.4};
  const auto d = rules::maxout_segments(two_piece(), 0, p, p);
  ASSERT_EQ(d.segments.size(), 1u);
  EXPECT_EQ(d.segments[0].fraction(), 1.0);
  const Graph g({{"x", op::Input{}, {}, {1}}, {"m", two_piece(), {"x"}, {1}}}, {"m"});
  EXPECT_EQ(deeplift_attribution(g, at({0.4}), at({0.4}), {"m", 0}).total, 0.0);
}

TEST(Maxout, TieAtStartGoesToSteeperPiece) {
  // Both pieces equal 0 at t = 0; piece 1 rises faster.
  const double offsets[] = {0, 0};
  const double slopes[] = {1, 3};
  const auto d = rules::upper_envelope(offsets, slopes);
  ASSERT_EQ(d.segments.size(), 1u);
  EXPECT_EQ(d.segments[0].piece, 1u);
}

TEST(Maxout, EnvelopeMatchesDenseSampling) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> offsets(5);
    std::vector<double> slopes(5);
    for (auto& v : offsets) v = u(rng);
    for (auto& v : slopes) v = 3 * u(rng);
    const auto d = rules::upper_envelope(offsets, slopes);
    double total = 0.0;
    for (std::size_t s = 0; s < d.segments.size(); ++s) {
      EXPECT_GE(d.segments[s].fraction(), 0.0);
      if (s > 0) EXPECT_GT(d.segments[s].begin, d.segments[s - 1].begin);
      total += d.segments[s].fraction();
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int k = 0; k < 10000; ++k) {
      const double t = (k + 0.5) / 10000.0;
      std::size_t best = 0;
      for (std::size_t i = 1; i < 5; ++i) {
        if (offsets[i] + slopes[i] * t > offsets[best] + slopes[best] * t) best = i;
      }
      EXPECT_EQ(d.piece_at(t), best) << "trial " << trial << " t " << t;
    }
  }
}

// --- end to end ------------------------------------------------------------------------------

TEST(Reference, DeadReluReferenceActivations) {
  const auto g = dead_relu_net();
  const auto ref = compute_reference(g, at({0, 0}));
  EXPECT_EQ(ref.trace.at("h")[0], 2.0);
  EXPECT_EQ(ref.trace.at("y")[0], 2.0);
  EXPECT_DOUBLE_EQ(ref.trace.at("t")[0], 0.5);
}

TEST(Reference, ZeroReferenceOnBiasFreeLinearNet) {
  const Graph g({{"x", op::Input{}, {}, {3}},
                 {"a", op::Affine{Tensor({2, 3}, {1, 2, 3, 4, 5, 6}), Tensor({2})}, {"x"}, {2}},
                 {"b", op::Affine{Tensor({1, 2}, {1, -1}), Tensor({1})}, {"a"}, {1}}},
                {"b"});
  const auto ref = compute_reference(g, zero_reference(g));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(max_abs(ref.trace.at(i)), 0.0);
}

TEST(Reference, NormalizedGenomicsConvReferenceEqualsBias) {
  auto g = genomics::build_genomics_cnn({});
  // Give the biases some structure first so the check is not vacuous.
  auto conv = std::get<op::Conv1D>(g.node("conv1").kind);
  for (std::size_t k = 0; k < conv.bias.size(); ++k) conv.bias[k] = 0.1 * static_cast<double>(k) - 0.5;
  g.set_kind(g.index_of("conv1"), conv);
  const auto norm = normalize_constrained_weights(g);
  const auto ref = compute_reference(norm, zero_reference(norm));
  const auto& bias = std::get<op::Conv1D>(norm.node("conv1").kind).bias;
  const auto& act = ref.trace.at("conv1");
  for (std::size_t p = 0; p < act.shape()[0]; ++p) {
    for (std::size_t k = 0; k < bias.size(); ++k) EXPECT_EQ(act.at(p, k), bias[k]);
  }
}

TEST(Propagate, DeadReluContributions) {
  const auto g = dead_relu_net();
  const auto r = deeplift_attribution(g, at({-1, -1}), at({0, 0}), {"t", 0});
  EXPECT_NEAR(r.inputs[0].contribution[0], (0.1 - 0.5) / 3.0, 1e-12);
  EXPECT_NEAR(r.inputs[0].contribution[1], 2.0 * (0.1 - 0.5) / 3.0, 1e-12);
  EXPECT_NEAR(r.residual, 0.0, 1e-12);
}

TEST(Propagate, StackedAffineComposesWeights) {
  const Tensor w1({2, 3}, {1, 2, 3, -1, 0, 2});
  const Tensor w2({1, 2}, {0.5, -2});
  const Graph stacked({{"x", op::Input{}, {}, {3}},
                       {"a", op::Affine{w1, Tensor({2}, {1, 1})}, {"x"}, {2}},
                       {"b", op::Affine{w2, Tensor({1}, {3})}, {"a"}, {1}}},
                      {"b"});
  // W2 W1 = [0.5*1 - 2*-1, 0.5*2 - 0, 0.5*3 - 2*2] = [2.5, 1, -2.5]
  const Graph merged({{"x", op::Input{}, {}, {3}},
                      {"b", op::Affine{Tensor({1, 3}, {2.5, 1, -2.5}), Tensor({1}, {3.5})}, {"x"}, {1}}},
                     {"b"});
  const auto x = at({0.3, -1.2, 2});
  const auto ref = at({1, 1, -1});
  const auto a = deeplift_attribution(stacked, x, ref, {"b", 0});
  const auto b = deeplift_attribution(merged, x, ref, {"b", 0});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(a.inputs[0].multiplier[i], b.inputs[0].multiplier[i]);
    EXPECT_DOUBLE_EQ(a.inputs[0].contribution[i], b.inputs[0].contribution[i]);
  }
}

TEST(Propagate, LinearModelMatchesGradientTimesDelta) {
  const Graph g({{"x", op::Input{}, {}, {3}},
                 {"y", op::Affine{Tensor({1, 3}, {2, -1, 4}), Tensor({1}, {9})}, {"x"}, {1}}},
                {"y"});
  const auto x = at({1, 2, 3});
  const auto ref = at({0.5, 0.5, 0.5});
  const auto dl = deeplift_attribution(g, x, ref, {"y", 0});
  const auto gi = gradient_times_input(g, x, {"y", 0}, &ref);
  EXPECT_EQ(dl.scores().storage(), gi.scores().storage());
  EXPECT_EQ(dl.scores().storage(), (std::vector<double>{1, -1.5, 10}));
  EXPECT_EQ(dl.total, dl.target_delta);
}

TEST(Propagate, TargetMultiplierIsOneAndRunsAreDeterministic) {
  std::mt19937_64 rng(19);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto c = testing::draw_random_case(rng, i);
    const auto trace = forward(c.graph, c.input);
    const auto ref = compute_reference(c.graph, c.reference);
    const auto m1 = propagate_multipliers(c.graph, trace, ref, c.target);
    const auto m2 = propagate_multipliers(c.graph, trace, ref, c.target);
    EXPECT_EQ(m1.at(c.target.node)[c.target.index], 1.0);
    for (std::size_t n = 0; n < c.graph.size(); ++n) EXPECT_EQ(m1.at(n).storage(), m2.at(n).storage());
  }
}

TEST(Propagate, SummationToDeltaOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto c = testing::draw_random_case(rng, i);
    const auto r = deeplift_attribution(c.graph, c.input, c.reference, c.target);
    EXPECT_LE(r.residual, std::max(1e-9, 1e-6 * std::abs(r.target_delta))) << "case " << i << ' ' << c.shape_family;
  }
}

TEST(Propagate, ZeroBiasZeroReferenceEqualsGradientTimesInput) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    auto rand = [&](Shape s) {
      Tensor t(std::move(s));
      for (double& v : t.values()) v = u(rng);
      return t;
    };
    const Graph g({{"x", op::Input{}, {}, {8, 2}},
                   {"c", op::Conv1D{rand({3, 3, 2}), Tensor({3}), 1}, {"x"}, {6, 3}},
                   {"r", op::ReLU{}, {"c"}, {6, 3}},
                   {"p", op::MaxPool1D{2, 2, false}, {"r"}, {3, 3}},
                   {"d", op::Affine{rand({4, 9}), Tensor({4})}, {"p"}, {4}},
                   {"dr", op::ReLU{}, {"d"}, {4}},
                   {"o", op::Affine{rand({1, 4}), Tensor({1})}, {"dr"}, {1}}},
                  {"o"});
    const auto x = testing::random_inputs(g, rng);
    const auto dl = deeplift_attribution(g, x, zero_reference(g), {"o", 0});
    const auto gi = gradient_times_input(g, x, {"o", 0});
    for (std::size_t k = 0; k < dl.scores().size(); ++k) EXPECT_NEAR(dl.scores()[k], gi.scores()[k], 1e-9);
  }
}

TEST(Propagate, SoftmaxBetweenTargetAndInputIsRejected) {
  const Graph g({{"x", op::Input{}, {}, {2}},
                 {"s", op::Softmax{}, {"x"}, {2}},
                 {"a", op::Affine{Tensor({1, 2}, {1, 1}), Tensor({1})}, {"s"}, {1}}},
                {"a"});
  EXPECT_THROW(deeplift_attribution(g, at({1, 2}), at({0, 0}), {"a", 0}), AttributionError);
}

// --- target selection ------------------------------------------------------------------------

Graph redundancy_net() {
  return Graph({{"x", op::Input{}, {}, {2}},
                {"y", op::Affine{Tensor({1, 2}, {1, 1}), Tensor({1})}, {"x"}, {1}},
                {"t", op::Sigmoid{}, {"y"}, {1}}},
               {"t"});
}

TEST(TargetSelection, RedundantInputsAttenuateOnlyAtSigmoid) {
  const auto g = redundancy_net();
  const auto auto_target = select_attribution_target(g, {});
  EXPECT_EQ(auto_target, (Target{"y", 0}));

  const auto one_t = deeplift_attribution(g, at({100, 0}), at({0, 0}), {"t", 0});
  const auto both_t = deeplift_attribution(g, at({100, 100}), at({0, 0}), {"t", 0});
  EXPECT_NEAR(one_t.inputs[0].contribution[0], 0.5, 1e-9);
  EXPECT_NEAR(both_t.inputs[0].contribution[0], 0.25, 1e-9);
  EXPECT_NEAR(both_t.inputs[0].contribution[1], 0.25, 1e-9);

  const auto one_y = deeplift_attribution(g, at({100, 0}), at({0, 0}), auto_target);
  const auto both_y = deeplift_attribution(g, at({100, 100}), at({0, 0}), auto_target);
  EXPECT_NEAR(one_y.inputs[0].contribution[0], 100, 1e-9);
  EXPECT_NEAR(both_y.inputs[0].contribution[0], 100, 1e-9);
}

TEST(TargetSelection, ExplicitHiddenTargetIsHonored) {
  const auto g = dead_relu_net();
  EXPECT_EQ(select_attribution_target(g, {std::string("h"), 0}), (Target{"h", 0}));
  EXPECT_THROW(select_attribution_target(g, {}), AttributionError);
  EXPECT_THROW(select_attribution_target(g, {std::string("h"), 3}), AttributionError);
}

// --- normalization ---------------------------------------------------------------------------

TEST(SoftmaxNormalization, SubtractsMeanOverClasses) {
  const Graph g({{"x", op::Input{}, {}, {2}},
                 {"z", op::Affine{Tensor({2, 2}, {1, 5, 3, 5}), Tensor({2}, {0.1, -0.1})}, {"x"}, {2}},
                 {"s", op::Softmax{}, {"z"}, {2}}},
                {"s"});
  const auto n = mean_normalize_softmax_weights(g);
  const auto& w = std::get<op::Affine>(n.node("z").kind).weights;
  EXPECT_EQ(w.at(0, 0), -1.0);
  EXPECT_EQ(w.at(1, 0), 1.0);
  EXPECT_EQ(w.at(0, 1), 0.0);
  EXPECT_EQ(w.at(1, 1), 0.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_inputs(g, rng, 3.0);
    const auto a = forward(g, x).output();
    const auto b = forward(n, x).output();
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
  for (std::size_t cls = 0; cls < 2; ++cls) {
    const auto r = deeplift_attribution(n, at({0.3, 2}), at({0, 0}), {"z", cls});
    EXPECT_EQ(r.inputs[0].multiplier[1], 0.0);
  }
}

TEST(SoftmaxNormalization, ClassUniformColumnBecomesExactlyZero) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t classes : {3u, 7u, 10u}) {
    Tensor w({classes, 4});
    for (double& v : w.values()) v = u(rng);
    const double shared = u(rng);
    for (std::size_t c = 0; c < classes; ++c) w.at(c, 2) = shared;
    const Graph g({{"x", op::Input{}, {}, {4}},
                   {"z", op::Affine{w, Tensor({classes})}, {"x"}, {classes}},
                   {"s", op::Softmax{}, {"z"}, {classes}}},
                  {"s"});
    const auto& n = std::get<op::Affine>(mean_normalize_softmax_weights(g).node("z").kind).weights;
    for (std::size_t c = 0; c < classes; ++c) EXPECT_EQ(n.at(c, 2), 0.0);
  }
}

TEST(SoftmaxNormalization, RequiresAffineSoftmaxHead) {
  EXPECT_THROW(mean_normalize_softmax_weights(redundancy_net()), GraphError);
}

TEST(ConstrainedNormalization, HandExampleAndInvariance) {
  const Graph g({{"x", op::Input{}, {}, {4}},
                 {"y", op::Affine{Tensor({1, 4}, {1, 2, 3, 4}), Tensor({1}, {0})}, {"x"}, {1}}},
                {"y"}, {{"x", {0, 1, 2, 3}, 1.0}});
  const auto n = normalize_constrained_weights(g);
  const auto& layer = std::get<op::Affine>(n.node("y").kind);
  EXPECT_EQ(layer.weights.storage(), (std::vector<double>{-1.5, -0.5, 0.5, 1.5}));
  EXPECT_EQ(layer.bias[0], 2.5);
  for (std::size_t hot = 0; hot < 4; ++hot) {
    Tensor x({4});
    x[hot] = 1.0;
    EXPECT_EQ(forward(g, x).output()[0], forward(n, x).output()[0]);
  }
  const auto twice = normalize_constrained_weights(n);
  EXPECT_EQ(std::get<op::Affine>(twice.node("y").kind).weights.storage(), layer.weights.storage());
}

TEST(ConstrainedNormalization, GenomicsConvOutputsUnchanged) {
  auto g = genomics::build_genomics_cnn({});
  const auto n = normalize_constrained_weights(g);
  const auto& f = std::get<op::Conv1D>(n.node("conv1").kind).filters;
  for (std::size_t k = 0; k < 20; ++k) {
    for (std::size_t j = 0; j < 15; ++j) {
      double column = 0.0;
      for (std::size_t c = 0; c < 4; ++c) column += f[(k * 15 + j) * 4 + c];
      EXPECT_NEAR(column, 0.0, 1e-14);
    }
  }
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_one_hot(200, rng);
    const auto a = forward(g, x);
    const auto b = forward(n, x);
    EXPECT_NEAR(a.at("logit")[0], b.at("logit")[0], 1e-12);
    EXPECT_NEAR(a.output()[0], b.output()[0], 1e-12);
  }
}

TEST(ConstrainedNormalization, ConstraintOnWeightlessConsumerIsRejected) {
  const Graph g({{"x", op::Input{}, {}, {2}}, {"r", op::ReLU{}, {"x"}, {2}}}, {"r"}, {{"x", {0, 1}, 1.0}});
  EXPECT_THROW(normalize_constrained_weights(g), GraphError);
}

}  // namespace
}  // namespace deeplift
