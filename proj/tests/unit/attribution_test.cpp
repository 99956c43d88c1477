#include <gtest/gtest.h>

#include <sstream>

#include "deeplift/attribution.hpp"
#include "deeplift/error.hpp"
#include "deeplift/genomics.hpp"
#include "random_graphs.hpp"

namespace deeplift {
namespace {

Graph softmax_net() {
  return Graph({{"x", op::Input{}, {}, {2}},
                {"z", op::Affine{Tensor({3, 2}, {1, 2, -1, 0.5, 3, 1}), Tensor({3}, {0, 1, -1})}, {"x"}, {3}},
                {"s", op::Softmax{}, {"z"}, {3}}},
               {"s"});
}

TEST(Dispatch, ParsesNames) {
  EXPECT_EQ(parse_method("deeplift"), Method::DeepLift);
  EXPECT_EQ(parse_method("grad_input"), Method::GradientTimesInput);
  EXPECT_EQ(parse_method("lrp"), Method::LrpEpsilon);
  EXPECT_EQ(method_name(Method::LrpEpsilon), "lrp");
  EXPECT_THROW(parse_method("saliency"), std::invalid_argument);
  EXPECT_EQ(parse_reference_mode("normalized-zeros"), ReferenceMode::NormalizedZeros);
  EXPECT_THROW(parse_reference_mode("shuffled"), std::invalid_argument);
}

TEST(Dispatch, AutoTargetOnSoftmaxHeadUsesNormalizedLogits) {
  AttributionRequest request;
  request.target.index = 2;
  const Graph prepared = prepare_model(softmax_net(), request);
  const auto& w = std::get<op::Affine>(prepared.node("z").kind).weights;
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(w.at(0, i) + w.at(1, i) + w.at(2, i), 0.0, 1e-15);
  const auto r = attribute(prepared, {{"x", Tensor::from_vector({1, 1})}}, request);
  EXPECT_EQ(r.target, (Target{"z", 2}));
  EXPECT_LE(r.residual, 1e-12);
}

TEST(Dispatch, NormalizedZerosOnlyTouchesConstrainedModels) {
  AttributionRequest request;
  request.reference = ReferenceMode::NormalizedZeros;
  request.target.node = "logit";
  const auto g = genomics::build_genomics_cnn({});
  const auto prepared = prepare_model(g, request);
  EXPECT_NE(std::get<op::Conv1D>(prepared.node("conv1").kind).filters,
            std::get<op::Conv1D>(g.node("conv1").kind).filters);
  request.reference_input = InputMap{{"input", Tensor({200, 4})}};
  const auto untouched = prepare_model(g, request);
  EXPECT_EQ(std::get<op::Conv1D>(untouched.node("conv1").kind).filters,
            std::get<op::Conv1D>(g.node("conv1").kind).filters);
}

TEST(Dispatch, MethodsAgreeOnLinearModelWithZeroReference) {
  const Graph g({{"x", op::Input{}, {}, {3}},
                 {"y", op::Affine{Tensor({1, 3}, {1, -2, 4}), Tensor({1})}, {"x"}, {1}}},
                {"y"});
  const InputMap x{{"x", Tensor::from_vector({0.5, 1, -1})}};
  AttributionRequest request;
  request.target.node = "y";
  std::vector<std::vector<double>> scores;
  for (Method m : {Method::DeepLift, Method::GradientTimesInput, Method::LrpEpsilon}) {
    request.method = m;
    scores.push_back(attribute(prepare_model(g, request), x, request).scores().storage());
  }
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(scores[0][k], scores[1][k]);
    EXPECT_NEAR(scores[0][k], scores[2][k], 1e-8);
  }
}

TEST(VectorTsv, ParsesSeparatorsAndSkipsComments) {
  std::istringstream in("# header\n1\t2\t3\n\n4,5,6\n7 8 9\n");
  const auto rows = read_vector_tsv(in, {3});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].storage(), (std::vector<double>{4, 5, 6}));
  EXPECT_EQ(rows[2].shape(), (Shape{3}));
}

TEST(VectorTsv, ReportsBadLines) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_vector_tsv(in, {2}, "in.tsv");
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("1\t2\n1\t2\t3\n").find("in.tsv:2"), std::string::npos);
  EXPECT_NE(message("1\tfoo\n").find("in.tsv:1"), std::string::npos);
}

TEST(AttributionTsv, HeaderAndRows) {
  const Graph g({{"x", op::Input{}, {}, {2}},
                 {"y", op::Affine{Tensor({1, 2}, {1, 3}), Tensor({1})}, {"x"}, {1}}},
                {"y"});
  AttributionRequest request;
  request.target.node = "y";
  std::vector<ContributionReport> reports{attribute(g, {{"x", Tensor::from_vector({1, 2})}}, request)};
  const std::vector<std::string> ids{"s0"};
  const std::vector<std::string> labels{"a", "b"};
  std::ostringstream out;
  write_attribution_tsv(out, reports, ids, labels);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# target=y:0 method=deeplift", 0), 0u) << line;
  std::getline(lines, line);
  EXPECT_EQ(line, "sample_id\tfeature_index\tfeature_label\tdelta\tmultiplier\tcontribution\tresidual");
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("s0\t0\ta\t1\t1\t1\t", 0), 0u) << line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("s0\t1\tb\t2\t3\t6\t", 0), 0u) << line;
}

}  // namespace
}  // namespace deeplift
