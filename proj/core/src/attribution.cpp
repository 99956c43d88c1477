#include "deeplift/attribution.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "deeplift/baselines.hpp"
#include "deeplift/error.hpp"
#include "deeplift/normalize.hpp"

namespace deeplift {

Method parse_method(std::string_view name) {
  if (name == "deeplift") return Method::DeepLift;
  if (name == "grad_input") return Method::GradientTimesInput;
  if (name == "lrp") return Method::LrpEpsilon;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected deeplift, grad_input or lrp)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::DeepLift:
      return "deeplift";
    case Method::GradientTimesInput:
      return "grad_input";
    case Method::LrpEpsilon:
      return "lrp";
  }
  return "?";
}

ReferenceMode parse_reference_mode(std::string_view name) {
  if (name == "zeros") return ReferenceMode::Zeros;
  if (name == "normalized-zeros") return ReferenceMode::NormalizedZeros;
  throw std::invalid_argument("unknown reference '" + std::string(name) + "' (expected zeros or normalized-zeros)");
}

Graph prepare_model(const Graph& graph, const AttributionRequest& request) {
  Graph prepared = graph;
  if (request.reference == ReferenceMode::NormalizedZeros && !request.reference_input) {
    prepared = normalize_constrained_weights(prepared);
  }
  if (!request.target.node && has_softmax_head(prepared)) prepared = mean_normalize_softmax_weights(prepared);
  return prepared;
}

ContributionReport attribute(const Graph& prepared, const InputMap& input, const AttributionRequest& request) {
  const Target target = select_attribution_target(prepared, request.target);
  const InputMap reference = request.reference_input ? *request.reference_input : zero_reference(prepared);
  switch (request.method) {
    case Method::DeepLift:
      return deeplift_attribution(prepared, input, reference, target, request.rules);
    case Method::GradientTimesInput:
      return gradient_times_input(prepared, input, target, &reference);
    case Method::LrpEpsilon:
      return lrp_report(prepared, input, target, request.epsilon);
  }
  throw AttributionError("unsupported method");
}

std::vector<Tensor> read_vector_tsv(std::istream& in, const Shape& shape, std::string_view source) {
  const auto width = element_count(shape);
  std::vector<Tensor> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::replace_if(line.begin(), line.end(), [](char c) { return c == ',' || c == '\t' || c == '\r'; }, ' ');
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": '" + token + "' is not a number");
      }
    }
    if (values.empty()) continue;
    if (values.size() != width) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " values for shape " + to_string(shape) + ", found " + std::to_string(values.size()));
    }
    rows.emplace_back(shape, std::move(values));
  }
  return rows;
}

void write_attribution_tsv(std::ostream& out, std::span<const ContributionReport> reports,
                           std::span<const std::string> sample_ids, std::span<const std::string> feature_labels) {
  double worst = 0.0;
  for (const auto& r : reports) worst = std::max(worst, r.residual);
  const auto method = reports.empty() ? std::string("none") : reports.front().method;
  const auto target = reports.empty() ? std::string("none") : to_string(reports.front().target);
  out << "# target=" << target << " method=" << method << " max_residual=" << std::setprecision(3) << worst << '\n';
  out << "sample_id\tfeature_index\tfeature_label\tdelta\tmultiplier\tcontribution\tresidual\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t s = 0; s < reports.size(); ++s) {
    const auto& id = s < sample_ids.size() ? sample_ids[s] : std::to_string(s);
    std::size_t feature = 0;
    for (const auto& in : reports[s].inputs) {
      for (std::size_t k = 0; k < in.contribution.size(); ++k, ++feature) {
        const auto label =
            feature < feature_labels.size() ? feature_labels[feature] : in.node + "[" + std::to_string(k) + "]";
        out << id << '\t' << feature << '\t' << label << '\t' << in.delta[k] << '\t' << in.multiplier[k] << '\t'
            << in.contribution[k] << '\t' << reports[s].residual << '\n';
      }
    }
  }
}

}  // namespace deeplift
