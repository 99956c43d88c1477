#include "deeplift/genomics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "deeplift/baselines.hpp"
#include "deeplift/deeplift.hpp"
#include "deeplift/error.hpp"
#include "deeplift/metrics.hpp"
#include "deeplift/normalize.hpp"
#include "deeplift/parallel.hpp"

namespace deeplift::genomics {

namespace {

std::size_t base_index(char base) {
  const auto pos = kAlphabet.find(base);
  if (pos == std::string_view::npos) {
    throw std::invalid_argument(std::string("invalid base '") + base + "'; expected one of ACGT");
  }
  return pos;
}

std::string mutate(std::string_view motif, double rate, std::mt19937_64& rng) {
  std::bernoulli_distribution hit(rate);
  std::uniform_int_distribution<int> other(1, 3);
  std::string out(motif);
  for (char& c : out) {
    if (hit(rng)) c = kAlphabet[(base_index(c) + static_cast<std::size_t>(other(rng))) % 4];
  }
  return out;
}

// Non-overlapping uniform starts for the given motif lengths, by rejection.
std::vector<std::size_t> place(const std::vector<std::size_t>& lengths, std::size_t total, std::mt19937_64& rng) {
  for (int restart = 0; restart < 1000; ++restart) {
    std::vector<std::pair<std::size_t, std::size_t>> taken;
    std::vector<std::size_t> starts;
    bool ok = true;
    for (auto len : lengths) {
      std::uniform_int_distribution<std::size_t> pos(0, total - len);
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const auto s = pos(rng);
        const bool clash = std::any_of(taken.begin(), taken.end(),
                                       [&](const auto& span) { return s < span.second && span.first < s + len; });
        if (!clash) {
          taken.emplace_back(s, s + len);
          starts.push_back(s);
          placed = true;
        }
      }
      if (!placed) {
        ok = false;
        break;
      }
    }
    if (ok) return starts;
  }
  throw std::invalid_argument("could not place motifs without overlap; sequence length too small");
}

}  // namespace

std::vector<SequenceExample> generate_split(const DatasetSpec& spec, std::size_t count, std::uint64_t split_seed,
                                            std::string_view id_prefix) {
  if (spec.min_copies < 1 || spec.max_copies < spec.min_copies) {
    throw std::invalid_argument("motif copy range must satisfy 1 <= min_copies <= max_copies");
  }
  const std::size_t needed = std::max(spec.max_copies * (kGata.size() + kCagatg.size()), 2 * kCagatg.size());
  if (spec.length < needed) {
    throw std::invalid_argument("sequence length " + std::to_string(spec.length) + " cannot hold the planted motifs");
  }
  if (spec.substitution_rate < 0.0 || spec.substitution_rate > 1.0) {
    throw std::invalid_argument("substitution rate must lie in [0, 1]");
  }

  std::mt19937_64 rng(split_seed);
  std::vector<int> labels(count, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(count / 2), 1);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_int_distribution<int> base(0, 3);
  std::uniform_int_distribution<std::size_t> positive_copies(spec.min_copies, spec.max_copies);
  std::uniform_int_distribution<std::size_t> negative_copies(1, 2);
  std::bernoulli_distribution coin(0.5);

  std::vector<SequenceExample> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    SequenceExample ex;
    ex.id = std::string(id_prefix) + std::to_string(n);
    ex.label = labels[n];
    ex.sequence.resize(spec.length);
    for (char& c : ex.sequence) c = kAlphabet[static_cast<std::size_t>(base(rng))];

    std::vector<std::string_view> motifs;
    if (ex.label == 1) {
      motifs.insert(motifs.end(), positive_copies(rng), kGata);
      motifs.insert(motifs.end(), positive_copies(rng), kCagatg);
    } else {
      motifs.insert(motifs.end(), negative_copies(rng), coin(rng) ? kGata : kCagatg);
    }
    std::vector<std::size_t> lengths;
    for (auto m : motifs) lengths.push_back(m.size());
    const auto starts = place(lengths, spec.length, rng);
    for (std::size_t k = 0; k < motifs.size(); ++k) {
      const auto instance = mutate(motifs[k], spec.substitution_rate, rng);
      ex.sequence.replace(starts[k], instance.size(), instance);
      ex.spans.push_back({starts[k], starts[k] + instance.size(), std::string(motifs[k])});
    }
    std::sort(ex.spans.begin(), ex.spans.end(), [](const MotifSpan& a, const MotifSpan& b) { return a.start < b.start; });
    out.push_back(std::move(ex));
  }
  return out;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  auto split_seed = [&](std::uint64_t split) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(split)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  };
  Dataset d;
  d.train = generate_split(spec, spec.n_train, split_seed(0), "train_");
  d.validation = generate_split(spec, spec.n_val, split_seed(1), "val_");
  d.test = generate_split(spec, spec.n_test, split_seed(2), "test_");
  return d;
}

Tensor one_hot_encode(std::string_view sequence) {
  if (sequence.empty()) throw std::invalid_argument("cannot encode an empty sequence");
  Tensor t({sequence.size(), 4});
  for (std::size_t r = 0; r < sequence.size(); ++r) t.at(r, base_index(sequence[r])) = 1.0;
  return t;
}

std::string one_hot_decode(const Tensor& encoded) {
  if (encoded.rank() != 2 || encoded.shape()[1] != 4) throw ShapeError("one-hot tensor must be L x 4");
  std::string out;
  for (std::size_t r = 0; r < encoded.shape()[0]; ++r) {
    std::size_t hot = 4;
    for (std::size_t c = 0; c < 4; ++c) {
      if (encoded.at(r, c) == 1.0) {
        if (hot != 4) throw std::invalid_argument("row " + std::to_string(r) + " is not one-hot");
        hot = c;
      } else if (encoded.at(r, c) != 0.0) {
        throw std::invalid_argument("row " + std::to_string(r) + " is not one-hot");
      }
    }
    if (hot == 4) throw std::invalid_argument("row " + std::to_string(r) + " is not one-hot");
    out.push_back(kAlphabet[hot]);
  }
  return out;
}

std::vector<ConstraintGroup> one_hot_constraint_groups(const std::string& node, std::size_t length) {
  std::vector<ConstraintGroup> groups;
  groups.reserve(length);
  for (std::size_t r = 0; r < length; ++r) groups.push_back({node, {4 * r, 4 * r + 1, 4 * r + 2, 4 * r + 3}, 1.0});
  return groups;
}

void write_fasta(std::ostream& out, std::span<const SequenceExample> examples) {
  for (const auto& ex : examples) {
    out << '>' << ex.id << " label=" << ex.label << " spans=";
    for (std::size_t k = 0; k < ex.spans.size(); ++k) {
      if (k) out << ',';
      out << ex.spans[k].start << '-' << ex.spans[k].end << ':' << ex.spans[k].motif;
    }
    out << '\n' << ex.sequence << '\n';
  }
}

std::vector<SequenceExample> read_fasta(std::istream& in, std::string_view source) {
  std::vector<SequenceExample> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> void {
    throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '>') {
      SequenceExample ex;
      std::istringstream header(line.substr(1));
      header >> ex.id;
      if (ex.id.empty()) fail("header without an id");
      std::string field;
      bool has_label = false;
      while (header >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) fail("malformed header field '" + field + "'");
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "label") {
          if (value != "0" && value != "1") fail("label must be 0 or 1");
          ex.label = value == "1";
          has_label = true;
        } else if (key == "spans") {
          std::istringstream list(value);
          std::string item;
          while (std::getline(list, item, ',')) {
            if (item.empty()) continue;
            const auto dash = item.find('-');
            const auto colon = item.find(':');
            if (dash == std::string::npos || colon == std::string::npos || colon < dash) {
              fail("malformed span '" + item + "'");
            }
            try {
              ex.spans.push_back({std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1, colon - dash - 1)),
                                  item.substr(colon + 1)});
            } catch (const std::exception&) {
              fail("malformed span '" + item + "'");
            }
          }
        }
      }
      if (!has_label) fail("header lacks label=");
      out.push_back(std::move(ex));
    } else {
      if (out.empty()) fail("sequence line before any header");
      for (char c : line) {
        if (kAlphabet.find(c) == std::string_view::npos) fail(std::string("invalid base '") + c + "'");
      }
      out.back().sequence += line;
    }
  }
  for (const auto& ex : out) {
    for (const auto& s : ex.spans) {
      if (s.start >= s.end || s.end > ex.sequence.size()) {
        throw FormatError(std::string(source) + ": span of '" + ex.id + "' lies outside its sequence");
      }
    }
  }
  return out;
}

Graph build_genomics_cnn(const CnnSpec& spec) {
  const std::size_t conv_len = spec.length - spec.filter_width + 1;
  std::size_t pooled = (conv_len - spec.pool_width) / spec.pool_stride + 1;
  if (spec.pool_ceil_mode && (conv_len - spec.pool_width) % spec.pool_stride != 0 &&
      pooled * spec.pool_stride < conv_len) {
    ++pooled;
  }
  const std::size_t flat = pooled * spec.filters;

  std::vector<NodeSpec> nodes;
  nodes.push_back({"input", op::Input{}, {}, {spec.length, 4}});
  nodes.push_back({"conv1",
                   op::Conv1D{Tensor({spec.filters, spec.filter_width, 4}), Tensor({spec.filters}), 1},
                   {"input"},
                   {conv_len, spec.filters}});
  nodes.push_back({"conv1_prelu", op::PReLU{Tensor({spec.filters})}, {"conv1"}, {conv_len, spec.filters}});
  nodes.push_back({"pool1",
                   op::MaxPool1D{spec.pool_width, spec.pool_stride, spec.pool_ceil_mode},
                   {"conv1_prelu"},
                   {pooled, spec.filters}});
  nodes.push_back({"dense1", op::Affine{Tensor({spec.hidden, flat}), Tensor({spec.hidden})}, {"pool1"}, {spec.hidden}});
  nodes.push_back({"dense1_prelu", op::PReLU{Tensor({spec.hidden})}, {"dense1"}, {spec.hidden}});
  nodes.push_back(
      {"dense2", op::Affine{Tensor({spec.hidden, spec.hidden}), Tensor({spec.hidden})}, {"dense1_prelu"}, {spec.hidden}});
  nodes.push_back({"dense2_prelu", op::PReLU{Tensor({spec.hidden})}, {"dense2"}, {spec.hidden}});
  nodes.push_back({"logit", op::Affine{Tensor({1, spec.hidden}), Tensor({1})}, {"dense2_prelu"}, {1}});
  nodes.push_back({"output", op::Sigmoid{}, {"logit"}, {1}});

  Graph graph(std::move(nodes), {"output"}, one_hot_constraint_groups("input", spec.length));
  require_valid(graph);
  initialize_parameters(graph, spec.seed);
  return graph;
}

std::vector<LabeledSample> to_samples(std::span<const SequenceExample> examples) {
  std::vector<LabeledSample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back({one_hot_encode(ex.sequence), ex.label});
  return out;
}

std::vector<double> present_base_scores(const Tensor& scores, std::string_view sequence) {
  if (scores.rank() != 2 || scores.shape()[1] != 4 || scores.shape()[0] != sequence.size()) {
    throw ShapeError("score matrix " + to_string(scores.shape()) + " does not match a sequence of length " +
                     std::to_string(sequence.size()));
  }
  std::vector<double> out(sequence.size());
  for (std::size_t r = 0; r < sequence.size(); ++r) out[r] = scores.at(r, base_index(sequence[r]));
  return out;
}

double motif_recovery_score(std::span<const double> position_scores, const SequenceExample& example,
                            std::optional<std::string_view> motif) {
  std::vector<bool> inside(position_scores.size(), false);
  for (const auto& s : example.spans) {
    if (motif && s.motif != *motif) continue;
    for (std::size_t p = s.start; p < std::min(s.end, inside.size()); ++p) inside[p] = true;
  }
  double in_spans = 0.0;
  double total = 0.0;
  for (std::size_t p = 0; p < position_scores.size(); ++p) {
    const double v = position_scores[p];
    if (v <= 0.0) continue;
    total += v;
    if (inside[p]) in_spans += v;
  }
  return total > 0.0 ? in_spans / total : 0.0;
}

double span_coverage(const SequenceExample& example) {
  std::size_t covered = 0;
  for (const auto& s : example.spans) covered += s.end - s.start;
  return static_cast<double>(covered) / static_cast<double>(example.sequence.size());
}

Comparison compare_methods(const Graph& trained, std::span<const SequenceExample> examples,
                           const CompareOptions& options) {
  const Graph normalized = normalize_constrained_weights(trained);
  const Target target = select_attribution_target(trained, {});
  const auto samples = to_samples(examples);
  const auto probs = predict(trained, samples, options.threads);

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].label == 1 && (!options.only_correct || probs[i] > 0.5)) selected.push_back(i);
  }

  Comparison result;
  result.rows.resize(selected.size());
  parallel_for(selected.size(), options.threads, [&](std::size_t k) {
    const auto i = selected[k];
    const auto& ex = examples[i];
    const InputMap input{{"input", samples[i].input}};
    const auto reference = zero_reference(normalized);
    const auto dl = deeplift_attribution(normalized, input, reference, target);
    const auto gi = gradient_times_input(trained, input, target);

    ComparisonRow row;
    row.id = ex.id;
    row.probability = probs[i];
    row.deeplift_track = present_base_scores(dl.scores(), ex.sequence);
    row.grad_input_track = present_base_scores(gi.scores(), ex.sequence);
    row.deeplift = motif_recovery_score(row.deeplift_track, ex);
    row.grad_input = motif_recovery_score(row.grad_input_track, ex);
    row.deeplift_gata = motif_recovery_score(row.deeplift_track, ex, kGata);
    row.grad_input_gata = motif_recovery_score(row.grad_input_track, ex, kGata);
    row.deeplift_cagatg = motif_recovery_score(row.deeplift_track, ex, kCagatg);
    row.grad_input_cagatg = motif_recovery_score(row.grad_input_track, ex, kCagatg);
    row.coverage = span_coverage(ex);
    row.residual = dl.residual;
    row.target_delta = dl.target_delta;
    result.rows[k] = std::move(row);
  });

  if (result.rows.empty()) return result;
  const double n = static_cast<double>(result.rows.size());
  std::size_t wins = 0;
  for (const auto& r : result.rows) {
    result.mean_deeplift += r.deeplift / n;
    result.mean_grad_input += r.grad_input / n;
    result.gata_gap += (r.deeplift_gata - r.grad_input_gata) / n;
    result.cagatg_gap += (r.deeplift_cagatg - r.grad_input_cagatg) / n;
    result.mean_coverage += r.coverage / n;
    wins += r.deeplift >= r.grad_input;
    const double scale = std::max(std::abs(r.target_delta), 1e-3);
    result.max_relative_residual = std::max(result.max_relative_residual, r.residual / scale);
  }
  result.win_rate = static_cast<double>(wins) / n;
  return result;
}

void write_comparison_tsv(std::ostream& out, const Comparison& c) {
  out << "id\tprobability\tdeeplift\tgrad_input\tdeeplift_gata\tgrad_input_gata\tdeeplift_cagatg\tgrad_input_cagatg"
         "\tcoverage\tresidual\n";
  out << std::setprecision(8);
  for (const auto& r : c.rows) {
    out << r.id << '\t' << r.probability << '\t' << r.deeplift << '\t' << r.grad_input << '\t' << r.deeplift_gata
        << '\t' << r.grad_input_gata << '\t' << r.deeplift_cagatg << '\t' << r.grad_input_cagatg << '\t' << r.coverage
        << '\t' << r.residual << '\n';
  }
  out << "# sequences=" << c.rows.size() << " mean_deeplift=" << c.mean_deeplift
      << " mean_grad_input=" << c.mean_grad_input << " win_rate=" << c.win_rate << " gata_gap=" << c.gata_gap
      << " cagatg_gap=" << c.cagatg_gap << " mean_coverage=" << c.mean_coverage
      << " max_relative_residual=" << c.max_relative_residual << '\n';
}

void write_score_tracks(std::ostream& out, const Comparison& c, std::span<const SequenceExample> examples) {
  std::map<std::string_view, const SequenceExample*> by_id;
  for (const auto& ex : examples) by_id.emplace(ex.id, &ex);
  out << "sample_id\tposition\tbase\tdeeplift\tgrad_input\n";
  out << std::setprecision(8);
  for (const auto& r : c.rows) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) continue;
    const auto& seq = it->second->sequence;
    for (std::size_t p = 0; p < r.deeplift_track.size(); ++p) {
      out << r.id << '\t' << p << '\t' << seq[p] << '\t' << r.deeplift_track[p] << '\t' << r.grad_input_track[p] << '\n';
    }
  }
}

BenchmarkResult run_benchmark(const BenchmarkSpec& spec, std::ostream* progress) {
  BenchmarkResult result;
  result.data = generate_dataset(spec.data);
  const auto train = to_samples(result.data.train);
  const auto validation = to_samples(result.data.validation);
  const auto test = to_samples(result.data.test);
  result.training = train_loop(build_genomics_cnn(spec.cnn), train, validation, spec.train, progress);

  std::vector<int> labels;
  labels.reserve(test.size());
  for (const auto& s : test) labels.push_back(s.label);
  result.test_auroc = auroc(predict(result.training.graph, test, spec.train.threads), labels);
  result.comparison = compare_methods(result.training.graph, result.data.test, {.only_correct = true, .threads = spec.train.threads});
  return result;
}

}  // namespace deeplift::genomics
