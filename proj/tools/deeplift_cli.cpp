// deeplift: dataset generation, training, attribution and comparison from the shell.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deeplift/attribution.hpp"
#include "deeplift/baselines.hpp"
#include "deeplift/error.hpp"
#include "deeplift/genomics.hpp"
#include "deeplift/metrics.hpp"
#include "deeplift/model_io.hpp"
#include "deeplift/normalize.hpp"
#include "deeplift/parallel.hpp"
#include "deeplift/train.hpp"

namespace fs = std::filesystem;
namespace gx = deeplift::genomics;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kMissingFile = 3, kInvalidInput = 4, kRuntime = 5 };

void report_error(int code, std::string_view kind, std::string_view message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped.push_back('\\');
    escaped.push_back(c == '\n' ? ' ' : c);
  }
  std::cerr << "error code=" << code << " kind=" << kind << " message=\"" << escaped << "\"\n";
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw deeplift::IoError("no such file: " + path.string());
}

std::ifstream open_in(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  if (!in) throw deeplift::IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw deeplift::IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_manifest(const fs::path& output, const std::string& subcommand, ordered_json config) {
  ordered_json manifest;
  manifest["tool"] = "deeplift";
  manifest["subcommand"] = subcommand;
  manifest["config"] = std::move(config);
  auto out = open_out(output.string() + ".manifest");
  out << manifest.dump(2) << '\n';
}

std::vector<gx::SequenceExample> load_fasta(const fs::path& path) {
  auto in = open_in(path);
  return gx::read_fasta(in, path.string());
}

bool looks_like_fasta(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".fa" || ext == ".fasta") return true;
  std::ifstream in(path);
  char first = 0;
  in >> first;
  return first == '>';
}

deeplift::TargetRequest parse_target(const std::string& text) {
  deeplift::TargetRequest request;
  if (text == "auto") return request;
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    request.node = text;
    return request;
  }
  request.node = text.substr(0, colon);
  try {
    std::size_t used = 0;
    request.index = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("target must be 'auto', NODE or NODE:INDEX, got '" + text + "'");
  }
  return request;
}

ordered_json train_config_json(const deeplift::TrainConfig& c) {
  return {{"seed", c.seed},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"threads", c.threads}};
}

ordered_json dataset_json(const gx::DatasetSpec& d) {
  return {{"n_train", d.n_train},     {"n_val", d.n_val},
          {"n_test", d.n_test},       {"length", d.length},
          {"seed", d.seed},           {"substitution_rate", d.substitution_rate},
          {"min_copies", d.min_copies}, {"max_copies", d.max_copies}};
}

struct GenDataOptions {
  std::string out;
  gx::DatasetSpec spec;
};

void add_dataset_flags(CLI::App* cmd, gx::DatasetSpec& spec) {
  cmd->add_option("--n-train", spec.n_train, "Training sequences")->capture_default_str();
  cmd->add_option("--n-val", spec.n_val, "Validation sequences")->capture_default_str();
  cmd->add_option("--n-test", spec.n_test, "Test sequences")->capture_default_str();
  cmd->add_option("--length", spec.length, "Sequence length")->capture_default_str();
  cmd->add_option("--seed", spec.seed, "Dataset seed")->capture_default_str();
  cmd->add_option("--substitution-rate", spec.substitution_rate, "Per-base motif substitution probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-copies", spec.min_copies, "Fewest copies of each motif in a positive")->capture_default_str();
  cmd->add_option("--max-copies", spec.max_copies, "Most copies of each motif in a positive")->capture_default_str();
}

int run_gen_data(const GenDataOptions& o) {
  const auto data = gx::generate_dataset(o.spec);
  const std::pair<const char*, const std::vector<gx::SequenceExample>*> splits[] = {
      {".train.fa", &data.train}, {".val.fa", &data.validation}, {".test.fa", &data.test}};
  for (const auto& [suffix, examples] : splits) {
    auto out = open_out(o.out + suffix);
    gx::write_fasta(out, *examples);
  }
  write_manifest(o.out, "gen-data", {{"out", o.out}, {"dataset", dataset_json(o.spec)}});
  std::cout << "wrote " << o.out << ".{train,val,test}.fa (" << data.train.size() << '/' << data.validation.size()
            << '/' << data.test.size() << " sequences)\n";
  return kOk;
}

struct TrainOptions {
  std::string train;
  std::string val;
  std::string out;
  std::string loss_curve;
  std::string config;
  deeplift::TrainConfig train_config = gx::BenchmarkSpec{}.train;
  std::uint64_t model_seed = gx::CnnSpec{}.seed;
  bool quiet = false;
};

// Config file values apply first; flags given explicitly on the command line win.
deeplift::TrainConfig resolve_train_config(const CLI::App& cmd, const std::string& config_path,
                                           const deeplift::TrainConfig& flags, const char* seed_flag) {
  if (config_path.empty()) return flags;
  require_file(config_path);
  auto resolved = deeplift::load_train_config(config_path, flags);
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given(seed_flag)) resolved.seed = flags.seed;
  if (given("--epochs")) resolved.epochs = flags.epochs;
  if (given("--batch-size")) resolved.batch_size = flags.batch_size;
  if (given("--learning-rate")) resolved.learning_rate = flags.learning_rate;
  if (given("--momentum")) resolved.momentum = flags.momentum;
  if (cmd.get_parent()->get_option("--threads")->count() > 0) resolved.threads = flags.threads;
  return resolved;
}

void add_train_flags(CLI::App* cmd, deeplift::TrainConfig& c) {
  cmd->add_option("--seed", c.seed, "Shuffling seed")->capture_default_str();
  cmd->add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--learning-rate", c.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--momentum", c.momentum, "SGD momentum")->capture_default_str();
}

int run_train(const CLI::App& cmd, TrainOptions o, std::size_t threads) {
  o.train_config.threads = threads;
  const auto config = resolve_train_config(cmd, o.config, o.train_config, "--seed");
  const auto train = load_fasta(o.train);
  const auto val = load_fasta(o.val);
  if (train.empty()) throw std::invalid_argument("training file " + o.train + " holds no sequences");

  gx::CnnSpec cnn;
  cnn.length = train.front().sequence.size();
  cnn.seed = o.model_seed;
  const auto train_samples = gx::to_samples(train);
  const auto val_samples = gx::to_samples(val);
  auto result = deeplift::train_loop(gx::build_genomics_cnn(cnn), train_samples, val_samples, config,
                                     o.quiet ? nullptr : &std::cerr);
  deeplift::save_model(result.graph, o.out);
  const auto curve_path = o.loss_curve.empty() ? o.out + ".loss.tsv" : o.loss_curve;
  auto curve = open_out(curve_path);
  deeplift::write_loss_curve(curve, result.curve);
  write_manifest(o.out, "train",
                 {{"train", o.train},
                  {"val", o.val},
                  {"out", o.out},
                  {"loss_curve", curve_path},
                  {"config_file", o.config},
                  {"model_seed", o.model_seed},
                  {"sequence_length", cnn.length},
                  {"training", train_config_json(config)}});
  if (!result.curve.empty()) {
    const auto& last = result.curve.back();
    std::cout << "epochs=" << last.epoch << " train_loss=" << last.train_loss << " val_loss=" << last.val_loss
              << " val_auroc=" << last.val_auroc << '\n';
  }
  return kOk;
}

struct AttributeOptions {
  std::string model;
  std::string input;
  std::string out;
  std::string method = "deeplift";
  std::string target = "auto";
  std::string reference = "zeros";
  std::string reference_file;
  double epsilon = 1e-9;
  double stable_epsilon = deeplift::rules::kStableEpsilon;
};

int run_attribute(const AttributeOptions& o, std::size_t threads) {
  require_file(o.model);
  require_file(o.input);
  if (!o.reference_file.empty()) require_file(o.reference_file);
  const auto model = deeplift::load_model(o.model);

  deeplift::AttributionRequest request;
  request.method = deeplift::parse_method(o.method);
  request.target = parse_target(o.target);
  request.reference = deeplift::parse_reference_mode(o.reference);
  request.epsilon = o.epsilon;
  request.rules.stable_epsilon = o.stable_epsilon;

  const auto input_ids = model.input_ids();
  if (input_ids.size() != 1) throw std::invalid_argument("attribute expects a model with exactly one Input node");
  const auto& input_id = input_ids.front();
  const auto& shape = model.node(model.index_of(input_id)).output_shape;

  std::vector<deeplift::Tensor> rows;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  if (looks_like_fasta(o.input)) {
    for (const auto& ex : load_fasta(o.input)) {
      rows.push_back(gx::one_hot_encode(ex.sequence));
      ids.push_back(ex.id);
    }
    if (shape.size() == 2 && shape[1] == gx::kAlphabet.size()) {
      for (std::size_t p = 0; p < shape[0]; ++p) {
        for (char base : gx::kAlphabet) labels.push_back(std::to_string(p) + ":" + base);
      }
    }
  } else {
    auto in = open_in(o.input);
    rows = deeplift::read_vector_tsv(in, shape, o.input);
    for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back(std::to_string(i));
  }
  if (!o.reference_file.empty()) {
    auto in = open_in(o.reference_file);
    auto refs = deeplift::read_vector_tsv(in, shape, o.reference_file);
    if (refs.size() != 1) throw std::invalid_argument("reference file must hold exactly one row");
    request.reference_input = deeplift::InputMap{{input_id, refs.front()}};
  }

  const auto prepared = deeplift::prepare_model(model, request);
  std::vector<deeplift::ContributionReport> reports(rows.size());
  deeplift::parallel_for(rows.size(), threads, [&](std::size_t i) {
    if (rows[i].shape() != shape) {
      throw deeplift::ShapeError("sample '" + ids[i] + "' has shape " + deeplift::to_string(rows[i].shape()) +
                                 ", model expects " + deeplift::to_string(shape));
    }
    reports[i] = deeplift::attribute(prepared, deeplift::InputMap{{input_id, rows[i]}}, request);
  });

  auto out = open_out(o.out);
  deeplift::write_attribution_tsv(out, reports, ids, labels);
  double worst = 0.0;
  for (const auto& r : reports) worst = std::max(worst, r.residual);
  write_manifest(o.out, "attribute",
                 {{"model", o.model},
                  {"input", o.input},
                  {"out", o.out},
                  {"method", o.method},
                  {"target", reports.empty() ? o.target : deeplift::to_string(reports.front().target)},
                  {"reference", o.reference_file.empty() ? o.reference : "file:" + o.reference_file},
                  {"lrp_epsilon", o.epsilon},
                  {"stable_epsilon", o.stable_epsilon},
                  {"threads", threads},
                  {"samples", reports.size()},
                  {"max_residual", worst}});
  std::cout << "samples=" << reports.size() << " max_residual=" << worst << '\n';
  return kOk;
}

struct CompareOptions {
  std::string model;
  std::string data;
  std::string out;
  std::string tracks;
  bool all_positives = false;
};

void print_comparison(const gx::Comparison& c) {
  std::cout << "sequences=" << c.rows.size() << " deeplift=" << c.mean_deeplift << " grad_input=" << c.mean_grad_input
            << " win_rate=" << c.win_rate << " gata_gap=" << c.gata_gap << " cagatg_gap=" << c.cagatg_gap
            << " coverage=" << c.mean_coverage << " max_relative_residual=" << c.max_relative_residual << '\n';
}

int run_compare(const CompareOptions& o, std::size_t threads) {
  require_file(o.model);
  const auto model = deeplift::load_model(o.model);
  const auto data = load_fasta(o.data);
  const auto comparison = gx::compare_methods(model, data, {.only_correct = !o.all_positives, .threads = threads});
  auto out = open_out(o.out);
  gx::write_comparison_tsv(out, comparison);
  if (!o.tracks.empty()) {
    auto tracks = open_out(o.tracks);
    gx::write_score_tracks(tracks, comparison, data);
  }
  write_manifest(o.out, "compare",
                 {{"model", o.model},
                  {"data", o.data},
                  {"out", o.out},
                  {"tracks", o.tracks},
                  {"only_correct", !o.all_positives},
                  {"deeplift_reference", "normalized-zeros"},
                  {"target", "logit:0"},
                  {"threads", threads}});
  print_comparison(comparison);
  return kOk;
}

struct CheckLrpOptions {
  std::string out;
  deeplift::EnsembleSpec spec;
  std::vector<double> epsilons{1e-2, 1e-5, 1e-9};
};

int run_check_lrp(const CheckLrpOptions& o, std::size_t threads) {
  if (o.epsilons.empty()) throw std::invalid_argument("--epsilons needs at least one value");
  const auto report = deeplift::equivalence_report(o.spec, o.epsilons, threads);
  auto out = open_out(o.out);
  deeplift::write_equivalence_tsv(out, report);
  write_manifest(o.out, "check-lrp",
                 {{"out", o.out},
                  {"nets", o.spec.nets},
                  {"seed", o.spec.seed},
                  {"min_layers", o.spec.min_layers},
                  {"max_layers", o.spec.max_layers},
                  {"input_width", o.spec.input_width},
                  {"min_width", o.spec.min_width},
                  {"max_width", o.spec.max_width},
                  {"min_preactivation", o.spec.min_preactivation},
                  {"epsilons", o.epsilons},
                  {"threads", threads}});
  std::cout << "nets=" << report.nets() << " resamples=" << report.resamples
            << " worst_at_last_epsilon=" << report.worst(o.epsilons.size() - 1)
            << " fraction_decreasing=" << report.fraction_decreasing() << '\n';
  return kOk;
}

struct NormalizeOptions {
  std::string model;
  std::string out;
  bool skip_softmax = false;
  bool skip_constrained = false;
};

int run_normalize(const NormalizeOptions& o) {
  require_file(o.model);
  auto model = deeplift::load_model(o.model);
  bool softmax = false;
  bool constrained = false;
  if (!o.skip_constrained && !model.constraint_groups().empty()) {
    model = deeplift::normalize_constrained_weights(model);
    constrained = true;
  }
  if (!o.skip_softmax && deeplift::has_softmax_head(model)) {
    model = deeplift::mean_normalize_softmax_weights(model);
    softmax = true;
  }
  deeplift::save_model(model, o.out);
  write_manifest(o.out, "normalize",
                 {{"model", o.model},
                  {"out", o.out},
                  {"constrained_inputs", constrained},
                  {"softmax_mean", softmax}});
  std::cout << "constrained_inputs=" << constrained << " softmax_mean=" << softmax << '\n';
  return kOk;
}

struct GenomicsOptions {
  std::string out_dir;
  std::string config;
  gx::BenchmarkSpec spec;
  bool quiet = false;
};

int run_genomics(const CLI::App& cmd, GenomicsOptions o, std::size_t threads) {
  o.spec.train.threads = threads;
  o.spec.train = resolve_train_config(cmd, o.config, o.spec.train, "--train-seed");
  const auto result = gx::run_benchmark(o.spec, o.quiet ? nullptr : &std::cerr);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const std::pair<const char*, const std::vector<gx::SequenceExample>*> splits[] = {
      {"train.fa", &result.data.train}, {"val.fa", &result.data.validation}, {"test.fa", &result.data.test}};
  for (const auto& [name, examples] : splits) {
    auto out = open_out(dir / name);
    gx::write_fasta(out, *examples);
  }
  deeplift::save_model(result.training.graph, dir / "model.json");
  {
    auto out = open_out(dir / "loss_curve.tsv");
    deeplift::write_loss_curve(out, result.training.curve);
  }
  {
    auto out = open_out(dir / "comparison.tsv");
    gx::write_comparison_tsv(out, result.comparison);
  }
  {
    auto out = open_out(dir / "score_tracks.tsv");
    gx::write_score_tracks(out, result.comparison, result.data.test);
  }
  const auto& c = result.comparison;
  ordered_json summary = {{"test_auroc", result.test_auroc},
                          {"sequences", c.rows.size()},
                          {"mean_deeplift", c.mean_deeplift},
                          {"mean_grad_input", c.mean_grad_input},
                          {"win_rate", c.win_rate},
                          {"gata_gap", c.gata_gap},
                          {"cagatg_gap", c.cagatg_gap},
                          {"mean_coverage", c.mean_coverage},
                          {"max_relative_residual", c.max_relative_residual}};
  {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  write_manifest((dir / "run").string(), "genomics",
                 {{"out_dir", o.out_dir},
                  {"config_file", o.config},
                  {"dataset", dataset_json(o.spec.data)},
                  {"model_seed", o.spec.cnn.seed},
                  {"training", train_config_json(o.spec.train)}});
  std::cout << "test_auroc=" << result.test_auroc << ' ';
  print_comparison(c);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepLIFT attribution toolkit: synthetic genomics data, CNN training, attribution and baselines"};
  app.name("deeplift");
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "Worker threads for per-sample work (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::function<int()> action;

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the GATA/CAGATG dataset as FASTA files");
  gen_cmd->add_option("--out", gen.out, "Output prefix; writes PREFIX.{train,val,test}.fa")->required();
  add_dataset_flags(gen_cmd, gen.spec);
  gen_cmd->callback([&] { action = [&] { return run_gen_data(gen); }; });

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train the genomics CNN");
  train_cmd->add_option("--train", train.train, "Training FASTA")->required();
  train_cmd->add_option("--val", train.val, "Validation FASTA")->required();
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--loss-curve", train.loss_curve, "Loss curve TSV (default OUT.loss.tsv)");
  train_cmd->add_option("--config", train.config, "JSON training config; explicit flags override it");
  train_cmd->add_option("--model-seed", train.model_seed, "Weight initialization seed")->capture_default_str();
  train_cmd->add_flag("--quiet", train.quiet, "Do not print per-epoch progress");
  add_train_flags(train_cmd, train.train_config);
  train_cmd->callback([&] { action = [&] { return run_train(*train_cmd, train, threads); }; });

  AttributeOptions attr;
  auto* attr_cmd = app.add_subcommand("attribute", "Score input features of a model");
  attr_cmd->add_option("--model", attr.model, "Model file")->required();
  attr_cmd->add_option("--input", attr.input, "Samples: FASTA, or TSV with one flattened sample per line")->required();
  attr_cmd->add_option("--out", attr.out, "Score TSV to write")->required();
  attr_cmd->add_option("--method", attr.method, "deeplift, grad_input or lrp")
      ->capture_default_str()
      ->check(CLI::IsMember({"deeplift", "grad_input", "lrp"}));
  attr_cmd->add_option("--target", attr.target, "auto (node feeding the Sigmoid/Softmax head), NODE or NODE:INDEX")
      ->capture_default_str();
  attr_cmd->add_option("--reference", attr.reference, "zeros or normalized-zeros")
      ->capture_default_str()
      ->check(CLI::IsMember({"zeros", "normalized-zeros"}));
  attr_cmd->add_option("--reference-file", attr.reference_file, "TSV with a single reference row (overrides --reference)");
  attr_cmd->add_option("--epsilon", attr.epsilon, "LRP stabilizer")->capture_default_str();
  attr_cmd->add_option("--stable-epsilon", attr.stable_epsilon, "Below this |delta x| rules fall back to derivatives")
      ->capture_default_str();
  attr_cmd->callback([&] { action = [&] { return run_attribute(attr, threads); }; });

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "DeepLIFT vs gradient x input motif recovery on labeled sequences");
  cmp_cmd->add_option("--model", cmp.model, "Trained genomics model")->required();
  cmp_cmd->add_option("--data", cmp.data, "FASTA with motif spans")->required();
  cmp_cmd->add_option("--out", cmp.out, "Comparison TSV to write")->required();
  cmp_cmd->add_option("--tracks", cmp.tracks, "Optional per-position score track TSV");
  cmp_cmd->add_flag("--all-positives", cmp.all_positives, "Include misclassified positives");
  cmp_cmd->callback([&] { action = [&] { return run_compare(cmp, threads); }; });

  CheckLrpOptions lrp;
  auto* lrp_cmd = app.add_subcommand("check-lrp", "Compare epsilon-LRP with gradient x input on random ReLU nets");
  lrp_cmd->add_option("--out", lrp.out, "Deviation TSV to write")->required();
  lrp_cmd->add_option("--nets", lrp.spec.nets, "Number of random nets")->capture_default_str();
  lrp_cmd->add_option("--seed", lrp.spec.seed, "Ensemble seed")->capture_default_str();
  lrp_cmd->add_option("--epsilons", lrp.epsilons, "Comma-separated epsilon list")->delimiter(',')->capture_default_str();
  lrp_cmd->add_option("--min-layers", lrp.spec.min_layers, "Fewest affine layers")->capture_default_str();
  lrp_cmd->add_option("--max-layers", lrp.spec.max_layers, "Most affine layers")->capture_default_str();
  lrp_cmd->add_option("--input-width", lrp.spec.input_width, "Input features")->capture_default_str();
  lrp_cmd->callback([&] { action = [&] { return run_check_lrp(lrp, threads); }; });

  NormalizeOptions norm;
  auto* norm_cmd = app.add_subcommand("normalize", "Apply constrained-input and softmax weight normalization");
  norm_cmd->add_option("--model", norm.model, "Model file")->required();
  norm_cmd->add_option("--out", norm.out, "Normalized model to write")->required();
  norm_cmd->add_flag("--skip-softmax", norm.skip_softmax, "Leave softmax logit weights alone");
  norm_cmd->add_flag("--skip-constrained", norm.skip_constrained, "Leave weights on constrained inputs alone");
  norm_cmd->callback([&] { action = [&] { return run_normalize(norm); }; });

  GenomicsOptions gen_bench;
  auto* bench_cmd = app.add_subcommand("genomics", "Generate, train and compare in one reproducible run");
  bench_cmd->add_option("--out-dir", gen_bench.out_dir, "Directory for all artifacts")->required();
  bench_cmd->add_option("--config", gen_bench.config, "JSON training config; explicit flags override it");
  bench_cmd->add_option("--model-seed", gen_bench.spec.cnn.seed, "Weight initialization seed")->capture_default_str();
  bench_cmd->add_flag("--quiet", gen_bench.quiet, "Do not print per-epoch progress");
  add_dataset_flags(bench_cmd, gen_bench.spec.data);
  bench_cmd->get_option("--seed")->description("Dataset seed");
  // Dataset and training both have a seed; the training one is spelled --train-seed here.
  bench_cmd->add_option("--train-seed", gen_bench.spec.train.seed, "Shuffling seed")->capture_default_str();
  bench_cmd->add_option("--epochs", gen_bench.spec.train.epochs, "Training epochs")->capture_default_str();
  bench_cmd->add_option("--batch-size", gen_bench.spec.train.batch_size, "Mini-batch size")->capture_default_str();
  bench_cmd->add_option("--learning-rate", gen_bench.spec.train.learning_rate, "SGD learning rate")
      ->capture_default_str();
  bench_cmd->add_option("--momentum", gen_bench.spec.train.momentum, "SGD momentum")->capture_default_str();
  bench_cmd->callback([&] { action = [&] { return run_genomics(*bench_cmd, gen_bench, threads); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(kUsage, "usage", e.what());
    return kUsage;
  }

  try {
    return action();
  } catch (const deeplift::IoError& e) {
    report_error(kMissingFile, "missing_file", e.what());
    return kMissingFile;
  } catch (const deeplift::FormatError& e) {
    report_error(kInvalidInput, "invalid_input", e.what());
    return kInvalidInput;
  } catch (const deeplift::GraphError& e) {
    report_error(kInvalidInput, "invalid_input", e.what());
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    report_error(kInvalidInput, "invalid_config", e.what());
    return kInvalidInput;
  } catch (const fs::filesystem_error& e) {
    report_error(kMissingFile, "missing_file", e.what());
    return kMissingFile;
  } catch (const std::exception& e) {
    report_error(kRuntime, "runtime", e.what());
    return kRuntime;
  }
}
