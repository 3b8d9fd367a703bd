#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "htc/io.hpp"

namespace {

using htc::Error;
using htc::Hierarchy;
using htc::LabelSet;
using htc::NodeId;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("EmptyInput", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Hierarchy load_taxonomy(const std::string& path) { return htc::parse_taxonomy(slurp(path)); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("EmptyInput", "cannot open " + path + " for writing");
  out << content;
}

htc::LossKind parse_loss(const std::string& name) {
  static const std::map<std::string, htc::LossKind> kinds = {
      {"bce", htc::LossKind::bce},
      {"champ", htc::LossKind::champ},
      {"leaf_softmax", htc::LossKind::leaf_softmax},
      {"cond_softmax", htc::LossKind::cond_softmax},
      {"cond_softmax_la", htc::LossKind::cond_softmax_la},
      {"cond_sigmoid", htc::LossKind::cond_sigmoid},
  };
  auto it = kinds.find(name);
  if (it == kinds.end()) {
    throw Error("IncompatibleLossForDataset", "unknown loss '" + name + "'");
  }
  return it->second;
}

/// Predictions from a scores file under the chosen rule.
std::vector<htc::EvalPair> score_predictions(const Hierarchy& h,
                                             const std::vector<htc::MarginalTable>& scores,
                                             const htc::Dataset& truth, const std::string& rule,
                                             double tau) {
  if (scores.size() != truth.samples.size()) {
    throw Error("MisalignedInputs", "scores and truth differ in record count");
  }
  std::vector<htc::EvalPair> pairs;
  pairs.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    LabelSet pred;
    if (rule == "topdown") {
      pred = htc::topdown_predict(htc::conditionals_from_marginals(h, scores[i]), h);
    } else {
      pred = htc::threshold_predict(scores[i], tau);
    }
    pairs.push_back({truth.samples[i].labels, pred});
  }
  return pairs;
}

int run_validate(const std::string& taxonomy_path, const std::string& data_path,
                 bool require_single_path, bool auto_augment) {
  Hierarchy h = load_taxonomy(taxonomy_path);
  htc::DatasetReadOptions opts;
  opts.require_single_path = require_single_path;
  opts.auto_augment = auto_augment;
  htc::Dataset ds = htc::read_dataset_file(data_path, h, opts);

  std::vector<long long> per_level(static_cast<std::size_t>(h.max_depth()), 0);
  for (NodeId y = 1; y < h.node_count(); ++y) {
    per_level[static_cast<std::size_t>(h.depth(y) - 1)]++;
  }
  std::vector<long long> label_count(static_cast<std::size_t>(h.label_count()), 0);
  for (const auto& s : ds.samples) {
    for (NodeId y : s.labels) label_count[static_cast<std::size_t>(htc::slot(y))]++;
  }
  long long under10 = 0, mid = 0, over50 = 0;
  for (long long c : label_count) {
    if (c < 10) {
      ++under10;
    } else if (c < 50) {
      ++mid;
    } else {
      ++over50;
    }
  }

  std::ostringstream os;
  os << "{\"node_count\":" << h.node_count() << ",\"leaf_count\":" << h.leaf_ids().size()
     << ",\"max_depth\":" << h.max_depth() << ",\"nodes_per_level\":[";
  for (std::size_t i = 0; i < per_level.size(); ++i) {
    if (i > 0) os << ',';
    os << per_level[i];
  }
  os << "],\"samples\":" << ds.samples.size() << ",\"label_histogram\":{\"<10\":" << under10
     << ",\"10-49\":" << mid << ",\">=50\":" << over50 << "}}";
  std::cout << os.str() << "\n";
  return 0;
}

int run_evaluate(const std::string& taxonomy_path, const std::string& truth_path,
                 const std::string& scores_path, double tau, const std::string& rule,
                 const std::string& layout, bool auto_augment, bool macro_skip_absent) {
  Hierarchy h = load_taxonomy(taxonomy_path);
  htc::DatasetReadOptions opts;
  opts.auto_augment = auto_augment;
  htc::Dataset truth = htc::read_dataset_file(truth_path, h, opts);
  std::vector<htc::MarginalTable> scores = htc::read_scores_file(scores_path, h);
  std::vector<htc::EvalPair> pairs = score_predictions(h, scores, truth, rule, tau);

  std::vector<LabelSet> truths;
  truths.reserve(truth.samples.size());
  for (const auto& s : truth.samples) truths.push_back(s.labels);
  htc::PRCurve curve = htc::hf1_pr_curve(h, scores, truths);

  htc::EvalReport report = htc::evaluate(pairs, h, macro_skip_absent);
  htc::ReportLayout rl = layout == "paper" ? htc::ReportLayout::paper : htc::ReportLayout::all;
  std::cout << htc::report_to_json(report, h, rl, &curve.auc) << "\n";
  return 0;
}

int run_curve(const std::string& taxonomy_path, const std::string& truth_path,
              const std::string& scores_path, const std::string& out_path,
              const std::string& auc_mode, bool auto_augment) {
  Hierarchy h = load_taxonomy(taxonomy_path);
  htc::DatasetReadOptions opts;
  opts.auto_augment = auto_augment;
  htc::Dataset truth = htc::read_dataset_file(truth_path, h, opts);
  std::vector<htc::MarginalTable> scores = htc::read_scores_file(scores_path, h);
  if (scores.size() != truth.samples.size()) {
    throw Error("MisalignedInputs", "scores and truth differ in record count");
  }
  std::vector<LabelSet> truths;
  truths.reserve(truth.samples.size());
  for (const auto& s : truth.samples) truths.push_back(s.labels);
  htc::AucMode mode = auc_mode == "step" ? htc::AucMode::step : htc::AucMode::trapezoid;
  htc::PRCurve curve = htc::hf1_pr_curve(h, scores, truths, mode);
  write_file(out_path, htc::pr_curve_to_csv(curve));
  std::cout << "{\"auc\":" << htc::format_fixed6(curve.auc)
            << ",\"points\":" << curve.points.size() << "}\n";
  return 0;
}

int run_expected(const std::string& taxonomy_path, const std::string& leafdist_path,
                 const std::string& candidate, bool search) {
  Hierarchy h = load_taxonomy(taxonomy_path);
  htc::LeafDistribution dist = htc::read_leaf_distribution_file(leafdist_path, h);
  if (search) {
    auto [best, value] = htc::best_prefix_prediction(h, dist);
    // Chains print root-side first.
    std::vector<NodeId> chain(best.members());
    std::sort(chain.begin(), chain.end(),
              [&](NodeId a, NodeId b) { return h.depth(a) < h.depth(b); });
    std::ostringstream os;
    os << "{\"best_prefix\":[";
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (i > 0) os << ',';
      os << nlohmann::json(h.name(chain[i])).dump();
    }
    os << "],\"expected_hf1\":" << htc::format_fixed6(value) << "}";
    std::cout << os.str() << "\n";
    return 0;
  }
  std::vector<NodeId> ids;
  std::stringstream ss(candidate);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) ids.push_back(h.id_of(name));
  }
  double value = htc::expected_hf1(h, dist, LabelSet(std::move(ids)));
  std::cout << "{\"expected_hf1\":" << htc::format_fixed6(value) << "}\n";
  return 0;
}

int run_train(const std::string& taxonomy_path, const std::string& data_path,
              const std::string& loss_name, double lr, int epochs, int batch_size,
              std::uint64_t seed, double tau_adjust, double lambda, bool auto_augment,
              const std::string& out_path) {
  Hierarchy h = load_taxonomy(taxonomy_path);
  htc::DatasetReadOptions opts;
  opts.require_features = true;
  opts.auto_augment = auto_augment;
  htc::Dataset ds = htc::read_dataset_file(data_path, h, opts);

  htc::TrainConfig cfg;
  cfg.loss = parse_loss(loss_name);
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.seed = seed;
  cfg.tau_adjust = tau_adjust;
  cfg.lambda_champ = lambda;

  htc::TrainResult result = htc::train(ds, h, cfg);
  htc::save_model(result.model, h, out_path);
  double final_loss = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back();
  std::cout << "{\"epochs\":" << result.epoch_loss.size()
            << ",\"final_epoch_loss\":" << htc::format_exact(final_loss) << "}\n";
  return 0;
}

int run_infer(const std::string& model_path, const std::string& taxonomy_path,
              const std::string& data_path, const std::string& out_path) {
  Hierarchy h = load_taxonomy(taxonomy_path);
  htc::LoadedModel loaded = htc::load_model(model_path);
  if (loaded.node_names.size() != static_cast<std::size_t>(h.node_count())) {
    throw Error("MisalignedInputs", "model was trained on a different taxonomy");
  }
  for (NodeId y = 0; y < h.node_count(); ++y) {
    if (loaded.node_names[static_cast<std::size_t>(y)] != h.name(y)) {
      throw Error("MisalignedInputs", "model node names do not match the taxonomy");
    }
  }
  htc::DatasetReadOptions opts;
  opts.require_features = true;
  htc::Dataset ds = htc::read_dataset_file(data_path, h, opts);
  if (ds.dim != loaded.model.linear.weight.cols()) {
    throw Error("DimensionMismatch", "feature dimension does not match the model");
  }
  std::vector<htc::MarginalTable> tables;
  tables.reserve(ds.samples.size());
  for (const auto& sample : ds.samples) {
    tables.push_back(htc::model_marginals(loaded.model, h, sample.features));
  }
  std::ostringstream os;
  htc::write_scores_jsonl(os, tables);
  write_file(out_path, os.str());
  std::cout << "{\"records\":" << tables.size() << "}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical multi-label classification toolkit"};
  app.require_subcommand(1);

  std::string taxonomy, data, truth, scores, out, model, leafdist, candidate;
  std::string rule = "threshold", layout = "all", loss_name = "cond_softmax";
  std::string auc_mode = "trapezoid";
  double tau = 0.5, lr = 0.1, tau_adjust = 1.0, lambda = 1.0;
  int epochs = 200, batch_size = 32;
  std::uint64_t seed = 0;
  bool require_single_path = false, auto_augment = false, macro_skip_absent = false;
  bool search = false;

  auto* validate = app.add_subcommand("validate", "check a taxonomy and dataset");
  validate->add_option("--taxonomy", taxonomy)->required();
  validate->add_option("--data", data)->required();
  validate->add_flag("--require-single-path", require_single_path);
  validate->add_flag("--auto-augment", auto_augment);

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against truth");
  evaluate->add_option("--taxonomy", taxonomy)->required();
  evaluate->add_option("--truth", truth)->required();
  evaluate->add_option("--scores", scores)->required();
  evaluate->add_option("--tau", tau);
  evaluate->add_option("--rule", rule)->check(CLI::IsMember({"threshold", "topdown"}));
  evaluate->add_option("--report", layout)->check(CLI::IsMember({"all", "paper"}));
  evaluate->add_flag("--auto-augment", auto_augment);
  evaluate->add_flag("--macro-skip-absent", macro_skip_absent);

  auto* curve = app.add_subcommand("curve", "hierarchical precision/recall sweep");
  curve->add_option("--taxonomy", taxonomy)->required();
  curve->add_option("--truth", truth)->required();
  curve->add_option("--scores", scores)->required();
  curve->add_option("--out", out)->required();
  curve->add_option("--auc-mode", auc_mode)->check(CLI::IsMember({"trapezoid", "step"}));
  curve->add_flag("--auto-augment", auto_augment);

  auto* expected = app.add_subcommand("expected", "expected hierarchical F1 of a candidate");
  expected->add_option("--taxonomy", taxonomy)->required();
  expected->add_option("--leafdist", leafdist)->required();
  expected->add_option("--candidate", candidate);
  expected->add_flag("--search", search);

  auto* train = app.add_subcommand("train", "fit the linear score model");
  train->add_option("--taxonomy", taxonomy)->required();
  train->add_option("--data", data)->required();
  train->add_option("--loss", loss_name);
  train->add_option("--lr", lr);
  train->add_option("--epochs", epochs);
  train->add_option("--batch-size", batch_size);
  train->add_option("--seed", seed);
  train->add_option("--tau-adjust", tau_adjust);
  train->add_option("--lambda", lambda);
  train->add_flag("--auto-augment", auto_augment);
  train->add_option("--out", out)->required();

  auto* infer = app.add_subcommand("infer", "write model marginals for a dataset");
  infer->add_option("--model", model)->required();
  infer->add_option("--taxonomy", taxonomy)->required();
  infer->add_option("--data", data)->required();
  infer->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      return run_validate(taxonomy, data, require_single_path, auto_augment);
    }
    if (evaluate->parsed()) {
      return run_evaluate(taxonomy, truth, scores, tau, rule, layout, auto_augment,
                          macro_skip_absent);
    }
    if (curve->parsed()) {
      return run_curve(taxonomy, truth, scores, out, auc_mode, auto_augment);
    }
    if (expected->parsed()) {
      if (search && !candidate.empty()) {
        throw Error("EmptyInput", "use either --candidate or --search, not both");
      }
      if (!search && candidate.empty()) {
        throw Error("EmptyInput", "provide --candidate or --search");
      }
      return run_expected(taxonomy, leafdist, candidate, search);
    }
    if (train->parsed()) {
      return run_train(taxonomy, data, loss_name, lr, epochs, batch_size, seed, tau_adjust,
                       lambda, auto_augment, out);
    }
    if (infer->parsed()) {
      return run_infer(model, taxonomy, data, out);
    }
  } catch (const Error& e) {
    nlohmann::json err{{"code", e.code()}, {"message", e.what()}, {"location", e.location()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err{{"code", "InternalError"}, {"message", e.what()}, {"location", ""}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
