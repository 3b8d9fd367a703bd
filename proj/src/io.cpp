#include "htc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace htc {

namespace {

using nlohmann::json;

std::string line_loc(std::size_t line) { return "line " + std::to_string(line); }

json parse_line(const std::string& line, std::size_t line_no) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error("MalformedLine", "expected one JSON object per line", line_loc(line_no));
  }
  return j;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("EmptyInput", "cannot open " + path);
  return in;
}

}  // namespace

Dataset read_dataset_jsonl(std::istream& in, const Hierarchy& h,
                           const DatasetReadOptions& opts) {
  Dataset ds;
  ds.dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, line_no);

    if (!j.contains("labels") || !j["labels"].is_array()) {
      throw Error("MalformedLine", "missing \"labels\" array", line_loc(line_no));
    }
    std::vector<NodeId> ids;
    for (const auto& item : j["labels"]) {
      if (!item.is_string()) {
        throw Error("MalformedLine", "label names must be strings", line_loc(line_no));
      }
      auto found = h.find(item.get<std::string>());
      if (!found) {
        throw Error("UnknownNode", "unknown label '" + item.get<std::string>() + "'",
                    line_loc(line_no));
      }
      if (*found == kRootId) {
        throw Error("RootHasNoLabelAncestry", "the root is not a label", line_loc(line_no));
      }
      ids.push_back(*found);
    }
    LabelSet labels(std::move(ids));
    if (!is_coherent(h, labels)) {
      if (opts.auto_augment) {
        labels = augment(h, labels);
      } else {
        throw Error("IncoherentLabels", "label set is not closed under the parent relation",
                    line_loc(line_no));
      }
    }
    if (opts.require_single_path && !is_single_path_leaf(h, labels)) {
      throw Error("NotSinglePathLeaf", "label set is not the ancestor chain of one leaf",
                  line_loc(line_no));
    }

    Sample sample;
    sample.labels = std::move(labels);
    if (j.contains("features")) {
      if (!j["features"].is_array()) {
        throw Error("MalformedLine", "\"features\" must be an array of numbers",
                    line_loc(line_no));
      }
      sample.features.resize(static_cast<Eigen::Index>(j["features"].size()));
      Eigen::Index k = 0;
      for (const auto& item : j["features"]) {
        if (!item.is_number()) {
          throw Error("MalformedLine", "\"features\" must be an array of numbers",
                      line_loc(line_no));
        }
        sample.features[k++] = item.get<double>();
      }
      if (ds.dim < 0) {
        ds.dim = sample.features.size();
      } else if (ds.dim != sample.features.size()) {
        throw Error("DimensionMismatch", "inconsistent feature dimension", line_loc(line_no));
      }
    } else if (opts.require_features) {
      throw Error("MalformedLine", "missing \"features\" array", line_loc(line_no));
    }
    ds.samples.push_back(std::move(sample));
  }
  if (ds.samples.empty()) throw Error("EmptyInput", "dataset has no records");
  if (ds.dim < 0) ds.dim = 0;
  return ds;
}

Dataset read_dataset_file(const std::string& path, const Hierarchy& h,
                          const DatasetReadOptions& opts) {
  auto in = open_or_throw(path);
  return read_dataset_jsonl(in, h, opts);
}

std::vector<MarginalTable> read_scores_jsonl(std::istream& in, const Hierarchy& h) {
  std::vector<MarginalTable> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, line_no);
    if (!j.contains("scores") || !j["scores"].is_array()) {
      throw Error("MalformedLine", "missing \"scores\" array", line_loc(line_no));
    }
    if (j["scores"].size() != static_cast<std::size_t>(h.label_count())) {
      throw Error("DimensionMismatch",
                  "expected " + std::to_string(h.label_count()) + " scores",
                  line_loc(line_no));
    }
    MarginalTable table;
    table.marg.resize(h.label_count());
    Eigen::Index k = 0;
    for (const auto& item : j["scores"]) {
      if (!item.is_number()) {
        throw Error("MalformedLine", "scores must be numbers", line_loc(line_no));
      }
      double v = item.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error("MalformedLine", "scores must lie in [0, 1]", line_loc(line_no));
      }
      table.marg[k++] = v;
    }
    out.push_back(std::move(table));
  }
  if (out.empty()) throw Error("EmptyInput", "scores file has no records");
  return out;
}

std::vector<MarginalTable> read_scores_file(const std::string& path, const Hierarchy& h) {
  auto in = open_or_throw(path);
  return read_scores_jsonl(in, h);
}

void write_scores_jsonl(std::ostream& out, std::span<const MarginalTable> tables) {
  for (const auto& table : tables) {
    out << "{\"scores\":[";
    for (Eigen::Index i = 0; i < table.marg.size(); ++i) {
      if (i > 0) out << ',';
      out << format_exact(table.marg[i]);
    }
    out << "]}\n";
  }
}

LeafDistribution read_leaf_distribution(std::istream& in, const Hierarchy& h) {
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error("MalformedLine", "leaf distribution must be one JSON object");
  }
  LeafDistribution d;
  d.p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.leaf_ids().size()));
  double total = 0;
  for (const auto& [name, value] : j.items()) {
    NodeId y = h.id_of(name);
    if (!h.is_leaf(y)) {
      throw Error("UnknownNode", "'" + name + "' is not a leaf");
    }
    if (!value.is_number()) {
      throw Error("MalformedLine", "leaf probabilities must be numbers");
    }
    double p = value.get<double>();
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error("MalformedLine", "leaf probabilities must be non-negative");
    }
    d.p[h.leaf_index(y)] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error("MalformedLine", "leaf probabilities must sum to 1");
  }
  return d;
}

LeafDistribution read_leaf_distribution_file(const std::string& path, const Hierarchy& h) {
  auto in = open_or_throw(path);
  return read_leaf_distribution(in, h);
}

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string report_to_json(const EvalReport& report, const Hierarchy& h, ReportLayout layout,
                           const double* hf1_auc) {
  std::ostringstream os;
  if (layout == ReportLayout::paper) {
    os << "{\"hamming_permille\":" << format_fixed6(report.hamming * 1000.0)
       << ",\"micro_f1\":" << format_fixed6(report.micro)
       << ",\"macro_f1\":" << format_fixed6(report.macro);
    if (hf1_auc) os << ",\"hf1_auc\":" << format_fixed6(*hf1_auc);
    os << "}";
    return os.str();
  }
  os << "{\"hamming\":" << format_fixed6(report.hamming)
     << ",\"hamming_permille\":" << format_fixed6(report.hamming * 1000.0)
     << ",\"micro_f1\":" << format_fixed6(report.micro)
     << ",\"macro_f1\":" << format_fixed6(report.macro)
     << ",\"samples_f1\":" << format_fixed6(report.samples)
     << ",\"h_f1_micro\":" << format_fixed6(report.h_micro)
     << ",\"h_f1_samples\":" << format_fixed6(report.h_samples)
     << ",\"ih_f1_samples\":" << format_fixed6(report.ih_samples)
     << ",\"c_micro_f1\":" << format_fixed6(report.c_micro)
     << ",\"c_macro_f1\":" << format_fixed6(report.c_macro);
  if (hf1_auc) os << ",\"hf1_auc\":" << format_fixed6(*hf1_auc);
  os << ",\"macro_f1_by_depth\":{";
  bool first = true;
  for (const auto& [depth, value] : report.macro_by_depth) {
    if (!first) os << ',';
    first = false;
    os << "\"" << depth << "\":" << format_fixed6(value);
  }
  os << "},\"per_class_f1\":{";
  for (NodeId y = 1; y < h.node_count(); ++y) {
    if (y > 1) os << ',';
    os << json(h.name(y)).dump() << ":"
       << format_fixed6(report.per_class[static_cast<std::size_t>(slot(y))]);
  }
  os << "}}";
  return os.str();
}

std::string pr_curve_to_csv(const PRCurve& curve) {
  std::ostringstream os;
  os << "threshold,hP,hR\n";
  for (const auto& pt : curve.points) {
    os << format_exact(pt.threshold) << ',' << format_exact(pt.h_precision) << ','
       << format_exact(pt.h_recall) << '\n';
  }
  return os.str();
}

}  // namespace htc
