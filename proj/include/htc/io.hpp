#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "htc/inference.hpp"
#include "htc/metrics.hpp"
#include "htc/trainer.hpp"

namespace htc {

struct DatasetReadOptions {
  bool require_features = false;
  bool require_single_path = false;
  bool auto_augment = false;  // close incoherent sets instead of rejecting
};

/// Reads a JSON-lines dataset: each line an object with "labels" (list of label
/// names, required) and "features" (list of reals, optional unless
/// require_features).  Label names must resolve in the hierarchy; incoherent
/// sets are rejected unless auto_augment closes them.  Errors carry the
/// 1-based line number.
Dataset read_dataset_jsonl(std::istream& in, const Hierarchy& h,
                           const DatasetReadOptions& opts);
Dataset read_dataset_file(const std::string& path, const Hierarchy& h,
                          const DatasetReadOptions& opts);

/// Reads JSON-lines score records {"scores": [...]}: one marginal per
/// non-root node in id order, each within [0, 1].
std::vector<MarginalTable> read_scores_jsonl(std::istream& in, const Hierarchy& h);
std::vector<MarginalTable> read_scores_file(const std::string& path, const Hierarchy& h);

/// Writes score records with full double round-trip precision.
void write_scores_jsonl(std::ostream& out, std::span<const MarginalTable> tables);

/// Reads a leaf distribution: one JSON object mapping leaf names to
/// probabilities.  Missing leaves get 0; entries must be non-negative and sum
/// to 1 within 1e-9.
LeafDistribution read_leaf_distribution(std::istream& in, const Hierarchy& h);
LeafDistribution read_leaf_distribution_file(const std::string& path, const Hierarchy& h);

/// Fixed-layout report JSON with 6-decimal fractions; key order and spacing
/// are stable so identical inputs produce identical bytes.  The paper layout
/// restricts the report to Hamming (in permille), micro/macro F1, and the
/// hF1 AUC when present.
enum class ReportLayout { all, paper };
std::string report_to_json(const EvalReport& report, const Hierarchy& h, ReportLayout layout,
                           const double* hf1_auc = nullptr);

/// CSV with a `threshold,hP,hR` header, one row per curve point.
std::string pr_curve_to_csv(const PRCurve& curve);

/// Formats a double with 6 decimal places (reports) or shortest round-trip
/// form (scores).
std::string format_fixed6(double v);
std::string format_exact(double v);

}  // namespace htc
