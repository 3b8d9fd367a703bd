#pragma once

#include <span>
#include <utility>
#include <vector>

#include "htc/losses.hpp"

namespace htc {

/// A probability distribution over leaves, indexed by leaf position (see
/// Hierarchy::leaf_index).
struct LeafDistribution {
  Eigen::VectorXd p;
};

struct PRPoint {
  double threshold = 0;
  double h_precision = 0;
  double h_recall = 0;
};

/// Hierarchical precision/recall curve over a descending threshold grid.
/// Thresholds are strictly decreasing; recall is non-decreasing along the
/// curve.
struct PRCurve {
  std::vector<PRPoint> points;
  double auc = 0;
};

enum class AucMode { trapezoid, step };

/// All nodes whose marginal strictly exceeds tau.  No ancestor completion is
/// performed; the result may be incoherent.
LabelSet threshold_predict(const MarginalTable& m, double tau);

/// Greedy root-to-leaf descent following the largest conditional at each
/// step; ties break toward the smaller node id.  Always returns a full
/// root-to-leaf chain, which is coherent by construction.
LabelSet topdown_predict(const CondTable& c, const Hierarchy& h);

/// Expected hierarchical F1 of a fixed candidate set under a distribution
/// over true leaves: sum over leaves of p(leaf) * hF1(chain(leaf), candidate).
/// The candidate must be coherent and non-empty (IncoherentCandidate).
double expected_hf1(const Hierarchy& h, const LeafDistribution& d, const LabelSet& candidate);

/// Exhaustive search over all ancestor-chain candidates (one per non-root
/// node) for the one maximizing expected hierarchical F1.  Ties prefer the
/// deeper candidate, then the smaller node id.  Returns the winning chain and
/// its expected score.
std::pair<LabelSet, double> best_prefix_prediction(const Hierarchy& h,
                                                   const LeafDistribution& d);

/// Sweeps every distinct marginal value as a threshold (descending), plus a
/// sentinel above the maximum where the prediction is empty.  At each
/// threshold, hierarchical precision and recall are averaged over samples.
/// The AUC integrates precision over recall: trapezoidal by default, or a
/// right-continuous step sum.  The result is clamped to [0, 1].
PRCurve hf1_pr_curve(const Hierarchy& h, std::span<const MarginalTable> marginals,
                     std::span<const LabelSet> truths, AucMode mode = AucMode::trapezoid);

/// Prior-corrected leaf decision: argmax over leaves of the sum of
/// (score - log nu) along the ancestor chain, which ranks leaves by marginal
/// likelihood with the label prior divided out.  Ties break toward the
/// smaller leaf id.
NodeId balanced_leaf_rule(const Hierarchy& h, const Logits& s, const Prior& prior);

}  // namespace htc
