#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "htc/hierarchy.hpp"

namespace htc {

/// One evaluation instance: gold labels and predicted labels.
struct EvalPair {
  LabelSet truth;
  LabelSet pred;
};

/// Per-instance confusion sets over labels.
struct Confusion {
  LabelSet tp;
  LabelSet fp;
  LabelSet fn;
};

Confusion confusion(const EvalPair& pair);

/// Path-constrained confusion: a predicted node counts as a true positive
/// only if its entire ancestor chain is predicted as well.  Predictions with
/// a broken chain are false positives; truths not validly predicted are false
/// negatives.  For coherent predictions this reduces to plain confusion.
Confusion constrained_confusion(const EvalPair& pair, const Hierarchy& h);

/// Pooled-count F1: 2*TP / (|pred| + |truth|) summed over all pairs.
double micro_f1(std::span<const EvalPair> pairs);

/// Unweighted mean of per-class F1 over all non-root classes.  Classes absent
/// from both truth and prediction contribute 0 unless skip_absent is set, in
/// which case they are excluded from the mean.
double macro_f1(std::span<const EvalPair> pairs, const Hierarchy& h, bool skip_absent = false);

/// Mean over pairs of the per-instance F1 (0 when both sets are empty).
double samples_f1(std::span<const EvalPair> pairs);

/// Per-class F1 for every non-root class, indexed by slot(id).
std::vector<double> per_class_f1(std::span<const EvalPair> pairs, const Hierarchy& h);

/// Fraction of label decisions that differ: sum of symmetric-difference sizes
/// over N * label_count.
double hamming_loss(std::span<const EvalPair> pairs, const Hierarchy& h);

/// Hierarchical precision and recall of one pair: predictions are
/// ancestor-augmented, then compared against the truth set.  An empty
/// augmented prediction has precision 1 by convention.  Throws EmptyTruth
/// when the truth set is empty.
std::pair<double, double> h_precision_recall(const EvalPair& pair, const Hierarchy& h);

/// Mean over pairs of per-instance hierarchical F1.
double h_f1_samples(std::span<const EvalPair> pairs, const Hierarchy& h);

/// Pooled-count hierarchical F1.
double h_f1_micro(std::span<const EvalPair> pairs, const Hierarchy& h);

/// Information content of one node in bits: log2 of the fraction of leaves
/// ruled out by conditioning on the node.  I(root) == 0; deeper nodes carry
/// at least as much information as their parents.
double info_content(const Hierarchy& h, NodeId y);

/// Information content of a node set, via inclusion-exclusion over lowest
/// common ancestors.  The input is canonicalized to ascending node-id order,
/// so the result does not depend on argument order.
double info_content_set(const Hierarchy& h, std::vector<NodeId> nodes);

/// Information-weighted hierarchical F1, averaged over pairs.  Throws
/// ZeroInformationTruth when a truth set carries no information.
double ih_f1_samples(std::span<const EvalPair> pairs, const Hierarchy& h);

/// Micro/macro F1 over path-constrained confusion counts.
double c_micro_f1(std::span<const EvalPair> pairs, const Hierarchy& h);
double c_macro_f1(std::span<const EvalPair> pairs, const Hierarchy& h, bool skip_absent = false);

/// Macro F1 restricted to classes at each depth, keyed by depth 1..max_depth.
std::map<int, double> macro_f1_by_depth(std::span<const EvalPair> pairs, const Hierarchy& h,
                                        bool skip_absent = false);

/// Macro F1 over classes bucketed by training frequency.  Classes are ranked
/// by (count, node id) ascending and split into `buckets` contiguous groups
/// of near-equal size; the result holds one macro F1 per bucket, rarest
/// first.  Empty buckets (more buckets than classes) yield 0.
std::vector<double> macro_f1_by_frequency(std::span<const EvalPair> pairs, const Hierarchy& h,
                                          const std::vector<long long>& train_counts,
                                          int buckets);

/// Full metric report computed in one pass over the evaluation pairs.
struct EvalReport {
  double hamming = 0;
  double micro = 0;
  double macro = 0;
  double samples = 0;
  double h_micro = 0;
  double h_samples = 0;
  double ih_samples = 0;
  double c_micro = 0;
  double c_macro = 0;
  std::map<int, double> macro_by_depth;
  std::vector<double> per_class;  // indexed by slot(id)
};

/// Computes every report field.  Throws EmptyEvaluation when pairs is empty
/// and EmptyTruth when any truth set is empty.
EvalReport evaluate(std::span<const EvalPair> pairs, const Hierarchy& h,
                    bool macro_skip_absent = false);

}  // namespace htc
