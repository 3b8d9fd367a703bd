#include "htc/inference.hpp"

#include <algorithm>
#include <cmath>

namespace htc {

namespace {

void check_leaf_dist(const Hierarchy& h, const LeafDistribution& d) {
  if (d.p.size() != static_cast<Eigen::Index>(h.leaf_ids().size())) {
    throw Error("DimensionMismatch", "leaf distribution does not match the hierarchy");
  }
}

/// hF1 between a coherent candidate and the ancestor chain of a leaf,
/// computed from integer counts.
double chain_hf1(const Hierarchy& h, NodeId leaf, const LabelSet& candidate) {
  long long inter = 0;
  for (NodeId z = leaf; z != kRootId; z = h.parent(z)) {
    if (candidate.contains(z)) ++inter;
  }
  long long denom = static_cast<long long>(candidate.size()) + h.depth(leaf);
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(denom);
}

double expected_hf1_unchecked(const Hierarchy& h, const LeafDistribution& d,
                              const LabelSet& candidate) {
  const auto& leaves = h.leaf_ids();
  double total = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    total += d.p[static_cast<Eigen::Index>(i)] * chain_hf1(h, leaves[i], candidate);
  }
  return total;
}

}  // namespace

LabelSet threshold_predict(const MarginalTable& m, double tau) {
  std::vector<NodeId> members;
  for (Eigen::Index i = 0; i < m.marg.size(); ++i) {
    if (m.marg[i] > tau) members.push_back(static_cast<NodeId>(i) + 1);
  }
  return LabelSet(std::move(members));
}

LabelSet topdown_predict(const CondTable& c, const Hierarchy& h) {
  if (c.cond.size() != h.label_count()) {
    throw Error("DimensionMismatch", "conditional table does not match the hierarchy");
  }
  std::vector<NodeId> path;
  NodeId cur = kRootId;
  while (!h.children(cur).empty()) {
    NodeId best = -1;
    double best_val = 0;
    for (NodeId ch : h.children(cur)) {
      double v = c.cond[slot(ch)];
      if (best < 0 || v > best_val || (v == best_val && ch < best)) {
        best = ch;
        best_val = v;
      }
    }
    path.push_back(best);
    cur = best;
  }
  return LabelSet(std::move(path));
}

double expected_hf1(const Hierarchy& h, const LeafDistribution& d, const LabelSet& candidate) {
  check_leaf_dist(h, d);
  if (candidate.empty() || !is_coherent(h, candidate)) {
    throw Error("IncoherentCandidate", "candidate must be a non-empty coherent label set");
  }
  return expected_hf1_unchecked(h, d, candidate);
}

std::pair<LabelSet, double> best_prefix_prediction(const Hierarchy& h,
                                                   const LeafDistribution& d) {
  check_leaf_dist(h, d);
  NodeId best = -1;
  double best_val = 0;
  for (NodeId y = 1; y < h.node_count(); ++y) {
    double val = expected_hf1_unchecked(h, d, path_set(h, y));
    // Ids ascend within the scan, so on an exact tie only a strictly deeper
    // candidate replaces the incumbent.
    if (best < 0 || val > best_val || (val == best_val && h.depth(y) > h.depth(best))) {
      best = y;
      best_val = val;
    }
  }
  return {path_set(h, best), best_val};
}

PRCurve hf1_pr_curve(const Hierarchy& h, std::span<const MarginalTable> marginals,
                     std::span<const LabelSet> truths, AucMode mode) {
  if (marginals.size() != truths.size()) {
    throw Error("MisalignedInputs", "marginal tables and truth sets differ in count");
  }
  if (marginals.empty()) throw Error("EmptyEvaluation", "no samples to sweep");
  const std::size_t n_samples = marginals.size();
  const int m = h.label_count();
  for (const auto& t : truths) {
    if (t.empty()) throw Error("EmptyTruth", "hierarchical metrics need a non-empty truth set");
  }
  for (const auto& mt : marginals) {
    if (mt.marg.size() != m) {
      throw Error("DimensionMismatch", "marginal table does not match the hierarchy");
    }
  }

  // Descending grid of distinct marginal values, preceded by a sentinel that
  // lies strictly above the maximum so the first point is the empty
  // prediction.
  std::vector<double> values;
  values.reserve(n_samples * static_cast<std::size_t>(m));
  for (const auto& mt : marginals) {
    for (Eigen::Index i = 0; i < mt.marg.size(); ++i) values.push_back(mt.marg[i]);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const double sentinel = (values.empty() ? 1.0 : values.front()) + 1.0;

  // Entries sorted by value descending, sample-major within equal values, so
  // the sweep can add nodes incrementally as the threshold drops past them.
  struct Entry {
    double value;
    int sample;
    NodeId node;
  };
  std::vector<Entry> entries;
  entries.reserve(values.capacity());
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (NodeId y = 1; y <= m; ++y) {
      entries.push_back({marginals[i].marg[slot(y)], static_cast<int>(i), y});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.sample != b.sample) return a.sample < b.sample;
    return a.node < b.node;
  });

  // Per-sample augmented prediction state, maintained with integer counters.
  std::vector<std::vector<char>> in_aug(n_samples,
                                        std::vector<char>(static_cast<std::size_t>(m + 1), 0));
  std::vector<long long> aug_size(n_samples, 0);
  std::vector<long long> inter_size(n_samples, 0);

  auto add_node = [&](int sample, NodeId y) {
    auto& mark = in_aug[static_cast<std::size_t>(sample)];
    for (NodeId cur = y; cur != kRootId && !mark[static_cast<std::size_t>(cur)];
         cur = h.parent(cur)) {
      mark[static_cast<std::size_t>(cur)] = 1;
      aug_size[static_cast<std::size_t>(sample)]++;
      if (truths[static_cast<std::size_t>(sample)].contains(cur)) {
        inter_size[static_cast<std::size_t>(sample)]++;
      }
    }
  };

  auto emit = [&](double tau, PRCurve& curve) {
    double hp_sum = 0, hr_sum = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      long long aug = aug_size[i];
      long long inter = inter_size[i];
      hp_sum += aug == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(aug);
      hr_sum += static_cast<double>(inter) / static_cast<double>(truths[i].size());
    }
    curve.points.push_back(
        {tau, hp_sum / static_cast<double>(n_samples), hr_sum / static_cast<double>(n_samples)});
  };

  PRCurve curve;
  curve.points.reserve(values.size() + 1);
  emit(sentinel, curve);
  std::size_t next = 0;
  for (double v : values) {
    // Threshold comparison is strict, so the point at v reflects only the
    // entries processed for values above v.
    emit(v, curve);
    while (next < entries.size() && entries[next].value == v) {
      add_node(entries[next].sample, entries[next].node);
      ++next;
    }
  }

  double auc = 0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    double dr = curve.points[k].h_recall - curve.points[k - 1].h_recall;
    if (mode == AucMode::trapezoid) {
      auc += dr * (curve.points[k].h_precision + curve.points[k - 1].h_precision) / 2.0;
    } else {
      auc += dr * curve.points[k].h_precision;
    }
  }
  curve.auc = std::clamp(auc, 0.0, 1.0);
  return curve;
}

NodeId balanced_leaf_rule(const Hierarchy& h, const Logits& s, const Prior& prior) {
  if (s.size() != h.label_count() || prior.nu.size() != h.label_count()) {
    throw Error("DimensionMismatch", "scores or prior do not match the hierarchy");
  }
  for (Eigen::Index i = 0; i < prior.nu.size(); ++i) {
    if (!(prior.nu[i] > 0.0) || !std::isfinite(prior.nu[i])) {
      throw Error("NonFinitePrior", "prior entries must be positive and finite");
    }
  }
  NodeId best = -1;
  double best_score = 0;
  for (NodeId leaf : h.leaf_ids()) {
    double score = 0;
    for (NodeId z = leaf; z != kRootId; z = h.parent(z)) {
      score += s[slot(z)] - std::log(prior.nu[slot(z)]);
    }
    if (best < 0 || score > best_score || (score == best_score && leaf < best)) {
      best = leaf;
      best_score = score;
    }
  }
  return best;
}

}  // namespace htc
