#include "htc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace htc {

namespace {

struct Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

double f1_from_counts(long long tp, long long fp, long long fn) {
  long long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<NodeId> intersect(const LabelSet& a, const LabelSet& b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<NodeId> difference(const LabelSet& a, const LabelSet& b) {
  std::vector<NodeId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Members of pred whose full ancestor chain lies inside pred.
LabelSet valid_subset(const EvalPair& pair, const Hierarchy& h) {
  std::vector<NodeId> by_depth(pair.pred.members());
  std::stable_sort(by_depth.begin(), by_depth.end(),
                   [&](NodeId a, NodeId b) { return h.depth(a) < h.depth(b); });
  std::vector<char> ok(static_cast<std::size_t>(h.node_count()), 0);
  std::vector<NodeId> valid;
  for (NodeId y : by_depth) {
    NodeId p = h.parent(y);
    bool keep = (p == kRootId) || (pair.pred.contains(p) && ok[static_cast<std::size_t>(p)]);
    if (keep) {
      ok[static_cast<std::size_t>(y)] = 1;
      valid.push_back(y);
    }
  }
  return LabelSet(std::move(valid));
}

void check_nonempty(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw Error("EmptyEvaluation", "no evaluation pairs");
}

void per_class_counts(std::span<const EvalPair> pairs, const Hierarchy& h, bool constrained,
                      std::vector<Counts>& out) {
  out.assign(static_cast<std::size_t>(h.label_count()), Counts{});
  for (const auto& pair : pairs) {
    Confusion c = constrained ? constrained_confusion(pair, h) : confusion(pair);
    for (NodeId y : c.tp) out[static_cast<std::size_t>(slot(y))].tp++;
    for (NodeId y : c.fp) out[static_cast<std::size_t>(slot(y))].fp++;
    for (NodeId y : c.fn) out[static_cast<std::size_t>(slot(y))].fn++;
  }
}

double macro_over(const std::vector<Counts>& counts, const std::vector<NodeId>& classes,
                  bool skip_absent) {
  double sum = 0;
  long long included = 0;
  for (NodeId y : classes) {
    const Counts& c = counts[static_cast<std::size_t>(slot(y))];
    if (skip_absent && c.tp == 0 && c.fp == 0 && c.fn == 0) continue;
    sum += f1_from_counts(c.tp, c.fp, c.fn);
    ++included;
  }
  return included == 0 ? 0.0 : sum / static_cast<double>(included);
}

std::vector<NodeId> all_classes(const Hierarchy& h) {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(h.label_count()));
  for (NodeId y = 1; y < h.node_count(); ++y) out.push_back(y);
  return out;
}

}  // namespace

Confusion confusion(const EvalPair& pair) {
  Confusion c;
  c.tp = LabelSet(intersect(pair.pred, pair.truth));
  c.fp = LabelSet(difference(pair.pred, pair.truth));
  c.fn = LabelSet(difference(pair.truth, pair.pred));
  return c;
}

Confusion constrained_confusion(const EvalPair& pair, const Hierarchy& h) {
  LabelSet valid = valid_subset(pair, h);
  Confusion c;
  c.tp = LabelSet(intersect(valid, pair.truth));
  c.fp = LabelSet(difference(pair.pred, c.tp));
  c.fn = LabelSet(difference(pair.truth, valid));
  return c;
}

double micro_f1(std::span<const EvalPair> pairs) {
  check_nonempty(pairs);
  long long tp = 0, pred = 0, truth = 0;
  for (const auto& pair : pairs) {
    tp += static_cast<long long>(intersect(pair.pred, pair.truth).size());
    pred += static_cast<long long>(pair.pred.size());
    truth += static_cast<long long>(pair.truth.size());
  }
  long long denom = pred + truth;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<double> per_class_f1(std::span<const EvalPair> pairs, const Hierarchy& h) {
  check_nonempty(pairs);
  std::vector<Counts> counts;
  per_class_counts(pairs, h, /*constrained=*/false, counts);
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = f1_from_counts(counts[i].tp, counts[i].fp, counts[i].fn);
  }
  return out;
}

double macro_f1(std::span<const EvalPair> pairs, const Hierarchy& h, bool skip_absent) {
  check_nonempty(pairs);
  std::vector<Counts> counts;
  per_class_counts(pairs, h, /*constrained=*/false, counts);
  return macro_over(counts, all_classes(h), skip_absent);
}

double samples_f1(std::span<const EvalPair> pairs) {
  check_nonempty(pairs);
  double sum = 0;
  for (const auto& pair : pairs) {
    long long tp = static_cast<long long>(intersect(pair.pred, pair.truth).size());
    long long denom = static_cast<long long>(pair.pred.size() + pair.truth.size());
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(pairs.size());
}

double hamming_loss(std::span<const EvalPair> pairs, const Hierarchy& h) {
  check_nonempty(pairs);
  long long diff = 0;
  for (const auto& pair : pairs) {
    diff += static_cast<long long>(difference(pair.pred, pair.truth).size());
    diff += static_cast<long long>(difference(pair.truth, pair.pred).size());
  }
  long long cells = static_cast<long long>(pairs.size()) * h.label_count();
  return cells == 0 ? 0.0 : static_cast<double>(diff) / static_cast<double>(cells);
}

std::pair<double, double> h_precision_recall(const EvalPair& pair, const Hierarchy& h) {
  if (pair.truth.empty()) throw Error("EmptyTruth", "hierarchical metrics need a non-empty truth set");
  LabelSet aug = augment(h, pair.pred);
  long long inter = static_cast<long long>(intersect(aug, pair.truth).size());
  double hp = aug.empty() ? 1.0
                          : static_cast<double>(inter) / static_cast<double>(aug.size());
  double hr = static_cast<double>(inter) / static_cast<double>(pair.truth.size());
  return {hp, hr};
}

double h_f1_samples(std::span<const EvalPair> pairs, const Hierarchy& h) {
  check_nonempty(pairs);
  double sum = 0;
  for (const auto& pair : pairs) {
    if (pair.truth.empty()) {
      throw Error("EmptyTruth", "hierarchical metrics need a non-empty truth set");
    }
    LabelSet aug = augment(h, pair.pred);
    long long inter = static_cast<long long>(intersect(aug, pair.truth).size());
    long long denom = static_cast<long long>(aug.size() + pair.truth.size());
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(pairs.size());
}

double h_f1_micro(std::span<const EvalPair> pairs, const Hierarchy& h) {
  check_nonempty(pairs);
  long long inter = 0, aug_total = 0, truth_total = 0;
  for (const auto& pair : pairs) {
    if (pair.truth.empty()) {
      throw Error("EmptyTruth", "hierarchical metrics need a non-empty truth set");
    }
    LabelSet aug = augment(h, pair.pred);
    inter += static_cast<long long>(intersect(aug, pair.truth).size());
    aug_total += static_cast<long long>(aug.size());
    truth_total += static_cast<long long>(pair.truth.size());
  }
  long long denom = aug_total + truth_total;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(denom);
}

double info_content(const Hierarchy& h, NodeId y) {
  if (!h.contains(y)) {
    throw Error("UnknownNode", "node id " + std::to_string(y) + " is out of range");
  }
  double total = static_cast<double>(h.leaf_ids().size());
  double under = static_cast<double>(h.leaf_count_under(y));
  return std::log2(total) - std::log2(under);
}

namespace {

/// Recursion over a sorted, deduplicated node list:
/// I({y1..yn}) = I(y1) + I({y2..yn}) - I({lca(y1, yi) : i > 1}).
double info_set_rec(const Hierarchy& h, const std::vector<NodeId>& nodes) {
  if (nodes.empty()) return 0.0;
  if (nodes.size() == 1) return info_content(h, nodes.front());
  NodeId head = nodes.front();
  std::vector<NodeId> rest(nodes.begin() + 1, nodes.end());
  std::vector<NodeId> lcas;
  lcas.reserve(rest.size());
  for (NodeId y : rest) lcas.push_back(lca(h, head, y));
  std::sort(lcas.begin(), lcas.end());
  lcas.erase(std::unique(lcas.begin(), lcas.end()), lcas.end());
  return info_content(h, head) + info_set_rec(h, rest) - info_set_rec(h, lcas);
}

}  // namespace

double info_content_set(const Hierarchy& h, std::vector<NodeId> nodes) {
  for (NodeId y : nodes) {
    if (!h.contains(y)) {
      throw Error("UnknownNode", "node id " + std::to_string(y) + " is out of range");
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return info_set_rec(h, nodes);
}

double ih_f1_samples(std::span<const EvalPair> pairs, const Hierarchy& h) {
  check_nonempty(pairs);
  double sum = 0;
  for (const auto& pair : pairs) {
    if (pair.truth.empty()) {
      throw Error("EmptyTruth", "hierarchical metrics need a non-empty truth set");
    }
    double truth_info = info_content_set(h, pair.truth.members());
    if (truth_info <= 0.0) {
      throw Error("ZeroInformationTruth", "truth set carries no information");
    }
    LabelSet aug = augment(h, pair.pred);
    double aug_info = info_content_set(h, aug.members());
    double inter_info = info_content_set(h, intersect(aug, pair.truth));
    double ihp = aug_info == 0.0 ? 1.0 : inter_info / aug_info;
    double ihr = inter_info / truth_info;
    sum += (ihp + ihr) == 0.0 ? 0.0 : 2.0 * ihp * ihr / (ihp + ihr);
  }
  return sum / static_cast<double>(pairs.size());
}

double c_micro_f1(std::span<const EvalPair> pairs, const Hierarchy& h) {
  check_nonempty(pairs);
  long long tp = 0, fp = 0, fn = 0;
  for (const auto& pair : pairs) {
    Confusion c = constrained_confusion(pair, h);
    tp += static_cast<long long>(c.tp.size());
    fp += static_cast<long long>(c.fp.size());
    fn += static_cast<long long>(c.fn.size());
  }
  return f1_from_counts(tp, fp, fn);
}

double c_macro_f1(std::span<const EvalPair> pairs, const Hierarchy& h, bool skip_absent) {
  check_nonempty(pairs);
  std::vector<Counts> counts;
  per_class_counts(pairs, h, /*constrained=*/true, counts);
  return macro_over(counts, all_classes(h), skip_absent);
}

std::map<int, double> macro_f1_by_depth(std::span<const EvalPair> pairs, const Hierarchy& h,
                                        bool skip_absent) {
  check_nonempty(pairs);
  std::vector<Counts> counts;
  per_class_counts(pairs, h, /*constrained=*/false, counts);
  std::map<int, double> out;
  for (int d = 1; d <= h.max_depth(); ++d) {
    std::vector<NodeId> classes;
    for (NodeId y = 1; y < h.node_count(); ++y) {
      if (h.depth(y) == d) classes.push_back(y);
    }
    out[d] = macro_over(counts, classes, skip_absent);
  }
  return out;
}

std::vector<double> macro_f1_by_frequency(std::span<const EvalPair> pairs, const Hierarchy& h,
                                          const std::vector<long long>& train_counts,
                                          int buckets) {
  check_nonempty(pairs);
  if (buckets < 1) throw Error("EmptyEvaluation", "bucket count must be positive");
  if (train_counts.size() != static_cast<std::size_t>(h.label_count())) {
    throw Error("MisalignedInputs", "train counts must cover every non-root class");
  }
  std::vector<Counts> counts;
  per_class_counts(pairs, h, /*constrained=*/false, counts);

  std::vector<NodeId> ranked = all_classes(h);
  std::sort(ranked.begin(), ranked.end(), [&](NodeId a, NodeId b) {
    long long ca = train_counts[static_cast<std::size_t>(slot(a))];
    long long cb = train_counts[static_cast<std::size_t>(slot(b))];
    return ca != cb ? ca < cb : a < b;
  });

  const std::size_t m = ranked.size();
  std::vector<double> out(static_cast<std::size_t>(buckets), 0.0);
  for (int b = 0; b < buckets; ++b) {
    std::size_t lo = m * static_cast<std::size_t>(b) / static_cast<std::size_t>(buckets);
    std::size_t hi = m * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(buckets);
    std::vector<NodeId> classes(ranked.begin() + static_cast<std::ptrdiff_t>(lo),
                                ranked.begin() + static_cast<std::ptrdiff_t>(hi));
    out[static_cast<std::size_t>(b)] = classes.empty() ? 0.0 : macro_over(counts, classes, false);
  }
  return out;
}

EvalReport evaluate(std::span<const EvalPair> pairs, const Hierarchy& h, bool macro_skip_absent) {
  check_nonempty(pairs);
  EvalReport r;
  r.hamming = hamming_loss(pairs, h);
  r.micro = micro_f1(pairs);
  r.macro = macro_f1(pairs, h, macro_skip_absent);
  r.samples = samples_f1(pairs);
  r.h_micro = h_f1_micro(pairs, h);
  r.h_samples = h_f1_samples(pairs, h);
  r.ih_samples = ih_f1_samples(pairs, h);
  r.c_micro = c_micro_f1(pairs, h);
  r.c_macro = c_macro_f1(pairs, h, macro_skip_absent);
  r.macro_by_depth = macro_f1_by_depth(pairs, h, macro_skip_absent);
  r.per_class = per_class_f1(pairs, h);
  return r;
}

}  // namespace htc
