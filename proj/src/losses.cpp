#include "htc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace htc {

namespace {

void check_dim(const Hierarchy& h, const Logits& s) {
  if (s.size() != h.label_count()) {
    throw Error("DimensionMismatch",
                "expected " + std::to_string(h.label_count()) + " scores, got " +
                    std::to_string(s.size()));
  }
}

/// -log(sigmoid(x)) without overflow: softplus(-x).
double nll_pos(double x) {
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

/// -log(1 - sigmoid(x)) = softplus(x).
double nll_neg(double x) { return nll_pos(-x); }

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Applies the log-prior shift when a prior is present.
Eigen::VectorXd adjusted_scores(const Hierarchy& h, const Logits& s, const Prior* prior) {
  check_dim(h, s);
  if (!prior) return s;
  if (prior->nu.size() != h.label_count()) {
    throw Error("DimensionMismatch", "prior size does not match the hierarchy");
  }
  for (Eigen::Index i = 0; i < prior->nu.size(); ++i) {
    if (!(prior->nu[i] > 0.0) || !std::isfinite(prior->nu[i])) {
      throw Error("NonFinitePrior", "prior entries must be positive and finite");
    }
  }
  return s + prior->tau * prior->nu.array().log().matrix();
}

/// Softmax of one sibling group into cond, slot-indexed.
void group_softmax(const Hierarchy& h, const Eigen::VectorXd& a, const std::vector<NodeId>& group,
                   Eigen::VectorXd& cond) {
  double mx = -std::numeric_limits<double>::infinity();
  for (NodeId c : group) mx = std::max(mx, a[slot(c)]);
  double denom = 0;
  for (NodeId c : group) denom += std::exp(a[slot(c)] - mx);
  for (NodeId c : group) cond[slot(c)] = std::exp(a[slot(c)] - mx) / denom;
}

double group_lse(const Eigen::VectorXd& a, const std::vector<NodeId>& group) {
  double mx = -std::numeric_limits<double>::infinity();
  for (NodeId c : group) mx = std::max(mx, a[slot(c)]);
  double sum = 0;
  for (NodeId c : group) sum += std::exp(a[slot(c)] - mx);
  return mx + std::log(sum);
}

NodeId require_single_path(const Hierarchy& h, const LabelSet& labels) {
  auto leaf = single_path_leaf(h, labels);
  if (!leaf) {
    throw Error("NotSinglePathLeaf", "label set is not the ancestor chain of one leaf");
  }
  return *leaf;
}

}  // namespace

std::pair<CondTable, MarginalTable> cond_softmax_forward(const Hierarchy& h, const Logits& s,
                                                         const Prior* prior) {
  Eigen::VectorXd a = adjusted_scores(h, s, prior);
  Eigen::VectorXd cond = Eigen::VectorXd::Zero(h.label_count());
  for (NodeId p = 0; p < h.node_count(); ++p) {
    const auto& group = h.children(p);
    if (!group.empty()) group_softmax(h, a, group, cond);
  }
  Eigen::VectorXd marg(h.label_count());
  for (NodeId y : h.topo_order()) {
    if (y == kRootId) continue;
    NodeId p = h.parent(y);
    marg[slot(y)] = p == kRootId ? cond[slot(y)] : cond[slot(y)] * marg[slot(p)];
  }
  return {CondTable{std::move(cond)}, MarginalTable{std::move(marg)}};
}

LossOutput cond_softmax_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels,
                             const Prior* prior) {
  NodeId leaf = require_single_path(h, labels);
  Eigen::VectorXd a = adjusted_scores(h, s, prior);

  LossOutput out;
  out.grad = Eigen::VectorXd::Zero(h.label_count());
  // Each node on the path owns one sibling-group softmax; groups along a
  // single path never overlap, so the updates below touch disjoint slots.
  for (NodeId z = leaf; z != kRootId; z = h.parent(z)) {
    const auto& group = h.children(h.parent(z));
    double lse = group_lse(a, group);
    out.value += lse - a[slot(z)];
    double mx = -std::numeric_limits<double>::infinity();
    for (NodeId c : group) mx = std::max(mx, a[slot(c)]);
    double denom = 0;
    for (NodeId c : group) denom += std::exp(a[slot(c)] - mx);
    for (NodeId c : group) out.grad[slot(c)] = std::exp(a[slot(c)] - mx) / denom;
    out.grad[slot(z)] -= 1.0;
  }
  return out;
}

LossOutput cond_sigmoid_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels) {
  check_dim(h, s);
  if (!is_coherent(h, labels)) {
    throw Error("IncoherentLabels", "label set is not closed under the parent relation");
  }
  // Active sibling groups are those containing at least one positive,
  // identified by the distinct parents of the label set.
  std::vector<NodeId> parents;
  for (NodeId y : labels) parents.push_back(h.parent(y));
  std::sort(parents.begin(), parents.end());
  parents.erase(std::unique(parents.begin(), parents.end()), parents.end());

  LossOutput out;
  out.grad = Eigen::VectorXd::Zero(h.label_count());
  for (NodeId p : parents) {
    for (NodeId u : h.children(p)) {
      if (labels.contains(u)) {
        out.value += nll_pos(s[slot(u)]);
        out.grad[slot(u)] = sigmoid(s[slot(u)]) - 1.0;
      } else {
        out.value += nll_neg(s[slot(u)]);
        out.grad[slot(u)] = sigmoid(s[slot(u)]);
      }
    }
  }
  return out;
}

namespace {

/// Shared kernel for flat BCE: per-node binary cross-entropy where negative
/// terms are scaled by neg_weight (null means unit weights everywhere).
LossOutput weighted_bce(const Hierarchy& h, const Logits& s, const LabelSet& labels,
                        const Eigen::VectorXd* neg_weight) {
  check_dim(h, s);
  LossOutput out;
  out.grad = Eigen::VectorXd::Zero(h.label_count());
  for (NodeId y = 1; y < h.node_count(); ++y) {
    Eigen::Index k = slot(y);
    if (labels.contains(y)) {
      out.value += nll_pos(s[k]);
      out.grad[k] = sigmoid(s[k]) - 1.0;
    } else if (neg_weight) {
      double w = (*neg_weight)[k];
      out.value += w * nll_neg(s[k]);
      out.grad[k] = w * sigmoid(s[k]);
    } else {
      out.value += nll_neg(s[k]);
      out.grad[k] = sigmoid(s[k]);
    }
  }
  return out;
}

/// Undirected tree distances from a source set, by BFS over parent+child
/// adjacency.
std::vector<int> tree_distances(const Hierarchy& h, const std::vector<NodeId>& sources) {
  std::vector<int> dist(static_cast<std::size_t>(h.node_count()), -1);
  std::deque<NodeId> frontier;
  for (NodeId y : sources) {
    dist[static_cast<std::size_t>(y)] = 0;
    frontier.push_back(y);
  }
  auto visit = [&](NodeId from, NodeId to) {
    if (dist[static_cast<std::size_t>(to)] < 0) {
      dist[static_cast<std::size_t>(to)] = dist[static_cast<std::size_t>(from)] + 1;
      frontier.push_back(to);
    }
  };
  while (!frontier.empty()) {
    NodeId y = frontier.front();
    frontier.pop_front();
    if (y != kRootId) visit(y, h.parent(y));
    for (NodeId c : h.children(y)) visit(y, c);
  }
  return dist;
}

int tree_diameter(const Hierarchy& h) {
  auto d0 = tree_distances(h, {kRootId});
  NodeId far = kRootId;
  for (NodeId y = 0; y < h.node_count(); ++y) {
    if (d0[static_cast<std::size_t>(y)] > d0[static_cast<std::size_t>(far)]) far = y;
  }
  auto d1 = tree_distances(h, {far});
  return *std::max_element(d1.begin(), d1.end());
}

}  // namespace

LossOutput bce_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels) {
  return weighted_bce(h, s, labels, nullptr);
}

LossOutput champ_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels,
                      double lambda) {
  check_dim(h, s);
  std::vector<NodeId> sources{kRootId};
  for (NodeId y : labels) {
    if (!h.contains(y)) {
      throw Error("UnknownNode", "label id " + std::to_string(y) + " is out of range");
    }
    sources.push_back(y);
  }
  std::vector<int> dist = tree_distances(h, sources);
  double d_max = static_cast<double>(tree_diameter(h));
  Eigen::VectorXd w(h.label_count());
  for (NodeId y = 1; y < h.node_count(); ++y) {
    w[slot(y)] = 1.0 + lambda * static_cast<double>(dist[static_cast<std::size_t>(y)]) / d_max;
  }
  return weighted_bce(h, s, labels, &w);
}

LossOutput leaf_softmax_loss(const Hierarchy& h, const Logits& leaf_scores,
                             const LabelSet& labels) {
  const auto& leaves = h.leaf_ids();
  if (leaf_scores.size() != static_cast<Eigen::Index>(leaves.size())) {
    throw Error("DimensionMismatch",
                "expected " + std::to_string(leaves.size()) + " leaf scores, got " +
                    std::to_string(leaf_scores.size()));
  }
  NodeId leaf = require_single_path(h, labels);
  int target = h.leaf_index(leaf);

  double mx = leaf_scores.maxCoeff();
  Eigen::VectorXd p = (leaf_scores.array() - mx).exp();
  double denom = p.sum();
  p /= denom;

  LossOutput out;
  out.value = std::log(denom) + mx - leaf_scores[target];
  out.grad = p;
  out.grad[target] -= 1.0;
  return out;
}

MarginalTable leaf_softmax_marginals(const Hierarchy& h, const Logits& leaf_scores) {
  const auto& leaves = h.leaf_ids();
  if (leaf_scores.size() != static_cast<Eigen::Index>(leaves.size())) {
    throw Error("DimensionMismatch", "leaf score count does not match the hierarchy");
  }
  double mx = leaf_scores.maxCoeff();
  Eigen::VectorXd p = (leaf_scores.array() - mx).exp();
  p /= p.sum();

  Eigen::VectorXd marg = Eigen::VectorXd::Zero(h.label_count());
  const auto& order = h.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId y = *it;
    if (y == kRootId) continue;
    if (h.is_leaf(y)) {
      marg[slot(y)] = p[h.leaf_index(y)];
    } else {
      double total = 0;
      for (NodeId c : h.children(y)) total += marg[slot(c)];
      marg[slot(y)] = total;
    }
  }
  return MarginalTable{std::move(marg)};
}

MarginalTable sigmoid_marginals(const Logits& s) {
  Eigen::VectorXd m(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) m[i] = sigmoid(s[i]);
  return MarginalTable{std::move(m)};
}

MarginalTable cond_sigmoid_marginals(const Hierarchy& h, const Logits& s) {
  check_dim(h, s);
  Eigen::VectorXd marg(h.label_count());
  for (NodeId y : h.topo_order()) {
    if (y == kRootId) continue;
    NodeId p = h.parent(y);
    double c = sigmoid(s[slot(y)]);
    marg[slot(y)] = p == kRootId ? c : c * marg[slot(p)];
  }
  return MarginalTable{std::move(marg)};
}

CondTable conditionals_from_marginals(const Hierarchy& h, const MarginalTable& m) {
  if (m.marg.size() != h.label_count()) {
    throw Error("DimensionMismatch", "marginal table does not match the hierarchy");
  }
  Eigen::VectorXd cond(h.label_count());
  for (NodeId y = 1; y < h.node_count(); ++y) {
    NodeId p = h.parent(y);
    if (p == kRootId) {
      cond[slot(y)] = m.marg[slot(y)];
    } else {
      double pm = m.marg[slot(p)];
      cond[slot(y)] = pm > 0.0 ? m.marg[slot(y)] / pm : 0.0;
    }
  }
  return CondTable{std::move(cond)};
}

Prior estimate_prior(const Hierarchy& h, std::span<const LabelSet> sets, Smoothing smoothing) {
  if (sets.empty()) throw Error("EmptyInput", "prior estimation needs at least one label set");
  std::vector<long long> count(static_cast<std::size_t>(h.node_count()), 0);
  count[kRootId] = static_cast<long long>(sets.size());
  for (const auto& s : sets) {
    if (!is_coherent(h, s)) {
      throw Error("IncoherentLabels", "prior estimation needs coherent label sets");
    }
    for (NodeId y : s) count[static_cast<std::size_t>(y)]++;
  }

  const double alpha = smoothing == Smoothing::laplace1 ? 1.0 : 0.0;
  Prior prior;
  prior.nu = Eigen::VectorXd::Zero(h.label_count());
  for (NodeId p = 0; p < h.node_count(); ++p) {
    const auto& group = h.children(p);
    if (group.empty()) continue;
    long long parent_count = count[static_cast<std::size_t>(p)];
    long long child_total = 0;
    for (NodeId c : group) {
      long long cc = count[static_cast<std::size_t>(c)];
      if (smoothing == Smoothing::none && cc == 0) {
        throw Error("ZeroCountPrior",
                    "label '" + h.name(c) + "' never occurs; use laplace1 smoothing");
      }
      child_total += cc;
    }
    double denom = static_cast<double>(parent_count) + alpha * static_cast<double>(group.size());
    for (NodeId c : group) {
      prior.nu[slot(c)] =
          (static_cast<double>(count[static_cast<std::size_t>(c)]) + alpha) / denom;
    }
    // Counts telescope exactly on single-path data; only truncated or
    // multi-path data needs an explicit renormalization of the group.
    if (child_total != parent_count) {
      double sum = 0;
      for (NodeId c : group) sum += prior.nu[slot(c)];
      for (NodeId c : group) prior.nu[slot(c)] /= sum;
    }
  }
  prior.tau = 1.0;
  return prior;
}

}  // namespace htc
