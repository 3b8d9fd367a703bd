#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "htc/hierarchy.hpp"
#include "htc/inference.hpp"
#include "htc/losses.hpp"
#include "htc/metrics.hpp"
#include "htc/rng.hpp"

namespace support {

/// The 6-node working tree: root r with children 1 and 2, node 1 with
/// children 3, 4, 5.  Node ids equal the numeric names.
inline htc::Hierarchy t5() { return htc::parse_taxonomy("r\t1\t2\n1\t3\t4\t5\n"); }

/// The 5-node prior-example tree: root r with children 1 and 2, node 1 with
/// children 3 and 5.  Note the name "5" receives id 4 (first appearance).
inline htc::Hierarchy t5_prior() { return htc::parse_taxonomy("r\t1\t2\n1\t3\t5\n"); }

/// Random rooted tree with between 2 and max_nodes nodes; names are n0 (the
/// root) through n<k> and every node's parent has a smaller index.
inline htc::Hierarchy random_tree(htc::DetRng& rng, int max_nodes) {
  int n = 2 + rng.below(max_nodes - 1);
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) kids[static_cast<std::size_t>(rng.below(i))].push_back(i);
  std::string text;
  for (int p = 0; p < n; ++p) {
    if (kids[static_cast<std::size_t>(p)].empty()) continue;
    text += "n" + std::to_string(p);
    for (int c : kids[static_cast<std::size_t>(p)]) text += "\tn" + std::to_string(c);
    text += "\n";
  }
  return htc::parse_taxonomy(text);
}

/// Random coherent label set (possibly empty): a few random picks, closed
/// upward.
inline htc::LabelSet random_coherent(htc::DetRng& rng, const htc::Hierarchy& h) {
  std::vector<htc::NodeId> picks;
  int k = rng.below(4);
  for (int i = 0; i < k; ++i) {
    picks.push_back(1 + rng.below(h.label_count()));
  }
  return augment(h, htc::LabelSet(std::move(picks)));
}

/// Random non-empty coherent truth set.
inline htc::LabelSet random_truth(htc::DetRng& rng, const htc::Hierarchy& h) {
  std::vector<htc::NodeId> picks{1 + rng.below(h.label_count())};
  int extra = rng.below(3);
  for (int i = 0; i < extra; ++i) picks.push_back(1 + rng.below(h.label_count()));
  return augment(h, htc::LabelSet(std::move(picks)));
}

/// Ancestor chain of a random leaf.
inline htc::LabelSet random_single_path(htc::DetRng& rng, const htc::Hierarchy& h) {
  const auto& leaves = h.leaf_ids();
  return path_set(h, leaves[static_cast<std::size_t>(rng.below(static_cast<int>(leaves.size())))]);
}

inline Eigen::VectorXd random_logits(htc::DetRng& rng, Eigen::Index n, double scale = 2.0) {
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = scale * rng.normal();
  return s;
}

/// Strictly positive random prior with unit sibling-group sums.
inline htc::Prior random_prior(htc::DetRng& rng, const htc::Hierarchy& h) {
  htc::Prior prior;
  prior.nu = Eigen::VectorXd::Zero(h.label_count());
  for (htc::NodeId p = 0; p < h.node_count(); ++p) {
    const auto& group = h.children(p);
    if (group.empty()) continue;
    double total = 0;
    for (htc::NodeId c : group) {
      double v = 0.05 + rng.uniform();
      prior.nu[htc::slot(c)] = v;
      total += v;
    }
    for (htc::NodeId c : group) prior.nu[htc::slot(c)] /= total;
  }
  prior.tau = 1.0;
  return prior;
}

/// Central finite differences of a scalar function of the score vector.
template <typename F>
Eigen::VectorXd fd_grad(F f, const Eigen::VectorXd& s, double step = 1e-6) {
  Eigen::VectorXd g(s.size());
  Eigen::VectorXd probe = s;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    probe[i] = s[i] + step;
    double up = f(probe);
    probe[i] = s[i] - step;
    double down = f(probe);
    probe[i] = s[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline double rel_inf_err(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  double denom = std::max(1e-12, exact.lpNorm<Eigen::Infinity>());
  return (approx - exact).lpNorm<Eigen::Infinity>() / denom;
}

/// Brute-force PR sweep: enumerates the same threshold grid but recomputes
/// every point from scratch with threshold_predict and the per-pair
/// hierarchical precision/recall, then trapezoid-integrates.  Independent of
/// the incremental sweep in hf1_pr_curve.
inline htc::PRCurve pr_oracle(const htc::Hierarchy& h,
                              std::span<const htc::MarginalTable> marginals,
                              std::span<const htc::LabelSet> truths) {
  std::vector<double> values;
  for (const auto& mt : marginals) {
    for (Eigen::Index i = 0; i < mt.marg.size(); ++i) values.push_back(mt.marg[i]);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> grid;
  grid.push_back((values.empty() ? 1.0 : values.front()) + 1.0);
  grid.insert(grid.end(), values.begin(), values.end());

  htc::PRCurve curve;
  for (double tau : grid) {
    double hp = 0, hr = 0;
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      htc::EvalPair pair{truths[i], htc::threshold_predict(marginals[i], tau)};
      auto [p, r] = htc::h_precision_recall(pair, h);
      hp += p;
      hr += r;
    }
    curve.points.push_back({tau, hp / static_cast<double>(marginals.size()),
                            hr / static_cast<double>(marginals.size())});
  }
  double auc = 0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    auc += (curve.points[k].h_recall - curve.points[k - 1].h_recall) *
           (curve.points[k].h_precision + curve.points[k - 1].h_precision) / 2.0;
  }
  curve.auc = std::clamp(auc, 0.0, 1.0);
  return curve;
}

}  // namespace support
