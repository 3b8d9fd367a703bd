#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>

#include "htc/hierarchy.hpp"

namespace htc {

/// Raw scores for every non-root node, indexed by slot(id).
using Logits = Eigen::VectorXd;

/// P(y | parent(y), x) for every non-root node, indexed by slot(id).  Within
/// each sibling group the entries sum to 1.
struct CondTable {
  Eigen::VectorXd cond;
};

/// P(y | x) for every non-root node, indexed by slot(id).  Under a
/// conditional model this is the product of conditionals along the ancestor
/// chain, so marginals never exceed the parent's marginal.
struct MarginalTable {
  Eigen::VectorXd marg;
};

/// Label prior: nu[slot(y)] estimates P(y | parent(y)) from data, and tau
/// scales the additive log-prior adjustment.
struct Prior {
  Eigen::VectorXd nu;
  double tau = 1.0;
};

/// Loss value and its gradient with respect to the input scores.  The
/// gradient has the same indexing as the scores passed in (slot-indexed for
/// full logits, leaf-position-indexed for leaf-only logits).
struct LossOutput {
  double value = 0;
  Eigen::VectorXd grad;
};

enum class Smoothing { laplace1, none };

/// Softmax over every sibling group, then marginals by chaining conditionals
/// top-down.  When a prior is given, scores are shifted by tau * log(nu)
/// before the softmax; a prior with any non-positive entry is rejected
/// (NonFinitePrior) because its log would not be finite.
std::pair<CondTable, MarginalTable> cond_softmax_forward(const Hierarchy& h, const Logits& s,
                                                         const Prior* prior = nullptr);

/// Negative log-likelihood of a single-path-leaf label set under the
/// conditional softmax model: the sum of -log P(z | parent(z)) along the
/// path.  The gradient is softmax-minus-indicator on every sibling group the
/// path passes through and exactly zero elsewhere.
LossOutput cond_softmax_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels,
                             const Prior* prior = nullptr);

/// Per-node sigmoid version for coherent (possibly multi-path) label sets:
/// binary cross-entropy restricted to sibling groups containing a positive.
/// Nodes outside those groups receive no loss and zero gradient.
LossOutput cond_sigmoid_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels);

/// Flat binary cross-entropy over all non-root nodes.
LossOutput bce_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels);

/// Distance-weighted binary cross-entropy: negatives are up-weighted by
/// 1 + lambda * d(y, truth ∪ {root}) / d_max, where d is the undirected tree
/// distance to the nearest node of the augmented truth and d_max is the tree
/// diameter.  lambda == 0 reproduces bce_loss bit for bit.
LossOutput champ_loss(const Hierarchy& h, const Logits& s, const LabelSet& labels,
                      double lambda);

/// Softmax over leaves only.  Scores and gradient are indexed by leaf
/// position (see Hierarchy::leaf_index); labels must be single-path-leaf.
LossOutput leaf_softmax_loss(const Hierarchy& h, const Logits& leaf_scores,
                             const LabelSet& labels);

/// Marginals induced by a leaf softmax: leaf nodes carry their softmax mass,
/// internal nodes the sum over their leaf descendants.
MarginalTable leaf_softmax_marginals(const Hierarchy& h, const Logits& leaf_scores);

/// Elementwise sigmoid marginals for flat models.
MarginalTable sigmoid_marginals(const Logits& s);

/// Marginals under the conditional sigmoid model: each node's sigmoid is a
/// conditional, so the marginal is the product of sigmoids along the
/// ancestor chain.
MarginalTable cond_sigmoid_marginals(const Hierarchy& h, const Logits& s);

/// Conditionals recovered from a marginal table by dividing each node by its
/// parent (1 at the top level).  Zero-marginal parents yield 0 children.
CondTable conditionals_from_marginals(const Hierarchy& h, const MarginalTable& m);

/// Estimates P(y | parent(y)) from coherent label sets by counting:
/// nu(y) = (count(y) + a) / (count(parent) + a * group size), with a = 1 for
/// laplace1 and a = 0 for none; the root's count is the number of sets.
/// Groups whose child counts do not add up to the parent's count (truncated
/// or multi-path data) are renormalized to sum to 1.  With no smoothing, a
/// zero-count node is an error (ZeroCountPrior).
Prior estimate_prior(const Hierarchy& h, std::span<const LabelSet> sets, Smoothing smoothing);

}  // namespace htc
