#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace htc;

namespace {

/// Marginals (0.75, 0.25, 0.2, 0.2, 0.35) on the working tree.
MarginalTable fig_marginals() {
  MarginalTable m;
  m.marg = Eigen::VectorXd(5);
  m.marg[slot(1)] = 0.75;
  m.marg[slot(2)] = 0.25;
  m.marg[slot(3)] = 0.2;
  m.marg[slot(4)] = 0.2;
  m.marg[slot(5)] = 0.35;
  return m;
}

/// Leaf distribution keyed by ascending leaf id (2, 3, 4, 5) on the working
/// tree.
LeafDistribution t5_dist(double p2, double p3, double p4, double p5) {
  LeafDistribution d;
  d.p = Eigen::VectorXd(4);
  d.p << p2, p3, p4, p5;
  return d;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("thresholding keeps only strictly larger marginals") {
    MarginalTable m = fig_marginals();
    CHECK(threshold_predict(m, 0.5) == LabelSet{1});
    CHECK(threshold_predict(m, 0.3) == LabelSet{1, 5});
    CHECK(threshold_predict(m, 0.2) == LabelSet{1, 2, 5});
    CHECK(threshold_predict(m, 0.75).empty());
  }

  TEST_CASE("top-down descent follows the largest conditional") {
    Hierarchy h = support::t5();
    CondTable c;
    c.cond = Eigen::VectorXd(5);
    c.cond[slot(1)] = 0.75;
    c.cond[slot(2)] = 0.25;
    c.cond[slot(3)] = 0.2 / 0.75;
    c.cond[slot(4)] = 0.2 / 0.75;
    c.cond[slot(5)] = 0.35 / 0.75;
    CHECK(topdown_predict(c, h) == LabelSet{1, 5});

    // Exact ties resolve toward the smaller node id at every level.
    c.cond = Eigen::VectorXd::Constant(5, 0.5);
    CHECK(topdown_predict(c, h) == LabelSet{1, 3});
  }

  TEST_CASE("top-down output is a full coherent chain") {
    DetRng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
      Hierarchy h = support::random_tree(rng, 40);
      auto [cond, marg] = cond_softmax_forward(h, support::random_logits(rng, h.label_count()));
      LabelSet pred = topdown_predict(cond, h);
      REQUIRE(!pred.empty());
      CHECK(is_single_path_leaf(h, pred));
    }
  }

  TEST_CASE("expected score of a fixed candidate") {
    Hierarchy h = support::t5();
    // Leaf distribution matching the worked threshold example.
    LeafDistribution d = t5_dist(0.25, 0.2, 0.2, 0.35);
    CHECK(expected_hf1(h, d, LabelSet{1}) == 0.5);
    CHECK(expected_hf1(h, d, LabelSet{1, 5}) == 0.55);
    CHECK_THROWS_AS(expected_hf1(h, d, LabelSet{3}), Error);       // orphan node
    CHECK_THROWS_AS(expected_hf1(h, d, LabelSet(std::vector<NodeId>{})), Error);
    LeafDistribution wrong;
    wrong.p = Eigen::VectorXd::Constant(3, 1.0 / 3);
    CHECK_THROWS_AS(expected_hf1(h, wrong, LabelSet{1}), Error);
  }

  TEST_CASE("deeper prediction can beat the naive threshold set") {
    // At tau = 0.5 the thresholded prediction is {1}, yet {1,5} scores
    // higher; the optimum sits below any marginal-0.5 cut.
    Hierarchy h = support::t5();
    LeafDistribution d = t5_dist(0.25, 0.2, 0.2, 0.35);
    auto [best, val] = best_prefix_prediction(h, d);
    CHECK(best == LabelSet{1, 5});
    CHECK(val == 0.55);
    CHECK(val > expected_hf1(h, d, threshold_predict(fig_marginals(), 0.5)));
  }

  TEST_CASE("shallower prediction can beat a deeper one") {
    // Second worked distribution: mass concentrated on leaf 3 makes the
    // depth-1 stop {1,3} optimal over the full chain extension {1,3,5}... and
    // over every other chain.
    Hierarchy h = support::t5();
    LeafDistribution d = t5_dist(0.1, 0.55, 0.0, 0.35);
    CHECK(expected_hf1(h, d, LabelSet{1, 3, 5}) == 0.72);
    CHECK(expected_hf1(h, d, LabelSet{1, 3}) == doctest::Approx(0.725).epsilon(1e-12));
    auto [best, val] = best_prefix_prediction(h, d);
    CHECK(best == LabelSet{1, 3});
    CHECK(val == 0.7250000000000001);
  }

  TEST_CASE("expected score is linear in the leaf distribution") {
    DetRng rng(73);
    for (int trial = 0; trial < 50; ++trial) {
      Hierarchy h = support::random_tree(rng, 25);
      int n_leaves = static_cast<int>(h.leaf_ids().size());
      Eigen::VectorXd p(n_leaves);
      for (int i = 0; i < n_leaves; ++i) p[i] = rng.uniform();
      p /= p.sum();
      LeafDistribution d{p};
      LabelSet cand = support::random_truth(rng, h);

      double direct = expected_hf1(h, d, cand);
      double mixed = 0;
      for (int i = 0; i < n_leaves; ++i) {
        Eigen::VectorXd point = Eigen::VectorXd::Zero(n_leaves);
        point[i] = 1.0;
        mixed += p[i] * expected_hf1(h, LeafDistribution{point}, cand);
      }
      CHECK(std::abs(direct - mixed) <= 1e-12);

      // A point mass reduces to the plain per-pair score against that chain.
      int pick = rng.below(n_leaves);
      Eigen::VectorXd point = Eigen::VectorXd::Zero(n_leaves);
      point[pick] = 1.0;
      NodeId leaf = h.leaf_ids()[static_cast<std::size_t>(pick)];
      EvalPair pair{path_set(h, leaf), cand};
      std::vector<EvalPair> one{pair};
      CHECK(std::abs(expected_hf1(h, LeafDistribution{point}, cand) -
                     h_f1_samples(one, h)) <= 1e-15);
    }
  }

  TEST_CASE("exhaustive prefix search really is the argmax") {
    DetRng rng(79);
    for (int trial = 0; trial < 50; ++trial) {
      Hierarchy h = support::random_tree(rng, 20);
      int n_leaves = static_cast<int>(h.leaf_ids().size());
      Eigen::VectorXd p(n_leaves);
      for (int i = 0; i < n_leaves; ++i) p[i] = rng.uniform();
      p /= p.sum();
      LeafDistribution d{p};
      auto [best, val] = best_prefix_prediction(h, d);
      for (NodeId y = 1; y < h.node_count(); ++y) {
        CHECK(expected_hf1(h, d, path_set(h, y)) <= val + 1e-15);
      }
      CHECK(val == doctest::Approx(expected_hf1(h, d, best)).epsilon(1e-15));
    }
  }

  TEST_CASE("precision-recall sweep on one perfectly ranked sample") {
    Hierarchy h = support::t5();
    LabelSet truth{1, 5};
    MarginalTable m;
    m.marg = Eigen::VectorXd::Zero(5);
    m.marg[slot(1)] = 1.0;
    m.marg[slot(5)] = 1.0;
    std::vector<MarginalTable> ms{m};
    std::vector<LabelSet> ts{truth};
    PRCurve curve = hf1_pr_curve(h, ms, ts);
    CHECK(curve.auc == 1.0);
    REQUIRE(curve.points.size() == 3);  // sentinel + two distinct values
    CHECK(curve.points[0].h_precision == 1.0);
    CHECK(curve.points[0].h_recall == 0.0);
    CHECK(curve.points[2].h_precision == 1.0);
    CHECK(curve.points[2].h_recall == 1.0);
  }

  TEST_CASE("precision-recall sweep matches the worked marginals") {
    Hierarchy h = support::t5();
    std::vector<MarginalTable> ms{fig_marginals()};
    std::vector<LabelSet> ts{LabelSet{1, 5}};
    PRCurve curve = hf1_pr_curve(h, ms, ts);
    // Distinct values 0.75, 0.35, 0.25, 0.2 plus the sentinel.
    REQUIRE(curve.points.size() == 5);
    CHECK(curve.points[0].threshold == 1.75);
    CHECK(curve.points[1].threshold == 0.75);
    // tau = 0.75: still empty (strict comparison).
    CHECK(curve.points[1].h_precision == 1.0);
    CHECK(curve.points[1].h_recall == 0.0);
    // tau = 0.35: prediction {1}, precision 1, recall 1/2.
    CHECK(curve.points[2].h_precision == 1.0);
    CHECK(curve.points[2].h_recall == 0.5);
    // tau = 0.25: prediction {1,5} — exactly the truth.
    CHECK(curve.points[3].h_precision == 1.0);
    CHECK(curve.points[3].h_recall == 1.0);
    // tau = 0.2: prediction {1,2,5}, precision 2/3, recall 1.
    CHECK(curve.points[4].h_precision == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(curve.points[4].h_recall == 1.0);
    CHECK(curve.auc == 1.0);

    // Thresholds strictly decrease and recall never drops.
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
      CHECK(curve.points[k].threshold < curve.points[k - 1].threshold);
      CHECK(curve.points[k].h_recall >= curve.points[k - 1].h_recall);
    }
  }

  TEST_CASE("sweep equals the brute-force oracle") {
    DetRng rng(83);
    for (int trial = 0; trial < 40; ++trial) {
      Hierarchy h = support::random_tree(rng, 15);
      int n = 1 + rng.below(8);
      std::vector<MarginalTable> ms;
      std::vector<LabelSet> ts;
      for (int i = 0; i < n; ++i) {
        MarginalTable m;
        m.marg = Eigen::VectorXd(h.label_count());
        for (Eigen::Index j = 0; j < m.marg.size(); ++j) {
          // Coarse values force plenty of exact ties across samples.
          m.marg[j] = std::round(rng.uniform() * 4.0) / 4.0;
        }
        ms.push_back(std::move(m));
        ts.push_back(support::random_truth(rng, h));
      }
      PRCurve fast = hf1_pr_curve(h, ms, ts);
      PRCurve slow = support::pr_oracle(h, ms, ts);
      REQUIRE(fast.points.size() == slow.points.size());
      for (std::size_t k = 0; k < fast.points.size(); ++k) {
        CHECK(fast.points[k].threshold == slow.points[k].threshold);
        CHECK(fast.points[k].h_precision == slow.points[k].h_precision);
        CHECK(fast.points[k].h_recall == slow.points[k].h_recall);
      }
      CHECK(fast.auc == slow.auc);
    }
  }

  TEST_CASE("duplicating samples leaves the curve unchanged") {
    Hierarchy h = support::t5();
    std::vector<MarginalTable> ms{fig_marginals()};
    std::vector<LabelSet> ts{LabelSet{1, 5}};
    PRCurve once = hf1_pr_curve(h, ms, ts);
    ms.push_back(ms.front());
    ts.push_back(ts.front());
    PRCurve twice = hf1_pr_curve(h, ms, ts);
    REQUIRE(once.points.size() == twice.points.size());
    for (std::size_t k = 0; k < once.points.size(); ++k) {
      CHECK(once.points[k].h_precision == twice.points[k].h_precision);
      CHECK(once.points[k].h_recall == twice.points[k].h_recall);
    }
    CHECK(once.auc == twice.auc);
  }

  TEST_CASE("step integration uses the right-hand precision") {
    Hierarchy h = support::t5();
    std::vector<MarginalTable> ms{fig_marginals()};
    std::vector<LabelSet> ts{LabelSet{1, 5}};
    PRCurve curve = hf1_pr_curve(h, ms, ts, AucMode::step);
    double expect = 0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
      expect += (curve.points[k].h_recall - curve.points[k - 1].h_recall) *
                curve.points[k].h_precision;
    }
    CHECK(curve.auc == doctest::Approx(expect).epsilon(1e-15));
  }

  TEST_CASE("sweep input validation") {
    Hierarchy h = support::t5();
    std::vector<MarginalTable> ms{fig_marginals()};
    std::vector<LabelSet> ts;
    CHECK_THROWS_AS(hf1_pr_curve(h, ms, ts), Error);  // misaligned
    ts.push_back(LabelSet(std::vector<NodeId>{}));
    CHECK_THROWS_AS(hf1_pr_curve(h, ms, ts), Error);  // empty truth
    std::vector<MarginalTable> none;
    std::vector<LabelSet> no_truth;
    CHECK_THROWS_AS(hf1_pr_curve(h, none, no_truth), Error);
  }

  TEST_CASE("prior-corrected leaf decision") {
    Hierarchy h = support::t5();
    Prior prior;
    prior.nu = Eigen::VectorXd(5);
    prior.nu[slot(1)] = 0.5;
    prior.nu[slot(2)] = 0.5;
    prior.nu[slot(3)] = 0.8;
    prior.nu[slot(4)] = 0.1;
    prior.nu[slot(5)] = 0.1;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(5);
    // With flat scores the correction steers toward the rarest path; the
    // exact tie between leaves 4 and 5 resolves to the smaller id.
    CHECK(balanced_leaf_rule(h, s, prior) == 4);

    Prior bad = prior;
    bad.nu[slot(3)] = 0.0;
    CHECK_THROWS_AS(balanced_leaf_rule(h, s, bad), Error);
  }

  TEST_CASE("uniform priors reduce the decision to path-score sums") {
    // Symmetric tree: equal depth and equal group sizes make the prior term a
    // constant offset for every leaf.
    Hierarchy h = parse_taxonomy("r\ta\tb\na\tc\td\nb\te\tf\n");
    Prior prior;
    prior.nu = Eigen::VectorXd::Constant(h.label_count(), 0.5);
    DetRng rng(89);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd s = support::random_logits(rng, h.label_count());
      NodeId best = -1;
      double best_sum = 0;
      for (NodeId leaf : h.leaf_ids()) {
        double sum = 0;
        for (NodeId z : ancestors(h, leaf)) sum += s[slot(z)];
        if (best < 0 || sum > best_sum) {
          best = leaf;
          best_sum = sum;
        }
      }
      CHECK(balanced_leaf_rule(h, s, prior) == best);
    }
  }

  TEST_CASE("decision matches the prior-divided marginal argmax") {
    // Feed log-conditionals as scores: exp(s) then IS the conditional model,
    // and the rule coincides with maximizing marg(leaf) / prod(prior chain).
    DetRng rng(97);
    for (int trial = 0; trial < 100; ++trial) {
      Hierarchy h = support::random_tree(rng, 30);
      auto [cond, marg] = cond_softmax_forward(h, support::random_logits(rng, h.label_count()));
      Eigen::VectorXd log_cond = cond.cond.array().log();
      Prior prior = support::random_prior(rng, h);

      NodeId best = -1;
      double best_ratio = 0;
      for (NodeId leaf : h.leaf_ids()) {
        double nu_chain = 1;
        for (NodeId z : ancestors(h, leaf)) nu_chain *= prior.nu[slot(z)];
        double ratio = marg.marg[slot(leaf)] / nu_chain;
        if (best < 0 || ratio > best_ratio) {
          best = leaf;
          best_ratio = ratio;
        }
      }
      CHECK(balanced_leaf_rule(h, log_cond, prior) == best);
    }
  }
}
