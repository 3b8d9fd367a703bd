#include <doctest.h>

#include "support.hpp"

using namespace htc;

TEST_SUITE("hierarchy") {
  TEST_CASE("parse assigns root id 0 and first-appearance ids") {
    Hierarchy h = support::t5();
    CHECK(h.node_count() == 6);
    CHECK(h.label_count() == 5);
    CHECK(h.name(0) == "r");
    for (NodeId y = 1; y <= 5; ++y) CHECK(h.name(y) == std::to_string(y));
    CHECK(h.parent(1) == 0);
    CHECK(h.parent(2) == 0);
    CHECK(h.parent(3) == 1);
    CHECK(h.parent(5) == 1);
    CHECK(h.children(0) == std::vector<NodeId>{1, 2});
    CHECK(h.children(1) == std::vector<NodeId>{3, 4, 5});
    CHECK(h.depth(0) == 0);
    CHECK(h.depth(2) == 1);
    CHECK(h.depth(4) == 2);
    CHECK(h.max_depth() == 2);
    CHECK(h.leaf_ids() == std::vector<NodeId>{2, 3, 4, 5});
    CHECK(h.leaf_count_under(0) == 4);
    CHECK(h.leaf_count_under(1) == 3);
    CHECK(h.leaf_count_under(2) == 1);
  }

  TEST_CASE("root may appear as a parent after other lines") {
    // First-appearance order differs from breadth-first order here.
    Hierarchy h = parse_taxonomy("B\tC\nRoot\tA\nA\tB\n");
    CHECK(h.name(0) == "Root");
    CHECK(h.id_of("B") == 1);
    CHECK(h.id_of("C") == 2);
    CHECK(h.id_of("A") == 3);
    CHECK(h.parent(h.id_of("B")) == h.id_of("A"));
    CHECK(h.depth(h.id_of("C")) == 3);
    // Parents precede children in topo order even though ids do not.
    const auto& order = h.topo_order();
    auto pos = [&](NodeId y) {
      return std::find(order.begin(), order.end(), y) - order.begin();
    };
    CHECK(pos(h.id_of("A")) < pos(h.id_of("B")));
    CHECK(pos(h.id_of("B")) < pos(h.id_of("C")));
  }

  TEST_CASE("structural errors") {
    SUBCASE("empty input") {
      try {
        parse_taxonomy("");
        FAIL("expected EmptyInput");
      } catch (const Error& e) {
        CHECK(e.code() == "EmptyInput");
      }
    }
    SUBCASE("duplicate edge") {
      try {
        parse_taxonomy("r\ta\nr\ta\n");
        FAIL("expected DuplicateEdge");
      } catch (const Error& e) {
        CHECK(e.code() == "DuplicateEdge");
        CHECK(e.location() == "line 2");
      }
    }
    SUBCASE("multiple parents") {
      try {
        parse_taxonomy("r\ta\tb\nb\ta\n");
        FAIL("expected MultipleParents");
      } catch (const Error& e) {
        CHECK(e.code() == "MultipleParents");
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
      }
    }
    SUBCASE("multiple roots") {
      try {
        parse_taxonomy("r\ta\ns\tb\n");
        FAIL("expected MultipleRoots");
      } catch (const Error& e) {
        CHECK(e.code() == "MultipleRoots");
      }
    }
    SUBCASE("pure cycle has no root") {
      try {
        parse_taxonomy("a\tb\nb\ta\n");
        FAIL("expected Cycle");
      } catch (const Error& e) {
        CHECK(e.code() == "Cycle");
      }
    }
    SUBCASE("cycle below a valid root") {
      try {
        parse_taxonomy("r\ta\nb\tc\nc\tb\n");
        FAIL("expected error");
      } catch (const Error& e) {
        CHECK(e.code() == "Cycle");
      }
    }
    SUBCASE("malformed line") {
      try {
        parse_taxonomy("r\ta\nb\n");
        FAIL("expected MalformedLine");
      } catch (const Error& e) {
        CHECK(e.code() == "MalformedLine");
        CHECK(e.location() == "line 2");
      }
    }
  }

  TEST_CASE("round-trip preserves structure") {
    Hierarchy h = parse_taxonomy("B\tC\nRoot\tA\nA\tB\n");
    Hierarchy again = parse_taxonomy(to_taxonomy(h));
    CHECK(same_structure(h, again));

    DetRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      Hierarchy t = support::random_tree(rng, 40);
      CHECK(same_structure(t, parse_taxonomy(to_taxonomy(t))));
    }
  }

  TEST_CASE("ancestor and descendant queries") {
    Hierarchy h = support::t5();
    CHECK(ancestors(h, 4) == std::vector<NodeId>{4, 1});
    CHECK(ancestors(h, 2) == std::vector<NodeId>{2});
    CHECK_THROWS_AS(ancestors(h, kRootId), Error);
    CHECK(path_set(h, 5) == LabelSet{1, 5});
    CHECK(descendants(h, 1) == std::vector<NodeId>{1, 3, 4, 5});
    CHECK(descendants(h, 0) == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(leaves_under(h, 1) == std::vector<NodeId>{3, 4, 5});
    CHECK(leaves_under(h, 0) == std::vector<NodeId>{2, 3, 4, 5});
    CHECK(lca(h, 3, 5) == 1);
    CHECK(lca(h, 3, 2) == 0);
    CHECK(lca(h, 1, 4) == 1);
    CHECK(lca(h, 4, 4) == 4);
  }

  TEST_CASE("ancestors length equals depth on random trees") {
    DetRng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
      Hierarchy h = support::random_tree(rng, 60);
      for (NodeId y = 1; y < h.node_count(); ++y) {
        CHECK(static_cast<int>(ancestors(h, y).size()) == h.depth(y));
      }
    }
  }

  TEST_CASE("lca matches a chain-intersection oracle") {
    DetRng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
      Hierarchy h = support::random_tree(rng, 40);
      for (int k = 0; k < 20; ++k) {
        NodeId a = 1 + rng.below(h.label_count());
        NodeId b = 1 + rng.below(h.label_count());
        // Deepest node common to both root-side chains (root if disjoint).
        auto chain_a = ancestors(h, a);
        auto chain_b = ancestors(h, b);
        NodeId expect = kRootId;
        for (NodeId u : chain_a) {
          if (std::find(chain_b.begin(), chain_b.end(), u) != chain_b.end()) {
            expect = u;
            break;
          }
        }
        CHECK(lca(h, a, b) == expect);
      }
    }
  }

  TEST_CASE("coherence and single-path classification") {
    Hierarchy h = support::t5();
    CHECK(is_coherent(h, LabelSet{}));
    CHECK(is_coherent(h, LabelSet{1}));
    CHECK(is_coherent(h, LabelSet{1, 3}));
    CHECK(is_coherent(h, LabelSet{1, 3, 4}));
    CHECK_FALSE(is_coherent(h, LabelSet{3}));
    CHECK_FALSE(is_coherent(h, LabelSet{2, 5}));

    CHECK(is_single_path_leaf(h, LabelSet{2}));
    CHECK(is_single_path_leaf(h, LabelSet{1, 5}));
    CHECK_FALSE(is_single_path_leaf(h, LabelSet{}));
    CHECK_FALSE(is_single_path_leaf(h, LabelSet{1}));          // stops at an internal node
    CHECK_FALSE(is_single_path_leaf(h, LabelSet{1, 3, 4}));    // two leaves
    CHECK_FALSE(is_single_path_leaf(h, LabelSet{3}));          // missing ancestor
    CHECK(single_path_leaf(h, LabelSet{1, 4}) == 4);
  }

  TEST_CASE("augment closes sets upward") {
    Hierarchy h = support::t5();
    CHECK(augment(h, LabelSet{5}) == LabelSet{1, 5});
    CHECK(augment(h, LabelSet{3, 2}) == LabelSet{1, 2, 3});
    CHECK(augment(h, LabelSet{}) == LabelSet{});

    DetRng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      Hierarchy t = support::random_tree(rng, 40);
      LabelSet s = support::random_coherent(rng, t);
      CHECK(is_coherent(t, s));
      CHECK(augment(t, s) == s);  // augment is the identity on coherent sets
      LabelSet raw = support::random_truth(rng, t);
      LabelSet aug = augment(t, raw);
      CHECK(is_coherent(t, aug));
      CHECK(augment(t, aug) == aug);  // idempotent
    }
  }

  TEST_CASE("label sets reject the root and out-of-range ids") {
    Hierarchy h = support::t5();
    CHECK_THROWS_AS(LabelSet{0}, Error);
    CHECK_THROWS_AS(is_coherent(h, LabelSet{9}), Error);
    CHECK_THROWS_AS(h.id_of("missing"), Error);
  }
}
