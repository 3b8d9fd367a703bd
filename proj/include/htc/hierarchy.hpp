#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "htc/error.hpp"

namespace htc {

/// Dense node identifier.  The root is always 0; the remaining nodes are
/// numbered 1..node_count-1 in first-appearance order of the taxonomy file.
using NodeId = int;

inline constexpr NodeId kRootId = 0;

/// Storage slot of a non-root node inside score/probability vectors, which
/// exclude the root and therefore have length node_count-1.
inline std::ptrdiff_t slot(NodeId y) { return static_cast<std::ptrdiff_t>(y) - 1; }

/// A set of non-root labels, stored sorted ascending without duplicates.
/// The root is never a label: it carries no information and is excluded from
/// every set-valued computation.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<NodeId> members);
  LabelSet(std::initializer_list<NodeId> members);

  bool contains(NodeId y) const;
  bool empty() const noexcept { return members_.empty(); }
  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<NodeId>& members() const noexcept { return members_; }

  std::vector<NodeId>::const_iterator begin() const noexcept { return members_.begin(); }
  std::vector<NodeId>::const_iterator end() const noexcept { return members_.end(); }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<NodeId> members_;
};

/// Immutable rooted label tree.  Construction goes through parse_taxonomy;
/// every query is read-only and total over valid node ids.
class Hierarchy {
 public:
  int node_count() const noexcept { return static_cast<int>(names_.size()); }

  /// Number of non-root nodes, i.e. the length of score vectors.
  int label_count() const noexcept { return node_count() - 1; }

  bool contains(NodeId y) const noexcept { return y >= 0 && y < node_count(); }

  const std::string& name(NodeId y) const;
  std::optional<NodeId> find(std::string_view name) const;

  /// Resolves a name, throwing UnknownNode when absent.
  NodeId id_of(std::string_view name) const;

  /// Parent of a non-root node.
  NodeId parent(NodeId y) const;

  /// Children in taxonomy file order.  Empty for leaves.
  const std::vector<NodeId>& children(NodeId y) const;

  /// Edge distance from the root; depth(root) == 0.
  int depth(NodeId y) const;

  int max_depth() const noexcept { return max_depth_; }

  bool is_leaf(NodeId y) const;

  /// All leaves in ascending node-id order.
  const std::vector<NodeId>& leaf_ids() const noexcept { return leaf_ids_; }

  /// Position of a leaf within leaf_ids(), or -1 for non-leaves.
  int leaf_index(NodeId y) const;

  /// Number of leaves in the subtree rooted at y (inclusive: a leaf counts
  /// itself).  Always >= 1.
  int leaf_count_under(NodeId y) const;

  /// Every node in breadth-first order from the root; parents always precede
  /// their children.  This is the canonical traversal for top-down recurrences.
  const std::vector<NodeId>& topo_order() const noexcept { return topo_order_; }

 private:
  Hierarchy() = default;

  void check_node(NodeId y) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> ids_;
  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> depth_;
  std::vector<NodeId> leaf_ids_;
  std::vector<int> leaf_index_;
  std::vector<int> leaves_under_;
  std::vector<NodeId> topo_order_;
  int max_depth_ = 0;

  friend Hierarchy parse_taxonomy(std::string_view text);
};

/// Parses the tab-separated adjacency format: each line is
/// `parent\tchild[\tchild...]`.  Names are opaque byte strings without tabs
/// or newlines.  The unique name that never appears as a child becomes the
/// root (id 0); all other nodes are numbered in first-appearance order.
///
/// Throws Error with code EmptyInput, MalformedLine, DuplicateEdge,
/// MultipleParents, MultipleRoots, or Cycle; messages name the offending
/// label and the location carries the 1-based line number where applicable.
Hierarchy parse_taxonomy(std::string_view text);

/// Serializes back to the adjacency format: one line per internal node in
/// node-id order, children in stored order.  Re-parsing yields the same
/// structure (same names, parent relation, and child order); ids may be
/// renumbered because first-appearance order is not preserved.
std::string to_taxonomy(const Hierarchy& h);

/// True when both hierarchies have the same names, the same name-level parent
/// relation, and the same child order.
bool same_structure(const Hierarchy& a, const Hierarchy& b);

/// Ancestor chain of a non-root node, ordered [y, parent(y), ...] up to but
/// excluding the root.  Its length equals depth(y).
std::vector<NodeId> ancestors(const Hierarchy& h, NodeId y);

/// Ancestor chain of y as a LabelSet.
LabelSet path_set(const Hierarchy& h, NodeId y);

/// All nodes of the subtree rooted at y, inclusive, ascending node-id order.
std::vector<NodeId> descendants(const Hierarchy& h, NodeId y);

/// Leaves of the subtree rooted at y, ascending node-id order.
std::vector<NodeId> leaves_under(const Hierarchy& h, NodeId y);

/// Lowest common ancestor; may be the root.
NodeId lca(const Hierarchy& h, NodeId a, NodeId b);

/// True when the set is closed under the parent relation: for every member,
/// its full ancestor chain is also present.
bool is_coherent(const Hierarchy& h, const LabelSet& s);

/// True when s is exactly the ancestor chain of one leaf.
bool is_single_path_leaf(const Hierarchy& h, const LabelSet& s);

/// The leaf whose ancestor chain equals s, or nullopt when s is not a
/// single-path-leaf set.
std::optional<NodeId> single_path_leaf(const Hierarchy& h, const LabelSet& s);

/// Ancestor closure: the union of the ancestor chains of all members.  The
/// result is coherent; augmenting an already coherent set returns it
/// unchanged.
LabelSet augment(const Hierarchy& h, const LabelSet& s);

}  // namespace htc
