#include "htc/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace htc {

namespace {

std::string quoted(const std::string& s) { return "'" + s + "'"; }

std::string line_loc(int line) { return "line " + std::to_string(line); }

}  // namespace

LabelSet::LabelSet(std::vector<NodeId> members) : members_(std::move(members)) {
  for (NodeId y : members_) {
    if (y <= kRootId) {
      throw Error("RootHasNoLabelAncestry",
                  "label sets contain non-root nodes only, got id " + std::to_string(y));
    }
  }
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

LabelSet::LabelSet(std::initializer_list<NodeId> members)
    : LabelSet(std::vector<NodeId>(members)) {}

bool LabelSet::contains(NodeId y) const {
  return std::binary_search(members_.begin(), members_.end(), y);
}

const std::string& Hierarchy::name(NodeId y) const {
  check_node(y);
  return names_[static_cast<std::size_t>(y)];
}

std::optional<NodeId> Hierarchy::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

NodeId Hierarchy::id_of(std::string_view name) const {
  auto found = find(name);
  if (!found) {
    throw Error("UnknownNode", "unknown label " + quoted(std::string(name)));
  }
  return *found;
}

NodeId Hierarchy::parent(NodeId y) const {
  check_node(y);
  if (y == kRootId) {
    throw Error("RootHasNoLabelAncestry", "the root has no parent");
  }
  return parent_[static_cast<std::size_t>(y)];
}

const std::vector<NodeId>& Hierarchy::children(NodeId y) const {
  check_node(y);
  return children_[static_cast<std::size_t>(y)];
}

int Hierarchy::depth(NodeId y) const {
  check_node(y);
  return depth_[static_cast<std::size_t>(y)];
}

bool Hierarchy::is_leaf(NodeId y) const {
  check_node(y);
  return children_[static_cast<std::size_t>(y)].empty();
}

int Hierarchy::leaf_index(NodeId y) const {
  check_node(y);
  return leaf_index_[static_cast<std::size_t>(y)];
}

int Hierarchy::leaf_count_under(NodeId y) const {
  check_node(y);
  return leaves_under_[static_cast<std::size_t>(y)];
}

void Hierarchy::check_node(NodeId y) const {
  if (!contains(y)) {
    throw Error("UnknownNode", "node id " + std::to_string(y) + " is out of range");
  }
}

Hierarchy parse_taxonomy(std::string_view text) {
  std::vector<std::string> order;               // first-appearance order
  std::unordered_set<std::string> seen;
  std::unordered_map<std::string, std::string> parent_of;
  std::unordered_map<std::string, std::vector<std::string>> children_of;
  std::unordered_set<std::string> edge_keys;    // "parent\tchild"
  std::unordered_set<std::string> ever_child;

  auto note = [&](const std::string& name) {
    if (seen.insert(name).second) order.push_back(name);
  };

  int line_no = 0;
  std::size_t pos = 0;
  bool any_line = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty()) continue;
    any_line = true;

    std::vector<std::string> tokens;
    std::size_t tpos = 0;
    while (tpos <= line.size()) {
      std::size_t tab = line.find('\t', tpos);
      std::string_view tok =
          line.substr(tpos, tab == std::string_view::npos ? std::string_view::npos : tab - tpos);
      tokens.emplace_back(tok);
      if (tab == std::string_view::npos) break;
      tpos = tab + 1;
    }
    if (tokens.size() < 2) {
      throw Error("MalformedLine", "expected parent and at least one child", line_loc(line_no));
    }
    for (const auto& tok : tokens) {
      if (tok.empty()) {
        throw Error("MalformedLine", "empty label name", line_loc(line_no));
      }
    }

    const std::string& parent = tokens.front();
    note(parent);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const std::string& child = tokens[i];
      note(child);
      std::string key = parent + "\t" + child;
      if (!edge_keys.insert(std::move(key)).second) {
        throw Error("DuplicateEdge",
                    "duplicate edge " + quoted(parent) + " -> " + quoted(child),
                    line_loc(line_no));
      }
      auto existing = parent_of.find(child);
      if (existing != parent_of.end()) {
        throw Error("MultipleParents",
                    "label " + quoted(child) + " has parents " + quoted(existing->second) +
                        " and " + quoted(parent),
                    line_loc(line_no));
      }
      parent_of.emplace(child, parent);
      children_of[parent].push_back(child);
      ever_child.insert(child);
    }
  }

  if (!any_line) {
    throw Error("EmptyInput", "taxonomy has no edges");
  }

  std::vector<std::string> roots;
  for (const auto& name : order) {
    if (!ever_child.count(name)) roots.push_back(name);
  }
  if (roots.empty()) {
    // Every label has a parent, so some parent chain revisits itself.
    std::unordered_set<std::string> visited;
    std::string cur = order.front();
    while (visited.insert(cur).second) cur = parent_of.at(cur);
    throw Error("Cycle", "cycle through label " + quoted(cur));
  }
  if (roots.size() > 1) {
    throw Error("MultipleRoots",
                "multiple roots: " + quoted(roots[0]) + " and " + quoted(roots[1]));
  }

  Hierarchy h;
  const std::string& root_name = roots.front();
  h.names_.push_back(root_name);
  for (const auto& name : order) {
    if (name != root_name) h.names_.push_back(name);
  }
  const int n = static_cast<int>(h.names_.size());
  for (NodeId y = 0; y < n; ++y) h.ids_.emplace(h.names_[static_cast<std::size_t>(y)], y);

  h.parent_.assign(static_cast<std::size_t>(n), kRootId);
  h.children_.assign(static_cast<std::size_t>(n), {});
  for (NodeId y = 0; y < n; ++y) {
    const std::string& name = h.names_[static_cast<std::size_t>(y)];
    if (y != kRootId) h.parent_[static_cast<std::size_t>(y)] = h.ids_.at(parent_of.at(name));
    auto kids = children_of.find(name);
    if (kids != children_of.end()) {
      for (const auto& child : kids->second) {
        h.children_[static_cast<std::size_t>(y)].push_back(h.ids_.at(child));
      }
    }
  }

  // Reachability from the root doubles as cycle detection: an unreachable
  // node sits below a parent chain that loops instead of ending at the root.
  h.depth_.assign(static_cast<std::size_t>(n), -1);
  h.topo_order_.reserve(static_cast<std::size_t>(n));
  std::deque<NodeId> frontier{kRootId};
  h.depth_[kRootId] = 0;
  while (!frontier.empty()) {
    NodeId y = frontier.front();
    frontier.pop_front();
    h.topo_order_.push_back(y);
    for (NodeId c : h.children_[static_cast<std::size_t>(y)]) {
      h.depth_[static_cast<std::size_t>(c)] = h.depth_[static_cast<std::size_t>(y)] + 1;
      frontier.push_back(c);
    }
  }
  for (NodeId y = 0; y < n; ++y) {
    if (h.depth_[static_cast<std::size_t>(y)] < 0) {
      throw Error("Cycle", "label " + quoted(h.names_[static_cast<std::size_t>(y)]) +
                               " is not reachable from the root");
    }
  }
  h.max_depth_ = *std::max_element(h.depth_.begin(), h.depth_.end());

  h.leaf_index_.assign(static_cast<std::size_t>(n), -1);
  for (NodeId y = 0; y < n; ++y) {
    if (h.children_[static_cast<std::size_t>(y)].empty()) {
      h.leaf_index_[static_cast<std::size_t>(y)] = static_cast<int>(h.leaf_ids_.size());
      h.leaf_ids_.push_back(y);
    }
  }

  h.leaves_under_.assign(static_cast<std::size_t>(n), 0);
  for (auto it = h.topo_order_.rbegin(); it != h.topo_order_.rend(); ++it) {
    NodeId y = *it;
    const auto& kids = h.children_[static_cast<std::size_t>(y)];
    if (kids.empty()) {
      h.leaves_under_[static_cast<std::size_t>(y)] = 1;
    } else {
      int total = 0;
      for (NodeId c : kids) total += h.leaves_under_[static_cast<std::size_t>(c)];
      h.leaves_under_[static_cast<std::size_t>(y)] = total;
    }
  }

  return h;
}

std::string to_taxonomy(const Hierarchy& h) {
  std::string out;
  for (NodeId y = 0; y < h.node_count(); ++y) {
    const auto& kids = h.children(y);
    if (kids.empty()) continue;
    out += h.name(y);
    for (NodeId c : kids) {
      out += '\t';
      out += h.name(c);
    }
    out += '\n';
  }
  return out;
}

bool same_structure(const Hierarchy& a, const Hierarchy& b) {
  if (a.node_count() != b.node_count()) return false;
  for (NodeId y = 0; y < a.node_count(); ++y) {
    const std::string& name = a.name(y);
    auto other = b.find(name);
    if (!other) return false;
    if ((y == kRootId) != (*other == kRootId)) return false;
    if (y != kRootId && b.name(b.parent(*other)) != a.name(a.parent(y))) return false;
    const auto& ka = a.children(y);
    const auto& kb = b.children(*other);
    if (ka.size() != kb.size()) return false;
    for (std::size_t i = 0; i < ka.size(); ++i) {
      if (a.name(ka[i]) != b.name(kb[i])) return false;
    }
  }
  return true;
}

std::vector<NodeId> ancestors(const Hierarchy& h, NodeId y) {
  if (!h.contains(y)) {
    throw Error("UnknownNode", "node id " + std::to_string(y) + " is out of range");
  }
  if (y == kRootId) {
    throw Error("RootHasNoLabelAncestry", "the root has no ancestor chain");
  }
  std::vector<NodeId> chain;
  for (NodeId cur = y; cur != kRootId; cur = h.parent(cur)) chain.push_back(cur);
  return chain;
}

LabelSet path_set(const Hierarchy& h, NodeId y) { return LabelSet(ancestors(h, y)); }

std::vector<NodeId> descendants(const Hierarchy& h, NodeId y) {
  if (!h.contains(y)) {
    throw Error("UnknownNode", "node id " + std::to_string(y) + " is out of range");
  }
  std::vector<NodeId> out;
  std::vector<NodeId> stack{y};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    for (NodeId c : h.children(cur)) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> leaves_under(const Hierarchy& h, NodeId y) {
  std::vector<NodeId> out;
  for (NodeId d : descendants(h, y)) {
    if (h.is_leaf(d)) out.push_back(d);
  }
  return out;
}

NodeId lca(const Hierarchy& h, NodeId a, NodeId b) {
  if (!h.contains(a) || !h.contains(b)) {
    throw Error("UnknownNode", "lca of out-of-range node ids");
  }
  while (h.depth(a) > h.depth(b)) a = h.parent(a);
  while (h.depth(b) > h.depth(a)) b = h.parent(b);
  while (a != b) {
    a = h.parent(a);
    b = h.parent(b);
  }
  return a;
}

bool is_coherent(const Hierarchy& h, const LabelSet& s) {
  for (NodeId y : s) {
    if (!h.contains(y)) {
      throw Error("UnknownNode", "label id " + std::to_string(y) + " is out of range");
    }
    NodeId p = h.parent(y);
    if (p != kRootId && !s.contains(p)) return false;
  }
  return true;
}

std::optional<NodeId> single_path_leaf(const Hierarchy& h, const LabelSet& s) {
  if (s.empty()) return std::nullopt;
  NodeId deepest = *s.begin();
  bool tie = false;
  for (NodeId y : s) {
    if (!h.contains(y)) {
      throw Error("UnknownNode", "label id " + std::to_string(y) + " is out of range");
    }
    if (h.depth(y) > h.depth(deepest)) {
      deepest = y;
      tie = false;
    } else if (y != deepest && h.depth(y) == h.depth(deepest)) {
      tie = true;
    }
  }
  if (tie || !h.is_leaf(deepest)) return std::nullopt;
  if (static_cast<int>(s.size()) != h.depth(deepest)) return std::nullopt;
  return is_coherent(h, s) ? std::optional<NodeId>(deepest) : std::nullopt;
}

bool is_single_path_leaf(const Hierarchy& h, const LabelSet& s) {
  return single_path_leaf(h, s).has_value();
}

LabelSet augment(const Hierarchy& h, const LabelSet& s) {
  std::vector<char> mark(static_cast<std::size_t>(h.node_count()), 0);
  for (NodeId y : s) {
    if (!h.contains(y)) {
      throw Error("UnknownNode", "label id " + std::to_string(y) + " is out of range");
    }
    for (NodeId cur = y; cur != kRootId && !mark[static_cast<std::size_t>(cur)];
         cur = h.parent(cur)) {
      mark[static_cast<std::size_t>(cur)] = 1;
    }
  }
  std::vector<NodeId> members;
  for (NodeId y = 1; y < h.node_count(); ++y) {
    if (mark[static_cast<std::size_t>(y)]) members.push_back(y);
  }
  return LabelSet(std::move(members));
}

}  // namespace htc
