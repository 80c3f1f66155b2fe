#pragma once

// Lazily grown marked Galton-Watson tree.
//
// Vertex 0 is the artificial parent of the root and vertex 1 is the root.
// Every other vertex is created when its parent is expanded. Expanding a
// vertex draws (nu(x), A(x_1), ..., A(x_nu)) from a counter-based stream keyed
// by a hash of the vertex address, so the realization does not depend on the
// order in which vertices are queried.

#include <cstdint>
#include <deque>
#include <ostream>
#include <string>
#include <vector>

#include "rwre/error.hpp"
#include "rwre/law.hpp"
#include "rwre/random.hpp"

namespace rwre {

using NodeId = std::uint32_t;

inline constexpr NodeId kOrigin = 0;  // parent of the root
inline constexpr NodeId kRoot = 1;
inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

// Quenched transition row of one vertex.
struct NodeRecord {
  int offspring = 0;
  std::vector<double> marks;
  double p_parent = 0.0;
  std::vector<double> p_children;
};

class MarkedTree {
 public:
  MarkedTree(ALaw a_law, OffspringLaw offspring, std::uint64_t seed,
             std::size_t node_budget = kDefaultNodeBudget)
      : a_law_(std::move(a_law)),
        offspring_(std::move(offspring)),
        seed_(seed),
        budget_(node_budget) {
    nodes_.reserve(1024);
    // The origin's single child is the root; it is expanded by construction.
    nodes_.push_back(Node{mix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL), 1.0, 0.0, kOrigin, kRoot, -1, 1});
    nodes_.push_back(Node{derive_seed(seed, 0x726f6f74ULL), 1.0, 0.0, kOrigin, 0, 0, 0});
  }

  const ALaw& a_law() const { return a_law_; }
  const OffspringLaw& offspring_law() const { return offspring_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t node_budget() const { return budget_; }

  NodeId parent(NodeId v) const { return nodes_[v].parent; }
  int depth(NodeId v) const { return nodes_[v].depth; }
  // A(v); the root and the origin carry no mark and report 1.
  double mark(NodeId v) const { return nodes_[v].mark; }
  bool expanded(NodeId v) const { return nodes_[v].child_count != 0; }

  int offspring(NodeId v) {
    ensure_expanded(v);
    return static_cast<int>(nodes_[v].child_count);
  }

  // i is zero-based here; addresses use one-based child indices.
  NodeId child(NodeId v, int i) {
    ensure_expanded(v);
    if (i < 0 || static_cast<std::uint32_t>(i) >= nodes_[v].child_count)
      throw std::out_of_range("child index out of range");
    return nodes_[v].first_child + static_cast<NodeId>(i);
  }

  // Position of v among its siblings (zero-based).
  int child_index(NodeId v) const {
    if (v == kOrigin) return -1;
    if (v == kRoot) return 0;
    return static_cast<int>(v - nodes_[nodes_[v].parent].first_child);
  }

  NodeRecord expand(NodeId v) {
    NodeRecord r;
    if (v == kOrigin) {
      r.offspring = 1;
      r.p_parent = 0.0;
      r.p_children = {1.0};
      return r;
    }
    ensure_expanded(v);
    const Node& n = nodes_[v];
    const double denom = 1.0 + n.child_mark_sum;
    r.offspring = static_cast<int>(n.child_count);
    r.p_parent = 1.0 / denom;
    for (std::uint32_t i = 0; i < n.child_count; ++i) {
      const double a = nodes_[n.first_child + i].mark;
      r.marks.push_back(a);
      r.p_children.push_back(a / denom);
    }
    return r;
  }

  // omega(v, parent(v)) and omega(v, child i).
  double p_parent(NodeId v) {
    if (v == kOrigin) return 0.0;
    ensure_expanded(v);
    return 1.0 / (1.0 + nodes_[v].child_mark_sum);
  }

  // One quenched step from v driven by the uniform u in [0, 1).
  NodeId step(NodeId v, double u) {
    if (v == kOrigin) return kRoot;
    ensure_expanded(v);
    const Node& n = nodes_[v];
    double x = u * (1.0 + n.child_mark_sum);
    if (x < 1.0) return n.parent;
    x -= 1.0;
    const NodeId last = n.first_child + n.child_count - 1;
    for (NodeId c = n.first_child; c < last; ++c) {
      x -= nodes_[c].mark;
      if (x < 0.0) return c;
    }
    return last;
  }

  // One-based child indices from the root; empty for the root itself.
  std::vector<std::uint32_t> address(NodeId v) const {
    if (v == kOrigin) throw std::invalid_argument("the origin has no address");
    std::vector<std::uint32_t> out;
    while (v != kRoot) {
      out.push_back(static_cast<std::uint32_t>(child_index(v) + 1));
      v = nodes_[v].parent;
    }
    return {out.rbegin(), out.rend()};
  }

  NodeId find(const std::vector<std::uint32_t>& address) {
    NodeId v = kRoot;
    for (std::uint32_t i : address) {
      if (i == 0 || static_cast<int>(i) > offspring(v))
        throw std::out_of_range("address component exceeds the offspring count");
      v = child(v, static_cast<int>(i) - 1);
    }
    return v;
  }

  // x <= y in the genealogical order.
  bool is_ancestor(NodeId x, NodeId y) const {
    if (x == kOrigin) return true;
    while (depth(y) > depth(x)) y = nodes_[y].parent;
    return x == y;
  }

  // nu(u, n): descendants of u exactly n generations below it.
  std::uint64_t count_descendants(NodeId u, int n) {
    if (n < 0) throw std::invalid_argument("generation offset must be non-negative");
    if (n == 0) return 1;
    std::vector<NodeId> level{u};
    for (int k = 1; k < n; ++k) {
      std::vector<NodeId> next;
      for (NodeId v : level) {
        const int nu = offspring(v);
        for (int i = 0; i < nu; ++i) next.push_back(nodes_[v].first_child + i);
      }
      level.swap(next);
    }
    std::uint64_t count = 0;
    for (NodeId v : level) count += static_cast<std::uint64_t>(offspring(v));
    return count;
  }

  std::uint64_t generation_size(int n) { return count_descendants(kRoot, n); }

  // Debug dump: "address TAB nu TAB marks..." for every expanded vertex.
  void dump(std::ostream& os) const {
    for (NodeId v = kRoot; v < nodes_.size(); ++v) {
      const Node& n = nodes_[v];
      if (n.child_count == 0) continue;
      std::string addr;
      for (auto i : address(v)) addr += (addr.empty() ? "" : ".") + std::to_string(i);
      os << (addr.empty() ? "e" : addr) << '\t' << n.child_count;
      char buf[32];
      for (std::uint32_t i = 0; i < n.child_count; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", nodes_[n.first_child + i].mark);
        os << '\t' << buf;
      }
      os << '\n';
    }
  }

 private:
  struct Node {
    std::uint64_t key;
    double mark;
    double child_mark_sum;
    NodeId parent;
    NodeId first_child;
    std::int32_t depth;
    std::uint32_t child_count;  // 0 until expanded; nu >= 1 afterwards
  };

  void ensure_expanded(NodeId v) {
    if (nodes_[v].child_count != 0) return;
    Rng stream(nodes_[v].key);
    const int nu = offspring_.sample(stream);
    if (nodes_.size() + static_cast<std::size_t>(nu) > budget_)
      throw BudgetExceeded("tree exceeded its node budget of " + std::to_string(budget_));
    const auto first = static_cast<NodeId>(nodes_.size());
    const std::uint64_t key = nodes_[v].key;
    const std::int32_t depth = nodes_[v].depth + 1;
    double sum = 0.0;
    for (int i = 0; i < nu; ++i) {
      const double a = a_law_.sample(stream);
      sum += a;
      nodes_.push_back(Node{derive_seed(key, static_cast<std::uint64_t>(i) + 1), a, 0.0, v, 0,
                            depth, 0});
    }
    Node& n = nodes_[v];
    n.first_child = first;
    n.child_count = static_cast<std::uint32_t>(nu);
    n.child_mark_sum = sum;
  }

  ALaw a_law_;
  OffspringLaw offspring_;
  std::uint64_t seed_;
  std::size_t budget_;
  std::vector<Node> nodes_;
};

}  // namespace rwre
