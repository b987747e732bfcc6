#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "compactseg/errors.hpp"

namespace compactseg {

/// Boykov-Kolmogorov augmenting-path max-flow with search-tree reuse.
///
/// Nodes are created up front; terminal capacities and pairs of directed
/// arcs are added before a single call to maxflow(). After the solve,
/// in_source_set(i) tells which side of the minimum cut node i ended on.
class MaxFlowGraph {
 public:
  explicit MaxFlowGraph(int num_nodes, int expected_edges = 0) : nodes_(static_cast<std::size_t>(num_nodes)) {
    arcs_.reserve(static_cast<std::size_t>(2 * expected_edges));
  }

  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes_.size()); }

  /// Adds source->i capacity and i->sink capacity. Repeated calls accumulate.
  void add_terminal_weights(int i, double source_cap, double sink_cap) {
    if (source_cap < 0.0 || sink_cap < 0.0) throw ConfigError("negative terminal capacity");
    Node& n = node(i);
    // Only the difference matters for the cut; the common part is flow that
    // passes straight through.
    const double through = std::min(source_cap, sink_cap);
    flow_ += through;
    n.terminal_cap += (source_cap - through) - (sink_cap - through);
  }

  /// Arc i->j with capacity cap and j->i with capacity rev_cap.
  void add_edge(int i, int j, double cap, double rev_cap) {
    if (cap < 0.0 || rev_cap < 0.0) throw ConfigError("negative edge capacity");
    if (i == j) throw ConfigError("self loop");
    node(i);
    node(j);
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({j, nodes_[static_cast<std::size_t>(i)].first, cap});
    nodes_[static_cast<std::size_t>(i)].first = a;
    arcs_.push_back({i, nodes_[static_cast<std::size_t>(j)].first, rev_cap});
    nodes_[static_cast<std::size_t>(j)].first = a + 1;
  }

  double maxflow() {
    init_trees();
    while (!active_.empty()) {
      const int i = active_.front();
      active_.pop_front();
      Node& ni = nodes_[static_cast<std::size_t>(i)];
      ni.queued = false;
      if (ni.tree == Tree::Free) continue;

      const int bridge = grow(i);
      if (bridge < 0) continue;

      augment(bridge);
      adopt_orphans();
      if (ni.tree != Tree::Free) activate(i);
    }
    return flow_;
  }

  [[nodiscard]] bool in_source_set(int i) const { return nodes_[static_cast<std::size_t>(i)].tree == Tree::Source; }

 private:
  enum class Tree : std::uint8_t { Free, Source, Sink };
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;

  struct Node {
    int first = kNone;     ///< head of the outgoing arc list
    int parent = kNone;    ///< arc toward the parent, or kTerminal / kOrphan
    double terminal_cap = 0.0;  ///< > 0: residual from source, < 0: residual to sink
    Tree tree = Tree::Free;
    bool queued = false;
  };

  struct Arc {
    int head;
    int next;
    double cap;  ///< residual capacity
  };

  Node& node(int i) {
    if (i < 0 || i >= num_nodes()) throw ConfigError("node index out of range");
    return nodes_[static_cast<std::size_t>(i)];
  }
  static int sister(int a) { return a ^ 1; }
  [[nodiscard]] int tail(int a) const { return arcs_[static_cast<std::size_t>(sister(a))].head; }
  Arc& arc(int a) { return arcs_[static_cast<std::size_t>(a)]; }

  void activate(int i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.queued) {
      n.queued = true;
      active_.push_back(i);
    }
  }

  void init_trees() {
    active_.clear();
    orphans_.clear();
    for (int i = 0; i < num_nodes(); ++i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      n.queued = false;
      if (n.terminal_cap > 0.0) {
        n.tree = Tree::Source;
        n.parent = kTerminal;
        activate(i);
      } else if (n.terminal_cap < 0.0) {
        n.tree = Tree::Sink;
        n.parent = kTerminal;
        activate(i);
      } else {
        n.tree = Tree::Free;
        n.parent = kNone;
      }
    }
  }

  /// Expands the tree containing i by one layer. Returns an arc from the
  /// source tree to the sink tree when the trees touch, otherwise kNone.
  int grow(int i) {
    const Tree t = nodes_[static_cast<std::size_t>(i)].tree;
    for (int a = nodes_[static_cast<std::size_t>(i)].first; a != kNone; a = arc(a).next) {
      const double residual = t == Tree::Source ? arc(a).cap : arc(sister(a)).cap;
      if (residual <= 0.0) continue;
      const int j = arc(a).head;
      Node& nj = nodes_[static_cast<std::size_t>(j)];
      if (nj.tree == Tree::Free) {
        nj.tree = t;
        nj.parent = sister(a);
        activate(j);
      } else if (nj.tree != t) {
        return t == Tree::Source ? a : sister(a);
      }
    }
    return kNone;
  }

  void make_orphan(int i) {
    nodes_[static_cast<std::size_t>(i)].parent = kOrphan;
    orphans_.push_back(i);
  }

  void augment(int bridge) {
    double bottleneck = arc(bridge).cap;
    // source side: flow runs parent -> child along sister(parent arc)
    int x = tail(bridge);
    for (int a; (a = nodes_[static_cast<std::size_t>(x)].parent) != kTerminal; x = arc(a).head) {
      bottleneck = std::min(bottleneck, arc(sister(a)).cap);
    }
    bottleneck = std::min(bottleneck, nodes_[static_cast<std::size_t>(x)].terminal_cap);
    // sink side: flow runs child -> parent along the parent arc
    x = arc(bridge).head;
    for (int a; (a = nodes_[static_cast<std::size_t>(x)].parent) != kTerminal; x = arc(a).head) {
      bottleneck = std::min(bottleneck, arc(a).cap);
    }
    bottleneck = std::min(bottleneck, -nodes_[static_cast<std::size_t>(x)].terminal_cap);

    arc(bridge).cap -= bottleneck;
    arc(sister(bridge)).cap += bottleneck;

    x = tail(bridge);
    for (int a; (a = nodes_[static_cast<std::size_t>(x)].parent) != kTerminal;) {
      const int next = arc(a).head;
      arc(a).cap += bottleneck;
      arc(sister(a)).cap -= bottleneck;
      if (arc(sister(a)).cap <= 0.0) make_orphan(x);
      x = next;
    }
    nodes_[static_cast<std::size_t>(x)].terminal_cap -= bottleneck;
    if (nodes_[static_cast<std::size_t>(x)].terminal_cap <= 0.0) make_orphan(x);

    x = arc(bridge).head;
    for (int a; (a = nodes_[static_cast<std::size_t>(x)].parent) != kTerminal;) {
      const int next = arc(a).head;
      arc(sister(a)).cap += bottleneck;
      arc(a).cap -= bottleneck;
      if (arc(a).cap <= 0.0) make_orphan(x);
      x = next;
    }
    nodes_[static_cast<std::size_t>(x)].terminal_cap += bottleneck;
    if (nodes_[static_cast<std::size_t>(x)].terminal_cap >= 0.0) make_orphan(x);

    flow_ += bottleneck;
  }

  /// True when following parents from j reaches a terminal without meeting
  /// an orphan.
  [[nodiscard]] bool rooted(int j) const {
    for (;;) {
      const int p = nodes_[static_cast<std::size_t>(j)].parent;
      if (p == kTerminal) return true;
      if (p == kOrphan || p == kNone) return false;
      j = arcs_[static_cast<std::size_t>(p)].head;
    }
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const int i = orphans_.back();
      orphans_.pop_back();
      Node& ni = nodes_[static_cast<std::size_t>(i)];
      const Tree t = ni.tree;

      int new_parent = kNone;
      for (int a = ni.first; a != kNone; a = arc(a).next) {
        const int j = arc(a).head;
        if (nodes_[static_cast<std::size_t>(j)].tree != t) continue;
        const double residual = t == Tree::Source ? arc(sister(a)).cap : arc(a).cap;
        if (residual <= 0.0) continue;
        if (rooted(j)) {
          new_parent = a;
          break;
        }
      }
      if (new_parent != kNone) {
        ni.parent = new_parent;
        continue;
      }

      // No valid parent: i leaves its tree and its children become orphans.
      for (int a = ni.first; a != kNone; a = arc(a).next) {
        const int j = arc(a).head;
        Node& nj = nodes_[static_cast<std::size_t>(j)];
        if (nj.tree != t) continue;
        const double residual = t == Tree::Source ? arc(sister(a)).cap : arc(a).cap;
        if (residual > 0.0) activate(j);
        if (nj.parent >= 0 && arc(nj.parent).head == i) make_orphan(j);
      }
      ni.tree = Tree::Free;
      ni.parent = kNone;
    }
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::vector<int> orphans_;
  double flow_ = 0.0;
};

}  // namespace compactseg
