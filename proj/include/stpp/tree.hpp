#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stpp/graph.hpp"

namespace stpp {

enum class TreeKind { pull, push };

// A spanning arborescence rooted at `root`.
//   pull: link[i] is the parent of i; edge (link[i], i) carries values
//         from the root outward.
//   push: link[i] is the unique child of i; edge (i, link[i]) carries
//         values toward the root.
// link[root] = 0 in both cases, depth[i] counts links on the path to root.
struct SpanningTree {
  int n = 0;
  int root = 1;
  TreeKind kind = TreeKind::pull;
  std::vector<int> link;   // size n + 1, entry 0 unused
  std::vector<int> depth;  // size n + 1, entry 0 unused

  int diameter() const {
    int d = 0;
    for (int i = 1; i <= n; ++i) d = std::max(d, depth[i]);
    return d;
  }

  // Nodes grouped by what they feed: for a pull tree, children[j] lists the
  // nodes whose parent is j; for a push tree it lists the nodes whose child
  // is j (the nodes pushing into j). Sorted ascending.
  std::vector<std::vector<int>> fan_in() const {
    std::vector<std::vector<int>> f(n + 1);
    for (int i = 1; i <= n; ++i)
      if (i != root) f[link[i]].push_back(i);
    return f;
  }
};

// Shortest-path tree of parent links: every non-root node picks, among its
// in-neighbors one BFS layer closer to the root, the one with the lowest id.
inline SpanningTree extract_pull_tree(const DirectedGraph& g, int root = 1) {
  auto dist = bfs_distances(g, root, false);
  for (int i = 1; i <= g.size(); ++i)
    if (dist[i] < 0)
      throw std::invalid_argument("pull tree: graph not reachable from root");
  SpanningTree t;
  t.n = g.size();
  t.root = root;
  t.kind = TreeKind::pull;
  t.link.assign(t.n + 1, 0);
  t.depth.assign(t.n + 1, 0);
  for (int i = 1; i <= t.n; ++i) {
    t.depth[i] = dist[i];
    if (i == root) continue;
    int best = 0;
    for (int j : g.in_neighbors(i)) {
      if (dist[j] == dist[i] - 1) {
        best = j;
        break;  // in-neighbors are sorted, first hit is the lowest id
      }
    }
    t.link[i] = best;
  }
  return t;
}

// Shortest-path tree of child links: BFS on the reversed graph, so depth[i]
// is the length of the shortest directed path from i to the root. Each
// non-root node picks its lowest-id out-neighbor one layer closer.
inline SpanningTree extract_push_tree(const DirectedGraph& g, int root = 1) {
  auto dist = bfs_distances(g, root, true);
  for (int i = 1; i <= g.size(); ++i)
    if (dist[i] < 0)
      throw std::invalid_argument("push tree: root not reachable from graph");
  SpanningTree t;
  t.n = g.size();
  t.root = root;
  t.kind = TreeKind::push;
  t.link.assign(t.n + 1, 0);
  t.depth.assign(t.n + 1, 0);
  for (int i = 1; i <= t.n; ++i) {
    t.depth[i] = dist[i];
    if (i == root) continue;
    int best = 0;
    for (int j : g.out_neighbors(i)) {
      if (dist[j] == dist[i] - 1) {
        best = j;
        break;
      }
    }
    t.link[i] = best;
  }
  return t;
}

// counts[k] = number of nodes within depth k of the root, k = 0..diameter.
// avg = (1/n) * sum_{k=0}^{diameter-1} (n - counts[k]); zero for n = 1.
struct TreeStats {
  int diameter = 0;
  std::vector<int> counts;
  double avg = 0.0;
};

inline TreeStats tree_stats(const SpanningTree& t) {
  TreeStats s;
  s.diameter = t.diameter();
  s.counts.assign(s.diameter + 1, 0);
  for (int i = 1; i <= t.n; ++i)
    for (int k = t.depth[i]; k <= s.diameter; ++k) s.counts[k] += 1;
  double acc = 0.0;
  for (int k = 0; k < s.diameter; ++k) acc += t.n - s.counts[k];
  s.avg = acc / t.n;
  return s;
}

struct TreePair {
  SpanningTree pull;
  SpanningTree push;
  TreeStats pull_stats;
  TreeStats push_stats;
};

inline TreePair extract_trees(const DirectedGraph& g, int root = 1) {
  if (!check_strongly_connected(g))
    throw std::invalid_argument("tree extraction: graph not strongly connected");
  TreePair p;
  p.pull = extract_pull_tree(g, root);
  p.push = extract_push_tree(g, root);
  p.pull_stats = tree_stats(p.pull);
  p.push_stats = tree_stats(p.push);
  return p;
}

}  // namespace stpp
