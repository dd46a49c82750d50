#include "sogtok/scaffold.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "sogtok/error.hpp"

namespace sogtok {
namespace {

std::vector<std::size_t> triangle_counts(const Graph& g) {
  std::vector<std::size_t> counts(g.num_nodes(), 0);
  for (const Edge& e : g.edges()) {
    const auto& nu = g.neighbors(e.u);
    const auto& nv = g.neighbors(e.v);
    std::vector<NodeIndex> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    for (NodeIndex w : common) {
      // count each triangle once, from the edge joining its two lowest nodes
      if (w > e.v) {
        ++counts[e.u];
        ++counts[e.v];
        ++counts[w];
      }
    }
  }
  return counts;
}

template <typename T>
void join(std::ostringstream& out, const std::vector<T>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << '.';
    out << values[i];
  }
}

}  // namespace

std::string invariant_key(const Graph& g) {
  auto tri = triangle_counts(g);
  std::sort(tri.begin(), tri.end());
  std::ostringstream out;
  out << "n" << g.num_nodes() << "|m" << g.num_edges() << "|d";
  join(out, degree_multiset(g));
  out << "|t";
  join(out, tri);
  return out.str();
}

Scaffold murcko_scaffold(const Graph& g) {
  if (g.has_global_node()) {
    throw Error(ErrorCode::kInvalidGraph, "scaffold extraction expects a graph without global node");
  }
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> degree(n);
  std::vector<bool> removed(n, false);
  std::vector<NodeIndex> stack;
  for (NodeIndex i = 0; i < n; ++i) {
    degree[i] = g.degree(i);
    if (degree[i] <= 1) stack.push_back(i);
  }
  while (!stack.empty()) {
    const NodeIndex u = stack.back();
    stack.pop_back();
    if (removed[u]) continue;
    removed[u] = true;
    for (NodeIndex v : g.neighbors(u)) {
      if (removed[v]) continue;
      if (--degree[v] == 1) stack.push_back(v);
    }
  }

  Scaffold scaffold;
  std::vector<NodeIndex> new_of(n, kUnreachable);
  for (NodeIndex i = 0; i < n; ++i) {
    if (!removed[i]) {
      new_of[i] = scaffold.original_of.size();
      scaffold.original_of.push_back(i);
    }
  }
  if (scaffold.original_of.empty()) {
    scaffold.canonical_key = kEmptyScaffoldKey;
    return scaffold;
  }
  Graph::Spec spec;
  spec.id = g.id();
  for (NodeIndex old : scaffold.original_of) spec.nodes.push_back(g.nodes()[old]);
  for (const Edge& e : g.edges()) {
    if (!removed[e.u] && !removed[e.v]) spec.edges.push_back(Edge{new_of[e.u], new_of[e.v]});
  }
  spec.graph_text = g.graph_text();
  spec.label = g.label();
  scaffold.graph = Graph::create(std::move(spec), n);
  scaffold.canonical_key = invariant_key(*scaffold.graph);
  return scaffold;
}

bool are_isomorphic(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges()) return false;
  if (invariant_key(a) != invariant_key(b)) return false;
  const std::size_t n = a.num_nodes();
  const auto tri_a = triangle_counts(a);
  const auto tri_b = triangle_counts(b);

  // Match a's nodes in order of decreasing degree.
  std::vector<NodeIndex> order(n);
  for (NodeIndex i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeIndex x, NodeIndex y) { return a.degree(x) > a.degree(y); });

  std::vector<NodeIndex> map_ab(n, kUnreachable);
  std::vector<bool> used_b(n, false);

  std::function<bool(std::size_t)> extend = [&](std::size_t depth) -> bool {
    if (depth == n) return true;
    const NodeIndex u = order[depth];
    for (NodeIndex v = 0; v < n; ++v) {
      if (used_b[v] || a.degree(u) != b.degree(v) || tri_a[u] != tri_b[v]) continue;
      bool consistent = true;
      for (std::size_t k = 0; k < depth && consistent; ++k) {
        const NodeIndex w = order[k];
        consistent = a.has_edge(u, w) == b.has_edge(v, map_ab[w]);
      }
      if (!consistent) continue;
      map_ab[u] = v;
      used_b[v] = true;
      if (extend(depth + 1)) return true;
      used_b[v] = false;
      map_ab[u] = kUnreachable;
    }
    return false;
  };
  return extend(0);
}

ScaffoldGrouping group_scaffolds(std::span<const Scaffold> scaffolds, std::size_t exact_limit) {
  ScaffoldGrouping result;
  result.group_of.assign(scaffolds.size(), 0);
  // key -> representatives (scaffold index) of the isomorphism classes seen so far
  std::map<std::string, std::vector<std::size_t>> classes;
  std::map<std::size_t, std::size_t> group_of_rep;

  for (std::size_t i = 0; i < scaffolds.size(); ++i) {
    auto& reps = classes[scaffolds[i].canonical_key];
    std::optional<std::size_t> match;
    for (std::size_t rep : reps) {
      const auto& x = scaffolds[i];
      const auto& y = scaffolds[rep];
      if (x.empty() || y.empty()) {
        match = rep;
        break;
      }
      if (x.graph->num_nodes() > exact_limit || are_isomorphic(*x.graph, *y.graph)) {
        match = rep;
        break;
      }
    }
    if (match) {
      result.group_of[i] = group_of_rep[*match];
      continue;
    }
    if (!reps.empty()) ++result.key_collisions;
    reps.push_back(i);
    group_of_rep[i] = result.group_count;
    result.group_of[i] = result.group_count++;
  }
  return result;
}

}  // namespace sogtok
