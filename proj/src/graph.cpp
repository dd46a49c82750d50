#include "sogtok/graph.hpp"

#include <algorithm>
#include <deque>

#include "sogtok/error.hpp"

namespace sogtok {

Graph Graph::create(Spec spec, std::size_t max_nodes) {
  if (spec.nodes.size() > max_nodes) {
    throw Error(ErrorCode::kGraphTooLarge,
                "graph '" + spec.id + "' has " + std::to_string(spec.nodes.size()) +
                    " nodes, limit is " + std::to_string(max_nodes));
  }
  return build(std::move(spec), max_nodes);
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges, std::string id) {
  Spec spec;
  spec.id = std::move(id);
  spec.nodes.resize(n);
  spec.edges.assign(edges.begin(), edges.end());
  return create(std::move(spec), std::max(n, kDefaultMaxNodes));
}

Graph Graph::build(Spec spec, std::size_t /*max_nodes*/) {
  const std::size_t n = spec.nodes.size();
  if (n == 0) {
    throw Error(ErrorCode::kInvalidGraph, "graph '" + spec.id + "' has no nodes");
  }

  Graph g;
  g.id_ = std::move(spec.id);
  g.label_ = spec.label;
  g.graph_text_ = std::move(spec.graph_text);
  g.nodes_ = std::move(spec.nodes);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes_[i].index = i;
    if (g.nodes_[i].is_global) {
      if (g.global_) {
        throw Error(ErrorCode::kInvalidGraph, "graph '" + g.id_ + "' has two global nodes");
      }
      g.global_ = i;
    }
  }

  g.edges_.reserve(spec.edges.size());
  for (Edge e : spec.edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorCode::kInvalidGraph,
                  "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                      ") out of range in graph '" + g.id_ + "'");
    }
    if (e.u == e.v) {
      throw Error(ErrorCode::kInvalidGraph,
                  "self-loop on node " + std::to_string(e.u) + " in graph '" + g.id_ + "'");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    g.edges_.push_back(e);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.adjacency_.assign(n, {});
  for (const Edge& e : g.edges_) {
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : g.adjacency_) std::sort(list.begin(), list.end());

  if (g.global_ && g.adjacency_[*g.global_].size() != n - 1) {
    throw Error(ErrorCode::kInvalidGraph,
                "global node of graph '" + g.id_ + "' is not adjacent to every node");
  }
  return g;
}

bool Graph::has_edge(NodeIndex a, NodeIndex b) const {
  if (a >= nodes_.size() || b >= nodes_.size()) return false;
  const auto& list = adjacency_[a];
  return std::binary_search(list.begin(), list.end(), b);
}

Graph Graph::with_label(std::optional<int> label) const {
  Graph copy = *this;
  copy.label_ = label;
  return copy;
}

Graph Graph::with_id(std::string id) const {
  Graph copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

bool Graph::operator==(const Graph& other) const {
  return id_ == other.id_ && nodes_ == other.nodes_ && edges_ == other.edges_ &&
         label_ == other.label_ && graph_text_ == other.graph_text_;
}

Matrix build_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) {
    a(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = 1.0;
    a(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = 1.0;
  }
  return a;
}

Graph augment_with_global_node(const Graph& g) {
  if (g.has_global_node()) {
    throw Error(ErrorCode::kAlreadyAugmented, "graph '" + g.id() + "' already has a global node");
  }
  const std::size_t n = g.num_nodes();
  Graph::Spec spec;
  spec.id = g.id();
  spec.nodes = g.nodes();
  spec.nodes.push_back(NodeRecord{n, std::nullopt, true});
  spec.edges = g.edges();
  for (NodeIndex i = 0; i < n; ++i) spec.edges.push_back(Edge{i, n});
  spec.label = g.label();
  spec.graph_text = g.graph_text();
  return Graph::create(std::move(spec), n + 1);
}

Graph permute(const Graph& g, std::span<const NodeIndex> perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) {
    throw Error(ErrorCode::kInvalidPermutation,
                "permutation has " + std::to_string(perm.size()) + " entries, graph has " +
                    std::to_string(n) + " nodes");
  }
  std::vector<bool> seen(n, false);
  for (NodeIndex p : perm) {
    if (p >= n || seen[p]) {
      throw Error(ErrorCode::kInvalidPermutation, "permutation is not a bijection");
    }
    seen[p] = true;
  }

  Graph::Spec spec;
  spec.id = g.id();
  spec.nodes.resize(n);
  for (NodeIndex i = 0; i < n; ++i) spec.nodes[perm[i]] = g.nodes()[i];
  spec.edges.reserve(g.num_edges());
  for (const Edge& e : g.edges()) spec.edges.push_back(Edge{perm[e.u], perm[e.v]});
  spec.label = g.label();
  spec.graph_text = g.graph_text();
  return Graph::create(std::move(spec), n);
}

std::vector<std::size_t> bfs_distances(const Graph& g, NodeIndex source) {
  std::vector<std::size_t> dist(g.num_nodes(), kUnreachable);
  std::deque<NodeIndex> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeIndex u = queue.front();
    queue.pop_front();
    for (NodeIndex v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

EgoGraph ego_graph(const Graph& g, NodeIndex center, std::size_t hops) {
  if (center >= g.num_nodes()) {
    throw Error(ErrorCode::kNodeOutOfRange,
                "center " + std::to_string(center) + " outside graph '" + g.id() + "' of " +
                    std::to_string(g.num_nodes()) + " nodes");
  }
  if (g.has_global_node()) {
    throw Error(ErrorCode::kInvalidGraph, "ego-graph extraction expects a graph without global node");
  }
  const auto dist = bfs_distances(g, center);

  EgoGraph ego{Graph::from_edges(1, {}), {center}};
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    if (i != center && dist[i] != kUnreachable && dist[i] <= hops) ego.original_of.push_back(i);
  }
  std::vector<NodeIndex> new_of(g.num_nodes(), kUnreachable);
  for (NodeIndex k = 0; k < ego.original_of.size(); ++k) new_of[ego.original_of[k]] = k;

  Graph::Spec spec;
  spec.id = g.id() + "#" + std::to_string(center);
  for (NodeIndex old : ego.original_of) spec.nodes.push_back(g.nodes()[old]);
  for (const Edge& e : g.edges()) {
    if (new_of[e.u] != kUnreachable && new_of[e.v] != kUnreachable) {
      spec.edges.push_back(Edge{new_of[e.u], new_of[e.v]});
    }
  }
  spec.label = g.label();
  ego.graph = Graph::create(std::move(spec), g.num_nodes());
  return ego;
}

std::size_t diameter(const Graph& g) {
  std::size_t best = 0;
  for (NodeIndex s = 0; s < g.num_nodes(); ++s) {
    for (std::size_t d : bfs_distances(g, s)) {
      if (d != kUnreachable) best = std::max(best, d);
    }
  }
  return best;
}

std::vector<std::size_t> degree_multiset(const Graph& g) {
  std::vector<std::size_t> degrees(g.num_nodes());
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) degrees[i] = g.degree(i);
  std::sort(degrees.begin(), degrees.end());
  return degrees;
}

bool is_connected(const Graph& g) {
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](std::size_t d) { return d == kUnreachable; });
}

}  // namespace sogtok
