#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sogtok {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using NodeIndex = std::size_t;

inline constexpr std::size_t kDefaultMaxNodes = 512;
inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

struct NodeRecord {
  NodeIndex index = 0;
  std::optional<std::string> text;
  bool is_global = false;

  bool operator==(const NodeRecord&) const = default;
};

// Undirected edge stored with u < v.
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;

  auto operator<=>(const Edge&) const = default;
};

// Immutable simple undirected graph. Construction normalizes edges (u < v,
// sorted, duplicates dropped) and rejects anything that violates the graph
// invariants, so every Graph value in the program is valid.
class Graph {
 public:
  struct Spec {
    std::string id;
    std::vector<NodeRecord> nodes;
    std::vector<Edge> edges;  // any orientation; normalized on construction
    std::optional<int> label;
    std::optional<std::string> graph_text;
  };

  static Graph create(Spec spec, std::size_t max_nodes = kDefaultMaxNodes);

  // n plain nodes with the given edges.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges, std::string id = {});

  const std::string& id() const { return id_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::optional<int>& label() const { return label_; }
  const std::optional<std::string>& graph_text() const { return graph_text_; }

  std::optional<NodeIndex> global_node() const { return global_; }
  bool has_global_node() const { return global_.has_value(); }

  // Sorted neighbour list of node i.
  const std::vector<NodeIndex>& neighbors(NodeIndex i) const { return adjacency_[i]; }
  std::size_t degree(NodeIndex i) const { return adjacency_[i].size(); }
  bool has_edge(NodeIndex a, NodeIndex b) const;

  Graph with_label(std::optional<int> label) const;
  Graph with_id(std::string id) const;

  bool operator==(const Graph& other) const;

 private:
  Graph() = default;
  static Graph build(Spec spec, std::size_t max_nodes);

  std::string id_;
  std::vector<NodeRecord> nodes_;
  std::vector<Edge> edges_;
  std::optional<int> label_;
  std::optional<std::string> graph_text_;
  std::optional<NodeIndex> global_;
  std::vector<std::vector<NodeIndex>> adjacency_;
};

// Dense symmetric 0/1 matrix with zero diagonal.
Matrix build_adjacency(const Graph& g);

// Adds node |V| flagged global and joins it to every original node.
// Throws AlreadyAugmented if g already has a global node.
Graph augment_with_global_node(const Graph& g);

// perm[i] is the new index of old node i. Throws InvalidPermutation unless
// perm is a bijection on [0, |V|).
Graph permute(const Graph& g, std::span<const NodeIndex> perm);

struct EgoGraph {
  Graph graph;                          // center is node 0
  std::vector<NodeIndex> original_of;   // new index -> index in the source graph
};

// Induced subgraph on nodes within `hops` of center. Remaining nodes keep
// their relative original order after the center.
EgoGraph ego_graph(const Graph& g, NodeIndex center, std::size_t hops);

// BFS hop counts from source; kUnreachable for other components.
std::vector<std::size_t> bfs_distances(const Graph& g, NodeIndex source);

// Largest finite shortest-path distance over all pairs.
std::size_t diameter(const Graph& g);

std::vector<std::size_t> degree_multiset(const Graph& g);

bool is_connected(const Graph& g);

}  // namespace sogtok
