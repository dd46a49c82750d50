#include <doctest.h>

#include <algorithm>

#include "sogtok/error.hpp"
#include "sogtok/graph.hpp"
#include "support.hpp"

using namespace sogtok;
using namespace sogtok::testing;

namespace {

Graph path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph::from_edges(n, e, "path");
}

Graph triangle() {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
  return Graph::from_edges(3, e, "tri");
}

}  // namespace

TEST_CASE("build_adjacency examples") {
  Matrix expect(3, 3);
  expect << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK(build_adjacency(path(3)) == expect);
  CHECK(build_adjacency(Graph::from_edges(1, {}, "one")) == Matrix::Zero(1, 1));
  Matrix tri = Matrix::Ones(3, 3);
  tri.diagonal().setZero();
  CHECK(build_adjacency(triangle()) == tri);
}

TEST_CASE("graph invariants are enforced on construction") {
  const std::vector<Edge> self{{1, 1}};
  CHECK_THROWS_AS(Graph::from_edges(2, self), Error);
  const std::vector<Edge> out_of_range{{0, 5}};
  CHECK_THROWS_AS(Graph::from_edges(2, out_of_range), Error);
  CHECK_THROWS_AS(Graph::from_edges(0, {}), Error);
  const std::vector<Edge> dup{{0, 1}, {1, 0}};
  CHECK(Graph::from_edges(2, dup).num_edges() == 1);
}

TEST_CASE("augment_with_global_node examples") {
  const Graph g = augment_with_global_node(path(3));
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_edges() == 5);
  CHECK(g.global_node() == NodeIndex{3});
  for (NodeIndex v = 0; v < 3; ++v) CHECK(g.has_edge(v, 3));
  CHECK(augment_with_global_node(Graph::from_edges(1, {})).num_edges() == 1);
  const Graph two = augment_with_global_node(Graph::from_edges(2, {}));
  CHECK(two.num_nodes() == 3);
  CHECK(two.num_edges() == 2);
  try {
    augment_with_global_node(g);
    FAIL("expected AlreadyAugmented");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAlreadyAugmented);
  }
}

TEST_CASE("augmentation adds one node and |V| edges") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const Graph g = random_graph(1 + rng.index(12), 0.3, rng);
    const Graph a = augment_with_global_node(g);
    CHECK(a.num_nodes() == g.num_nodes() + 1);
    CHECK(a.num_edges() == g.num_edges() + g.num_nodes());
  }
}

TEST_CASE("permute examples") {
  const Graph p = path(3);
  const std::vector<NodeIndex> id{0, 1, 2};
  CHECK(permute(p, id) == p);
  const std::vector<NodeIndex> rev{2, 1, 0};
  CHECK(degree_multiset(permute(p, rev)) == degree_multiset(p));
  const std::vector<NodeIndex> rot{1, 2, 0};
  CHECK(permute(triangle(), rot).num_edges() == 3);
  const std::vector<NodeIndex> bad{0, 0, 1};
  try {
    permute(p, bad);
    FAIL("expected InvalidPermutation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidPermutation);
  }
}

TEST_CASE("permuted adjacency equals P A P^T") {
  Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = 2 + rng.index(9);
    const Graph g = random_graph(n, 0.4, rng);
    const auto perm = rng.permutation(n);
    const Graph h = permute(g, perm);
    CHECK(degree_multiset(h) == degree_multiset(g));
    // node i of g becomes node perm[i] of h
    Matrix P = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) P(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(i)) = 1.0;
    CHECK(build_adjacency(h) == P * build_adjacency(g) * P.transpose());
  }
}

TEST_CASE("ego_graph examples") {
  const std::vector<Edge> star_edges{{0, 1}, {0, 2}, {0, 3}};
  const Graph star = Graph::from_edges(4, star_edges, "star");
  const EgoGraph leaf = ego_graph(star, 2, 2);
  CHECK(leaf.graph.num_nodes() == 4);
  CHECK(leaf.original_of[0] == 2);
  CHECK(ego_graph(star, 1, 0).graph.num_nodes() == 1);
  const EgoGraph p = ego_graph(path(5), 0, 2);
  CHECK(p.graph.num_nodes() == 3);
  CHECK(p.graph.num_edges() == 2);
  CHECK(p.original_of == std::vector<NodeIndex>{0, 1, 2});
  try {
    ego_graph(star, 9, 1);
    FAIL("expected NodeOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNodeOutOfRange);
  }
}

TEST_CASE("ego graph at the diameter covers the component") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Graph g = random_graph(2 + rng.index(10), 0.25, rng);
    const NodeIndex v = rng.index(g.num_nodes());
    const auto dist = bfs_distances(g, v);
    const std::size_t component = static_cast<std::size_t>(
        std::count_if(dist.begin(), dist.end(), [](std::size_t d) { return d != kUnreachable; }));
    CHECK(ego_graph(g, v, diameter(g)).graph.num_nodes() == component);
  }
}
