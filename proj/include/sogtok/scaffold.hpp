#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sogtok/graph.hpp"

namespace sogtok {

inline constexpr const char* kEmptyScaffoldKey = "EMPTY";

// Ring systems plus linkers: what remains after repeatedly deleting nodes of
// degree <= 1. An acyclic input gives an empty scaffold (no graph).
struct Scaffold {
  std::optional<Graph> graph;
  std::vector<NodeIndex> original_of;  // scaffold node -> input node
  std::string canonical_key;

  bool empty() const { return !graph.has_value(); }
};

Scaffold murcko_scaffold(const Graph& g);

// Isomorphism-invariant fingerprint: node count, edge count, sorted degree
// sequence and sorted per-node triangle counts. Equal for isomorphic graphs;
// unequal keys prove non-isomorphism, equal keys do not prove isomorphism.
std::string invariant_key(const Graph& g);

// Exact isomorphism test by backtracking with degree and triangle pruning.
bool are_isomorphic(const Graph& a, const Graph& b);

struct ScaffoldGrouping {
  std::vector<std::size_t> group_of;  // per input scaffold
  std::size_t group_count = 0;
  // Keys that were shared by scaffolds found to be non-isomorphic.
  std::size_t key_collisions = 0;
};

// Buckets scaffolds by canonical_key, then splits each bucket into exact
// isomorphism classes when both graphs have at most `exact_limit` nodes.
// Group ids follow first appearance.
ScaffoldGrouping group_scaffolds(std::span<const Scaffold> scaffolds, std::size_t exact_limit = 24);

}  // namespace sogtok
