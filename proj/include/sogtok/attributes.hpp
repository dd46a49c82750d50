#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/graph.hpp"

namespace sogtok {

struct ImportanceStrategy {
  enum class Kind { kDegree, kPageRank, kBetweenness, kRandom };

  Kind kind = Kind::kDegree;
  std::uint64_t seed = 0;  // used by kRandom only

  static ImportanceStrategy degree() { return {Kind::kDegree, 0}; }
  static ImportanceStrategy pagerank() { return {Kind::kPageRank, 0}; }
  static ImportanceStrategy betweenness() { return {Kind::kBetweenness, 0}; }
  static ImportanceStrategy random(std::uint64_t seed) { return {Kind::kRandom, seed}; }

  // "degree", "pagerank", "betweenness", "random" (random takes `seed`).
  static ImportanceStrategy parse(std::string_view name, std::uint64_t seed = 0);
  std::string name() const;

  bool operator==(const ImportanceStrategy&) const = default;
};

// Finite non-negative per-node scores.
//   degree      node degree
//   pagerank    damping 0.85, uniform teleport, dangling mass spread uniformly;
//               stops after 100 iterations or when the L1 change drops below 1e-9
//   betweenness exact Brandes accumulation over all sources (undirected, unnormalised)
//   random      uniform [0,1) draws from the strategy seed, one per node index
std::vector<double> importance_scores(const Graph& g, const ImportanceStrategy& strategy);

inline constexpr const char* kAnchorAttribute = "anchor node";
inline constexpr const char* kGlobalAttribute = "global summary node";

struct StructuralAttributeMap {
  NodeIndex anchor = 0;
  std::vector<std::size_t> hop_of;   // kUnreachable for nodes outside the anchor's component
  std::vector<std::size_t> rank_of;  // 1-based within the node's hop group
  std::vector<std::string> attribute_of;
  std::string global_attribute = kGlobalAttribute;
  // Nodes listed anchor first, then hop 1 by rank, hop 2 by rank, ..., then
  // disconnected nodes by rank.
  std::vector<NodeIndex> canonical_order;
  // True when the anchor and every within-hop position were decided without
  // falling back to the node index.
  bool strictly_ranked = true;
};

// "first-hop neighbor", ..., "tenth-hop neighbor", then "11-th-hop neighbor".
std::string hop_phrase(std::size_t hop);

// Anchor = most important node; nodes are grouped by BFS hop from the anchor
// and ranked within a hop by importance (descending), then by their sorted
// neighbour-degree list (lexicographically descending), then by index.
StructuralAttributeMap assign_attributes(const Graph& g, const ImportanceStrategy& strategy);

class AttributeEmbedder {
 public:
  virtual ~AttributeEmbedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual Vector embed(std::string_view attribute) const = 0;
  virtual std::string describe() const = 0;
};

// Signed feature hashing: the attribute is split on whitespace and '#', each
// token is hashed `probes` times into (bucket, sign) pairs, the signed counts
// are summed and the vector is L2-normalised.
class HashingEmbedder final : public AttributeEmbedder {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x534f47544f4b3031ULL;
  static constexpr std::size_t kDefaultProbes = 4;

  explicit HashingEmbedder(std::size_t dimension = 64, std::uint64_t seed = kDefaultSeed,
                           std::size_t probes = kDefaultProbes);

  std::size_t dimension() const override { return dimension_; }
  Vector embed(std::string_view attribute) const override;
  std::string describe() const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
  std::size_t probes_;
};

// Precomputed embeddings loaded from `attribute<TAB>v1,v2,...` lines.
class TableEmbedder final : public AttributeEmbedder {
 public:
  TableEmbedder(std::map<std::string, Vector> table, std::size_t dimension);

  // Throws DimensionMismatch when a row's width differs from `dimension`.
  static TableEmbedder parse(std::string_view text, std::size_t dimension);

  std::size_t dimension() const override { return dimension_; }
  // Throws MissingEmbedding for strings absent from the table.
  Vector embed(std::string_view attribute) const override;
  std::string describe() const override;

 private:
  std::map<std::string, Vector, std::less<>> table_;
  std::size_t dimension_;
};

std::vector<std::string> split_attribute_tokens(std::string_view attribute);

// Row i embeds attribute_of[i]; when include_global is set, one more row for
// the global node is appended.
Matrix embed_attributes(const StructuralAttributeMap& attrs, const AttributeEmbedder& embedder,
                        bool include_global = true);

}  // namespace sogtok
