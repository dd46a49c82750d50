#include "sogtok/attributes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <sstream>

#include "sogtok/error.hpp"
#include "sogtok/random.hpp"

namespace sogtok {

ImportanceStrategy ImportanceStrategy::parse(std::string_view name, std::uint64_t seed) {
  if (name == "degree") return degree();
  if (name == "pagerank") return pagerank();
  if (name == "betweenness") return betweenness();
  if (name == "random") return random(seed);
  throw Error(ErrorCode::kInvalidConfig, "unknown anchor strategy '" + std::string(name) + "'");
}

std::string ImportanceStrategy::name() const {
  switch (kind) {
    case Kind::kDegree: return "degree";
    case Kind::kPageRank: return "pagerank";
    case Kind::kBetweenness: return "betweenness";
    case Kind::kRandom: return "random";
  }
  return "degree";
}

namespace {

std::vector<double> pagerank_scores(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const double damping = 0.85;
  std::vector<double> rank(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < 100; ++iter) {
    double dangling = 0.0;
    for (NodeIndex i = 0; i < n; ++i) {
      if (g.degree(i) == 0) dangling += rank[i];
    }
    const double base = (1.0 - damping) / static_cast<double>(n) +
                        damping * dangling / static_cast<double>(n);
    std::fill(next.begin(), next.end(), base);
    for (NodeIndex i = 0; i < n; ++i) {
      if (g.degree(i) == 0) continue;
      const double share = damping * rank[i] / static_cast<double>(g.degree(i));
      for (NodeIndex j : g.neighbors(i)) next[j] += share;
    }
    double change = 0.0;
    for (NodeIndex i = 0; i < n; ++i) change += std::abs(next[i] - rank[i]);
    rank.swap(next);
    if (change < 1e-9) break;
  }
  return rank;
}

std::vector<double> betweenness_scores(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> centrality(n, 0.0);
  std::vector<std::vector<NodeIndex>> preds(n);
  std::vector<double> sigma(n);
  std::vector<long long> dist(n);
  std::vector<double> delta(n);
  std::vector<NodeIndex> order;
  order.reserve(n);

  for (NodeIndex s = 0; s < n; ++s) {
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<NodeIndex> queue{s};
    while (!queue.empty()) {
      const NodeIndex v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (NodeIndex w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeIndex w = *it;
      for (NodeIndex v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) centrality[w] += delta[w];
    }
  }
  // every unordered pair was accumulated from both endpoints
  for (double& c : centrality) c *= 0.5;
  return centrality;
}

// Scores are compared on a fixed grid so that ulp-level noise between
// symmetric nodes does not break ties arbitrarily.
long long quantize_score(double score) { return std::llround(score * 1e9); }

struct RankKey {
  long long score;
  std::vector<std::size_t> neighbor_degrees;  // sorted descending

  // true when this key ranks strictly ahead of `other`
  bool ahead_of(const RankKey& other) const {
    if (score != other.score) return score > other.score;
    return std::lexicographical_compare(other.neighbor_degrees.begin(), other.neighbor_degrees.end(),
                                        neighbor_degrees.begin(), neighbor_degrees.end());
  }
  bool ties_with(const RankKey& other) const {
    return score == other.score && neighbor_degrees == other.neighbor_degrees;
  }
};

constexpr std::array<const char*, 10> kOrdinals = {"first",   "second", "third", "fourth",
                                                   "fifth",   "sixth",  "seventh", "eighth",
                                                   "ninth",   "tenth"};

}  // namespace

std::vector<double> importance_scores(const Graph& g, const ImportanceStrategy& strategy) {
  if (g.has_global_node()) {
    throw Error(ErrorCode::kInvalidGraph, "importance is computed on graphs without global node");
  }
  const std::size_t n = g.num_nodes();
  switch (strategy.kind) {
    case ImportanceStrategy::Kind::kDegree: {
      std::vector<double> scores(n);
      for (NodeIndex i = 0; i < n; ++i) scores[i] = static_cast<double>(g.degree(i));
      return scores;
    }
    case ImportanceStrategy::Kind::kPageRank: return pagerank_scores(g);
    case ImportanceStrategy::Kind::kBetweenness: return betweenness_scores(g);
    case ImportanceStrategy::Kind::kRandom: {
      Rng rng(derive_seed(strategy.seed, "importance"));
      std::vector<double> scores(n);
      for (double& s : scores) s = rng.uniform();
      return scores;
    }
  }
  return {};
}

std::string hop_phrase(std::size_t hop) {
  if (hop >= 1 && hop <= kOrdinals.size()) return std::string(kOrdinals[hop - 1]) + "-hop neighbor";
  return std::to_string(hop) + "-th-hop neighbor";
}

StructuralAttributeMap assign_attributes(const Graph& g, const ImportanceStrategy& strategy) {
  const auto scores = importance_scores(g, strategy);
  const std::size_t n = g.num_nodes();

  std::vector<RankKey> keys(n);
  for (NodeIndex i = 0; i < n; ++i) {
    keys[i].score = quantize_score(scores[i]);
    for (NodeIndex j : g.neighbors(i)) keys[i].neighbor_degrees.push_back(g.degree(j));
    std::sort(keys[i].neighbor_degrees.begin(), keys[i].neighbor_degrees.end(), std::greater<>());
  }
  auto before = [&](NodeIndex a, NodeIndex b) {
    if (keys[a].ahead_of(keys[b])) return true;
    if (keys[b].ahead_of(keys[a])) return false;
    return a < b;
  };

  StructuralAttributeMap attrs;
  for (NodeIndex i = 1; i < n; ++i) {
    if (before(i, attrs.anchor)) attrs.anchor = i;
  }
  for (NodeIndex i = 0; i < n; ++i) {
    if (i != attrs.anchor && keys[i].ties_with(keys[attrs.anchor])) attrs.strictly_ranked = false;
  }

  attrs.hop_of = bfs_distances(g, attrs.anchor);
  attrs.rank_of.assign(n, 0);
  attrs.attribute_of.assign(n, "");

  // Group by hop; kUnreachable sorts last and forms the disconnected group.
  std::vector<NodeIndex> order(n);
  for (NodeIndex i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
    if (attrs.hop_of[a] != attrs.hop_of[b]) return attrs.hop_of[a] < attrs.hop_of[b];
    return before(a, b);
  });

  std::size_t rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const NodeIndex node = order[k];
    const std::size_t hop = attrs.hop_of[node];
    if (k == 0 || attrs.hop_of[order[k - 1]] != hop) {
      rank = 1;
    } else {
      ++rank;
      if (keys[order[k - 1]].ties_with(keys[node])) attrs.strictly_ranked = false;
    }
    attrs.rank_of[node] = rank;
    if (hop == 0) {
      attrs.attribute_of[node] = kAnchorAttribute;
    } else if (hop == kUnreachable) {
      attrs.attribute_of[node] = "disconnected node #" + std::to_string(rank);
    } else {
      attrs.attribute_of[node] = hop_phrase(hop) + " #" + std::to_string(rank);
    }
  }
  attrs.canonical_order = std::move(order);
  return attrs;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::uint64_t seed, std::size_t probes)
    : dimension_(dimension), seed_(seed), probes_(probes) {
  if (dimension == 0 || probes == 0) {
    throw Error(ErrorCode::kInvalidConfig, "hashing embedder needs positive dimension and probes");
  }
}

std::vector<std::string> split_attribute_tokens(std::string_view attribute) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : attribute) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vector HashingEmbedder::embed(std::string_view attribute) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dimension_));
  for (const auto& token : split_attribute_tokens(attribute)) {
    const std::uint64_t base = fnv1a64(token);
    for (std::size_t p = 0; p < probes_; ++p) {
      const std::uint64_t h = splitmix64(base ^ splitmix64(seed_ + p));
      const auto bucket = static_cast<Eigen::Index>(h % dimension_);
      v[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

std::string HashingEmbedder::describe() const {
  std::ostringstream out;
  out << "hashing(dim=" << dimension_ << ",seed=" << seed_ << ",probes=" << probes_ << ")";
  return out.str();
}

TableEmbedder::TableEmbedder(std::map<std::string, Vector> table, std::size_t dimension)
    : table_(table.begin(), table.end()), dimension_(dimension) {
  for (const auto& [key, vec] : table_) {
    if (static_cast<std::size_t>(vec.size()) != dimension_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "embedding for '" + key + "' has " + std::to_string(vec.size()) +
                      " values, expected " + std::to_string(dimension_));
    }
  }
}

TableEmbedder TableEmbedder::parse(std::string_view text, std::size_t dimension) {
  std::map<std::string, Vector> table;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kSyntaxError, "expected '<attribute>\\t<values>'", line_no, 1);
    }
    std::vector<double> values;
    std::istringstream fields(line.substr(tab + 1));
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kSyntaxError, "bad number '" + field + "'", line_no, tab + 2);
      }
    }
    if (values.size() != dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "row has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(dimension),
                  line_no, 1);
    }
    table[line.substr(0, tab)] = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  return TableEmbedder(std::move(table), dimension);
}

Vector TableEmbedder::embed(std::string_view attribute) const {
  const auto it = table_.find(attribute);
  if (it == table_.end()) {
    throw Error(ErrorCode::kMissingEmbedding, "no embedding for attribute '" + std::string(attribute) + "'");
  }
  return it->second;
}

std::string TableEmbedder::describe() const {
  return "table(dim=" + std::to_string(dimension_) + ",rows=" + std::to_string(table_.size()) + ")";
}

Matrix embed_attributes(const StructuralAttributeMap& attrs, const AttributeEmbedder& embedder,
                        bool include_global) {
  const std::size_t n = attrs.attribute_of.size();
  const std::size_t rows = n + (include_global ? 1 : 0);
  Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(embedder.dimension()));
  std::map<std::string_view, Vector> cache;
  auto row_for = [&](std::string_view s) -> const Vector& {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, embedder.embed(s)).first;
    return it->second;
  };
  for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) = row_for(attrs.attribute_of[i]);
  if (include_global) x.row(static_cast<Eigen::Index>(n)) = row_for(attrs.global_attribute);
  return x;
}

}  // namespace sogtok
