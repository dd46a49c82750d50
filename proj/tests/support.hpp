// Generators and independent reference implementations used by the tests.
// Nothing here calls into the library's numerical code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sogtok/graph.hpp"
#include "sogtok/random.hpp"

namespace sogtok::testing {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense to_dense(const Matrix& m) {
  Dense d = zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  }
  return d;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  Dense c = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < c[i].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

inline Dense transpose(const Dense& a) {
  Dense t = zeros(a.empty() ? 0 : a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal(0.0, scale);
  }
  return m;
}

// Erdos-Renyi graph on n nodes.
inline Graph random_graph(std::size_t n, double p, Rng& rng, const std::string& id = "g") {
  std::vector<Edge> edges;
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = a + 1; b < n; ++b) {
      if (rng.uniform() < p) edges.push_back({a, b});
    }
  }
  return Graph::from_edges(n, edges, id);
}

inline Graph random_connected_graph(std::size_t n, double p, Rng& rng, const std::string& id = "g") {
  // random spanning tree plus extra edges
  std::vector<Edge> edges;
  for (NodeIndex v = 1; v < n; ++v) edges.push_back({rng.index(v), v});
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = a + 1; b < n; ++b) {
      if (rng.uniform() < p) edges.push_back({a, b});
    }
  }
  return Graph::from_edges(n, edges, id);
}

inline Graph cycle_graph(std::size_t n, const std::string& id) {
  std::vector<Edge> edges;
  for (NodeIndex k = 0; k < n; ++k) edges.push_back({k, (k + 1) % n});
  return Graph::from_edges(n, edges, id);
}

inline Graph star_graph(std::size_t n, const std::string& id) {
  std::vector<Edge> edges;
  for (NodeIndex k = 1; k < n; ++k) edges.push_back({0, k});
  return Graph::from_edges(n, edges, id);
}

// Complete graph minus `drop` random edges.
inline Graph near_clique(std::size_t n, std::size_t drop, Rng& rng, const std::string& id) {
  std::vector<Edge> edges;
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = a + 1; b < n; ++b) edges.push_back({a, b});
  }
  for (std::size_t d = 0; d < drop && !edges.empty(); ++d) {
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(rng.index(edges.size())));
  }
  return Graph::from_edges(n, edges, id);
}

struct SyntheticSet {
  std::vector<Graph> graphs;
  std::vector<int> family;  // 0 cycle, 1 star, 2 near-clique
};

// `per_family` cycles, stars and near-cliques with 6..12 nodes.
inline SyntheticSet synthetic_families(std::size_t per_family, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticSet set;
  for (int f = 0; f < 3; ++f) {
    for (std::size_t i = 0; i < per_family; ++i) {
      const std::size_t n = 6 + rng.index(7);
      const std::string id = "f" + std::to_string(f) + "_" + std::to_string(i);
      if (f == 0) set.graphs.push_back(cycle_graph(n, id));
      if (f == 1) set.graphs.push_back(star_graph(n, id));
      if (f == 2) set.graphs.push_back(near_clique(n, 1 + rng.index(2), rng, id));
      set.family.push_back(f);
    }
  }
  return set;
}

// |a - f| / max(|a|, |f|, floor): relative error with a floor so that entries
// where both values vanish are judged on absolute error.
inline double relative_error(double a, double f, double floor = 1e-7) {
  return std::abs(a - f) / std::max({std::abs(a), std::abs(f), floor});
}

}  // namespace sogtok::testing
