#include "sogtok/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sogtok/error.hpp"
#include "sogtok/random.hpp"

namespace sogtok {
namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double mean_purity(std::span<const std::size_t> tokens, std::span<const std::size_t> buckets,
                   std::vector<double>* per_bucket, std::size_t* counted) {
  std::map<std::size_t, std::map<std::size_t, std::size_t>> freq;
  std::map<std::size_t, std::size_t> size;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++freq[buckets[i]][tokens[i]];
    ++size[buckets[i]];
  }
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& [b, counts] : freq) {
    if (size[b] < 2) continue;
    std::size_t top = 0;
    for (const auto& [tok, c] : counts) top = std::max(top, c);
    const double purity = static_cast<double>(top) / static_cast<double>(size[b]);
    if (per_bucket) {
      if (per_bucket->size() <= b) per_bucket->resize(b + 1, 0.0);
      (*per_bucket)[b] = purity;
    }
    total += purity;
    ++n;
  }
  if (counted) *counted = n;
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace

PermutationReport permutation_consistency(const TokenizerModel& model, std::span<const Graph> graphs,
                                          std::size_t trials, const PermutationProvider& provider) {
  if (trials == 0) throw Error(ErrorCode::kInvalidConfig, "permutation consistency needs at least one trial");
  PermutationReport report;
  for (const auto& g : graphs) {
    const StructuralToken base = assign_token(g, model).graph_token;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto perm = provider(g, t);
      const StructuralToken got = assign_token(permute(g, perm), model).graph_token;
      ++report.trials;
      if (got == base) {
        ++report.unchanged;
      } else {
        report.changed_ids.push_back(g.id() + "#" + std::to_string(t));
      }
    }
  }
  report.rate = report.trials == 0 ? 1.0 : static_cast<double>(report.unchanged) / static_cast<double>(report.trials);
  return report;
}

PermutationReport permutation_consistency(const TokenizerModel& model, std::span<const Graph> graphs,
                                          std::size_t trials, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "relabel"));
  return permutation_consistency(model, graphs, trials, [&rng](const Graph& g, std::size_t) {
    return rng.permutation(g.num_nodes());
  });
}

ScaffoldReport scaffold_consistency(std::span<const std::size_t> tokens, std::span<const std::size_t> buckets,
                                    std::uint64_t seed, std::size_t shuffles) {
  if (tokens.size() != buckets.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scaffold_consistency: " + std::to_string(tokens.size()) +
                                                " tokens for " + std::to_string(buckets.size()) + " scaffolds");
  }
  ScaffoldReport report;
  report.mean_purity = mean_purity(tokens, buckets, &report.bucket_purity, &report.buckets);
  if (shuffles > 0) {
    Rng rng(derive_seed(seed, "scaffold-baseline"));
    std::vector<std::size_t> shuffled(tokens.begin(), tokens.end());
    double sum = 0.0;
    for (std::size_t s = 0; s < shuffles; ++s) {
      rng.shuffle(shuffled);
      sum += mean_purity(shuffled, buckets, nullptr, nullptr);
    }
    report.baseline_purity = sum / static_cast<double>(shuffles);
  }
  return report;
}

std::string format_scaffold_report(const ScaffoldReport& r) {
  std::string out = "buckets,mean_purity,baseline_purity\n";
  out += std::to_string(r.buckets) + ',' + format_real(r.mean_purity) + ',' + format_real(r.baseline_purity) + '\n';
  return out;
}

CorrelationMatrix codebook_correlation(const Codebook& cb, std::size_t m) {
  if (m == 0 || m > cb.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "correlation size " + std::to_string(m) + " outside 1.." + std::to_string(cb.size()));
  }
  CorrelationMatrix out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    norms[i] = cb.entries.row(static_cast<Eigen::Index>(i)).norm();
    if (norms[i] == 0.0) out.zero_norm.push_back(i);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (norms[i] == 0.0) continue;
    const auto ii = static_cast<Eigen::Index>(i);
    out.values(ii, ii) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (norms[j] == 0.0) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      const double c = cb.entries.row(ii).dot(cb.entries.row(jj)) / (norms[i] * norms[j]);
      out.values(ii, jj) = c;
      out.values(jj, ii) = c;
    }
  }
  return out;
}

std::string format_correlation_csv(const CorrelationMatrix& corr) {
  std::string out;
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < corr.values.cols(); ++j) {
      if (j) out += ',';
      out += format_real(corr.values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string export_embeddings(std::span<const TokenAssignment> assignments, std::size_t dimension) {
  std::string out = "id,token";
  for (std::size_t c = 0; c < dimension; ++c) out += ",e" + std::to_string(c);
  out += '\n';
  for (const auto& a : assignments) {
    if (static_cast<std::size_t>(a.graph_embedding.size()) != dimension) {
      throw Error(ErrorCode::kDimensionMismatch, "embedding of '" + a.graph_id + "' has width " +
                                                     std::to_string(a.graph_embedding.size()));
    }
    out += a.graph_id + ',' + std::to_string(a.graph_token.index);
    for (std::size_t c = 0; c < dimension; ++c) out += ',' + format_real(a.graph_embedding(static_cast<Eigen::Index>(c)));
    out += '\n';
  }
  return out;
}

std::string format_permutation_report(const PermutationReport& r) {
  std::string out = "trials,unchanged,rate\n";
  out += std::to_string(r.trials) + ',' + std::to_string(r.unchanged) + ',' + format_real(r.rate) + '\n';
  return out;
}

}  // namespace sogtok
