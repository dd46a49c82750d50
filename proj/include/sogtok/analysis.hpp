#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sogtok/graph.hpp"
#include "sogtok/tokenizer.hpp"
#include "sogtok/vq_model.hpp"

namespace sogtok {

struct PermutationReport {
  std::size_t trials = 0;
  std::size_t unchanged = 0;
  double rate = 1.0;
  std::vector<std::string> changed_ids;  // one entry per differing trial
};

using PermutationProvider = std::function<std::vector<NodeIndex>(const Graph&, std::size_t trial)>;

// Tokenizes every graph, relabels it `trials` times and counts how often the
// graph token survives. Throws InvalidConfig when trials is zero.
PermutationReport permutation_consistency(const TokenizerModel& model, std::span<const Graph> graphs,
                                          std::size_t trials, std::uint64_t seed);
PermutationReport permutation_consistency(const TokenizerModel& model, std::span<const Graph> graphs,
                                          std::size_t trials, const PermutationProvider& provider);

struct ScaffoldReport {
  std::size_t buckets = 0;  // buckets with at least two members
  double mean_purity = 0.0;
  double baseline_purity = 0.0;
  std::vector<double> bucket_purity;  // by bucket id, 0 for singletons
};

// purity(bucket) = largest token count / bucket size, averaged over buckets
// with at least two members. The baseline averages the same quantity over
// `shuffles` seeded permutations of the token column.
// Throws LengthMismatch on unequal inputs.
ScaffoldReport scaffold_consistency(std::span<const std::size_t> tokens, std::span<const std::size_t> buckets,
                                    std::uint64_t seed, std::size_t shuffles = 100);

std::string format_scaffold_report(const ScaffoldReport& report);

struct CorrelationMatrix {
  Matrix values;                        // m x m cosine similarities
  std::vector<std::size_t> zero_norm;   // rows with zero norm; their entries are 0
};

// Throws InvalidConfig unless 1 <= m <= K.
CorrelationMatrix codebook_correlation(const Codebook& cb, std::size_t m);
// Comma-separated rows, 9 significant digits, no header.
std::string format_correlation_csv(const CorrelationMatrix& corr);

// Header "id,token,e0,...", one row per assignment, 9 significant digits.
std::string export_embeddings(std::span<const TokenAssignment> assignments, std::size_t dimension);

std::string format_permutation_report(const PermutationReport& report);

}  // namespace sogtok
