#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/attributes.hpp"
#include "sogtok/graph.hpp"
#include "sogtok/tokenizer.hpp"
#include "sogtok/vq_model.hpp"

namespace sogtok {

enum class CorpusKind { kKnn = 0, kSimJudge = 1, kDescMatch = 2 };

std::string corpus_kind_name(CorpusKind kind);
CorpusKind parse_corpus_kind(std::string_view name);

struct QARecord {
  CorpusKind kind = CorpusKind::kKnn;
  std::string question;
  std::string answer;
  std::vector<std::string> provenance;
  std::string split = "train";

  bool operator==(const QARecord&) const = default;
};

// "one" .. "twenty", decimal digits beyond.
std::string number_word(std::size_t n);

struct KnnOutput {
  std::vector<QARecord> records;
  std::vector<std::size_t> zero_norm_entries;  // skipped as targets and as neighbours
};

// One record per non-zero codebook entry: its k most cosine-similar other
// entries, descending, lower index first on equal similarity.
// Throws DegenerateCodebook when every entry has zero norm and InvalidConfig
// unless 1 <= k < K.
KnnOutput gen_knn_records(const Codebook& cb, std::size_t k);

std::string knn_question(StructuralToken target, std::size_t k);
std::string simjudge_question(StructuralToken a, StructuralToken b);

struct SimilarityThresholds {
  double tau_pos = 0.8;
  double tau_neg = 0.2;

  // Throws InvalidConfig unless -1 <= tau_neg < tau_pos <= 1.
  void validate() const;
};

struct SimJudgeConfig {
  SimilarityThresholds thresholds;
  std::size_t similar_weight = 1;     // ratio similar : dissimilar
  std::size_t dissimilar_weight = 1;
  std::size_t budget = 0;             // total records; 0 means 4 x K
  std::uint64_t seed = 0;
  // Pair counts above this are sampled instead of enumerated.
  std::size_t enumeration_limit = 200000;
};

struct SimJudgeItem {
  std::string id;
  StructuralToken token;
  Vector embedding;  // pre-quantization global-node row
};

struct SimJudgeOutput {
  std::vector<QARecord> records;
  std::vector<std::string> warnings;  // InsufficientPairs diagnostics
};

double cosine_similarity(const Vector& a, const Vector& b);

// Labels pairs "similar" when cosine > tau_pos and "dissimilar" when
// cosine < tau_neg; pairs in between are skipped. Pairs are visited in a
// seeded random order until each class reaches its share of the budget.
SimJudgeOutput gen_simjudge_records(std::span<const SimJudgeItem> items, std::size_t vocabulary_size,
                                    const SimJudgeConfig& cfg);

inline constexpr std::size_t kDefaultNameBudget = 702;  // A..Z, AA..ZZ

// 0 -> "A", 25 -> "Z", 26 -> "AA", 701 -> "ZZ", ...
std::string node_name(std::size_t index);
// Inverse of node_name; throws SyntaxError.
std::size_t node_index_from_name(std::string_view name);

// "Here is the target graph: there are N nodes; node A and node B is
// connected; ... The corresponding graph structural token is:"
// Names follow the attribute rank order; edges are listed by (lower name
// index, higher name index). Throws GraphTooLargeForDescription.
std::string describe_graph(const Graph& g, const ImportanceStrategy& strategy,
                           std::size_t name_budget = kDefaultNameBudget);

struct ParsedDescription {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // name indices, first < second
};

// Throws SyntaxError on text outside the description grammar.
ParsedDescription parse_description(std::string_view question);

// assignments[i] belongs to graphs[i].
std::vector<QARecord> gen_descmatch_records(std::span<const Graph> graphs,
                                            std::span<const TokenAssignment> assignments,
                                            const ImportanceStrategy& strategy,
                                            std::size_t name_budget = kDefaultNameBudget);

// Orders by kind, then by provenance compared with natural (digit-aware) ordering.
void sort_corpus(std::vector<QARecord>& records);
bool natural_less(std::string_view a, std::string_view b);

std::string format_corpus(std::vector<QARecord> records);
std::vector<QARecord> parse_corpus(std::string_view text);
void write_corpus(const std::vector<QARecord>& records, const std::string& path);

}  // namespace sogtok
