#include "sogtok/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"
#include "sogtok/random.hpp"

namespace sogtok {

std::string corpus_kind_name(CorpusKind kind) {
  switch (kind) {
    case CorpusKind::kKnn: return "knn";
    case CorpusKind::kSimJudge: return "simjudge";
    case CorpusKind::kDescMatch: return "descmatch";
  }
  return "knn";
}

CorpusKind parse_corpus_kind(std::string_view name) {
  if (name == "knn") return CorpusKind::kKnn;
  if (name == "simjudge") return CorpusKind::kSimJudge;
  if (name == "descmatch") return CorpusKind::kDescMatch;
  throw Error(ErrorCode::kInvalidConfig, "unknown corpus kind '" + std::string(name) + "'");
}

std::string number_word(std::size_t n) {
  static constexpr std::array<const char*, 21> kWords = {
      "zero",    "one",     "two",       "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};
  return n < kWords.size() ? kWords[n] : std::to_string(n);
}

std::string knn_question(StructuralToken target, std::size_t k) {
  return "Here is the target structural token " + target.surface() + ", and its " + number_word(k) +
         " nearest graph structural tokens are:";
}

std::string simjudge_question(StructuralToken a, StructuralToken b) {
  return "Here are two tokens " + a.surface() + " and " + b.surface() +
         ", judge whether they represent similar structures or not.";
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

KnnOutput gen_knn_records(const Codebook& cb, std::size_t k) {
  const std::size_t K = cb.size();
  if (k == 0 || k >= K) {
    throw Error(ErrorCode::kInvalidConfig, "knn needs 1 <= k < K (k=" + std::to_string(k) + ", K=" + std::to_string(K) + ")");
  }
  KnnOutput out;
  std::vector<Vector> unit(K);
  std::vector<bool> usable(K, false);
  for (std::size_t j = 0; j < K; ++j) {
    const Vector row = cb.entries.row(static_cast<Eigen::Index>(j)).transpose();
    const double norm = row.norm();
    if (norm == 0.0) {
      out.zero_norm_entries.push_back(j);
    } else {
      unit[j] = row / norm;
      usable[j] = true;
    }
  }
  if (out.zero_norm_entries.size() == K) {
    throw Error(ErrorCode::kDegenerateCodebook, "every codebook entry has zero norm");
  }
  for (std::size_t i = 0; i < K; ++i) {
    if (!usable[i]) continue;
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t j = 0; j < K; ++j) {
      if (j != i && usable[j]) ranked.emplace_back(unit[i].dot(unit[j]), j);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t take = std::min(k, ranked.size());
    QARecord rec;
    rec.kind = CorpusKind::kKnn;
    rec.question = knn_question(StructuralToken{i}, k);
    for (std::size_t r = 0; r < take; ++r) {
      if (r) rec.answer += ", ";
      rec.answer += StructuralToken{ranked[r].second}.surface();
    }
    rec.provenance = {StructuralToken{i}.surface()};
    out.records.push_back(std::move(rec));
  }
  return out;
}

void SimilarityThresholds::validate() const {
  if (!(tau_neg >= -1.0 && tau_neg < tau_pos && tau_pos <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "thresholds must satisfy -1 <= tau_neg < tau_pos <= 1");
  }
}

SimJudgeOutput gen_simjudge_records(std::span<const SimJudgeItem> items, std::size_t vocabulary_size,
                                    const SimJudgeConfig& cfg) {
  cfg.thresholds.validate();
  if (cfg.similar_weight + cfg.dissimilar_weight == 0) {
    throw Error(ErrorCode::kInvalidConfig, "simjudge ratio must have a positive side");
  }
  const std::size_t budget = cfg.budget ? cfg.budget : 4 * vocabulary_size;
  const std::size_t weight_sum = cfg.similar_weight + cfg.dissimilar_weight;
  const std::size_t want_similar = budget * cfg.similar_weight / weight_sum;
  const std::size_t want_dissimilar = budget - want_similar;

  SimJudgeOutput out;
  const std::size_t n = items.size();
  std::vector<Vector> unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = items[i].embedding.norm();
    unit[i] = norm > 0.0 ? Vector(items[i].embedding / norm) : Vector(items[i].embedding);
  }

  std::size_t similar = 0;
  std::size_t dissimilar = 0;
  auto consider = [&](std::size_t a, std::size_t b) {
    const double c = unit[a].dot(unit[b]);
    std::string answer;
    if (c > cfg.thresholds.tau_pos && similar < want_similar) {
      answer = "similar";
      ++similar;
    } else if (c < cfg.thresholds.tau_neg && dissimilar < want_dissimilar) {
      answer = "dissimilar";
      ++dissimilar;
    } else {
      return;
    }
    QARecord rec;
    rec.kind = CorpusKind::kSimJudge;
    rec.question = simjudge_question(items[a].token, items[b].token);
    rec.answer = std::move(answer);
    rec.provenance = {items[a].id, items[b].id};
    out.records.push_back(std::move(rec));
  };
  auto full = [&] { return similar >= want_similar && dissimilar >= want_dissimilar; };

  Rng rng(derive_seed(cfg.seed, "simjudge"));
  const std::size_t pair_count = n < 2 ? 0 : n * (n - 1) / 2;
  if (pair_count <= cfg.enumeration_limit) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(pair_count);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    }
    rng.shuffle(pairs);
    for (const auto& [a, b] : pairs) {
      if (full()) break;
      consider(a, b);
    }
  } else {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    const std::size_t attempts = 50 * std::max<std::size_t>(budget, 1);
    for (std::size_t t = 0; t < attempts && !full(); ++t) {
      std::size_t a = rng.index(n);
      std::size_t b = rng.index(n);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (!seen.insert({a, b}).second) continue;
      consider(a, b);
    }
  }
  if (similar < want_similar) {
    out.warnings.push_back("InsufficientPairs: " + std::to_string(similar) + " of " + std::to_string(want_similar) +
                           " similar pairs found");
  }
  if (dissimilar < want_dissimilar) {
    out.warnings.push_back("InsufficientPairs: " + std::to_string(dissimilar) + " of " +
                           std::to_string(want_dissimilar) + " dissimilar pairs found");
  }
  return out;
}

std::string node_name(std::size_t index) {
  std::string name;
  std::size_t v = index + 1;  // bijective base 26
  while (v > 0) {
    --v;
    name.insert(name.begin(), static_cast<char>('A' + v % 26));
    v /= 26;
  }
  return name;
}

std::size_t node_index_from_name(std::string_view name) {
  if (name.empty() || name.size() > 12) throw Error(ErrorCode::kSyntaxError, "bad node name '" + std::string(name) + "'");
  std::size_t v = 0;
  for (char c : name) {
    if (c < 'A' || c > 'Z') throw Error(ErrorCode::kSyntaxError, "bad node name '" + std::string(name) + "'");
    v = v * 26 + static_cast<std::size_t>(c - 'A' + 1);
  }
  return v - 1;
}

namespace {

constexpr std::string_view kDescPrefix = "Here is the target graph: ";
constexpr std::string_view kDescSuffix = ". The corresponding graph structural token is:";

}  // namespace

std::string describe_graph(const Graph& g, const ImportanceStrategy& strategy, std::size_t name_budget) {
  const std::size_t n = g.num_nodes();
  if (n > name_budget) {
    throw Error(ErrorCode::kGraphTooLargeForDescription,
                "graph '" + g.id() + "' has " + std::to_string(n) + " nodes, name budget " + std::to_string(name_budget));
  }
  const StructuralAttributeMap attrs = assign_attributes(g, strategy);
  std::vector<std::size_t> name_of(n);
  for (std::size_t p = 0; p < n; ++p) name_of[attrs.canonical_order[p]] = p;

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const Edge& e : g.edges()) {
    const auto a = name_of[e.u];
    const auto b = name_of[e.v];
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges.begin(), edges.end());

  std::string text(kDescPrefix);
  text += n == 1 ? "there is 1 node" : "there are " + std::to_string(n) + " nodes";
  for (const auto& [a, b] : edges) {
    text += "; node " + node_name(a) + " and node " + node_name(b) + " is connected";
  }
  text += kDescSuffix;
  return text;
}

ParsedDescription parse_description(std::string_view q) {
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::kSyntaxError, "description: " + what);
  };
  if (!q.starts_with(kDescPrefix) || !q.ends_with(kDescSuffix)) fail("missing prefix or suffix");
  std::string_view body = q.substr(kDescPrefix.size(), q.size() - kDescPrefix.size() - kDescSuffix.size());

  std::vector<std::string_view> clauses;
  while (true) {
    const auto sep = body.find("; ");
    clauses.push_back(body.substr(0, sep));
    if (sep == std::string_view::npos) break;
    body.remove_prefix(sep + 2);
  }

  ParsedDescription out;
  const std::string_view count = clauses.front();
  if (count == "there is 1 node") {
    out.node_count = 1;
  } else {
    constexpr std::string_view pre = "there are ";
    constexpr std::string_view post = " nodes";
    if (!count.starts_with(pre) || !count.ends_with(post)) fail("bad node count clause");
    const auto digits = count.substr(pre.size(), count.size() - pre.size() - post.size());
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.node_count);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || out.node_count < 2) fail("bad node count");
  }
  for (std::size_t c = 1; c < clauses.size(); ++c) {
    std::string_view clause = clauses[c];
    constexpr std::string_view node = "node ";
    constexpr std::string_view mid = " and node ";
    constexpr std::string_view tail = " is connected";
    if (!clause.starts_with(node) || !clause.ends_with(tail)) fail("bad edge clause");
    clause = clause.substr(node.size(), clause.size() - node.size() - tail.size());
    const auto m = clause.find(mid);
    if (m == std::string_view::npos) fail("bad edge clause");
    const auto a = node_index_from_name(clause.substr(0, m));
    const auto b = node_index_from_name(clause.substr(m + mid.size()));
    if (a >= out.node_count || b >= out.node_count || a == b) fail("edge endpoint out of range");
    out.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  return out;
}

std::vector<QARecord> gen_descmatch_records(std::span<const Graph> graphs, std::span<const TokenAssignment> assignments,
                                            const ImportanceStrategy& strategy, std::size_t name_budget) {
  if (graphs.size() != assignments.size()) {
    throw Error(ErrorCode::kLengthMismatch, "descmatch needs one assignment per graph");
  }
  std::vector<QARecord> out;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    QARecord rec;
    rec.kind = CorpusKind::kDescMatch;
    rec.question = describe_graph(graphs[i], strategy, name_budget);
    rec.answer = assignments[i].graph_token.surface();
    rec.provenance = {graphs[i].id()};
    out.push_back(std::move(rec));
  }
  return out;
}

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t ei = i;
      std::size_t ej = j;
      while (ei < a.size() && is_digit(a[ei])) ++ei;
      while (ej < b.size() && is_digit(b[ej])) ++ej;
      std::string_view ra = a.substr(i, ei - i);
      std::string_view rb = b.substr(j, ej - j);
      const auto za = ra.find_first_not_of('0');
      const auto zb = rb.find_first_not_of('0');
      const std::string_view ta = za == std::string_view::npos ? std::string_view{} : ra.substr(za);
      const std::string_view tb = zb == std::string_view::npos ? std::string_view{} : rb.substr(zb);
      if (ta.size() != tb.size()) return ta.size() < tb.size();
      if (ta != tb) return ta < tb;
      if (ra.size() != rb.size()) return ra.size() < rb.size();
      i = ei;
      j = ej;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

void sort_corpus(std::vector<QARecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const QARecord& a, const QARecord& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return std::lexicographical_compare(a.provenance.begin(), a.provenance.end(), b.provenance.begin(),
                                        b.provenance.end(),
                                        [](const std::string& x, const std::string& y) { return natural_less(x, y); });
  });
}

std::string format_corpus(std::vector<QARecord> records) {
  sort_corpus(records);
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["kind"] = corpus_kind_name(r.kind);
    j["question"] = r.question;
    j["answer"] = r.answer;
    j["provenance"] = r.provenance;
    j["split"] = r.split;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<QARecord> parse_corpus(std::string_view text) {
  std::vector<QARecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QARecord r;
      r.kind = parse_corpus_kind(j.at("kind").get<std::string>());
      r.question = j.at("question").get<std::string>();
      r.answer = j.at("answer").get<std::string>();
      r.provenance = j.at("provenance").get<std::vector<std::string>>();
      r.split = j.value("split", "train");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSyntaxError, e.what(), line_no, 1);
    }
  }
  return out;
}

void write_corpus(const std::vector<QARecord>& records, const std::string& path) {
  write_file(path, format_corpus(records));
}

}  // namespace sogtok
