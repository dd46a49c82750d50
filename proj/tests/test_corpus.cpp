#include <doctest.h>

#include <functional>

#include "corpus_oracle.hpp"
#include "sogtok/error.hpp"

using namespace sogtok;
using namespace sogtok::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kIOFailure;
}

Codebook codebook_from(const Dense& rows) {
  Codebook cb;
  cb.entries = Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) cb.entries(i, j) = rows[i][j];
  }
  return cb;
}

SimJudgeItem item(std::string id, std::size_t tok, std::vector<double> v) {
  Vector e(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) e(i) = v[i];
  return SimJudgeItem{std::move(id), StructuralToken{tok}, e};
}

}  // namespace

TEST_CASE("knn hand example") {
  const Codebook cb = codebook_from({{1, 0}, {0.9, 0.1}, {-1, 0}});
  const auto out = gen_knn_records(cb, 1);
  REQUIRE(out.records.size() == 3);
  CHECK(out.records[0].question == "Here is the target structural token <SOG_0>, and its one nearest graph structural tokens are:");
  CHECK(out.records[0].answer == "<SOG_1>");
  CHECK(out.records[2].answer == "<SOG_1>");
  CHECK(knn_question(StructuralToken{4}, 5).find("its five nearest") != std::string::npos);
  CHECK(number_word(20) == "twenty");
  CHECK(number_word(21) == "21");
}

TEST_CASE("knn matches a brute-force ranking") {
  Rng rng(5);
  for (std::size_t K : {4u, 16u, 64u}) {
    Codebook cb;
    cb.entries = random_matrix(K, 6, rng);
    // exact duplicates force the lower-index tie break
    cb.entries.row(2) = cb.entries.row(1);
    cb.entries.row(3).setZero();
    const auto out = gen_knn_records(cb, 3);
    CHECK(out.zero_norm_entries == std::vector<std::size_t>{3});
    const Dense C = to_dense(cb.entries);
    std::size_t r = 0;
    for (std::size_t i = 0; i < K; ++i) {
      if (i == 3) continue;
      REQUIRE(r < out.records.size());
      CHECK(out.records[r].provenance == std::vector<std::string>{"<SOG_" + std::to_string(i) + ">"});
      CHECK(out.records[r].answer == oracle_knn_answer(C, i, 3));
      ++r;
    }
    CHECK(r == out.records.size());
  }
  Codebook zero;
  zero.entries = Matrix::Zero(3, 2);
  CHECK(code_of([&] { gen_knn_records(zero, 1); }) == ErrorCode::kDegenerateCodebook);
  CHECK(code_of([] { gen_knn_records(codebook_from({{1, 0}, {0, 1}}), 2); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("simjudge thresholds") {
  const std::vector<SimJudgeItem> items{item("a", 0, {1, 0}), item("b", 1, {2, 0}), item("c", 2, {-1, 0}),
                                        item("d", 3, {0.5, 0.5})};
  SimJudgeConfig cfg;
  cfg.budget = 6;
  const auto out = gen_simjudge_records(items, 4, cfg);
  std::size_t similar = 0;
  for (const auto& r : out.records) {
    REQUIRE(r.provenance.size() == 2);
    auto find = [&](const std::string& id) {
      for (const auto& it : items)
        if (it.id == id) return it;
      FAIL("unknown id");
      return items[0];
    };
    const auto x = find(r.provenance[0]);
    const auto y = find(r.provenance[1]);
    const double c = oracle_cosine({x.embedding(0), x.embedding(1)}, {y.embedding(0), y.embedding(1)});
    if (r.answer == "similar") {
      ++similar;
      CHECK(c > cfg.thresholds.tau_pos);
    } else {
      CHECK(r.answer == "dissimilar");
      CHECK(c < cfg.thresholds.tau_neg);
    }
    CHECK(r.question == simjudge_question(x.token, y.token));
  }
  // only a-b clears 0.8; a-c, b-c and c-d fall below 0.2
  CHECK(similar == 1);
  CHECK(out.records.size() == 4);
  CHECK(out.warnings.size() == 1);
  CHECK(gen_simjudge_records(items, 4, cfg).records == out.records);

  SimJudgeConfig bad;
  bad.thresholds = {0.1, 0.5};
  CHECK(code_of([&] { gen_simjudge_records(items, 4, bad); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("node names") {
  CHECK(node_name(0) == "A");
  CHECK(node_name(25) == "Z");
  CHECK(node_name(26) == "AA");
  CHECK(node_name(701) == "ZZ");
  CHECK(node_name(702) == "AAA");
  for (std::size_t i = 0; i < 2000; ++i) CHECK(node_index_from_name(node_name(i)) == i);
  CHECK(code_of([] { node_index_from_name("a"); }) == ErrorCode::kSyntaxError);
}

TEST_CASE("descmatch descriptions") {
  const Graph single = Graph::from_edges(1, {}, "one");
  CHECK(describe_graph(single, ImportanceStrategy::degree()) ==
        "Here is the target graph: there is 1 node. The corresponding graph structural token is:");
  // A is the hub, B and C the leaves in rank order
  const Graph star = star_graph(3, "s");
  CHECK(describe_graph(star, ImportanceStrategy::degree()) ==
        "Here is the target graph: there are 3 nodes; node A and node B is connected; node A and node C is "
        "connected. The corresponding graph structural token is:");
  TokenAssignment a;
  a.graph_id = "s";
  a.graph_token = StructuralToken{7};
  const std::vector<Graph> gs{star};
  const std::vector<TokenAssignment> as{a};
  const auto recs = gen_descmatch_records(gs, as, ImportanceStrategy::degree());
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].answer == "<SOG_7>");
  CHECK(descmatch_round_trips(recs[0], star, ImportanceStrategy::degree()));

  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const Graph g = random_graph(1 + rng.index(40), 0.2, rng);
    for (const auto& s : {ImportanceStrategy::degree(), ImportanceStrategy::pagerank()}) {
      QARecord rec;
      rec.question = describe_graph(g, s);
      CHECK(descmatch_round_trips(rec, g, s));
    }
  }
  CHECK(code_of([&] { describe_graph(cycle_graph(5, "c"), ImportanceStrategy::degree(), 4); }) ==
        ErrorCode::kGraphTooLargeForDescription);
  CHECK(code_of([] { parse_description("Here is the target graph: there are 2 nodes; node A and node C is connected. "
                                       "The corresponding graph structural token is:"); }) ==
        ErrorCode::kSyntaxError);
}

TEST_CASE("corpus file ordering") {
  CHECK(format_corpus({}).empty());
  CHECK(parse_corpus("").empty());
  QARecord d{CorpusKind::kDescMatch, "q", "a", {"g10"}, "train"};
  QARecord d2{CorpusKind::kDescMatch, "q", "a", {"g9"}, "train"};
  QARecord k{CorpusKind::kKnn, "q", "a", {"<SOG_1>"}, "train"};
  QARecord s{CorpusKind::kSimJudge, "q", "similar", {"x", "y"}, "train"};
  const std::string text = format_corpus({d, s, d2, k});
  const auto back = parse_corpus(text);
  REQUIRE(back.size() == 4);
  CHECK(back[0] == k);
  CHECK(back[1] == s);
  CHECK(back[2] == d2);
  CHECK(back[3] == d);
  CHECK(natural_less("g2", "g10"));
  CHECK_FALSE(natural_less("g10", "g2"));
  CHECK(code_of([] { parse_corpus("{\"kind\":\"knn\"}"); }) == ErrorCode::kSyntaxError);
}
