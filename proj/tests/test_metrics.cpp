#include <doctest.h>

#include <functional>

#include "metric_oracle.hpp"
#include "sogtok/error.hpp"
#include "sogtok/metrics.hpp"
#include "sogtok/random.hpp"

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

AnswerValue parsed(std::string_view text) { return parse_answer(text, default_phrase_sets()).value; }

}  // namespace

TEST_CASE("auc examples") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> l{0, 0, 1, 1};
  CHECK(auc_roc(s, l) == doctest::Approx(0.75).epsilon(1e-12));
  const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
  CHECK(auc_roc(tied, l) == 0.5);
  const std::vector<double> perfect{0, 0, 1, 1};
  CHECK(auc_roc(perfect, l) == 1.0);
  const std::vector<int> one_class{1, 1, 1, 1};
  CHECK(code_of([&] { auc_roc(s, one_class); }) == ErrorCode::kDegenerateLabels);
  const std::vector<int> short_labels{0, 1};
  CHECK(code_of([&] { auc_roc(s, short_labels); }) == ErrorCode::kLengthMismatch);
}

TEST_CASE("auc agrees with the pairwise definition") {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng.index(30);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.index(6)) / 5.0;  // coarse grid forces ties
      l[i] = static_cast<int>(rng.index(2));
    }
    l[0] = 0;
    l[1] = 1;
    CHECK(auc_roc(s, l) == doctest::Approx(oracle_auc(s, l)).epsilon(1e-12));
  }
}

TEST_CASE("binary accuracy and f1") {
  const std::vector<int> p{1, 1, 0, 0};
  const std::vector<int> l{1, 0, 1, 0};
  const auto r = accuracy_and_f1(p, l, 2);
  CHECK(r.accuracy == 0.5);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);
  CHECK(r.counts[1].tp == 1);
  CHECK(r.counts[1].fp == 1);
  CHECK(r.counts[1].fn == 1);
  CHECK(r.counts[1].tn == 1);

  const std::vector<int> unknown(4, kUnknownPrediction);
  const auto u = accuracy_and_f1(unknown, l, 2);
  CHECK(u.accuracy == 0.0);
  CHECK(u.unknown == 4);
  CHECK(u.f1 == 0.0);
  CHECK(u.micro_f1 == 0.0);

  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.index(20);
    std::vector<int> pr(n), lb(n);
    for (std::size_t i = 0; i < n; ++i) {
      pr[i] = static_cast<int>(rng.index(3)) - 1;
      lb[i] = static_cast<int>(rng.index(2));
    }
    const auto got = accuracy_and_f1(pr, lb, 2);
    const auto want = oracle_binary(pr, lb);
    CHECK(got.accuracy == doctest::Approx(want.accuracy));
    CHECK(got.precision == doctest::Approx(want.precision));
    CHECK(got.recall == doctest::Approx(want.recall));
    CHECK(got.f1 == doctest::Approx(want.f1));
  }
  const std::vector<int> bad{2};
  const std::vector<int> one{0};
  CHECK(code_of([&] { accuracy_and_f1(one, bad, 2); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("answer parsing with negatives first") {
  CHECK(parsed("True") == AnswerValue::kPositive);
  CHECK(parsed("yes, it is") == AnswerValue::kPositive);
  CHECK(parsed("FALSE") == AnswerValue::kNegative);
  CHECK(parsed("The answer is not approved.") == AnswerValue::kNegative);
  CHECK(parsed("inactive compound") == AnswerValue::kNegative);
  CHECK(parsed("No. True would be wrong") == AnswerValue::kNegative);
  CHECK(parsed("rejected") == AnswerValue::kNegative);
  CHECK(parsed("Active") == AnswerValue::kPositive);
  CHECK(parsed("") == AnswerValue::kUnknown);
  CHECK(parsed("maybe") == AnswerValue::kUnknown);
  CHECK(parse_answer("2. True", default_phrase_sets()).matched == "true");
  CHECK(code_of([] { parse_answer("x", PhraseSets{{}, {"no"}}); }) == ErrorCode::kInvalidConfig);
  CHECK(fallback_score(AnswerValue::kUnknown) == 0.5);
}

TEST_CASE("class extraction") {
  const std::vector<std::string> classes{"Neural_Networks", "Theory", "Neural"};
  CHECK(extract_class("I think neural networks.", classes) == 0u);
  CHECK(extract_class("Theory, not Neural_Networks", classes) == 1u);
  CHECK(extract_class("neural", classes) == 2u);
  CHECK_FALSE(extract_class("biology", classes).has_value());
}

TEST_CASE("evaluation over responses") {
  TaskTemplate tmpl{"t", "[Task] {{SOG}} [Answer]", {"False", "True"}, {}, {}};
  const auto responses = parse_responses(
      "{\"id\":\"a\",\"text\":\"True\"}\n{\"id\":\"b\",\"text\":\"False\"}\n{\"id\":\"c\",\"text\":\"hmm\"}\n");
  const std::map<std::string, int> labels{{"a", 1}, {"b", 0}, {"c", 1}};
  const auto r = evaluate_task(tmpl, responses, labels);
  CHECK(r.n == 3);
  CHECK(r.unknown == 1);
  CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
  REQUIRE(r.auc.has_value());
  // scores 1, 0, 0.5 against labels 1, 0, 1
  CHECK(*r.auc == doctest::Approx(1.0));
  CHECK(r.auc_source == "parsed");
  const std::map<std::string, int> partial{{"a", 1}};
  CHECK(code_of([&] { evaluate_task(tmpl, responses, partial); }) == ErrorCode::kSemanticError);

  const std::vector<double> runs{0.7, 0.8, 0.9};
  const auto agg = aggregate_runs(runs);
  CHECK(agg.mean == doctest::Approx(0.8));
  CHECK(agg.stddev == doctest::Approx(0.1));
  const std::vector<RunAggregate> tasks{{0.6, 0.3}, {0.8, 0.4}};
  const auto both = aggregate_tasks(tasks);
  CHECK(both.mean == doctest::Approx(0.7));
  CHECK(both.stddev == doctest::Approx(std::sqrt((0.09 + 0.16) / 2)));
  CHECK(metric_csv_header().rfind("task,run,n,auc", 0) == 0);
  CHECK(format_metric_row("t", "r", r).rfind("t,r,3,1,parsed,", 0) == 0);
}
