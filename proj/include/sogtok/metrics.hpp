#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/prompts.hpp"

namespace sogtok {

enum class AnswerValue { kPositive, kNegative, kUnknown };

struct ParsedAnswer {
  AnswerValue value = AnswerValue::kUnknown;
  std::optional<std::string> matched;
};

struct PhraseSets {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
};

PhraseSets default_phrase_sets();
// Template overrides where present, defaults otherwise.
PhraseSets phrase_sets_for(const TaskTemplate& tmpl);

// Case-insensitive substring match; any negative phrase wins over every
// positive phrase. Throws InvalidConfig when a phrase set is empty.
ParsedAnswer parse_answer(std::string_view text, const PhraseSets& phrases);

// Index of the class name occurring earliest in the text (case-insensitive,
// '_' also matched as a space); the longer name wins at equal positions.
// Empty when none occurs.
std::optional<std::size_t> extract_class(std::string_view text, std::span<const std::string> classes);

// Probability that a random positive outranks a random negative, ties
// counting one half. Throws DegenerateLabels unless both classes occur and
// LengthMismatch on unequal inputs.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

inline constexpr int kUnknownPrediction = -1;

struct MetricReport {
  std::size_t n = 0;
  std::size_t unknown = 0;
  double accuracy = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  // Positive-class (label 1) precision, recall and F1; binary tasks only.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassCounts> counts;  // one per class
  std::optional<double> auc;
  std::string auc_source;  // "score", "parsed", "mixed" or empty
};

// predictions use kUnknownPrediction for unparsed output; an unknown counts
// as a miss for its true class and as a prediction of no class.
// Throws LengthMismatch, and InvalidConfig for labels outside [0, classes).
MetricReport accuracy_and_f1(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

struct Response {
  std::string id;
  std::string text;
  std::optional<double> score;
};

// One JSON object per line with "id", "text" and an optional "score".
std::vector<Response> parse_responses(std::string_view text);

// Score used for AUC when a response carries none.
double fallback_score(AnswerValue value);

// Joins responses to labels by id (missing labels throw SemanticError) and
// scores them with the template's answers: binary tasks through
// parse_answer, multi-class tasks through extract_class.
MetricReport evaluate_task(const TaskTemplate& tmpl, std::span<const Response> responses,
                           const std::map<std::string, int>& labels);

struct RunAggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
};

RunAggregate aggregate_runs(std::span<const double> values);
// Mean of per-task means and root mean square of per-task deviations.
RunAggregate aggregate_tasks(std::span<const RunAggregate> tasks);

std::string metric_csv_header();
// `run` names the response file a row was computed from.
std::string format_metric_row(std::string_view task, std::string_view run, const MetricReport& report);

}  // namespace sogtok
