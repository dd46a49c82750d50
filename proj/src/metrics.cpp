#include "sogtok/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include <json.hpp>

#include "sogtok/error.hpp"

namespace sogtok {
namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::optional<std::string> first_phrase_in(const std::string& lowered, const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    if (lowered.find(lowercase(p)) != std::string::npos) return p;
  }
  return std::nullopt;
}

}  // namespace

PhraseSets default_phrase_sets() {
  return {{"yes", "true", "active", "approved"}, {"no", "false", "inactive", "rejected", "not approved"}};
}

PhraseSets phrase_sets_for(const TaskTemplate& tmpl) {
  PhraseSets sets = default_phrase_sets();
  if (!tmpl.positive_phrases.empty()) sets.positive = tmpl.positive_phrases;
  if (!tmpl.negative_phrases.empty()) sets.negative = tmpl.negative_phrases;
  return sets;
}

ParsedAnswer parse_answer(std::string_view text, const PhraseSets& phrases) {
  if (phrases.positive.empty() || phrases.negative.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "answer phrase sets must be non-empty");
  }
  const std::string lowered = lowercase(text);
  if (auto m = first_phrase_in(lowered, phrases.negative)) return {AnswerValue::kNegative, m};
  if (auto m = first_phrase_in(lowered, phrases.positive)) return {AnswerValue::kPositive, m};
  return {};
}

std::optional<std::size_t> extract_class(std::string_view text, std::span<const std::string> classes) {
  const std::string lowered = lowercase(text);
  std::optional<std::size_t> best;
  std::size_t best_pos = std::string::npos;
  std::size_t best_len = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::string name = lowercase(classes[c]);
    std::string spaced = name;
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    for (const auto& form : {name, spaced}) {
      const auto pos = lowered.find(form);
      if (pos == std::string::npos || form.empty()) continue;
      if (pos < best_pos || (pos == best_pos && form.size() > best_len)) {
        best = c;
        best_pos = pos;
        best_len = form.size();
      }
    }
  }
  return best;
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "auc_roc: " + std::to_string(scores.size()) + " scores for " +
                                                std::to_string(labels.size()) + " labels");
  }
  std::vector<std::pair<double, int>> items;
  items.reserve(scores.size());
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(ErrorCode::kInvalidConfig, "auc_roc: non-finite score");
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::kInvalidConfig, "auc_roc: labels must be 0 or 1");
    (labels[i] == 1 ? pos : neg) += 1;
    items.emplace_back(scores[i], labels[i]);
  }
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kDegenerateLabels, "auc_roc needs at least one positive and one negative label");
  }
  std::sort(items.begin(), items.end());
  // 2 * wins + ties, accumulated exactly over groups of equal score
  std::uint64_t twice = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    std::uint64_t pos_g = 0;
    std::uint64_t neg_g = 0;
    for (; j < items.size() && items[j].first == items[i].first; ++j) (items[j].second == 1 ? pos_g : neg_g) += 1;
    twice += 2 * pos_g * neg_below + pos_g * neg_g;
    neg_below += neg_g;
    i = j;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

MetricReport accuracy_and_f1(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "accuracy_and_f1: " + std::to_string(predictions.size()) +
                                                " predictions for " + std::to_string(labels.size()) + " labels");
  }
  MetricReport r;
  r.n = labels.size();
  r.counts.assign(classes, {});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw Error(ErrorCode::kInvalidConfig, "label " + std::to_string(y) + " outside the class range");
    }
    if (p != kUnknownPrediction && (p < 0 || static_cast<std::size_t>(p) >= classes)) {
      throw Error(ErrorCode::kInvalidConfig, "prediction " + std::to_string(p) + " outside the class range");
    }
    if (p == kUnknownPrediction) ++r.unknown;
    if (p == y) ++correct;
    for (std::size_t c = 0; c < classes; ++c) {
      const bool truth = static_cast<std::size_t>(y) == c;
      const bool pred = p != kUnknownPrediction && static_cast<std::size_t>(p) == c;
      auto& k = r.counts[c];
      if (truth && pred) ++k.tp;
      else if (pred) ++k.fp;
      else if (truth) ++k.fn;
      else ++k.tn;
    }
  }
  r.accuracy = ratio(correct, r.n);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (const auto& k : r.counts) {
    tp += k.tp;
    fp += k.fp;
    fn += k.fn;
  }
  r.micro_precision = ratio(tp, tp + fp);
  r.micro_recall = ratio(tp, tp + fn);
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  if (classes == 2) {
    const auto& k = r.counts[1];
    r.precision = ratio(k.tp, k.tp + k.fp);
    r.recall = ratio(k.tp, k.tp + k.fn);
    r.f1 = harmonic(r.precision, r.recall);
  }
  return r;
}

std::vector<Response> parse_responses(std::string_view text) {
  std::vector<Response> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSyntaxError, std::string("response: ") + e.what(), line_no, 1);
    }
    try {
      Response r;
      r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      r.text = j.at("text").get<std::string>();
      if (j.contains("score") && !j.at("score").is_null()) r.score = j.at("score").get<double>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSemanticError, std::string("response: ") + e.what(), line_no, 1);
    }
    if (end == text.size()) break;
  }
  return out;
}

double fallback_score(AnswerValue value) {
  switch (value) {
    case AnswerValue::kPositive: return 1.0;
    case AnswerValue::kNegative: return 0.0;
    case AnswerValue::kUnknown: return 0.5;
  }
  return 0.5;
}

MetricReport evaluate_task(const TaskTemplate& tmpl, std::span<const Response> responses,
                           const std::map<std::string, int>& labels) {
  const std::size_t classes = tmpl.answers.size();
  std::vector<int> predictions;
  std::vector<int> truth;
  std::vector<double> scores;
  std::size_t with_score = 0;
  const PhraseSets phrases = phrase_sets_for(tmpl);
  for (const auto& r : responses) {
    const auto it = labels.find(r.id);
    if (it == labels.end()) throw Error(ErrorCode::kSemanticError, "no label for response '" + r.id + "'");
    truth.push_back(it->second);
    if (classes == 2) {
      const ParsedAnswer a = parse_answer(r.text, phrases);
      predictions.push_back(a.value == AnswerValue::kPositive   ? 1
                            : a.value == AnswerValue::kNegative ? 0
                                                                : kUnknownPrediction);
      scores.push_back(r.score ? *r.score : fallback_score(a.value));
      if (r.score) ++with_score;
    } else {
      const auto c = extract_class(r.text, tmpl.answers);
      predictions.push_back(c ? static_cast<int>(*c) : kUnknownPrediction);
    }
  }
  MetricReport report = accuracy_and_f1(predictions, truth, classes);
  if (classes == 2) {
    const bool both = std::count(truth.begin(), truth.end(), 1) > 0 && std::count(truth.begin(), truth.end(), 0) > 0;
    if (both) {
      report.auc = auc_roc(scores, truth);
      report.auc_source = with_score == scores.size() ? "score" : with_score == 0 ? "parsed" : "mixed";
    }
  }
  return report;
}

RunAggregate aggregate_runs(std::span<const double> values) {
  RunAggregate out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

RunAggregate aggregate_tasks(std::span<const RunAggregate> tasks) {
  RunAggregate out;
  if (tasks.empty()) return out;
  double mean = 0.0;
  double sq = 0.0;
  for (const auto& t : tasks) {
    mean += t.mean;
    sq += t.stddev * t.stddev;
  }
  out.mean = mean / static_cast<double>(tasks.size());
  out.stddev = std::sqrt(sq / static_cast<double>(tasks.size()));
  return out;
}

std::string metric_csv_header() {
  return "task,run,n,auc,auc_source,accuracy,micro_f1,precision,recall,f1,unknown,counts\n";
}

std::string format_metric_row(std::string_view task, std::string_view run, const MetricReport& r) {
  std::string counts;
  for (std::size_t c = 0; c < r.counts.size(); ++c) {
    const auto& k = r.counts[c];
    if (c) counts += ';';
    counts += std::to_string(c) + ':' + std::to_string(k.tp) + '/' + std::to_string(k.fp) + '/' +
              std::to_string(k.tn) + '/' + std::to_string(k.fn);
  }
  std::string row(task);
  row += ',';
  row += run;
  row += ',' + std::to_string(r.n);
  row += ',' + (r.auc ? format_real(*r.auc) : std::string());
  row += ',' + r.auc_source;
  row += ',' + format_real(r.accuracy);
  row += ',' + format_real(r.micro_f1);
  row += ',' + format_real(r.precision);
  row += ',' + format_real(r.recall);
  row += ',' + format_real(r.f1);
  row += ',' + std::to_string(r.unknown);
  row += ',' + counts + '\n';
  return row;
}

}  // namespace sogtok
