#include "sogtok/prompts.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include <json.hpp>

#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"
#include "sogtok/random.hpp"

namespace sogtok {
namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void replace_once(std::string& text, std::string_view slot, std::string_view value) {
  const auto pos = text.find(slot);
  if (pos != std::string::npos) text.replace(pos, slot.size(), value);
}

}  // namespace

bool TaskTemplate::has_smiles_slot() const { return text.find(kSmilesSlot) != std::string::npos; }
bool TaskTemplate::has_text_slot() const { return text.find(kTextSlot) != std::string::npos; }

void validate_template(const TaskTemplate& t) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kSemanticError, "template '" + t.id + "': " + what);
  };
  if (count_occurrences(t.text, kTokenSlot) != 1) fail("needs exactly one {{SOG}} slot");
  if (count_occurrences(t.text, kSmilesSlot) + count_occurrences(t.text, kTextSlot) > 1) {
    fail("at most one {{SMILES}} or {{TEXT}} slot");
  }
  if (count_occurrences(t.text, "[Task]") != 1) fail("needs exactly one [Task] block");
  if (count_occurrences(t.text, "[Answer]") != 1) fail("needs exactly one [Answer] cue");
  if (t.answers.empty()) fail("needs at least one answer string");
}

TemplateRegistry TemplateRegistry::load(const std::string& dir) {
  const std::string index_path = dir + "/tasks.json";
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_file(index_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSyntaxError, index_path + ": " + e.what());
  }
  TemplateRegistry registry;
  try {
    for (const auto& entry : index.at("tasks")) {
      TaskTemplate t;
      t.id = entry.at("id").get<std::string>();
      t.text = read_file(dir + "/" + entry.at("file").get<std::string>());
      t.answers = entry.at("answers").get<std::vector<std::string>>();
      t.positive_phrases = entry.value("positive_phrases", std::vector<std::string>{});
      t.negative_phrases = entry.value("negative_phrases", std::vector<std::string>{});
      registry.add(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSemanticError, index_path + ": " + e.what());
  }
  return registry;
}

std::string default_template_dir() {
  if (const char* env = std::getenv("SOGTOK_TEMPLATE_DIR"); env && *env) return env;
  return std::string(SOGTOK_DATA_DIR) + "/templates";
}

TemplateRegistry TemplateRegistry::load_default() { return load(default_template_dir()); }

void TemplateRegistry::add(TaskTemplate tmpl) {
  validate_template(tmpl);
  const std::string id = tmpl.id;
  templates_[id] = std::move(tmpl);
}

const TaskTemplate& TemplateRegistry::get(std::string_view id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::kUnknownTask, "unknown task '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : templates_) out.push_back(id);
  return out;
}

PromptRecord render_prompt_text(const TaskTemplate& tmpl, std::string_view text, StructuralToken tok, std::string id,
                                std::optional<int> label) {
  PromptRecord rec;
  rec.prompt = tmpl.text;
  replace_once(rec.prompt, kSmilesSlot, text);
  replace_once(rec.prompt, kTextSlot, text);
  replace_once(rec.prompt, kTokenSlot, tok.surface());
  rec.id = std::move(id);
  rec.label = label;
  if (label) {
    if (*label < 0 || static_cast<std::size_t>(*label) >= tmpl.answers.size()) {
      throw Error(ErrorCode::kSemanticError, "label " + std::to_string(*label) + " of '" + rec.id +
                                                 "' has no answer in task '" + tmpl.id + "'");
    }
    rec.answer = tmpl.answers[static_cast<std::size_t>(*label)];
  }
  return rec;
}

PromptRecord render_prompt(const TaskTemplate& tmpl, const Graph& g, StructuralToken tok) {
  std::string text;
  if (tmpl.has_smiles_slot() || tmpl.has_text_slot()) {
    if (!g.graph_text()) {
      throw Error(ErrorCode::kMissingText, "graph '" + g.id() + "' has no text for task '" + tmpl.id + "'");
    }
    text = *g.graph_text();
  }
  return render_prompt_text(tmpl, text, tok, g.id(), g.label());
}

BalancePolicy parse_balance_policy(std::string_view name) {
  if (name == "none") return BalancePolicy::kNone;
  if (name == "1:1") return BalancePolicy::kOneToOne;
  if (name == "1:5") return BalancePolicy::kOneToFive;
  throw Error(ErrorCode::kInvalidConfig, "unknown balance policy '" + std::string(name) + "'");
}

std::string balance_policy_name(BalancePolicy policy) {
  switch (policy) {
    case BalancePolicy::kNone: return "none";
    case BalancePolicy::kOneToOne: return "1:1";
    case BalancePolicy::kOneToFive: return "1:5";
  }
  return "none";
}

std::vector<PromptRecord> balance_split(std::vector<PromptRecord> records, BalancePolicy policy, std::uint64_t seed,
                                        std::string_view target_split) {
  if (policy == BalancePolicy::kNone) return records;
  if (target_split == "valid" || target_split == "test") {
    throw Error(ErrorCode::kPolicyOnEvalSplit,
                "balance policy " + balance_policy_name(policy) + " cannot be applied to the " +
                    std::string(target_split) + " split");
  }
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split != target_split) continue;
    if (!records[i].label) {
      throw Error(ErrorCode::kSemanticError, "record '" + records[i].id + "' has no label to balance on");
    }
    by_label[*records[i].label].push_back(i);
  }
  if (by_label.size() < 2) return records;
  std::size_t majority = 0;
  for (const auto& [label, idx] : by_label) majority = std::max(majority, idx.size());

  Rng rng(derive_seed(seed, "balance"));
  std::vector<bool> keep(records.size(), true);
  std::vector<PromptRecord> extra;
  bool majority_seen = false;
  for (const auto& [label, idx] : by_label) {
    // the first class reaching the majority count keeps its records untouched
    if (idx.size() == majority && !majority_seen) {
      majority_seen = true;
      continue;
    }
    const std::size_t target =
        policy == BalancePolicy::kOneToOne ? majority : std::max<std::size_t>(1, majority / 5);
    std::vector<std::size_t> order = idx;
    rng.shuffle(order);
    if (target < idx.size()) {
      for (std::size_t k = target; k < order.size(); ++k) keep[order[k]] = false;
    } else {
      for (std::size_t k = 0; k < target - idx.size(); ++k) extra.push_back(records[order[k % order.size()]]);
    }
  }
  std::vector<PromptRecord> out;
  out.reserve(records.size() + extra.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(std::move(records[i]));
  }
  for (auto& r : extra) out.push_back(std::move(r));
  return out;
}

std::string assign_split(std::string_view id, std::uint64_t seed, const std::map<std::string, std::string>* assigned) {
  if (assigned) {
    const auto it = assigned->find(std::string(id));
    if (it != assigned->end()) {
      if (it->second != "train" && it->second != "valid" && it->second != "test") {
        throw Error(ErrorCode::kSemanticError, "unknown split '" + it->second + "' for '" + std::string(id) + "'");
      }
      return it->second;
    }
  }
  const auto bucket = splitmix64(fnv1a64(id) ^ derive_seed(seed, "split")) % 10;
  if (bucket < 8) return "train";
  return bucket == 8 ? "valid" : "test";
}

std::string format_prompt_line(const PromptRecord& r) {
  nlohmann::ordered_json j;
  j["prompt"] = r.prompt;
  j["answer"] = r.answer;
  j["id"] = r.id;
  j["split"] = r.split;
  return j.dump() + "\n";
}

PromptFileSummary write_prompt_files(const std::vector<PromptRecord>& records, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::string train;
  std::string valid;
  std::string test;
  PromptFileSummary summary;
  for (const auto& r : records) {
    if (r.split == "train") {
      train += format_prompt_line(r);
      ++summary.train;
    } else if (r.split == "valid") {
      valid += format_prompt_line(r);
      ++summary.valid;
    } else if (r.split == "test") {
      test += format_prompt_line(r);
      ++summary.test;
    } else {
      throw Error(ErrorCode::kSemanticError, "record '" + r.id + "' has unknown split '" + r.split + "'");
    }
  }
  write_file(dir + "/train.jsonl", train);
  write_file(dir + "/valid.jsonl", valid);
  write_file(dir + "/test.jsonl", test);
  return summary;
}

}  // namespace sogtok
