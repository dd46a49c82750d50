#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/graph.hpp"
#include "sogtok/tokenizer.hpp"

namespace sogtok {

inline constexpr std::string_view kSmilesSlot = "{{SMILES}}";
inline constexpr std::string_view kTextSlot = "{{TEXT}}";
inline constexpr std::string_view kTokenSlot = "{{SOG}}";

struct TaskTemplate {
  std::string id;
  std::string text;  // whitespace significant
  // answers[label] is the target string for that class; binary tasks list
  // the negative answer first.
  std::vector<std::string> answers;
  // Phrase-set overrides for answer parsing; empty means defaults.
  std::vector<std::string> positive_phrases;
  std::vector<std::string> negative_phrases;

  bool has_smiles_slot() const;
  bool has_text_slot() const;
};

// Throws SemanticError unless the text has exactly one {{SOG}}, at most one
// text slot ({{SMILES}} or {{TEXT}}), one "[Task]" and one "[Answer]".
void validate_template(const TaskTemplate& tmpl);

class TemplateRegistry {
 public:
  // Reads `dir`/tasks.json and the template files it lists.
  static TemplateRegistry load(const std::string& dir);
  static TemplateRegistry load_default();

  void add(TaskTemplate tmpl);
  // Throws UnknownTask.
  const TaskTemplate& get(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, TaskTemplate, std::less<>> templates_;
};

// Directory holding the shipped templates; SOGTOK_TEMPLATE_DIR overrides it.
std::string default_template_dir();

struct PromptRecord {
  std::string prompt;
  std::string answer;
  std::string id;
  std::string split = "train";
  std::optional<int> label;

  bool operator==(const PromptRecord&) const = default;
};

// Fills {{SMILES}} from g.graph_text(), {{SOG}} from tok. The answer comes
// from g.label() when present. Throws MissingText when the template needs a
// SMILES string the graph lacks.
PromptRecord render_prompt(const TaskTemplate& tmpl, const Graph& g, StructuralToken tok);

// Node-level variant: `text` fills {{TEXT}} (or {{SMILES}}).
PromptRecord render_prompt_text(const TaskTemplate& tmpl, std::string_view text, StructuralToken tok, std::string id,
                                std::optional<int> label);

enum class BalancePolicy { kNone, kOneToOne, kOneToFive };

BalancePolicy parse_balance_policy(std::string_view name);
std::string balance_policy_name(BalancePolicy policy);

// Rebalances the records whose split equals `target_split` (labels required):
//   1:1  each smaller class is topped up to the majority count by repeating its
//        records cyclically in a seeded random order;
//   1:5  each smaller class is brought to max(1, majority / 5) records, by
//        seeded subsampling or cyclic repetition.
// Records of other splits pass through untouched; extra copies follow the
// input records. Throws PolicyOnEvalSplit when target_split is "valid" or
// "test" and the policy is not none.
std::vector<PromptRecord> balance_split(std::vector<PromptRecord> records, BalancePolicy policy, std::uint64_t seed,
                                        std::string_view target_split = "train");

// Seeded 8:1:1 split keyed on the id hash, unless `assigned` has the id.
std::string assign_split(std::string_view id, std::uint64_t seed,
                         const std::map<std::string, std::string>* assigned = nullptr);

struct PromptFileSummary {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

std::string format_prompt_line(const PromptRecord& record);

// Writes train.jsonl, valid.jsonl and test.jsonl under `dir`, preserving the
// record order. Throws SemanticError for a record with any other split.
PromptFileSummary write_prompt_files(const std::vector<PromptRecord>& records, const std::string& dir);

}  // namespace sogtok
