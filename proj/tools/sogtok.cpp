// Command-line entry point. Every subcommand writes a run manifest next to its
// output; `replay` re-executes a manifest and compares output checksums.
#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sogtok/analysis.hpp"
#include "sogtok/attributes.hpp"
#include "sogtok/checkpoint.hpp"
#include "sogtok/corpus.hpp"
#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"
#include "sogtok/manifest.hpp"
#include "sogtok/metrics.hpp"
#include "sogtok/prompts.hpp"
#include "sogtok/scaffold.hpp"
#include "sogtok/tokenizer.hpp"

namespace {

using namespace sogtok;
using ojson = nlohmann::ordered_json;

// Bookkeeping shared by all subcommands.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv) {
    manifest_.command = std::move(command);
    manifest_.argv = std::move(argv);
    manifest_.version = SOGTOK_VERSION;
    manifest_.started_at = utc_timestamp();
  }

  ojson& config() { return manifest_.config; }

  void set_seed(std::uint64_t seed) {
    manifest_.seed = seed;
    manifest_.has_seed = true;
  }

  std::string read_input(const std::string& path) {
    std::string bytes = read_file(path);
    manifest_.inputs.push_back({path, checksum_hex(bytes)});
    return bytes;
  }

  std::vector<Graph> read_graphs(const std::vector<std::string>& paths, std::size_t max_nodes) {
    std::vector<Graph> all;
    for (const auto& p : paths) {
      auto part = parse_graph_file(read_input(p), max_nodes);
      all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return all;
  }

  void write_output(const std::string& path, std::string_view bytes) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_file(path, bytes);
    manifest_.outputs.push_back({path, checksum_hex(bytes)});
  }

  void record_output(const std::string& path) { manifest_.outputs.push_back(checksum_file(path)); }

  void finish(const std::string& manifest_path) {
    manifest_.finished_at = utc_timestamp();
    const auto parent = std::filesystem::path(manifest_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_file(manifest_path, format_manifest(manifest_));
  }

 private:
  RunManifest manifest_;
};

std::string manifest_for_file(const std::string& explicit_path, const std::string& out) {
  return explicit_path.empty() ? out + ".manifest.json" : explicit_path;
}

std::string manifest_for_dir(const std::string& explicit_path, const std::string& dir) {
  return explicit_path.empty() ? dir + "/manifest.json" : explicit_path;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t parse_count(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidConfig, "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

void require_seed(const CLI::Option* opt, const std::string& why) {
  if (opt->count() == 0) throw Error(ErrorCode::kInvalidConfig, "--seed is required for " + why);
}

// Options for loading a trained model.
struct ModelInputs {
  std::string checkpoint;
  std::string embedding_table;

  void add_to(CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("--checkpoint", checkpoint, "Model checkpoint file");
    if (required) opt->required();
    sub->add_option("--embedding-table", embedding_table,
                    "Tab-separated attribute embedding table (for models trained with one)");
  }

  TokenizerModel load(Run& run) const {
    run.config()["checkpoint"] = checkpoint;
    run.config()["embedding_table"] = embedding_table;
    TokenizerModel model = deserialize_checkpoint(run.read_input(checkpoint));
    const bool table_model = model.config.embedder_kind == EmbedderKind::kTable;
    if (table_model != !embedding_table.empty()) {
      throw Error(ErrorCode::kInvalidConfig, table_model ? "this checkpoint needs --embedding-table"
                                                         : "this checkpoint uses the hashing embedder; drop --embedding-table");
    }
    if (table_model) {
      // rows of the wrong width raise DimensionMismatch
      model.embedder = std::make_shared<TableEmbedder>(
          TableEmbedder::parse(run.read_input(embedding_table), model.config.dims.d_s));
    }
    return model;
  }
};

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::vector<std::string> data;
  std::string out;
  std::string log;
  std::string manifest;
  std::string embedding_table;
  std::size_t k = 256;
  double beta = 0.25;
  std::uint64_t seed = 0;
  std::string anchor = "degree";
  std::size_t warmup_epochs = 10;
  std::size_t epochs = 50;
  double lr_warmup = 1e-2;
  double lr_gcn = 5e-2;
  double lr_codebook = 0.5;
  std::size_t kmeans_iterations = 20;
  std::size_t batch_size = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 64;
  std::size_t recon_dim = 16;
  std::size_t max_nodes = kDefaultMaxNodes;
  std::size_t checkpoint_every = 1;
  bool no_straight_through = false;
  bool logistic = false;
  bool node_level = false;
  std::size_t hops = 2;
  CLI::Option* seed_opt = nullptr;
};

int cmd_train(const TrainOptions& o, Run& run) {
  require_seed(o.seed_opt, "train");
  run.set_seed(o.seed);
  TrainConfig cfg;
  cfg.model.dims = ModelDims{o.embed_dim, o.hidden_dim, o.latent_dim, o.recon_dim, o.k};
  cfg.model.beta = o.beta;
  cfg.model.strategy = ImportanceStrategy::parse(o.anchor, o.seed);
  cfg.model.straight_through = !o.no_straight_through;
  cfg.model.logistic = o.logistic;
  cfg.model.global_node = !o.node_level;
  cfg.model.seed = o.seed;
  cfg.warmup_epochs = o.warmup_epochs;
  cfg.joint_epochs = o.epochs;
  cfg.lr_warmup = o.lr_warmup;
  cfg.lr_gcn = o.lr_gcn;
  cfg.lr_codebook = o.lr_codebook;
  cfg.kmeans_iterations = o.kmeans_iterations;
  cfg.batch_size = o.batch_size;
  cfg.max_nodes = o.max_nodes;

  std::shared_ptr<const AttributeEmbedder> embedder;
  if (!o.embedding_table.empty()) {
    cfg.model.embedder_kind = EmbedderKind::kTable;
    embedder = std::make_shared<TableEmbedder>(TableEmbedder::parse(run.read_input(o.embedding_table), o.embed_dim));
  }

  auto& c = run.config();
  c["data"] = o.data;
  c["corpus"] = o.data.size() > 1 ? "pooled" : "single";
  c["out"] = o.out;
  c["k"] = o.k;
  c["beta"] = o.beta;
  c["anchor"] = o.anchor;
  c["warmup_epochs"] = o.warmup_epochs;
  c["epochs"] = o.epochs;
  c["lr_warmup"] = o.lr_warmup;
  c["lr_gcn"] = o.lr_gcn;
  c["lr_codebook"] = o.lr_codebook;
  c["kmeans_iterations"] = o.kmeans_iterations;
  c["batch_size"] = o.batch_size;
  c["embed_dim"] = o.embed_dim;
  c["hidden_dim"] = o.hidden_dim;
  c["latent_dim"] = o.latent_dim;
  c["recon_dim"] = o.recon_dim;
  c["max_nodes"] = o.max_nodes;
  c["straight_through"] = !o.no_straight_through;
  c["logistic"] = o.logistic;
  c["node_level"] = o.node_level;
  c["hops"] = o.hops;
  c["embedding_table"] = o.embedding_table;
  c["checkpoint_every"] = o.checkpoint_every;
  // configuration errors surface before any data is read
  cfg.validate();

  std::vector<Graph> graphs = run.read_graphs(o.data, o.max_nodes);
  if (o.node_level) {
    std::vector<Graph> egos;
    for (const auto& g : graphs) {
      for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
        egos.push_back(ego_graph(g, v, o.hops).graph.with_id(g.id() + "#" + std::to_string(v)));
      }
    }
    graphs = std::move(egos);
  }

  const std::string log_path = o.log.empty() ? o.out + ".log.tsv" : o.log;
  std::string log = format_log_header() + "\n";
  std::vector<std::pair<std::string, std::string>> snapshots;
  auto on_epoch = [&](const EpochLog& entry, const TokenizerModel& model) {
    log += format_log_line(entry) + "\n";
    std::cerr << "epoch " << entry.epoch << (entry.warmup ? " (warm-up)" : "") << "  recon " << entry.recon
              << "  total " << entry.total << "  utilization " << entry.utilization << "\n";
    if (o.checkpoint_every > 0 && (entry.epoch + 1) % o.checkpoint_every == 0) {
      snapshots.emplace_back(o.out + ".epoch-" + std::to_string(entry.epoch + 1), serialize_checkpoint(model));
    }
  };
  try {
    TrainResult result = train(graphs, cfg, on_epoch, embedder);
    for (const auto& [path, bytes] : snapshots) run.write_output(path, bytes);
    run.write_output(o.out, serialize_checkpoint(result.model));
    run.write_output(log_path, log);
  } catch (const Error&) {
    // keep the partial log for diagnosis
    write_file(log_path, log);
    throw;
  }
  run.finish(manifest_for_file(o.manifest, o.out));
  return 0;
}

// ---------------------------------------------------------------- tokenize

struct TokenizeOptions {
  ModelInputs model;
  std::vector<std::string> data;
  std::string out;
  std::string manifest;
  std::string nodes;
  bool node_level = false;
  std::size_t hops = 2;
  std::size_t jobs = 1;
  std::size_t max_nodes = kDefaultMaxNodes;
};

std::vector<std::pair<std::string, NodeIndex>> parse_node_list(std::string_view text) {
  std::vector<std::pair<std::string, NodeIndex>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("id,", 0) == 0)) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kSyntaxError, "node list: expected 'graph_id,node'", line_no, 1);
    }
    out.emplace_back(line.substr(0, comma), parse_count(line.substr(comma + 1), "node index"));
  }
  return out;
}

std::vector<NodeTokenAssignment> tokenize_nodes(const std::vector<Graph>& graphs,
                                                const std::vector<std::pair<std::string, NodeIndex>>* list,
                                                const TokenizerModel& model, std::size_t hops) {
  std::vector<NodeTokenAssignment> out;
  if (list) {
    std::map<std::string, const Graph*> by_id;
    for (const auto& g : graphs) by_id.emplace(g.id(), &g);
    for (const auto& [gid, node] : *list) {
      const auto it = by_id.find(gid);
      if (it == by_id.end()) throw Error(ErrorCode::kSemanticError, "node list names unknown graph '" + gid + "'");
      if (node >= it->second->num_nodes()) {
        throw Error(ErrorCode::kNodeOutOfRange, "node " + std::to_string(node) + " of '" + gid + "' out of range");
      }
      out.push_back(assign_node_tokens(*it->second, node, model, hops));
    }
  } else {
    for (const auto& g : graphs) {
      for (NodeIndex v = 0; v < g.num_nodes(); ++v) out.push_back(assign_node_tokens(g, v, model, hops));
    }
  }
  return out;
}

int cmd_tokenize(const TokenizeOptions& o, Run& run) {
  const TokenizerModel model = o.model.load(run);
  auto& c = run.config();
  c["data"] = o.data;
  c["out"] = o.out;
  c["node_level"] = o.node_level;
  c["hops"] = o.hops;
  c["nodes"] = o.nodes;
  c["jobs"] = o.jobs;
  c["max_nodes"] = o.max_nodes;
  const std::vector<Graph> graphs = run.read_graphs(o.data, o.max_nodes);
  if (o.node_level) {
    std::optional<std::vector<std::pair<std::string, NodeIndex>>> list;
    if (!o.nodes.empty()) list = parse_node_list(run.read_input(o.nodes));
    const auto assigned = tokenize_nodes(graphs, list ? &*list : nullptr, model, o.hops);
    run.write_output(o.out, export_node_token_table(assigned));
  } else {
    const auto assigned = assign_tokens(graphs, model, o.jobs, o.max_nodes);
    run.write_output(o.out, export_token_table(assigned));
  }
  run.finish(manifest_for_file(o.manifest, o.out));
  return 0;
}

// ---------------------------------------------------------------- gen-corpus

struct CorpusOptions {
  ModelInputs model;
  std::vector<std::string> data;
  std::string out;
  std::string manifest;
  std::string kinds = "knn,simjudge,descmatch";
  std::size_t knn_k = 5;
  double tau_pos = 0.8;
  double tau_neg = 0.2;
  std::string ratio = "1:1";
  std::size_t budget = 0;
  std::size_t name_budget = kDefaultNameBudget;
  std::size_t jobs = 1;
  std::size_t max_nodes = kDefaultMaxNodes;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_gen_corpus(const CorpusOptions& o, Run& run) {
  std::vector<CorpusKind> kinds;
  for (const auto& name : split_list(o.kinds, ',')) kinds.push_back(parse_corpus_kind(name));
  if (kinds.empty()) throw Error(ErrorCode::kInvalidConfig, "--kinds lists no corpus kind");
  auto wants = [&](CorpusKind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
  const bool needs_graphs = wants(CorpusKind::kSimJudge) || wants(CorpusKind::kDescMatch);
  if (wants(CorpusKind::kSimJudge)) {
    require_seed(o.seed_opt, "simjudge records");
    run.set_seed(o.seed);
  }
  if (needs_graphs && o.data.empty()) throw Error(ErrorCode::kInvalidConfig, "--data is required for simjudge and descmatch");
  const auto ratio = split_list(o.ratio, ':');
  if (ratio.size() != 2) throw Error(ErrorCode::kInvalidConfig, "--ratio must look like 1:1");

  SimJudgeConfig sj;
  sj.thresholds = {o.tau_pos, o.tau_neg};
  sj.thresholds.validate();
  sj.similar_weight = parse_count(ratio[0], "ratio");
  sj.dissimilar_weight = parse_count(ratio[1], "ratio");
  sj.budget = o.budget;
  sj.seed = o.seed;

  const TokenizerModel model = o.model.load(run);
  auto& c = run.config();
  c["data"] = o.data;
  c["out"] = o.out;
  c["kinds"] = o.kinds;
  c["knn_k"] = o.knn_k;
  c["tau_pos"] = o.tau_pos;
  c["tau_neg"] = o.tau_neg;
  c["ratio"] = o.ratio;
  c["budget"] = o.budget == 0 ? 4 * model.config.dims.K : o.budget;
  c["name_budget"] = o.name_budget;
  c["jobs"] = o.jobs;
  c["max_nodes"] = o.max_nodes;

  std::vector<QARecord> records;
  if (wants(CorpusKind::kKnn)) {
    KnnOutput knn = gen_knn_records(model.params.codebook, o.knn_k);
    for (std::size_t z : knn.zero_norm_entries) std::cerr << "warning: codebook entry " << z << " has zero norm\n";
    records.insert(records.end(), knn.records.begin(), knn.records.end());
  }
  if (needs_graphs) {
    const std::vector<Graph> graphs = run.read_graphs(o.data, o.max_nodes);
    const auto assigned = assign_tokens(graphs, model, o.jobs, o.max_nodes);
    if (wants(CorpusKind::kSimJudge)) {
      std::vector<SimJudgeItem> items;
      for (const auto& a : assigned) items.push_back({a.graph_id, a.graph_token, a.graph_embedding});
      SimJudgeOutput out = gen_simjudge_records(items, model.config.dims.K, sj);
      for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
      records.insert(records.end(), out.records.begin(), out.records.end());
    }
    if (wants(CorpusKind::kDescMatch)) {
      auto dm = gen_descmatch_records(graphs, assigned, model.config.strategy, o.name_budget);
      records.insert(records.end(), dm.begin(), dm.end());
    }
  }
  run.write_output(o.out, format_corpus(std::move(records)));
  run.finish(manifest_for_file(o.manifest, o.out));
  return 0;
}

// ---------------------------------------------------------------- gen-prompts

struct PromptOptions {
  std::vector<std::string> data;
  ModelInputs model;
  std::string tokens;
  std::string labels;
  std::string splits;
  std::string task;
  std::string templates;
  std::string balance = "none";
  std::string out;
  std::string manifest;
  bool node_level = false;
  std::size_t hops = 2;
  std::size_t jobs = 1;
  std::size_t max_nodes = kDefaultMaxNodes;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_gen_prompts(const PromptOptions& o, Run& run) {
  require_seed(o.seed_opt, "gen-prompts (split assignment and balancing)");
  run.set_seed(o.seed);
  const BalancePolicy policy = parse_balance_policy(o.balance);
  if (o.tokens.empty() == o.model.checkpoint.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "give exactly one of --tokens and --checkpoint");
  }
  const std::string template_dir = o.templates.empty() ? default_template_dir() : o.templates;
  const TemplateRegistry registry = TemplateRegistry::load(template_dir);
  const TaskTemplate& tmpl = registry.get(o.task);
  run.read_input(template_dir + "/tasks.json");

  auto& c = run.config();
  c["task"] = o.task;
  c["templates"] = template_dir;
  c["data"] = o.data;
  c["tokens"] = o.tokens;
  c["labels"] = o.labels;
  c["splits"] = o.splits;
  c["balance"] = balance_policy_name(policy);
  c["out"] = o.out;
  c["node_level"] = o.node_level;
  c["hops"] = o.hops;
  c["jobs"] = o.jobs;
  c["max_nodes"] = o.max_nodes;

  std::vector<Graph> graphs = run.read_graphs(o.data, o.max_nodes);
  std::map<std::string, int> labels;
  if (!o.labels.empty()) labels = parse_label_csv(run.read_input(o.labels));
  std::map<std::string, std::string> splits;
  if (!o.splits.empty()) splits = parse_two_column_csv(run.read_input(o.splits));

  std::map<std::string, StructuralToken> token_of;
  if (!o.tokens.empty()) {
    const std::string table = run.read_input(o.tokens);
    c["token_table_checksum"] = checksum_hex(table);
    for (const auto& row : parse_token_table(table)) token_of[row.id] = row.graph_token;
  } else {
    const TokenizerModel model = o.model.load(run);
    if (o.node_level) {
      const auto assigned = tokenize_nodes(graphs, nullptr, model, o.hops);
      c["token_table_checksum"] = checksum_hex(export_node_token_table(assigned));
      for (const auto& a : assigned) token_of[a.id] = a.token;
    } else {
      const auto assigned = assign_tokens(graphs, model, o.jobs, o.max_nodes);
      c["token_table_checksum"] = checksum_hex(export_token_table(assigned));
      for (const auto& a : assigned) token_of[a.graph_id] = a.graph_token;
    }
  }
  auto token_for = [&](const std::string& id) {
    const auto it = token_of.find(id);
    if (it == token_of.end()) throw Error(ErrorCode::kSemanticError, "no structural token for '" + id + "'");
    return it->second;
  };

  std::vector<PromptRecord> records;
  std::size_t unlabeled = 0;
  if (o.node_level) {
    for (const auto& g : graphs) {
      for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
        const std::string id = g.id() + "#" + std::to_string(v);
        const auto lab = labels.find(id);
        if (lab == labels.end()) {
          ++unlabeled;
          continue;
        }
        const auto& text = g.nodes()[v].text;
        if ((tmpl.has_text_slot() || tmpl.has_smiles_slot()) && !text) {
          throw Error(ErrorCode::kMissingText, "node '" + id + "' has no text for task '" + tmpl.id + "'");
        }
        records.push_back(render_prompt_text(tmpl, text.value_or(""), token_for(id), id, lab->second));
      }
    }
  } else {
    if (!labels.empty()) graphs = join_labels(graphs, labels);
    for (const auto& g : graphs) {
      if (!g.label()) {
        ++unlabeled;
        continue;
      }
      records.push_back(render_prompt(tmpl, g, token_for(g.id())));
    }
  }
  for (auto& r : records) r.split = assign_split(r.id, o.seed, splits.empty() ? nullptr : &splits);
  records = balance_split(std::move(records), policy, o.seed, "train");
  c["skipped_unlabeled"] = unlabeled;
  if (unlabeled > 0) std::cerr << "skipped " << unlabeled << " unlabeled records\n";

  const PromptFileSummary summary = write_prompt_files(records, o.out);
  for (const char* name : {"train.jsonl", "valid.jsonl", "test.jsonl"}) run.record_output(o.out + "/" + name);
  std::cerr << "train " << summary.train << "  valid " << summary.valid << "  test " << summary.test << "\n";
  run.finish(manifest_for_dir(o.manifest, o.out));
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::vector<std::string> responses;
  std::string task;
  std::string templates;
  std::string labels;
  std::string prompts;
  std::string out;
  std::string manifest;
};

std::map<std::string, int> labels_from_prompt_file(std::string_view text, const TaskTemplate& tmpl) {
  std::map<std::string, int> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto answer = j.at("answer").get<std::string>();
      const auto it = std::find(tmpl.answers.begin(), tmpl.answers.end(), answer);
      if (it == tmpl.answers.end()) {
        throw Error(ErrorCode::kSemanticError, "answer '" + answer + "' is not an answer of task '" + tmpl.id + "'",
                    line_no, 1);
      }
      out[j.at("id").get<std::string>()] = static_cast<int>(it - tmpl.answers.begin());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSyntaxError, std::string("prompt file: ") + e.what(), line_no, 1);
    }
  }
  return out;
}

int cmd_eval(const EvalOptions& o, Run& run) {
  const std::string template_dir = o.templates.empty() ? default_template_dir() : o.templates;
  const TemplateRegistry registry = TemplateRegistry::load(template_dir);
  const TaskTemplate& tmpl = registry.get(o.task);
  if (o.labels.empty() == o.prompts.empty()) throw Error(ErrorCode::kInvalidConfig, "give exactly one of --labels and --prompts");
  auto& c = run.config();
  c["responses"] = o.responses;
  c["task"] = o.task;
  c["templates"] = template_dir;
  c["labels"] = o.labels;
  c["prompts"] = o.prompts;
  c["out"] = o.out;

  const std::map<std::string, int> labels = o.labels.empty()
                                                ? labels_from_prompt_file(run.read_input(o.prompts), tmpl)
                                                : parse_label_csv(run.read_input(o.labels));
  std::string csv = metric_csv_header();
  std::vector<double> aucs;
  std::vector<double> accs;
  std::vector<double> f1s;
  for (std::size_t i = 0; i < o.responses.size(); ++i) {
    const auto responses = parse_responses(run.read_input(o.responses[i]));
    const MetricReport report = evaluate_task(tmpl, responses, labels);
    csv += format_metric_row(o.task, std::to_string(i), report);
    if (report.auc) aucs.push_back(*report.auc);
    accs.push_back(report.accuracy);
    f1s.push_back(report.micro_f1);
  }
  std::string summary = "task,metric,mean,stddev,runs\n";
  auto add = [&](const char* name, const std::vector<double>& v) {
    if (v.empty()) return;
    const RunAggregate a = aggregate_runs(v);
    char buf[96];
    std::snprintf(buf, sizeof buf, ",%s,%.9g,%.9g,%zu\n", name, a.mean, a.stddev, v.size());
    summary += o.task + buf;
  };
  add("auc", aucs);
  add("accuracy", accs);
  add("micro_f1", f1s);
  run.write_output(o.out, csv);
  run.write_output(o.out + ".summary.csv", summary);
  run.finish(manifest_for_file(o.manifest, o.out));
  return 0;
}

// ---------------------------------------------------------------- stats

struct StatsOptions {
  ModelInputs model;
  std::vector<std::string> data;
  std::string out;
  std::string manifest;
  std::size_t corr_first = 50;
  std::size_t trials = 10;
  std::size_t jobs = 1;
  std::size_t max_nodes = kDefaultMaxNodes;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

int cmd_stats(const StatsOptions& o, Run& run) {
  if (!o.data.empty()) {
    require_seed(o.seed_opt, "stats over a dataset (relabeling and shuffled baselines)");
    run.set_seed(o.seed);
  }
  const TokenizerModel model = o.model.load(run);
  const std::size_t K = model.config.dims.K;
  const std::size_t m = std::min(o.corr_first, K);
  auto& c = run.config();
  c["data"] = o.data;
  c["out"] = o.out;
  c["corr_first"] = m;
  c["trials"] = o.trials;
  c["jobs"] = o.jobs;
  c["max_nodes"] = o.max_nodes;

  ojson summary;
  summary["K"] = K;
  const CorrelationMatrix corr = codebook_correlation(model.params.codebook, m);
  run.write_output(o.out + "/correlation.csv", format_correlation_csv(corr));
  summary["zero_norm_rows"] = corr.zero_norm;
  for (std::size_t z : corr.zero_norm) std::cerr << "warning: codebook entry " << z << " has zero norm\n";

  if (!o.data.empty()) {
    const std::vector<Graph> graphs = run.read_graphs(o.data, o.max_nodes);
    const auto assigned = assign_tokens(graphs, model, o.jobs, o.max_nodes);
    run.write_output(o.out + "/embeddings.csv", export_embeddings(assigned, model.config.dims.d));

    std::vector<std::size_t> usage(K, 0);
    for (const auto& a : assigned) ++usage[a.graph_token.index];
    std::string usage_csv = "token,count\n";
    std::size_t used = 0;
    for (std::size_t k = 0; k < K; ++k) {
      usage_csv += std::to_string(k) + ',' + std::to_string(usage[k]) + '\n';
      used += usage[k] > 0;
    }
    run.write_output(o.out + "/usage.csv", usage_csv);
    summary["graphs"] = graphs.size();
    summary["tokens_used"] = used;
    summary["utilization"] = K == 0 ? 0.0 : static_cast<double>(used) / static_cast<double>(K);

    const PermutationReport perm = permutation_consistency(model, graphs, o.trials, o.seed);
    run.write_output(o.out + "/permutation.csv", format_permutation_report(perm));
    summary["permutation_rate"] = perm.rate;

    std::vector<Scaffold> scaffolds;
    std::vector<std::size_t> tokens;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (!graphs[i].graph_text()) continue;
      scaffolds.push_back(murcko_scaffold(graphs[i]));
      tokens.push_back(assigned[i].graph_token.index);
    }
    if (!scaffolds.empty()) {
      const ScaffoldGrouping groups = group_scaffolds(scaffolds);
      const ScaffoldReport report = scaffold_consistency(tokens, groups.group_of, o.seed);
      run.write_output(o.out + "/scaffold.csv", format_scaffold_report(report));
      summary["scaffold_groups"] = groups.group_count;
      summary["scaffold_key_collisions"] = groups.key_collisions;
      summary["scaffold_purity"] = report.mean_purity;
      summary["scaffold_baseline_purity"] = report.baseline_purity;
    }
  }
  run.write_output(o.out + "/summary.json", summary.dump(2) + "\n");
  run.finish(manifest_for_dir(o.manifest, o.out));
  return 0;
}

// ---------------------------------------------------------------- dispatch

int run_args(std::vector<std::string> args, bool allow_replay);

int cmd_replay(const std::string& manifest_path) {
  const RunManifest recorded = parse_manifest(read_file(manifest_path));
  for (const auto& in : recorded.inputs) {
    if (checksum_file(in.path).fnv1a64 != in.fnv1a64) {
      throw Error(ErrorCode::kSemanticError, "input '" + in.path + "' changed since the recorded run");
    }
  }
  const int rc = run_args(recorded.argv, false);
  if (rc != 0) return rc;
  std::size_t differing = 0;
  for (const auto& out : recorded.outputs) {
    if (checksum_file(out.path).fnv1a64 != out.fnv1a64) {
      std::cerr << "differs: " << out.path << "\n";
      ++differing;
    }
  }
  if (differing > 0) {
    std::cerr << differing << " of " << recorded.outputs.size() << " outputs differ\n";
    return 2;
  }
  std::cout << "replay: " << recorded.outputs.size() << " outputs identical\n";
  return 0;
}

int run_args(std::vector<std::string> args, bool allow_replay) {
  CLI::App app{"Structural tokenizer for graphs: train, tokenize, build corpora, prompts and reports"};
  app.set_version_flag("--version", std::string(SOGTOK_VERSION));
  app.require_subcommand(1);

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "Train a tokenizer model");
  train_cmd->add_option("--data", train_o.data, "Graph file(s); several files are pooled")->required();
  train_cmd->add_option("--out", train_o.out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_o.log, "Epoch log path (default <out>.log.tsv)");
  train_cmd->add_option("--manifest", train_o.manifest, "Run manifest path");
  train_cmd->add_option("--k", train_o.k, "Vocabulary size")->capture_default_str();
  train_cmd->add_option("--beta", train_o.beta, "Commitment weight")->capture_default_str();
  train_o.seed_opt = train_cmd->add_option("--seed", train_o.seed, "Random seed");
  train_cmd->add_option("--anchor", train_o.anchor, "degree|pagerank|betweenness|random")->capture_default_str();
  train_cmd->add_option("--warmup-epochs", train_o.warmup_epochs)->capture_default_str();
  train_cmd->add_option("--epochs", train_o.epochs, "Joint epochs after warm-up")->capture_default_str();
  train_cmd->add_option("--lr-warmup", train_o.lr_warmup)->capture_default_str();
  train_cmd->add_option("--lr-gcn", train_o.lr_gcn)->capture_default_str();
  train_cmd->add_option("--lr-codebook", train_o.lr_codebook)->capture_default_str();
  train_cmd->add_option("--kmeans-iterations", train_o.kmeans_iterations)->capture_default_str();
  train_cmd->add_option("--batch-size", train_o.batch_size, "Graphs per step, 0 = full batch")->capture_default_str();
  train_cmd->add_option("--embed-dim", train_o.embed_dim)->capture_default_str();
  train_cmd->add_option("--hidden-dim", train_o.hidden_dim)->capture_default_str();
  train_cmd->add_option("--latent-dim", train_o.latent_dim)->capture_default_str();
  train_cmd->add_option("--recon-dim", train_o.recon_dim)->capture_default_str();
  train_cmd->add_option("--max-nodes", train_o.max_nodes)->capture_default_str();
  train_cmd->add_option("--checkpoint-every", train_o.checkpoint_every, "Also write <out>.epoch-N every N epochs, 0 = final only")->capture_default_str();
  train_cmd->add_option("--embedding-table", train_o.embedding_table, "Attribute embedding table");
  train_cmd->add_flag("--no-straight-through", train_o.no_straight_through);
  train_cmd->add_flag("--logistic", train_o.logistic, "Pass reconstructed adjacency through a logistic");
  train_cmd->add_flag("--node-level", train_o.node_level, "Train on per-node ego-graphs without a global node");
  train_cmd->add_option("--hops", train_o.hops, "Ego-graph radius for --node-level")->capture_default_str();

  TokenizeOptions tok_o;
  auto* tok_cmd = app.add_subcommand("tokenize", "Assign structural tokens");
  tok_o.model.add_to(tok_cmd);
  tok_cmd->add_option("--data", tok_o.data, "Graph file(s)")->required();
  tok_cmd->add_option("--out", tok_o.out, "Token table path")->required();
  tok_cmd->add_option("--manifest", tok_o.manifest);
  tok_cmd->add_flag("--node-level", tok_o.node_level);
  tok_cmd->add_option("--hops", tok_o.hops)->capture_default_str();
  tok_cmd->add_option("--nodes", tok_o.nodes, "CSV of graph_id,node to tokenize (default: all nodes)");
  tok_cmd->add_option("--jobs", tok_o.jobs)->capture_default_str();
  tok_cmd->add_option("--max-nodes", tok_o.max_nodes)->capture_default_str();

  CorpusOptions corp_o;
  auto* corp_cmd = app.add_subcommand("gen-corpus", "Generate structure QA records");
  corp_o.model.add_to(corp_cmd);
  corp_cmd->add_option("--data", corp_o.data, "Graph file(s) for simjudge and descmatch");
  corp_cmd->add_option("--out", corp_o.out, "Corpus JSONL path")->required();
  corp_cmd->add_option("--manifest", corp_o.manifest);
  corp_cmd->add_option("--kinds", corp_o.kinds, "Comma list of knn, simjudge, descmatch")->capture_default_str();
  corp_cmd->add_option("--knn-k", corp_o.knn_k)->capture_default_str();
  corp_cmd->add_option("--tau-pos", corp_o.tau_pos)->capture_default_str();
  corp_cmd->add_option("--tau-neg", corp_o.tau_neg)->capture_default_str();
  corp_cmd->add_option("--ratio", corp_o.ratio, "similar:dissimilar")->capture_default_str();
  corp_cmd->add_option("--budget", corp_o.budget, "simjudge records, 0 = 4K")->capture_default_str();
  corp_cmd->add_option("--name-budget", corp_o.name_budget)->capture_default_str();
  corp_cmd->add_option("--jobs", corp_o.jobs)->capture_default_str();
  corp_cmd->add_option("--max-nodes", corp_o.max_nodes)->capture_default_str();
  corp_o.seed_opt = corp_cmd->add_option("--seed", corp_o.seed);

  PromptOptions pr_o;
  auto* pr_cmd = app.add_subcommand("gen-prompts", "Emit downstream prompt files");
  pr_o.model.add_to(pr_cmd, false);
  pr_cmd->add_option("--data", pr_o.data, "Graph file(s)")->required();
  pr_cmd->add_option("--task", pr_o.task, "Task template id")->required();
  pr_cmd->add_option("--out", pr_o.out, "Output directory")->required();
  pr_cmd->add_option("--tokens", pr_o.tokens, "Token table (instead of --checkpoint)");
  pr_cmd->add_option("--labels", pr_o.labels, "CSV id,label");
  pr_cmd->add_option("--splits", pr_o.splits, "CSV id,split");
  pr_cmd->add_option("--templates", pr_o.templates, "Template directory");
  pr_cmd->add_option("--balance", pr_o.balance, "none|1:1|1:5")->capture_default_str();
  pr_cmd->add_option("--manifest", pr_o.manifest);
  pr_cmd->add_flag("--node-level", pr_o.node_level);
  pr_cmd->add_option("--hops", pr_o.hops)->capture_default_str();
  pr_cmd->add_option("--jobs", pr_o.jobs)->capture_default_str();
  pr_cmd->add_option("--max-nodes", pr_o.max_nodes)->capture_default_str();
  pr_o.seed_opt = pr_cmd->add_option("--seed", pr_o.seed);

  EvalOptions ev_o;
  auto* ev_cmd = app.add_subcommand("eval", "Score model responses");
  ev_cmd->add_option("--responses", ev_o.responses, "Response JSONL file(s), one per run")->required();
  ev_cmd->add_option("--task", ev_o.task)->required();
  ev_cmd->add_option("--labels", ev_o.labels, "CSV id,label");
  ev_cmd->add_option("--prompts", ev_o.prompts, "Prompt JSONL whose answers give the labels");
  ev_cmd->add_option("--templates", ev_o.templates);
  ev_cmd->add_option("--out", ev_o.out, "Metric CSV path")->required();
  ev_cmd->add_option("--manifest", ev_o.manifest);

  StatsOptions st_o;
  auto* st_cmd = app.add_subcommand("stats", "Codebook and token analyses");
  st_o.model.add_to(st_cmd);
  st_cmd->add_option("--data", st_o.data, "Graph file(s) for embeddings and consistency reports");
  st_cmd->add_option("--out", st_o.out, "Output directory")->required();
  st_cmd->add_option("--manifest", st_o.manifest);
  st_cmd->add_option("--corr-first", st_o.corr_first, "Correlate the first m entries")->capture_default_str();
  st_cmd->add_option("--trials", st_o.trials, "Relabelings per graph")->capture_default_str();
  st_cmd->add_option("--jobs", st_o.jobs)->capture_default_str();
  st_cmd->add_option("--max-nodes", st_o.max_nodes)->capture_default_str();
  st_o.seed_opt = st_cmd->add_option("--seed", st_o.seed);

  std::string replay_manifest;
  CLI::App* replay_cmd = nullptr;
  if (allow_replay) {
    replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare outputs");
    replay_cmd->add_option("--manifest", replay_manifest)->required();
  }

  const std::vector<std::string> recorded = args;
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (replay_cmd && replay_cmd->parsed()) return cmd_replay(replay_manifest);
  Run run(app.get_subcommands().front()->get_name(), recorded);
  if (train_cmd->parsed()) return cmd_train(train_o, run);
  if (tok_cmd->parsed()) return cmd_tokenize(tok_o, run);
  if (corp_cmd->parsed()) return cmd_gen_corpus(corp_o, run);
  if (pr_cmd->parsed()) return cmd_gen_prompts(pr_o, run);
  if (ev_cmd->parsed()) return cmd_eval(ev_o, run);
  if (st_cmd->parsed()) return cmd_stats(st_o, run);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_args(std::move(args), true);
  } catch (const sogtok::Error& e) {
    std::cerr << "error [" << sogtok::error_code_name(e.code()) << "]: " << e.what() << "\n";
    return sogtok::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [IOFailure]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
