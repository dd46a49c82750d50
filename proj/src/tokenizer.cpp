#include "sogtok/tokenizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sogtok/error.hpp"
#include "sogtok/random.hpp"

namespace sogtok {

const AttributeEmbedder& TokenizerModel::attribute_embedder() const {
  if (!embedder) throw Error(ErrorCode::kInvalidConfig, "model has no attribute embedder attached");
  return *embedder;
}

std::shared_ptr<const AttributeEmbedder> make_embedder(const ModelConfig& config) {
  if (config.embedder_kind == EmbedderKind::kTable) return nullptr;
  return std::make_shared<HashingEmbedder>(config.dims.d_s, config.embedder_seed);
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (model.dims.K < 2) fail("K must be at least 2");
  if (model.dims.d_s == 0 || model.dims.d_h == 0 || model.dims.d == 0 || model.dims.d_r == 0) {
    fail("model dimensions must be positive");
  }
  if (!(model.beta > 0.0) || !std::isfinite(model.beta)) fail("beta must be positive");
  if (!(lr_warmup > 0.0) || !(lr_gcn > 0.0) || !(lr_codebook > 0.0)) fail("learning rates must be positive");
  if (max_nodes == 0) fail("max_nodes must be positive");
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string train_manifest(const TrainConfig& cfg, std::size_t dataset_size) {
  nlohmann::ordered_json j;
  const auto& m = cfg.model;
  j["d_s"] = m.dims.d_s;
  j["d_h"] = m.dims.d_h;
  j["d"] = m.dims.d;
  j["d_r"] = m.dims.d_r;
  j["K"] = m.dims.K;
  j["beta"] = m.beta;
  j["anchor"] = m.strategy.name();
  j["anchor_seed"] = m.strategy.seed;
  j["embedder"] = m.embedder_kind == EmbedderKind::kHashing ? "hashing" : "table";
  j["embedder_seed"] = m.embedder_seed;
  j["straight_through"] = m.straight_through;
  j["logistic"] = m.logistic;
  j["global_node"] = m.global_node;
  j["seed"] = m.seed;
  j["warmup_epochs"] = cfg.warmup_epochs;
  j["joint_epochs"] = cfg.joint_epochs;
  j["lr_warmup"] = cfg.lr_warmup;
  j["lr_gcn"] = cfg.lr_gcn;
  j["lr_codebook"] = cfg.lr_codebook;
  j["kmeans_iterations"] = cfg.kmeans_iterations;
  j["batch_size"] = cfg.batch_size;
  j["dataset_size"] = dataset_size;
  return j.dump();
}

// Groups of sample indices per optimizer step for one epoch.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (batch_size == 0 || batch_size >= n) return {order};
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
  }
  return batches;
}

}  // namespace

std::string format_log_header() { return "epoch\trecon\tupdate\tcommit\ttotal\tutilization\tdead_entries"; }

std::string format_log_line(const EpochLog& e) {
  return std::to_string(e.epoch) + "\t" + format_double(e.recon) + "\t" + format_double(e.update) + "\t" +
         format_double(e.commit) + "\t" + format_double(e.total) + "\t" + format_double(e.utilization) + "\t" +
         std::to_string(e.dead_entries);
}

StructuralToken parse_token(std::string_view text, std::size_t vocabulary_size) {
  constexpr std::string_view prefix = "<SOG_";
  if (!text.starts_with(prefix) || !text.ends_with(">") || text.size() <= prefix.size() + 1) {
    throw Error(ErrorCode::kSyntaxError, "not a structural token: '" + std::string(text) + "'");
  }
  const std::string_view digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
  if (digits.size() > 1 && digits.front() == '0') {
    throw Error(ErrorCode::kSyntaxError, "leading zero in structural token '" + std::string(text) + "'");
  }
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw Error(ErrorCode::kSyntaxError, "not a structural token: '" + std::string(text) + "'");
  }
  if (vocabulary_size != 0 && index >= vocabulary_size) {
    throw Error(ErrorCode::kInvalidConfig,
                "token index " + std::to_string(index) + " outside vocabulary of " + std::to_string(vocabulary_size));
  }
  return StructuralToken{index};
}

PreparedGraph prepare_graph(const Graph& g, const ModelConfig& config, const AttributeEmbedder& embedder,
                            std::size_t max_nodes) {
  if (g.has_global_node()) throw Error(ErrorCode::kAlreadyAugmented, "graph '" + g.id() + "' already has a global node");
  if (g.num_nodes() > max_nodes) {
    throw Error(ErrorCode::kGraphTooLarge, "graph '" + g.id() + "' has " + std::to_string(g.num_nodes()) +
                                               " nodes, limit " + std::to_string(max_nodes));
  }
  if (embedder.dimension() != config.dims.d_s) {
    throw Error(ErrorCode::kDimensionMismatch, "embedder width " + std::to_string(embedder.dimension()) +
                                                   " != d_s " + std::to_string(config.dims.d_s));
  }
  PreparedGraph out;
  out.attributes = assign_attributes(g, config.strategy);
  const std::size_t n = g.num_nodes();
  out.position_of.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) out.position_of[out.attributes.canonical_order[p]] = p;

  Graph ordered = permute(g, out.position_of);
  if (config.global_node) ordered = augment_with_global_node(ordered);
  out.A = build_adjacency(ordered);

  const Matrix rows = embed_attributes(out.attributes, embedder, config.global_node);
  out.X.resize(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < n; ++i) {
    out.X.row(static_cast<Eigen::Index>(out.position_of[i])) = rows.row(static_cast<Eigen::Index>(i));
  }
  if (config.global_node) out.X.row(static_cast<Eigen::Index>(n)) = rows.row(static_cast<Eigen::Index>(n));
  return out;
}

TrainResult train(std::span<const Graph> dataset, const TrainConfig& cfg, const EpochCallback& on_epoch,
                  std::shared_ptr<const AttributeEmbedder> embedder) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "training dataset is empty");
  if (!embedder) embedder = make_embedder(cfg.model);
  if (!embedder) throw Error(ErrorCode::kInvalidConfig, "table embedder models need an explicit embedder");

  TrainResult result;
  TokenizerModel& model = result.model;
  model.config = cfg.model;
  model.embedder = embedder;
  model.manifest = train_manifest(cfg, dataset.size());
  Rng init_rng(derive_seed(cfg.model.seed, "init"));
  model.params = init_parameters(cfg.model.dims, init_rng);

  std::vector<PreparedGraph> samples;
  samples.reserve(dataset.size());
  for (const Graph& g : dataset) samples.push_back(prepare_graph(g, cfg.model, *embedder, cfg.max_nodes));

  Rng batch_rng(derive_seed(cfg.model.seed, "batches"));
  Parameters& p = model.params;
  const std::size_t K = cfg.model.dims.K;
  std::size_t epoch = 0;

  auto run_epoch = [&](bool warmup, AdamOptimizer& optimizer) {
    ForwardOptions options;
    options.quantize = !warmup;
    options.straight_through = cfg.model.straight_through;
    options.logistic = cfg.model.logistic;
    options.beta = cfg.model.beta;

    EpochLog entry;
    entry.epoch = epoch;
    entry.warmup = warmup;
    std::vector<bool> used(K, false);
    for (const auto& batch : make_batches(samples.size(), cfg.batch_size, batch_rng)) {
      Gradients grads = Gradients::zeros_like(p);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t idx : batch) {
        const ForwardState st = forward(samples[idx].A, samples[idx].X, p, options);
        entry.recon += st.loss.reconstruction;
        entry.update += st.loss.update;
        entry.commit += st.loss.commitment;
        entry.total += st.loss.total;
        const auto indices = warmup ? quantize(st.H, p.codebook).indices : st.selection.indices;
        for (std::size_t k : indices) used[k] = true;
        accumulate_gradients(st, p, scale, grads);
      }
      if (warmup) {
        optimizer.step({{&grads.W1, &grads.W2, &grads.Wd}});
      } else {
        optimizer.step({{&grads.W1, &grads.W2, &grads.Wd}, {&grads.codebook}});
      }
    }
    const double count = static_cast<double>(samples.size());
    entry.recon /= count;
    entry.update /= count;
    entry.commit /= count;
    entry.total /= count;
    const auto live = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
    entry.utilization = static_cast<double>(live) / static_cast<double>(K);
    entry.dead_entries = K - live;
    if (!std::isfinite(entry.total)) {
      throw Error(ErrorCode::kNonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch));
    }
    try {
      check_finite(p);
    } catch (const Error&) {
      throw Error(ErrorCode::kNonFiniteLoss, "non-finite parameters after epoch " + std::to_string(epoch));
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry, model);
    ++epoch;
  };

  if (cfg.warmup_epochs > 0) {
    AdamOptimizer optimizer;
    optimizer.add_group("encoder+decoder", cfg.lr_warmup, {&p.encoder.W1, &p.encoder.W2, &p.decoder.Wd});
    for (std::size_t e = 0; e < cfg.warmup_epochs; ++e) run_epoch(true, optimizer);

    if (cfg.joint_epochs > 0) {
      std::size_t total_rows = 0;
      for (const auto& s : samples) total_rows += static_cast<std::size_t>(s.A.rows());
      Matrix points(static_cast<Eigen::Index>(total_rows), static_cast<Eigen::Index>(cfg.model.dims.d));
      Eigen::Index row = 0;
      for (const auto& s : samples) {
        const Matrix h = encode(s.A, s.X, p.encoder);
        points.middleRows(row, h.rows()) = h;
        row += h.rows();
      }
      Rng kmeans_rng(derive_seed(cfg.model.seed, "kmeans"));
      p.codebook.entries = kmeans(points, K, cfg.kmeans_iterations, kmeans_rng);
    }
  }
  if (cfg.joint_epochs > 0) {
    AdamOptimizer optimizer;
    optimizer.add_group("encoder+decoder", cfg.lr_gcn, {&p.encoder.W1, &p.encoder.W2, &p.decoder.Wd});
    optimizer.add_group("codebook", cfg.lr_codebook, {&p.codebook.entries});
    for (std::size_t e = 0; e < cfg.joint_epochs; ++e) run_epoch(false, optimizer);
  }
  return result;
}

TokenAssignment assign_token(const Graph& g, const TokenizerModel& model, std::size_t max_nodes) {
  if (!model.config.global_node) {
    throw Error(ErrorCode::kInvalidConfig, "graph tokens need a model trained with the global node");
  }
  const PreparedGraph prepared = prepare_graph(g, model.config, model.attribute_embedder(), max_nodes);
  const Matrix H = encode(prepared.A, prepared.X, model.params.encoder);
  const QuantizedSelection sel = quantize(H, model.params.codebook);
  TokenAssignment out;
  out.graph_id = g.id();
  const std::size_t n = g.num_nodes();
  out.graph_token = StructuralToken{sel.indices[n]};
  out.node_tokens.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.node_tokens[i] = StructuralToken{sel.indices[prepared.position_of[i]]};
  out.graph_embedding = H.row(static_cast<Eigen::Index>(n)).transpose();
  return out;
}

NodeTokenAssignment assign_node_tokens(const Graph& g, NodeIndex center, const TokenizerModel& model,
                                       std::size_t hops) {
  const EgoGraph ego = ego_graph(g, center, hops);
  ModelConfig config = model.config;
  config.global_node = false;
  const PreparedGraph prepared = prepare_graph(ego.graph, config, model.attribute_embedder(), ego.graph.num_nodes());
  const Matrix H = encode(prepared.A, prepared.X, model.params.encoder);
  const QuantizedSelection sel = quantize(H, model.params.codebook);
  NodeTokenAssignment out;
  out.id = g.id() + "#" + std::to_string(center);
  const std::size_t row = prepared.position_of[0];
  out.token = StructuralToken{sel.indices[row]};
  for (std::size_t i = 0; i < ego.graph.num_nodes(); ++i) {
    out.ego_tokens.push_back(StructuralToken{sel.indices[prepared.position_of[i]]});
  }
  out.embedding = H.row(static_cast<Eigen::Index>(row)).transpose();
  return out;
}

std::vector<TokenAssignment> assign_tokens(std::span<const Graph> graphs, const TokenizerModel& model,
                                           std::size_t jobs, std::size_t max_nodes) {
  std::vector<std::optional<TokenAssignment>> slots(graphs.size());
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(jobs, 1));
  auto work = [&](std::size_t worker, std::size_t stride) {
    try {
      for (std::size_t i = worker; i < graphs.size(); i += stride) slots[i] = assign_token(graphs[i], model, max_nodes);
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (jobs <= 1 || graphs.size() < 2) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < jobs; ++w) threads.emplace_back(work, w, jobs);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<TokenAssignment> out;
  out.reserve(graphs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

std::string join_indices(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string render_table(std::vector<TokenTableRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::string out = std::string(kTokenTableHeader) + "\n";
  for (const auto& row : rows) {
    out += row.id + "\t" + row.graph_token.surface() + "\t" + join_indices(row.node_tokens) + "\n";
  }
  return out;
}

}  // namespace

std::string export_token_table(std::span<const TokenAssignment> assignments) {
  std::vector<TokenTableRow> rows;
  for (const auto& a : assignments) {
    TokenTableRow row{a.graph_id, a.graph_token, {}};
    for (const auto& t : a.node_tokens) row.node_tokens.push_back(t.index);
    rows.push_back(std::move(row));
  }
  return render_table(std::move(rows));
}

std::string export_node_token_table(std::span<const NodeTokenAssignment> assignments) {
  std::vector<TokenTableRow> rows;
  for (const auto& a : assignments) {
    TokenTableRow row{a.id, a.token, {}};
    for (const auto& t : a.ego_tokens) row.node_tokens.push_back(t.index);
    rows.push_back(std::move(row));
  }
  return render_table(std::move(rows));
}

std::vector<TokenTableRow> parse_token_table(std::string_view text) {
  std::vector<TokenTableRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kTokenTableHeader) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw Error(ErrorCode::kSyntaxError, "token table rows need three tab-separated fields", line_no, 1);
    }
    TokenTableRow row;
    row.id = line.substr(0, tab1);
    try {
      row.graph_token = parse_token(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::kSyntaxError, e.what(), line_no, tab1 + 2);
    }
    std::istringstream fields(line.substr(tab2 + 1));
    std::string field;
    while (std::getline(fields, field, ',')) {
      std::size_t value = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::kSyntaxError, "bad node token '" + field + "'", line_no, tab2 + 2);
      }
      row.node_tokens.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sogtok
