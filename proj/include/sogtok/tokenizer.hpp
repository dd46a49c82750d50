#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/attributes.hpp"
#include "sogtok/graph.hpp"
#include "sogtok/vq_model.hpp"

namespace sogtok {

enum class EmbedderKind : std::uint32_t { kHashing = 0, kTable = 1 };

// Everything needed to rebuild the inference pipeline from a checkpoint.
struct ModelConfig {
  ModelDims dims;
  double beta = 0.25;
  ImportanceStrategy strategy;
  EmbedderKind embedder_kind = EmbedderKind::kHashing;
  std::uint64_t embedder_seed = HashingEmbedder::kDefaultSeed;
  bool straight_through = true;
  bool logistic = false;
  // Graph-level models add the global node; ego-graph models do not.
  bool global_node = true;
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

struct TokenizerModel {
  ModelConfig config;
  Parameters params;
  // Required for kTable models; built from the config for kHashing.
  std::shared_ptr<const AttributeEmbedder> embedder;
  // JSON describing how the model was produced (config only, no clock values).
  std::string manifest;

  const AttributeEmbedder& attribute_embedder() const;
};

std::shared_ptr<const AttributeEmbedder> make_embedder(const ModelConfig& config);

struct TrainConfig {
  ModelConfig model;
  std::size_t warmup_epochs = 10;
  std::size_t joint_epochs = 50;
  double lr_warmup = 1e-2;
  double lr_gcn = 5e-2;
  double lr_codebook = 0.5;
  std::size_t kmeans_iterations = 20;
  // 0 = full batch.
  std::size_t batch_size = 0;
  std::size_t max_nodes = kDefaultMaxNodes;

  // Throws InvalidConfig.
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  bool warmup = false;
  double recon = 0.0;
  double update = 0.0;
  double commit = 0.0;
  double total = 0.0;
  double utilization = 0.0;
  std::size_t dead_entries = 0;
};

std::string format_log_header();
std::string format_log_line(const EpochLog& entry);

struct TrainResult {
  TokenizerModel model;
  std::vector<EpochLog> log;
};

// Called after every epoch with the post-step model.
using EpochCallback = std::function<void(const EpochLog&, const TokenizerModel&)>;

// Warm-up: encoder and decoder fit the reconstruction loss with the decoder
// reading H directly; the codebook is untouched. The codebook is then seeded
// by k-means over all encoder rows. Joint phase: the full loss with separate
// Adam groups for {W1, W2, Wd} and the codebook. Logged losses are per-graph
// means measured before each epoch's update. `embedder` overrides the one
// derived from the config (needed for table embedders).
TrainResult train(std::span<const Graph> dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {},
                  std::shared_ptr<const AttributeEmbedder> embedder = nullptr);

struct StructuralToken {
  std::size_t index = 0;

  std::string surface() const { return "<SOG_" + std::to_string(index) + ">"; }
  bool operator==(const StructuralToken&) const = default;
  auto operator<=>(const StructuralToken&) const = default;
};

// Parses "<SOG_k>"; throws SyntaxError on anything else and InvalidConfig when
// k >= vocabulary_size (0 disables the range check).
StructuralToken parse_token(std::string_view text, std::size_t vocabulary_size = 0);

// Encoder inputs with nodes in canonical order and the global node last.
struct PreparedGraph {
  Matrix A;
  Matrix X;
  std::vector<NodeIndex> position_of;  // original node -> row
  StructuralAttributeMap attributes;
};

PreparedGraph prepare_graph(const Graph& g, const ModelConfig& config, const AttributeEmbedder& embedder,
                            std::size_t max_nodes = kDefaultMaxNodes);

struct TokenAssignment {
  std::string graph_id;
  StructuralToken graph_token;
  std::vector<StructuralToken> node_tokens;  // by original node index
  Vector graph_embedding;                    // pre-quantization global-node row
};

TokenAssignment assign_token(const Graph& g, const TokenizerModel& model,
                             std::size_t max_nodes = kDefaultMaxNodes);

struct NodeTokenAssignment {
  std::string id;  // "<graph id>#<center>"
  StructuralToken token;
  std::vector<StructuralToken> ego_tokens;  // ego-graph node order, center first
  Vector embedding;                         // pre-quantization center row
};

// Token of `center` inside its `hops`-hop ego-graph, encoded without a global node.
NodeTokenAssignment assign_node_tokens(const Graph& g, NodeIndex center, const TokenizerModel& model,
                                       std::size_t hops = 2);

// Assigns tokens to many graphs over `jobs` threads; output follows input order.
std::vector<TokenAssignment> assign_tokens(std::span<const Graph> graphs, const TokenizerModel& model,
                                           std::size_t jobs = 1, std::size_t max_nodes = kDefaultMaxNodes);

struct TokenTableRow {
  std::string id;
  StructuralToken graph_token;
  std::vector<std::size_t> node_tokens;
};

inline constexpr const char* kTokenTableHeader = "id\tgraph_token\tnode_tokens";

std::string export_token_table(std::span<const TokenAssignment> assignments);
std::string export_node_token_table(std::span<const NodeTokenAssignment> assignments);
std::vector<TokenTableRow> parse_token_table(std::string_view text);

}  // namespace sogtok
