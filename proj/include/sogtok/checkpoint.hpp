#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "sogtok/tokenizer.hpp"

namespace sogtok {

// Binary layout, all integers and floats little-endian:
//   "SOGTOK1\0"                 8-byte magic
//   u32 version (1)
//   u64 d_s, d_h, d, d_r, K
//   f64 beta
//   u32 anchor kind, u64 anchor seed
//   u32 embedder kind, u64 embedder seed
//   u8 straight_through, u8 logistic, u8 global_node
//   u64 run seed
//   f64 blocks, row-major: W1 (d_s x d_h), W2 (d_h x d), Wd (d x d_r), codebook (K x d)
//   u64 manifest length, manifest bytes
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const TokenizerModel& model);

// Throws CheckpointFormat on bad magic, version, truncation or trailing bytes.
// Hashing models get their embedder rebuilt; table models get `embedder`.
TokenizerModel deserialize_checkpoint(std::string_view bytes,
                                      std::shared_ptr<const AttributeEmbedder> embedder = nullptr);

void save_checkpoint(const std::string& path, const TokenizerModel& model);
TokenizerModel load_checkpoint(const std::string& path,
                               std::shared_ptr<const AttributeEmbedder> embedder = nullptr);

}  // namespace sogtok
