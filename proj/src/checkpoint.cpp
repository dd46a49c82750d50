#include "sogtok/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"

namespace sogtok {
namespace {

constexpr char kMagic[8] = {'S', 'O', 'G', 'T', 'O', 'K', '1', '\0'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_matrix(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(m(i, j));
    }
  }
  void put_bytes(std::string_view bytes) { out_.append(bytes); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  Matrix get_matrix(std::uint64_t rows, std::uint64_t cols) {
    if (rows != 0 && cols > (bytes_.size() / sizeof(double)) / rows) fail("weight block larger than file");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>();
    }
    return m;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    const auto view = bytes_.substr(pos_, n);
    pos_ += n;
    return view;
  }
  bool done() const { return pos_ == bytes_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kCheckpointFormat, what + " (offset " + std::to_string(pos_) + ")");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated checkpoint");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const TokenizerModel& model) {
  const ModelConfig& c = model.config;
  Writer w;
  w.put_bytes(std::string_view(kMagic, sizeof kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(c.dims.d_s);
  w.put<std::uint64_t>(c.dims.d_h);
  w.put<std::uint64_t>(c.dims.d);
  w.put<std::uint64_t>(c.dims.d_r);
  w.put<std::uint64_t>(c.dims.K);
  w.put<double>(c.beta);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.strategy.kind));
  w.put<std::uint64_t>(c.strategy.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.embedder_kind));
  w.put<std::uint64_t>(c.embedder_seed);
  w.put<std::uint8_t>(c.straight_through ? 1 : 0);
  w.put<std::uint8_t>(c.logistic ? 1 : 0);
  w.put<std::uint8_t>(c.global_node ? 1 : 0);
  w.put<std::uint64_t>(c.seed);
  w.put_matrix(model.params.encoder.W1);
  w.put_matrix(model.params.encoder.W2);
  w.put_matrix(model.params.decoder.Wd);
  w.put_matrix(model.params.codebook.entries);
  w.put<std::uint64_t>(model.manifest.size());
  w.put_bytes(model.manifest);
  return w.take();
}

TokenizerModel deserialize_checkpoint(std::string_view bytes, std::shared_ptr<const AttributeEmbedder> embedder) {
  Reader r(bytes);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::kCheckpointFormat, "missing SOGTOK1 magic");
  }
  r.get_bytes(sizeof kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));

  TokenizerModel model;
  ModelConfig& c = model.config;
  c.dims.d_s = r.get<std::uint64_t>();
  c.dims.d_h = r.get<std::uint64_t>();
  c.dims.d = r.get<std::uint64_t>();
  c.dims.d_r = r.get<std::uint64_t>();
  c.dims.K = r.get<std::uint64_t>();
  c.beta = r.get<double>();
  const auto strategy_kind = r.get<std::uint32_t>();
  if (strategy_kind > static_cast<std::uint32_t>(ImportanceStrategy::Kind::kRandom)) r.fail("bad anchor kind");
  c.strategy.kind = static_cast<ImportanceStrategy::Kind>(strategy_kind);
  c.strategy.seed = r.get<std::uint64_t>();
  const auto embedder_kind = r.get<std::uint32_t>();
  if (embedder_kind > static_cast<std::uint32_t>(EmbedderKind::kTable)) r.fail("bad embedder kind");
  c.embedder_kind = static_cast<EmbedderKind>(embedder_kind);
  c.embedder_seed = r.get<std::uint64_t>();
  c.straight_through = r.get<std::uint8_t>() != 0;
  c.logistic = r.get<std::uint8_t>() != 0;
  c.global_node = r.get<std::uint8_t>() != 0;
  c.seed = r.get<std::uint64_t>();
  if (c.dims.K < 2) r.fail("codebook size below 2");
  model.params.encoder.W1 = r.get_matrix(c.dims.d_s, c.dims.d_h);
  model.params.encoder.W2 = r.get_matrix(c.dims.d_h, c.dims.d);
  model.params.decoder.Wd = r.get_matrix(c.dims.d, c.dims.d_r);
  model.params.codebook.entries = r.get_matrix(c.dims.K, c.dims.d);
  const auto manifest_size = r.get<std::uint64_t>();
  if (manifest_size > bytes.size()) r.fail("manifest length exceeds file");
  model.manifest = std::string(r.get_bytes(static_cast<std::size_t>(manifest_size)));
  if (!r.done()) r.fail("trailing bytes after manifest");

  model.embedder = embedder ? std::move(embedder) : make_embedder(c);
  if (model.embedder && model.embedder->dimension() != c.dims.d_s) {
    throw Error(ErrorCode::kDimensionMismatch, "embedder width does not match checkpoint d_s");
  }
  return model;
}

void save_checkpoint(const std::string& path, const TokenizerModel& model) {
  write_file(path, serialize_checkpoint(model));
}

TokenizerModel load_checkpoint(const std::string& path, std::shared_ptr<const AttributeEmbedder> embedder) {
  return deserialize_checkpoint(read_file(path), std::move(embedder));
}

}  // namespace sogtok
