#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sogtok/graph.hpp"
#include "sogtok/random.hpp"

namespace sogtok {

struct ModelDims {
  std::size_t d_s = 64;   // attribute embedding width
  std::size_t d_h = 64;   // hidden GCN width
  std::size_t d = 64;     // latent / codebook width
  std::size_t d_r = 16;   // reconstructed feature width
  std::size_t K = 256;    // codebook size

  bool operator==(const ModelDims&) const = default;
};

struct EncoderParams {
  Matrix W1;  // d_s x d_h
  Matrix W2;  // d_h x d
};

struct DecoderParams {
  Matrix Wd;  // d x d_r
};

struct Codebook {
  Matrix entries;  // K x d, row j is entry j

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(entries.cols()); }
};

struct Parameters {
  EncoderParams encoder;
  DecoderParams decoder;
  Codebook codebook;
};

// Same shapes as Parameters.
struct Gradients {
  Matrix W1;
  Matrix W2;
  Matrix Wd;
  Matrix codebook;

  static Gradients zeros_like(const Parameters& p);
  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double s);
};

struct QuantizedSelection {
  std::vector<std::size_t> indices;
  Matrix quantized;  // row i == codebook row indices[i], bitwise
};

struct Reconstruction {
  Matrix features;   // X̂
  Matrix adjacency;  // X̂ X̂ᵀ, or its elementwise logistic when enabled
};

struct LossBreakdown {
  double reconstruction = 0.0;
  double update = 0.0;
  double commitment = 0.0;
  double beta = 0.25;
  double total = 0.0;
};

// Glorot-uniform weights; codebook N(0, 0.1²).
Parameters init_parameters(const ModelDims& dims, Rng& rng);
void check_finite(const Parameters& p);

// D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
Matrix normalized_adjacency(const Matrix& A);

// Â · ReLU(Â · X · W1) · W2 with Â = normalized_adjacency(A).
Matrix encode(const Matrix& A, const Matrix& X, const EncoderParams& p);

// Nearest entry per row by squared Euclidean distance; the lowest index wins ties.
QuantizedSelection quantize(const Matrix& H, const Codebook& cb);

Reconstruction decode_and_reconstruct(const QuantizedSelection& sel, const DecoderParams& dec,
                                      bool logistic = false);

LossBreakdown compute_loss(const Matrix& A_target, const Matrix& A_rec, const Matrix& H,
                           const QuantizedSelection& sel, double beta);

struct ForwardOptions {
  // Off during warm-up: the decoder reads H directly and only the
  // reconstruction term is active.
  bool quantize = true;
  // Copy the gradient at the quantized rows onto H.
  bool straight_through = true;
  bool logistic = false;
  double beta = 0.25;
};

// Everything backward needs; default-constructed states are empty.
struct ForwardState {
  bool valid = false;
  ForwardOptions options;
  Matrix A;        // reconstruction target
  Matrix A_norm;
  Matrix AX;       // Â X
  Matrix Z1;       // Â X W1
  Matrix H1;       // ReLU(Z1)
  Matrix AH1;      // Â H1
  Matrix H;        // AH1 W2
  QuantizedSelection selection;  // filled when options.quantize
  Matrix decoder_input;          // quantized rows, or H during warm-up
  Reconstruction reconstruction;
  LossBreakdown loss;
};

ForwardState forward(const Matrix& A, const Matrix& X, const Parameters& params,
                     const ForwardOptions& options);

// Gradients of state.loss.total. Throws NoForwardState on an empty state.
Gradients backward(const ForwardState& state, const Parameters& params);

// Adds scale * backward(state, params) into out.
void accumulate_gradients(const ForwardState& state, const Parameters& params, double scale,
                          Gradients& out);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Matrix m;
  Matrix v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update of a single tensor.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               const AdamHyper& hyper = {});

// Adam over named parameter groups, each with its own learning rate.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamHyper hyper = {}) : hyper_(hyper) {}

  // Returns the group id.
  std::size_t add_group(std::string name, double lr, std::vector<Matrix*> params);
  void set_lr(std::size_t group, double lr);
  double lr(std::size_t group) const;

  // grads[g][i] pairs with the i-th parameter registered in group g.
  void step(const std::vector<std::vector<const Matrix*>>& grads);

 private:
  struct Group {
    std::string name;
    double lr;
    std::vector<Matrix*> params;
    std::vector<AdamState> states;
  };
  AdamHyper hyper_;
  std::vector<Group> groups_;
};

// k-means++ seeding followed by Lloyd iterations. Rows of `points` are the
// samples; the result has K rows. Empty clusters keep their previous centre.
Matrix kmeans(const Matrix& points, std::size_t K, std::size_t iterations, Rng& rng);

}  // namespace sogtok
