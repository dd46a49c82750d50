#include "sogtok/vq_model.hpp"

#include <cmath>
#include <limits>

#include "sogtok/error.hpp"

namespace sogtok {
namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
  }
  return w;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kDimensionMismatch, what);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double squared_distance(const Matrix& a, Eigen::Index row_a, const Matrix& b, Eigen::Index row_b) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double diff = a(row_a, c) - b(row_b, c);
    s += diff * diff;
  }
  return s;
}

}  // namespace

Gradients Gradients::zeros_like(const Parameters& p) {
  return Gradients{Matrix::Zero(p.encoder.W1.rows(), p.encoder.W1.cols()),
                   Matrix::Zero(p.encoder.W2.rows(), p.encoder.W2.cols()),
                   Matrix::Zero(p.decoder.Wd.rows(), p.decoder.Wd.cols()),
                   Matrix::Zero(p.codebook.entries.rows(), p.codebook.entries.cols())};
}

Gradients& Gradients::operator+=(const Gradients& other) {
  W1 += other.W1;
  W2 += other.W2;
  Wd += other.Wd;
  codebook += other.codebook;
  return *this;
}

Gradients& Gradients::operator*=(double s) {
  W1 *= s;
  W2 *= s;
  Wd *= s;
  codebook *= s;
  return *this;
}

Parameters init_parameters(const ModelDims& dims, Rng& rng) {
  if (dims.d_s == 0 || dims.d_h == 0 || dims.d == 0 || dims.d_r == 0) {
    throw Error(ErrorCode::kInvalidConfig, "model dimensions must be positive");
  }
  if (dims.K < 2) throw Error(ErrorCode::kInvalidConfig, "codebook size K must be at least 2");
  Parameters p;
  p.encoder.W1 = glorot(dims.d_s, dims.d_h, rng);
  p.encoder.W2 = glorot(dims.d_h, dims.d, rng);
  p.decoder.Wd = glorot(dims.d, dims.d_r, rng);
  p.codebook.entries.resize(static_cast<Eigen::Index>(dims.K), static_cast<Eigen::Index>(dims.d));
  for (Eigen::Index i = 0; i < p.codebook.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.codebook.entries.cols(); ++j) {
      p.codebook.entries(i, j) = rng.normal(0.0, 0.1);
    }
  }
  return p;
}

void check_finite(const Parameters& p) {
  const bool ok = p.encoder.W1.allFinite() && p.encoder.W2.allFinite() && p.decoder.Wd.allFinite() &&
                  p.codebook.entries.allFinite();
  if (!ok) throw Error(ErrorCode::kNonFiniteLoss, "model parameters contain non-finite values");
}

Matrix normalized_adjacency(const Matrix& A) {
  const Eigen::Index n = A.rows();
  Matrix a_hat = A + Matrix::Identity(n, n);
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(a_hat.row(i).sum());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a_hat(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  }
  return a_hat;
}

Matrix encode(const Matrix& A, const Matrix& X, const EncoderParams& p) {
  require(A.rows() == A.cols(), "adjacency must be square, got " + shape(A));
  require(X.rows() == A.rows(), "feature rows " + std::to_string(X.rows()) + " != nodes " +
                                    std::to_string(A.rows()));
  require(X.cols() == p.W1.rows(), "feature width " + std::to_string(X.cols()) + " != W1 rows " +
                                       std::to_string(p.W1.rows()));
  require(p.W1.cols() == p.W2.rows(), "W1 " + shape(p.W1) + " incompatible with W2 " + shape(p.W2));
  const Matrix a_norm = normalized_adjacency(A);
  const Matrix h1 = (a_norm * X * p.W1).cwiseMax(0.0);
  return a_norm * h1 * p.W2;
}

QuantizedSelection quantize(const Matrix& H, const Codebook& cb) {
  require(H.cols() == cb.entries.cols(),
          "latent width " + std::to_string(H.cols()) + " != codebook width " + std::to_string(cb.entries.cols()));
  QuantizedSelection sel;
  sel.indices.resize(static_cast<std::size_t>(H.rows()));
  sel.quantized.resize(H.rows(), H.cols());
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    Eigen::Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cb.entries.rows(); ++j) {
      const double dist = squared_distance(H, i, cb.entries, j);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    sel.indices[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    sel.quantized.row(i) = cb.entries.row(best);
  }
  return sel;
}

namespace {

Reconstruction reconstruct_from(const Matrix& input, const Matrix& Wd, bool logistic) {
  require(input.cols() == Wd.rows(),
          "decoder input width " + std::to_string(input.cols()) + " != Wd rows " + std::to_string(Wd.rows()));
  Reconstruction r;
  r.features = input * Wd;
  r.adjacency = r.features * r.features.transpose();
  // mirror the upper triangle so the result is exactly symmetric
  for (Eigen::Index i = 0; i < r.adjacency.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) r.adjacency(i, j) = r.adjacency(j, i);
  }
  if (logistic) r.adjacency = r.adjacency.unaryExpr([](double s) { return 1.0 / (1.0 + std::exp(-s)); });
  return r;
}

}  // namespace

Reconstruction decode_and_reconstruct(const QuantizedSelection& sel, const DecoderParams& dec, bool logistic) {
  return reconstruct_from(sel.quantized, dec.Wd, logistic);
}

LossBreakdown compute_loss(const Matrix& A_target, const Matrix& A_rec, const Matrix& H,
                           const QuantizedSelection& sel, double beta) {
  require(A_target.rows() == A_rec.rows() && A_target.cols() == A_rec.cols(),
          "target " + shape(A_target) + " != reconstruction " + shape(A_rec));
  require(H.rows() == sel.quantized.rows() && H.cols() == sel.quantized.cols(),
          "latent " + shape(H) + " != quantized " + shape(sel.quantized));
  LossBreakdown loss;
  loss.beta = beta;
  loss.reconstruction = (A_target - A_rec).squaredNorm();
  // update and commitment share a value; they differ only in which side is held constant
  loss.update = (H - sel.quantized).squaredNorm();
  loss.commitment = loss.update;
  loss.total = loss.reconstruction + loss.update + beta * loss.commitment;
  return loss;
}

ForwardState forward(const Matrix& A, const Matrix& X, const Parameters& params, const ForwardOptions& options) {
  require(A.rows() == A.cols(), "adjacency must be square, got " + shape(A));
  require(X.rows() == A.rows(), "feature rows " + std::to_string(X.rows()) + " != nodes " +
                                    std::to_string(A.rows()));
  require(X.cols() == params.encoder.W1.rows(),
          "feature width " + std::to_string(X.cols()) + " != W1 rows " + std::to_string(params.encoder.W1.rows()));
  ForwardState st;
  st.options = options;
  st.A = A;
  st.A_norm = normalized_adjacency(A);
  st.AX = st.A_norm * X;
  st.Z1 = st.AX * params.encoder.W1;
  st.H1 = st.Z1.cwiseMax(0.0);
  st.AH1 = st.A_norm * st.H1;
  st.H = st.AH1 * params.encoder.W2;
  if (options.quantize) {
    st.selection = quantize(st.H, params.codebook);
    st.decoder_input = st.selection.quantized;
  } else {
    st.decoder_input = st.H;
  }
  st.reconstruction = reconstruct_from(st.decoder_input, params.decoder.Wd, options.logistic);
  if (options.quantize) {
    st.loss = compute_loss(A, st.reconstruction.adjacency, st.H, st.selection, options.beta);
  } else {
    st.loss.beta = options.beta;
    st.loss.reconstruction = (A - st.reconstruction.adjacency).squaredNorm();
    st.loss.total = st.loss.reconstruction;
  }
  st.valid = true;
  return st;
}

void accumulate_gradients(const ForwardState& st, const Parameters& params, double scale, Gradients& out) {
  if (!st.valid) throw Error(ErrorCode::kNoForwardState, "backward called without a forward pass");

  // d rec / d Â_rec
  Matrix g = -2.0 * (st.A - st.reconstruction.adjacency);
  if (st.options.logistic) {
    const Matrix& r = st.reconstruction.adjacency;
    g = g.cwiseProduct(r.cwiseProduct((Matrix::Ones(r.rows(), r.cols()) - r)));
  }
  // Â_rec = X̂ X̂ᵀ and g is symmetric
  const Matrix& xhat = st.reconstruction.features;
  const Matrix d_xhat = 2.0 * g * xhat;
  out.Wd.noalias() += scale * (st.decoder_input.transpose() * d_xhat);
  const Matrix d_input = d_xhat * params.decoder.Wd.transpose();

  Matrix d_h;
  if (st.options.quantize) {
    const Matrix diff = st.H - st.selection.quantized;
    d_h = (2.0 * st.options.beta) * diff;
    if (st.options.straight_through) d_h += d_input;
    for (std::size_t i = 0; i < st.selection.indices.size(); ++i) {
      out.codebook.row(static_cast<Eigen::Index>(st.selection.indices[i])) -=
          (2.0 * scale) * diff.row(static_cast<Eigen::Index>(i));
    }
  } else {
    d_h = d_input;
  }

  out.W2.noalias() += scale * (st.AH1.transpose() * d_h);
  Matrix d_z1 = st.A_norm * d_h * params.encoder.W2.transpose();
  for (Eigen::Index i = 0; i < d_z1.rows(); ++i) {
    for (Eigen::Index j = 0; j < d_z1.cols(); ++j) {
      if (st.Z1(i, j) <= 0.0) d_z1(i, j) = 0.0;
    }
  }
  out.W1.noalias() += scale * (st.AX.transpose() * d_z1);
}

Gradients backward(const ForwardState& st, const Parameters& params) {
  Gradients grads = Gradients::zeros_like(params);
  accumulate_gradients(st, params, 1.0, grads);
  return grads;
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr, const AdamHyper& hyper) {
  require(param.rows() == grad.rows() && param.cols() == grad.cols(),
          "gradient " + shape(grad) + " != parameter " + shape(param));
  if (state.step == 0 || state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    state.m = Matrix::Zero(param.rows(), param.cols());
    state.v = Matrix::Zero(param.rows(), param.cols());
  }
  ++state.step;
  state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grad;
  state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (Eigen::Index i = 0; i < param.rows(); ++i) {
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const double m_hat = state.m(i, j) / c1;
      const double v_hat = state.v(i, j) / c2;
      param(i, j) -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
}

std::size_t AdamOptimizer::add_group(std::string name, double lr, std::vector<Matrix*> params) {
  Group group{std::move(name), lr, std::move(params), {}};
  group.states.resize(group.params.size());
  groups_.push_back(std::move(group));
  return groups_.size() - 1;
}

void AdamOptimizer::set_lr(std::size_t group, double lr) { groups_.at(group).lr = lr; }

double AdamOptimizer::lr(std::size_t group) const { return groups_.at(group).lr; }

void AdamOptimizer::step(const std::vector<std::vector<const Matrix*>>& grads) {
  if (grads.size() != groups_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient groups do not match optimizer groups");
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    Group& group = groups_[g];
    if (grads[g].size() != group.params.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "gradient count mismatch in group '" + group.name + "'");
    }
    for (std::size_t i = 0; i < group.params.size(); ++i) {
      adam_step(*group.params[i], *grads[g][i], group.states[i], group.lr, hyper_);
    }
  }
}

Matrix kmeans(const Matrix& points, std::size_t K, std::size_t iterations, Rng& rng) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(K);
  if (n == 0) throw Error(ErrorCode::kEmptyDataset, "k-means needs at least one point");
  Matrix centres(k, points.cols());

  // k-means++ seeding; once every point coincides with a centre, the remaining
  // centres are jittered copies of random points.
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, points.row(i).norm());
  const double jitter = 1e-3 * (scale > 0.0 ? scale : 1.0);
  for (Eigen::Index c = 0; c < k; ++c) {
    double total = 0.0;
    for (double d : nearest) total += std::isinf(d) ? 0.0 : d;
    Eigen::Index pick = 0;
    if (c == 0 || total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
      centres.row(c) = points.row(pick);
      if (c > 0) {
        for (Eigen::Index j = 0; j < centres.cols(); ++j) centres(c, j) += rng.normal(0.0, jitter);
      }
    } else {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[static_cast<std::size_t>(i)];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
      centres.row(c) = points.row(pick);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centres, c));
    }
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), -1);
  for (std::size_t it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double dist = squared_distance(points, i, centres, c);
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      if (assignment[static_cast<std::size_t>(i)] != best) changed = true;
      assignment[static_cast<std::size_t>(i)] = best;
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto count = counts[static_cast<std::size_t>(c)];
      if (count > 0) centres.row(c) = sums.row(c) / static_cast<double>(count);
    }
  }
  return centres;
}

}  // namespace sogtok
