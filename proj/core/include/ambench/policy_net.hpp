#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ambench/error.hpp"
#include "ambench/rng.hpp"

namespace ambench::policy {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowX = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct NoiseSchedule {
  int steps = 0;                  // K
  std::vector<double> beta;       // beta[k-1] for k = 1..K
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product of alpha

  static NoiseSchedule linear(int steps, double beta_lo = 1e-4, double beta_hi = 0.02);
};

/// Which observation stream feeds the state encoder.
enum class InputMode { attn3d, attn2d, none };
const char* to_string(InputMode m);

struct NetConfig {
  InputMode mode = InputMode::attn3d;
  bool residual = true;      // pooled raw-stat path added to pooled features
  bool clean_head = true;    // head regresses the clean action; false: raw noise
  int point_channels = 4;    // xyz + attention indicator
  int encoder_hidden = 64;
  int state_dim = 128;       // z_enc width
  int proprio_dim = 4;
  int k_embed_dim = 16;
  int head_hidden = 128;
  int action_dim = 64;       // horizon * per-step action dims
  int grid_dim = 0;          // flattened 2d-attention grid length (attn2d)
};

/// Sinusoidal embedding of the normalized denoising step. Frequencies are
/// geometric in cycles over the whole schedule, so neighboring steps map to
/// nearby embeddings regardless of the step count.
template <typename S>
RowX<S> k_embedding(int k, int dim, int total_steps) {
  RowX<S> emb(dim);
  const double t = static_cast<double>(k) / std::max(1, total_steps);
  for (int i = 0; i < dim / 2; ++i) {
    const double cycles = 0.5 * std::pow(2.0, i);
    emb(2 * i) = static_cast<S>(std::sin(2.0 * M_PI * cycles * t));
    emb(2 * i + 1) = static_cast<S>(std::cos(2.0 * M_PI * cycles * t));
  }
  return emb;
}

template <typename S>
struct DenseT {
  MatX<S> W;   // (out, in)
  RowX<S> b;   // (out)

  void init(Rng& rng, int in, int out, double scale = 1.0) {
    const double limit = scale * std::sqrt(6.0 / in);
    W.resize(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) W(r, c) = static_cast<S>(rng.uniform(-limit, limit));
    b = RowX<S>::Zero(out);
  }

  MatX<S> forward(const MatX<S>& x) const {
    return (x * W.transpose()).rowwise() + b;
  }
};

template <typename S>
struct BatchT {
  MatX<S> points;   // (batch * points_per_cloud, channels); 3d modes
  MatX<S> grid;     // (batch, grid_dim); attn2d
  MatX<S> proprio;  // (batch, proprio_dim)
  MatX<S> noisy;    // (batch, action_dim)
  MatX<S> kemb;     // (batch, k_embed_dim)
  MatX<S> target;   // (batch, action_dim) injected noise
  MatX<S> clean_target;  // (batch, action_dim) normalized clean action
  VecX<S> sqrt_ab;  // per-row sqrt(alpha_bar_k)
  VecX<S> inv_sqrt_om;  // per-row 1 / sqrt(1 - alpha_bar_k)
  int batch = 0;
  int points_per_cloud = 0;

  void set_step(int row, double alpha_bar) {
    if (sqrt_ab.size() != batch) {
      sqrt_ab.resize(batch);
      inv_sqrt_om.resize(batch);
    }
    sqrt_ab(row) = static_cast<S>(std::sqrt(alpha_bar));
    inv_sqrt_om(row) = static_cast<S>(1.0 / std::sqrt(1.0 - alpha_bar));
  }
};

template <typename S>
struct ForwardCacheT {
  MatX<S> x;                     // canonically ordered encoder input
  MatX<S> z1, z2, z3;            // encoder activations (post-ReLU)
  MatX<S> stats;                 // (batch, 2 * channels) max/min per channel
  std::vector<int> argmax;       // batch * state_dim pooled row indices
  MatX<S> g1;                    // 2d encoder hidden
  MatX<S> zenc;                  // (batch, state_dim)
  MatX<S> u;                     // head input
  MatX<S> h1, h2, h3;
  MatX<S> clean;                 // head output
};

template <typename S>
struct GradsT {
  std::vector<MatX<S>> dW;
  std::vector<RowX<S>> db;
};

/// Noise-prediction network: permutation-invariant point encoder (per-point
/// MLP, max-pool, raw-stat residual) feeding an MLP denoising head over
/// (noisy action, state encoding, proprioception, step embedding).
template <typename S>
struct NoiseNetT {
  NetConfig cfg;
  DenseT<S> enc1, enc2, enc3, res;
  DenseT<S> g1, g2;  // attn2d patch encoder
  DenseT<S> head1, head2, head3, head4;

  void init(const NetConfig& config, Rng& rng) {
    cfg = config;
    if (cfg.mode == InputMode::attn2d) {
      if (cfg.grid_dim <= 0) throw Error("attn2d net needs grid_dim");
      g1.init(rng, cfg.grid_dim, cfg.head_hidden);
      g2.init(rng, cfg.head_hidden, cfg.state_dim, 0.25);
    } else {
      enc1.init(rng, cfg.point_channels, cfg.encoder_hidden);
      enc2.init(rng, cfg.encoder_hidden, cfg.encoder_hidden);
      // max-pooling inflates feature magnitudes; start the pooled layers
      // small so the noisy-action input is not drowned in the head
      enc3.init(rng, cfg.encoder_hidden, cfg.state_dim, 0.25);
      if (cfg.residual) res.init(rng, 2 * cfg.point_channels, cfg.state_dim, 0.25);
    }
    const int u_dim = cfg.action_dim + cfg.state_dim + cfg.proprio_dim + cfg.k_embed_dim;
    head1.init(rng, u_dim, cfg.head_hidden);
    head2.init(rng, cfg.head_hidden, cfg.head_hidden);
    head3.init(rng, cfg.head_hidden, cfg.head_hidden);
    head4.init(rng, cfg.head_hidden, cfg.action_dim);
  }

  std::vector<DenseT<S>*> layers() {
    std::vector<DenseT<S>*> out;
    if (cfg.mode == InputMode::attn2d) {
      out = {&g1, &g2};
    } else {
      out = {&enc1, &enc2, &enc3};
      if (cfg.residual) out.push_back(&res);
    }
    out.push_back(&head1);
    out.push_back(&head2);
    out.push_back(&head3);
    out.push_back(&head4);
    return out;
  }
  std::vector<const DenseT<S>*> layers() const {
    auto mutable_layers = const_cast<NoiseNetT*>(this)->layers();
    return {mutable_layers.begin(), mutable_layers.end()};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* layer : layers()) n += layer->W.size() + layer->b.size();
    return n;
  }

  /// Encode one batch of clouds (or grids) into z_enc rows. Point order is
  /// canonicalized first, so the encoding is exactly permutation invariant
  /// down to the floating-point bit pattern.
  void encode(const BatchT<S>& batch, ForwardCacheT<S>& cache) const {
    if (cfg.mode == InputMode::attn2d) {
      cache.g1 = g1.forward(batch.grid).cwiseMax(S(0));
      cache.zenc = g2.forward(cache.g1).cwiseMax(S(0));
      return;
    }
    const int b = batch.batch, n = batch.points_per_cloud, d = cfg.state_dim;
    cache.x.resize(batch.points.rows(), batch.points.cols());
    {
      std::vector<int> order(n);
      for (int i = 0; i < b; ++i) {
        const auto block = batch.points.middleRows(static_cast<Eigen::Index>(i) * n, n);
        for (int r = 0; r < n; ++r) order[r] = r;
        std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
          for (int c = 0; c < block.cols(); ++c) {
            if (block(lhs, c) != block(rhs, c)) return block(lhs, c) < block(rhs, c);
          }
          return false;
        });
        for (int r = 0; r < n; ++r)
          cache.x.row(static_cast<Eigen::Index>(i) * n + r) = block.row(order[r]);
      }
    }
    cache.z1 = enc1.forward(cache.x).cwiseMax(S(0));
    cache.z2 = enc2.forward(cache.z1).cwiseMax(S(0));
    cache.z3 = enc3.forward(cache.z2).cwiseMax(S(0));

    cache.zenc.resize(b, d);
    cache.argmax.assign(static_cast<std::size_t>(b) * d, 0);
    for (int i = 0; i < b; ++i) {
      const auto block = cache.z3.middleRows(i * n, n);
      for (int j = 0; j < d; ++j) {
        int best = 0;
        S best_v = block(0, j);
        for (int r = 1; r < n; ++r)
          if (block(r, j) > best_v) {
            best_v = block(r, j);
            best = r;
          }
        cache.zenc(i, j) = best_v;
        cache.argmax[static_cast<std::size_t>(i) * d + j] = i * n + best;
      }
    }
    if (cfg.residual) {
      const int c = cfg.point_channels;
      cache.stats.resize(b, 2 * c);
      for (int i = 0; i < b; ++i) {
        const auto block = cache.x.middleRows(i * n, n);
        for (int j = 0; j < c; ++j) {
          cache.stats(i, j) = block.col(j).maxCoeff();
          cache.stats(i, c + j) = block.col(j).minCoeff();
        }
      }
      cache.zenc += res.forward(cache.stats);
    }
  }

  /// Full forward pass. With the clean-action head the training loss is the
  /// MSE against the normalized clean action, which equals the
  /// noise-prediction MSE reweighted by the inverse signal-to-noise ratio of
  /// each sampled step; the raw-noise head keeps the unweighted form.
  S forward(const BatchT<S>& batch, ForwardCacheT<S>& cache) const {
    encode(batch, cache);
    const int b = batch.batch;
    cache.u.resize(b, cfg.action_dim + cfg.state_dim + cfg.proprio_dim + cfg.k_embed_dim);
    cache.u << batch.noisy, cache.zenc, batch.proprio, batch.kemb;
    cache.h1 = head1.forward(cache.u).cwiseMax(S(0));
    cache.h2 = head2.forward(cache.h1).cwiseMax(S(0));
    cache.h3 = head3.forward(cache.h2).cwiseMax(S(0));
    cache.clean = head4.forward(cache.h3);
    if (cfg.clean_head)
      return (cache.clean - batch.clean_target).squaredNorm() /
             static_cast<S>(cache.clean.size());
    return (cache.clean - batch.target).squaredNorm() / static_cast<S>(cache.clean.size());
  }

  /// Gradients of the MSE loss for every layer, in layers() order.
  void backward(const BatchT<S>& batch, const ForwardCacheT<S>& cache, GradsT<S>& grads) const {
    const int b = batch.batch;
    const MatX<S>& target = cfg.clean_head ? batch.clean_target : batch.target;
    MatX<S> dout = S(2) * (cache.clean - target) / static_cast<S>(cache.clean.size());

    MatX<S> dh3 = (dout * head4.W).cwiseProduct((cache.h3.array() > S(0)).template cast<S>().matrix());
    MatX<S> dh2 = (dh3 * head3.W).cwiseProduct((cache.h2.array() > S(0)).template cast<S>().matrix());
    MatX<S> dh1 = (dh2 * head2.W).cwiseProduct((cache.h1.array() > S(0)).template cast<S>().matrix());
    MatX<S> du = dh1 * head1.W;
    MatX<S> dzenc = du.middleCols(cfg.action_dim, cfg.state_dim);

    std::vector<MatX<S>> dW;
    std::vector<RowX<S>> db;
    auto push = [&](const MatX<S>& grad_w, const RowX<S>& grad_b) {
      dW.push_back(grad_w);
      db.push_back(grad_b);
    };

    if (cfg.mode == InputMode::attn2d) {
      MatX<S> dg1 = (dzenc.cwiseProduct((cache.zenc.array() > S(0)).template cast<S>().matrix()) *
                     g2.W)
                        .cwiseProduct((cache.g1.array() > S(0)).template cast<S>().matrix());
      MatX<S> dzenc_relu =
          dzenc.cwiseProduct((cache.zenc.array() > S(0)).template cast<S>().matrix());
      push(dg1.transpose() * batch.grid, dg1.colwise().sum());
      push(dzenc_relu.transpose() * cache.g1, dzenc_relu.colwise().sum());
    } else {
      const int d = cfg.state_dim;
      MatX<S> dz3 = MatX<S>::Zero(cache.z3.rows(), d);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < d; ++j)
          dz3(cache.argmax[static_cast<std::size_t>(i) * d + j], j) += dzenc(i, j);
      dz3 = dz3.cwiseProduct((cache.z3.array() > S(0)).template cast<S>().matrix());
      MatX<S> dz2 = (dz3 * enc3.W).cwiseProduct((cache.z2.array() > S(0)).template cast<S>().matrix());
      MatX<S> dz1 = (dz2 * enc2.W).cwiseProduct((cache.z1.array() > S(0)).template cast<S>().matrix());
      push(dz1.transpose() * cache.x, dz1.colwise().sum());
      push(dz2.transpose() * cache.z1, dz2.colwise().sum());
      push(dz3.transpose() * cache.z2, dz3.colwise().sum());
      if (cfg.residual) push(dzenc.transpose() * cache.stats, dzenc.colwise().sum());
    }

    push(dh1.transpose() * cache.u, dh1.colwise().sum());
    push(dh2.transpose() * cache.h1, dh2.colwise().sum());
    push(dh3.transpose() * cache.h2, dh3.colwise().sum());
    push(dout.transpose() * cache.h3, dout.colwise().sum());

    grads.dW = std::move(dW);
    grads.db = std::move(db);
  }

  /// z_enc for a single observation; used by the sampling loop.
  VecX<S> encode_single(const MatX<S>& points_or_grid) const {
    BatchT<S> batch;
    batch.batch = 1;
    if (cfg.mode == InputMode::attn2d) {
      batch.grid = points_or_grid;
    } else {
      batch.points = points_or_grid;
      batch.points_per_cloud = static_cast<int>(points_or_grid.rows());
    }
    ForwardCacheT<S> cache;
    encode(batch, cache);
    return cache.zenc.row(0).transpose();
  }

  VecX<S> head_eval(const VecX<S>& noisy, const VecX<S>& zenc, const VecX<S>& proprio,
                    int k, int total_steps) const {
    MatX<S> u(1, cfg.action_dim + cfg.state_dim + cfg.proprio_dim + cfg.k_embed_dim);
    u << noisy.transpose(), zenc.transpose(), proprio.transpose(),
        k_embedding<S>(k, cfg.k_embed_dim, total_steps);
    MatX<S> h = head1.forward(u).cwiseMax(S(0));
    h = head2.forward(h).cwiseMax(S(0));
    h = head3.forward(h).cwiseMax(S(0));
    return head4.forward(h).row(0).transpose();
  }

  /// Implied clean action for one (noisy action, state) pair.
  VecX<S> predict_clean(const VecX<S>& noisy, const VecX<S>& zenc, const VecX<S>& proprio,
                        int k, const NoiseSchedule& schedule) const {
    const double alpha_bar = schedule.alpha_bar.at(k - 1);
    const VecX<S> out = head_eval(noisy, zenc, proprio, k, schedule.steps);
    if (cfg.clean_head) return out;
    return (noisy - static_cast<S>(std::sqrt(1.0 - alpha_bar)) * out) /
           static_cast<S>(std::sqrt(alpha_bar));
  }

  /// Noise prediction for one (noisy action, state) pair.
  VecX<S> predict_noise(const VecX<S>& noisy, const VecX<S>& zenc, const VecX<S>& proprio,
                        int k, const NoiseSchedule& schedule) const {
    const double alpha_bar = schedule.alpha_bar.at(k - 1);
    const VecX<S> out = head_eval(noisy, zenc, proprio, k, schedule.steps);
    if (!cfg.clean_head) return out;
    return (noisy - static_cast<S>(std::sqrt(alpha_bar)) * out) /
           static_cast<S>(std::sqrt(1.0 - alpha_bar));
  }
};

using NoiseNet = NoiseNetT<float>;

}  // namespace ambench::policy
