#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ambench/env.hpp"
#include "ambench/policy_net.hpp"

namespace ambench::policy {

/// Variance-preserving forward noising:
/// a_k = sqrt(alpha_bar_k) * a0 + sqrt(1 - alpha_bar_k) * eps.
template <typename Derived1, typename Derived2>
auto add_noise(const Eigen::MatrixBase<Derived1>& a0, int k,
               const Eigen::MatrixBase<Derived2>& eps, const NoiseSchedule& schedule) {
  const double ab = schedule.alpha_bar.at(k - 1);
  using S = typename Derived1::Scalar;
  return (std::sqrt(ab) * a0 + std::sqrt(1.0 - ab) * eps).eval().template cast<S>();
}

/// Per-dimension affine normalization of action chunks into [-1, 1].
struct NormStats {
  Eigen::VectorXf lo, hi;

  Eigen::VectorXf normalize(const Eigen::VectorXf& raw) const;
  Eigen::VectorXf denormalize(const Eigen::VectorXf& normed) const;
  /// Denormalize with the output clamped to one data range beyond [lo, hi].
  Eigen::VectorXf denormalize_clamped(const Eigen::VectorXf& normed) const;
};

struct DemoRecord {
  Eigen::MatrixXf points;   // (encoder_points, 4): xyz + attention
  Eigen::VectorXf grid;     // flattened multi-view attention grid (may be empty)
  Eigen::Vector4f proprio;  // ee xyz + grip
  Eigen::VectorXf action;   // raw flattened chunk, horizon * 4
};

struct DemoDataset {
  std::vector<DemoRecord> records;
  int horizon = 16;
  int encoder_points = 0;
  int grid_dim = 0;
  NormStats stats;

  void finalize_stats();
};

struct ObsConfig {
  int encoder_points = 1024;
  int samples_per_object = 120;
  // 2d-attention stream
  int mask_width = 48;
  int mask_height = 36;
  int grid_cells = 12;
  int dilation_radius = 2;
};

struct Observation {
  Eigen::MatrixXf points;
  Eigen::VectorXf grid;
  Eigen::Vector4f proprio;
};

/// Renders env states into encoder-ready observations. Object surfaces are
/// sampled once per scene and rigidly follow the tracked poses.
class ObservationSampler {
 public:
  ObservationSampler(std::shared_ptr<const sim::Scene> scene, const ObsConfig& config,
                     const std::vector<geom::Camera>* rig = nullptr);

  Observation observe(const sim::EnvState& state, int pick_id, int place_id,
                      bool with_grid = false) const;

 private:
  std::shared_ptr<const sim::Scene> scene_;
  ObsConfig config_;
  const std::vector<geom::Camera>* rig_;
  std::vector<std::vector<geom::Point3>> local_;  // per object, object-frame offsets
};

std::vector<geom::Camera> default_camera_rig(int width = 48, int height = 36);

struct TrainConfig {
  int epochs = 360;
  int batch_size = 64;
  double lr = 1e-3;
  double momentum = 0.9;
  double clip_norm = 5.0;  // global gradient-norm clip; <= 0 disables
  int cosine_horizon = 600;
  int denoise_steps = 1000;
  std::uint64_t seed = 0;
  InputMode mode = InputMode::attn3d;
  bool residual = true;
  bool clean_head = true;
  int state_dim = 128;
  int encoder_hidden = 64;
  int head_hidden = 128;
  int k_embed_dim = 16;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainedPolicy {
  NoiseNet net;
  NormStats stats;
  NoiseSchedule schedule;
  std::vector<EpochLog> log;
};

/// Noise-prediction training: SGD with momentum, cosine learning-rate decay,
/// fixed accumulation order, deterministic given the seed.
TrainedPolicy train(const DemoDataset& dataset, const TrainConfig& config);

/// Reverse diffusion from seeded Gaussian noise; returns the normalized
/// action vector. sigma_override < 0 uses the posterior noise scale,
/// 0 makes the chain deterministic.
Eigen::VectorXf sample_actions(const NoiseNet& net, const Eigen::VectorXf& zenc,
                               const Eigen::Vector4f& proprio, const NoiseSchedule& schedule,
                               double sigma_override, Rng& rng);

sim::TrajectoryChunk decode_chunk(const Eigen::VectorXf& normalized, const NormStats& stats,
                                  int horizon);

enum class FailureStage { none, pick, place, timeout };
const char* to_string(FailureStage s);

struct RolloutConfig {
  int replan_every = 8;
  int max_frames = 240;
  double sigma_override = -1.0;  // posterior noise by default
};

struct RolloutResult {
  bool success = false;
  int frames = 0;
  FailureStage stage = FailureStage::none;
};

/// Receding-horizon execution in the toy env. `attended` drives the
/// attention channel; `allowed_pairs` defines success (the attended pair for
/// conditioned variants, every valid pair for unconditioned scoring).
RolloutResult rollout(const NoiseNet& net, const NormStats& stats,
                      const NoiseSchedule& schedule, const sim::Scene& scene,
                      std::pair<int, int> attended,
                      const std::vector<std::pair<int, int>>& allowed_pairs,
                      const ObsConfig& obs_config, const RolloutConfig& config, Rng& rng,
                      const sim::EnvConfig& env_config = {});

/// "NNET1" checkpoint: layer tensors in a fixed order plus the
/// normalization stats. Architecture is recovered from the tensor shapes.
void write_checkpoint(const std::string& path, const NoiseNet& net, const NormStats& stats);
struct Checkpoint {
  NoiseNet net;
  NormStats stats;
};
Checkpoint read_checkpoint(const std::string& path);

void write_training_log(const std::string& path, const std::vector<EpochLog>& log);

}  // namespace ambench::policy
