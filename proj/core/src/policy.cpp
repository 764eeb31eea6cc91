#include "ambench/policy.hpp"

#include <algorithm>

#include "ambench/feature_cloud.hpp"
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "ambench/error.hpp"

namespace ambench::policy {

using sim::EnvState;
using sim::Scene;

const char* to_string(InputMode m) {
  switch (m) {
    case InputMode::attn3d: return "attn3d";
    case InputMode::attn2d: return "attn2d";
    case InputMode::none: return "none";
  }
  return "attn3d";
}

const char* to_string(FailureStage s) {
  switch (s) {
    case FailureStage::none: return "none";
    case FailureStage::pick: return "pick";
    case FailureStage::place: return "place";
    case FailureStage::timeout: return "timeout";
  }
  return "none";
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_lo, double beta_hi) {
  if (steps < 1) throw Error("make_schedule: steps must be >= 1");
  NoiseSchedule s;
  s.steps = steps;
  s.beta.resize(steps);
  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  double running = 1.0;
  for (int k = 0; k < steps; ++k) {
    s.beta[k] = steps == 1 ? beta_lo : beta_lo + (beta_hi - beta_lo) * k / (steps - 1);
    s.alpha[k] = 1.0 - s.beta[k];
    running *= s.alpha[k];
    s.alpha_bar[k] = running;
  }
  return s;
}

Eigen::VectorXf NormStats::normalize(const Eigen::VectorXf& raw) const {
  Eigen::VectorXf out(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const float range = hi(i) - lo(i);
    out(i) = range < 1e-9f ? 0.0f : 2.0f * (raw(i) - lo(i)) / range - 1.0f;
  }
  return out;
}

Eigen::VectorXf NormStats::denormalize(const Eigen::VectorXf& normed) const {
  Eigen::VectorXf out(normed.size());
  for (Eigen::Index i = 0; i < normed.size(); ++i) {
    const float range = hi(i) - lo(i);
    out(i) = range < 1e-9f ? lo(i) : lo(i) + (normed(i) + 1.0f) * range / 2.0f;
  }
  return out;
}

Eigen::VectorXf NormStats::denormalize_clamped(const Eigen::VectorXf& normed) const {
  Eigen::VectorXf out = denormalize(normed);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const float range = std::max(1e-6f, hi(i) - lo(i));
    out(i) = std::clamp(out(i), lo(i) - range, hi(i) + range);
  }
  return out;
}

void DemoDataset::finalize_stats() {
  if (records.empty()) throw Error("empty dataset");
  const Eigen::Index dim = records.front().action.size();
  stats.lo = Eigen::VectorXf::Constant(dim, std::numeric_limits<float>::max());
  stats.hi = Eigen::VectorXf::Constant(dim, std::numeric_limits<float>::lowest());
  for (const auto& rec : records) {
    stats.lo = stats.lo.cwiseMin(rec.action);
    stats.hi = stats.hi.cwiseMax(rec.action);
  }
  encoder_points = static_cast<int>(records.front().points.rows());
  grid_dim = static_cast<int>(records.front().grid.size());
}

// ---------------------------------------------------------------------------
// observations

ObservationSampler::ObservationSampler(std::shared_ptr<const Scene> scene,
                                       const ObsConfig& config,
                                       const std::vector<geom::Camera>* rig)
    : scene_(std::move(scene)), config_(config), rig_(rig) {
  Rng master(scene_->seed ^ 0x0b5e7fULL);
  for (std::size_t oi = 0; oi < scene_->objects.size(); ++oi) {
    const auto& obj = scene_->objects[oi];
    geom::PointSet pts;
    Rng rng = master.fork(oi);
    sim::sample_object_surface(rng, obj, *scene_, config_.samples_per_object, pts);
    for (auto& p : pts) p = p - obj.position;
    local_.push_back(std::move(pts));
  }
}

namespace {
// tabletop coordinates are small; rescaling keeps encoder activations in a
// range where He-initialized layers are expressive
constexpr float kPositionScale = 2.5f;
}  // namespace

Observation ObservationSampler::observe(const EnvState& state, int pick_id, int place_id,
                                        bool with_grid) const {
  geom::PointSet world;
  std::vector<int> owner;
  world.reserve(local_.size() * config_.samples_per_object);
  for (std::size_t oi = 0; oi < local_.size(); ++oi) {
    const auto& pose = state.poses[oi];
    const int id = scene_->objects[oi].id;
    for (const auto& p : local_[oi]) {
      world.push_back(p + pose.position);
      owner.push_back(id);
    }
  }

  // Plain farthest-point sampling equalizes density and starves small
  // objects down to a handful of points. With attention, half the budget
  // goes to the attended instances; without it, the budget is stratified
  // evenly across objects (which carries no task information).
  std::vector<std::size_t> keep;
  const auto budget = static_cast<std::size_t>(config_.encoder_points);
  std::vector<std::size_t> attended, rest;
  for (std::size_t i = 0; i < world.size(); ++i)
    (owner[i] == pick_id || owner[i] == place_id ? attended : rest).push_back(i);
  if (!attended.empty() && !rest.empty()) {
    geom::PointSet att_pts, rest_pts;
    for (auto i : attended) att_pts.push_back(world[i]);
    for (auto i : rest) rest_pts.push_back(world[i]);
    const std::size_t att_budget = std::min(budget / 2, attended.size());
    for (auto i : geom::fps_downsample(att_pts, att_budget, 0)) keep.push_back(attended[i]);
    for (auto i : geom::fps_downsample(rest_pts, budget - keep.size(), 0))
      keep.push_back(rest[i]);
  } else {
    const std::size_t share = budget / local_.size();
    std::size_t base = 0;
    geom::PointSet object_pts;
    std::vector<std::size_t> leftover;
    for (const auto& local : local_) {
      object_pts.clear();
      for (std::size_t j = 0; j < local.size(); ++j) object_pts.push_back(world[base + j]);
      const auto chosen = geom::fps_downsample(object_pts, share, 0);
      for (auto j : chosen) keep.push_back(base + j);
      for (std::size_t j = 0; j < local.size(); ++j)
        if (std::find(chosen.begin(), chosen.end(), j) == chosen.end())
          leftover.push_back(base + j);
      base += local.size();
    }
    geom::PointSet leftover_pts;
    for (auto i : leftover) leftover_pts.push_back(world[i]);
    for (auto i : geom::fps_downsample(leftover_pts, budget - keep.size(), 0))
      keep.push_back(leftover[i]);
  }
  // small clouds are padded by cycling so every record has a fixed row count
  for (std::size_t i = 0; keep.size() < budget; ++i) keep.push_back(keep[i % keep.size()]);

  Observation obs;
  obs.points.resize(static_cast<Eigen::Index>(keep.size()), 4);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto& p = world[keep[i]];
    const int id = owner[keep[i]];
    obs.points(static_cast<Eigen::Index>(i), 0) = static_cast<float>(p.x) * kPositionScale;
    obs.points(static_cast<Eigen::Index>(i), 1) = static_cast<float>(p.y) * kPositionScale;
    obs.points(static_cast<Eigen::Index>(i), 2) = static_cast<float>(p.z) * kPositionScale;
    obs.points(static_cast<Eigen::Index>(i), 3) = (id == pick_id || id == place_id) ? 1.0f : 0.0f;
  }
  // the grasp channel reports "holding", not raw gripper state: an empty
  // closed gripper then looks like the approach phase, so a missed grasp
  // recovers instead of freezing in a state the demos never visit
  obs.proprio =
      Eigen::Vector4f(static_cast<float>(state.ee.x) * kPositionScale,
                      static_cast<float>(state.ee.y) * kPositionScale,
                      static_cast<float>(state.ee.z) * kPositionScale,
                      state.held ? 1.0f : 0.0f);

  if (with_grid) {
    if (!rig_) throw Error("observe: 2d grid requested without a camera rig");
    geom::PointSet attended;
    for (std::size_t i = 0; i < world.size(); ++i)
      if (owner[i] == pick_id || owner[i] == place_id) attended.push_back(world[i]);
    const int cells = config_.grid_cells;
    obs.grid = Eigen::VectorXf::Zero(static_cast<Eigen::Index>(rig_->size()) * cells * cells);
    for (std::size_t ci = 0; ci < rig_->size(); ++ci) {
      const auto& cam = (*rig_)[ci];
      geom::Mask2D mask(cam.width, cam.height);
      for (const auto& proj : geom::project(attended, cam)) {
        if (!proj.visible) continue;
        mask.set(static_cast<int>(std::lround(proj.u)), static_cast<int>(std::lround(proj.v)), 1);
      }
      mask = geom::dilate_mask(mask, config_.dilation_radius);
      for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
          if (!mask.at(x, y)) continue;
          const int gx = x * cells / mask.width;
          const int gy = y * cells / mask.height;
          obs.grid(static_cast<Eigen::Index>(ci) * cells * cells + gy * cells + gx) = 1.0f;
        }
      }
    }
  }
  return obs;
}

std::vector<geom::Camera> default_camera_rig(int width, int height) {
  const double f = 0.9 * width;
  const geom::Point3 target{0.0, 0.05, 0.05};
  std::vector<geom::Camera> rig;
  for (const auto& eye : {geom::Point3{0.55, -0.5, 0.5}, geom::Point3{-0.55, -0.5, 0.5},
                          geom::Point3{0.55, 0.6, 0.5}, geom::Point3{-0.55, 0.6, 0.5}}) {
    rig.push_back(geom::Camera::look_at(eye, target, f, f, width, height));
  }
  rig.push_back(geom::Camera::look_at({0.02, 0.05, 0.85}, target, f, f, width, height));
  return rig;
}

// ---------------------------------------------------------------------------
// training

TrainedPolicy train(const DemoDataset& dataset, const TrainConfig& config) {
  if (dataset.records.empty()) throw Error("empty dataset");

  const int action_dim = static_cast<int>(dataset.records.front().action.size());
  NetConfig net_cfg;
  net_cfg.mode = config.mode;
  net_cfg.residual = config.residual;
  net_cfg.clean_head = config.clean_head;
  net_cfg.state_dim = config.state_dim;
  net_cfg.encoder_hidden = config.encoder_hidden;
  net_cfg.head_hidden = config.head_hidden;
  net_cfg.k_embed_dim = config.k_embed_dim;
  net_cfg.action_dim = action_dim;
  net_cfg.grid_dim = dataset.grid_dim;
  if (config.mode == InputMode::attn2d && dataset.grid_dim == 0)
    throw Error("train: attn2d needs records with grids");

  TrainedPolicy result;
  result.stats = dataset.stats;
  result.schedule = NoiseSchedule::linear(config.denoise_steps);
  Rng rng(config.seed ^ 0x73a1bULL);
  result.net.init(net_cfg, rng);

  const int n_records = static_cast<int>(dataset.records.size());
  const int batch_size = std::min(config.batch_size, n_records);
  const int n_points = dataset.encoder_points;
  const auto& schedule = result.schedule;

  // normalized actions, precomputed once
  std::vector<Eigen::VectorXf> normed;
  normed.reserve(n_records);
  for (const auto& rec : dataset.records) normed.push_back(dataset.stats.normalize(rec.action));

  // Adam state, one pair of moment buffers per tensor
  auto layers = result.net.layers();
  std::vector<MatX<float>> m_w, v_w;
  std::vector<RowX<float>> m_b, v_b;
  for (auto* layer : layers) {
    m_w.push_back(MatX<float>::Zero(layer->W.rows(), layer->W.cols()));
    v_w.push_back(MatX<float>::Zero(layer->W.rows(), layer->W.cols()));
    m_b.push_back(RowX<float>::Zero(layer->b.size()));
    v_b.push_back(RowX<float>::Zero(layer->b.size()));
  }
  const float beta1 = static_cast<float>(config.momentum);
  const float beta2 = 0.999f;
  const float adam_eps = 1e-8f;
  long step_index = 0;

  std::vector<int> order(n_records);
  std::iota(order.begin(), order.end(), 0);

  BatchT<float> batch;
  batch.batch = batch_size;
  batch.points_per_cloud = n_points;
  if (config.mode == InputMode::attn2d) {
    batch.grid.resize(batch_size, dataset.grid_dim);
  } else {
    batch.points.resize(static_cast<Eigen::Index>(batch_size) * n_points, 4);
  }
  batch.proprio.resize(batch_size, 4);
  batch.noisy.resize(batch_size, action_dim);
  batch.kemb.resize(batch_size, config.k_embed_dim);
  batch.target.resize(batch_size, action_dim);
  batch.clean_target.resize(batch_size, action_dim);

  ForwardCacheT<float> cache;
  GradsT<float> grads;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    const double progress =
        std::min(1.0, static_cast<double>(epoch) / std::max(1, config.cosine_horizon));
    const double lr = config.lr * 0.5 * (1.0 + std::cos(M_PI * progress));
    double loss_sum = 0.0;
    int steps = 0;

    for (int start = 0; start + batch_size <= n_records; start += batch_size) {
      for (int i = 0; i < batch_size; ++i) {
        const auto& rec = dataset.records[order[start + i]];
        if (config.mode == InputMode::attn2d) {
          batch.grid.row(i) = rec.grid.transpose();
        } else {
          batch.points.middleRows(static_cast<Eigen::Index>(i) * n_points, n_points) = rec.points;
          if (config.mode == InputMode::none)
            batch.points.middleRows(static_cast<Eigen::Index>(i) * n_points, n_points)
                .col(3)
                .setZero();
        }
        batch.proprio.row(i) = rec.proprio.transpose();

        const int k = static_cast<int>(rng.uniform_int(1, schedule.steps));
        Eigen::VectorXf eps(action_dim);
        for (int d = 0; d < action_dim; ++d) eps(d) = static_cast<float>(rng.normal());
        const auto& a0 = normed[order[start + i]];
        const double ab = schedule.alpha_bar[k - 1];
        batch.noisy.row(i) =
            (std::sqrt(ab) * a0 + std::sqrt(1.0 - ab) * eps).transpose().cast<float>();
        batch.target.row(i) = eps.transpose();
        batch.clean_target.row(i) = a0.transpose();
        batch.kemb.row(i) = k_embedding<float>(k, config.k_embed_dim, schedule.steps);
        batch.set_step(i, ab);
      }

      const float loss = result.net.forward(batch, cache);
      result.net.backward(batch, cache, grads);
      if (config.clip_norm > 0.0) {
        double norm2 = 0.0;
        for (std::size_t li = 0; li < layers.size(); ++li)
          norm2 += grads.dW[li].squaredNorm() + grads.db[li].squaredNorm();
        const double norm = std::sqrt(norm2);
        if (norm > config.clip_norm) {
          const float scale = static_cast<float>(config.clip_norm / norm);
          for (std::size_t li = 0; li < layers.size(); ++li) {
            grads.dW[li] *= scale;
            grads.db[li] *= scale;
          }
        }
      }
      ++step_index;
      const float correction1 = 1.0f - std::pow(beta1, static_cast<float>(step_index));
      const float correction2 = 1.0f - std::pow(beta2, static_cast<float>(step_index));
      const float step_lr = static_cast<float>(lr);
      for (std::size_t li = 0; li < layers.size(); ++li) {
        m_w[li] = beta1 * m_w[li] + (1.0f - beta1) * grads.dW[li];
        v_w[li] = beta2 * v_w[li] + (1.0f - beta2) * grads.dW[li].cwiseProduct(grads.dW[li]);
        layers[li]->W.array() -= step_lr * (m_w[li].array() / correction1) /
                                 ((v_w[li].array() / correction2).sqrt() + adam_eps);
        m_b[li] = beta1 * m_b[li] + (1.0f - beta1) * grads.db[li];
        v_b[li] = beta2 * v_b[li] + (1.0f - beta2) * grads.db[li].cwiseProduct(grads.db[li]);
        layers[li]->b.array() -= step_lr * (m_b[li].array() / correction1) /
                                 ((v_b[li].array() / correction2).sqrt() + adam_eps);
      }
      loss_sum += loss;
      ++steps;
    }
    result.log.push_back({epoch, steps ? loss_sum / steps : 0.0, lr});
  }
  return result;
}

// ---------------------------------------------------------------------------
// sampling and rollout

Eigen::VectorXf sample_actions(const NoiseNet& net, const Eigen::VectorXf& zenc,
                               const Eigen::Vector4f& proprio, const NoiseSchedule& schedule,
                               double sigma_override, Rng& rng) {
  const int dim = net.cfg.action_dim;
  Eigen::VectorXf a(dim);
  for (int d = 0; d < dim; ++d) a(d) = static_cast<float>(rng.normal());

  const Eigen::VectorXf prop = proprio;
  for (int k = schedule.steps; k >= 1; --k) {
    const double ab = schedule.alpha_bar[k - 1];
    const double ab_prev = k > 1 ? schedule.alpha_bar[k - 2] : 1.0;
    const double alpha = schedule.alpha[k - 1];
    const double beta = schedule.beta[k - 1];

    // posterior mean through the implied clean sample, clamped to the
    // normalized action range; keeps the chain on the data manifold even
    // when the predictor is imperfect
    const Eigen::VectorXf a0_hat =
        net.predict_clean(a, zenc, prop, k, schedule).cwiseMax(-1.0f).cwiseMin(1.0f);
    const double coef_a0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
    const double coef_ak = std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab);
    a = (static_cast<float>(coef_a0) * a0_hat + static_cast<float>(coef_ak) * a).eval();

    if (k > 1) {
      const double posterior = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab));
      const double sigma = sigma_override >= 0.0 ? sigma_override : posterior;
      if (sigma > 0.0)
        for (int d = 0; d < dim; ++d) a(d) += static_cast<float>(sigma * rng.normal());
    }
  }
  return a;
}

sim::TrajectoryChunk decode_chunk(const Eigen::VectorXf& normalized, const NormStats& stats,
                                  int horizon) {
  const Eigen::VectorXf raw = stats.denormalize_clamped(normalized);
  sim::TrajectoryChunk chunk;
  chunk.actions.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    chunk.actions.push_back({raw(4 * t), raw(4 * t + 1), raw(4 * t + 2), raw(4 * t + 3)});
  }
  return chunk;
}

RolloutResult rollout(const NoiseNet& net, const NormStats& stats,
                      const NoiseSchedule& schedule, const Scene& scene,
                      std::pair<int, int> attended,
                      const std::vector<std::pair<int, int>>& allowed_pairs,
                      const ObsConfig& obs_config, const RolloutConfig& config, Rng& rng,
                      const sim::EnvConfig& env_config) {
  auto scene_ptr = std::make_shared<const Scene>(scene);
  std::optional<std::vector<geom::Camera>> rig;
  if (net.cfg.mode == InputMode::attn2d) rig = default_camera_rig();
  ObservationSampler sampler(scene_ptr, obs_config, rig ? &*rig : nullptr);

  EnvState state = sim::make_env(scene_ptr, env_config);
  const int horizon = net.cfg.action_dim / 4;
  bool grip_ever_closed = false;
  bool attended_held = false;

  RolloutResult result;
  while (state.frame < config.max_frames) {
    if (sim::task_reward(state, allowed_pairs) == 1.0) {
      result.success = true;
      break;
    }
    const int pick = net.cfg.mode == InputMode::none ? -1 : attended.first;
    const int place = net.cfg.mode == InputMode::none ? -1 : attended.second;
    const auto obs = sampler.observe(state, pick, place, net.cfg.mode == InputMode::attn2d);
    Eigen::VectorXf zenc;
    if (net.cfg.mode == InputMode::attn2d) {
      MatX<float> grid(1, obs.grid.size());
      grid.row(0) = obs.grid.transpose();
      zenc = net.encode_single(grid);
    } else {
      MatX<float> pts = obs.points;
      zenc = net.encode_single(pts);
    }
    const Eigen::VectorXf normed =
        sample_actions(net, zenc, obs.proprio, schedule, config.sigma_override, rng);
    const auto chunk = decode_chunk(normed, stats, horizon);

    const int to_run = std::min(config.replan_every, static_cast<int>(chunk.actions.size()));
    for (int t = 0; t < to_run && state.frame < config.max_frames; ++t) {
      state = sim::step_env(state, chunk.actions[t], env_config);
      if (state.grip_closed) grip_ever_closed = true;
      if (state.held) {
        for (const auto& [p, q] : allowed_pairs)
          if (*state.held == p) attended_held = true;
      }
      if (sim::task_reward(state, allowed_pairs) == 1.0) break;
    }
    if (sim::task_reward(state, allowed_pairs) == 1.0) {
      result.success = true;
      break;
    }
  }

  result.frames = state.frame;
  if (result.success) {
    result.stage = FailureStage::none;
  } else if (!grip_ever_closed) {
    result.stage = FailureStage::timeout;
  } else if (!attended_held) {
    result.stage = FailureStage::pick;
  } else {
    result.stage = FailureStage::place;
  }
  return result;
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {

void write_tensor(std::FILE* f, const MatX<float>& m) {
  const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
  std::fwrite(&rows, sizeof(rows), 1, f);
  std::fwrite(&cols, sizeof(cols), 1, f);
  std::fwrite(m.data(), sizeof(float), m.size(), f);
}

MatX<float> read_tensor(std::FILE* f) {
  std::uint32_t rows = 0, cols = 0;
  if (std::fread(&rows, sizeof(rows), 1, f) != 1 || std::fread(&cols, sizeof(cols), 1, f) != 1)
    throw Error("checkpoint: short read");
  MatX<float> m(rows, cols);
  if (std::fread(m.data(), sizeof(float), m.size(), f) != static_cast<std::size_t>(m.size()))
    throw Error("checkpoint: short read");
  return m;
}

}  // namespace

void write_checkpoint(const std::string& path, const NoiseNet& net, const NormStats& stats) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path);
  std::fwrite("NNET1", 1, 5, f);
  const auto layers = net.layers();
  const std::uint32_t count = static_cast<std::uint32_t>(layers.size() * 2);
  std::fwrite(&count, sizeof(count), 1, f);
  for (const auto* layer : layers) {
    write_tensor(f, layer->W);
    MatX<float> b(1, layer->b.size());
    b.row(0) = layer->b;
    write_tensor(f, b);
  }
  const std::uint32_t dim = static_cast<std::uint32_t>(stats.lo.size());
  std::fwrite(&dim, sizeof(dim), 1, f);
  std::fwrite(stats.lo.data(), sizeof(float), dim, f);
  std::fwrite(stats.hi.data(), sizeof(float), dim, f);
  std::fclose(f);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  char magic[5];
  if (std::fread(magic, 1, 5, f) != 5 || std::memcmp(magic, "NNET1", 5) != 0) {
    std::fclose(f);
    throw Error("not an NNET1 file");
  }
  std::uint32_t count = 0;
  if (std::fread(&count, sizeof(count), 1, f) != 1) {
    std::fclose(f);
    throw Error("checkpoint: short read");
  }
  std::vector<MatX<float>> tensors;
  for (std::uint32_t i = 0; i < count; ++i) tensors.push_back(read_tensor(f));

  Checkpoint ckpt;
  std::uint32_t dim = 0;
  if (std::fread(&dim, sizeof(dim), 1, f) != 1) {
    std::fclose(f);
    throw Error("checkpoint: short read");
  }
  ckpt.stats.lo.resize(dim);
  ckpt.stats.hi.resize(dim);
  const bool ok = std::fread(ckpt.stats.lo.data(), sizeof(float), dim, f) == dim &&
                  std::fread(ckpt.stats.hi.data(), sizeof(float), dim, f) == dim;
  std::fclose(f);
  if (!ok) throw Error("checkpoint: short read");

  // recover the architecture from tensor shapes
  NetConfig cfg;
  const auto& first = tensors.at(0);
  const int n_layers = static_cast<int>(count / 2);
  if (first.cols() == 4) {
    cfg.mode = InputMode::attn3d;
    cfg.residual = n_layers == 8;
    cfg.encoder_hidden = static_cast<int>(first.rows());
    cfg.state_dim = static_cast<int>(tensors.at(4).rows());
  } else {
    cfg.mode = InputMode::attn2d;
    cfg.grid_dim = static_cast<int>(first.cols());
    cfg.state_dim = static_cast<int>(tensors.at(2).rows());
  }
  const auto& last = tensors.at(tensors.size() - 2);
  cfg.action_dim = static_cast<int>(last.rows());
  const auto& h1 = tensors.at(tensors.size() - 8);
  cfg.head_hidden = static_cast<int>(h1.rows());
  cfg.k_embed_dim = static_cast<int>(h1.cols()) - cfg.action_dim - cfg.state_dim - cfg.proprio_dim;

  Rng rng(0);
  ckpt.net.init(cfg, rng);
  auto layers = ckpt.net.layers();
  if (layers.size() * 2 != count) throw Error("checkpoint: layer count mismatch");
  for (std::size_t li = 0; li < layers.size(); ++li) {
    layers[li]->W = tensors[2 * li];
    layers[li]->b = tensors[2 * li + 1].row(0);
  }
  return ckpt;
}

void write_training_log(const std::string& path, const std::vector<EpochLog>& log) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot open " + path);
  std::fprintf(f, "epoch,loss,lr\n");
  for (const auto& row : log) std::fprintf(f, "%d,%.9g,%.9g\n", row.epoch, row.loss, row.lr);
  std::fclose(f);
}

}  // namespace ambench::policy
