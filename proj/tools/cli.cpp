#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ambench/bench.hpp"

namespace ambench::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string());
  out << content;
}

/// Reproducible provenance record next to every artifact.
void write_manifest(const fs::path& target, const std::string& command,
                    const ordered_json& config) {
  ordered_json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["config"] = config;
  const fs::path path = fs::is_directory(target) ? target / "manifest.json"
                                                 : fs::path(target.string() + ".manifest.json");
  write_file(path, manifest.dump(2) + "\n");
}

struct SceneFlags {
  int min_batteries = 1;
  int max_batteries = 3;
  int occupied = 0;

  void attach(CLI::App* app) {
    app->add_option("--min-batteries", min_batteries, "Minimum loose batteries (pack task)");
    app->add_option("--max-batteries", max_batteries, "Maximum loose batteries (pack task)");
    app->add_option("--occupied", occupied, "Pre-filled slots, 0-11 (pack task)");
  }
  sim::SceneConfig to_config() const {
    sim::SceneConfig cfg;
    cfg.min_batteries = min_batteries;
    cfg.max_batteries = max_batteries;
    cfg.occupied_slots = occupied;
    return cfg;
  }
  ordered_json to_json() const {
    return {{"min_batteries", min_batteries},
            {"max_batteries", max_batteries},
            {"occupied", occupied}};
  }
};

policy::InputMode parse_variant(const std::string& name) {
  if (name == "attn3d") return policy::InputMode::attn3d;
  if (name == "attn2d") return policy::InputMode::attn2d;
  if (name == "none") return policy::InputMode::none;
  throw CLI::ValidationError("--variant", "expected attn3d, attn2d or none");
}

std::string svg_curve(const std::vector<bench::CurvePoint>& points) {
  // minimal static plot: success rate over demo count with the CI band
  const double w = 480, h = 320, ml = 50, mb = 40;
  double max_x = 1;
  for (const auto& p : points) max_x = std::max(max_x, static_cast<double>(p.demos));
  auto px = [&](double demos) { return ml + (w - ml - 10) * demos / max_x; };
  auto py = [&](double rate) { return h - mb - (h - mb - 10) * rate; };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - 10 << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << ml
      << "' y2='10' stroke='black'/>\n";
  svg << "<polyline fill='none' stroke='#1f77b4' stroke-width='2' points='";
  for (const auto& p : points) svg << px(p.demos) << "," << py(p.rate) << " ";
  svg << "'/>\n";
  for (const auto& p : points) {
    svg << "<line x1='" << px(p.demos) << "' y1='" << py(p.ci_lo) << "' x2='" << px(p.demos)
        << "' y2='" << py(p.ci_hi) << "' stroke='#1f77b4'/>\n";
    svg << "<circle cx='" << px(p.demos) << "' cy='" << py(p.rate) << "' r='3' fill='#1f77b4'/>\n";
  }
  svg << "<text x='" << (w / 2) << "' y='" << (h - 8) << "' font-size='12'>demonstrations</text>\n";
  svg << "<text x='12' y='" << (h / 2) << "' font-size='12' transform='rotate(-90 12 " << (h / 2)
      << ")'>success rate</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

int run_checked(int argc, const char* const* argv) {
  CLI::App app{"Tabletop language-to-attention and attention-conditioned policy workbench"};
  app.require_subcommand(1);
  app.fallthrough();  // allow --seed after the subcommand name

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Master random seed")->capture_default_str();

  // ---- gen-scenes ----------------------------------------------------------
  auto* gen_scenes = app.add_subcommand("gen-scenes", "Write randomized scene JSON files");
  std::string gs_task = "pack_battery", gs_out = "scenes";
  int gs_count = 10;
  SceneFlags gs_flags;
  gen_scenes->add_option("--task", gs_task, "pack_battery | hang_mug")->required();
  gen_scenes->add_option("--count", gs_count, "Number of scenes")->required();
  gen_scenes->add_option("--out", gs_out, "Output directory")->required();
  gs_flags.attach(gen_scenes);

  // ---- gen-instructions ----------------------------------------------------
  auto* gen_instr =
      app.add_subcommand("gen-instructions", "Sample consistent instructions for stored scenes");
  std::string gi_scenes = "scenes", gi_out = "instructions.jsonl";
  int gi_per_scene = 1;
  gen_instr->add_option("--scenes", gi_scenes, "Directory of scene JSON files")->required();
  gen_instr->add_option("--out", gi_out, "Output JSONL file")->required();
  gen_instr->add_option("--per-scene", gi_per_scene, "Instructions per scene");

  // ---- gen-demos -----------------------------------------------------------
  auto* gen_demos = app.add_subcommand("gen-demos", "Generate scripted demonstration datasets");
  std::string gd_task = "pack_battery", gd_out = "demos.bin";
  int gd_count = 100, gd_points = 256, gd_samples = 120, gd_horizon = 16, gd_stride = 2;
  bool gd_grid = false;
  SceneFlags gd_flags;
  gen_demos->add_option("--task", gd_task)->required();
  gen_demos->add_option("--count", gd_count, "Number of demonstrations")->required();
  gen_demos->add_option("--out", gd_out, "Output dataset file")->required();
  gen_demos->add_option("--encoder-points", gd_points, "Points per encoder observation");
  gen_demos->add_option("--samples-per-object", gd_samples);
  gen_demos->add_option("--horizon", gd_horizon, "Action chunk length");
  gen_demos->add_option("--stride", gd_stride, "Frames between records");
  gen_demos->add_flag("--with-grid", gd_grid, "Also store multi-view 2d attention grids");
  gd_flags.attach(gen_demos);

  // ---- train-policy --------------------------------------------------------
  auto* train = app.add_subcommand("train-policy", "Train the diffusion policy on a dataset");
  std::string tp_demos = "demos.bin", tp_out = "policy.nnet", tp_variant = "attn3d", tp_log;
  int tp_epochs = 120, tp_batch = 64, tp_steps = 1000;
  double tp_lr = 1e-3;
  bool tp_no_residual = false;
  train->add_option("--demos", tp_demos)->required();
  train->add_option("--out", tp_out, "Checkpoint path")->required();
  train->add_option("--variant", tp_variant, "attn3d | attn2d | none");
  train->add_option("--epochs", tp_epochs, "Training epochs (360 for the full schedule)");
  train->add_option("--batch", tp_batch);
  train->add_option("--lr", tp_lr);
  train->add_option("--steps", tp_steps, "Denoising steps K");
  train->add_option("--log", tp_log, "Training log CSV path");
  train->add_flag("--no-residual", tp_no_residual, "Ablate the encoder residual path");

  // ---- eval-policy ---------------------------------------------------------
  auto* eval = app.add_subcommand("eval-policy", "Roll out a checkpoint in the toy env");
  std::string ep_ckpt = "policy.nnet", ep_task = "pack_battery", ep_out = "eval.json";
  std::string ep_variant = "attn3d";
  int ep_episodes = 50, ep_points = 256, ep_steps = 1000;
  bool ep_any_pair = false;
  SceneFlags ep_flags;
  eval->add_option("--ckpt", ep_ckpt)->required();
  eval->add_option("--task", ep_task)->required();
  eval->add_option("--episodes", ep_episodes);
  eval->add_option("--out", ep_out)->required();
  eval->add_option("--variant", ep_variant, "attn3d | attn2d | none");
  eval->add_option("--encoder-points", ep_points);
  eval->add_option("--steps", ep_steps, "Denoising steps K");
  eval->add_flag("--any-pair", ep_any_pair, "Score any valid pair as success");
  ep_flags.attach(eval);

  // ---- run-attn-bench ------------------------------------------------------
  auto* attn = app.add_subcommand("run-attn-bench", "Language-to-attention benchmark");
  std::string ab_task = "pack_battery", ab_out = "report.json", ab_dump;
  int ab_episodes = 100;
  double ab_noise = 0.0, ab_chamfer = 0.005, ab_sim = 0.7, ab_eps_pack = 0.1, ab_eps_hang = 0.15;
  attn->add_option("--task", ab_task)->required();
  attn->add_option("--episodes", ab_episodes);
  attn->add_option("--noise", ab_noise, "Feature noise sigma");
  attn->add_option("--out", ab_out)->required();
  attn->add_option("--chamfer-threshold", ab_chamfer);
  attn->add_option("--sim-threshold", ab_sim);
  attn->add_option("--eps-pack", ab_eps_pack, "Clustering radius, pack task");
  attn->add_option("--eps-hang", ab_eps_hang, "Clustering radius, hang task");
  attn->add_option("--dump-dir", ab_dump, "Per-episode cloud/attention dumps");

  // ---- ambiguity-matrix ----------------------------------------------------
  auto* matrix =
      app.add_subcommand("ambiguity-matrix", "Success-rate grid over picking x placing options");
  std::string am_variant = "attn3d", am_out = "matrix.csv";
  std::vector<int> am_picks{1, 2, 3, 4}, am_places{1, 2, 3, 4, 12};
  int am_demos = 120, am_rollouts = 50, am_epochs = 180, am_points = 256;
  matrix->add_option("--variant", am_variant)->required();
  matrix->add_option("--picks", am_picks, "Picking option counts")->delimiter(',');
  matrix->add_option("--places", am_places, "Empty-slot counts")->delimiter(',');
  matrix->add_option("--demos", am_demos, "Demos per cell");
  matrix->add_option("--rollouts", am_rollouts, "Rollouts per cell");
  matrix->add_option("--epochs", am_epochs);
  matrix->add_option("--encoder-points", am_points);
  matrix->add_option("--out", am_out)->required();

  // ---- scaling-curve -------------------------------------------------------
  auto* curve = app.add_subcommand("scaling-curve", "Success rate versus demo count");
  std::string sc_variant = "attn3d", sc_out = "curve.csv";
  std::vector<int> sc_counts{30, 60, 120, 240, 540};
  int sc_rollouts = 50, sc_epochs = 180, sc_points = 256;
  curve->add_option("--variant", sc_variant)->required();
  curve->add_option("--counts", sc_counts, "Demo counts")->delimiter(',');
  curve->add_option("--rollouts", sc_rollouts);
  curve->add_option("--epochs", sc_epochs);
  curve->add_option("--encoder-points", sc_points);
  curve->add_option("--out", sc_out)->required();

  // ---- report --------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Summarize a run directory");
  std::string rp_run = ".", rp_plot;
  report->add_option("--run", rp_run, "Run directory")->required();
  report->add_option("--plot", rp_plot, "Write an SVG curve plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // any malformed invocation is a config error
  }

  if (*gen_scenes) {
    const auto task = sim::task_from_string(gs_task);
    if (gs_count < 1) throw CLI::ValidationError("--count", "must be >= 1");
    fs::create_directories(gs_out);
    for (int i = 0; i < gs_count; ++i) {
      std::uint64_t state = seed ^ (0x5ce2eULL * 0x9e3779b97f4a7c15ULL) ^ (i + 1);
      const auto scene_seed = splitmix64(state);
      const auto scene = sim::gen_scene(task, scene_seed, gs_flags.to_config());
      char name[64];
      std::snprintf(name, sizeof(name), "scene_%04d.json", i);
      write_file(fs::path(gs_out) / name, sim::scene_to_json(scene));
    }
    write_manifest(gs_out, "gen-scenes",
                   {{"task", gs_task},
                    {"count", gs_count},
                    {"seed", seed},
                    {"scene", gs_flags.to_json()}});
    return 0;
  }

  if (*gen_instr) {
    if (gi_per_scene < 1) throw CLI::ValidationError("--per-scene", "must be >= 1");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(gi_scenes))
      if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::string out;
    Rng rng(seed ^ 0x1257aULL);
    for (const auto& file : files) {
      std::ifstream in(file);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const auto scene = sim::scene_from_json(buffer.str());
      for (int i = 0; i < gi_per_scene; ++i) {
        const auto instruction = lang::sample_instruction(scene.task, scene, rng);
        out +=
            lang::instruction_to_jsonl(instruction, lang::extract_targets(scene, instruction)) +
            "\n";
      }
    }
    write_file(gi_out, out);
    write_manifest(gi_out, "gen-instructions",
                   {{"scenes", gi_scenes}, {"per_scene", gi_per_scene}, {"seed", seed}});
    return 0;
  }

  if (*gen_demos) {
    bench::DemoGenConfig cfg;
    cfg.task = sim::task_from_string(gd_task);
    cfg.count = gd_count;
    cfg.seed = seed;
    cfg.scene = gd_flags.to_config();
    cfg.obs.encoder_points = gd_points;
    cfg.obs.samples_per_object = gd_samples;
    cfg.horizon = gd_horizon;
    cfg.record_stride = gd_stride;
    cfg.with_grid = gd_grid;
    const auto dataset = bench::generate_demos(cfg);
    if (fs::path(gd_out).has_parent_path())
      fs::create_directories(fs::path(gd_out).parent_path());
    bench::write_demos(gd_out, dataset);
    write_manifest(gd_out, "gen-demos",
                   {{"task", gd_task},
                    {"count", gd_count},
                    {"seed", seed},
                    {"encoder_points", gd_points},
                    {"horizon", gd_horizon},
                    {"stride", gd_stride},
                    {"with_grid", gd_grid},
                    {"scene", gd_flags.to_json()}});
    return 0;
  }

  if (*train) {
    const auto dataset = bench::read_demos(tp_demos);
    policy::TrainConfig cfg;
    cfg.mode = parse_variant(tp_variant);
    cfg.residual = !tp_no_residual;
    cfg.epochs = tp_epochs;
    cfg.batch_size = tp_batch;
    cfg.lr = tp_lr;
    cfg.denoise_steps = tp_steps;
    cfg.seed = seed;
    const auto trained = policy::train(dataset, cfg);
    if (fs::path(tp_out).has_parent_path())
      fs::create_directories(fs::path(tp_out).parent_path());
    policy::write_checkpoint(tp_out, trained.net, trained.stats);
    if (!tp_log.empty()) policy::write_training_log(tp_log, trained.log);
    write_manifest(tp_out, "train-policy",
                   {{"demos", tp_demos},
                    {"variant", tp_variant},
                    {"epochs", tp_epochs},
                    {"batch", tp_batch},
                    {"lr", tp_lr},
                    {"steps", tp_steps},
                    {"residual", !tp_no_residual},
                    {"seed", seed}});
    return 0;
  }

  if (*eval) {
    auto ckpt = policy::read_checkpoint(ep_ckpt);
    const auto variant = parse_variant(ep_variant);
    if (ckpt.net.cfg.mode != policy::InputMode::attn2d) ckpt.net.cfg.mode = variant;
    bench::EvalConfig cfg;
    cfg.task = sim::task_from_string(ep_task);
    cfg.episodes = ep_episodes;
    cfg.seed = seed;
    cfg.scene = ep_flags.to_config();
    cfg.obs.encoder_points = ep_points;
    cfg.attended_scoring = !ep_any_pair;
    const auto schedule = policy::NoiseSchedule::linear(ep_steps);
    const auto result = bench::evaluate_policy(ckpt.net, ckpt.stats, schedule, cfg);
    write_file(ep_out, bench::eval_to_json(result));
    write_manifest(ep_out, "eval-policy",
                   {{"ckpt", ep_ckpt},
                    {"task", ep_task},
                    {"episodes", ep_episodes},
                    {"variant", ep_variant},
                    {"any_pair", ep_any_pair},
                    {"seed", seed},
                    {"scene", ep_flags.to_json()}});
    return 0;
  }

  if (*attn) {
    bench::BenchConfig cfg;
    cfg.task = sim::task_from_string(ab_task);
    cfg.episodes = ab_episodes;
    cfg.seed = seed;
    cfg.noise_sigma = ab_noise;
    cfg.chamfer_threshold = ab_chamfer;
    cfg.grounding.sim_threshold = ab_sim;
    cfg.grounding.eps_pack = ab_eps_pack;
    cfg.grounding.eps_hang = ab_eps_hang;
    cfg.dump_dir = ab_dump;
    const auto result = bench::run_attention_benchmark(cfg);
    write_file(ab_out, bench::report_to_json(result));
    write_manifest(ab_out, "run-attn-bench",
                   {{"task", ab_task},
                    {"episodes", ab_episodes},
                    {"noise", ab_noise},
                    {"chamfer_threshold", ab_chamfer},
                    {"sim_threshold", ab_sim},
                    {"eps_pack", ab_eps_pack},
                    {"eps_hang", ab_eps_hang},
                    {"seed", seed}});
    std::printf("%s: %d/%d\n", ab_task.c_str(), result.successes, result.total);
    return 0;
  }

  if (*matrix) {
    bench::MatrixConfig cfg;
    cfg.picks = am_picks;
    cfg.places = am_places;
    cfg.demos_per_cell = am_demos;
    cfg.rollouts = am_rollouts;
    cfg.seed = seed;
    cfg.train.mode = parse_variant(am_variant);
    cfg.train.epochs = am_epochs;
    cfg.obs.encoder_points = am_points;
    const auto cells = bench::run_ambiguity_matrix(cfg);
    write_file(am_out, bench::matrix_to_csv(cells));
    write_manifest(am_out, "ambiguity-matrix",
                   {{"variant", am_variant},
                    {"picks", am_picks},
                    {"places", am_places},
                    {"demos", am_demos},
                    {"rollouts", am_rollouts},
                    {"epochs", am_epochs},
                    {"encoder_points", am_points},
                    {"seed", seed}});
    return 0;
  }

  if (*curve) {
    bench::CurveConfig cfg;
    cfg.demo_counts = sc_counts;
    cfg.rollouts = sc_rollouts;
    cfg.seed = seed;
    cfg.train.mode = parse_variant(sc_variant);
    cfg.train.epochs = sc_epochs;
    cfg.obs.encoder_points = sc_points;
    const auto points = bench::run_scaling_curve(cfg);
    write_file(sc_out, bench::curve_to_csv(points));
    write_manifest(sc_out, "scaling-curve",
                   {{"variant", sc_variant},
                    {"counts", sc_counts},
                    {"rollouts", sc_rollouts},
                    {"epochs", sc_epochs},
                    {"seed", seed}});
    return 0;
  }

  if (*report) {
    const fs::path run(rp_run);
    bool found = false;
    for (const auto& name : {"report.json", "eval.json"}) {
      if (!fs::exists(run / name)) continue;
      std::ifstream in(run / name);
      const auto j = ordered_json::parse(in);
      std::printf("%s: %d/%d successes\n", j.value("task", std::string("?")).c_str(),
                  j.value("successes", 0), j.value("total", 0));
      if (j.contains("failures"))
        for (const auto& [key, value] : j["failures"].items())
          std::printf("  %s failures: %d\n", key.c_str(), value.get<int>());
      found = true;
    }
    for (const auto& name : {"matrix.csv", "curve.csv"}) {
      if (!fs::exists(run / name)) continue;
      std::ifstream in(run / name);
      std::cout << in.rdbuf();
      found = true;
    }
    if (!rp_plot.empty()) {
      if (!fs::exists(run / "curve.csv")) throw Error("report --plot needs curve.csv");
      std::ifstream in(run / "curve.csv");
      std::string line;
      std::getline(in, line);  // header
      std::vector<bench::CurvePoint> points;
      while (std::getline(in, line)) {
        bench::CurvePoint p;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &p.demos, &p.rate, &p.ci_lo, &p.ci_hi) ==
            4)
          points.push_back(p);
      }
      write_file(rp_plot, svg_curve(points));
      found = true;
    }
    if (!found) throw Error("report: nothing recognizable under " + run.string());
    return 0;
  }

  return 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
  try {
    return run_checked(argc, argv);
  } catch (const CLI::Error&) {
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace ambench::cli
