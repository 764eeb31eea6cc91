#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ambench/bench_types.hpp"
#include "ambench/env.hpp"
#include "ambench/feature_cloud.hpp"
#include "ambench/grounding.hpp"
#include "ambench/instructions.hpp"
#include "ambench/policy.hpp"

namespace ambench::bench {

/// Language -> attention benchmark over scripted episodes. Per episode:
/// generate a scene and matching instruction, render the cloud, compile and
/// run the selection program, and score the produced attention support
/// against the ground-truth support by Chamfer distance.
BenchReport run_attention_benchmark(const BenchConfig& config);

std::string report_to_json(const BenchReport& report);

/// Scripted demonstrations rendered into an encoder-ready dataset.
policy::DemoDataset generate_demos(const DemoGenConfig& config);

void write_demos(const std::string& path, const policy::DemoDataset& dataset);
policy::DemoDataset read_demos(const std::string& path);

/// Policy evaluation over fresh scenes; attended scoring restricts success
/// to the attended pair, otherwise any valid pair counts.
EvalReport evaluate_policy(const policy::NoiseNet& net, const policy::NormStats& stats,
                           const policy::NoiseSchedule& schedule, const EvalConfig& config);

std::string eval_to_json(const EvalReport& report);

/// Success-rate grid over picking options x placing options (empty slots).
/// Trains one policy per cell and evaluates it with the variant's scoring.
std::vector<MatrixCell> run_ambiguity_matrix(const MatrixConfig& config);

std::string matrix_to_csv(const std::vector<MatrixCell>& cells);

/// Success rate versus demo count, trained from prefixes of a shared pool.
std::vector<CurvePoint> run_scaling_curve(const CurveConfig& config);

std::string curve_to_csv(const std::vector<CurvePoint>& points);

/// Percentile bootstrap over binary outcomes.
std::pair<double, double> bootstrap_ci(const std::vector<std::uint8_t>& outcomes, int resamples,
                                       std::uint64_t seed);

/// Fraction of bootstrap resamples in which mean(a) > mean(b).
double bootstrap_prob_greater(const std::vector<std::uint8_t>& a,
                              const std::vector<std::uint8_t>& b, int resamples,
                              std::uint64_t seed);

}  // namespace ambench::bench
