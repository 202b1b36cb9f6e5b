#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "havok/distributions.hpp"
#include "havok/forecast.hpp"
#include "havok/regression.hpp"
#include "havok/signal.hpp"

namespace havok {

/// Resolved configuration of a full pipeline run. Every block of the
/// config file is optional; these are the defaults.
struct PipelineConfig {
    // input
    std::filesystem::path input_path;
    std::optional<double> dt; ///< required when the CSV has no time column

    // clustering
    std::optional<int> k; ///< empty = silhouette scan
    int k_min = 2;
    int k_max = 10;
    double energy_target = 0.90;
    int cluster_max_iter = 1000;

    // embedding
    std::optional<int> tau; ///< empty = AMI first minimum
    std::optional<int> dim; ///< empty = FNN drop
    int tau_max = 20;
    int d_max = 50;
    int bins = 16;
    double fnn_rtol = 10.0;
    double fnn_atol = 2.0;

    // model
    RankPolicy rank_policy = RankPolicy::manual(15);
    double ridge_lambda = 1e-2;
    double threshold = 1e-6;

    // forecast
    std::optional<std::size_t> split_index; ///< default: 3/4 of the sequence
    std::optional<int> horizon;             ///< default: every remaining embedded column
    ForcingMode forcing = ForcingMode::measured;
    double forcing_threshold = 0.045;
    std::vector<std::size_t> histogram_instants = {100, 1000, 2000};

    // stats
    std::vector<Family> families = all_families();
    double significance = 0.05;

    // run
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Parse the JSON config file. Unknown keys anywhere are rejected with a
/// ConfigError naming the key.
PipelineConfig parse_pipeline_config(const std::filesystem::path& path);

struct PipelineOutcome {
    std::filesystem::path manifest_path;
    int clusters = 0;
    std::size_t sequences = 0;
};

/// Execute cluster -> per-cluster embedding selection -> per-sequence fit
/// -> held-out forecast -> forcing statistics, writing every artifact and
/// a manifest under config.output_dir. On a stage failure the artifacts
/// produced so far are recorded in manifest.partial.json and the error is
/// rethrown tagged with the stage name.
PipelineOutcome run_pipeline(const PipelineConfig& config);

/// Deterministic parallel map: runs fn(i) for i in [0, n) on up to
/// `threads` workers; exceptions are rethrown for the smallest index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace havok
