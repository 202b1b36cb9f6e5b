#include "havok/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "havok/artifacts.hpp"
#include "havok/embedding.hpp"
#include "havok/errors.hpp"
#include "havok/features.hpp"

namespace havok {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& block, const std::string& name,
                         std::initializer_list<const char*> known) {
    for (const auto& [key, value] : block.items()) {
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end()) {
            throw ConfigError("config: unknown key '" + key + "' in block '" + name + "'");
        }
    }
}

double get_number(const json& block, const char* key, double fallback) {
    if (!block.contains(key)) return fallback;
    if (!block[key].is_number()) {
        throw ConfigError(std::string("config: key '") + key + "' must be a number");
    }
    return block[key].get<double>();
}

int get_int(const json& block, const char* key, int fallback) {
    if (!block.contains(key)) return fallback;
    if (!block[key].is_number_integer()) {
        throw ConfigError(std::string("config: key '") + key + "' must be an integer");
    }
    return block[key].get<int>();
}

std::string get_string(const json& block, const char* key, const std::string& fallback) {
    if (!block.contains(key)) return fallback;
    if (!block[key].is_string()) {
        throw ConfigError(std::string("config: key '") + key + "' must be a string");
    }
    return block[key].get<std::string>();
}

/// "auto" or an integer.
std::optional<int> get_auto_int(const json& block, const char* key) {
    if (!block.contains(key)) return std::nullopt;
    if (block[key].is_string()) {
        if (block[key].get<std::string>() == "auto") return std::nullopt;
        throw ConfigError(std::string("config: key '") + key + "' must be \"auto\" or an integer");
    }
    if (!block[key].is_number_integer()) {
        throw ConfigError(std::string("config: key '") + key + "' must be \"auto\" or an integer");
    }
    return block[key].get<int>();
}

RankPolicy parse_rank_policy(const json& block) {
    if (!block.contains("rank")) return RankPolicy::manual(15);
    const auto& r = block["rank"];
    if (r.is_number_integer()) return RankPolicy::manual(r.get<int>());
    if (r.is_string()) {
        const auto s = r.get<std::string>();
        if (s == "hard-threshold") return RankPolicy::hard_threshold();
        if (s.rfind("energy:", 0) == 0) {
            return RankPolicy::energy_fraction(std::stod(s.substr(7)));
        }
    }
    throw ConfigError("config: 'rank' must be an integer, \"energy:<fraction>\" or "
                      "\"hard-threshold\"");
}

/// Lower median of a small integer list.
int median_int(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

struct ManifestEntry {
    std::string path;
    std::string stage;
};

class Manifest {
public:
    explicit Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::filesystem::path& file, const std::string& stage) {
        entries_.push_back({file.filename().string(), stage});
    }

    void write(const std::filesystem::path& file, const PipelineConfig& config,
               const std::string& error = {}) const;

private:
    std::filesystem::path dir_;
    std::vector<ManifestEntry> entries_;
};

void write_config_block(std::ostream& out, const PipelineConfig& config) {
    json j;
    j["input"]["path"] = config.input_path.string();
    if (config.dt) j["input"]["dt"] = *config.dt;
    if (config.k) {
        j["clustering"]["k"] = *config.k;
    } else {
        j["clustering"]["k"] = "auto";
    }
    j["clustering"]["k_min"] = config.k_min;
    j["clustering"]["k_max"] = config.k_max;
    j["clustering"]["energy"] = config.energy_target;
    j["clustering"]["max_iter"] = config.cluster_max_iter;
    j["embedding"]["tau"] = config.tau ? json(*config.tau) : json("auto");
    j["embedding"]["dim"] = config.dim ? json(*config.dim) : json("auto");
    j["embedding"]["tau_max"] = config.tau_max;
    j["embedding"]["d_max"] = config.d_max;
    j["embedding"]["bins"] = config.bins;
    j["embedding"]["rtol"] = config.fnn_rtol;
    j["embedding"]["atol"] = config.fnn_atol;
    switch (config.rank_policy.kind) {
        case RankPolicy::Kind::manual: j["model"]["rank"] = config.rank_policy.rank; break;
        case RankPolicy::Kind::energy:
            j["model"]["rank"] = "energy:" + format_double(config.rank_policy.energy);
            break;
        case RankPolicy::Kind::hard_threshold: j["model"]["rank"] = "hard-threshold"; break;
    }
    j["model"]["lambda"] = config.ridge_lambda;
    j["model"]["eps"] = config.threshold;
    if (config.split_index) j["forecast"]["split"] = *config.split_index;
    if (config.horizon) j["forecast"]["horizon"] = *config.horizon;
    j["forecast"]["forcing"] = to_string(config.forcing);
    j["forecast"]["forcing_threshold"] = config.forcing_threshold;
    j["forecast"]["histogram_instants"] = config.histogram_instants;
    for (Family f : config.families) {
        j["stats"]["families"].push_back(std::string(family_name(f)));
    }
    j["stats"]["significance"] = config.significance;
    j["seed"] = config.seed;
    j["threads"] = config.threads;
    out << j.dump(2);
}

void Manifest::write(const std::filesystem::path& file, const PipelineConfig& config,
                     const std::string& error) const {
    std::ofstream out(file);
    if (!out) {
        throw DataError("cannot write manifest '" + file.string() + "'");
    }
    out << "{\n  \"artifacts\": [\n";
    std::vector<ManifestEntry> all = entries_;
    all.push_back({file.filename().string(), "manifest"});
    for (std::size_t i = 0; i < all.size(); ++i) {
        out << "    {\"path\": \"" << all[i].path << "\", \"stage\": \"" << all[i].stage << "\"}";
        out << (i + 1 < all.size() ? ",\n" : "\n");
    }
    out << "  ],\n";
    if (!error.empty()) {
        out << "  \"error\": " << json(error).dump() << ",\n";
    }
    out << "  \"config\": ";
    write_config_block(out, config);
    out << "\n}\n";
}

} // namespace

PipelineConfig parse_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "': " + e.what());
    }

    reject_unknown_keys(j, "<root>",
                        {"input", "clustering", "embedding", "model", "forecast", "stats",
                         "output", "seed", "threads"});

    PipelineConfig config;
    if (j.contains("input")) {
        const auto& block = j["input"];
        reject_unknown_keys(block, "input", {"path", "dt"});
        config.input_path = get_string(block, "path", "");
        if (block.contains("dt")) config.dt = get_number(block, "dt", 0.0);
    }
    if (j.contains("clustering")) {
        const auto& block = j["clustering"];
        reject_unknown_keys(block, "clustering", {"k", "k_min", "k_max", "energy", "max_iter"});
        config.k = get_auto_int(block, "k");
        config.k_min = get_int(block, "k_min", config.k_min);
        config.k_max = get_int(block, "k_max", config.k_max);
        config.energy_target = get_number(block, "energy", config.energy_target);
        config.cluster_max_iter = get_int(block, "max_iter", config.cluster_max_iter);
    }
    if (j.contains("embedding")) {
        const auto& block = j["embedding"];
        reject_unknown_keys(block, "embedding",
                            {"tau", "dim", "tau_max", "d_max", "bins", "rtol", "atol"});
        config.tau = get_auto_int(block, "tau");
        config.dim = get_auto_int(block, "dim");
        config.tau_max = get_int(block, "tau_max", config.tau_max);
        config.d_max = get_int(block, "d_max", config.d_max);
        config.bins = get_int(block, "bins", config.bins);
        config.fnn_rtol = get_number(block, "rtol", config.fnn_rtol);
        config.fnn_atol = get_number(block, "atol", config.fnn_atol);
    }
    if (j.contains("model")) {
        const auto& block = j["model"];
        reject_unknown_keys(block, "model", {"rank", "lambda", "eps"});
        config.rank_policy = parse_rank_policy(block);
        config.ridge_lambda = get_number(block, "lambda", config.ridge_lambda);
        config.threshold = get_number(block, "eps", config.threshold);
    }
    if (j.contains("forecast")) {
        const auto& block = j["forecast"];
        reject_unknown_keys(block, "forecast",
                            {"split", "horizon", "forcing", "forcing_threshold",
                             "histogram_instants"});
        if (block.contains("split")) {
            config.split_index = static_cast<std::size_t>(get_int(block, "split", 0));
        }
        if (block.contains("horizon")) config.horizon = get_int(block, "horizon", 0);
        config.forcing = forcing_mode_from_string(get_string(block, "forcing", "measured"));
        config.forcing_threshold =
            get_number(block, "forcing_threshold", config.forcing_threshold);
        if (block.contains("histogram_instants")) {
            if (!block["histogram_instants"].is_array()) {
                throw ConfigError("config: 'histogram_instants' must be an array");
            }
            config.histogram_instants.clear();
            for (const auto& v : block["histogram_instants"]) {
                config.histogram_instants.push_back(v.get<std::size_t>());
            }
        }
    }
    if (j.contains("stats")) {
        const auto& block = j["stats"];
        reject_unknown_keys(block, "stats", {"families", "significance"});
        if (block.contains("families")) {
            if (!block["families"].is_array()) {
                throw ConfigError("config: 'families' must be an array");
            }
            config.families.clear();
            for (const auto& v : block["families"]) {
                config.families.push_back(family_from_string(v.get<std::string>()));
            }
        }
        config.significance = get_number(block, "significance", config.significance);
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) {
            throw ConfigError("config: 'output' must be a string");
        }
        config.output_dir = j["output"].get<std::string>();
    }
    if (j.contains("seed")) config.seed = static_cast<std::uint64_t>(get_int(j, "seed", 0));
    if (j.contains("threads")) config.threads = get_int(j, "threads", 1);
    return config;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

PipelineOutcome run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    Manifest manifest(dir);

    std::string stage = "load";
    try {
        CsvSchema schema;
        schema.dt = config.dt;
        const Dataset dataset = load_dataset(config.input_path, schema);
        const auto& sequences = dataset.sequences();
        const std::size_t n = sequences.size();

        // ---- cluster ------------------------------------------------------
        stage = "cluster";
        CfcOptions cfc_options;
        cfc_options.k = n == 1 ? std::optional<int>(1) : config.k;
        cfc_options.k_min = config.k_min;
        cfc_options.k_max = config.k_max;
        cfc_options.energy_target = config.energy_target;
        cfc_options.max_iter = config.cluster_max_iter;
        cfc_options.seed = config.seed;
        const CfcResult clusters = cfc(dataset, cfc_options);

        write_features_csv(dir / "features.csv", clusters.features);
        manifest.add("features.csv", "cluster");
        write_clusters_json(dir / "clusters.json", clusters);
        manifest.add("clusters.json", "cluster");

        // ---- per-cluster embedding parameters ------------------------------
        stage = "embed";
        const int n_clusters = clusters.clusters.k;
        std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_clusters));
        for (std::size_t i = 0; i < n; ++i) {
            const int c = clusters.clusters.assignment.at(sequences[i].id()) - 1;
            members[static_cast<std::size_t>(c)].push_back(i);
        }

        std::vector<EmbeddingConfig> cluster_config(static_cast<std::size_t>(n_clusters));
        for (int c = 0; c < n_clusters; ++c) {
            const auto& idx = members[static_cast<std::size_t>(c)];
            std::vector<std::string> ids;
            for (auto i : idx) ids.push_back(sequences[i].id());

            int tau = config.tau.value_or(0);
            bool tau_local_min = true;
            std::vector<std::vector<double>> ami_curves(idx.size());
            if (!config.tau) {
                std::vector<int> taus(idx.size());
                std::vector<char> local_min(idx.size(), 1);
                parallel_for(idx.size(), config.threads, [&](std::size_t m) {
                    const DelayScan scan =
                        select_delay(sequences[idx[m]], config.tau_max, config.bins);
                    taus[m] = scan.tau;
                    local_min[m] = scan.local_minimum_found ? 1 : 0;
                    ami_curves[m] = scan.curve;
                });
                tau = median_int(taus);
                tau_local_min =
                    std::all_of(local_min.begin(), local_min.end(), [](char v) { return v != 0; });
                write_ami_curves_csv(dir / ("ami_curve_c" + std::to_string(c + 1) + ".csv"), ids,
                                     ami_curves);
                manifest.add("ami_curve_c" + std::to_string(c + 1) + ".csv", "embed");
            }

            int dim = config.dim.value_or(0);
            bool drop_found = true;
            std::optional<int> rise_index;
            if (!config.dim) {
                std::vector<int> dims(idx.size());
                std::vector<char> drops(idx.size(), 1);
                std::vector<std::vector<double>> fnn_curves(idx.size());
                std::vector<std::optional<int>> rises(idx.size());
                parallel_for(idx.size(), config.threads, [&](std::size_t m) {
                    const DimensionScan scan =
                        select_dimension(sequences[idx[m]], tau, config.d_max, 10.0,
                                         config.fnn_rtol, config.fnn_atol);
                    dims[m] = scan.dim;
                    drops[m] = scan.drop_found ? 1 : 0;
                    fnn_curves[m] = scan.curve;
                    rises[m] = scan.rise_index;
                });
                dim = median_int(dims);
                drop_found =
                    std::all_of(drops.begin(), drops.end(), [](char v) { return v != 0; });
                for (const auto& r : rises) {
                    if (r) {
                        rise_index = r;
                        break;
                    }
                }
                write_fnn_curves_csv(dir / ("fnn_curve_c" + std::to_string(c + 1) + ".csv"), ids,
                                     fnn_curves);
                manifest.add("fnn_curve_c" + std::to_string(c + 1) + ".csv", "embed");
            }
            // a forced model needs at least rank 2, so keep dim >= 2
            dim = std::max(dim, 2);
            cluster_config[static_cast<std::size_t>(c)] = EmbeddingConfig{tau, dim};
            write_embedding_json(dir / ("embedding_c" + std::to_string(c + 1) + ".json"),
                                 cluster_config[static_cast<std::size_t>(c)], tau_local_min,
                                 drop_found, rise_index);
            manifest.add("embedding_c" + std::to_string(c + 1) + ".json", "embed");
        }

        // ---- fit + forecast -------------------------------------------------
        stage = "fit";
        struct PerSequence {
            HavokFit fit;
            ForecastResult forecast;
            std::vector<double> truth;
            std::vector<IndexInterval> intervals;
            std::size_t forcing_length = 0;
            std::vector<FamilyOutcome> stats;
        };
        std::vector<PerSequence> results(n);
        parallel_for(n, config.threads, [&](std::size_t i) {
            const Sequence& seq = sequences[i];
            const int c = clusters.clusters.assignment.at(seq.id()) - 1;
            const EmbeddingConfig embedding = cluster_config[static_cast<std::size_t>(c)];

            const std::size_t split_at =
                config.split_index.value_or(seq.size() * 3 / 4);
            auto [train, test] = split(seq, split_at);

            PerSequence& r = results[i];
            r.fit = fit_havok(train, embedding, config.rank_policy, config.ridge_lambda,
                              config.threshold);

            // project the full sequence to teacher-force the test window
            const Eigen::MatrixXd coords = project_coordinates(r.fit.model, seq);
            const auto n_cols = static_cast<std::size_t>(coords.rows());
            if (split_at >= n_cols) {
                throw DataError("forecast: sequence '" + seq.id() +
                                "': no embedded columns remain after the split");
            }
            const int available = static_cast<int>(n_cols - split_at);
            const int horizon = config.horizon ? std::min(*config.horizon, available) : available;

            const int r_lin = r.fit.model.rank - 1;
            const Eigen::VectorXd v0 =
                coords.row(static_cast<Eigen::Index>(split_at)).head(r_lin);
            std::vector<double> forcing_series(static_cast<std::size_t>(horizon));
            for (int s = 0; s < horizon; ++s) {
                forcing_series[static_cast<std::size_t>(s)] =
                    coords(static_cast<Eigen::Index>(split_at) + s, r_lin);
            }
            // held mode repeats the last training forcing sample
            if (config.forcing == ForcingMode::held) {
                forcing_series = {r.fit.v(static_cast<Eigen::Index>(split_at) - 1, r_lin)};
            }
            r.forecast =
                simulate(r.fit.model, v0, forcing_series, config.forcing, horizon);
            r.truth.assign(seq.values().begin() + static_cast<std::ptrdiff_t>(split_at),
                           seq.values().begin() + static_cast<std::ptrdiff_t>(split_at) +
                               horizon);

            // burst detection over the whole projected forcing; statistics on
            // the training part only
            const Eigen::VectorXd v_r_full = coords.col(r_lin);
            r.forcing_length = static_cast<std::size_t>(v_r_full.size());
            r.intervals = forcing_active({v_r_full.data(),
                                          static_cast<std::size_t>(v_r_full.size())},
                                         config.forcing_threshold);
            const Eigen::VectorXd v_r_train = r.fit.v.col(r_lin);
            const std::vector<double> shifted = shift_positive(
                {v_r_train.data(), static_cast<std::size_t>(v_r_train.size())});
            r.stats = best_fit(shifted, config.families, config.significance);
        });

        stage = "write";
        for (std::size_t i = 0; i < n; ++i) {
            const std::string tag = sanitize_id(sequences[i].id());
            const PerSequence& r = results[i];
            write_model_json(dir / ("model_" + tag + ".json"), r.fit.model);
            manifest.add("model_" + tag + ".json", "fit");
            write_forecast_csv(dir / ("forecast_" + tag + ".csv"), r.forecast, sequences[i].dt(),
                               &r.truth);
            manifest.add("forecast_" + tag + ".csv", "forecast");
            write_forcing_intervals_json(dir / ("forcing_intervals_" + tag + ".json"),
                                         r.intervals, config.forcing_threshold,
                                         r.forcing_length);
            manifest.add("forcing_intervals_" + tag + ".json", "forecast");
            write_ks_table_csv(dir / ("ks_table_" + tag + ".csv"), r.stats);
            manifest.add("ks_table_" + tag + ".csv", "stats");
        }

        // ---- ensemble error evolution --------------------------------------
        stage = "errors";
        std::size_t common = results.front().truth.size();
        for (const auto& r : results) common = std::min(common, r.truth.size());
        std::vector<std::vector<double>> predictions(n), truths(n);
        for (std::size_t i = 0; i < n; ++i) {
            predictions[i].assign(results[i].forecast.x_hat.begin(),
                                  results[i].forecast.x_hat.begin() +
                                      static_cast<std::ptrdiff_t>(common));
            truths[i].assign(results[i].truth.begin(),
                             results[i].truth.begin() + static_cast<std::ptrdiff_t>(common));
        }
        const ErrorEvolution errors = error_evolution(predictions, truths);
        write_errors_csv(dir / "errors.csv", errors, dataset.dt());
        manifest.add("errors.csv", "errors");

        std::vector<std::size_t> instants;
        std::vector<Histogram> histograms;
        for (std::size_t instant : config.histogram_instants) {
            if (instant >= common) continue;
            std::vector<double> snapshot(n);
            for (std::size_t i = 0; i < n; ++i) {
                snapshot[i] = predictions[i][instant] - truths[i][instant];
            }
            instants.push_back(instant);
            histograms.push_back(histogram(snapshot, 30));
        }
        write_error_histograms_csv(dir / "error_histograms.csv", instants, histograms);
        manifest.add("error_histograms.csv", "errors");

        manifest.write(dir / "manifest.json", config);
        return PipelineOutcome{dir / "manifest.json", n_clusters, n};
    } catch (const Error& e) {
        manifest.write(dir / "manifest.partial.json", config,
                       "stage '" + stage + "': " + e.what());
        throw Error(e.category(), "stage '" + stage + "': " + e.what());
    }
}

} // namespace havok
