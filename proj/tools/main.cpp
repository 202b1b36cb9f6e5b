#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "havok/artifacts.hpp"
#include "havok/embedding.hpp"
#include "havok/errors.hpp"
#include "havok/features.hpp"
#include "havok/forecast.hpp"
#include "havok/pipeline.hpp"
#include "havok/regression.hpp"
#include "havok/signal.hpp"
#include "havok/stats.hpp"
#include "havok/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct InputOptions {
    std::string path;
    double dt = 0.0; ///< 0 = infer from the time column
    std::string id; ///< empty = first sequence
};

void add_input_options(CLI::App* cmd, InputOptions& input, bool with_id = true) {
    cmd->add_option("--input", input.path, "input CSV (wide or id,t,value long layout)")
        ->required();
    cmd->add_option("--dt", input.dt, "sample interval when the CSV has no time column");
    if (with_id) {
        cmd->add_option("--id", input.id, "sequence id to use (default: first column)");
    }
}

havok::Dataset load_input(const InputOptions& input) {
    havok::CsvSchema schema;
    if (input.dt > 0.0) schema.dt = input.dt;
    return havok::load_dataset(input.path, schema);
}

const havok::Sequence& pick_sequence(const havok::Dataset& dataset, const std::string& id) {
    if (id.empty()) return dataset.at(0);
    const havok::Sequence* seq = dataset.find(id);
    if (!seq) {
        throw havok::DataError("no sequence with id '" + id + "' in the input");
    }
    return *seq;
}

havok::RankPolicy parse_rank_flag(const std::string& text) {
    if (text == "hard-threshold") return havok::RankPolicy::hard_threshold();
    if (text.rfind("energy:", 0) == 0) {
        return havok::RankPolicy::energy_fraction(std::stod(text.substr(7)));
    }
    try {
        return havok::RankPolicy::manual(std::stoi(text));
    } catch (const std::exception&) {
        throw havok::ConfigError("--rank must be an integer, energy:<fraction> or "
                                 "hard-threshold");
    }
}

/// tau/dim resolution shared by fit and forecast: explicit value or AMI/FNN.
havok::EmbeddingConfig resolve_embedding(const havok::Sequence& seq, const std::string& tau_flag,
                                         const std::string& dim_flag, int tau_max, int d_max,
                                         int bins, double rtol, double atol) {
    havok::EmbeddingConfig config;
    if (tau_flag == "auto") {
        config.tau = havok::select_delay(seq, tau_max, bins).tau;
    } else {
        config.tau = std::stoi(tau_flag);
    }
    if (dim_flag == "auto") {
        config.dim = std::max(havok::select_dimension(seq, config.tau, d_max, 10.0, rtol, atol)
                                  .dim,
                              2);
    } else {
        config.dim = std::stoi(dim_flag);
    }
    return config;
}

std::vector<double> default_frequency_grid(const havok::Sequence& seq, int count) {
    // log-spaced between ~4 periods per window and half Nyquist
    const double f_lo = 4.0 / (static_cast<double>(seq.size()) * seq.dt());
    const double f_hi = 0.25 / seq.dt();
    std::vector<double> freqs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        freqs[static_cast<std::size_t>(i)] = f_lo * std::pow(f_hi / f_lo, t);
    }
    return freqs;
}

int run(int argc, char** argv) {
    CLI::App app{"Intermittently forced linear models for nonlinear scalar time series:\n"
                 "clustering, delay embedding, HAVOK regression, forecasting and forcing\n"
                 "statistics."};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* cmd_generate = app.add_subcommand("generate", "write synthetic test signals as CSV");
    havok::GeneratorSpec spec;
    std::string gen_kind = "sine";
    std::string gen_out = "data.csv";
    int gen_count = 1;
    double gen_freq_step = 0.0;
    bool gen_append = false;
    cmd_generate->add_option("--kind", gen_kind, "lorenz | sine | chirp | noisy-sine");
    cmd_generate->add_option("--n", spec.n_samples, "samples per sequence")->check(CLI::PositiveNumber);
    cmd_generate->add_option("--dt", spec.dt, "sample interval");
    cmd_generate->add_option("--count", gen_count, "number of sequences (seed advances per sequence)");
    cmd_generate->add_option("--amplitude", spec.amplitude, "oscillation amplitude");
    cmd_generate->add_option("--frequency", spec.frequency, "frequency in Hz");
    cmd_generate->add_option("--frequency-end", spec.frequency_end, "chirp end frequency in Hz");
    cmd_generate->add_option("--freq-step", gen_freq_step,
                             "frequency increment between consecutive sequences");
    cmd_generate->add_option("--phase", spec.phase, "phase offset in radians");
    cmd_generate->add_option("--noise-sigma", spec.noise_sigma, "noisy-sine noise level");
    cmd_generate->add_option("--sigma", spec.sigma, "lorenz sigma");
    cmd_generate->add_option("--rho", spec.rho, "lorenz rho");
    cmd_generate->add_option("--beta", spec.beta, "lorenz beta");
    cmd_generate->add_option("--transient", spec.transient, "lorenz transient (time units)");
    cmd_generate->add_option("--seed", spec.seed, "noise seed");
    cmd_generate->add_option("--out", gen_out, "output CSV path");
    cmd_generate->add_flag("--append", gen_append,
                           "append columns to an existing CSV (lengths and dt must match)");

    // ---- cluster ------------------------------------------------------------
    auto* cmd_cluster = app.add_subcommand("cluster", "compressed-features clustering");
    InputOptions cluster_input;
    add_input_options(cmd_cluster, cluster_input, false);
    std::string cluster_k = "auto";
    havok::CfcOptions cfc_options;
    std::string cluster_out = "out";
    cmd_cluster->add_option("--k", cluster_k, "cluster count or 'auto'");
    cmd_cluster->add_option("--k-min", cfc_options.k_min, "scan lower bound");
    cmd_cluster->add_option("--k-max", cfc_options.k_max, "scan upper bound");
    cmd_cluster->add_option("--energy", cfc_options.energy_target,
                            "POD cumulative variance target");
    cmd_cluster->add_option("--max-iter", cfc_options.max_iter, "Lloyd iteration cap");
    cmd_cluster->add_option("--seed", cfc_options.seed, "clustering seed");
    cmd_cluster->add_option("--out", cluster_out, "output directory");

    // ---- embed ---------------------------------------------------------------
    auto* cmd_embed = app.add_subcommand("embed", "delay/dimension selection and curves");
    InputOptions embed_input;
    add_input_options(cmd_embed, embed_input);
    std::string embed_tau = "auto", embed_dim = "auto";
    int embed_tau_max = 20, embed_d_max = 50, embed_bins = 16;
    double embed_rtol = 10.0, embed_atol = 2.0;
    std::string embed_out = "out";
    cmd_embed->add_option("--tau", embed_tau, "delay step or 'auto' (AMI first minimum)");
    cmd_embed->add_option("--dim", embed_dim, "embedding dimension or 'auto' (FNN drop)");
    cmd_embed->add_option("--tau-max", embed_tau_max, "AMI sweep bound");
    cmd_embed->add_option("--d-max", embed_d_max, "FNN sweep bound");
    cmd_embed->add_option("--bins", embed_bins, "AMI histogram bins");
    cmd_embed->add_option("--rtol", embed_rtol, "FNN distance-ratio tolerance");
    cmd_embed->add_option("--atol", embed_atol, "FNN attractor-size tolerance");
    cmd_embed->add_option("--out", embed_out, "output directory");

    // ---- fit -------------------------------------------------------------------
    auto* cmd_fit = app.add_subcommand("fit", "fit the forced linear model");
    InputOptions fit_input;
    add_input_options(cmd_fit, fit_input);
    std::string fit_tau = "auto", fit_dim = "auto", fit_rank = "15";
    double fit_lambda = 1e-2, fit_eps = 1e-6;
    std::string fit_out = "model.json";
    cmd_fit->add_option("--tau", fit_tau, "delay step or 'auto'");
    cmd_fit->add_option("--dim", fit_dim, "embedding dimension or 'auto'");
    cmd_fit->add_option("--rank", fit_rank, "truncation: integer, energy:<fraction> or hard-threshold");
    cmd_fit->add_option("--lambda", fit_lambda, "ridge regularization");
    cmd_fit->add_option("--eps", fit_eps, "sequential threshold");
    cmd_fit->add_option("--out", fit_out, "model JSON path");

    // ---- forecast ----------------------------------------------------------------
    auto* cmd_forecast = app.add_subcommand("forecast", "simulate the fitted model on held-out data");
    InputOptions forecast_input;
    add_input_options(cmd_forecast, forecast_input);
    std::string forecast_model = "model.json";
    std::size_t forecast_split = 0;
    int forecast_horizon = 0;
    std::string forecast_forcing = "measured";
    double forecast_threshold = 0.045;
    std::vector<std::size_t> forecast_instants = {100, 1000, 2000};
    int forecast_freq_count = 32;
    std::string forecast_out = "out";
    cmd_forecast->add_option("--model", forecast_model, "model JSON from `fit`");
    cmd_forecast->add_option("--split", forecast_split, "train/test split index (default 3/4)");
    cmd_forecast->add_option("--horizon", forecast_horizon, "steps to simulate (default: all available)");
    cmd_forecast->add_option("--forcing", forecast_forcing, "measured | zero | held");
    cmd_forecast->add_option("--forcing-threshold", forecast_threshold, "burst detection threshold");
    cmd_forecast->add_option("--hist-instants", forecast_instants, "error histogram instants");
    cmd_forecast->add_option("--freqs", forecast_freq_count, "scalogram frequency count");
    cmd_forecast->add_option("--out", forecast_out, "output directory");

    // ---- stats ----------------------------------------------------------------------
    auto* cmd_stats = app.add_subcommand("stats", "distribution fitting and K-S tests");
    InputOptions stats_input;
    add_input_options(cmd_stats, stats_input);
    std::vector<std::string> stats_families;
    double stats_significance = 0.05;
    bool stats_no_shift = false;
    std::string stats_out = "out";
    cmd_stats->add_option("--families", stats_families, "families to fit (default: all nine)");
    cmd_stats->add_option("--significance", stats_significance, "K-S rejection level");
    cmd_stats->add_flag("--no-shift", stats_no_shift, "skip the positive shift preprocessing");
    cmd_stats->add_option("--out", stats_out, "output directory");

    // ---- pipeline ---------------------------------------------------------------------
    auto* cmd_pipeline = app.add_subcommand("pipeline", "run every stage from a config file");
    std::string pipeline_config_path;
    std::string pipeline_out;
    std::int64_t pipeline_seed = -1;
    int pipeline_threads = 0;
    cmd_pipeline->add_option("--config", pipeline_config_path, "pipeline JSON config")->required();
    cmd_pipeline->add_option("--out", pipeline_out, "override the config output directory");
    cmd_pipeline->add_option("--seed", pipeline_seed, "override the config seed");
    cmd_pipeline->add_option("--threads", pipeline_threads, "override the config thread count");

    CLI11_PARSE(app, argc, argv);

    if (cmd_generate->parsed()) {
        spec.kind = havok::signal_kind_from_string(gen_kind);
        std::vector<havok::Sequence> sequences;
        if (gen_append) {
            havok::CsvSchema schema;
            const havok::Dataset existing = havok::load_dataset(gen_out, schema);
            sequences = existing.sequences();
        }
        for (int i = 0; i < gen_count; ++i) {
            havok::GeneratorSpec one = spec;
            one.seed = spec.seed + static_cast<std::uint64_t>(i);
            one.frequency = spec.frequency + gen_freq_step * i;
            one.id = gen_kind + "_" + std::to_string(sequences.size() + 1);
            sequences.push_back(havok::generate(one));
        }
        havok::save_dataset(havok::Dataset(std::move(sequences)), gen_out);
        std::cout << "wrote " << gen_out << "\n";
        return 0;
    }

    if (cmd_cluster->parsed()) {
        const havok::Dataset dataset = load_input(cluster_input);
        if (cluster_k != "auto") cfc_options.k = std::stoi(cluster_k);
        const havok::CfcResult result = havok::cfc(dataset, cfc_options);
        fs::create_directories(cluster_out);
        havok::write_features_csv(fs::path(cluster_out) / "features.csv", result.features);
        havok::write_clusters_json(fs::path(cluster_out) / "clusters.json", result);
        std::cout << "k = " << result.clusters.k << ", inertia = " << result.clusters.inertia
                  << "\n";
        return 0;
    }

    if (cmd_embed->parsed()) {
        const havok::Dataset dataset = load_input(embed_input);
        std::vector<const havok::Sequence*> targets;
        if (embed_input.id.empty()) {
            for (const auto& s : dataset.sequences()) targets.push_back(&s);
        } else {
            targets.push_back(&pick_sequence(dataset, embed_input.id));
        }

        fs::create_directories(embed_out);
        std::vector<std::string> ids;
        std::vector<std::vector<double>> ami_curves, fnn_curves;
        std::vector<int> taus, dims;
        bool all_local_min = true, all_drops = true;
        std::optional<int> rise;
        for (const auto* seq : targets) {
            ids.push_back(seq->id());
            int tau;
            if (embed_tau == "auto") {
                const havok::DelayScan scan = havok::select_delay(*seq, embed_tau_max, embed_bins);
                tau = scan.tau;
                all_local_min = all_local_min && scan.local_minimum_found;
                ami_curves.push_back(scan.curve);
            } else {
                tau = std::stoi(embed_tau);
            }
            taus.push_back(tau);
            if (embed_dim == "auto") {
                const havok::DimensionScan scan =
                    havok::select_dimension(*seq, tau, embed_d_max, 10.0, embed_rtol, embed_atol);
                dims.push_back(scan.dim);
                all_drops = all_drops && scan.drop_found;
                if (!rise && scan.rise_index) rise = scan.rise_index;
                fnn_curves.push_back(scan.curve);
            } else {
                dims.push_back(std::stoi(embed_dim));
            }
        }
        if (!ami_curves.empty()) {
            havok::write_ami_curves_csv(fs::path(embed_out) / "ami_curve.csv", ids, ami_curves);
        }
        if (!fnn_curves.empty()) {
            havok::write_fnn_curves_csv(fs::path(embed_out) / "fnn_curve.csv", ids, fnn_curves);
        }
        std::sort(taus.begin(), taus.end());
        std::sort(dims.begin(), dims.end());
        const havok::EmbeddingConfig chosen{taus[(taus.size() - 1) / 2],
                                            std::max(dims[(dims.size() - 1) / 2], 2)};
        havok::write_embedding_json(fs::path(embed_out) / "embedding.json", chosen, all_local_min,
                                    all_drops, rise);
        std::cout << "tau = " << chosen.tau << ", dim = " << chosen.dim << "\n";
        return 0;
    }

    if (cmd_fit->parsed()) {
        const havok::Dataset dataset = load_input(fit_input);
        const havok::Sequence& seq = pick_sequence(dataset, fit_input.id);
        const havok::EmbeddingConfig embedding =
            resolve_embedding(seq, fit_tau, fit_dim, 20, 50, 16, 10.0, 2.0);
        const havok::HavokFit fit = havok::fit_havok(seq, embedding, parse_rank_flag(fit_rank),
                                                     fit_lambda, fit_eps);
        havok::write_model_json(fit_out, fit.model);
        std::cout << "rank " << fit.model.rank << " model on tau = " << embedding.tau
                  << ", dim = " << embedding.dim << " -> " << fit_out << "\n";
        return 0;
    }

    if (cmd_forecast->parsed()) {
        const havok::Dataset dataset = load_input(forecast_input);
        const havok::Sequence& seq = pick_sequence(dataset, forecast_input.id);
        const havok::HavokModel model = havok::load_model_json(forecast_model);

        const std::size_t split_at =
            forecast_split > 0 ? forecast_split : seq.size() * 3 / 4;
        const Eigen::MatrixXd coords = havok::project_coordinates(model, seq);
        const auto n_cols = static_cast<std::size_t>(coords.rows());
        if (split_at >= n_cols) {
            throw havok::DataError("forecast: no embedded columns remain after the split");
        }
        const int available = static_cast<int>(n_cols - split_at);
        const int horizon =
            forecast_horizon > 0 ? std::min(forecast_horizon, available) : available;

        const int r_lin = model.rank - 1;
        const Eigen::VectorXd v0 = coords.row(static_cast<Eigen::Index>(split_at)).head(r_lin);
        std::vector<double> forcing_series(static_cast<std::size_t>(horizon));
        for (int s = 0; s < horizon; ++s) {
            forcing_series[static_cast<std::size_t>(s)] =
                coords(static_cast<Eigen::Index>(split_at) + s, r_lin);
        }
        const havok::ForcingMode mode = havok::forcing_mode_from_string(forecast_forcing);
        const havok::ForecastResult forecast =
            havok::simulate(model, v0, forcing_series, mode, horizon);

        fs::create_directories(forecast_out);
        std::vector<double> truth(seq.values().begin() + static_cast<std::ptrdiff_t>(split_at),
                                  seq.values().begin() + static_cast<std::ptrdiff_t>(split_at) +
                                      horizon);
        havok::write_forecast_csv(fs::path(forecast_out) / "forecast.csv", forecast, seq.dt(),
                                  &truth);

        const Eigen::VectorXd v_r = coords.col(r_lin);
        const auto intervals = havok::forcing_active(
            {v_r.data(), static_cast<std::size_t>(v_r.size())}, forecast_threshold);
        havok::write_forcing_intervals_json(fs::path(forecast_out) / "forcing_intervals.json",
                                            intervals, forecast_threshold,
                                            static_cast<std::size_t>(v_r.size()));

        const havok::ErrorEvolution errors = havok::error_evolution({forecast.x_hat}, {truth});
        havok::write_errors_csv(fs::path(forecast_out) / "errors.csv", errors, seq.dt());
        std::vector<std::size_t> instants;
        std::vector<havok::Histogram> hists;
        for (std::size_t instant : forecast_instants) {
            if (instant >= static_cast<std::size_t>(horizon)) continue;
            instants.push_back(instant);
            hists.push_back(havok::histogram(
                std::vector<double>{forecast.x_hat[instant] - truth[instant]}, 1));
        }
        havok::write_error_histograms_csv(fs::path(forecast_out) / "error_histograms.csv",
                                          instants, hists);

        const auto freqs = default_frequency_grid(seq, forecast_freq_count);
        havok::write_scalogram_csv(fs::path(forecast_out) / "scalogram.csv", freqs,
                                   havok::cwt_scalogram(seq, freqs), seq.dt());
        std::cout << "forecast horizon " << horizon << " (" << forecast_forcing << " forcing), "
                  << intervals.size() << " forcing-active intervals -> " << forecast_out << "\n";
        return 0;
    }

    if (cmd_stats->parsed()) {
        const havok::Dataset dataset = load_input(stats_input);
        const havok::Sequence& seq = pick_sequence(dataset, stats_input.id);
        std::vector<double> samples = seq.values();
        if (!stats_no_shift) samples = havok::shift_positive(samples);

        std::vector<havok::Family> families;
        if (stats_families.empty()) {
            families = havok::all_families();
        } else {
            for (const auto& name : stats_families) {
                families.push_back(havok::family_from_string(name));
            }
        }
        const auto outcomes = havok::best_fit(samples, families, stats_significance);
        fs::create_directories(stats_out);
        havok::write_ks_table_csv(fs::path(stats_out) / "ks_table.csv", outcomes);

        // histogram of the (shifted) samples plus the best fit's density
        const havok::Histogram hist = havok::histogram(samples, 30);
        std::ofstream hout(fs::path(stats_out) / "stats_histogram.csv");
        hout << "bin_lo,bin_hi,count,density,best_fit_pdf\n";
        const double width = (hist.hi - hist.lo) / static_cast<double>(hist.counts.size());
        const double total = static_cast<double>(samples.size());
        const auto& best = outcomes.front();
        for (std::size_t b = 0; b < hist.counts.size(); ++b) {
            const double lo = hist.lo + width * static_cast<double>(b);
            const double center = lo + 0.5 * width;
            hout << havok::format_double(lo) << "," << havok::format_double(lo + width) << ","
                 << hist.counts[b] << ","
                 << havok::format_double(static_cast<double>(hist.counts[b]) / (total * width))
                 << "," << havok::format_double(std::exp(best.fit->log_pdf(center))) << "\n";
        }

        for (const auto& outcome : outcomes) {
            std::cout << havok::family_name(outcome.family) << ": ";
            if (outcome.ks) {
                std::cout << (outcome.ks->pass ? "Pass" : "Rejected")
                          << " (p = " << outcome.ks->p_value << ")\n";
            } else {
                std::cout << "skipped (" << outcome.skip_reason << ")\n";
            }
        }
        return 0;
    }

    if (cmd_pipeline->parsed()) {
        havok::PipelineConfig config = havok::parse_pipeline_config(pipeline_config_path);
        if (!pipeline_out.empty()) config.output_dir = pipeline_out;
        if (pipeline_seed >= 0) config.seed = static_cast<std::uint64_t>(pipeline_seed);
        if (pipeline_threads > 0) config.threads = pipeline_threads;
        const havok::PipelineOutcome outcome = havok::run_pipeline(config);
        std::cout << outcome.sequences << " sequences in " << outcome.clusters
                  << " clusters -> " << outcome.manifest_path.string() << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const havok::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
