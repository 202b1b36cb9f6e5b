#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "havok/embedding.hpp"
#include "havok/features.hpp"
#include "havok/forecast.hpp"
#include "havok/regression.hpp"
#include "havok/stats.hpp"

namespace havok {

/// File-name-safe version of a sequence id (non-alphanumerics become '_').
std::string sanitize_id(const std::string& id);

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<FeatureVector>& features);

void write_clusters_json(const std::filesystem::path& path, const CfcResult& result);

/// One row per tau; one column per sequence id.
void write_ami_curves_csv(const std::filesystem::path& path,
                          const std::vector<std::string>& ids,
                          const std::vector<std::vector<double>>& curves);

/// One row per dimension; columns may be ragged (the sweep stops early),
/// missing cells are left empty.
void write_fnn_curves_csv(const std::filesystem::path& path,
                          const std::vector<std::string>& ids,
                          const std::vector<std::vector<double>>& curves);

void write_embedding_json(const std::filesystem::path& path, EmbeddingConfig config,
                          bool tau_local_minimum, bool fnn_drop_found,
                          std::optional<int> fnn_rise_index);

void write_model_json(const std::filesystem::path& path, const HavokModel& model);
HavokModel load_model_json(const std::filesystem::path& path);

/// Columns: step, time, x_hat, forcing, and x_true when provided.
void write_forecast_csv(const std::filesystem::path& path, const ForecastResult& forecast,
                        double dt, const std::vector<double>* truth);

void write_forcing_intervals_json(const std::filesystem::path& path,
                                  const std::vector<IndexInterval>& intervals, double threshold,
                                  std::size_t series_length);

void write_errors_csv(const std::filesystem::path& path, const ErrorEvolution& errors, double dt);

/// Rows: one per (instant, bin).
void write_error_histograms_csv(const std::filesystem::path& path,
                                const std::vector<std::size_t>& instants,
                                const std::vector<Histogram>& histograms);

void write_scalogram_csv(const std::filesystem::path& path,
                         const std::vector<double>& frequencies, const Eigen::MatrixXd& magnitude,
                         double dt);

/// Mirrors the result-table layout: family, fitted parameters, decision,
/// p-value, plus the log-likelihood and skip reasons.
void write_ks_table_csv(const std::filesystem::path& path,
                        const std::vector<FamilyOutcome>& outcomes);

} // namespace havok
