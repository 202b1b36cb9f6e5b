#include "havok/artifacts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "havok/errors.hpp"

namespace havok {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

/// Tiny ordered JSON emitter with %.17g floats; artifact files need exact
/// float round-trips and a deterministic key order, which is easier to
/// guarantee by writing directly than through a DOM.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    JsonWriter& begin_object() { return token("{", Open::yes); }
    JsonWriter& end_object() { return close("}"); }
    JsonWriter& begin_array() { return token("[", Open::yes); }
    JsonWriter& end_array() { return close("]"); }

    JsonWriter& key(std::string_view name) {
        separator();
        os_ << '"' << name << "\":";
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) { return raw(format_double(v)); }
    JsonWriter& value(int v) { return raw(std::to_string(v)); }
    JsonWriter& value(std::size_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
    JsonWriter& value(const std::string& v) { return raw('"' + json_escape(v) + '"'); }
    JsonWriter& value(const char* v) { return value(std::string(v)); }

private:
    enum class Open { no, yes };

    JsonWriter& token(const char* t, Open open) {
        separator();
        os_ << t;
        need_comma_.push_back(false);
        (void)open;
        return *this;
    }

    JsonWriter& close(const char* t) {
        need_comma_.pop_back();
        os_ << t;
        mark_value_written();
        return *this;
    }

    JsonWriter& raw(const std::string& text) {
        separator();
        os_ << text;
        mark_value_written();
        return *this;
    }

    void separator() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!need_comma_.empty() && need_comma_.back()) os_ << ',';
    }

    void mark_value_written() {
        if (!need_comma_.empty()) need_comma_.back() = true;
    }

    std::ostream& os_;
    std::vector<bool> need_comma_;
    bool pending_value_ = false;
};

void write_matrix(JsonWriter& w, const Eigen::MatrixXd& m) {
    w.begin_array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        w.begin_array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) w.value(m(i, j));
        w.end_array();
    }
    w.end_array();
}

void write_vector(JsonWriter& w, const Eigen::VectorXd& v) {
    w.begin_array();
    for (Eigen::Index i = 0; i < v.size(); ++i) w.value(v[i]);
    w.end_array();
}

Eigen::MatrixXd read_matrix(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return {};
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c))
                          .get<double>();
        }
    }
    return m;
}

Eigen::VectorXd read_vector(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    }
    return v;
}

} // namespace

std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    }
    return out.empty() ? "unnamed" : out;
}

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<FeatureVector>& features) {
    auto out = open_out(path);
    out << "id";
    for (auto name : feature_names()) out << "," << name;
    out << "\n";
    for (const auto& fv : features) {
        out << fv.id;
        for (double v : fv.f) out << "," << format_double(v);
        out << "\n";
    }
}

void write_clusters_json(const std::filesystem::path& path, const CfcResult& result) {
    auto out = open_out(path);
    JsonWriter w(out);
    w.begin_object();
    w.key("k").value(result.clusters.k);
    w.key("inertia").value(result.clusters.inertia);
    w.key("iterations").value(result.clusters.iterations);

    w.key("assignment").begin_object();
    for (const auto& [id, cluster] : result.clusters.assignment) {
        w.key(json_escape(id)).value(cluster);
    }
    w.end_object();

    w.key("centroids");
    write_matrix(w, result.clusters.centroids);

    w.key("compression").begin_object();
    w.key("retained").value(result.compressed.retained);
    w.key("energy").value(result.compressed.energy);
    w.key("eigenvalues");
    write_vector(w, result.compressed.eigenvalues);
    w.key("basis");
    write_matrix(w, result.compressed.basis);
    w.end_object();

    w.key("silhouette").begin_object();
    if (result.scan) {
        for (const auto& [k, score] : result.scan->scores) {
            w.key(std::to_string(k)).value(score);
        }
    }
    w.end_object();
    w.end_object();
    out << "\n";
}

void write_ami_curves_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const std::vector<std::vector<double>>& curves) {
    auto out = open_out(path);
    out << "tau";
    for (const auto& id : ids) out << "," << id;
    out << "\n";
    std::size_t longest = 0;
    for (const auto& c : curves) longest = std::max(longest, c.size());
    for (std::size_t t = 0; t < longest; ++t) {
        out << (t + 1);
        for (const auto& c : curves) {
            out << ",";
            if (t < c.size()) out << format_double(c[t]);
        }
        out << "\n";
    }
}

void write_fnn_curves_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const std::vector<std::vector<double>>& curves) {
    auto out = open_out(path);
    out << "dim";
    for (const auto& id : ids) out << "," << id;
    out << "\n";
    std::size_t longest = 0;
    for (const auto& c : curves) longest = std::max(longest, c.size());
    for (std::size_t d = 0; d < longest; ++d) {
        out << (d + 1);
        for (const auto& c : curves) {
            out << ",";
            if (d < c.size()) out << format_double(c[d]);
        }
        out << "\n";
    }
}

void write_embedding_json(const std::filesystem::path& path, EmbeddingConfig config,
                          bool tau_local_minimum, bool fnn_drop_found,
                          std::optional<int> fnn_rise_index) {
    auto out = open_out(path);
    JsonWriter w(out);
    w.begin_object();
    w.key("tau").value(config.tau);
    w.key("dim").value(config.dim);
    w.key("tau_local_minimum").value(tau_local_minimum);
    w.key("fnn_drop_found").value(fnn_drop_found);
    if (fnn_rise_index) {
        w.key("fnn_rise_index").value(*fnn_rise_index);
    }
    w.end_object();
    out << "\n";
}

void write_model_json(const std::filesystem::path& path, const HavokModel& model) {
    auto out = open_out(path);
    JsonWriter w(out);
    w.begin_object();
    w.key("rank").value(model.rank);
    w.key("dt").value(model.dt);
    w.key("tau").value(model.embedding.tau);
    w.key("dim").value(model.embedding.dim);
    w.key("ridge_lambda").value(model.ridge_lambda);
    w.key("threshold").value(model.threshold);
    w.key("linear");
    write_matrix(w, model.linear);
    w.key("forcing");
    write_vector(w, model.forcing);
    w.key("u_r");
    write_matrix(w, model.u_r);
    w.key("s_r");
    write_vector(w, model.s_r);
    w.end_object();
    out << "\n";
}

HavokModel load_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open model file '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path.string() + "': " + e.what());
    }
    try {
        HavokModel model;
        model.rank = j.at("rank").get<int>();
        model.dt = j.at("dt").get<double>();
        model.embedding.tau = j.at("tau").get<int>();
        model.embedding.dim = j.at("dim").get<int>();
        model.ridge_lambda = j.at("ridge_lambda").get<double>();
        model.threshold = j.at("threshold").get<double>();
        model.linear = read_matrix(j.at("linear"));
        model.forcing = read_vector(j.at("forcing"));
        model.u_r = read_matrix(j.at("u_r"));
        model.s_r = read_vector(j.at("s_r"));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path.string() + "' is malformed: " + e.what());
    }
}

void write_forecast_csv(const std::filesystem::path& path, const ForecastResult& forecast,
                        double dt, const std::vector<double>* truth) {
    auto out = open_out(path);
    out << "step,time,x_hat,forcing";
    if (truth) out << ",x_true";
    out << "\n";
    for (int k = 0; k < forecast.horizon; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out << k << "," << format_double(k * dt) << "," << format_double(forecast.x_hat[i]) << ","
            << format_double(forecast.forcing_used[i]);
        if (truth) {
            out << ",";
            if (i < truth->size()) out << format_double((*truth)[i]);
        }
        out << "\n";
    }
}

void write_forcing_intervals_json(const std::filesystem::path& path,
                                  const std::vector<IndexInterval>& intervals, double threshold,
                                  std::size_t series_length) {
    auto out = open_out(path);
    JsonWriter w(out);
    w.begin_object();
    w.key("threshold").value(threshold);
    w.key("series_length").value(series_length);
    w.key("intervals").begin_array();
    for (const auto& interval : intervals) {
        w.begin_object();
        w.key("first").value(interval.first);
        w.key("last").value(interval.last);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    out << "\n";
}

void write_errors_csv(const std::filesystem::path& path, const ErrorEvolution& errors, double dt) {
    auto out = open_out(path);
    out << "step,time,rmse,mae,vae\n";
    for (std::size_t t = 0; t < errors.rmse.size(); ++t) {
        out << t << "," << format_double(static_cast<double>(t) * dt) << ","
            << format_double(errors.rmse[t]) << "," << format_double(errors.mae[t]) << ","
            << format_double(errors.vae[t]) << "\n";
    }
}

void write_error_histograms_csv(const std::filesystem::path& path,
                                const std::vector<std::size_t>& instants,
                                const std::vector<Histogram>& histograms) {
    auto out = open_out(path);
    out << "instant,bin_lo,bin_hi,count\n";
    for (std::size_t h = 0; h < histograms.size(); ++h) {
        const auto& hist = histograms[h];
        const double width = (hist.hi - hist.lo) / static_cast<double>(hist.counts.size());
        for (std::size_t b = 0; b < hist.counts.size(); ++b) {
            out << instants[h] << "," << format_double(hist.lo + width * static_cast<double>(b))
                << "," << format_double(hist.lo + width * static_cast<double>(b + 1)) << ","
                << hist.counts[b] << "\n";
        }
    }
}

void write_scalogram_csv(const std::filesystem::path& path, const std::vector<double>& frequencies,
                         const Eigen::MatrixXd& magnitude, double dt) {
    auto out = open_out(path);
    out << "frequency_hz";
    for (Eigen::Index t = 0; t < magnitude.cols(); ++t) {
        out << "," << format_double(static_cast<double>(t) * dt);
    }
    out << "\n";
    for (std::size_t f = 0; f < frequencies.size(); ++f) {
        out << format_double(frequencies[f]);
        for (Eigen::Index t = 0; t < magnitude.cols(); ++t) {
            out << "," << format_double(magnitude(static_cast<Eigen::Index>(f), t));
        }
        out << "\n";
    }
}

void write_ks_table_csv(const std::filesystem::path& path,
                        const std::vector<FamilyOutcome>& outcomes) {
    auto out = open_out(path);
    out << "family,parameters,result,p_value,loglik,skip_reason\n";
    for (const auto& outcome : outcomes) {
        out << family_name(outcome.family) << ",";
        if (outcome.fit) {
            std::ostringstream params;
            bool first = true;
            for (const auto& [name, v] : outcome.fit->named_params()) {
                if (!first) params << "; ";
                first = false;
                params << name << " = " << format_double(v);
            }
            out << '"' << params.str() << '"' << ","
                << (outcome.ks->pass ? "Pass" : "Rejected") << ","
                << format_double(outcome.ks->p_value) << "," << format_double(outcome.fit->loglik)
                << ",\n";
        } else {
            out << ",,,,\"" << outcome.skip_reason << "\"\n";
        }
    }
}

} // namespace havok
