#include "havok/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "havok/errors.hpp"

namespace havok {

Sequence::Sequence(std::vector<double> values, double dt, ExperimentParams params)
    : values_(std::move(values)), dt_(dt), params_(std::move(params)) {
    // length >= 1 here so that split() can hand back a single-sample test
    // half; ingestion enforces >= 2 per sequence.
    if (values_.empty()) {
        throw DataError("sequence '" + params_.id + "': needs at least 1 sample");
    }
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw DataError("sequence '" + params_.id + "': dt must be positive and finite");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("sequence '" + params_.id + "': non-finite sample at index " +
                            std::to_string(i));
        }
    }
}

Dataset::Dataset(std::vector<Sequence> sequences) : sequences_(std::move(sequences)) {
    if (sequences_.empty()) {
        throw DataError("dataset: needs at least one sequence");
    }
    const double dt0 = sequences_.front().dt();
    std::set<std::string> ids;
    for (const auto& s : sequences_) {
        if (s.dt() != dt0) {
            throw DataError("dataset: sequence '" + s.id() + "' has dt " +
                            format_double(s.dt()) + " but the dataset uses " +
                            format_double(dt0));
        }
        if (!ids.insert(s.id()).second) {
            throw DataError("dataset: duplicate sequence id '" + s.id() + "'");
        }
    }
}

const Sequence* Dataset::find(const std::string& id) const noexcept {
    for (const auto& s : sequences_) {
        if (s.id() == id) return &s;
    }
    return nullptr;
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError("csv parse error at row " + std::to_string(row) + ", column " +
                        std::to_string(col) + ": cannot parse '" + cell + "' as a number");
    }
}

/// Infer dt from a time column and validate uniformity.
double infer_dt(const std::vector<double>& times, const CsvSchema& schema,
                const std::string& context) {
    if (times.size() < 2) {
        throw DataError(context + ": need at least 2 time samples to infer dt");
    }
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) {
        throw DataError(context + ": time column is not strictly increasing");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (std::abs(step - dt) > schema.dt_rel_tol * std::abs(dt)) {
            throw DataError(context + ": non-uniform time step at row " + std::to_string(i + 1) +
                            " (" + format_double(step) + " vs " + format_double(dt) + ")");
        }
    }
    if (schema.dt && std::abs(*schema.dt - dt) > schema.dt_rel_tol * std::abs(dt)) {
        throw DataError(context + ": schema dt " + format_double(*schema.dt) +
                        " conflicts with inferred dt " + format_double(dt));
    }
    return dt;
}

Dataset load_wide(const std::vector<std::vector<std::string>>& rows, const CsvSchema& schema) {
    const auto& header = rows.front();
    const bool has_time = !header.empty() && (header[0] == "t" || header[0] == "time");
    const std::size_t first_data_col = has_time ? 1 : 0;
    const std::size_t n_series = header.size() - first_data_col;
    if (n_series == 0) {
        throw DataError("csv: wide header declares no sequence columns");
    }

    std::vector<double> times;
    std::vector<std::vector<double>> columns(n_series);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != header.size()) {
            throw DataError("csv parse error at row " + std::to_string(r + 1) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        if (has_time) times.push_back(parse_cell(cells[0], r + 1, 1));
        for (std::size_t c = 0; c < n_series; ++c) {
            const double v = parse_cell(cells[first_data_col + c], r + 1, first_data_col + c + 1);
            if (!std::isfinite(v)) {
                throw DataError("csv: non-finite sample in sequence '" +
                                header[first_data_col + c] + "' at row " + std::to_string(r + 1));
            }
            columns[c].push_back(v);
        }
    }

    double dt = 0.0;
    if (has_time) {
        dt = infer_dt(times, schema, "csv");
    } else if (schema.dt) {
        dt = *schema.dt;
    } else {
        throw DataError("csv: no time column and no dt given in the schema");
    }

    std::vector<Sequence> sequences;
    sequences.reserve(n_series);
    for (std::size_t c = 0; c < n_series; ++c) {
        if (columns[c].size() < 2) {
            throw DataError("csv: sequence '" + header[first_data_col + c] +
                            "' has fewer than 2 samples");
        }
        sequences.emplace_back(std::move(columns[c]), dt,
                               ExperimentParams{header[first_data_col + c], {}});
    }
    return Dataset(std::move(sequences));
}

Dataset load_long(const std::vector<std::vector<std::string>>& rows, const CsvSchema& schema) {
    // preserve first-appearance order of ids
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> times;
    std::map<std::string, std::vector<double>> values;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != 3) {
            throw DataError("csv parse error at row " + std::to_string(r + 1) +
                            ": long layout expects 3 cells (id,t,value), found " +
                            std::to_string(cells.size()));
        }
        const std::string& id = cells[0];
        if (values.find(id) == values.end()) order.push_back(id);
        times[id].push_back(parse_cell(cells[1], r + 1, 2));
        const double v = parse_cell(cells[2], r + 1, 3);
        if (!std::isfinite(v)) {
            throw DataError("csv: non-finite sample in sequence '" + id + "' at row " +
                            std::to_string(r + 1));
        }
        values[id].push_back(v);
    }
    if (order.empty()) {
        throw DataError("csv: long file contains no data rows");
    }

    std::vector<Sequence> sequences;
    sequences.reserve(order.size());
    for (const auto& id : order) {
        if (values[id].size() < 2) {
            throw DataError("csv: sequence '" + id + "' has fewer than 2 samples");
        }
        const double dt = infer_dt(times[id], schema, "csv sequence '" + id + "'");
        sequences.emplace_back(std::move(values[id]), dt, ExperimentParams{id, {}});
    }
    return Dataset(std::move(sequences));
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "' for reading");
    }

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_line(line));
    }
    if (rows.size() < 2) {
        throw DataError("csv '" + path.string() + "': needs a header row and data rows");
    }

    CsvLayout layout = schema.layout;
    if (layout == CsvLayout::auto_detect) {
        const auto& h = rows.front();
        layout = (h.size() == 3 && h[0] == "id" && h[1] == "t" && h[2] == "value")
                     ? CsvLayout::long_format
                     : CsvLayout::wide;
    }
    return layout == CsvLayout::long_format ? load_long(rows, schema) : load_wide(rows, schema);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    const auto& seqs = dataset.sequences();
    const std::size_t n_rows =
        std::max_element(seqs.begin(), seqs.end(), [](const auto& a, const auto& b) {
            return a.size() < b.size();
        })->size();

    out << "t";
    for (const auto& s : seqs) out << "," << s.id();
    out << "\n";

    const double dt = dataset.dt();
    for (std::size_t r = 0; r < n_rows; ++r) {
        out << format_double(static_cast<double>(r) * dt);
        for (const auto& s : seqs) {
            out << ",";
            if (r < s.size()) out << format_double(s.values()[r]);
        }
        out << "\n";
    }
}

Sequence standardize(const Sequence& s) {
    const auto& x = s.values();
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    if (var == 0.0) {
        throw DataError("sequence '" + s.id() + "': zero variance, cannot standardize");
    }
    const double inv_sd = 1.0 / std::sqrt(var);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv_sd;
    return Sequence(std::move(out), s.dt(), s.params());
}

std::pair<Sequence, Sequence> split(const Sequence& s, std::size_t split_index) {
    if (split_index < 1 || split_index >= s.size()) {
        throw DataError("sequence '" + s.id() + "': split index " + std::to_string(split_index) +
                        " out of range [1, " + std::to_string(s.size() - 1) + "]");
    }
    const auto& x = s.values();
    std::vector<double> train(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(split_index));
    std::vector<double> test(x.begin() + static_cast<std::ptrdiff_t>(split_index), x.end());
    return {Sequence(std::move(train), s.dt(), s.params()),
            Sequence(std::move(test), s.dt(), s.params())};
}

} // namespace havok
