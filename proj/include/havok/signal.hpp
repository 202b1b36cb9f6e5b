#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace havok {

using ParamValue = std::variant<double, std::string>;

/// Experiment metadata attached to a sequence: a unique id plus named
/// parameters (excitation frequency, solidity ratio, generator settings...).
struct ExperimentParams {
    std::string id;
    std::map<std::string, ParamValue> attrs;
};

/// One uniformly sampled scalar measurement series. Immutable after
/// construction; the constructor enforces length >= 2, finite samples
/// and dt > 0.
class Sequence {
public:
    Sequence(std::vector<double> values, double dt, ExperimentParams params = {});

    const std::vector<double>& values() const noexcept { return values_; }
    double dt() const noexcept { return dt_; }
    const ExperimentParams& params() const noexcept { return params_; }
    const std::string& id() const noexcept { return params_.id; }
    std::size_t size() const noexcept { return values_.size(); }
    double duration() const noexcept { return dt_ * static_cast<double>(values_.size() - 1); }

private:
    std::vector<double> values_;
    double dt_;
    ExperimentParams params_;
};

/// A column-stacked collection of sequences sharing one sample interval.
class Dataset {
public:
    explicit Dataset(std::vector<Sequence> sequences);

    const std::vector<Sequence>& sequences() const noexcept { return sequences_; }
    std::size_t size() const noexcept { return sequences_.size(); }
    double dt() const noexcept { return sequences_.front().dt(); }
    const Sequence& at(std::size_t i) const { return sequences_.at(i); }
    const Sequence* find(const std::string& id) const noexcept;

private:
    std::vector<Sequence> sequences_;
};

enum class CsvLayout {
    auto_detect, ///< long when the header is exactly id,t,value; wide otherwise
    wide,        ///< one column per sequence, optional leading `t` column
    long_format, ///< rows of id,t,value
};

struct CsvSchema {
    CsvLayout layout = CsvLayout::auto_detect;
    /// Sample interval; required when the file has no time column,
    /// otherwise inferred and cross-checked against the time column.
    std::optional<double> dt;
    /// Relative tolerance on time-step uniformity.
    double dt_rel_tol = 1e-9;
};

/// Parse a CSV file into a Dataset. Wide files carry a header row of
/// sequence ids (optionally preceded by a `t` column); long files carry
/// id,t,value rows grouped by id. Parse failures report row/column,
/// non-finite samples report the owning sequence id.
Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Write a Dataset in the wide CSV layout with a leading `t` column.
/// Floats are serialized with 17 significant digits so a reload
/// reproduces every sample bit-exactly.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Zero-mean, unit-variance copy (population std, divisor k). dt and
/// params are preserved. Throws DataError on zero-variance input.
Sequence standardize(const Sequence& s);

/// Split into (first split_index samples, remainder). Both halves keep
/// dt and params; concatenating them reproduces the input exactly.
std::pair<Sequence, Sequence> split(const Sequence& s, std::size_t split_index);

/// "%.17g" rendering used by every artifact writer.
std::string format_double(double value);

} // namespace havok
