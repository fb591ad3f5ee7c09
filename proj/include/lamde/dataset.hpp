#pragma once

// Sample data model, CSV ingestion, min-max feature scaling, and
// deterministic dataset splitting.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lamde/errors.hpp"
#include "lamde/rng.hpp"

namespace lamde {

enum class Target { La, Mde };
enum class ModelKind { Ols, Ann };

inline const char* to_string(Target t) { return t == Target::La ? "la" : "mde"; }
inline const char* to_string(ModelKind k) { return k == ModelKind::Ols ? "ols" : "ann"; }

inline Target target_from_string(std::string_view s) {
    if (s == "la") return Target::La;
    if (s == "mde") return Target::Mde;
    throw DataError("unknown target '" + std::string(s) + "' (expected la or mde)");
}

inline ModelKind model_kind_from_string(std::string_view s) {
    if (s == "ols") return ModelKind::Ols;
    if (s == "ann") return ModelKind::Ann;
    throw DataError("unknown model kind '" + std::string(s) + "' (expected ols or ann)");
}

inline constexpr int kFeatureCount = 3;

// Feature order everywhere: velocity, density, porosity.
using Features = std::array<double, kFeatureCount>;

inline const char* feature_name(int f) {
    constexpr const char* names[kFeatureCount] = {"velocity", "density", "porosity"};
    return names[f];
}

// One specimen: the three physical measurements plus optional measured
// LA/MDE coefficients (percent).
struct RockSample {
    std::string id;
    double velocity = 0.0;  // ultrasonic pulse velocity, m/s
    double density = 0.0;   // bulk density, g/cm^3
    double porosity = 0.0;  // effective porosity, percent
    std::optional<double> la;
    std::optional<double> mde;

    Features features() const { return {velocity, density, porosity}; }

    const std::optional<double>& target(Target t) const {
        return t == Target::La ? la : mde;
    }
};

struct Dataset {
    std::vector<RockSample> samples;
    std::string grain_class;  // e.g. "10/14 mm"; empty when unknown

    std::size_t size() const { return samples.size(); }

    std::vector<std::size_t> indices_with_target(Target t) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (samples[i].target(t)) out.push_back(i);
        return out;
    }
};

// A model prediction plus the out-of-training-range warning.
struct Prediction {
    double value = 0.0;  // percent, never clamped
    bool extrapolated = false;
};

namespace detail {

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline double parse_cell(std::string_view cell, int row, const char* column) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw DataError("row " + std::to_string(row) + ": non-numeric " + column +
                        " cell '" + std::string(cell) + "'");
    return v;
}

inline void check_cell_range(double v, double lo, double hi, int row, const char* column) {
    if (v < lo || v > hi)
        throw DataError("row " + std::to_string(row) + ": " + column + " " +
                        format_double(v) + " out of range [" + format_double(lo) + ", " +
                        format_double(hi) + "]");
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

// CSV contract. UTF-8, LF or CRLF, no quoting, exactly this header.
inline constexpr std::string_view kCsvHeader =
    "id,velocity_mps,density_gcm3,porosity_pct,la_pct,mde_pct";

// Parses the documented CSV format. Row numbers in errors are 1-based and
// count the header, so the first data row is row 2.
inline Dataset load_csv(std::istream& in) {
    std::string text(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});

    std::vector<std::string_view> lines;
    std::string_view rest = text;
    while (!rest.empty()) {
        std::size_t nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        if (line.ends_with('\r')) line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    // A trailing newline leaves one empty tail entry; drop it.
    if (!lines.empty() && lines.back().empty()) lines.pop_back();

    if (lines.empty() || lines.front() != kCsvHeader)
        throw DataError("malformed header: expected '" + std::string(kCsvHeader) + "'");

    Dataset data;
    std::unordered_set<std::string> seen_ids;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const int row = static_cast<int>(li) + 1;
        auto fields = detail::split_fields(lines[li]);
        if (fields.size() != 6)
            throw DataError("row " + std::to_string(row) + ": expected 6 fields, got " +
                            std::to_string(fields.size()));

        RockSample s;
        s.id = std::string(fields[0]);
        if (s.id.empty())
            throw DataError("row " + std::to_string(row) + ": empty id");
        if (!seen_ids.insert(s.id).second)
            throw DataError("row " + std::to_string(row) + ": duplicate id '" + s.id + "'");

        s.velocity = detail::parse_cell(fields[1], row, "velocity_mps");
        if (!(s.velocity > 0.0))
            throw DataError("row " + std::to_string(row) + ": velocity_mps must be positive, got " +
                            detail::format_double(s.velocity));
        s.density = detail::parse_cell(fields[2], row, "density_gcm3");
        if (!(s.density > 0.0))
            throw DataError("row " + std::to_string(row) + ": density_gcm3 must be positive, got " +
                            detail::format_double(s.density));
        s.porosity = detail::parse_cell(fields[3], row, "porosity_pct");
        detail::check_cell_range(s.porosity, 0.0, 100.0, row, "porosity_pct");

        if (!fields[4].empty()) {
            s.la = detail::parse_cell(fields[4], row, "la_pct");
            detail::check_cell_range(*s.la, 0.0, 100.0, row, "la_pct");
        }
        if (!fields[5].empty()) {
            s.mde = detail::parse_cell(fields[5], row, "mde_pct");
            detail::check_cell_range(*s.mde, 0.0, 100.0, row, "mde_pct");
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

inline Dataset load_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return load_csv(in);
}

// The canonical byte form of a dataset: contract header, LF terminators,
// shortest round-trip decimals. Fingerprints are computed over this.
inline std::string canonical_csv(const Dataset& data) {
    std::string out{kCsvHeader};
    out += '\n';
    for (const auto& s : data.samples) {
        out += s.id;
        out += ',';
        out += detail::format_double(s.velocity);
        out += ',';
        out += detail::format_double(s.density);
        out += ',';
        out += detail::format_double(s.porosity);
        out += ',';
        if (s.la) out += detail::format_double(*s.la);
        out += ',';
        if (s.mde) out += detail::format_double(*s.mde);
        out += '\n';
    }
    return out;
}

inline std::string dataset_fingerprint(const Dataset& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(canonical_csv(data))));
    return std::string("fnv1a64:") + buf;
}

// Per-feature min-max state; maps [min, max] affinely onto [-1, +1].
// Out-of-range inputs extrapolate linearly, no clipping.
class FeatureScaler {
public:
    // Unit placeholder range; real scalers come from fit_scaler or a model file.
    FeatureScaler() : min_{-1.0, -1.0, -1.0}, max_{1.0, 1.0, 1.0} {}

    FeatureScaler(const Features& mins, const Features& maxs) : min_(mins), max_(maxs) {
        for (int f = 0; f < kFeatureCount; ++f)
            if (!(max_[f] > min_[f]))
                throw DataError(std::string("feature '") + feature_name(f) +
                                "' has a degenerate range (max <= min)");
    }

    Features apply(const Features& raw) const {
        Features out;
        for (int f = 0; f < kFeatureCount; ++f)
            out[f] = -1.0 + 2.0 * (raw[f] - min_[f]) / (max_[f] - min_[f]);
        return out;
    }

    Features invert(const Features& scaled) const {
        Features out;
        for (int f = 0; f < kFeatureCount; ++f)
            out[f] = min_[f] + (scaled[f] + 1.0) * 0.5 * (max_[f] - min_[f]);
        return out;
    }

    bool in_range(const Features& raw) const {
        for (int f = 0; f < kFeatureCount; ++f)
            if (raw[f] < min_[f] || raw[f] > max_[f]) return false;
        return true;
    }

    double min(int f) const { return min_[f]; }
    double max(int f) const { return max_[f]; }

private:
    Features min_;
    Features max_;
};

// Fits min/max over the chosen samples. A feature that is constant across
// them has no affine map onto [-1, 1] and is an error.
inline FeatureScaler fit_scaler(const Dataset& data, std::span<const std::size_t> indices) {
    if (indices.empty()) throw DataError("cannot fit a scaler on an empty sample set");
    Features mins, maxs;
    mins.fill(0.0);
    maxs.fill(0.0);
    bool first = true;
    for (std::size_t i : indices) {
        Features x = data.samples.at(i).features();
        for (int f = 0; f < kFeatureCount; ++f) {
            if (first || x[f] < mins[f]) mins[f] = x[f];
            if (first || x[f] > maxs[f]) maxs[f] = x[f];
        }
        first = false;
    }
    for (int f = 0; f < kFeatureCount; ++f)
        if (mins[f] == maxs[f])
            throw DataError(std::string("feature '") + feature_name(f) +
                            "' is constant across the fitting samples");
    return FeatureScaler(mins, maxs);
}

inline FeatureScaler fit_scaler(const Dataset& data) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return fit_scaler(data, all);
}

// Disjoint index lists into one Dataset; their union covers it.
struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

struct SplitRatios {
    double train = 5.0 / 7.0;
    double validation = 1.0 / 7.0;
    double test = 1.0 / 7.0;
};

// Seeded shuffle, then contiguous partition. Validation/test counts round
// to nearest; the remainder goes to train.
inline DataSplit split(const Dataset& data, const SplitRatios& ratios, std::uint64_t seed) {
    const std::size_t n = data.size();
    if (n == 0) throw DataError("cannot split an empty dataset");
    if (ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0)
        throw DataError("split ratios must be non-negative");
    const double sum = ratios.train + ratios.validation + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("split ratios must sum to 1, got " + detail::format_double(sum));

    const auto n_val = static_cast<std::size_t>(std::lround(ratios.validation * double(n)));
    const auto n_test = static_cast<std::size_t>(std::lround(ratios.test * double(n)));
    if (n_val + n_test >= n)
        throw DataError("train split is empty for these ratios");
    const std::size_t n_train = n - n_val - n_test;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    DataSplit out;
    out.train.assign(order.begin(), order.begin() + n_train);
    out.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    out.test.assign(order.begin() + n_train + n_val, order.end());
    return out;
}

// N leave-one-out folds: fold k holds out sample k, validation stays empty.
inline std::vector<DataSplit> loocv_splits(const Dataset& data) {
    const std::size_t n = data.size();
    if (n < 2) throw DataError("leave-one-out needs at least 2 samples, got " + std::to_string(n));
    std::vector<DataSplit> folds(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i)
            if (i != k) folds[k].train.push_back(i);
        folds[k].test.push_back(k);
    }
    return folds;
}

}  // namespace lamde
