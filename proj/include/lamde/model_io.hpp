#pragma once

// Versioned JSON model files. Parameters round-trip bit-exactly: the
// serializer emits the shortest decimal that parses back to the same
// double (see docs/model_format.md).

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "lamde/ann.hpp"
#include "lamde/linreg.hpp"

namespace lamde {

inline constexpr int kModelFormatVersion = 1;

// What a fit run recorded about itself.
struct Provenance {
    std::string dataset_fingerprint;  // "fnv1a64:<16 hex>" over the canonical CSV
    std::string timestamp;            // ISO-8601 UTC; empty in timestamp-free mode
    nlohmann::json config = nlohmann::json::object();
};

// A model file's contents: either fitted family plus its provenance.
struct StoredModel {
    std::variant<LinearModel, MlpModel> model;
    Provenance provenance;

    ModelKind kind() const {
        return std::holds_alternative<LinearModel>(model) ? ModelKind::Ols : ModelKind::Ann;
    }

    Target target() const {
        return std::visit([](const auto& m) { return m.target; }, model);
    }

    const FeatureScaler& scaler() const {
        return std::visit([](const auto& m) -> const FeatureScaler& { return m.scaler; }, model);
    }

    Prediction predict(const Features& raw) const {
        if (const auto* lin = std::get_if<LinearModel>(&model)) return predict_linear(*lin, raw);
        return predict_ann(std::get<MlpModel>(model), raw);
    }
};

namespace detail {

inline nlohmann::json scaler_to_json(const FeatureScaler& s) {
    nlohmann::json mins = nlohmann::json::array();
    nlohmann::json maxs = nlohmann::json::array();
    for (int f = 0; f < kFeatureCount; ++f) {
        mins.push_back(s.min(f));
        maxs.push_back(s.max(f));
    }
    return {{"min", mins}, {"max", maxs}};
}

inline FeatureScaler scaler_from_json(const nlohmann::json& j) {
    Features mins, maxs;
    if (!j.contains("min") || !j.contains("max") || j["min"].size() != kFeatureCount ||
        j["max"].size() != kFeatureCount)
        throw DataError("model file: malformed scaler block");
    for (int f = 0; f < kFeatureCount; ++f) {
        mins[f] = j["min"][f].get<double>();
        maxs[f] = j["max"][f].get<double>();
    }
    return FeatureScaler(mins, maxs);
}

inline nlohmann::json provenance_to_json(const Provenance& p) {
    return {{"dataset_fingerprint", p.dataset_fingerprint},
            {"timestamp", p.timestamp},
            {"config", p.config}};
}

inline Provenance provenance_from_json(const nlohmann::json& j) {
    Provenance p;
    p.dataset_fingerprint = j.value("dataset_fingerprint", "");
    p.timestamp = j.value("timestamp", "");
    p.config = j.value("config", nlohmann::json::object());
    return p;
}

}  // namespace detail

inline nlohmann::json model_to_json(const StoredModel& stored) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["model_kind"] = to_string(stored.kind());
    j["target"] = to_string(stored.target());
    j["scaler"] = detail::scaler_to_json(stored.scaler());
    if (const auto* lin = std::get_if<LinearModel>(&stored.model)) {
        j["intercept"] = lin->intercept;
        j["slopes"] = {lin->slopes[0], lin->slopes[1], lin->slopes[2]};
    } else {
        const auto& mlp = std::get<MlpModel>(stored.model);
        nlohmann::json w1 = nlohmann::json::array();
        for (int h = 0; h < mlp.hidden_count; ++h) {
            nlohmann::json row = nlohmann::json::array();
            for (int f = 0; f < kFeatureCount; ++f) row.push_back(mlp.w1(h, f));
            w1.push_back(row);
        }
        nlohmann::json b1 = nlohmann::json::array();
        nlohmann::json w2 = nlohmann::json::array();
        for (int h = 0; h < mlp.hidden_count; ++h) b1.push_back(mlp.b1(h));
        for (int h = 0; h < mlp.hidden_count; ++h) w2.push_back(mlp.w2(h));
        j["hidden_count"] = mlp.hidden_count;
        j["weights"] = {{"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", mlp.b2}};
        j["target_scale"] = {{"offset", mlp.target_scale.offset}, {"gain", mlp.target_scale.gain}};
    }
    j["provenance"] = detail::provenance_to_json(stored.provenance);
    return j;
}

inline std::string save_model_text(const StoredModel& stored) {
    return model_to_json(stored).dump(2) + "\n";
}

inline void save_model(const StoredModel& stored, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << save_model_text(stored);
    if (!out.good()) throw DataError("failed writing '" + path.string() + "'");
}

inline StoredModel model_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("format_version"))
            throw DataError("model file: missing format_version");
        const auto version = j["format_version"].get<int>();
        if (version != kModelFormatVersion)
            throw DataError("unsupported model file format_version " + std::to_string(version) +
                            " (this build reads version " + std::to_string(kModelFormatVersion) + ")");

        const ModelKind kind = model_kind_from_string(j.at("model_kind").get<std::string>());
        const Target target = target_from_string(j.at("target").get<std::string>());
        FeatureScaler scaler = detail::scaler_from_json(j.at("scaler"));
        Provenance prov = detail::provenance_from_json(j.value("provenance", nlohmann::json::object()));

        if (kind == ModelKind::Ols) {
            LinearModel lin;
            lin.target = target;
            lin.scaler = scaler;
            lin.intercept = j.at("intercept").get<double>();
            const auto& slopes = j.at("slopes");
            if (slopes.size() != kFeatureCount) throw DataError("model file: slopes must have 3 entries");
            for (int f = 0; f < kFeatureCount; ++f) lin.slopes[f] = slopes[f].get<double>();
            if (!std::isfinite(lin.intercept) || !std::isfinite(lin.slopes[0]) ||
                !std::isfinite(lin.slopes[1]) || !std::isfinite(lin.slopes[2]))
                throw DataError("model file: non-finite linear parameters");
            return {lin, prov};
        }

        MlpModel mlp;
        mlp.target = target;
        mlp.scaler = scaler;
        mlp.hidden_count = j.at("hidden_count").get<int>();
        if (mlp.hidden_count < 1) throw DataError("model file: hidden_count must be >= 1");
        const auto& w = j.at("weights");
        const auto& w1 = w.at("w1");
        const auto& b1 = w.at("b1");
        const auto& w2 = w.at("w2");
        const auto h = static_cast<std::size_t>(mlp.hidden_count);
        if (w1.size() != h || b1.size() != h || w2.size() != h)
            throw DataError("model file: weight blocks do not match hidden_count");
        mlp.w1.resize(mlp.hidden_count, kFeatureCount);
        mlp.b1.resize(mlp.hidden_count);
        mlp.w2.resize(mlp.hidden_count);
        for (std::size_t i = 0; i < h; ++i) {
            if (w1[i].size() != kFeatureCount)
                throw DataError("model file: w1 rows must have 3 entries");
            for (int f = 0; f < kFeatureCount; ++f)
                mlp.w1(static_cast<int>(i), f) = w1[i][f].get<double>();
            mlp.b1(static_cast<int>(i)) = b1[i].get<double>();
            mlp.w2(static_cast<int>(i)) = w2[i].get<double>();
        }
        mlp.b2 = w.at("b2").get<double>();
        const auto& ts = j.at("target_scale");
        mlp.target_scale.offset = ts.at("offset").get<double>();
        mlp.target_scale.gain = ts.at("gain").get<double>();
        if (!pack_parameters(mlp).allFinite() || !std::isfinite(mlp.target_scale.offset) ||
            !std::isfinite(mlp.target_scale.gain))
            throw DataError("model file: non-finite network parameters");
        mlp.check_architecture();
        return {mlp, prov};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

inline StoredModel load_model_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("model file parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return model_from_json(j);
}

inline StoredModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string text(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    return load_model_text(text);
}

}  // namespace lamde
