#pragma once

// Goodness-of-fit metrics for predicted-vs-measured comparisons, plus
// physical-validity screening of predictions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lamde/dataset.hpp"
#include "lamde/geotech.hpp"

namespace lamde {

// Both R-squared readings are reported: the coefficient of determination
// (1 - SS_res/SS_tot, can go negative out of sample) and squared Pearson
// correlation (affine-invariant in the predictions). Scatter-plot "R2" in
// the literature can mean either one.
struct Metrics {
    std::optional<double> r2_cod;
    std::optional<double> r2_pearson;
    double rmse = 0.0;
    double mean_abs_line1_deviation = 0.0;
};

struct EvalPair {
    std::string id;
    double measured = 0.0;
    double predicted = 0.0;
    Validity validity = Validity::Valid;
    bool extrapolated = false;
};

struct ValidityCounts {
    int valid = 0;
    int negative = 0;
    int above_hundred = 0;
};

struct EvalReport {
    Target target = Target::La;
    ModelKind model_kind = ModelKind::Ols;
    std::vector<EvalPair> pairs;
    Metrics metrics;
    ValidityCounts counts;
};

// Core metrics. R2 fields stay unset when the relevant variance is zero
// (constant measured values, or constant predictions for Pearson).
inline Metrics evaluate(std::span<const double> measured, std::span<const double> predicted) {
    if (measured.size() != predicted.size())
        throw DataError("measured/predicted length mismatch: " + std::to_string(measured.size()) +
                        " vs " + std::to_string(predicted.size()));
    if (measured.empty()) throw DataError("cannot evaluate zero pairs");
    for (std::size_t i = 0; i < measured.size(); ++i)
        if (!std::isfinite(measured[i]) || !std::isfinite(predicted[i]))
            throw NumericError("non-finite value in evaluation input");

    const auto n = static_cast<double>(measured.size());
    double mean_m = 0.0, mean_p = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        mean_m += measured[i];
        mean_p += predicted[i];
    }
    mean_m /= n;
    mean_p /= n;

    double ss_res = 0.0, ss_tot = 0.0, ss_pred = 0.0, cross = 0.0, abs_dev = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double dm = measured[i] - mean_m;
        const double dp = predicted[i] - mean_p;
        const double e = measured[i] - predicted[i];
        ss_res += e * e;
        ss_tot += dm * dm;
        ss_pred += dp * dp;
        cross += dm * dp;
        abs_dev += std::abs(e);
    }

    Metrics out;
    out.rmse = std::sqrt(ss_res / n);
    out.mean_abs_line1_deviation = abs_dev / n;
    if (ss_tot > 0.0) out.r2_cod = 1.0 - ss_res / ss_tot;
    if (ss_tot > 0.0 && ss_pred > 0.0)
        out.r2_pearson = std::clamp((cross * cross) / (ss_tot * ss_pred), 0.0, 1.0);
    return out;
}

// Stamps each prediction with its physical-validity status.
inline ValidityCounts screen_predictions(std::vector<EvalPair>& pairs) {
    ValidityCounts counts;
    for (auto& p : pairs) {
        p.validity = check_validity(p.predicted).status;
        switch (p.validity) {
            case Validity::Valid: ++counts.valid; break;
            case Validity::NegativeInvalid: ++counts.negative; break;
            case Validity::AboveHundredInvalid: ++counts.above_hundred; break;
        }
    }
    return counts;
}

inline EvalReport make_eval_report(Target target, ModelKind kind, std::vector<EvalPair> pairs) {
    if (pairs.empty()) throw DataError("cannot build an evaluation report from zero pairs");
    EvalReport report;
    report.target = target;
    report.model_kind = kind;
    report.counts = screen_predictions(pairs);
    std::vector<double> measured, predicted;
    measured.reserve(pairs.size());
    predicted.reserve(pairs.size());
    for (const auto& p : pairs) {
        measured.push_back(p.measured);
        predicted.push_back(p.predicted);
    }
    report.metrics = evaluate(measured, predicted);
    report.pairs = std::move(pairs);
    return report;
}

}  // namespace lamde
