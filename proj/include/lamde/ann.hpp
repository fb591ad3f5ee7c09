#pragma once

// Feed-forward 3-H-1 network (tanh hidden, identity output) trained with
// damped Gauss-Newton (Levenberg-Marquardt) on the normalized features and
// targets, with optional validation-based early stopping.
//
// Parameter vector layout, used by pack/unpack, the Jacobian columns, and
// weight initialization alike:
//   [ w1 row-major (H x 3) | hidden biases (H) | w2 (H) | output bias ]
// so the parameter count is P = 5H + 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lamde/dataset.hpp"

namespace lamde {

// Affine map between normalized network output and percent.
struct TargetScale {
    double offset = 0.0;  // percent at normalized 0
    double gain = 1.0;    // percent per normalized unit

    double normalize(double pct) const { return (pct - offset) / gain; }
    double denormalize(double u) const { return offset + gain * u; }

    // Centers the training targets and scales them into [-1, 1]. A
    // constant target keeps gain 1 so the map stays invertible.
    static TargetScale fit(std::span<const double> targets_pct) {
        if (targets_pct.empty()) throw DataError("cannot fit a target scale on no targets");
        auto [mn, mx] = std::minmax_element(targets_pct.begin(), targets_pct.end());
        double gain = 0.5 * (*mx - *mn);
        return {0.5 * (*mn + *mx), gain > 0.0 ? gain : 1.0};
    }
};

struct MlpModel {
    Target target = Target::La;
    int hidden_count = 0;
    Eigen::MatrixXd w1;   // hidden_count x 3
    Eigen::VectorXd b1;   // hidden_count
    Eigen::VectorXd w2;   // hidden_count (hidden -> output)
    double b2 = 0.0;      // output bias
    FeatureScaler scaler;
    TargetScale target_scale;

    int parameter_count() const { return 5 * hidden_count + 1; }

    // Topology check: one hidden layer of H units over 3 inputs, 1 output.
    void check_architecture() const {
        if (hidden_count < 1 || w1.rows() != hidden_count || w1.cols() != kFeatureCount ||
            b1.size() != hidden_count || w2.size() != hidden_count)
            throw DataError("mlp shape mismatch: expected 3-" + std::to_string(hidden_count) +
                            "-1 with matching weight dimensions");
    }
};

struct LmConfig {
    int hidden_count = 5;
    double mu0 = 1e-3;
    double mu_inc = 10.0;
    double mu_dec = 0.1;
    double mu_max = 1e10;
    int max_epochs = 1000;
    double goal_mse = 1e-10;  // normalized target space
    double min_grad = 1e-10;
    int max_val_fail = 6;
    std::uint64_t seed = 0;

    void validate() const {
        if (hidden_count < 1) throw DataError("hidden_count must be >= 1");
        if (!(mu0 > 0.0)) throw DataError("mu0 must be positive");
        if (!(mu_inc > 1.0)) throw DataError("mu_inc must be > 1");
        if (!(mu_dec > 0.0 && mu_dec < 1.0)) throw DataError("mu_dec must be in (0, 1)");
        if (!(mu_max > mu0)) throw DataError("mu_max must exceed mu0");
        if (max_epochs < 1) throw DataError("max_epochs must be >= 1");
        if (max_val_fail < 1) throw DataError("max_val_fail must be >= 1");
    }
};

enum class StopReason { GoalReached, MaxEpochs, GradientFloor, ValidationStop, MuCeiling };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::GoalReached: return "GoalReached";
        case StopReason::MaxEpochs: return "MaxEpochs";
        case StopReason::GradientFloor: return "GradientFloor";
        case StopReason::ValidationStop: return "ValidationStop";
        default: return "MuCeiling";
    }
}

struct TrainReport {
    LmConfig config;                // the hyperparameters this run actually used
    int epochs_run = 0;
    std::vector<double> train_mse;  // one entry per accepted epoch, normalized space
    std::vector<double> val_mse;    // parallel to train_mse when validation is non-empty
    StopReason stop_reason = StopReason::MaxEpochs;
    double final_mu = 0.0;
    double final_train_mse = 0.0;
    bool small_sample_warning = false;  // training count < parameter count
    int best_val_epoch = 0;             // 1-based; set when validation was used
};

inline Eigen::VectorXd pack_parameters(const MlpModel& m) {
    const int h = m.hidden_count;
    Eigen::VectorXd p(m.parameter_count());
    int k = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < kFeatureCount; ++j) p(k++) = m.w1(i, j);
    for (int i = 0; i < h; ++i) p(k++) = m.b1(i);
    for (int i = 0; i < h; ++i) p(k++) = m.w2(i);
    p(k) = m.b2;
    return p;
}

inline void unpack_parameters(MlpModel& m, const Eigen::VectorXd& p) {
    const int h = m.hidden_count;
    int k = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < kFeatureCount; ++j) m.w1(i, j) = p(k++);
    for (int i = 0; i < h; ++i) m.b1(i) = p(k++);
    for (int i = 0; i < h; ++i) m.w2(i) = p(k++);
    m.b2 = p(k);
}

// Untrained network with all parameters i.i.d. uniform on [-0.5, +0.5],
// drawn in parameter-vector order from the seeded generator. Scaler and
// target scale are placeholders until train_lm installs the fitted ones.
inline MlpModel init_weights(const LmConfig& config) {
    if (config.hidden_count < 1) throw DataError("hidden_count must be >= 1");
    const int h = config.hidden_count;
    MlpModel m;
    m.hidden_count = h;
    m.w1.resize(h, kFeatureCount);
    m.b1.resize(h);
    m.w2.resize(h);
    Rng rng(config.seed);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < kFeatureCount; ++j) m.w1(i, j) = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < h; ++i) m.b1(i) = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < h; ++i) m.w2(i) = rng.uniform(-0.5, 0.5);
    m.b2 = rng.uniform(-0.5, 0.5);
    m.check_architecture();
    return m;
}

// Network output for one normalized input triple:
//   y = b2 + sum_h w2[h] * tanh(b1[h] + w1[h] . x)
inline double forward(const MlpModel& m, const Features& x_norm) {
    for (double v : x_norm)
        if (!std::isfinite(v)) throw NumericError("non-finite network input");
    double out = m.b2;
    for (int h = 0; h < m.hidden_count; ++h) {
        double z = m.b1(h);
        for (int j = 0; j < kFeatureCount; ++j) z += m.w1(h, j) * x_norm[j];
        out += m.w2(h) * std::tanh(z);
    }
    return out;
}

inline Eigen::VectorXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& x_norm) {
    Eigen::MatrixXd z = (x_norm * m.w1.transpose()).rowwise() + m.b1.transpose();
    return (z.array().tanh().matrix() * m.w2).array() + m.b2;
}

inline double batch_sse(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& t) {
    return (forward_batch(m, x) - t).squaredNorm();
}

// N x P matrix of d(residual_i)/d(param), residual_i = prediction_i - target_i.
// Column order follows the parameter layout above.
inline Eigen::MatrixXd jacobian(const MlpModel& m, const Eigen::MatrixXd& x_norm) {
    const auto n = x_norm.rows();
    if (n == 0) throw DataError("jacobian needs a non-empty batch");
    const int h = m.hidden_count;
    Eigen::MatrixXd jac(n, m.parameter_count());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < h; ++k) {
            double z = m.b1(k);
            for (int j = 0; j < kFeatureCount; ++j) z += m.w1(k, j) * x_norm(i, j);
            const double th = std::tanh(z);
            const double dk = m.w2(k) * (1.0 - th * th);
            for (int j = 0; j < kFeatureCount; ++j)
                jac(i, k * kFeatureCount + j) = dk * x_norm(i, j);
            jac(i, kFeatureCount * h + k) = dk;
            jac(i, 4 * h + k) = th;
        }
        jac(i, 5 * h) = 1.0;
    }
    return jac;
}

struct LmStepResult {
    MlpModel model;      // accepted candidate, or the unchanged input model
    double sse = 0.0;    // SSE of the returned model on the batch
    bool accepted = false;
    double mu = 0.0;     // updated damping
    bool at_ceiling = false;  // mu exceeded mu_max before a step was attempted
};

// One damping trial: solve (J'J + mu I) delta = -J'r, accept the candidate
// if it lowers the SSE (mu shrinks by mu_dec), otherwise keep the model and
// grow mu by mu_inc. A failed solve escalates mu the same way. The caller
// retries within the epoch until acceptance or mu passes mu_max.
inline LmStepResult lm_step(const MlpModel& m, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& t, double mu, const LmConfig& config) {
    if (!(mu > 0.0)) throw DataError("lm damping must be positive");
    const double sse = batch_sse(m, x, t);
    if (!std::isfinite(sse)) throw NumericError("non-finite SSE entering LM step");
    if (mu > config.mu_max) return {m, sse, false, mu, true};

    Eigen::MatrixXd jac = jacobian(m, x);
    Eigen::VectorXd r = forward_batch(m, x) - t;
    Eigen::MatrixXd normal = jac.transpose() * jac;
    normal.diagonal().array() += mu;
    Eigen::VectorXd g = jac.transpose() * r;

    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success) return {m, sse, false, mu * config.mu_inc, false};
    Eigen::VectorXd delta = llt.solve(-g);
    if (!delta.allFinite()) return {m, sse, false, mu * config.mu_inc, false};

    MlpModel candidate = m;
    Eigen::VectorXd params = pack_parameters(m) + delta;
    unpack_parameters(candidate, params);
    const double cand_sse = batch_sse(candidate, x, t);
    if (!std::isfinite(cand_sse)) throw NumericError("non-finite SSE in LM candidate");

    if (cand_sse < sse) return {std::move(candidate), cand_sse, true, mu * config.mu_dec, false};
    return {m, sse, false, mu * config.mu_inc, false};
}

struct TrainResult {
    MlpModel model;
    TrainReport report;
};

namespace detail {

struct NormalizedBatch {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

inline NormalizedBatch normalize_batch(const Dataset& data, std::span<const std::size_t> idx,
                                       Target target, const FeatureScaler& scaler,
                                       const TargetScale& tscale) {
    NormalizedBatch b{Eigen::MatrixXd(idx.size(), kFeatureCount),
                      Eigen::VectorXd(idx.size())};
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const RockSample& s = data.samples[idx[r]];
        Features x = scaler.apply(s.features());
        for (int f = 0; f < kFeatureCount; ++f) b.x(r, f) = x[f];
        b.y(r) = tscale.normalize(*s.target(target));
    }
    return b;
}

}  // namespace detail

// Full training loop. Stops on MSE goal, gradient floor, validation
// failure streak (restoring the best-validation-epoch weights), mu
// ceiling, or the epoch cap, whichever comes first.
inline TrainResult train_lm(const Dataset& data, const DataSplit& data_split, Target target,
                            const LmConfig& config) {
    config.validate();

    std::vector<std::size_t> train_idx;
    for (std::size_t i : data_split.train)
        if (data.samples.at(i).target(target)) train_idx.push_back(i);
    if (train_idx.size() < 2)
        throw DataError(std::string("need >= 2 training samples with ") + to_string(target) +
                        " present, got " + std::to_string(train_idx.size()));
    std::vector<std::size_t> val_idx;
    for (std::size_t i : data_split.validation)
        if (data.samples.at(i).target(target)) val_idx.push_back(i);

    FeatureScaler scaler = fit_scaler(data, train_idx);
    std::vector<double> train_targets;
    for (std::size_t i : train_idx) train_targets.push_back(*data.samples[i].target(target));
    TargetScale tscale = TargetScale::fit(train_targets);

    auto train = detail::normalize_batch(data, train_idx, target, scaler, tscale);
    auto val = detail::normalize_batch(data, val_idx, target, scaler, tscale);
    const auto n = static_cast<double>(train_idx.size());

    MlpModel model = init_weights(config);
    model.target = target;
    model.scaler = scaler;
    model.target_scale = tscale;

    TrainReport report;
    report.config = config;
    report.small_sample_warning = train_idx.size() < static_cast<std::size_t>(model.parameter_count());

    double mu = config.mu0;
    double sse = batch_sse(model, train.x, train.y);
    if (!std::isfinite(sse)) throw NumericError("non-finite SSE at initialization");

    double best_val = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_params;
    int best_epoch = 0;
    int val_fails = 0;
    StopReason stop = StopReason::MaxEpochs;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (sse / n <= config.goal_mse) {
            stop = StopReason::GoalReached;
            break;
        }
        Eigen::VectorXd grad =
            jacobian(model, train.x).transpose() * (forward_batch(model, train.x) - train.y);
        if (grad.lpNorm<Eigen::Infinity>() <= config.min_grad) {
            stop = StopReason::GradientFloor;
            break;
        }

        bool ceiling = false;
        while (true) {
            LmStepResult step = lm_step(model, train.x, train.y, mu, config);
            mu = step.mu;
            if (step.at_ceiling) {
                ceiling = true;
                break;
            }
            if (step.accepted) {
                model = std::move(step.model);
                sse = step.sse;
                break;
            }
        }
        if (ceiling) {
            stop = StopReason::MuCeiling;
            break;
        }

        report.epochs_run = epoch;
        report.train_mse.push_back(sse / n);

        if (val_idx.empty()) continue;
        const double vmse = batch_sse(model, val.x, val.y) / static_cast<double>(val_idx.size());
        report.val_mse.push_back(vmse);
        if (vmse < best_val) {
            best_val = vmse;
            best_params = pack_parameters(model);
            best_epoch = epoch;
            val_fails = 0;
        } else if (++val_fails >= config.max_val_fail) {
            stop = StopReason::ValidationStop;
            unpack_parameters(model, best_params);
            sse = batch_sse(model, train.x, train.y);
            report.best_val_epoch = best_epoch;
            break;
        }
    }

    report.stop_reason = stop;
    report.final_mu = mu;
    report.final_train_mse = sse / n;
    if (!val_idx.empty() && report.best_val_epoch == 0) report.best_val_epoch = best_epoch;
    return {std::move(model), std::move(report)};
}

// Best-of-k restarts with seeds config.seed .. config.seed + k - 1, keeping
// the lowest final training MSE; ties go to the lowest seed.
inline TrainResult train_lm_restarts(const Dataset& data, const DataSplit& data_split,
                                     Target target, const LmConfig& config, int restarts) {
    if (restarts < 1) throw DataError("restarts must be >= 1");
    TrainResult best;
    double best_mse = std::numeric_limits<double>::infinity();
    for (int k = 0; k < restarts; ++k) {
        LmConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(k);
        TrainResult res = train_lm(data, data_split, target, c);
        if (res.report.final_train_mse < best_mse) {
            best_mse = res.report.final_train_mse;
            best = std::move(res);
        }
    }
    return best;
}

// Raw features in, percent out: normalize, forward, denormalize. Flags any
// feature outside the scaler's fitted range.
inline Prediction predict_ann(const MlpModel& m, const Features& raw) {
    for (double v : raw)
        if (!std::isfinite(v)) throw DataError("non-finite feature in prediction input");
    m.check_architecture();
    const double u = forward(m, m.scaler.apply(raw));
    return {m.target_scale.denormalize(u), !m.scaler.in_range(raw)};
}

}  // namespace lamde
