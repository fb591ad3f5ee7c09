#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lamde/dataset.hpp"

namespace lamde {

// Multiple linear regression in normalized feature space:
//   y = intercept + slopes . (v, d, p)  with features scaled to [-1, 1].
struct LinearModel {
    Target target = Target::La;
    double intercept = 0.0;
    std::array<double, kFeatureCount> slopes{};
    FeatureScaler scaler;
};

// Least-squares fit over the indexed samples that carry the target.
// Solved by column-pivoted Householder QR; a rank-deficient design is a
// hard error, never silently regularized.
inline LinearModel fit_ols(const Dataset& data, std::span<const std::size_t> indices,
                           Target target) {
    std::vector<std::size_t> usable;
    for (std::size_t i : indices)
        if (data.samples.at(i).target(target)) usable.push_back(i);

    const auto n = usable.size();
    if (n < 4)
        throw DataError(std::string("need >= 4 samples with ") + to_string(target) +
                        " present to fit ols, got " + std::to_string(n));

    FeatureScaler scaler = fit_scaler(data, usable);

    Eigen::MatrixXd design(n, kFeatureCount + 1);
    Eigen::VectorXd y(n);
    for (std::size_t r = 0; r < n; ++r) {
        const RockSample& s = data.samples[usable[r]];
        Features x = scaler.apply(s.features());
        design(r, 0) = 1.0;
        for (int f = 0; f < kFeatureCount; ++f) design(r, f + 1) = x[f];
        y(r) = *s.target(target);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < kFeatureCount + 1)
        throw DataError("rank-deficient design matrix (rank " + std::to_string(qr.rank()) +
                        " < 4); check for collinear features");

    Eigen::VectorXd beta = qr.solve(y);
    if (!beta.allFinite()) throw NumericError("ols solve produced non-finite parameters");

    LinearModel m{target, beta(0), {beta(1), beta(2), beta(3)}, scaler};
    return m;
}

inline Prediction predict_linear(const LinearModel& m, const Features& raw) {
    for (double v : raw)
        if (!std::isfinite(v)) throw DataError("non-finite feature in prediction input");
    Features x = m.scaler.apply(raw);
    double y = m.intercept;
    for (int f = 0; f < kFeatureCount; ++f) y += m.slopes[f] * x[f];
    return {y, !m.scaler.in_range(raw)};
}

}  // namespace lamde
