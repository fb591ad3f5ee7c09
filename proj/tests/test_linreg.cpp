#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <lamde/dataset.hpp>
#include <lamde/eval.hpp>
#include <lamde/linreg.hpp>
#include <lamde/rng.hpp>

using namespace lamde;

namespace {

Dataset random_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
        RockSample s;
        s.id = "R" + std::to_string(i);
        s.velocity = rng.uniform(3000, 6000);
        s.density = rng.uniform(2.2, 2.8);
        s.porosity = rng.uniform(0.5, 15.0);
        s.la = rng.uniform(10, 40);
        data.samples.push_back(std::move(s));
    }
    return data;
}

// Targets linear in the normalized features, so OLS can recover them exactly.
Dataset linear_dataset(std::size_t n, double b0, double bv, double bd, double bp,
                       std::uint64_t seed) {
    Dataset data = random_dataset(n, seed);
    const FeatureScaler scaler = fit_scaler(data);
    for (auto& s : data.samples) {
        const Features x = scaler.apply(s.features());
        s.la = b0 + bv * x[0] + bd * x[1] + bp * x[2];
    }
    return data;
}

std::vector<std::size_t> all_indices(const Dataset& d) {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

// Independent check: accumulate the 4x4 normal equations in plain loops and
// solve them by Gaussian elimination with partial pivoting. Deliberately
// avoids the production solver's code path.
std::array<double, 4> normal_equations_fit(const Dataset& data, Target target) {
    const FeatureScaler scaler = fit_scaler(data);
    double a[4][5] = {};
    for (const auto& s : data.samples) {
        const Features xs = scaler.apply(s.features());
        const double row[4] = {1.0, xs[0], xs[1], xs[2]};
        const double y = *s.target(target);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) a[i][j] += row[i] * row[j];
            a[i][4] += row[i] * y;
        }
    }
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        for (int j = 0; j < 5; ++j) std::swap(a[col][j], a[pivot][j]);
        REQUIRE(std::abs(a[col][col]) > 1e-12);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] / a[col][col];
            for (int j = 0; j < 5; ++j) a[r][j] -= factor * a[col][j];
        }
    }
    return {a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]};
}

double training_sse(const Dataset& data, const LinearModel& m, Target target) {
    double sse = 0.0;
    for (const auto& s : data.samples) {
        const double e = predict_linear(m, s.features()).value - *s.target(target);
        sse += e * e;
    }
    return sse;
}

}  // namespace

TEST_CASE("noiseless linear data is recovered exactly", "[linreg]") {
    const Dataset data = linear_dataset(10, 5.0, 2.0, 3.0, -1.0, 17);
    const LinearModel m = fit_ols(data, all_indices(data), Target::La);
    CHECK(m.intercept == Catch::Approx(5.0).margin(1e-8));
    CHECK(m.slopes[0] == Catch::Approx(2.0).margin(1e-8));
    CHECK(m.slopes[1] == Catch::Approx(3.0).margin(1e-8));
    CHECK(m.slopes[2] == Catch::Approx(-1.0).margin(1e-8));

    std::vector<double> measured, predicted;
    for (const auto& s : data.samples) {
        measured.push_back(*s.la);
        const Prediction p = predict_linear(m, s.features());
        predicted.push_back(p.value);
        CHECK(std::abs(p.value - *s.la) <= 1e-8);  // training rows reproduce their targets
        CHECK_FALSE(p.extrapolated);
    }
    const Metrics metrics = evaluate(measured, predicted);
    REQUIRE(metrics.r2_cod.has_value());
    CHECK(*metrics.r2_cod >= 1.0 - 1e-9);
}

TEST_CASE("a constant target fits as pure intercept", "[linreg]") {
    Dataset data = random_dataset(8, 23);
    for (auto& s : data.samples) s.la = 12.5;
    const LinearModel m = fit_ols(data, all_indices(data), Target::La);
    CHECK(m.intercept == Catch::Approx(12.5).margin(1e-10));
    for (double slope : m.slopes) CHECK(std::abs(slope) <= 1e-10);
}

TEST_CASE("fitted parameters match the normal-equations oracle", "[linreg]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Dataset data = random_dataset(4 + seed % 20, 100 + seed);
        const LinearModel m = fit_ols(data, all_indices(data), Target::La);
        const std::array<double, 4> beta = normal_equations_fit(data, Target::La);
        const double scale = std::max({1.0, std::abs(beta[0]), std::abs(beta[1]),
                                       std::abs(beta[2]), std::abs(beta[3])});
        CHECK(std::abs(m.intercept - beta[0]) <= 1e-8 * scale);
        for (int f = 0; f < 3; ++f) CHECK(std::abs(m.slopes[f] - beta[f + 1]) <= 1e-8 * scale);
    }
}

TEST_CASE("residual gradient vanishes at the fit", "[linreg]") {
    const Dataset data = random_dataset(15, 51);
    const LinearModel m = fit_ols(data, all_indices(data), Target::La);
    double grad[4] = {};
    double y_scale = 1.0;
    for (const auto& s : data.samples) {
        const Features xs = m.scaler.apply(s.features());
        const double row[4] = {1.0, xs[0], xs[1], xs[2]};
        const double r = *s.la - predict_linear(m, s.features()).value;
        for (int i = 0; i < 4; ++i) grad[i] += row[i] * r;
        y_scale = std::max(y_scale, std::abs(*s.la));
    }
    for (double g : grad) CHECK(std::abs(g) <= 1e-8 * y_scale);
}

TEST_CASE("prediction is the intercept when all slopes are zero", "[linreg]") {
    LinearModel m;
    m.target = Target::La;
    m.intercept = 20.0;
    m.slopes = {0.0, 0.0, 0.0};
    const Prediction inside = predict_linear(m, {0.5, -0.5, 0.0});  // default unit range
    CHECK(inside.value == 20.0);
    CHECK_FALSE(inside.extrapolated);
    const Prediction outside = predict_linear(m, {2.0, 0.0, 0.0});
    CHECK(outside.value == 20.0);
    CHECK(outside.extrapolated);
    CHECK_THROWS_AS(predict_linear(m, {std::nan(""), 0.0, 0.0}), DataError);
}

TEST_CASE("a descending trend extrapolates to a negative coefficient", "[linreg]") {
    // Five samples with MDE falling as velocity rises; a held-out specimen far
    // beyond the fitted range lands well below zero.
    Dataset data;
    for (int i = 0; i < 5; ++i) {
        RockSample s;
        s.id = "T" + std::to_string(i);
        s.velocity = 4000.0 + 250.0 * i;
        // Distinct wiggle patterns keep the design matrix full rank.
        s.density = 2.3 + 0.1 * i + 0.01 * (i % 2);
        s.porosity = 12.0 - 2.0 * i + (i == 2 ? 0.25 : 0.0);
        s.mde = 2.0 * s.porosity - 4.0;  // exact fit exists: 20 .. 4, descending
        data.samples.push_back(std::move(s));
    }
    const LinearModel m = fit_ols(data, all_indices(data), Target::Mde);
    // The unique least-squares solution is the exact relation, so the held-out
    // specimen at porosity 0.1 lands at 2*0.1 - 4 < 0.
    const Prediction p = predict_linear(m, {6500.0, 2.9, 0.1});
    CHECK(p.value < 0.0);
    CHECK(p.extrapolated);
    CHECK(check_validity(p.value).status == Validity::NegativeInvalid);
}

TEST_CASE("underdetermined and rank-deficient fits are refused", "[linreg]") {
    const Dataset three = random_dataset(3, 61);
    try {
        fit_ols(three, all_indices(three), Target::La);
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("4") != std::string::npos);
    }

    Dataset missing = random_dataset(6, 62);
    for (std::size_t i = 0; i < 3; ++i) missing.samples[i].la.reset();  // only 3 usable
    CHECK_THROWS_AS(fit_ols(missing, all_indices(missing), Target::La), DataError);

    Dataset collinear = random_dataset(8, 63);
    for (auto& s : collinear.samples) s.porosity = s.velocity / 1000.0 - 2.0;
    try {
        fit_ols(collinear, all_indices(collinear), Target::La);
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("rank") != std::string::npos);
    }
}

TEST_CASE("samples without the target are ignored by the fit", "[linreg]") {
    Dataset data = linear_dataset(9, 4.0, 1.0, -2.0, 0.5, 71);
    data.samples[2].la.reset();
    data.samples[6].la.reset();
    const LinearModel m = fit_ols(data, all_indices(data), Target::La);
    for (const auto& s : data.samples)
        if (s.la) CHECK(std::abs(predict_linear(m, s.features()).value - *s.la) <= 1e-7);
}

TEST_CASE("fit is invariant under sample reordering", "[linreg]") {
    Dataset data = random_dataset(12, 81);
    const LinearModel a = fit_ols(data, all_indices(data), Target::La);
    Dataset shuffled = data;
    Rng rng(5);
    rng.shuffle(shuffled.samples);
    const LinearModel b = fit_ols(shuffled, all_indices(shuffled), Target::La);
    CHECK(std::abs(a.intercept - b.intercept) <= 1e-8);
    for (int f = 0; f < 3; ++f) CHECK(std::abs(a.slopes[f] - b.slopes[f]) <= 1e-8);
}

TEST_CASE("shifting all targets shifts only the intercept", "[linreg]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Dataset data = random_dataset(10, 200 + seed);
        const LinearModel base = fit_ols(data, all_indices(data), Target::La);
        const double c = 7.25;
        Dataset shifted = data;
        for (auto& s : shifted.samples) s.la = *s.la + c;
        const LinearModel moved = fit_ols(shifted, all_indices(shifted), Target::La);
        CHECK(std::abs(moved.intercept - (base.intercept + c)) <= 1e-8);
        for (int f = 0; f < 3; ++f) CHECK(std::abs(moved.slopes[f] - base.slopes[f]) <= 1e-8);
    }
}

TEST_CASE("no small parameter nudge improves the training error", "[linreg]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset data = random_dataset(9, 300 + seed);
        const LinearModel m = fit_ols(data, all_indices(data), Target::La);
        const double base = training_sse(data, m, Target::La);
        for (int p = 0; p < 4; ++p) {
            for (double delta : {-1e-3, 1e-3}) {
                LinearModel probe = m;
                if (p == 0)
                    probe.intercept += delta;
                else
                    probe.slopes[p - 1] += delta;
                CHECK(training_sse(data, probe, Target::La) >= base - 1e-12);
            }
        }
    }
}
