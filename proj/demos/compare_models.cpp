// Fits both model families to one dataset and compares them under
// leave-one-out cross-validation, the honest protocol for tiny sample
// counts. Usage: compare_models [dataset.csv]

#include <cstdio>
#include <vector>

#include <lamde/lamde.hpp>

using namespace lamde;

namespace {

EvalReport loocv_report(const Dataset& data, Target target, ModelKind kind) {
    std::vector<EvalPair> pooled;
    for (const DataSplit& fold : loocv_splits(data)) {
        const RockSample& held = data.samples[fold.test.front()];
        Prediction pr;
        if (kind == ModelKind::Ols) {
            pr = predict_linear(fit_ols(data, fold.train, target), held.features());
        } else {
            LmConfig c;
            c.hidden_count = 3;
            c.max_epochs = 300;
            pr = predict_ann(train_lm_restarts(data, fold, target, c, 3).model, held.features());
        }
        pooled.push_back({held.id, *held.target(target), pr.value, Validity::Valid, pr.extrapolated});
    }
    return make_eval_report(target, kind, std::move(pooled));
}

}  // namespace

int main(int argc, char** argv) {
    const char* path = argc > 1 ? argv[1] : "data/synthetic7.csv";
    try {
        Dataset full = load_csv_file(path);
        std::printf("%zu samples from %s\n\n", full.size(), path);
        std::printf("%-6s %-6s %10s %10s %10s\n", "target", "model", "r2_cod", "rmse", "invalid");

        for (Target target : {Target::La, Target::Mde}) {
            Dataset usable;
            for (std::size_t i : full.indices_with_target(target))
                usable.samples.push_back(full.samples[i]);
            for (ModelKind kind : {ModelKind::Ols, ModelKind::Ann}) {
                const EvalReport rep = loocv_report(usable, target, kind);
                const std::size_t invalid = rep.counts.negative + rep.counts.above_hundred;
                std::printf("%-6s %-6s %10.3f %10.2f %10zu\n", to_string(target), to_string(kind),
                            rep.metrics.r2_cod.value_or(0.0), rep.metrics.rmse, invalid);
            }
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
