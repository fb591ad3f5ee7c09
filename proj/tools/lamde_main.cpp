// Command-line front end: coefficient arithmetic, model fitting, evaluation,
// prediction, leave-one-out cross-validation, and scatter-plot export.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Summary output goes to stdout as space-separated key=value tokens;
// diagnostics and warnings go to stderr.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lamde/lamde.hpp>

namespace {

using namespace lamde;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string metric_or_na(const std::optional<double>& m) {
    return m ? fmt("%.3f", *m) : std::string("n/a");
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// "5:1:1" or "5,1,1" -> normalized train/validation/test fractions.
SplitRatios parse_ratios(const std::string& text) {
    std::vector<double> parts;
    std::string cell;
    for (char ch : text) {
        if (ch == ':' || ch == ',') {
            parts.push_back(cell.empty() ? -1.0 : std::strtod(cell.c_str(), nullptr));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    parts.push_back(cell.empty() ? -1.0 : std::strtod(cell.c_str(), nullptr));
    if (parts.size() != 3)
        throw DataError("ratios must have three parts, e.g. 5:1:1");
    double sum = 0.0;
    for (double p : parts) {
        if (!std::isfinite(p) || p < 0.0) throw DataError("ratios must be non-negative numbers");
        sum += p;
    }
    if (!(sum > 0.0)) throw DataError("ratios must not all be zero");
    return {parts[0] / sum, parts[1] / sum, parts[2] / sum};
}

// Keep only samples carrying the requested target so split ratios and fold
// counts refer to usable samples.
Dataset subset_with_target(const Dataset& data, Target t, std::size_t& excluded) {
    Dataset out;
    out.grain_class = data.grain_class;
    for (const auto& s : data.samples)
        if (s.target(t)) out.samples.push_back(s);
    excluded = data.size() - out.size();
    if (out.samples.empty())
        throw DataError(std::string("dataset has no samples with ") + to_string(t) + " values");
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out.good()) throw DataError("failed writing '" + path + "'");
}

EvalReport report_for(const StoredModel& stored, const Dataset& data) {
    const Target t = stored.target();
    const auto idx = data.indices_with_target(t);
    if (idx.empty())
        throw DataError(std::string("dataset has no ") + to_string(t) +
                        " values; cannot evaluate this model against it");
    std::vector<EvalPair> pairs;
    pairs.reserve(idx.size());
    for (std::size_t i : idx) {
        const RockSample& s = data.samples[i];
        const Prediction pr = stored.predict(s.features());
        pairs.push_back({s.id, *s.target(t), pr.value, Validity::Valid, pr.extrapolated});
    }
    return make_eval_report(t, stored.kind(), std::move(pairs));
}

void print_metrics_line(const EvalReport& rep) {
    std::size_t extrapolated = 0;
    for (const auto& p : rep.pairs) extrapolated += p.extrapolated ? 1 : 0;
    std::cout << "n=" << rep.pairs.size() << " target=" << to_string(rep.target)
              << " model=" << to_string(rep.model_kind)
              << " r2_cod=" << metric_or_na(rep.metrics.r2_cod)
              << " r2_pearson=" << metric_or_na(rep.metrics.r2_pearson)
              << " rmse=" << fmt("%.2f", rep.metrics.rmse)
              << " mean_abs_line1_deviation=" << fmt("%.2f", rep.metrics.mean_abs_line1_deviation)
              << " valid=" << rep.counts.valid << " invalid_negative=" << rep.counts.negative
              << " invalid_above_hundred=" << rep.counts.above_hundred
              << " extrapolated=" << extrapolated << "\n";
}

struct FitOptions {
    std::string data_path;
    std::string target_str;
    std::string model_str;
    std::string out_path;
    int hidden = 5;
    std::uint64_t seed = 0;
    int restarts = 1;
    std::string ratios_str = "5:1:1";
    double mu0 = 1e-3;
    double mu_inc = 10.0;
    double mu_dec = 0.1;
    double mu_max = 1e10;
    int max_epochs = 1000;
    double goal_mse = 1e-10;
    double min_grad = 1e-10;
    int max_val_fail = 6;
    bool no_timestamp = false;
};

int run_coeff(double total, double fines, const std::string& kind_str) {
    const TestKind kind = kind_str == "la" ? TestKind::La : TestKind::Mde;
    const AttritionTestRecord rec{total, fines, kind};
    const double value = kind == TestKind::La ? la_coefficient(rec) : mde_coefficient(rec);
    std::cout << (kind == TestKind::La ? "LA=" : "MDE=") << fmt("%.2f", value) << "\n";
    return 0;
}

int run_fit(const FitOptions& o) {
    const Target target = target_from_string(o.target_str);
    const ModelKind kind = model_kind_from_string(o.model_str);
    const Dataset full = load_csv_file(o.data_path);
    const std::string fingerprint = dataset_fingerprint(full);
    std::size_t excluded = 0;
    const Dataset used = subset_with_target(full, target, excluded);
    if (excluded > 0)
        std::cerr << "note: ignoring " << excluded << " sample(s) without " << to_string(target)
                  << " values\n";

    StoredModel stored;
    nlohmann::json cfg;
    cfg["data"] = o.data_path;
    cfg["target"] = to_string(target);
    cfg["model"] = to_string(kind);
    EvalReport rep;

    if (kind == ModelKind::Ols) {
        std::vector<std::size_t> all(used.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        const LinearModel lin = fit_ols(used, all, target);
        cfg["n_used"] = used.size();
        stored.model = lin;

        std::vector<EvalPair> pairs;
        for (const auto& s : used.samples) {
            const Prediction pr = predict_linear(lin, s.features());
            pairs.push_back({s.id, *s.target(target), pr.value, Validity::Valid, pr.extrapolated});
        }
        rep = make_eval_report(target, kind, std::move(pairs));

        std::cout << "target=" << to_string(target) << " model=ols data=" << o.data_path
                  << " n_used=" << used.size() << " fingerprint=" << fingerprint << "\n";
        std::cout << "intercept=" << fmt("%.6g", lin.intercept);
        for (int f = 0; f < kFeatureCount; ++f)
            std::cout << " slope_" << feature_name(f) << "=" << fmt("%.6g", lin.slopes[f]);
        std::cout << "\n";
    } else {
        LmConfig c;
        c.hidden_count = o.hidden;
        c.mu0 = o.mu0;
        c.mu_inc = o.mu_inc;
        c.mu_dec = o.mu_dec;
        c.mu_max = o.mu_max;
        c.max_epochs = o.max_epochs;
        c.goal_mse = o.goal_mse;
        c.min_grad = o.min_grad;
        c.max_val_fail = o.max_val_fail;
        c.seed = o.seed;
        c.validate();
        const SplitRatios ratios = parse_ratios(o.ratios_str);
        const DataSplit sp = split(used, ratios, o.seed);
        const TrainResult res = train_lm_restarts(used, sp, target, c, o.restarts);
        stored.model = res.model;

        cfg["hidden"] = o.hidden;
        cfg["seed"] = o.seed;
        cfg["restarts"] = o.restarts;
        cfg["ratios"] = o.ratios_str;
        cfg["mu0"] = o.mu0;
        cfg["mu_inc"] = o.mu_inc;
        cfg["mu_dec"] = o.mu_dec;
        cfg["mu_max"] = o.mu_max;
        cfg["max_epochs"] = o.max_epochs;
        cfg["goal_mse"] = o.goal_mse;
        cfg["min_grad"] = o.min_grad;
        cfg["max_val_fail"] = o.max_val_fail;
        cfg["winning_seed"] = res.report.config.seed;
        cfg["n_train"] = sp.train.size();
        cfg["n_validation"] = sp.validation.size();
        cfg["n_test"] = sp.test.size();

        std::vector<EvalPair> pairs;
        for (std::size_t i : sp.train) {
            const RockSample& s = used.samples[i];
            const Prediction pr = predict_ann(res.model, s.features());
            pairs.push_back({s.id, *s.target(target), pr.value, Validity::Valid, pr.extrapolated});
        }
        rep = make_eval_report(target, kind, std::move(pairs));

        std::cout << "target=" << to_string(target) << " model=ann data=" << o.data_path
                  << " n_train=" << sp.train.size() << " n_validation=" << sp.validation.size()
                  << " n_test=" << sp.test.size() << " fingerprint=" << fingerprint << "\n";
        std::cout << "hidden=" << o.hidden << " seed=" << o.seed << " restarts=" << o.restarts
                  << " ratios=" << o.ratios_str << " mu0=" << fmt("%.6g", o.mu0)
                  << " mu_inc=" << fmt("%.6g", o.mu_inc) << " mu_dec=" << fmt("%.6g", o.mu_dec)
                  << " mu_max=" << fmt("%.6g", o.mu_max) << " max_epochs=" << o.max_epochs
                  << " goal_mse=" << fmt("%.6g", o.goal_mse) << " min_grad=" << fmt("%.6g", o.min_grad)
                  << " max_val_fail=" << o.max_val_fail << "\n";
        std::cout << "epochs=" << res.report.epochs_run
                  << " stop_reason=" << to_string(res.report.stop_reason)
                  << " winning_seed=" << res.report.config.seed
                  << " final_mu=" << fmt("%.6g", res.report.final_mu)
                  << " final_train_mse=" << fmt("%.6g", res.report.final_train_mse)
                  << " small_sample_warning=" << bool_str(res.report.small_sample_warning) << "\n";
        if (res.report.small_sample_warning)
            std::cerr << "warning: fewer training samples than network parameters; expect overfitting\n";
    }

    print_metrics_line(rep);

    stored.provenance.dataset_fingerprint = fingerprint;
    stored.provenance.timestamp = o.no_timestamp ? "" : iso_utc_now();
    stored.provenance.config = cfg;
    save_model(stored, o.out_path);
    std::cout << "out=" << o.out_path << "\n";
    return 0;
}

int run_evaluate(const std::string& data_path, const std::string& model_path,
                 const std::string& plot_path, const std::string& csv_path) {
    const StoredModel stored = load_model(model_path);
    const Dataset data = load_csv_file(data_path);
    const EvalReport rep = report_for(stored, data);

    for (const auto& p : rep.pairs)
        std::cout << "id=" << p.id << " measured=" << fmt("%.4f", p.measured)
                  << " predicted=" << fmt("%.4f", p.predicted) << " validity=" << to_string(p.validity)
                  << " extrapolated=" << bool_str(p.extrapolated) << "\n";
    print_metrics_line(rep);

    if (!csv_path.empty()) {
        write_text_file(csv_path, export_eval_csv(rep));
        std::cout << "csv=" << csv_path << "\n";
    }
    if (!plot_path.empty()) {
        write_text_file(plot_path, export_scatter_svg(rep));
        std::cout << "plot=" << plot_path << "\n";
    }
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::optional<double>& velocity, const std::optional<double>& density,
                const std::optional<double>& porosity) {
    const StoredModel stored = load_model(model_path);
    if (!data_path.empty()) {
        const Dataset data = load_csv_file(data_path);
        for (const auto& s : data.samples) {
            const Prediction pr = stored.predict(s.features());
            const ValidityFlag v = check_validity(pr.value);
            std::cout << "id=" << s.id << " predicted=" << fmt("%.4f", pr.value)
                      << " validity=" << to_string(v.status)
                      << " extrapolated=" << bool_str(pr.extrapolated) << "\n";
        }
        return 0;
    }
    const Features x{*velocity, *density, *porosity};
    const Prediction pr = stored.predict(x);
    const ValidityFlag v = check_validity(pr.value);
    std::cout << "predicted=" << fmt("%.4f", pr.value) << " validity=" << to_string(v.status)
              << " extrapolated=" << bool_str(pr.extrapolated) << "\n";
    return 0;
}

int run_loocv(const FitOptions& o) {
    const Target target = target_from_string(o.target_str);
    const ModelKind kind = model_kind_from_string(o.model_str);
    const Dataset full = load_csv_file(o.data_path);
    std::size_t excluded = 0;
    const Dataset used = subset_with_target(full, target, excluded);
    if (excluded > 0)
        std::cerr << "note: ignoring " << excluded << " sample(s) without " << to_string(target)
                  << " values\n";

    LmConfig c;
    if (kind == ModelKind::Ann) {
        c.hidden_count = o.hidden;
        c.mu0 = o.mu0;
        c.mu_inc = o.mu_inc;
        c.mu_dec = o.mu_dec;
        c.mu_max = o.mu_max;
        c.max_epochs = o.max_epochs;
        c.goal_mse = o.goal_mse;
        c.min_grad = o.min_grad;
        c.max_val_fail = o.max_val_fail;
        c.seed = o.seed;
        c.validate();
    }

    const std::vector<DataSplit> folds = loocv_splits(used);
    std::vector<EvalPair> pooled;
    std::size_t failed = 0;
    for (std::size_t k = 0; k < folds.size(); ++k) {
        const RockSample& held = used.samples[folds[k].test.front()];
        try {
            Prediction pr;
            if (kind == ModelKind::Ols) {
                const LinearModel m = fit_ols(used, folds[k].train, target);
                pr = predict_linear(m, held.features());
            } else {
                const TrainResult r = train_lm_restarts(used, folds[k], target, c, o.restarts);
                pr = predict_ann(r.model, held.features());
            }
            const ValidityFlag v = check_validity(pr.value);
            std::cout << "fold=" << k + 1 << " id=" << held.id
                      << " measured=" << fmt("%.4f", *held.target(target))
                      << " predicted=" << fmt("%.4f", pr.value) << " validity=" << to_string(v.status)
                      << " extrapolated=" << bool_str(pr.extrapolated) << "\n";
            pooled.push_back({held.id, *held.target(target), pr.value, v.status, pr.extrapolated});
        } catch (const NumericError& e) {
            ++failed;
            std::cout << "fold=" << k + 1 << " id=" << held.id << " failed=numerical\n";
            std::cerr << "warning: fold " << k + 1 << " failed: " << e.what() << "\n";
        }
    }
    if (pooled.empty()) throw NumericError("every fold failed; no pooled metrics");
    if (failed > 0)
        std::cerr << "warning: pooled metrics cover " << pooled.size() << " of " << folds.size()
                  << " folds\n";

    const EvalReport rep = make_eval_report(target, kind, std::move(pooled));
    std::size_t extrapolated = 0;
    for (const auto& p : rep.pairs) extrapolated += p.extrapolated ? 1 : 0;
    std::cout << "folds=" << folds.size() << " completed=" << rep.pairs.size() << " failed=" << failed
              << " target=" << to_string(target) << " model=" << to_string(kind)
              << " r2_cod=" << metric_or_na(rep.metrics.r2_cod)
              << " r2_pearson=" << metric_or_na(rep.metrics.r2_pearson)
              << " rmse=" << fmt("%.2f", rep.metrics.rmse)
              << " mean_abs_line1_deviation=" << fmt("%.2f", rep.metrics.mean_abs_line1_deviation)
              << " valid=" << rep.counts.valid << " invalid_negative=" << rep.counts.negative
              << " invalid_above_hundred=" << rep.counts.above_hundred
              << " extrapolated=" << extrapolated << "\n";
    return 0;
}

int run_plot(const std::string& data_path, const std::string& model_path, const std::string& out_path) {
    const StoredModel stored = load_model(model_path);
    const Dataset data = load_csv_file(data_path);
    const EvalReport rep = report_for(stored, data);
    write_text_file(out_path, export_scatter_svg(rep));
    std::cout << "n=" << rep.pairs.size() << " out=" << out_path << "\n";
    return 0;
}

void add_ann_flags(CLI::App* cmd, FitOptions& o) {
    const auto ratios_ok = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                parse_ratios(s);
                return {};
            } catch (const std::exception& e) {
                return e.what();
            }
        },
        "RATIOS");
    cmd->add_option("--hidden", o.hidden, "hidden neuron count")
        ->default_val(5)
        ->check(CLI::Range(1, 1000));
    cmd->add_option("--seed", o.seed, "base seed for the split and weight init")->default_val(0);
    cmd->add_option("--restarts", o.restarts, "independent restarts, best kept")
        ->default_val(1)
        ->check(CLI::Range(1, 10000));
    cmd->add_option("--ratios", o.ratios_str, "train:validation:test ratios")
        ->default_val("5:1:1")
        ->check(ratios_ok);
    cmd->add_option("--mu0", o.mu0, "initial damping")->default_val(1e-3);
    cmd->add_option("--mu-inc", o.mu_inc, "damping growth on rejection")->default_val(10.0);
    cmd->add_option("--mu-dec", o.mu_dec, "damping shrink on acceptance")->default_val(0.1);
    cmd->add_option("--mu-max", o.mu_max, "damping ceiling")->default_val(1e10);
    cmd->add_option("--max-epochs", o.max_epochs, "epoch limit")
        ->default_val(1000)
        ->check(CLI::Range(1, 1000000));
    cmd->add_option("--goal-mse", o.goal_mse, "target MSE in normalized units")->default_val(1e-10);
    cmd->add_option("--min-grad", o.min_grad, "gradient infinity-norm floor")->default_val(1e-10);
    cmd->add_option("--max-val-fail", o.max_val_fail, "validation failures before early stop")
        ->default_val(6)
        ->check(CLI::Range(1, 1000000));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"predict LA and MDE coefficients of carbonate aggregates from velocity, "
                 "density, and porosity"};
    app.require_subcommand(1);

    double coeff_total = 0.0, coeff_fines = 0.0;
    std::string coeff_kind;
    CLI::App* coeff = app.add_subcommand("coeff", "compute a coefficient from test masses");
    coeff->add_option("--total-mass", coeff_total, "total specimen mass, g")->required();
    coeff->add_option("--fines-mass", coeff_fines, "mass of fines produced, g")->required();
    coeff->add_option("--kind", coeff_kind, "la or mde")
        ->required()
        ->check(CLI::IsMember({"la", "mde"}));

    FitOptions fit_opts;
    CLI::App* fit = app.add_subcommand("fit", "fit a model and write it to a file");
    fit->add_option("--data", fit_opts.data_path, "training CSV")->required();
    fit->add_option("--target", fit_opts.target_str, "la or mde")
        ->required()
        ->check(CLI::IsMember({"la", "mde"}));
    fit->add_option("--model", fit_opts.model_str, "ols or ann")
        ->required()
        ->check(CLI::IsMember({"ols", "ann"}));
    fit->add_option("--out", fit_opts.out_path, "model file to write")->required();
    add_ann_flags(fit, fit_opts);
    fit->add_flag("--no-timestamp", fit_opts.no_timestamp,
                  "omit the timestamp so reruns are byte-identical");

    std::string eval_data, eval_model, eval_plot, eval_csv;
    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a model file against a CSV");
    evaluate->add_option("--data", eval_data, "evaluation CSV")->required();
    evaluate->add_option("--model", eval_model, "model file")->required();
    evaluate->add_option("--plot", eval_plot, "also write a scatter SVG here");
    evaluate->add_option("--csv", eval_csv, "also write per-sample results here");

    std::string pred_model, pred_data;
    std::optional<double> pred_v, pred_d, pred_p;
    CLI::App* predict = app.add_subcommand("predict", "predict coefficients for new samples");
    predict->add_option("--model", pred_model, "model file")->required();
    predict->add_option("--data", pred_data, "CSV of samples to predict");
    predict->add_option("--velocity", pred_v, "ultrasonic velocity, m/s");
    predict->add_option("--density", pred_d, "density, g/cm3");
    predict->add_option("--porosity", pred_p, "effective porosity, percent");

    FitOptions loocv_opts;
    CLI::App* loocv = app.add_subcommand("loocv", "leave-one-out cross-validation");
    loocv->add_option("--data", loocv_opts.data_path, "CSV")->required();
    loocv->add_option("--target", loocv_opts.target_str, "la or mde")
        ->required()
        ->check(CLI::IsMember({"la", "mde"}));
    loocv->add_option("--model", loocv_opts.model_str, "ols or ann")
        ->required()
        ->check(CLI::IsMember({"ols", "ann"}));
    add_ann_flags(loocv, loocv_opts);

    std::string plot_data, plot_model, plot_out;
    CLI::App* plot = app.add_subcommand("plot", "write a measured-vs-predicted scatter SVG");
    plot->add_option("--data", plot_data, "CSV")->required();
    plot->add_option("--model", plot_model, "model file")->required();
    plot->add_option("--out", plot_out, "SVG file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*coeff) return run_coeff(coeff_total, coeff_fines, coeff_kind);
        if (*fit) return run_fit(fit_opts);
        if (*evaluate) return run_evaluate(eval_data, eval_model, eval_plot, eval_csv);
        if (*predict) {
            const bool single = pred_v && pred_d && pred_p;
            if (pred_data.empty() && !single) {
                std::cerr << "usage error: give --data, or all of --velocity --density --porosity\n";
                return 1;
            }
            if (!pred_data.empty() && (pred_v || pred_d || pred_p)) {
                std::cerr << "usage error: --data and single-sample flags are mutually exclusive\n";
                return 1;
            }
            return run_predict(pred_model, pred_data, pred_v, pred_d, pred_p);
        }
        if (*loocv) return run_loocv(loocv_opts);
        if (*plot) return run_plot(plot_data, plot_model, plot_out);
        std::cerr << "usage error: no subcommand\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
