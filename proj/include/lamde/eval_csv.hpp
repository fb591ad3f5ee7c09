#pragma once

// Per-sample evaluation export. Values use shortest round-trip decimals,
// so reloading the file and recomputing metrics reproduces them exactly.

#include <sstream>
#include <string>

#include "lamde/eval.hpp"

namespace lamde {

inline constexpr std::string_view kEvalCsvHeader = "id,measured_pct,predicted_pct,validity,extrapolated";

inline std::string export_eval_csv(const EvalReport& report) {
    if (report.pairs.empty()) throw DataError("nothing to export: evaluation has no pairs");
    std::ostringstream out;
    out << kEvalCsvHeader << '\n';
    for (const auto& p : report.pairs) {
        out << p.id << ',' << detail::format_double(p.measured) << ','
            << detail::format_double(p.predicted) << ',' << to_string(p.validity) << ','
            << (p.extrapolated ? "true" : "false") << '\n';
    }
    const auto& m = report.metrics;
    out << "# target=" << to_string(report.target) << '\n';
    out << "# model_kind=" << to_string(report.model_kind) << '\n';
    out << "# n=" << report.pairs.size() << '\n';
    out << "# r2_cod=" << (m.r2_cod ? detail::format_double(*m.r2_cod) : "n/a") << '\n';
    out << "# r2_pearson=" << (m.r2_pearson ? detail::format_double(*m.r2_pearson) : "n/a") << '\n';
    out << "# rmse=" << detail::format_double(m.rmse) << '\n';
    out << "# mean_abs_line1_deviation=" << detail::format_double(m.mean_abs_line1_deviation) << '\n';
    out << "# valid=" << report.counts.valid << '\n';
    out << "# invalid_negative=" << report.counts.negative << '\n';
    out << "# invalid_above_hundred=" << report.counts.above_hundred << '\n';
    return out.str();
}

}  // namespace lamde
