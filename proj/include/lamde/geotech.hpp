#pragma once

#include <cmath>
#include <string>

#include "lamde/errors.hpp"

namespace lamde {

enum class TestKind { La, Mde };

inline const char* to_string(TestKind k) { return k == TestKind::La ? "la" : "mde"; }

// One fragmentation (LA) or abrasion (MDE) test outcome: the total charge
// mass M and the mass m of sub-1.6 mm fines it produced, both in grams.
struct AttritionTestRecord {
    double total_mass = 0.0;
    double fines_mass = 0.0;
    TestKind kind = TestKind::La;
};

enum class Validity { Valid, NegativeInvalid, AboveHundredInvalid };

inline const char* to_string(Validity v) {
    switch (v) {
        case Validity::Valid: return "valid";
        case Validity::NegativeInvalid: return "invalid_negative";
        default: return "invalid_above_hundred";
    }
}

struct ValidityFlag {
    double value = 0.0;  // percent
    Validity status = Validity::Valid;
};

namespace detail {

inline double fines_ratio_pct(const AttritionTestRecord& r) {
    if (!(r.total_mass > 0.0))
        throw DataError("total mass must be positive, got " + std::to_string(r.total_mass));
    if (r.fines_mass < 0.0)
        throw DataError("fines mass must be non-negative, got " + std::to_string(r.fines_mass));
    if (r.fines_mass > r.total_mass)
        throw DataError("fines mass (" + std::to_string(r.fines_mass) +
                        " g) exceeds total mass (" + std::to_string(r.total_mass) + " g)");
    return 100.0 * r.fines_mass / r.total_mass;
}

}  // namespace detail

// Fragmentation coefficient, percent of fines produced: 100 * m / M.
inline double la_coefficient(const AttritionTestRecord& r) {
    if (r.kind != TestKind::La) throw DataError("la_coefficient needs a record of kind la");
    return detail::fines_ratio_pct(r);
}

// Wet-abrasion coefficient, same mass ratio as la_coefficient.
inline double mde_coefficient(const AttritionTestRecord& r) {
    if (r.kind != TestKind::Mde) throw DataError("mde_coefficient needs a record of kind mde");
    return detail::fines_ratio_pct(r);
}

// A coefficient is physically meaningful only in [0, 100]. Predictions are
// never clamped; an out-of-range value is reported as model inadequacy.
inline ValidityFlag check_validity(double value_pct) {
    if (!std::isfinite(value_pct))
        throw NumericError("coefficient is not finite");
    Validity s = value_pct < 0.0   ? Validity::NegativeInvalid
                 : value_pct > 100.0 ? Validity::AboveHundredInvalid
                                     : Validity::Valid;
    return {value_pct, s};
}

}  // namespace lamde
