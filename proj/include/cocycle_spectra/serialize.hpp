#pragma once

// Deterministic text output. Doubles print with 17 significant digits
// through to_chars (locale-free, round-trip exact); non-finite values
// become empty CSV fields and JSON nulls. JSON objects keep sorted keys.
// Nothing here emits timestamps or machine identifiers: equal inputs
// give byte-identical files.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "json.hpp"

#include "axioms.hpp"
#include "cocycle.hpp"
#include "ellipticity.hpp"
#include "linalg2.hpp"
#include "thermo.hpp"

namespace cospec {

using nlohmann::json;

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

// All curve files share the header grid,value,populated_count; what the
// third column counts depends on the curve and is documented per file.

inline void write_spectrum_csv(std::ostream& os, const CountingSpectrum& s) {
    os << "grid,value,populated_count\n";
    for (const auto& b : s.bins)
        os << format_double(b.alpha) << ',' << format_double(b.value) << ',' << b.count << '\n';
}

inline void write_translated_csv(std::ostream& os, const TranslatedSpectrum& s) {
    os << "grid,value,populated_count\n";
    for (const auto& b : s.bins)
        os << format_double(b.alpha) << ',' << format_double(b.value) << ',' << b.count << '\n';
}

inline void write_pressure_csv(std::ostream& os, const PressureCurve& p) {
    os << "grid,value,populated_count\n";
    for (std::size_t i = 0; i < p.q.size(); ++i)
        os << format_double(p.q[i]) << ',' << format_double(p.value[i]) << ','
           << p.class_size << '\n';
}

// Third column: 1 when the conjugation argmin was interior, 0 when it
// hit an end of the q grid (the value there is only a bound).
inline void write_legendre_csv(std::ostream& os, const LegendreTransform& lf) {
    os << "grid,value,populated_count\n";
    for (const auto& pt : lf.points)
        os << format_double(pt.alpha) << ',' << format_double(pt.value) << ','
           << (pt.endpoint_attained ? 0 : 1) << '\n';
}

inline void write_track_csv(std::ostream& os, const TrackReport& rep) {
    os << "ell,v_plus,lambda1,bound,observed_step\n";
    for (const auto& pt : rep.points)
        os << pt.ell << ',' << format_double(pt.v_plus) << ',' << format_double(pt.lambda1)
           << ',' << format_double(pt.bound) << ',' << format_double(pt.observed_step) << '\n';
}

// JSON views. nlohmann serializes non-finite doubles as null, which is
// exactly the contract for missing values.

inline json json_of(const Arc& a) { return json{{"start", a.start}, {"length", a.length}}; }

inline json json_of(const Mat2& m) {
    return json{{"entries", {m.a, m.b, m.c, m.d}},
                {"det", m.det},
                {"sv_max", m.sv_max},
                {"sv_min", m.sv_min}};
}

inline const char* policy_name(const StatisticPolicy& p) {
    switch (p.kind) {
    case StatisticKind::MaxOverFiber: return "max_over_fiber";
    case StatisticKind::MinOverFiber: return "min_over_fiber";
    case StatisticKind::FixedPoint:
    default: return "fixed_point";
    }
}

inline json json_of(const SpectrumSummary& s) {
    return json{{"n", s.n},
                {"delta", s.delta},
                {"total_words", s.total_words},
                {"populated_bins", s.populated_bins},
                {"alpha_min", s.alpha_min},
                {"alpha_max", s.alpha_max},
                {"zero_bin_value", s.zero_bin_value},
                {"h_at_zero", s.h_at_zero},
                {"alpha_minus", s.alpha_minus},
                {"alpha_plus", s.alpha_plus},
                {"max_entropy", s.max_entropy},
                {"d_minus", s.d_minus},
                {"d_plus", s.d_plus}};
}

inline json json_of(const CecCertificate& c) {
    return json{{"found", c.found},
                {"witness", c.witness},
                {"ell", c.ell},
                {"image", json_of(c.image)},
                {"log_expansion", c.log_expansion},
                {"rate", c.rate},
                {"covers", c.covers},
                {"coverage", c.coverage},
                {"enlarged_target", json_of(c.enlarged)}};
}

inline json json_of(const AccReport& r) {
    return json{{"certified", r.certified},
                {"grid", r.grid},
                {"depth_used", r.depth_used},
                {"unreached", r.unreached},
                {"covered_fraction", r.covered_fraction},
                {"max_transition", r.max_transition}};
}

inline json json_of(const SyncReport& r) {
    json samples = json::array();
    for (const auto& s : r.samples)
        samples.push_back(json{{"index", s.index},
                               {"synchronized", s.synchronized},
                               {"diameter", s.diameter},
                               {"exponent", s.exponent},
                               {"barycenter", s.barycenter}});
    return json{{"seed", r.seed},
                {"rng", "splitmix64"},
                {"fraction_synchronized", r.fraction_synchronized},
                {"mean_exponent", r.mean_exponent},
                {"samples", samples}};
}

inline json json_of(const SemigroupWitness& w) {
    json j{{"found", w.found}};
    if (w.found) {
        j["word"] = w.word;
        j["product"] = json_of(w.product);
        if (w.rotation_number > 0.0) j["rotation_number"] = w.rotation_number;
    }
    return j;
}

} // namespace cospec
