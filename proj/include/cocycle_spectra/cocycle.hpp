#pragma once

// Matrix-cocycle views of the word dynamics: finite-time top exponents,
// tracking of the fiber-derivative maximum point along one sequence, and
// translation between fiber-exponent and norm-exponent spectra.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"
#include "products.hpp"
#include "skewproduct.hpp"
#include "symbolic.hpp"
#include "thermo.hpp"

namespace cospec {

// Product of the word, first symbol rightmost.
inline ScaledMat2 matrix_product(const Word& w, const std::vector<Mat2>& gens) {
    return balanced_product(w, gens);
}

// (1/n) log ||A_w||, the finite-time top Lyapunov exponent.
inline double lambda1_finite(const Word& w, const std::vector<Mat2>& gens) {
    if (w.empty()) throw EmptyWord("finite-time exponent needs a nonempty word");
    ScaledMat2 p = matrix_product(w, gens);
    return p.log_sv_max() / static_cast<double>(w.size());
}

struct TrackPoint {
    std::uint64_t ell = 0;   // prefix length
    double v_plus = 0.0;     // fiber-derivative maximum point, half-turns
    double lambda1 = 0.0;    // (1/ell) log ||A^ell||
    double bound = 0.0;      // allowed move since previous checkpoint
    double observed_step = 0.0;
};

struct TrackReport {
    std::vector<TrackPoint> points;
    bool bounds_respected = true;
};

// The closed-form direction is exact to rounding; observed steps below
// this floor are measurement noise, so it is added to every reported
// finite bound.
inline constexpr double kTrackResolution = 1e-12;

namespace detail {

// Cauchy bound, in half-turns, on the move of the fiber-derivative
// maximum point when the product gains one left factor: with M the
// largest generator norm and log_norm = log of the grown product's
// norm, the point moves at most
//   (2/pi) atan sqrt((1 - M^-4) / (M^-4 ||P||^4 - 1)).
// Vacuous (+inf) until the product norm has outgrown M; that also
// covers prefixes that are still isometries, where the maximum point
// is not yet defined.
inline double direction_step_bound(double log_m, double log_norm) {
    double den = std::expm1(4.0 * (log_norm - log_m));  // M^-4 ||P||^4 - 1
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    double num = -std::expm1(-4.0 * log_m);             // 1 - M^-4
    return (2.0 / kPi) * std::atan(std::sqrt(num / den));
}

} // namespace detail

// Follows the fiber-derivative maximum point v_plus of the growing
// products A_{xi_{l-1}} .. A_{xi_0} at the given checkpoints; for an
// SL(2,R) product this is the most-contracted input direction. Between
// checkpoints the point may move at most the accumulated per-step
// Cauchy bounds plus the measurement floor; the report records both the
// bound and the observed move, and only finite bounds count as
// violations. Prefix exponents at checkpoints must clear the positivity
// floor, otherwise tracking is meaningless and NonHyperbolicWord is
// thrown.
inline TrackReport track_v0(const Word& xi, const std::vector<Mat2>& gens,
                            const std::vector<std::uint64_t>& checkpoints,
                            double positivity_floor = 0.05) {
    if (checkpoints.empty()) throw InvalidArgument("tracking needs >= 1 checkpoint");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > xi.size())
            throw InvalidArgument("checkpoint outside the sequence");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw InvalidArgument("checkpoints must be strictly ascending");
    }
    if (gens.empty()) throw InvalidArgument("tracking needs >= 1 generator");
    double log_m = -std::numeric_limits<double>::infinity();
    for (const auto& g : gens) log_m = std::fmax(log_m, std::log(g.sv_max));

    TrackReport rep;
    ScaledMat2 p{identity2(), 0, 0.0};
    double bound_acc = 0.0;
    double prev_pos = 0.0;
    std::size_t next_cp = 0;
    for (std::uint64_t k = 0; k < checkpoints.back(); ++k) {
        std::uint8_t s = xi[k];
        if (s >= gens.size()) throw InvalidArgument("sequence symbol outside the generator set");
        p = renormalize({mul(gens[s], p.m), p.pow2,
                         p.logdet + std::log(std::fabs(gens[s].det))});
        if (next_cp > 0)
            bound_acc += detail::direction_step_bound(log_m, p.log_sv_max());
        if (k + 1 == checkpoints[next_cp]) {
            TrackPoint pt;
            pt.ell = k + 1;
            pt.lambda1 = p.log_sv_max() / static_cast<double>(k + 1);
            if (pt.lambda1 < positivity_floor)
                throw NonHyperbolicWord("prefix exponent below the positivity floor");
            pt.v_plus = frac(most_expanded_direction(p.m).theta + 0.5);
            if (next_cp == 0) {
                pt.bound = std::numeric_limits<double>::quiet_NaN();
                pt.observed_step = std::numeric_limits<double>::quiet_NaN();
            } else {
                pt.bound = std::isfinite(bound_acc) ? bound_acc + kTrackResolution : bound_acc;
                pt.observed_step = circle_distance({pt.v_plus}, {prev_pos});
                if (std::isfinite(pt.bound) && !(pt.observed_step <= pt.bound))
                    rep.bounds_respected = false;
            }
            rep.points.push_back(pt);
            prev_pos = pt.v_plus;
            bound_acc = 0.0;
            ++next_cp;
        }
    }
    return rep;
}

struct TranslatedSpectrum {
    int n = 0;
    double delta = 0.0;  // half the input bin width: exponents halve
    bool asymmetry_warning = false;
    double max_discrepancy = 0.0;
    std::vector<SpectrumBin> bins;  // indices 0..kmax
};

// Folds a fiber-exponent spectrum onto the norm-exponent axis: a word
// whose fiber exponent is +-alpha has top norm exponent alpha/2, so the
// +-k bins merge. Values average (counts add) where both sides are
// populated; a discrepancy above one output bin width flags asymmetry.
inline TranslatedSpectrum translate_spectrum(const CountingSpectrum& spec) {
    TranslatedSpectrum out;
    out.n = spec.n;
    out.delta = spec.delta / 2.0;
    if (spec.bins.empty()) return out;
    long long kmax = std::max(spec.bins.back().index, -spec.bins.front().index);
    out.bins.resize(static_cast<std::size_t>(kmax + 1));
    for (long long k = 0; k <= kmax; ++k) {
        SpectrumBin b;
        b.index = k;
        b.alpha = (2.0 * out.delta) * static_cast<double>(k);
        const SpectrumBin* pos = spec.find(k);
        const SpectrumBin* neg = k > 0 ? spec.find(-k) : nullptr;
        bool pp = pos && pos->populated, np = neg && neg->populated;
        if (pp && np) {
            b.count = pos->count + neg->count;
            b.value = 0.5 * (pos->value + neg->value);
            b.populated = true;
            double d = std::fabs(pos->value - neg->value);
            out.max_discrepancy = std::fmax(out.max_discrepancy, d);
        } else if (pp || np) {
            const SpectrumBin* one = pp ? pos : neg;
            b.count = one->count;
            b.value = one->value;
            b.populated = true;
        }
        out.bins[static_cast<std::size_t>(k)] = b;
    }
    out.asymmetry_warning = out.max_discrepancy > 2.0 * out.delta;
    return out;
}

// Entropy of near-equal singular exponents: the zero-bin value of the
// counting spectrum after rescaling every generator to determinant one.
// Rescaling first makes the answer invariant under doubling any input:
// det(2A) = 4 det(A) exactly, sqrt(4x) = 2 sqrt(x) exactly, so 2A and A
// normalize to the same matrix bit for bit.
inline double equal_exponents_entropy(const std::vector<Mat2>& gens, int n, double delta = 0.0,
                                      std::uint64_t budget = kDefaultBudget,
                                      int partitions = 1) {
    std::vector<FiberMap> maps;
    maps.reserve(gens.size());
    for (const auto& g : gens) maps.push_back(FiberMap::matrix(normalize_glplus(g)));
    FiberSystem sys(std::move(maps));
    if (!(delta > 0.0)) delta = default_bin_width(sys, n);
    CountingSpectrum spec =
        counting_spectrum(sys, n, delta, StatisticPolicy::max_over_fiber(), budget, partitions);
    const SpectrumBin* z = spec.find(0);
    return z ? z->value : -std::numeric_limits<double>::infinity();
}

} // namespace cospec
