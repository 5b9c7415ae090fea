#pragma once

// Finite-scale multifractal toolkit over length-n words: per-word fiber
// statistics, counting spectra on a fixed bin width, sign-restricted
// pressure curves, and discrete Legendre transforms.
//
// Determinism contract: the statistics array is indexed by lexicographic
// word rank and filled with disjoint writes, so any partition count gives
// the identical array; every reduction afterwards walks ranks in order
// (Kahan summation for pressures, integer counts for histograms). Output
// bytes therefore do not depend on the thread count. A full budget of
// 2^24 words holds a 128 MiB statistics array; callers pick the budget.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"
#include "parallel.hpp"
#include "products.hpp"
#include "skewproduct.hpp"
#include "symbolic.hpp"

namespace cospec {

inline constexpr double kSlopeTol = 0.01;

enum class StatisticKind : std::uint8_t { MaxOverFiber, MinOverFiber, FixedPoint };

// What to record per word: the extreme fiber exponent over all starting
// points, or the exponent seen from one fixed starting point.
struct StatisticPolicy {
    StatisticKind kind = StatisticKind::MaxOverFiber;
    double theta = 0.0;  // FixedPoint start

    static StatisticPolicy max_over_fiber() { return {StatisticKind::MaxOverFiber, 0.0}; }
    static StatisticPolicy min_over_fiber() { return {StatisticKind::MinOverFiber, 0.0}; }
    static StatisticPolicy fixed_point(double theta) {
        return {StatisticKind::FixedPoint, frac(theta)};
    }
};

struct WordStatistics {
    WordRange range;
    StatisticPolicy policy;
    std::vector<double> values;  // indexed by lexicographic rank
    // Max/Min were computed as +-(2/n)|log sv_max| of the word product,
    // valid when every generator has unit determinant; the two policies
    // are then exact negations of each other.
    bool unit_det_norm_path = false;
};

// Flip Max statistics into Min ones (or back) by negating every value.
// Exact only on the shared-norm path, where the two policies are
// negations of each other by construction; callers must check the flag.
inline WordStatistics negated_statistics(const WordStatistics& s) {
    if (s.policy.kind == StatisticKind::FixedPoint)
        throw InvalidArgument("negated_statistics: fixed-point statistics have no mirror");
    if (!s.unit_det_norm_path)
        throw InvalidArgument("negated_statistics: valid only for unit-determinant products");
    WordStatistics out = s;
    out.policy.kind = s.policy.kind == StatisticKind::MaxOverFiber
                          ? StatisticKind::MinOverFiber
                          : StatisticKind::MaxOverFiber;
    for (double& v : out.values) v = -v;
    return out;
}

// Default bin half-gap: delta = max(0.02, 2 log(M)/n) with M the largest
// generator singular value (1 for rotations), so one hyperbolic step out
// of n already clears the zero bin.
inline double default_bin_width(const FiberSystem& sys, int n) {
    double big_m = 1.0;
    for (const auto& f : sys.maps)
        if (f.kind != FiberKind::RigidRotation) big_m = std::fmax(big_m, f.m.sv_max);
    return std::fmax(0.02, 2.0 * std::log(big_m) / static_cast<double>(n));
}

namespace detail {

inline bool all_unit_det(const FiberSystem& sys) {
    for (const auto& f : sys.maps) {
        if (f.kind == FiberKind::RigidRotation) return false;
        if (std::fabs(f.m.det - 1.0) > 1e-9) return false;
    }
    return true;
}

} // namespace detail

// Fills values[rank] for every word of length n. Paths, fastest first:
// all maps rotations -> statistic is exactly 0; unit-determinant matrix
// systems -> singular values / image norms of the word's balanced
// product; otherwise full orbit iteration (with a golden-section scan of
// the starting circle for the Max/Min policies).
inline WordStatistics word_statistics(const FiberSystem& sys, int n, StatisticPolicy policy,
                                      std::uint64_t budget = kDefaultBudget,
                                      int partitions = 1) {
    WordRange all = enumerate_words(sys.alphabet(), n, budget);
    WordStatistics out;
    out.range = all;
    out.policy = policy;
    out.values.assign(all.end_rank, 0.0);

    if (sys.all_rotation()) return out;  // isometric fibers: exact zeros

    const double dn = static_cast<double>(n);
    const bool matrix_system = sys.all_matrix();
    const bool unit_det = matrix_system && detail::all_unit_det(sys);
    out.unit_det_norm_path = unit_det && policy.kind != StatisticKind::FixedPoint;

    std::vector<Mat2> gens;
    std::vector<double> gen_logdet;
    if (matrix_system) {
        gens = sys.matrices();
        gen_logdet.reserve(gens.size());
        for (const auto& g : gens) gen_logdet.push_back(std::log(g.det));
    }

    auto parts = partition_words(all, partitions);
    run_partitioned(partitions, [&](int p) {
        for_each_word(parts[p], [&](std::uint64_t rank, const Word& w) {
            double v;
            if (matrix_system) {
                ScaledMat2 prod = balanced_product(w, gens);
                double sld = 0.0;
                for (std::uint8_t s : w) sld += gen_logdet[s];
                switch (policy.kind) {
                case StatisticKind::MaxOverFiber:
                    if (unit_det)
                        v = (2.0 / dn) * std::fabs(std::log(prod.m.sv_max) + prod.log_scale());
                    else
                        v = (sld - 2.0 * (std::log(prod.m.sv_min) + prod.log_scale())) / dn;
                    break;
                case StatisticKind::MinOverFiber:
                    if (unit_det)
                        v = -((2.0 / dn) * std::fabs(std::log(prod.m.sv_max) + prod.log_scale()));
                    else
                        v = (sld - 2.0 * (std::log(prod.m.sv_max) + prod.log_scale())) / dn;
                    break;
                case StatisticKind::FixedPoint:
                default:
                    v = (sld - 2.0 * log_image_norm(prod, {policy.theta})) / dn;
                    break;
                }
            } else {
                switch (policy.kind) {
                case StatisticKind::MaxOverFiber:
                    v = exponent_field(sys, w, 128).max_value;
                    break;
                case StatisticKind::MinOverFiber:
                    v = exponent_field(sys, w, 128).min_value;
                    break;
                case StatisticKind::FixedPoint:
                default:
                    v = iterate(sys, w, {policy.theta}).log_derivative_sum / dn;
                    break;
                }
            }
            out.values[rank] = v;
        });
    });
    return out;
}

// Signed bin of a statistic: bin k covers (2k-1)delta .. (2k+1)delta.
inline long long bin_index(double x, double delta) {
    long long k = std::llround(std::fabs(x) / (2.0 * delta));
    return x < 0.0 ? -k : k;
}

struct SpectrumBin {
    long long index = 0;
    double alpha = 0.0;  // bin center 2*delta*index
    std::uint64_t count = 0;
    double value = -std::numeric_limits<double>::infinity();  // log(count)/n
    bool populated = false;
};

struct CountingSpectrum {
    int n = 0;
    double delta = 0.0;
    StatisticPolicy policy;
    bool symmetrized = false;
    std::uint64_t total_words = 0;
    std::vector<SpectrumBin> bins;  // contiguous index range, ascending

    const SpectrumBin* find(long long k) const {
        if (bins.empty() || k < bins.front().index || k > bins.back().index) return nullptr;
        return &bins[static_cast<std::size_t>(k - bins.front().index)];
    }
};

// Histogram of the word statistics on bins of width 2*delta. For the
// Max/Min policies on unit-determinant systems the curve is emitted
// two-sided: the inverse of a product has the same largest singular
// value, so the bin at -k carries the count of +k by that exact
// symmetry. Interior bins with no words stay flagged as unpopulated;
// nothing is interpolated over them.
inline CountingSpectrum counting_spectrum_from(const WordStatistics& stats, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("bin width must be positive");
    CountingSpectrum spec;
    spec.n = stats.range.n;
    spec.delta = delta;
    spec.policy = stats.policy;
    spec.symmetrized = stats.unit_det_norm_path;
    spec.total_words = stats.values.size();

    long long kmin = 0, kmax = 0;
    std::vector<long long> idx(stats.values.size());
    for (std::size_t i = 0; i < stats.values.size(); ++i) {
        long long k = bin_index(stats.values[i], delta);
        idx[i] = k;
        if (k < kmin) kmin = k;
        if (k > kmax) kmax = k;
    }
    if (spec.symmetrized) {
        long long wide = std::max(kmax, -kmin);
        kmin = -wide;
        kmax = wide;
    }

    spec.bins.resize(static_cast<std::size_t>(kmax - kmin + 1));
    for (long long k = kmin; k <= kmax; ++k) {
        auto& b = spec.bins[static_cast<std::size_t>(k - kmin)];
        b.index = k;
        b.alpha = (2.0 * delta) * static_cast<double>(k);
    }
    for (long long k : idx) ++spec.bins[static_cast<std::size_t>(k - kmin)].count;
    if (spec.symmetrized) {
        for (long long k = 1; k <= kmax; ++k) {
            auto& pos = spec.bins[static_cast<std::size_t>(k - kmin)];
            auto& neg = spec.bins[static_cast<std::size_t>(-k - kmin)];
            std::uint64_t c = pos.count + neg.count;  // one side is all zeros
            pos.count = c;
            neg.count = c;
        }
    }
    const double dn = static_cast<double>(spec.n);
    for (auto& b : spec.bins) {
        b.populated = b.count > 0;
        if (b.populated) b.value = std::log(static_cast<double>(b.count)) / dn;
    }
    return spec;
}

inline CountingSpectrum counting_spectrum(const FiberSystem& sys, int n, double delta,
                                          StatisticPolicy policy,
                                          std::uint64_t budget = kDefaultBudget,
                                          int partitions = 1) {
    return counting_spectrum_from(word_statistics(sys, n, policy, budget, partitions), delta);
}

enum class SignRestriction : std::uint8_t { Negative, Positive, Unrestricted };

struct PressureCurve {
    std::vector<double> q;
    std::vector<double> value;
    SignRestriction restriction = SignRestriction::Positive;
    StatisticPolicy policy;
    int n = 0;
    std::uint64_t class_size = 0;
};

namespace detail {

struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

} // namespace detail

// Restricted pressure P(q) = (1/n) log sum_{w in class} exp(q n stat(w)),
// where the class keeps words of strictly negative (resp. positive)
// statistic, or every word when unrestricted. Evaluated with a max shift
// and compensated summation in rank order. Pairing the Negative class
// with the MinOverFiber statistic and
// the Positive class with MaxOverFiber on a unit-determinant system makes
// the two curves exact mirrors: P_pos(q) equals P_neg(-q) bit for bit on
// a sign-symmetric grid, because the word statistics are exact negations.
inline PressureCurve pressure_curve_from(const WordStatistics& stats,
                                         const std::vector<double>& q_grid,
                                         SignRestriction restriction) {
    if (q_grid.empty()) throw InvalidArgument("pressure needs a nonempty q grid");
    std::vector<double> members;
    for (double v : stats.values) {
        bool keep = restriction == SignRestriction::Unrestricted ||
                    (restriction == SignRestriction::Negative ? (v < 0.0) : (v > 0.0));
        if (keep) members.push_back(v);
    }
    if (members.empty())
        throw EmptySignClass("no word has a strictly signed statistic");

    PressureCurve curve;
    curve.q = q_grid;
    curve.value.reserve(q_grid.size());
    curve.restriction = restriction;
    curve.policy = stats.policy;
    curve.n = stats.range.n;
    curve.class_size = members.size();

    const double dn = static_cast<double>(stats.range.n);
    for (double q : q_grid) {
        double s = dn * q;
        double m = -std::numeric_limits<double>::infinity();
        for (double v : members) m = std::fmax(m, s * v);
        detail::KahanSum sum;
        for (double v : members) sum.add(std::exp(s * v - m));
        curve.value.push_back((m + std::log(sum.s)) / dn);
    }
    return curve;
}

inline PressureCurve pressure_curve(const FiberSystem& sys, int n,
                                    const std::vector<double>& q_grid,
                                    SignRestriction restriction, StatisticPolicy policy,
                                    std::uint64_t budget = kDefaultBudget,
                                    int partitions = 1) {
    return pressure_curve_from(word_statistics(sys, n, policy, budget, partitions), q_grid,
                               restriction);
}

// Symmetric default grid: -20..20 in steps of 0.1, so q and -q are both
// grid points (exact negations of each other).
inline std::vector<double> default_q_grid() {
    std::vector<double> q;
    q.reserve(401);
    for (int i = 0; i <= 400; ++i) q.push_back(static_cast<double>(i - 200) * 0.1);
    return q;
}

struct LegendrePoint {
    double alpha = 0.0;
    double value = 0.0;
    bool endpoint_attained = false;  // argmin hit the edge of the q grid
};

struct LegendreTransform {
    std::vector<LegendrePoint> points;
    double max_value = -std::numeric_limits<double>::infinity();
    double argmax_alpha = 0.0;
};

// Discrete conjugate E(alpha) = min_q (P(q) - q alpha) over the curve's
// own q grid. Ties keep the first grid index, matching a plain scan.
inline LegendreTransform legendre_fenchel(const PressureCurve& p,
                                          const std::vector<double>& alphas) {
    if (p.q.size() < 2) throw InvalidArgument("conjugation needs >= 2 grid points");
    LegendreTransform lf;
    lf.points.reserve(alphas.size());
    for (double a : alphas) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < p.q.size(); ++i) {
            double t = p.value[i] - p.q[i] * a;
            if (t < best) {
                best = t;
                arg = i;
            }
        }
        LegendrePoint pt;
        pt.alpha = a;
        pt.value = best;
        pt.endpoint_attained = arg == 0 || arg == p.q.size() - 1;
        lf.points.push_back(pt);
        if (best > lf.max_value) {
            lf.max_value = best;
            lf.argmax_alpha = a;
        }
    }
    return lf;
}

struct SpectrumSummary {
    int n = 0;
    double delta = 0.0;
    std::uint64_t total_words = 0;
    long long populated_bins = 0;
    double alpha_min = 0.0;          // most negative populated center
    double alpha_max = 0.0;          // most positive populated center
    double zero_bin_value = -std::numeric_limits<double>::infinity();
    double h_at_zero = 0.0;          // entropy estimate next to exponent 0
    double alpha_minus = 0.0;        // negative-branch conjugate argmax
    double alpha_plus = 0.0;         // positive-branch conjugate argmax
    double max_entropy = 0.0;        // larger of the two branch peaks
    double d_minus = 0.0;            // where the negative branch flattens
    double d_plus = 0.0;             // where the positive branch flattens
};

namespace detail {

// First q, walking the curve in the given direction, whose forward
// difference drops below the slope tolerance; NaN when none does.
inline double flattening_point(const PressureCurve& p, bool ascending) {
    std::size_t m = p.q.size();
    if (ascending) {
        for (std::size_t i = 0; i + 1 < m; ++i) {
            double slope = (p.value[i + 1] - p.value[i]) / (p.q[i + 1] - p.q[i]);
            if (std::fabs(slope) < kSlopeTol) return p.q[i + 1];
        }
    } else {
        for (std::size_t i = m - 1; i-- > 0;) {
            double slope = (p.value[i + 1] - p.value[i]) / (p.q[i + 1] - p.q[i]);
            if (std::fabs(slope) < kSlopeTol) return p.q[i];
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

// Headline numbers from one spectrum and its two pressure branches.
// h_at_zero averages the innermost populated bins (count >= 2) on each
// side of zero: the entropy estimate right next to exponent zero.
// alpha_minus / alpha_plus maximize the branch conjugates on the fine
// grids -+(delta, delta + delta/4, ..) out one bin past the support.
inline SpectrumSummary extract_summary(const CountingSpectrum& spec, const PressureCurve& p_neg,
                                       const PressureCurve& p_pos) {
    SpectrumSummary s;
    s.n = spec.n;
    s.delta = spec.delta;
    s.total_words = spec.total_words;
    for (const auto& b : spec.bins) {
        if (!b.populated) continue;
        ++s.populated_bins;
        s.alpha_min = std::fmin(s.alpha_min, b.alpha);
        s.alpha_max = std::fmax(s.alpha_max, b.alpha);
    }
    if (s.populated_bins < 3)
        throw InsufficientSupport("spectrum has fewer than 3 populated bins");
    if (const SpectrumBin* z = spec.find(0)) s.zero_bin_value = z->value;

    double side_sum = 0.0;
    int side_count = 0;
    for (long long k = 1; k <= spec.bins.back().index; ++k) {
        const SpectrumBin* b = spec.find(k);
        if (b && b->count >= 2) {
            side_sum += b->value;
            ++side_count;
            break;
        }
    }
    for (long long k = -1; k >= spec.bins.front().index; --k) {
        const SpectrumBin* b = spec.find(k);
        if (b && b->count >= 2) {
            side_sum += b->value;
            ++side_count;
            break;
        }
    }
    s.h_at_zero = side_count > 0 ? side_sum / side_count : s.zero_bin_value;

    auto fine_grid = [&](double reach, double sign) {
        std::vector<double> g;
        double step = spec.delta / 4.0;
        double stop = reach + spec.delta;
        for (int j = 0;; ++j) {
            double a = spec.delta + static_cast<double>(j) * step;
            if (a >= stop) break;
            g.push_back(sign * a);
        }
        if (g.empty()) g.push_back(sign * spec.delta);
        return g;
    };
    LegendreTransform lf_pos = legendre_fenchel(p_pos, fine_grid(s.alpha_max, 1.0));
    LegendreTransform lf_neg = legendre_fenchel(p_neg, fine_grid(-s.alpha_min, -1.0));
    s.alpha_plus = lf_pos.argmax_alpha;
    s.alpha_minus = lf_neg.argmax_alpha;
    s.max_entropy = std::fmax(lf_pos.max_value, lf_neg.max_value);

    s.d_minus = detail::flattening_point(p_neg, true);
    s.d_plus = detail::flattening_point(p_pos, false);
    return s;
}

} // namespace cospec
