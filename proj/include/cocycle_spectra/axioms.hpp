#pragma once

// Certification of the two dynamical axioms for a finite system of
// circle maps, and synchronization sampling under random words.
//
// Covering-expansion: some word must map the core arc J over an enlarged
// copy of the target arc H while expanding at a definite exponential
// rate. Accessibility: images of H must reach every point of a test
// grid within a bounded number of steps. Both searches walk words in
// breadth-first order, shortest first and lexicographic within a length,
// carrying each node's image arc so a child costs one map application.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"
#include "skewproduct.hpp"
#include "symbolic.hpp"

namespace cospec {

inline constexpr double kExpansionFloor = 0.05;  // required rate per step
inline constexpr double kCoverMargin = 0.05;     // target enlargement, per unit length
inline constexpr double kSyncTol = 1e-6;

// Image of an arc under one orientation-preserving circle map: the
// endpoints map and the image is the arc between them. Fiber maps here
// are homeomorphisms, so the image never wraps onto itself.
inline Arc arc_image(const FiberMap& f, Arc a) {
    double s = f.apply({a.start}).theta;
    double e = f.apply({frac(a.start + a.length)}).theta;
    return {s, frac(e - s)};
}

// Minimum of |f'| over an arc. The derivative of a matrix action is
// det/||M u||^2, a single-harmonic wave in theta: its interior minimum
// sits exactly at the most-expanded input direction, so checking the two
// endpoints plus that direction (when the arc contains it) is exact.
inline double arc_min_derivative(const FiberMap& f, Arc a) {
    if (f.kind == FiberKind::RigidRotation) return 1.0;
    double m = std::fmin(f.derivative({a.start}), f.derivative({frac(a.start + a.length)}));
    double tstar = most_expanded_direction(f.m).theta;
    if (arc_contains(a, tstar)) m = std::fmin(m, f.derivative({tstar}));
    return m;
}

// Length of target covered by image, handling wraparound on both sides.
inline double arc_overlap_length(Arc target, Arc image) {
    double x = frac(image.start - target.start);
    double total = 0.0;
    if (x < target.length) total += std::fmin(target.length - x, image.length);
    if (x + image.length > 1.0)
        total += std::fmin(x + image.length - 1.0, target.length);
    return std::fmin(total, target.length);
}

struct CecOptions {
    int max_len = 12;
    double expansion_floor = kExpansionFloor;
    double margin = kCoverMargin;
    std::uint64_t budget = kDefaultBudget;
};

struct CecCertificate {
    bool found = false;
    Word witness;
    int ell = 0;
    Arc image{0.0, 0.0};
    double log_expansion = 0.0;  // summed per-step arc-minimum log derivatives
    double rate = 0.0;           // log_expansion / ell
    bool covers = false;
    double coverage = 0.0;  // fraction of the enlarged target inside the image
    Arc enlarged{0.0, 0.0};
};

namespace detail {

struct CecNode {
    Arc arc;
    double sumlog;
    Word word;
};

} // namespace detail

// Searches for a covering-expansion witness: a word w with f_w(J)
// containing the enlarged target and with per-step minimum expansion
// summing to at least ell * expansion_floor. Returns the first witness
// in breadth-first order, or the best coverage seen when none certifies
// within max_len.
inline CecCertificate check_cec(const FiberSystem& sys, Arc core, Arc target,
                                const CecOptions& opts = {}) {
    if (!(core.length > 0.0) || core.length >= 1.0 || !(target.length > 0.0) ||
        target.length >= 1.0)
        throw InvalidArgument("arcs must have length in (0,1)");
    if (opts.max_len < 1 || opts.max_len > 24)
        throw InvalidArgument("witness length cap must lie in 1..24");
    if (!arcs_intersect(core, target))
        throw DisjointInput("core and target arcs do not meet");

    CecCertificate cert;
    cert.enlarged = {frac(target.start - opts.margin * target.length),
                     target.length * (1.0 + 2.0 * opts.margin)};
    if (cert.enlarged.length >= 1.0)
        throw InvalidArgument("enlarged target covers the whole circle");

    std::vector<detail::CecNode> level;
    level.push_back({core, 0.0, {}});
    std::uint64_t visited = 0;
    double best_cover = -1.0;
    for (int len = 1; len <= opts.max_len; ++len) {
        std::vector<detail::CecNode> next;
        next.reserve(level.size() * sys.maps.size());
        for (const auto& node : level) {
            for (std::uint8_t s = 0; s < sys.maps.size(); ++s) {
                if (++visited > opts.budget)
                    throw BudgetExceeded("covering-expansion search exceeded its budget");
                const FiberMap& f = sys.maps[s];
                detail::CecNode child;
                child.arc = arc_image(f, node.arc);
                child.sumlog = node.sumlog + std::log(arc_min_derivative(f, node.arc));
                child.word = node.word;
                child.word.push_back(s);

                bool covers = arc_contains_arc(child.arc, cert.enlarged);
                double coverage = arc_overlap_length(cert.enlarged, child.arc) /
                                  cert.enlarged.length;
                bool expands = child.sumlog >= static_cast<double>(len) * opts.expansion_floor;
                if (covers && expands) {
                    cert.found = true;
                    cert.witness = child.word;
                    cert.ell = len;
                    cert.image = child.arc;
                    cert.log_expansion = child.sumlog;
                    cert.rate = child.sumlog / static_cast<double>(len);
                    cert.covers = true;
                    cert.coverage = coverage;
                    return cert;
                }
                if (coverage > best_cover) {
                    best_cover = coverage;
                    cert.witness = child.word;
                    cert.ell = len;
                    cert.image = child.arc;
                    cert.log_expansion = child.sumlog;
                    cert.rate = child.sumlog / static_cast<double>(len);
                    cert.covers = covers;
                    cert.coverage = coverage;
                }
                next.push_back(std::move(child));
            }
        }
        level = std::move(next);
    }
    return cert;
}

struct AccOptions {
    int grid = 256;
    int max_depth = 12;
    std::uint64_t budget = kDefaultBudget;
};

struct AccReport {
    bool certified = false;
    int grid = 0;
    int depth_used = 0;
    long long unreached = 0;
    double covered_fraction = 0.0;
    int max_transition = 0;  // deepest level that first reached some point
};

// Accessibility of a test grid into the arc J: a grid point x is reached
// at level l when some length-l word image f_w(x) lands in the open
// interior of J (level 0 means x itself is already inside). Certified
// when every grid point is reached within max_depth; max_transition is
// the worst first-hit level, an empirical uniform transition length.
inline AccReport check_acc(const FiberSystem& sys, Arc target, const AccOptions& opts = {}) {
    if (!(target.length > 0.0) || target.length >= 1.0)
        throw InvalidArgument("arc must have length in (0,1)");
    if (opts.grid < 8) throw InvalidArgument("test grid needs >= 8 points");
    if (opts.max_depth < 1 || opts.max_depth > 14)
        throw InvalidArgument("transition depth cap must lie in 1..14");

    auto interior = [&](double x) {
        double d = frac(x - target.start);
        return d > 0.0 && d < target.length;
    };

    AccReport rep;
    rep.grid = opts.grid;
    long long reached = 0;
    std::uint64_t visited = 0;
    for (int i = 0; i < opts.grid; ++i) {
        double x = static_cast<double>(i) / opts.grid;
        int found = interior(x) ? 0 : -1;
        std::vector<double> frontier{x};
        for (int lvl = 1; lvl <= opts.max_depth && found < 0; ++lvl) {
            rep.depth_used = std::max(rep.depth_used, lvl);
            std::vector<double> next;
            next.reserve(frontier.size() * sys.maps.size());
            for (double y : frontier) {
                for (const auto& f : sys.maps) {
                    if (++visited > opts.budget)
                        throw BudgetExceeded("accessibility search exceeded its budget");
                    double z = f.apply(ProjPoint{y}).theta;
                    if (interior(z)) {
                        found = lvl;
                        break;
                    }
                    next.push_back(z);
                }
                if (found >= 0) break;
            }
            frontier = std::move(next);
        }
        if (found >= 0) {
            ++reached;
            rep.max_transition = std::max(rep.max_transition, found);
        }
    }
    rep.unreached = static_cast<long long>(opts.grid) - reached;
    rep.covered_fraction = static_cast<double>(reached) / opts.grid;
    rep.certified = rep.unreached == 0;
    return rep;
}

struct SyncOptions {
    int samples = 40;
    std::uint64_t steps = 256;
    int grid = 64;
    double tol = kSyncTol;
};

struct SyncSample {
    std::uint64_t index = 0;
    bool synchronized = false;
    double diameter = 0.0;  // outlier-tolerant diameter of final positions
    double exponent = 0.0;  // orbit exponent of the barycenter representative
    double barycenter = 0.0;
};

struct SyncReport {
    std::uint64_t seed = 0;
    double fraction_synchronized = 0.0;
    double mean_exponent = 0.0;  // over synchronized samples
    std::vector<SyncSample> samples;
};

namespace detail {

// Diameter after discarding the single most separating point: each
// removal merges that point's two adjacent gaps, and the diameter is one
// minus the largest remaining gap.
inline double outlier_tolerant_diameter(std::vector<double> pts) {
    std::sort(pts.begin(), pts.end());
    std::size_t g = pts.size();
    std::vector<double> gaps(g);
    for (std::size_t i = 0; i + 1 < g; ++i) gaps[i] = pts[i + 1] - pts[i];
    gaps[g - 1] = pts[0] + 1.0 - pts[g - 1];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g; ++j) {
        std::size_t before = (j + g - 1) % g;
        double merged = gaps[before] + gaps[j];
        double widest = merged;
        for (std::size_t i = 0; i < g; ++i)
            if (i != j && i != before) widest = std::fmax(widest, gaps[i]);
        best = std::fmin(best, 1.0 - widest);
    }
    return best;
}

} // namespace detail

// Pushes a uniform grid of starting points through random words and
// measures how tightly the finals cluster. Each sample uses its own
// split of the sampler, so the report does not depend on evaluation
// order. The per-sample exponent reads off the orbit whose final point
// lies nearest the cluster's circular barycenter.
inline SyncReport synchronize(const FiberSystem& sys, const BernoulliSampler& sampler,
                              const SyncOptions& opts = {}) {
    if (opts.samples < 1) throw InvalidArgument("sampling needs >= 1 sample");
    if (opts.grid < 8) throw InvalidArgument("start grid needs >= 8 points");
    if (opts.steps < 1) throw InvalidArgument("sampling needs >= 1 step");
    if (static_cast<std::size_t>(sampler.weights.size()) !=
        static_cast<std::size_t>(sys.alphabet()))
        throw InvalidArgument("sampler weight count must match the alphabet");

    SyncReport rep;
    rep.seed = sampler.seed;
    rep.samples.reserve(static_cast<std::size_t>(opts.samples));
    double exp_sum = 0.0;
    int synced = 0;
    for (int i = 0; i < opts.samples; ++i) {
        BernoulliSampler child = sampler.split(static_cast<std::uint64_t>(i));
        Word xi = child.sample_sequence(opts.steps);
        std::vector<double> finals;
        std::vector<double> logsums;
        finals.reserve(static_cast<std::size_t>(opts.grid));
        logsums.reserve(static_cast<std::size_t>(opts.grid));
        for (int gp = 0; gp < opts.grid; ++gp) {
            FiniteOrbit orbit = iterate(sys, xi, {static_cast<double>(gp) / opts.grid});
            finals.push_back(orbit.points.back().theta);
            logsums.push_back(orbit.log_derivative_sum);
        }
        SyncSample s;
        s.index = static_cast<std::uint64_t>(i);
        s.diameter = detail::outlier_tolerant_diameter(finals);
        s.synchronized = s.diameter <= opts.tol;

        double cs = 0.0, sn = 0.0;
        for (double t : finals) {
            cs += std::cos(2.0 * kPi * t);
            sn += std::sin(2.0 * kPi * t);
        }
        s.barycenter = frac(std::atan2(sn, cs) / (2.0 * kPi));
        std::size_t rep_idx = 0;
        double best = 2.0;
        for (std::size_t j = 0; j < finals.size(); ++j) {
            double d = circle_distance({finals[j]}, {s.barycenter});
            if (d < best) {
                best = d;
                rep_idx = j;
            }
        }
        s.exponent = logsums[rep_idx] / static_cast<double>(opts.steps);
        if (s.synchronized) {
            exp_sum += s.exponent;
            ++synced;
        }
        rep.samples.push_back(s);
    }
    rep.fraction_synchronized = static_cast<double>(synced) / opts.samples;
    rep.mean_exponent =
        synced > 0 ? exp_sum / synced : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

} // namespace cospec
