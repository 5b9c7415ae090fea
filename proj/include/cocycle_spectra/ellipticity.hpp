#pragma once

// Elliptic behavior inside the generated matrix semigroup: witness
// searches over short words, rotation numbers of elliptic products,
// diagonal perturbations, and the first-order response of a product's
// trace to interleaving a small rotation after every factor.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"
#include "products.hpp"
#include "symbolic.hpp"

namespace cospec {

inline constexpr int kRationalDenominatorCap = 20;
inline constexpr double kDiophantineGap = 1e-3;

// Rotation number of an elliptic SL2 member in half-turns: the conjugacy
// angle acos(trace/2) over pi, in (0,1).
inline double rotation_number_half_turns(const Mat2& m) {
    MatClass c = classify(m);
    if (c.tag != MatTag::Elliptic)
        throw NotElliptic("rotation number needs an elliptic input");
    return *c.rotation_number / kPi;
}

// min_{q <= cap} |x - p/q| over all integers p.
inline double nearest_rational_gap(double x, int denominator_cap = kRationalDenominatorCap) {
    if (denominator_cap < 1) throw InvalidArgument("denominator cap must be >= 1");
    double best = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= denominator_cap; ++q) {
        double p = std::nearbyint(x * q);
        best = std::fmin(best, std::fabs(x - p / q));
    }
    return best;
}

struct SemigroupWitness {
    bool found = false;
    Word word;
    Mat2 product = identity2();
    double rotation_number = 0.0;  // half-turns, elliptic witnesses only
};

struct SemigroupSearch {
    SemigroupWitness elliptic;
    SemigroupWitness hyperbolic;
    std::uint64_t words_examined = 0;
};

// Scans products of words of length 1..max_depth, shortest first and
// lexicographic within a length, recording the first elliptic and the
// first hyperbolic product. Products whose computed determinant drifts
// outside the SL2 tolerance are passed over unclassified.
inline SemigroupSearch search_semigroup(const std::vector<Mat2>& gens, int max_depth,
                                        std::uint64_t budget = kDefaultBudget) {
    if (gens.size() < 2) throw InvalidArgument("search needs >= 2 generators");
    if (max_depth < 1 || max_depth > 14)
        throw InvalidArgument("search depth must lie in 1..14");
    SemigroupSearch out;
    for (int len = 1; len <= max_depth; ++len) {
        WordRange range{static_cast<int>(gens.size()), len, 0,
                        checked_pow(static_cast<int>(gens.size()), len)};
        bool done = false;
        for_each_word(range, [&](std::uint64_t, const Word& w) {
            if (done) return;
            if (++out.words_examined > budget)
                throw BudgetExceeded("semigroup search exceeded its budget");
            ScaledMat2 p = balanced_product(w, gens);
            if (p.pow2 != 0) return;  // too large to classify against trace 2
            MatClass c = classify(p.m);
            if (c.tag == MatTag::Elliptic && !out.elliptic.found) {
                out.elliptic.found = true;
                out.elliptic.word = w;
                out.elliptic.product = p.m;
                out.elliptic.rotation_number = *c.rotation_number / kPi;
            } else if (c.tag == MatTag::Hyperbolic && !out.hyperbolic.found) {
                out.hyperbolic.found = true;
                out.hyperbolic.word = w;
                out.hyperbolic.product = p.m;
            }
            done = out.elliptic.found && out.hyperbolic.found;
        });
        if (done) break;
    }
    return out;
}

struct ShypReport {
    bool member = false;
    SemigroupWitness hyperbolic;
    SemigroupWitness elliptic;        // passes the Diophantine filter
    double nearest_rational_gap = 0.0;  // of the elliptic rotation number
    std::uint64_t words_examined = 0;
};

// Membership test for the hyperbolic-with-irrational-ellipticity class:
// the semigroup must show a hyperbolic product and an elliptic product
// whose rotation number stays at least kDiophantineGap away from every
// rational with denominator up to kRationalDenominatorCap.
inline ShypReport shyp_membership(const std::vector<Mat2>& gens, int max_depth,
                                  std::uint64_t budget = kDefaultBudget) {
    if (gens.size() < 2) throw InvalidArgument("membership test needs >= 2 generators");
    if (max_depth < 1 || max_depth > 14)
        throw InvalidArgument("search depth must lie in 1..14");
    ShypReport rep;
    for (int len = 1; len <= max_depth; ++len) {
        WordRange range{static_cast<int>(gens.size()), len, 0,
                        checked_pow(static_cast<int>(gens.size()), len)};
        bool done = false;
        for_each_word(range, [&](std::uint64_t, const Word& w) {
            if (done) return;
            if (++rep.words_examined > budget)
                throw BudgetExceeded("membership search exceeded its budget");
            ScaledMat2 p = balanced_product(w, gens);
            if (p.pow2 != 0) return;
            MatClass c = classify(p.m);
            if (c.tag == MatTag::Hyperbolic && !rep.hyperbolic.found) {
                rep.hyperbolic.found = true;
                rep.hyperbolic.word = w;
                rep.hyperbolic.product = p.m;
            } else if (c.tag == MatTag::Elliptic && !rep.elliptic.found) {
                double x = *c.rotation_number / kPi;
                double gap = nearest_rational_gap(x);
                if (gap > kDiophantineGap) {
                    rep.elliptic.found = true;
                    rep.elliptic.word = w;
                    rep.elliptic.product = p.m;
                    rep.elliptic.rotation_number = x;
                    rep.nearest_rational_gap = gap;
                }
            }
            done = rep.hyperbolic.found && rep.elliptic.found;
        });
        if (done) break;
    }
    rep.member = rep.hyperbolic.found && rep.elliptic.found;
    return rep;
}

// Post-composes one generator with the stretch diag(1+t, 1/(1+t)),
// which keeps the determinant and fixes the horizontal direction.
inline std::vector<Mat2> perturb_diagonal(std::vector<Mat2> gens, std::size_t index,
                                          double t) {
    if (index >= gens.size()) throw InvalidArgument("generator index out of range");
    if (!(t > -1.0)) throw InvalidArgument("stretch parameter must exceed -1");
    gens[index] = mul(gens[index], diag2(1.0 + t, 1.0 / (1.0 + t)));
    return gens;
}

struct RotationResponse {
    double trace_derivative = 0.0;           // d/dr trace P(r) at r = 0
    double rotation_number_derivative = 0.0; // in half-turns per radian
    double base_trace = 0.0;
    double base_rotation_number = 0.0;       // half-turns
};

// Sensitivity of an elliptic product to a rotation by r radians slipped
// in after every factor: P(r) = (A_{w_{l-1}} R_r) .. (A_{w_0} R_r).
// The trace derivative is a central difference; for an elliptic product
// with angle t it converts to the rotation-number response through
// d(trace) = -2 sin(t) d(angle).
inline RotationResponse rotation_perturbation_derivative(const std::vector<Mat2>& gens,
                                                         const Word& w, double h = 1e-4) {
    if (w.empty()) throw EmptyWord("perturbation response needs a nonempty word");
    if (!(h > 0.0) || h > 1e-3)
        throw InvalidArgument("difference step must lie in (0, 1e-3]");
    auto interleaved = [&](double r) {
        Mat2 rot = rotation_radians(r);
        Mat2 p = identity2();
        for (std::uint8_t s : w) {
            if (s >= gens.size())
                throw InvalidArgument("word symbol outside the generator set");
            p = mul(mul(gens[s], rot), p);
        }
        return p;
    };
    Mat2 base = interleaved(0.0);
    MatClass c = classify(base);
    if (c.tag != MatTag::Elliptic)
        throw NotElliptic("perturbation response needs an elliptic base product");

    RotationResponse resp;
    resp.base_trace = trace(base);
    resp.base_rotation_number = *c.rotation_number / kPi;
    resp.trace_derivative = (trace(interleaved(h)) - trace(interleaved(-h))) / (2.0 * h);
    double angle = *c.rotation_number;  // radians in (0, pi)
    resp.rotation_number_derivative = -resp.trace_derivative / (2.0 * std::sin(angle)) / kPi;
    return resp;
}

} // namespace cospec
