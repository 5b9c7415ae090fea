#pragma once

// Balanced-tree products of 2x2 matrices with power-of-two renormalization.
//
// The product of a word w = w_0 w_1 .. w_{n-1} is A_{w_{n-1}} ... A_{w_0}:
// the first symbol acts first, so it sits as the rightmost factor. The tree
// splits a block of length n at floor(n/2) and multiplies the two half
// products. With the plain multiply kernel (no FMA, no re-association) the
// singular values of the result are bit-exact under word reversal combined
// with the entry-shuffle inverse whenever n is a power of two; the scale
// factor below is a power of two, so renormalization preserves that.

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "linalg2.hpp"
#include "symbolic.hpp"

namespace cospec {

// Represents 2^pow2 * m. The shift keeps entries finite for long products;
// it never triggers for words of length <= 24 built from moderate entries.
// A long product held as 2^pow2 * m, plus log|det| of the true product
// accumulated factor by factor. The determinant of a grown product must
// never be recomputed from its entries: a*d - b*c cancels catastrophically
// once the norm is large, while the factor-wise sum stays exact to a few
// ulps (and is exactly zero for unit-determinant generators).
struct ScaledMat2 {
    Mat2 m;
    long long pow2 = 0;
    double logdet = 0.0;

    double log_scale() const {
        return static_cast<double>(pow2) * std::numbers::ln2;
    }
    double log_sv_max() const { return std::log(m.sv_max) + log_scale(); }
    // second singular value via |det| = sv_max * sv_min
    double log_sv_min() const { return logdet - log_sv_max(); }
};

inline constexpr double kRenormThreshold = 1e120;
inline constexpr int kRenormShift = 512;

inline double max_abs_entry(const Mat2& m) {
    double ab = std::fmax(std::fabs(m.a), std::fabs(m.b));
    double cd = std::fmax(std::fabs(m.c), std::fabs(m.d));
    return std::fmax(ab, cd);
}

inline ScaledMat2 renormalize(ScaledMat2 s) {
    double mx = max_abs_entry(s.m);
    if (mx <= kRenormThreshold) return s;
    double a = s.m.a, b = s.m.b, c = s.m.c, d = s.m.d;
    while (mx > kRenormThreshold) {
        a *= 0x1p-512;
        b *= 0x1p-512;
        c *= 0x1p-512;
        d *= 0x1p-512;
        mx *= 0x1p-512;
        s.pow2 += kRenormShift;
    }
    s.m = mat2(a, b, c, d);
    return s;
}

namespace detail {

inline ScaledMat2 balanced_block(const Word& w, std::size_t lo, std::size_t hi,
                                 const std::vector<Mat2>& gens) {
    if (hi - lo == 1) {
        std::uint8_t s = w[lo];
        if (s >= gens.size()) throw InvalidArgument("word symbol outside the generator set");
        return renormalize({gens[s], 0, std::log(std::fabs(gens[s].det))});
    }
    std::size_t mid = lo + (hi - lo) / 2;
    ScaledMat2 left = balanced_block(w, mid, hi, gens);
    ScaledMat2 right = balanced_block(w, lo, mid, gens);
    return renormalize({mul(left.m, right.m), left.pow2 + right.pow2,
                        left.logdet + right.logdet});
}

} // namespace detail

inline ScaledMat2 balanced_product(const Word& w, const std::vector<Mat2>& gens) {
    if (w.empty()) throw EmptyWord("cannot form the product of an empty word");
    return detail::balanced_block(w, 0, w.size(), gens);
}

// log of the true image norm ||(2^pow2 m) u(theta)||.
inline double log_image_norm(const ScaledMat2& s, ProjPoint p) {
    Vec2 u = unit_vector(p);
    Vec2 v = apply_vec(s.m, u);
    return 0.5 * std::log(norm2sq(v)) + s.log_scale();
}

} // namespace cospec
