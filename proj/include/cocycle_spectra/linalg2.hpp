#pragma once

// Exact 2x2 real linear algebra and the projective circle action.
//
// Conventions used across the library:
//  * P^1 is parametrized by half-turns: theta in [0,1) stands for the line
//    through u(theta) = (cos(pi*theta), sin(pi*theta)); the full circle has
//    length 1 and distance(u,v) = min(|u-v|, 1-|u-v|).
//  * Interval lengths quote arctan normalized by 2/pi, so arctan(inf) = 1.
//    The set {|f_A'| <= (1+d^2)||A||^2 / (1+d^2||A||^4)} is the arc of
//    half-turn radius arctan(1/d)/pi around the most-expanded input
//    direction; its length (2/pi)*arctan(1/d) = 1 - (2/pi)*arctan(d).
//  * Singular values come from the closed-form Gram eigenvalues, never an
//    iterative SVD.
//  * mul() is a plain scalar kernel and must not be FMA-contracted
//    (-ffp-contract=off): together with the entry-shuffle inverse this makes
//    sv_max of balanced word products bit-identical under word reversal plus
//    family inversion; see products.hpp.

#include <cmath>
#include <numbers>
#include <optional>

#include "errors.hpp"

namespace cospec {

inline constexpr double kPi = std::numbers::pi;

// x reduced into [0,1).
inline double frac(double x) { return x - std::floor(x); }

struct Vec2 {
    double x, y;
};

inline double norm2sq(const Vec2& v) { return v.x * v.x + v.y * v.y; }

struct ProjPoint {
    double theta = 0.0; // half-turns, [0,1)
};

inline ProjPoint proj_point(double theta) { return ProjPoint{frac(theta)}; }

inline Vec2 unit_vector(ProjPoint p) {
    return Vec2{std::cos(kPi * p.theta), std::sin(kPi * p.theta)};
}

inline double circle_distance(ProjPoint a, ProjPoint b) {
    double d = std::fabs(a.theta - b.theta);
    return d <= 0.5 ? d : 1.0 - d;
}

// Row-major entries with cached determinant and singular values.
struct Mat2 {
    double a, b, c, d;
    double det;
    double sv_max, sv_min;
};

inline Mat2 mat2(double a, double b, double c, double d) {
    Mat2 m{a, b, c, d, 0.0, 0.0, 0.0};
    m.det = a * d - b * c;
    // Gram trace in this exact summation order: it is invariant under the
    // entry shuffle of the SL2 inverse, which the bit-exactness tests rely on.
    double T = (a * a + d * d) + (b * b + c * c);
    double disc = T * T - 4.0 * m.det * m.det;
    if (disc < 0.0) disc = 0.0;
    m.sv_max = std::sqrt((T + std::sqrt(disc)) * 0.5);
    m.sv_min = m.sv_max > 0.0 ? std::fabs(m.det) / m.sv_max : 0.0;
    return m;
}

inline Mat2 identity2() { return mat2(1.0, 0.0, 0.0, 1.0); }

inline Mat2 diag2(double x, double y) { return mat2(x, 0.0, 0.0, y); }

// Counterclockwise rotation by `r` radians.
inline Mat2 rotation_radians(double r) {
    double c = std::cos(r), s = std::sin(r);
    return mat2(c, -s, s, c);
}

// Rotation by `x` half-turns (angle pi*x radians).
inline Mat2 rotation_half_turns(double x) { return rotation_radians(kPi * x); }

// Plain scalar multiply; each entry is p1 + p2 with no contraction.
inline Mat2 mul(const Mat2& A, const Mat2& B) {
    return mat2(A.a * B.a + A.b * B.c, A.a * B.b + A.b * B.d,
                A.c * B.a + A.d * B.c, A.c * B.b + A.d * B.d);
}

// Projective inverse by entry shuffle: exact for SL2, and for det > 0 it is
// det * M^{-1}, which acts identically on P^1.
inline Mat2 inverse_shuffle(const Mat2& m) { return mat2(m.d, -m.b, -m.c, m.a); }

inline Vec2 apply_vec(const Mat2& m, const Vec2& v) {
    return Vec2{m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline double trace(const Mat2& m) { return m.a + m.d; }

enum class MatTag { Elliptic, Parabolic, Hyperbolic, NotSL2 };

struct MatClass {
    MatTag tag;
    std::optional<double> rotation_number; // radians in [0, pi], Elliptic only
};

inline MatClass classify(const Mat2& m, double tol_det = 1e-9, double tol_trace = 1e-9) {
    if (!(tol_det > 0.0) || !(tol_trace > 0.0))
        throw InvalidArgument("classify tolerances must be positive");
    if (std::fabs(m.det - 1.0) > tol_det) return {MatTag::NotSL2, std::nullopt};
    double t = trace(m);
    if (std::fabs(t) < 2.0 - tol_trace) {
        double half = t * 0.5;
        if (half > 1.0) half = 1.0;
        if (half < -1.0) half = -1.0;
        return {MatTag::Elliptic, std::acos(half)};
    }
    if (std::fabs(t) > 2.0 + tol_trace) return {MatTag::Hyperbolic, std::nullopt};
    return {MatTag::Parabolic, std::nullopt};
}

// f_A(v) = Av / ||Av||, in half-turn coordinates.
inline ProjPoint proj_apply(const Mat2& m, ProjPoint v) {
    if (std::fabs(m.det) <= 1e-12)
        throw SingularMatrix("proj_apply requires |det| > 1e-12");
    Vec2 w = apply_vec(m, unit_vector(v));
    return proj_point(std::atan2(w.y, w.x) / kPi);
}

// |f_A'(v)| = ||A u||^{-2} for SL(2,R) members.
inline double proj_derivative(const Mat2& m, ProjPoint v) {
    if (std::fabs(m.det) <= 1e-12)
        throw SingularMatrix("proj_derivative requires |det| > 1e-12");
    if (std::fabs(m.det - 1.0) > 1e-9)
        throw InvalidArgument("proj_derivative expects SL(2,R); use proj_derivative_glplus");
    return 1.0 / norm2sq(apply_vec(m, unit_vector(v)));
}

// GL+ variant: |f_A'(v)| = det(A) / ||A u||^2 (projectively normalization-free).
inline double proj_derivative_glplus(const Mat2& m, ProjPoint v) {
    if (m.det <= 1e-12)
        throw SingularMatrix("proj_derivative_glplus requires det > 1e-12");
    return m.det / norm2sq(apply_vec(m, unit_vector(v)));
}

// Direction maximizing ||M u(theta)||: the most-expanded input direction,
// from the Gram matrix G = M^T M. ||Mu||^2 = c0 + c1*cos(2 pi t) + c2*sin(2 pi t).
inline ProjPoint most_expanded_direction(const Mat2& m) {
    double g11 = m.a * m.a + m.c * m.c;
    double g22 = m.b * m.b + m.d * m.d;
    double g12 = m.a * m.b + m.c * m.d;
    return proj_point(std::atan2(g12, (g11 - g22) * 0.5) / (2.0 * kPi));
}

// Closed arc on the circle: [start, start+length] mod 1.
struct Arc {
    double start;  // in [0,1)
    double length; // in (0,1)
};

inline bool arc_contains(const Arc& a, double x) {
    return frac(x - a.start) <= a.length;
}

// inner subset of outer, both read as closed arcs.
inline bool arc_contains_arc(const Arc& outer, const Arc& inner) {
    return frac(inner.start - outer.start) + inner.length <= outer.length;
}

inline bool arcs_intersect(const Arc& a, const Arc& b) {
    return frac(b.start - a.start) <= a.length || frac(a.start - b.start) <= b.length;
}

struct SmallDerivInterval {
    Arc arc;          // {|f_A'| <= threshold}
    double threshold; // (1+d^2)||A||^2 / (1+d^2 ||A||^4)
};

// Small-derivative set of a matrix action: the arc of half-turn radius
// arctan(1/delta)/pi around the most-expanded input direction. Its length
// is 1 - (2/pi) arctan(delta), the arctan read against a quarter turn as
// everywhere in this library; tests pin the delta -> 0 and infinity limits.
inline SmallDerivInterval small_derivative_interval(const Mat2& m, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("small_derivative_interval requires delta > 0");
    if (m.sv_max - m.sv_min <= 1e-12)
        throw IsometryInput("small_derivative_interval is undefined for isometries");
    double s2 = m.sv_max * m.sv_max;
    double threshold = (1.0 + delta * delta) * s2 / (1.0 + delta * delta * s2 * s2);
    double half_width = std::atan(1.0 / delta) / kPi;
    ProjPoint center = most_expanded_direction(m);
    return {Arc{frac(center.theta - half_width), 2.0 * half_width}, threshold};
}

// A / sqrt(det A). The division always happens (no SL2 shortcut): IEEE sqrt
// and division then make normalize(s*A) bit-identical to normalize(A) for
// power-of-two s, which the scale-invariance checks assert exactly.
inline Mat2 normalize_glplus(const Mat2& m) {
    if (!(m.det > 0.0))
        throw NonPositiveDeterminant("normalize_glplus requires det > 0");
    double r = std::sqrt(m.det);
    return mat2(m.a / r, m.b / r, m.c / r, m.d / r);
}

} // namespace cospec
