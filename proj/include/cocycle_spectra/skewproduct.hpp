#pragma once

// Circle skew-products driven by finite words: each symbol applies one
// fiber map. Three map kinds share an interface: projectivized positive-
// determinant matrices, rigid rotations (derivative exactly 1), and
// north-south maps given by attractor, repeller and contraction rate.
//
// North-south maps are lowered at construction to the conjugated matrix
// P diag(1/sqrt(c), sqrt(c)) P^{-1} with P = [u(attractor) u(repeller)],
// so orbit iteration has a single code path; the parameters are kept so
// the inverse can be rebuilt exactly by swapping the fixed points.

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"
#include "products.hpp"
#include "symbolic.hpp"

namespace cospec {

// Rotation amount of the reference irrational rotation, in half-turns.
inline const double kGoldenRotation = (std::sqrt(5.0) - 1.0) / 2.0;

enum class FiberKind : std::uint8_t { MatrixProjective, RigidRotation, MorseSmale };

struct FiberMap {
    FiberKind kind = FiberKind::MatrixProjective;
    Mat2 m = identity2();
    double rho = 0.0;         // RigidRotation only
    double attractor = 0.0;   // MorseSmale only
    double repeller = 0.0;    //
    double contraction = 0.0; //

    static FiberMap matrix(const Mat2& mat) {
        if (mat.det <= 1e-12)
            throw NonPositiveDeterminant("fiber matrix needs determinant > 0");
        FiberMap f;
        f.kind = FiberKind::MatrixProjective;
        f.m = mat;
        return f;
    }

    static FiberMap rotation(double amount) {
        FiberMap f;
        f.kind = FiberKind::RigidRotation;
        f.rho = frac(amount);
        return f;
    }

    static FiberMap morse_smale(double attractor, double repeller, double contraction) {
        if (!(contraction > 0.0) || !(contraction < 1.0))
            throw InvalidArgument("north-south contraction rate must lie in (0,1)");
        ProjPoint pa = proj_point(attractor), pr = proj_point(repeller);
        if (circle_distance(pa, pr) <= 1e-12)
            throw InvalidArgument("north-south fixed points must be distinct");
        Vec2 ua = unit_vector(pa), ur = unit_vector(pr);
        Mat2 basis = mat2(ua.x, ur.x, ua.y, ur.y);
        Mat2 basis_inv = mat2(ur.y / basis.det, -ur.x / basis.det,
                              -ua.y / basis.det, ua.x / basis.det);
        double root = std::sqrt(contraction);
        Mat2 stretch = diag2(1.0 / root, root);
        FiberMap f;
        f.kind = FiberKind::MorseSmale;
        f.m = mul(mul(basis, stretch), basis_inv);
        f.attractor = pa.theta;
        f.repeller = pr.theta;
        f.contraction = contraction;
        return f;
    }

    ProjPoint apply(ProjPoint p) const {
        if (kind == FiberKind::RigidRotation) return {frac(p.theta + rho)};
        return proj_apply(m, p);
    }

    // |f'| in the half-turn metric: det / ||M u||^2 for matrix actions.
    double derivative(ProjPoint p) const {
        if (kind == FiberKind::RigidRotation) return 1.0;
        Vec2 v = apply_vec(m, unit_vector(p));
        return m.det / norm2sq(v);
    }

    double log_derivative(ProjPoint p) const {
        if (kind == FiberKind::RigidRotation) return 0.0;
        Vec2 v = apply_vec(m, unit_vector(p));
        return std::log(m.det / norm2sq(v));
    }

    FiberMap inverse() const {
        switch (kind) {
        case FiberKind::RigidRotation:
            return rotation(frac(1.0 - rho));
        case FiberKind::MorseSmale:
            return morse_smale(repeller, attractor, contraction);
        case FiberKind::MatrixProjective:
        default:
            // adj(M) = det(M) M^{-1}: same projective action, det unchanged.
            return matrix(inverse_shuffle(m));
        }
    }
};

struct FiberSystem {
    std::vector<FiberMap> maps;

    explicit FiberSystem(std::vector<FiberMap> ms) : maps(std::move(ms)) {
        if (maps.size() < 2) throw InvalidArgument("system needs >= 2 fiber maps");
        if (maps.size() > 255) throw InvalidArgument("alphabet size capped at 255");
    }

    int alphabet() const { return static_cast<int>(maps.size()); }

    const FiberMap& map_for(std::uint8_t symbol) const {
        if (symbol >= maps.size())
            throw InvalidArgument("word symbol outside the system alphabet");
        return maps[symbol];
    }

    bool all_matrix() const {
        for (const auto& f : maps)
            if (f.kind == FiberKind::RigidRotation) return false;
        return true;
    }

    bool all_rotation() const {
        for (const auto& f : maps)
            if (f.kind != FiberKind::RigidRotation) return false;
        return true;
    }

    std::vector<Mat2> matrices() const {
        if (!all_matrix())
            throw InvalidArgument("system contains a rigid rotation, not a matrix action");
        std::vector<Mat2> out;
        out.reserve(maps.size());
        for (const auto& f : maps) out.push_back(f.m);
        return out;
    }

    FiberSystem inverse() const {
        std::vector<FiberMap> inv;
        inv.reserve(maps.size());
        for (const auto& f : maps) inv.push_back(f.inverse());
        return FiberSystem(std::move(inv));
    }
};

struct FiniteOrbit {
    std::vector<ProjPoint> points;  // length |w| + 1, starting point first
    double log_derivative_sum = 0.0;
};

// Drives the fiber over one word. Matrix steps share the image vector
// between the position update and the derivative factor, so the summed
// statistic is exactly sum log(det / ||v||^2) over the visited points.
inline FiniteOrbit iterate(const FiberSystem& sys, const Word& w, ProjPoint start) {
    FiniteOrbit orbit;
    orbit.points.reserve(w.size() + 1);
    orbit.points.push_back(start);
    double t = start.theta;
    double s = 0.0;
    for (std::uint8_t sym : w) {
        const FiberMap& f = sys.map_for(sym);
        if (f.kind == FiberKind::RigidRotation) {
            t = frac(t + f.rho);
        } else {
            double ux = std::cos(kPi * t), uy = std::sin(kPi * t);
            double vx = f.m.a * ux + f.m.b * uy;
            double vy = f.m.c * ux + f.m.d * uy;
            double nrm2 = vx * vx + vy * vy;
            s += std::log(f.m.det / nrm2);
            t = frac(std::atan2(vy, vx) / kPi);
        }
        orbit.points.push_back({t});
    }
    orbit.log_derivative_sum = s;
    return orbit;
}

inline double finite_time_exponent(const FiberSystem& sys, const Word& w, ProjPoint start) {
    if (w.empty()) throw EmptyWord("finite-time exponent needs a nonempty word");
    return iterate(sys, w, start).log_derivative_sum / static_cast<double>(w.size());
}

struct ExponentField {
    int grid_size = 0;
    std::vector<double> values;  // value at theta = i / grid_size
    ProjPoint argmax{0.0};
    double max_value = 0.0;
    ProjPoint argmin{0.0};
    double min_value = 0.0;
};

namespace detail {

// Golden-section maximization of eval on [lo, hi]; eval wraps mod 1 itself.
template <class Eval>
inline void golden_max(Eval&& eval, double lo, double hi, double& best_x, double& best_v) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 120 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = eval(x1);
        }
    }
    best_x = 0.5 * (lo + hi);
    best_v = eval(best_x);
}

} // namespace detail

// Finite-time fiber exponent as a function of the starting point: sampled
// on a uniform grid, extrema refined by golden section in the bracketing
// grid cells. When every step is a matrix the field is evaluated from the
// word's balanced product (one norm per query) instead of a full orbit.
inline ExponentField exponent_field(const FiberSystem& sys, const Word& w, int grid_size = 512) {
    if (w.empty()) throw EmptyWord("exponent field needs a nonempty word");
    if (grid_size < 8) throw InvalidArgument("field grid needs >= 8 points");
    const double n = static_cast<double>(w.size());

    bool fast = true;
    for (std::uint8_t sym : w)
        if (sys.map_for(sym).kind == FiberKind::RigidRotation) fast = false;

    ScaledMat2 prod{identity2(), 0};
    double sum_logdet = 0.0;
    if (fast) {
        std::vector<Mat2> gens;
        gens.reserve(sys.maps.size());
        for (const auto& f : sys.maps)
            gens.push_back(f.kind == FiberKind::RigidRotation ? identity2() : f.m);
        prod = balanced_product(w, gens);
        for (std::uint8_t sym : w) sum_logdet += std::log(sys.map_for(sym).m.det);
    }

    auto eval = [&](double x) {
        double t = frac(x);
        if (fast) return (sum_logdet - 2.0 * log_image_norm(prod, {t})) / n;
        return iterate(sys, w, {t}).log_derivative_sum / n;
    };

    ExponentField field;
    field.grid_size = grid_size;
    field.values.resize(static_cast<std::size_t>(grid_size));
    int gmax = 0, gmin = 0;
    for (int i = 0; i < grid_size; ++i) {
        double v = eval(static_cast<double>(i) / grid_size);
        field.values[static_cast<std::size_t>(i)] = v;
        if (v > field.values[static_cast<std::size_t>(gmax)]) gmax = i;
        if (v < field.values[static_cast<std::size_t>(gmin)]) gmin = i;
    }

    const double h = 1.0 / grid_size;
    double x, v;
    detail::golden_max(eval, (gmax - 1) * h, (gmax + 1) * h, x, v);
    field.argmax = {frac(x)};
    field.max_value = v;
    auto neg = [&](double y) { return -eval(y); };
    detail::golden_max(neg, (gmin - 1) * h, (gmin + 1) * h, x, v);
    field.argmin = {frac(x)};
    field.min_value = -v;
    return field;
}

} // namespace cospec
