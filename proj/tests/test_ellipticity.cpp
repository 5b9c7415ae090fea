#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include <cocycle_spectra/ellipticity.hpp>
#include <cocycle_spectra/skewproduct.hpp>

using namespace cospec;

namespace {

std::vector<Mat2> reference_gens() {
    return {diag2(2.0, 0.5), rotation_half_turns(kGoldenRotation)};
}

} // namespace

TEST_CASE("rotation numbers round-trip through elliptic matrices") {
    CHECK(rotation_number_half_turns(rotation_half_turns(0.37)) ==
          Catch::Approx(0.37).margin(1e-12));
    CHECK(rotation_number_half_turns(rotation_half_turns(kGoldenRotation)) ==
          Catch::Approx(kGoldenRotation).margin(1e-12));

    // the trace, hence the rotation number, survives conjugation
    Mat2 b = mat2(2.0, 1.0, 1.0, 1.0);
    Mat2 binv = mat2(1.0, -1.0, -1.0, 2.0);
    Mat2 m = rotation_half_turns(0.37);
    CHECK(std::fabs(rotation_number_half_turns(mul(mul(b, m), binv)) -
                    rotation_number_half_turns(m)) <= 1e-8);

    CHECK_THROWS_AS(rotation_number_half_turns(diag2(2.0, 0.5)), NotElliptic);
    CHECK_THROWS_AS(rotation_number_half_turns(mat2(1.0, 1.0, 0.0, 1.0)), NotElliptic);
    CHECK_THROWS_AS(rotation_number_half_turns(identity2()), NotElliptic);
}

TEST_CASE("nearest rational gap scans denominators up to the cap") {
    // nearbyint ties to even: with cap 1 the tie 0.5 rounds to 0, not 1
    CHECK(nearest_rational_gap(0.5, 1) == 0.5);
    CHECK(nearest_rational_gap(0.5, 2) == 0.0);
    CHECK(nearest_rational_gap(1.0 / 3.0) == 0.0);
    CHECK(nearest_rational_gap(kGoldenRotation) == 0.0026493733652794837);

    // widening the cap can only shrink the gap
    for (double x : {0.1234, 0.777, kGoldenRotation}) {
        CHECK(nearest_rational_gap(x, 5) >= nearest_rational_gap(x, 20));
    }

    CHECK_THROWS_AS(nearest_rational_gap(0.5, 0), InvalidArgument);
    CHECK_THROWS_AS(nearest_rational_gap(0.5, -3), InvalidArgument);
}

TEST_CASE("semigroup search records the first witness of each kind") {
    std::vector<Mat2> gens = reference_gens();
    SemigroupSearch s = search_semigroup(gens, 8);

    REQUIRE(s.hyperbolic.found);
    CHECK(s.hyperbolic.word == Word{0});
    CHECK(s.hyperbolic.product.a == gens[0].a);
    CHECK(s.hyperbolic.product.d == gens[0].d);

    REQUIRE(s.elliptic.found);
    CHECK(s.elliptic.word == Word{1});
    CHECK(s.elliptic.rotation_number == Catch::Approx(kGoldenRotation).margin(1e-12));
    CHECK(s.elliptic.product.b == gens[1].b);

    // both witnesses have length one, so the scan stops after two words
    CHECK(s.words_examined == 2);
}

TEST_CASE("semigroup search exhausts parabolic-only input") {
    std::vector<Mat2> ids = {identity2(), identity2()};
    SemigroupSearch s = search_semigroup(ids, 3);
    CHECK_FALSE(s.elliptic.found);
    CHECK_FALSE(s.hyperbolic.found);
    CHECK(s.elliptic.rotation_number == 0.0);
    CHECK(s.words_examined == 14);
}

TEST_CASE("rotation-only generators never yield a hyperbolic witness") {
    std::vector<Mat2> rots = {rotation_half_turns(0.3),
                              rotation_half_turns(kGoldenRotation)};
    SemigroupSearch s = search_semigroup(rots, 4);
    REQUIRE(s.elliptic.found);
    CHECK(s.elliptic.word == Word{0});
    CHECK(s.elliptic.rotation_number == Catch::Approx(0.3).margin(1e-12));
    CHECK_FALSE(s.hyperbolic.found);
    CHECK(s.words_examined == 30);
}

TEST_CASE("semigroup search validations") {
    std::vector<Mat2> gens = reference_gens();
    CHECK_THROWS_AS(search_semigroup({identity2()}, 4), InvalidArgument);
    CHECK_THROWS_AS(search_semigroup(gens, 0), InvalidArgument);
    CHECK_THROWS_AS(search_semigroup(gens, 15), InvalidArgument);
    CHECK_THROWS_AS(search_semigroup(gens, 8, 1), BudgetExceeded);
}

TEST_CASE("membership applies the irrationality filter to elliptic witnesses") {
    // the length-one rotation by 0.3 is rational (3/10) and must be passed
    // over; the golden rotation is the first surviving elliptic witness
    std::vector<Mat2> rots = {rotation_half_turns(0.3),
                              rotation_half_turns(kGoldenRotation)};
    ShypReport rep = shyp_membership(rots, 4);
    CHECK_FALSE(rep.member);
    CHECK_FALSE(rep.hyperbolic.found);
    REQUIRE(rep.elliptic.found);
    CHECK(rep.elliptic.word == Word{1});
    CHECK(rep.nearest_rational_gap == 0.0026493733652794837);
    CHECK(rep.words_examined == 30);
}

TEST_CASE("reference pair passes the membership test") {
    ShypReport rep = shyp_membership(reference_gens(), 8);
    CHECK(rep.member);
    REQUIRE(rep.hyperbolic.found);
    CHECK(rep.hyperbolic.word == Word{0});
    REQUIRE(rep.elliptic.found);
    CHECK(rep.elliptic.word == Word{1});
    CHECK(rep.elliptic.rotation_number == Catch::Approx(kGoldenRotation).margin(1e-12));
    CHECK(rep.nearest_rational_gap == 0.0026493733652794837);
    CHECK(rep.words_examined == 2);
}

TEST_CASE("quarter-turn partner never passes the filter") {
    // every elliptic product of these two has a rational rotation number,
    // so the plain search succeeds where the membership test refuses
    std::vector<Mat2> quart = {diag2(2.0, 0.5), rotation_half_turns(0.5)};

    SemigroupSearch s = search_semigroup(quart, 6);
    REQUIRE(s.elliptic.found);
    CHECK(s.elliptic.rotation_number == 0.5);
    CHECK(s.hyperbolic.found);

    ShypReport rep = shyp_membership(quart, 6);
    CHECK_FALSE(rep.member);
    CHECK(rep.hyperbolic.found);
    CHECK_FALSE(rep.elliptic.found);
    CHECK(rep.words_examined == 126);
}

TEST_CASE("membership validations") {
    std::vector<Mat2> gens = reference_gens();
    CHECK_THROWS_AS(shyp_membership({identity2()}, 4), InvalidArgument);
    CHECK_THROWS_AS(shyp_membership(gens, 0), InvalidArgument);
    CHECK_THROWS_AS(shyp_membership(gens, 15), InvalidArgument);
    CHECK_THROWS_AS(shyp_membership(gens, 8, 1), BudgetExceeded);
}

TEST_CASE("diagonal stretch keeps determinants and the horizontal direction") {
    std::vector<Mat2> gens = reference_gens();

    std::vector<Mat2> same = perturb_diagonal(gens, 1, 0.0);
    for (std::size_t i = 0; i < gens.size(); ++i) {
        CHECK(same[i].a == gens[i].a);
        CHECK(same[i].b == gens[i].b);
        CHECK(same[i].c == gens[i].c);
        CHECK(same[i].d == gens[i].d);
    }

    std::vector<Mat2> moved = perturb_diagonal(gens, 1, 0.37);
    CHECK(moved[1].det == Catch::Approx(1.0).margin(1e-15));
    CHECK(moved[0].a == gens[0].a);  // untouched generator copies through
    CHECK(moved[1].a != gens[1].a);

    std::vector<Mat2> squeezed = perturb_diagonal(gens, 0, -0.99);
    CHECK(squeezed[0].det == Catch::Approx(1.0).margin(1e-12));

    // post-composition scales the columns, so a zero lower-left entry
    // stays zero: an upper-triangular generator keeps fixing horizontal
    std::vector<Mat2> upper = {mat2(2.0, 1.0, 0.0, 0.5), identity2()};
    std::vector<Mat2> tilted = perturb_diagonal(upper, 0, 0.37);
    CHECK(tilted[0].c == 0.0);
    CHECK(tilted[0].a > 0.0);

    CHECK_THROWS_AS(perturb_diagonal(gens, 7, 0.1), InvalidArgument);
    CHECK_THROWS_AS(perturb_diagonal(gens, 0, -1.0), InvalidArgument);
    CHECK_THROWS_AS(perturb_diagonal(gens, 0, -1.5), InvalidArgument);
}

TEST_CASE("rotation response of a single elliptic factor") {
    std::vector<Mat2> gens = reference_gens();
    RotationResponse resp = rotation_perturbation_derivative(gens, Word{1});

    CHECK(resp.trace_derivative == -1.8640648445200636);
    CHECK(resp.rotation_number_derivative == 0.31830988565333967);
    CHECK(resp.base_rotation_number == Catch::Approx(kGoldenRotation).margin(1e-12));
    CHECK(resp.base_trace ==
          Catch::Approx(2.0 * std::cos(kPi * kGoldenRotation)).margin(1e-15));

    // trace(R(g) R_r) = 2 cos(pi g + r), so the slope at r = 0 is
    // -2 sin(pi g) and the rotation number moves at 1/pi half-turns
    // per radian
    CHECK(std::fabs(resp.trace_derivative + 2.0 * std::sin(kPi * kGoldenRotation)) <= 1e-6);
    CHECK(std::fabs(resp.rotation_number_derivative - 1.0 / kPi) <= 1e-6);
}

TEST_CASE("two-factor response matches the angle sum rule") {
    std::vector<Mat2> gens = reference_gens();
    RotationResponse resp = rotation_perturbation_derivative(gens, Word{1, 1});

    // two golden turns pass the half-turn mark, so the principal angle folds
    CHECK(resp.base_rotation_number ==
          Catch::Approx(2.0 - 2.0 * kGoldenRotation).margin(1e-12));
    // trace(r) = 2 cos(2 pi g + 2 r) gives slope -4 sin(2 pi g)
    CHECK(std::fabs(resp.trace_derivative +
                    4.0 * std::sin(2.0 * kPi * kGoldenRotation)) <= 1e-6);
}

TEST_CASE("halving the difference step shrinks the error quadratically") {
    std::vector<Mat2> gens = reference_gens();
    double exact = -2.0 * std::sin(kPi * kGoldenRotation);

    RotationResponse coarse = rotation_perturbation_derivative(gens, Word{1}, 1e-3);
    RotationResponse fine = rotation_perturbation_derivative(gens, Word{1}, 1e-4);
    CHECK(coarse.trace_derivative == -1.8640645369489839);

    double err_coarse = std::fabs(coarse.trace_derivative - exact);
    double err_fine = std::fabs(fine.trace_derivative - exact);
    CHECK(err_coarse <= 1e-6);
    CHECK(err_fine <= 1e-8);
    CHECK(err_fine < err_coarse / 50.0);
}

TEST_CASE("every low-depth elliptic product responds to the rotation slip") {
    std::vector<Mat2> gens = reference_gens();
    int elliptic_words = 0;
    for (int len = 1; len <= 6; ++len) {
        std::uint64_t total = checked_pow(2, len);
        for (std::uint64_t rank = 0; rank < total; ++rank) {
            Word w = word_unrank(rank, 2, len);
            ScaledMat2 p = balanced_product(w, gens);
            if (classify(p.m).tag != MatTag::Elliptic) continue;
            ++elliptic_words;
            RotationResponse resp = rotation_perturbation_derivative(gens, w);
            CHECK(std::fabs(resp.trace_derivative) > 1e-6);
            CHECK(resp.base_rotation_number > 0.0);
            CHECK(resp.base_rotation_number < 1.0);
        }
    }
    CHECK(elliptic_words == 52);
}

TEST_CASE("rotation response validations") {
    std::vector<Mat2> gens = reference_gens();
    CHECK_THROWS_AS(rotation_perturbation_derivative(gens, Word{}), EmptyWord);
    CHECK_THROWS_AS(rotation_perturbation_derivative(gens, Word{1}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(rotation_perturbation_derivative(gens, Word{1}, 2e-3), InvalidArgument);
    CHECK_THROWS_AS(rotation_perturbation_derivative(gens, Word{1}, -1e-4), InvalidArgument);
    CHECK_THROWS_AS(rotation_perturbation_derivative(gens, Word{0}), NotElliptic);
    CHECK_THROWS_AS(rotation_perturbation_derivative(gens, Word{9}), InvalidArgument);
}
