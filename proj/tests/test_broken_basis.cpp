#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bbw/broken_basis.hpp"
#include "bbw/errors.hpp"
#include "bbw/knots.hpp"
#include "bbw/smooth_family.hpp"

using namespace bbw;
using Catch::Approx;

namespace {

SmoothFamily powers(int nu) {
    std::vector<SmoothFunction> m;
    for (int d = 0; d < nu; ++d) m.push_back(SmoothFunction::power(d));
    return SmoothFamily(std::move(m));
}

SmoothFamily trig4() {
    return SmoothFamily({SmoothFunction::power(0), SmoothFunction::power(1),
                         SmoothFunction::sine(1.0), SmoothFunction::cosine(1.0)});
}

const KnotGrid HAT5({0.0, 0.25, 0.5, 0.75, 1.0});
const KnotGrid NONEQ({0.0, 0.1, 0.28, 0.45, 0.65, 0.85, 1.0});

} // namespace

TEST_CASE("order two basis reduces to the hat functions", "[basis]") {
    const BrokenBasis b(powers(2), HAT5);
    REQUIRE(b.count() == 5);
    REQUIRE(b.order() == 2);

    SECTION("values at a generic point") {
        const Vector v = b.evaluate_all(0.125, 0);
        REQUIRE(v[0] == Approx(0.5));
        REQUIRE(v[1] == Approx(0.5));
        REQUIRE(v[2] == Approx(0.0).margin(1e-14));
        REQUIRE(v[4] == Approx(0.0).margin(1e-14));
    }

    SECTION("interior knots give left limits") {
        REQUIRE(b.evaluate(1, 0.25, 0) == Approx(1.0));
        REQUIRE(b.evaluate(0, 0.25, 1) == Approx(-4.0));
        REQUIRE(b.evaluate(1, 0.25, 1) == Approx(4.0));
        REQUIRE(b.evaluate(2, 0.25, 1) == Approx(0.0).margin(1e-13));
    }

    SECTION("one-sided derivatives at an interior knot") {
        REQUIRE(b.one_sided(1, 1, 1, false) == Approx(4.0));
        REQUIRE(b.one_sided(1, 1, 1, true) == Approx(-4.0));
        REQUIRE(b.one_sided(2, 1, 1, true) == Approx(4.0));
        REQUIRE(b.one_sided(0, 1, 1, true) == Approx(0.0).margin(1e-13));
    }

    SECTION("segments carry the global polynomial coefficients") {
        const Vector rising = b.segment(1, 0);
        REQUIRE(rising[0] == Approx(0.0).margin(1e-14));
        REQUIRE(rising[1] == Approx(4.0));
        const Vector falling = b.segment(1, 1);
        REQUIRE(falling[0] == Approx(2.0));
        REQUIRE(falling[1] == Approx(-4.0));
    }

    SECTION("support bookkeeping") {
        REQUIRE(b.first_interval(0) == 0);
        REQUIRE(b.last_interval(0) == 0);
        REQUIRE(b.first_interval(2) == 1);
        REQUIRE(b.last_interval(2) == 2);
        REQUIRE(b.active_on(2, 1));
        REQUIRE(b.active_on(2, 2));
        REQUIRE_FALSE(b.active_on(0, 1));
        REQUIRE_FALSE(b.active_on(2, 0));
    }

    SECTION("end jets") {
        const Vector j = b.jet(1, 0, true, 2);
        REQUIRE(j[0] == Approx(1.0));
        REQUIRE(j[1] == Approx(4.0));
    }
}

TEST_CASE("order four boundary conditions pin end derivatives", "[basis]") {
    const BrokenBasis b(powers(4), KnotGrid({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}));
    REQUIRE(b.count() == 8);

    SECTION("progressively deeper zeros at the left end") {
        REQUIRE(b.evaluate(0, 0.0, 0) == Approx(1.0));
        REQUIRE(b.evaluate(1, 0.0, 0) == Approx(0.0).margin(1e-12));
        REQUIRE(b.evaluate(2, 0.0, 0) == Approx(0.0).margin(1e-12));
        REQUIRE(b.evaluate(2, 0.0, 1) == Approx(0.0).margin(1e-11));
        REQUIRE(b.evaluate(3, 0.0, 0) == Approx(0.0).margin(1e-12));
        REQUIRE(b.evaluate(3, 0.0, 1) == Approx(0.0).margin(1e-11));
        REQUIRE(b.evaluate(3, 0.0, 2) == Approx(0.0).margin(1e-9));
    }

    SECTION("the first released derivative is nonzero and reproducible") {
        REQUIRE(b.evaluate(1, 0.0, 1) == Approx(15.0));
        REQUIRE(b.evaluate(2, 0.0, 2) == Approx(75.0));
        REQUIRE(b.evaluate(3, 0.0, 3) == Approx(125.0));
    }

    SECTION("the right end mirrors the left") {
        REQUIRE(b.evaluate(7, 1.0, 0) == Approx(1.0));
        REQUIRE(b.evaluate(6, 1.0, 1) == Approx(-15.0));
        REQUIRE(b.evaluate(5, 1.0, 2) == Approx(75.0));
        REQUIRE(b.evaluate(6, 1.0, 0) == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("partition of unity holds on every grid", "[basis]") {
    const double xs[] = {0.0, 0.07, 0.25, 0.4999, 0.5, 0.81, 1.0};

    SECTION("cubic polynomial family, equispaced") {
        const BrokenBasis b(powers(4), KnotGrid({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}));
        for (double x : xs) {
            double s = 0.0;
            for (double v : b.evaluate_all(x, 0)) s += v;
            REQUIRE(s == Approx(1.0).epsilon(1e-12));
        }
    }

    SECTION("trigonometric family, nonequispaced") {
        const BrokenBasis b(trig4(), NONEQ);
        REQUIRE(b.count() == 9);
        for (double x : xs) {
            double s = 0.0;
            for (double v : b.evaluate_all(x, 0)) s += v;
            REQUIRE(s == Approx(1.0).epsilon(1e-11));
        }
    }
}

TEST_CASE("pieces join with maximal smoothness", "[basis]") {
    const BrokenBasis b(trig4(), NONEQ);
    const std::size_t nu = b.order();

    double top_jump = 0.0;
    for (std::size_t m = 1; m + 1 < b.grid().size(); ++m) {
        for (std::size_t k = 0; k < b.count(); ++k) {
            for (std::size_t r = 0; r + 1 < nu; ++r) {
                const double jump = b.one_sided(k, m, static_cast<int>(r), true) -
                                    b.one_sided(k, m, static_cast<int>(r), false);
                REQUIRE(jump == Approx(0.0).margin(1e-8));
            }
            top_jump = std::max(top_jump,
                                std::abs(b.one_sided(k, m, static_cast<int>(nu) - 1, true) -
                                         b.one_sided(k, m, static_cast<int>(nu) - 1, false)));
        }
    }
    // The pieces are genuinely broken: the top derivative does jump somewhere.
    REQUIRE(top_jump > 1.0);
}

TEST_CASE("hat gram matrix matches the closed form", "[basis]") {
    const BrokenBasis b(powers(2), HAT5);
    const Matrix g = b.gram();
    const double diag[5] = {1.0 / 12, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 12};
    for (std::size_t k = 0; k < 5; ++k) REQUIRE(g(k, k) == Approx(diag[k]).margin(1e-13));
    for (std::size_t k = 0; k + 1 < 5; ++k) {
        REQUIRE(g(k, k + 1) == Approx(1.0 / 24).margin(1e-13));
        REQUIRE(g(k + 1, k) == Approx(1.0 / 24).margin(1e-13));
    }
    for (std::size_t k = 0; k + 2 < 5; ++k)
        REQUIRE(g(k, k + 2) == Approx(0.0).margin(1e-14));
}

TEST_CASE("hat moments match the closed form", "[basis]") {
    const BrokenBasis b(powers(2), HAT5);
    const Matrix m = b.moments(1);
    REQUIRE(m.rows() == 2);
    const double q0[5] = {0.125, 0.25, 0.25, 0.25, 0.125};
    const double q1[5] = {1.0 / 96, 1.0 / 16, 1.0 / 8, 3.0 / 16, 11.0 / 96};
    for (std::size_t k = 0; k < 5; ++k) {
        REQUIRE(m(0, k) == Approx(q0[k]).margin(1e-13));
        REQUIRE(m(1, k) == Approx(q1[k]).margin(1e-13));
    }
}

TEST_CASE("zeroth moments always sum to one", "[basis]") {
    const BrokenBasis b(trig4(), NONEQ);
    const Matrix m = b.moments(0);
    double total = 0.0;
    for (std::size_t k = 0; k < b.count(); ++k) total += m(0, k);
    REQUIRE(total == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("expansion matrix reproduces the family members", "[basis]") {
    SECTION("hats expand constants and the identity") {
        const BrokenBasis b(powers(2), HAT5);
        const Matrix e = b.expansion_matrix();
        REQUIRE(e.rows() == 5);
        REQUIRE(e.cols() == 2);
        for (std::size_t k = 0; k < 5; ++k) {
            REQUIRE(e(k, 0) == Approx(1.0));
            REQUIRE(e(k, 1) == Approx(0.25 * static_cast<double>(k)).margin(1e-13));
        }
    }

    SECTION("every member is reproduced pointwise on a nonequispaced grid") {
        const BrokenBasis b(powers(4), NONEQ);
        const Matrix e = b.expansion_matrix();
        for (int q = 0; q < 4; ++q) {
            for (double x : {0.05, 0.3, 0.62, 0.97}) {
                const Vector phi = b.evaluate_all(x, 0);
                double s = 0.0;
                for (std::size_t k = 0; k < b.count(); ++k)
                    s += e(k, static_cast<std::size_t>(q)) * phi[k];
                REQUIRE(s == Approx(b.family().member(q).eval(x, 0)).margin(1e-10));
            }
        }
    }
}

TEST_CASE("projection recovers in-span functions exactly", "[basis]") {
    SECTION("linear target on hats lands on the knot values") {
        const BrokenBasis b(powers(2), HAT5);
        const auto pr = b.project([](double x) { return 0.25 + 0.5 * x; });
        for (std::size_t k = 0; k < 5; ++k)
            REQUIRE(pr.coeffs[k] == Approx(0.25 + 0.125 * static_cast<double>(k)));
        REQUIRE(pr.l2_error < 1e-12);
    }

    SECTION("in-span trigonometric target projects to machine precision") {
        const BrokenBasis b(trig4(), NONEQ);
        const double w = 8.0 * std::atan(1.0);
        const auto pr = b.project([w](double x) { return std::cos(w * x); });
        REQUIRE(pr.l2_error < 1e-10);
    }

    SECTION("out-of-span target leaves a visible residual") {
        const BrokenBasis b(powers(2), HAT5);
        const auto pr = b.project([](double x) { return std::sin(4.0 * x); });
        REQUIRE(pr.l2_error > 1e-4);
        REQUIRE(pr.l2_error < 1e-1);
    }
}

TEST_CASE("too few knots for the order are rejected", "[basis]") {
    REQUIRE_THROWS_AS(BrokenBasis(powers(2), KnotGrid({0.0, 0.5, 1.0})), SizeError);
    REQUIRE_THROWS_AS(BrokenBasis(powers(4), KnotGrid({0.0, 0.25, 0.5, 0.75, 1.0})), SizeError);
    REQUIRE_NOTHROW(BrokenBasis(powers(2), KnotGrid({0.0, 1.0 / 3, 2.0 / 3, 1.0})));
}
