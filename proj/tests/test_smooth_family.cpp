#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "bbw/errors.hpp"
#include "bbw/smooth_family.hpp"

using namespace bbw;
using Catch::Approx;

namespace {

const double TWO_PI = 8.0 * std::atan(1.0);

SmoothFamily powers(int nu) {
    std::vector<SmoothFunction> m;
    for (int d = 0; d < nu; ++d) m.push_back(SmoothFunction::power(d));
    return SmoothFamily(std::move(m));
}

SmoothFamily trig4() {
    return SmoothFamily({SmoothFunction::power(0), SmoothFunction::power(1),
                         SmoothFunction::sine(1.0), SmoothFunction::cosine(1.0)});
}

} // namespace

TEST_CASE("monomials and their derivatives", "[family]") {
    const double u = 0.5;
    const SmoothFunction p3 = SmoothFunction::power(3);
    REQUIRE(p3.eval(u, 0) == Approx(u * u * u));
    REQUIRE(p3.eval(u, 1) == Approx(3.0 * u * u));
    REQUIRE(p3.eval(u, 2) == Approx(6.0 * u));
    REQUIRE(p3.eval(u, 3) == Approx(6.0));
    REQUIRE(p3.eval(u, 4) == 0.0);
    REQUIRE(SmoothFunction::power(0).eval(0.3, 0) == 1.0);
    REQUIRE(SmoothFunction::power(0).eval(0.3, 1) == 0.0);
}

TEST_CASE("centered monomials shift the expansion point", "[family]") {
    const SmoothFunction c = SmoothFunction::centered_power(2, 0.25);
    REQUIRE(c.eval(0.75, 0) == Approx(0.25));
    REQUIRE(c.eval(0.75, 1) == Approx(1.0));
    REQUIRE(c.eval(0.75, 2) == Approx(2.0));
    REQUIRE_THROWS_AS(SmoothFunction::centered_power(2, 1.5), DomainError);
    REQUIRE_THROWS_AS(SmoothFunction::power(-1), DomainError);
}

TEST_CASE("trigonometric members cycle through their derivatives", "[family]") {
    const SmoothFunction s = SmoothFunction::sine(1.0);
    const SmoothFunction c = SmoothFunction::cosine(1.0);
    const double x = 0.19;
    REQUIRE(s.eval(x, 0) == Approx(std::sin(TWO_PI * x)));
    REQUIRE(s.eval(x, 1) == Approx(TWO_PI * std::cos(TWO_PI * x)));
    REQUIRE(s.eval(x, 2) == Approx(-TWO_PI * TWO_PI * std::sin(TWO_PI * x)));
    REQUIRE(c.eval(x, 1) == Approx(-TWO_PI * std::sin(TWO_PI * x)));
    REQUIRE(c.eval(x, 4) == Approx(std::pow(TWO_PI, 4) * std::cos(TWO_PI * x)));
    REQUIRE_THROWS_AS(SmoothFunction::sine(0.0), DomainError);
    REQUIRE_THROWS_AS(SmoothFunction::cosine(-2.0), DomainError);
}

TEST_CASE("exponential members", "[family]") {
    const SmoothFunction e = SmoothFunction::exponential(-1.5);
    const double x = 0.4;
    REQUIRE(e.eval(x, 0) == Approx(std::exp(-1.5 * x)));
    REQUIRE(e.eval(x, 3) == Approx(std::pow(-1.5, 3) * std::exp(-1.5 * x)));
}

TEST_CASE("tabulated members answer only on their grid", "[family]") {
    auto data = std::make_shared<TabulatedData>();
    data->grid = {0.0, 0.5, 1.0};
    data->jets = {{1.0, 0.0}, {2.0, -1.0}, {0.5, 3.0}};
    const SmoothFunction t = SmoothFunction::tabulated(data);
    REQUIRE(t.eval(0.5, 0) == Approx(2.0));
    REQUIRE(t.eval(0.5, 1) == Approx(-1.0));
    REQUIRE(t.eval(1.0, 0) == Approx(0.5));
    REQUIRE_THROWS_AS(t.eval(0.25, 0), DomainError);
    REQUIRE_THROWS_AS(t.eval(0.5, 2), DomainError);
    REQUIRE_FALSE(t.analytic());
}

TEST_CASE("family construction and bounds", "[family]") {
    REQUIRE_THROWS_AS(SmoothFamily({SmoothFunction::power(0)}), DomainError);

    const SmoothFamily f = powers(4);
    REQUIRE(f.order() == 4);
    REQUIRE(f.analytic());
    REQUIRE(f.max_deriv_supported() == 8);
    REQUIRE(f.polynomial_degrees_downward_closed());

    SECTION("evaluate fills a jet table in member order") {
        const Matrix jets = f.evaluate(0.5, 2);
        REQUIRE(jets.rows() == 3);
        REQUIRE(jets.cols() == 4);
        REQUIRE(jets(0, 2) == Approx(0.25));
        REQUIRE(jets(1, 2) == Approx(1.0));
        REQUIRE(jets(2, 3) == Approx(3.0));
    }

    SECTION("points and derivative orders outside the contract are rejected") {
        REQUIRE_THROWS_AS(f.evaluate(-0.01, 0), DomainError);
        REQUIRE_THROWS_AS(f.evaluate(1.01, 0), DomainError);
        REQUIRE_THROWS_AS(f.evaluate(0.5, 9), DomainError);
    }

    SECTION("non-polynomial families support fewer derivatives") {
        auto data = std::make_shared<TabulatedData>();
        data->grid = {0.0, 1.0};
        data->jets = {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
        const SmoothFamily g({SmoothFunction::power(0), SmoothFunction::power(1),
                              SmoothFunction::tabulated(data)});
        REQUIRE_FALSE(g.analytic());
        REQUIRE(g.max_deriv_supported() == 2);
    }
}

TEST_CASE("localization recenters polynomial members", "[family]") {
    const SmoothFamily f = powers(3);
    const SmoothFamily g = f.localize(0.3);
    const double x = 0.8;
    REQUIRE(g.member(0).eval(x, 0) == Approx(1.0));
    REQUIRE(g.member(1).eval(x, 0) == Approx(x - 0.3));
    REQUIRE(g.member(2).eval(x, 0) == Approx((x - 0.3) * (x - 0.3)));
    REQUIRE(g.member(2).eval(x, 1) == Approx(2.0 * (x - 0.3)));
}

TEST_CASE("closure under affine maps separates the families", "[family]") {
    SECTION("polynomial spans are affinely closed") {
        REQUIRE(powers(4).closure_residual(0.5, 0.25, 64) < 1e-12);
        REQUIRE(powers(2).closure_residual(0.3, 0.1, 32) < 1e-12);
    }

    SECTION("the trigonometric span is not") {
        REQUIRE(trig4().closure_residual(0.5, 0.25, 64) > 1e-3);
    }

    SECTION("identity map is always closed") {
        REQUIRE(trig4().closure_residual(1.0, 0.0, 64) < 1e-10);
    }

    SECTION("invalid maps and sampling are rejected") {
        REQUIRE_THROWS_AS(powers(2).closure_residual(-0.5, 0.0, 32), DomainError);
        REQUIRE_THROWS_AS(powers(2).closure_residual(0.5, 0.25, 3), DomainError);
        REQUIRE_THROWS_AS(powers(2).closure_residual(0.1, 2.0, 32), DomainError);
    }
}
