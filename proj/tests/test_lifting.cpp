#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bbw/broken_basis.hpp"
#include "bbw/errors.hpp"
#include "bbw/knots.hpp"
#include "bbw/lifting.hpp"
#include "bbw/refinement.hpp"
#include "bbw/smooth_family.hpp"

using namespace bbw;
using Catch::Approx;

namespace {

SmoothFamily powers(int nu) {
    std::vector<SmoothFunction> m;
    for (int d = 0; d < nu; ++d) m.push_back(SmoothFunction::power(d));
    return SmoothFamily(std::move(m));
}

KnotGrid equispaced(std::size_t n) {
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i)
        k[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    k.front() = 0.0;
    k.back() = 1.0;
    return KnotGrid(std::move(k));
}

struct HatSetup {
    BrokenBasis coarse, fine;
    BandMatrix h;
    InteriorSplit split;

    HatSetup()
        : coarse(powers(2), equispaced(5)),
          fine(powers(2), refine_midpoint(coarse.grid())),
          h(refinement_matrix(coarse, fine)),
          split(split_interior(h, 2)) {}
};

} // namespace

TEST_CASE("interior split separates boundary blocks by order", "[lifting]") {
    SECTION("order two has no boundary rows") {
        const HatSetup s;
        REQUIRE(s.split.bl == 0);
        REQUIRE(s.split.br == 0);
        REQUIRE(s.split.fine_interior() == 9);
        REQUIRE(s.split.coarse_interior() == 5);
        REQUIRE(s.split.heo(4, 2) == Approx(1.0).margin(1e-12));
        REQUIRE(s.split.heo(3, 2) == Approx(0.5).margin(1e-12));
    }

    SECTION("order four peels one row and column per side") {
        const BrokenBasis coarse(powers(4), equispaced(9));
        const BrokenBasis fine(powers(4), refine_midpoint(coarse.grid()));
        const BandMatrix h = refinement_matrix(coarse, fine);
        const InteriorSplit sp = split_interior(h, 4);
        REQUIRE(sp.bl == 1);
        REQUIRE(sp.br == 1);
        REQUIRE(sp.fine_total == 19);
        REQUIRE(sp.coarse_total == 11);
        REQUIRE(sp.fine_interior() == 17);
        REQUIRE(sp.coarse_interior() == 9);
        REQUIRE(sp.hbb(0, 0) == Approx(h(0, 0)));
        REQUIRE(sp.is_boundary_row(0));
        REQUIRE(sp.is_boundary_row(18));
        REQUIRE_FALSE(sp.is_boundary_row(1));
    }

    SECTION("a coupling from boundary rows into interior columns is rejected") {
        BandMatrix bad(7, 4);
        bad.set_column(0, 0, {1.0, 0.5});
        bad.set_column(1, 0, {0.2, 0.5, 1.0, 0.5});
        bad.set_column(2, 3, {0.5, 1.0, 0.5});
        bad.set_column(3, 5, {0.5, 1.0});
        REQUIRE_THROWS_AS(split_interior(bad, 4), StructureError);
    }
}

TEST_CASE("hat factoring is a single predict step", "[lifting]") {
    const HatSetup s;
    const LiftingScheme scheme = factor_interior(s.split.heo, 2);

    REQUIRE(scheme.fine_count == 9);
    REQUIRE(scheme.coarse_count == 5);
    REQUIRE(scheme.detail_count == 4);
    REQUIRE(scheme.leading_predict);
    REQUIRE(scheme.update_pairs == 0);
    REQUIRE(scheme.steps.size() == 1);
    REQUIRE(scheme.steps[0].kind == LiftStep::Kind::InitialPredict);

    SECTION("the predictor averages the two even neighbors") {
        const LiftStep& p0 = scheme.steps[0];
        REQUIRE(p0.taps.size() == 8);
        for (const Tap& t : p0.taps) {
            REQUIRE((t.col == t.row || t.col == t.row + 1));
            REQUIRE(t.value == Approx(0.5).margin(1e-12));
        }
    }

    SECTION("the diagonal normalization is trivial for hats") {
        for (double d : scheme.scale) REQUIRE(d == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("cascade shape follows the order", "[lifting]") {
    // (order, update-predict pairs, leading bare predict)
    const struct { int nu; std::size_t u; bool lead; } table[] = {
        {2, 0, true}, {3, 1, false}, {4, 1, false},
        {5, 1, true}, {6, 1, true}, {7, 2, false},
    };
    for (const auto& row : table) {
        const std::size_t n = static_cast<std::size_t>(row.nu) + 3;
        const BrokenBasis coarse(powers(row.nu), equispaced(n));
        const BrokenBasis fine(powers(row.nu), refine_midpoint(coarse.grid()));
        const BandMatrix h = refinement_matrix(coarse, fine);
        const InteriorSplit sp = split_interior(h, static_cast<std::size_t>(row.nu));
        const LiftingScheme scheme = factor_interior(sp.heo, static_cast<std::size_t>(row.nu));
        INFO("order " << row.nu);
        REQUIRE(scheme.update_pairs == row.u);
        REQUIRE(scheme.leading_predict == row.lead);
        REQUIRE(scheme.steps.size() == 2 * row.u + (row.lead ? 1 : 0));
    }
}

TEST_CASE("factors rebuild the interior refinement block", "[lifting]") {
    for (int nu : {2, 3, 4, 5}) {
        const std::size_t n = static_cast<std::size_t>(nu) + 4;
        const BrokenBasis coarse(powers(nu), equispaced(n));
        const BrokenBasis fine(powers(nu), refine_midpoint(coarse.grid()));
        const BandMatrix h = refinement_matrix(coarse, fine);
        const InteriorSplit sp = split_interior(h, static_cast<std::size_t>(nu));
        const LiftingScheme scheme = factor_interior(sp.heo, static_cast<std::size_t>(nu));
        const auto [heo_rebuilt, g0] = reconstruct_factors(scheme);

        INFO("order " << nu);
        REQUIRE(heo_rebuilt.rows() == sp.heo.rows());
        double worst = 0.0;
        for (std::size_t r = 0; r < heo_rebuilt.rows(); ++r)
            for (std::size_t c = 0; c < heo_rebuilt.cols(); ++c)
                worst = std::max(worst, std::abs(heo_rebuilt(r, c) - sp.heo(r, c)));
        REQUIRE(worst < 1e-10);

        // The zero-update highpass inverts the even part on the odd slots.
        REQUIRE(g0.rows() == scheme.fine_count);
        REQUIRE(g0.cols() == scheme.detail_count);
    }
}

TEST_CASE("analysis and synthesis invert each other", "[lifting]") {
    const BrokenBasis coarse(powers(4), equispaced(9));
    const BrokenBasis fine(powers(4), refine_midpoint(coarse.grid()));
    const BandMatrix h = refinement_matrix(coarse, fine);
    const InteriorSplit sp = split_interior(h, 4);
    const LiftingScheme scheme = factor_interior(sp.heo, 4);

    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector ve(scheme.coarse_count), vo(scheme.detail_count);
    for (double& v : ve) v = u(rng);
    for (double& v : vo) v = u(rng);
    const Vector ve0 = ve, vo0 = vo;

    OpCount ops;
    analyze(scheme, ve, vo, &ops);
    REQUIRE(ops.mul_adds > 0);
    bool changed = false;
    for (std::size_t i = 0; i < ve.size(); ++i)
        if (ve[i] != ve0[i]) changed = true;
    REQUIRE(changed);

    synthesize(scheme, ve, vo, nullptr);
    for (std::size_t i = 0; i < ve.size(); ++i) REQUIRE(ve[i] == Approx(ve0[i]).margin(1e-12));
    for (std::size_t i = 0; i < vo.size(); ++i) REQUIRE(vo[i] == Approx(vo0[i]).margin(1e-12));
}

TEST_CASE("final update enforces the moment conditions", "[lifting]") {
    const HatSetup s;
    LiftingScheme scheme = factor_interior(s.split.heo, 2);
    const Matrix g0 = reconstruct_factors(scheme).second;

    const Matrix cm = s.coarse.moments(1);
    const Matrix fm = s.fine.moments(1);
    design_final_update(scheme, g0, cm, fm, 2);

    SECTION("the interior update weights are the classical quarters") {
        const Matrix u = scheme.update_dense();
        REQUIRE(u.rows() == 5);
        REQUIRE(u.cols() == 4);
        const double col0[5] = {0.75, 0.125, 0.0, 0.0, 0.0};
        const double col1[5] = {0.0, 0.25, 0.25, 0.0, 0.0};
        const double col3[5] = {0.0, 0.0, 0.0, 0.125, 0.75};
        for (std::size_t r = 0; r < 5; ++r) {
            REQUIRE(u(r, 0) == Approx(col0[r]).margin(1e-10));
            REQUIRE(u(r, 1) == Approx(col1[r]).margin(1e-10));
            REQUIRE(u(r, 3) == Approx(col3[r]).margin(1e-10));
        }
    }

    SECTION("the composite highpass kills both moments") {
        const Matrix g = composite_highpass(s.split.heo, g0, scheme);
        REQUIRE(g.rows() == 9);
        REQUIRE(g.cols() == 4);

        const double wavelet[9] = {0.0, -0.125, -0.25, 0.75, -0.25, -0.125, 0.0, 0.0, 0.0};
        for (std::size_t r = 0; r < 9; ++r)
            REQUIRE(g(r, 1) == Approx(wavelet[r]).margin(1e-10));

        for (std::size_t q = 0; q < 2; ++q)
            for (std::size_t m = 0; m < 4; ++m) {
                double s2 = 0.0;
                for (std::size_t l = 0; l < 9; ++l) s2 += fm(q, l) * g(l, m);
                REQUIRE(s2 == Approx(0.0).margin(1e-12));
            }
    }
}

TEST_CASE("degenerate factoring inputs are rejected", "[lifting]") {
    SECTION("wide blocks cannot be factored") {
        REQUIRE_THROWS_AS(factor_interior(Matrix(2, 2), 2), SizeError);
    }

    SECTION("parity sizes must match one insertion per interval") {
        REQUIRE_THROWS_AS(factor_interior(Matrix(6, 2), 2), SizeError);
    }

    SECTION("a vanishing pivot is reported") {
        Matrix zeros(3, 2);
        REQUIRE_THROWS_AS(factor_interior(zeros, 2), FactoringError);
    }

    SECTION("singular moment systems are reported") {
        const HatSetup s;
        LiftingScheme scheme = factor_interior(s.split.heo, 2);
        const Matrix g0 = reconstruct_factors(scheme).second;
        Matrix cm(2, 5, 1.0), fm(2, 9, 1.0);
        REQUIRE_THROWS_AS(design_final_update(scheme, g0, cm, fm, 2), DesignError);
    }
}
