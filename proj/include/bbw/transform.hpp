#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbw/broken_basis.hpp"
#include "bbw/errors.hpp"
#include "bbw/knots.hpp"
#include "bbw/lifting.hpp"
#include "bbw/linalg.hpp"
#include "bbw/refinement.hpp"
#include "bbw/smooth_family.hpp"

// Full multilevel machinery for one family over one knot hierarchy: bases at
// every level, refinement matrices, factored lifting schemes, and the
// forward/inverse pyramid transforms. Construction does all the dense design
// work once; each transform is a sequence of sparse passes, linear in the
// number of coefficients.

namespace bbw {

struct CoefficientPyramid {
    Vector coarse;                // coefficients on grid 0
    std::vector<Vector> details;  // details[j]: band between grids j and j+1
};

class TransformPlan {
public:
    TransformPlan(SmoothFamily family, KnotHierarchy hierarchy, std::size_t vanishing_moments = 2)
        : family_(std::move(family)), hier_(std::move(hierarchy)), p_(vanishing_moments) {
        if (p_ < 1) throw DomainError("need at least one vanishing moment");
        const std::size_t nu = static_cast<std::size_t>(family_.order());
        bases_.reserve(hier_.depth());
        for (std::size_t j = 0; j < hier_.depth(); ++j)
            bases_.emplace_back(family_, hier_.grid(j));
        levels_.reserve(hier_.refinements());
        for (std::size_t j = 0; j < hier_.refinements(); ++j) {
            Level lv{refinement_matrix(bases_[j], bases_[j + 1]),
                     InteriorSplit{},
                     LiftingScheme{},
                     Matrix(0, 0),
                     std::nullopt};
            lv.split = split_interior(lv.h, nu);
            lv.scheme = factor_interior(lv.split.heo, nu);
            const std::size_t nb = lv.split.bl + lv.split.br;
            if (nb > 0) lv.hbb_lu.emplace(lv.split.hbb);

            const Matrix fm = bases_[j + 1].moments(static_cast<int>(p_) - 1);
            Matrix fmi(p_, lv.scheme.fine_count);
            for (std::size_t q = 0; q < p_; ++q)
                for (std::size_t l = 0; l < lv.scheme.fine_count; ++l)
                    fmi(q, l) = fm(q, lv.split.bl + l);
            // Coarse moments pushed through the two-scale relation: for non
            // polynomial members the fine subdivision approximates the true
            // integral strictly better, and the update design then cancels
            // exactly the quantity the vanishing-moment check measures.
            Matrix cmi(p_, lv.scheme.coarse_count);
            for (std::size_t q = 0; q < p_; ++q)
                for (std::size_t m = 0; m < lv.scheme.coarse_count; ++m) {
                    double s = 0.0;
                    for (std::size_t l = 0; l < lv.scheme.fine_count; ++l)
                        s += fmi(q, l) * lv.split.heo(l, m);
                    cmi(q, m) = s;
                }
            const Matrix g0 = reconstruct_factors(lv.scheme).second;
            design_final_update(lv.scheme, g0, cmi, fmi, p_);
            lv.highpass = composite_highpass(lv.split.heo, g0, lv.scheme);
            levels_.push_back(std::move(lv));
        }
    }

    const SmoothFamily& family() const { return family_; }
    const KnotHierarchy& hierarchy() const { return hier_; }
    std::size_t levels() const { return levels_.size(); }
    std::size_t vanishing_moments() const { return p_; }
    const BrokenBasis& basis(std::size_t j) const { return bases_.at(j); }
    const BandMatrix& refinement(std::size_t j) const { return levels_.at(j).h; }
    const InteriorSplit& split(std::size_t j) const { return levels_.at(j).split; }
    const LiftingScheme& scheme(std::size_t j) const { return levels_.at(j).scheme; }
    const Matrix& highpass(std::size_t j) const { return levels_.at(j).highpass; }

    // Wavelet m of the band between grids j and j+1, evaluated pointwise.
    double wavelet_value(std::size_t j, std::size_t m, double x, int deriv = 0) const {
        const Level& lv = levels_.at(j);
        if (m >= lv.scheme.detail_count) throw SizeError("wavelet index out of range");
        double v = 0.0;
        for (std::size_t l = 0; l < lv.scheme.fine_count; ++l) {
            const double g = lv.highpass(l, m);
            if (g != 0.0) v += g * bases_[j + 1].evaluate(lv.split.bl + l, x, deriv);
        }
        return v;
    }

    // One analysis step: coefficients on grid j+1 in, coefficients on grid j
    // plus the detail band out.
    std::pair<Vector, Vector> forward_step(std::size_t j, const Vector& fine,
                                           OpCount* ops = nullptr) const {
        const Level& lv = levels_.at(j);
        if (fine.size() != bases_[j + 1].count())
            throw SizeError("forward step " + std::to_string(j) + ": expected " +
                            std::to_string(bases_[j + 1].count()) + " coefficients, got " +
                            std::to_string(fine.size()));
        const InteriorSplit& sp = lv.split;
        const std::size_t nb = sp.bl + sp.br;

        // Boundary functions refine only among themselves; peel them off
        // first so the interior sees a clean even/odd problem.
        Vector sb(nb);
        for (std::size_t i = 0; i < sp.bl; ++i) sb[i] = fine[i];
        for (std::size_t i = 0; i < sp.br; ++i) sb[sp.bl + i] = fine[sp.fine_total - sp.br + i];
        if (nb > 0) {
            sb = lv.hbb_lu->solve(sb);
            if (ops) ops->mul_adds += nb * nb;
        }
        Vector t(lv.scheme.fine_count);
        for (std::size_t l = 0; l < t.size(); ++l) t[l] = fine[sp.bl + l];
        for (const Tap& tap : sp.heo_b) t[tap.row] -= tap.value * sb[tap.col];
        if (ops) ops->mul_adds += sp.heo_b.size();

        Vector ve(lv.scheme.coarse_count), vo(lv.scheme.detail_count);
        for (std::size_t l = 0; l < t.size(); ++l) {
            if (l % 2 == 0)
                ve[l / 2] = t[l];
            else
                vo[l / 2] = t[l];
        }
        analyze(lv.scheme, ve, vo, ops);

        Vector coarse(bases_[j].count());
        for (std::size_t i = 0; i < sp.bl; ++i) coarse[i] = sb[i];
        for (std::size_t i = 0; i < sp.br; ++i) coarse[sp.coarse_total - sp.br + i] = sb[sp.bl + i];
        for (std::size_t m = 0; m < ve.size(); ++m) coarse[sp.bl + m] = ve[m];
        return {std::move(coarse), std::move(vo)};
    }

    // Exact inverse of forward_step.
    Vector inverse_step(std::size_t j, const Vector& coarse, const Vector& details,
                        OpCount* ops = nullptr) const {
        const Level& lv = levels_.at(j);
        if (coarse.size() != bases_[j].count())
            throw SizeError("inverse step " + std::to_string(j) + ": expected " +
                            std::to_string(bases_[j].count()) + " coefficients, got " +
                            std::to_string(coarse.size()));
        if (details.size() != lv.scheme.detail_count)
            throw SizeError("inverse step " + std::to_string(j) + ": expected " +
                            std::to_string(lv.scheme.detail_count) + " details, got " +
                            std::to_string(details.size()));
        const InteriorSplit& sp = lv.split;
        const std::size_t nb = sp.bl + sp.br;

        Vector sb(nb);
        for (std::size_t i = 0; i < sp.bl; ++i) sb[i] = coarse[i];
        for (std::size_t i = 0; i < sp.br; ++i) sb[sp.bl + i] = coarse[sp.coarse_total - sp.br + i];
        Vector ve(lv.scheme.coarse_count);
        for (std::size_t m = 0; m < ve.size(); ++m) ve[m] = coarse[sp.bl + m];
        Vector vo = details;
        synthesize(lv.scheme, ve, vo, ops);

        Vector fine(bases_[j + 1].count(), 0.0);
        for (std::size_t l = 0; l < lv.scheme.fine_count; ++l)
            fine[sp.bl + l] = (l % 2 == 0) ? ve[l / 2] : vo[l / 2];
        for (const Tap& tap : sp.heo_b) fine[sp.bl + tap.row] += tap.value * sb[tap.col];
        if (ops) ops->mul_adds += sp.heo_b.size();
        for (std::size_t g = 0; g < sp.fine_total; ++g) {
            if (!sp.is_boundary_row(g)) continue;
            double v = 0.0;
            for (std::size_t c = 0; c < nb; ++c) v += sp.hbb(sp.boundary_slot_row(g), c) * sb[c];
            fine[g] = v;
        }
        if (ops) ops->mul_adds += nb * nb;
        return fine;
    }

    // Full analysis from the finest grid down to grid 0.
    CoefficientPyramid forward(const Vector& finest, OpCount* ops = nullptr) const {
        CoefficientPyramid pyr;
        pyr.details.resize(levels_.size());
        Vector s = finest;
        for (std::size_t j = levels_.size(); j-- > 0;) {
            auto [coarse, d] = forward_step(j, s, ops);
            pyr.details[j] = std::move(d);
            s = std::move(coarse);
        }
        pyr.coarse = std::move(s);
        return pyr;
    }

    // Full synthesis back to the finest grid.
    Vector inverse(const CoefficientPyramid& pyr, OpCount* ops = nullptr) const {
        if (pyr.details.size() != levels_.size())
            throw SizeError("pyramid has " + std::to_string(pyr.details.size()) +
                            " detail bands, plan has " + std::to_string(levels_.size()));
        Vector s = pyr.coarse;
        for (std::size_t j = 0; j < levels_.size(); ++j)
            s = inverse_step(j, s, pyr.details[j], ops);
        return s;
    }

private:
    struct Level {
        BandMatrix h;
        InteriorSplit split;
        LiftingScheme scheme;
        Matrix highpass;
        std::optional<LuFactors> hbb_lu;
    };

    SmoothFamily family_;
    KnotHierarchy hier_;
    std::size_t p_;
    std::vector<BrokenBasis> bases_;
    std::vector<Level> levels_;
};

} // namespace bbw
