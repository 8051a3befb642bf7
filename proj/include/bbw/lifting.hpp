#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bbw/errors.hpp"
#include "bbw/linalg.hpp"
#include "bbw/refinement.hpp"

// Lifting factorization of the interior refinement block. After splitting
// fine functions into even (kept) and odd (new) slots, alternate elimination
// steps strip diagonals off the two-scale bands until the even block is
// diagonal and the odd block vanishes; what remains is a sequence of sparse
// predict/update passes plus one diagonal scaling, applied in O(n) per
// transform. A final update with taps chosen by moment matching gives the
// wavelets their vanishing moments.

namespace bbw {

struct Tap {
    std::size_t row, col;
    double value;
};

struct LiftStep {
    enum class Kind { InitialPredict, Predict, Update };
    Kind kind;
    std::vector<Tap> taps;
};

struct OpCount {
    std::size_t mul_adds = 0;
};

struct LiftingScheme {
    std::size_t fine_count = 0;    // interior fine slots = evens + odds
    std::size_t coarse_count = 0;  // even slots
    std::size_t detail_count = 0;  // odd slots
    std::vector<LiftStep> steps;   // analysis order
    Vector scale;                  // divides the evens after the cascade
    std::vector<Tap> update;       // final update: coarse += update * detail
    std::size_t update_pairs = 0;  // number of update/predict pairs in the cascade
    bool leading_predict = false;  // cascade opened with a bare predict

    Matrix update_dense() const {
        Matrix u(coarse_count, detail_count);
        for (const Tap& t : update) u(t.row, t.col) = t.value;
        return u;
    }
};

// Interior/boundary partition of a refinement matrix: the first ceil(nu/2)-1
// and last floor(nu/2)-1 rows and columns are boundary. Boundary fine
// functions never reach interior coarse ones, so that block must be exactly
// zero.
struct InteriorSplit {
    std::size_t bl = 0, br = 0;
    std::size_t fine_total = 0, coarse_total = 0;
    Matrix heo;                // interior fine x interior coarse
    Matrix hbb;                // boundary x boundary, fine rows x coarse cols
    std::vector<Tap> heo_b;    // interior fine rows x boundary coarse slots

    std::size_t fine_interior() const { return fine_total - bl - br; }
    std::size_t coarse_interior() const { return coarse_total - bl - br; }

    bool is_boundary_row(std::size_t g) const { return g < bl || g + br >= fine_total; }
    // Boundary slot order: leading block first, trailing block after.
    std::size_t boundary_slot_row(std::size_t g) const {
        return g < bl ? g : bl + (g - (fine_total - br));
    }
    std::size_t boundary_slot_col(std::size_t g) const {
        return g < bl ? g : bl + (g - (coarse_total - br));
    }
};

inline InteriorSplit split_interior(const BandMatrix& h, std::size_t nu) {
    InteriorSplit sp;
    sp.bl = (nu + 1) / 2 - 1;
    sp.br = nu / 2 - 1;
    sp.fine_total = h.rows();
    sp.coarse_total = h.cols();
    const std::size_t nb = sp.bl + sp.br;
    if (h.rows() < nb + 2 || h.cols() < nb + 2)
        throw SizeError("refinement matrix too small to split");
    const std::size_t fi = sp.fine_interior(), ci = sp.coarse_interior();

    for (std::size_t g = 0; g < sp.fine_total; ++g)
        if (sp.is_boundary_row(g))
            for (std::size_t c = sp.bl; c < sp.bl + ci; ++c)
                if (h(g, c) != 0.0)
                    throw StructureError("boundary fine row " + std::to_string(g) +
                                         " couples to interior column " + std::to_string(c));

    sp.heo = Matrix(fi, ci);
    for (std::size_t l = 0; l < fi; ++l)
        for (std::size_t m = 0; m < ci; ++m) sp.heo(l, m) = h(sp.bl + l, sp.bl + m);

    sp.hbb = Matrix(nb, nb);
    for (std::size_t g = 0; g < sp.fine_total; ++g) {
        if (!sp.is_boundary_row(g)) continue;
        for (std::size_t c = 0; c < sp.coarse_total; ++c) {
            if (c >= sp.bl && c < sp.bl + ci) continue;
            sp.hbb(sp.boundary_slot_row(g), sp.boundary_slot_col(c)) = h(g, c);
        }
    }

    for (std::size_t l = 0; l < fi; ++l)
        for (std::size_t c = 0; c < sp.coarse_total; ++c) {
            if (c >= sp.bl && c < sp.bl + ci) continue;
            const double v = h(sp.bl + l, c);
            if (v != 0.0) sp.heo_b.push_back({l, sp.boundary_slot_col(c), v});
        }
    return sp;
}

namespace detail {

// Structural support of the even/odd blocks inherited from the triangular
// corners of the interior refinement matrix: diagonal offset d = col - row
// loses rows at the top (superdiagonals) or bottom (subdiagonals).
inline bool block_entry_exists(bool odd_block, long p, long k, long ncols, long nrows,
                               long npr) {
    if (k < 0 || k >= ncols || p < 0 || p >= nrows) return false;
    const long d = k - p;
    if (odd_block) {
        if (d > 0 && p < d - 1) return false;
        if (d < 0 && p > npr + d - 1) return false;
    } else {
        if (d > 0 && p < d) return false;
        if (d < 0 && p > npr + d) return false;
    }
    return true;
}

struct KillResult {
    std::array<long, 2> band;
    std::vector<Tap> taps;  // the elimination matrix Q, row-major taps
};

// Eliminate the outermost diagonal(s) of `target` using `divisor`. Each row
// reduces to a scalar division because the matching cross terms are
// structurally absent. Bands are (col - row) offset ranges.
inline KillResult kill(Matrix& target, std::array<long, 2> tb, const Matrix& divisor,
                       std::array<long, 2> db, bool target_is_odd, long npr, long step_index) {
    const long wt = tb[1] - tb[0] + 1, wd = db[1] - db[0] + 1;
    const long nkill = wt - (wd - 1);
    if (nkill != 1 && nkill != 2)
        throw FactoringError("band widths leave " + std::to_string(nkill) +
                                 " diagonals to kill",
                             step_index);
    std::vector<std::pair<long, long>> kills;  // (target offset, divisor offset)
    if (nkill == 2) {
        kills = {{tb[0], db[0]}, {tb[1], db[1]}};
    } else if (std::abs(tb[0]) >= std::abs(tb[1])) {
        kills = {{tb[0], db[0]}};
    } else {
        kills = {{tb[1], db[1]}};
    }

    const long rows_t = static_cast<long>(target.rows());
    const long rows_d = static_cast<long>(divisor.rows());
    const long ncols = static_cast<long>(target.cols());
    KillResult res;
    for (long p = 0; p < rows_t; ++p)
        for (const auto& [x, dv] : kills) {
            const long t = x - dv;
            if (!block_entry_exists(target_is_odd, p, p + x, ncols, rows_t, npr)) continue;
            const double piv = (p + t >= 0 && p + t < rows_d)
                                   ? divisor(static_cast<std::size_t>(p + t),
                                             static_cast<std::size_t>(p + x))
                                   : 0.0;
            if (std::abs(piv) < 1e-13)
                throw FactoringError("vanishing pivot in row " + std::to_string(p) +
                                         " while removing offset " + std::to_string(x),
                                     step_index);
            const double q = target(static_cast<std::size_t>(p),
                                    static_cast<std::size_t>(p + x)) /
                             piv;
            if (q != 0.0)
                res.taps.push_back(
                    {static_cast<std::size_t>(p), static_cast<std::size_t>(p + t), q});
        }

    for (const Tap& tap : res.taps)
        for (std::size_t c = 0; c < target.cols(); ++c)
            target(tap.row, c) -= tap.value * divisor(tap.col, c);
    // The eliminated diagonals are zero by construction; store exact zeros.
    for (const auto& [x, dv] : kills) {
        (void)dv;
        for (long p = 0; p < rows_t; ++p)
            if (p + x >= 0 && p + x < ncols)
                target(static_cast<std::size_t>(p), static_cast<std::size_t>(p + x)) = 0.0;
    }
    if (nkill == 2)
        res.band = {tb[0] + 1, tb[1] - 1};
    else if (kills[0].first == tb[0])
        res.band = {tb[0] + 1, tb[1]};
    else
        res.band = {tb[0], tb[1] - 1};
    return res;
}

} // namespace detail

// Factor the interior block into lifting steps. The step count and the
// presence of a bare leading predict depend only on the order.
inline LiftingScheme factor_interior(const Matrix& heo, std::size_t nu) {
    const std::size_t nfi = heo.rows(), nci = heo.cols();
    if (nfi <= nci) throw SizeError("interior block must be taller than wide");
    const long npr = static_cast<long>(nfi - nci);

    Matrix e((nfi + 1) / 2, nci), o(nfi / 2, nci);
    for (std::size_t l = 0; l < nfi; ++l)
        for (std::size_t m = 0; m < nci; ++m) {
            if (l % 2 == 0)
                e(l / 2, m) = heo(l, m);
            else
                o(l / 2, m) = heo(l, m);
        }
    if (e.rows() != nci || o.rows() != static_cast<std::size_t>(npr))
        throw SizeError("even/odd split sizes inconsistent with one knot per interval");

    const long alpha = (static_cast<long>(nu) + 1) / 2, beta = static_cast<long>(nu) / 2;
    std::array<long, 2> de = {-(alpha / 2), beta / 2};
    std::array<long, 2> dov = {-((alpha - 1) / 2), (beta + 1) / 2};
    const std::size_t u = (nu + 1) / 4;
    const bool lead = (alpha - 2 * static_cast<long>(u)) == 1;

    LiftingScheme scheme;
    scheme.fine_count = nfi;
    scheme.coarse_count = nci;
    scheme.detail_count = static_cast<std::size_t>(npr);
    scheme.update_pairs = u;
    scheme.leading_predict = lead;

    long step_index = 0;
    const auto do_predict = [&](LiftStep::Kind kind) {
        detail::KillResult res = detail::kill(o, dov, e, de, true, npr, step_index);
        dov = res.band;
        scheme.steps.push_back({kind, std::move(res.taps)});
        ++step_index;
    };
    const auto do_update = [&]() {
        detail::KillResult res = detail::kill(e, de, o, dov, false, npr, step_index);
        de = res.band;
        // The cascade subtracts from the evens; analysis adds, so the stored
        // taps carry the opposite sign.
        for (Tap& t : res.taps) t.value = -t.value;
        scheme.steps.push_back({LiftStep::Kind::Update, std::move(res.taps)});
        ++step_index;
    };

    if (lead) do_predict(LiftStep::Kind::InitialPredict);
    for (std::size_t s = 0; s < u; ++s) {
        do_update();
        do_predict(LiftStep::Kind::Predict);
    }

    if (o.max_abs() > 1e-8)
        throw FactoringError("odd block not eliminated, residual " +
                                 std::to_string(o.max_abs()),
                             step_index);
    if (de[0] != 0 || de[1] != 0)
        throw FactoringError("even band did not collapse to the diagonal", step_index);
    double offdiag = 0.0;
    for (std::size_t r = 0; r < e.rows(); ++r)
        for (std::size_t c = 0; c < e.cols(); ++c)
            if (r != c) offdiag = std::max(offdiag, std::abs(e(r, c)));
    if (offdiag > 1e-8)
        throw FactoringError("even block off-diagonal residual " + std::to_string(offdiag),
                             step_index);
    scheme.scale = Vector(nci);
    for (std::size_t m = 0; m < nci; ++m) {
        scheme.scale[m] = e(m, m);
        if (std::abs(scheme.scale[m]) < 1e-12)
            throw FactoringError("diagonal factor vanishes at slot " + std::to_string(m),
                                 step_index);
    }
    return scheme;
}

// Multiply the stored factors back out: returns the interleaved interior
// block and the primitive highpass G0 (details before the final update).
inline std::pair<Matrix, Matrix> reconstruct_factors(const LiftingScheme& scheme) {
    const std::size_t nci = scheme.coarse_count, npr = scheme.detail_count;
    const std::size_t nfi = scheme.fine_count;
    Matrix xe(nci, nci), xo(npr, nci), ge(nci, npr), go = Matrix::identity(npr);
    for (std::size_t m = 0; m < nci; ++m) xe(m, m) = scheme.scale[m];

    for (auto it = scheme.steps.rbegin(); it != scheme.steps.rend(); ++it) {
        if (it->kind == LiftStep::Kind::Update) {
            // Stored update taps already carry the analysis sign.
            for (const Tap& t : it->taps) {
                for (std::size_t c = 0; c < nci; ++c) xe(t.row, c) -= t.value * xo(t.col, c);
                for (std::size_t c = 0; c < npr; ++c) ge(t.row, c) -= t.value * go(t.col, c);
            }
        } else {
            for (const Tap& t : it->taps) {
                for (std::size_t c = 0; c < nci; ++c) xo(t.row, c) += t.value * xe(t.col, c);
                for (std::size_t c = 0; c < npr; ++c) go(t.row, c) += t.value * ge(t.col, c);
            }
        }
    }
    Matrix h(nfi, nci), g0(nfi, npr);
    for (std::size_t l = 0; l < nfi; ++l)
        for (std::size_t c = 0; c < nci; ++c)
            h(l, c) = (l % 2 == 0) ? xe(l / 2, c) : xo(l / 2, c);
    for (std::size_t l = 0; l < nfi; ++l)
        for (std::size_t c = 0; c < npr; ++c)
            g0(l, c) = (l % 2 == 0) ? ge(l / 2, c) : go(l / 2, c);
    return {std::move(h), std::move(g0)};
}

// Choose the final update so each wavelet loses its first p moments: per
// detail slot m, p consecutive coarse functions absorb the primitive
// wavelet's moments. Moment rows are indexed q = 0..p-1, columns by interior
// position.
inline void design_final_update(LiftingScheme& scheme, const Matrix& g0,
                                const Matrix& coarse_moments, const Matrix& fine_moments,
                                std::size_t p) {
    const std::size_t nci = scheme.coarse_count, npr = scheme.detail_count;
    if (p < 1 || p > nci) throw DomainError("vanishing moment count out of range");
    if (coarse_moments.rows() < p || fine_moments.rows() < p)
        throw SizeError("need moment rows up to order p-1");
    if (coarse_moments.cols() != nci || fine_moments.cols() != scheme.fine_count ||
        g0.rows() != scheme.fine_count || g0.cols() != npr)
        throw SizeError("final update: moment/highpass shapes mismatch");

    // Moments of the primitive wavelets.
    Matrix wm(p, npr);
    for (std::size_t q = 0; q < p; ++q)
        for (std::size_t m = 0; m < npr; ++m) {
            double s = 0.0;
            for (std::size_t l = 0; l < scheme.fine_count; ++l)
                s += fine_moments(q, l) * g0(l, m);
            wm(q, m) = s;
        }

    scheme.update.clear();
    for (std::size_t m = 0; m < npr; ++m) {
        const std::size_t last = std::min(m + p - 1, nci - 1);
        const std::size_t ord = last - m + 1;
        Matrix a(ord, ord);
        Vector rhs(ord);
        for (std::size_t q = 0; q < ord; ++q) {
            for (std::size_t j = 0; j < ord; ++j) a(q, j) = coarse_moments(q, m + j);
            rhs[q] = wm(q, m);
        }
        Vector sol;
        try {
            sol = LuFactors(a).solve(rhs);
        } catch (const ConditioningError&) {
            throw DesignError("moment system singular for detail slot " + std::to_string(m),
                              static_cast<long>(m));
        }
        for (std::size_t j = 0; j < ord; ++j)
            if (sol[j] != 0.0) scheme.update.push_back({m + j, m, sol[j]});
    }
}

// G = G0 - Heo * U: the wavelet coefficients over the interior fine basis.
inline Matrix composite_highpass(const Matrix& heo, const Matrix& g0,
                                 const LiftingScheme& scheme) {
    Matrix g = g0;
    for (const Tap& t : scheme.update)
        for (std::size_t l = 0; l < heo.rows(); ++l)
            g(l, t.col) -= heo(l, t.row) * t.value;
    return g;
}

// One analysis pass: cascade, diagonal scaling, final update. On return ve
// holds the coarse coefficients and vo the details.
inline void analyze(const LiftingScheme& scheme, Vector& ve, Vector& vo,
                    OpCount* ops = nullptr) {
    if (ve.size() != scheme.coarse_count || vo.size() != scheme.detail_count)
        throw SizeError("analyze: slot vector sizes mismatch");
    std::size_t work = 0;
    for (const LiftStep& step : scheme.steps) {
        if (step.kind == LiftStep::Kind::Update)
            for (const Tap& t : step.taps) ve[t.row] += t.value * vo[t.col];
        else
            for (const Tap& t : step.taps) vo[t.row] -= t.value * ve[t.col];
        work += step.taps.size();
    }
    for (std::size_t m = 0; m < ve.size(); ++m) ve[m] /= scheme.scale[m];
    work += ve.size();
    for (const Tap& t : scheme.update) ve[t.row] += t.value * vo[t.col];
    work += scheme.update.size();
    if (ops) ops->mul_adds += work;
}

// Exact inverse of analyze.
inline void synthesize(const LiftingScheme& scheme, Vector& ve, Vector& vo,
                       OpCount* ops = nullptr) {
    if (ve.size() != scheme.coarse_count || vo.size() != scheme.detail_count)
        throw SizeError("synthesize: slot vector sizes mismatch");
    std::size_t work = 0;
    for (const Tap& t : scheme.update) ve[t.row] -= t.value * vo[t.col];
    work += scheme.update.size();
    for (std::size_t m = 0; m < ve.size(); ++m) ve[m] *= scheme.scale[m];
    work += ve.size();
    for (auto it = scheme.steps.rbegin(); it != scheme.steps.rend(); ++it) {
        if (it->kind == LiftStep::Kind::Update)
            for (const Tap& t : it->taps) ve[t.row] -= t.value * vo[t.col];
        else
            for (const Tap& t : it->taps) vo[t.row] += t.value * ve[t.col];
        work += it->taps.size();
    }
    if (ops) ops->mul_adds += work;
}

} // namespace bbw
