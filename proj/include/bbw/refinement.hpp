#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bbw/broken_basis.hpp"
#include "bbw/errors.hpp"
#include "bbw/linalg.hpp"

// Two-scale relation between a basis and its one-knot-per-interval
// refinement: Phi_coarse = Phi_fine * H. Each column of H is pinned down by
// row sums (the bases both sum to one) and by the requirement that the fine
// combination has no top-order derivative jump at the newly inserted knots,
// where the coarse function is smooth.

namespace bbw {

// Column-banded matrix: each column stores a contiguous run of entries.
class BandMatrix {
public:
    struct Column {
        std::size_t start = 0;
        Vector values;
    };

    BandMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), columns_(cols) {}

    static BandMatrix identity(std::size_t n) {
        BandMatrix m(n, n);
        for (std::size_t k = 0; k < n; ++k) m.set_column(k, k, Vector{1.0});
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void set_column(std::size_t k, std::size_t start, Vector values) {
        if (k >= cols_ || start + values.size() > rows_)
            throw SizeError("band column out of range");
        columns_[k] = Column{start, std::move(values)};
    }

    const Column& column(std::size_t k) const { return columns_.at(k); }

    double operator()(std::size_t r, std::size_t c) const {
        const Column& col = columns_[c];
        if (r < col.start || r >= col.start + col.values.size()) return 0.0;
        return col.values[r - col.start];
    }

    // y = B x
    Vector apply(const Vector& x) const {
        if (x.size() != cols_) throw SizeError("band apply: size mismatch");
        Vector y(rows_, 0.0);
        for (std::size_t k = 0; k < cols_; ++k) {
            const Column& col = columns_[k];
            for (std::size_t j = 0; j < col.values.size(); ++j)
                y[col.start + j] += col.values[j] * x[k];
        }
        return y;
    }

    Matrix dense() const {
        Matrix m(rows_, cols_);
        for (std::size_t k = 0; k < cols_; ++k) {
            const Column& col = columns_[k];
            for (std::size_t j = 0; j < col.values.size(); ++j)
                m(col.start + j, k) = col.values[j];
        }
        return m;
    }

    Vector row_sums() const {
        Vector s(rows_, 0.0);
        for (std::size_t k = 0; k < cols_; ++k) {
            const Column& col = columns_[k];
            for (std::size_t j = 0; j < col.values.size(); ++j)
                s[col.start + j] += col.values[j];
        }
        return s;
    }

private:
    std::size_t rows_, cols_;
    std::vector<Column> columns_;
};

// Jumps of the top-order derivative of every basis function at the odd
// (interior, newly inserted) knots. Values are the raw right-minus-left
// limits; row_scale holds the per-knot mesh weight that makes the rows
// comparable across nonuniform grids.
struct JumpMatrix {
    std::vector<std::size_t> knots;
    Matrix values;
    Vector row_scale;

    Matrix equilibrated() const {
        Matrix m = values;
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) *= row_scale[r];
        return m;
    }
};

inline JumpMatrix jump_matrix(const BrokenBasis& basis) {
    const std::size_t n = basis.grid().size();
    const int top = static_cast<int>(basis.order()) - 1;
    std::vector<std::size_t> odd;
    for (std::size_t i = 1; i + 1 < n; i += 2) odd.push_back(i);
    JumpMatrix jm;
    jm.knots = odd;
    jm.values = Matrix(odd.size(), basis.count());
    jm.row_scale = Vector(odd.size(), 1.0);
    for (std::size_t r = 0; r < odd.size(); ++r) {
        const std::size_t i = odd[r];
        const double hl = basis.grid().chart(i - 1).second;
        const double hr = basis.grid().chart(i).second;
        jm.row_scale[r] = detail::ipow(std::min(hl, hr), top);
        for (std::size_t l = 0; l < basis.count(); ++l)
            jm.values(r, l) =
                basis.one_sided(l, i, top, true) - basis.one_sided(l, i, top, false);
    }
    return jm;
}

inline BandMatrix refinement_matrix(const BrokenBasis& coarse, const BrokenBasis& fine) {
    if (!(coarse.family() == fine.family()))
        throw DomainError("refinement: bases use different families");
    const std::size_t nu = coarse.order();
    const std::size_t nc = coarse.grid().size(), nf = fine.grid().size();
    if (coarse.grid() == fine.grid()) return BandMatrix::identity(coarse.count());
    if (nf != 2 * nc - 1)
        throw SizeError("refinement: fine grid must insert one knot per coarse interval");
    for (std::size_t k = 0; k < nc; ++k)
        if (fine.grid()[2 * k] != coarse.grid()[k])
            throw DomainError("refinement: grids are not nested");

    const std::size_t rcount = fine.count(), ccount = coarse.count();
    const long nprime = static_cast<long>(nf - nc);
    const JumpMatrix jumps = jump_matrix(fine);
    const Matrix delta = jumps.equilibrated();
    std::map<std::size_t, std::size_t> odd_row;
    for (std::size_t r = 0; r < jumps.knots.size(); ++r) odd_row[jumps.knots[r]] = r;

    const auto lmin = [&](long k) {
        return static_cast<std::size_t>(std::max({0L, k, 2 * k - static_cast<long>(nu) + 1}));
    };
    const auto lmax = [&](long k) {
        return static_cast<std::size_t>(
            std::min({static_cast<long>(rcount) - 1, k + nprime, 2 * k + 1}));
    };
    // Last column whose band still contains row l: that column's row-sum
    // equation fixes the row's entry, all earlier entries being known.
    const auto kmax_of_row = [&](long l) {
        return std::min({(l + static_cast<long>(nu) - 1) / 2, l,
                         static_cast<long>(ccount) - 1});
    };
    std::map<long, std::vector<std::size_t>> rowsum_rows;
    for (std::size_t l = 0; l < rcount; ++l)
        rowsum_rows[kmax_of_row(static_cast<long>(l))].push_back(l);

    Matrix h(rcount, ccount);
    BandMatrix out(rcount, ccount);
    for (std::size_t k = 0; k < ccount; ++k) {
        const std::size_t lo = lmin(static_cast<long>(k)), hi = lmax(static_cast<long>(k));
        std::vector<std::size_t> fixed, unknown;
        std::vector<bool> is_fixed(hi - lo + 1, false);
        const auto it = rowsum_rows.find(static_cast<long>(k));
        if (it != rowsum_rows.end())
            for (std::size_t l : it->second)
                if (lo <= l && l <= hi) {
                    double sum = 0.0;
                    for (std::size_t kk = 0; kk < k; ++kk) sum += h(l, kk);
                    h(l, k) = 1.0 - sum;
                    fixed.push_back(l);
                    is_fixed[l - lo] = true;
                }
        for (std::size_t l = lo; l <= hi; ++l)
            if (!is_fixed[l - lo]) unknown.push_back(l);

        if (!unknown.empty()) {
            // Jump annihilation at the odd knots reachable from this band:
            // knot i sees function l when l - nu + 1 <= i <= l + 1.
            std::vector<std::size_t> eqs;
            for (std::size_t i : jumps.knots) {
                const long li = static_cast<long>(i), lk = static_cast<long>(k);
                if (li < 2 * lk - 2 * static_cast<long>(nu) + 2 || li > 2 * lk + 2) continue;
                bool touches = false;
                for (std::size_t l = lo; l <= hi && !touches; ++l)
                    touches = static_cast<long>(l) - static_cast<long>(nu) + 1 <= li &&
                              li <= static_cast<long>(l) + 1;
                if (touches) eqs.push_back(i);
            }
            if (eqs.size() < unknown.size())
                throw InconsistencyError("refinement column " + std::to_string(k) +
                                         " underdetermined: " + std::to_string(eqs.size()) +
                                         " equations for " + std::to_string(unknown.size()) +
                                         " unknowns");
            Matrix m(eqs.size(), unknown.size());
            Vector rhs(eqs.size(), 0.0);
            for (std::size_t e = 0; e < eqs.size(); ++e) {
                const std::size_t dr = odd_row.at(eqs[e]);
                for (std::size_t c = 0; c < unknown.size(); ++c) m(e, c) = delta(dr, unknown[c]);
                for (std::size_t l : fixed) rhs[e] -= delta(dr, l) * h(l, k);
            }
            LeastSquaresResult fit = least_squares(m, rhs, 1e-10);
            if (fit.residual_norm > 1e-8)
                throw ConditioningError("refinement column " + std::to_string(k) +
                                            " inconsistent, residual " +
                                            std::to_string(fit.residual_norm),
                                        static_cast<long>(k));
            for (std::size_t c = 0; c < unknown.size(); ++c) h(unknown[c], k) = fit.solution[c];
        }
        Vector colvals(hi - lo + 1);
        for (std::size_t l = lo; l <= hi; ++l) colvals[l - lo] = h(l, k);
        out.set_column(k, lo, std::move(colvals));
    }
    return out;
}

// Max pointwise deviation of Phi_coarse from Phi_fine * H over an equispaced
// sample grid.
inline double two_scale_residual(const BrokenBasis& coarse, const BrokenBasis& fine,
                                 const BandMatrix& h, std::size_t samples = 1000,
                                 int deriv = 0) {
    if (h.rows() != fine.count() || h.cols() != coarse.count())
        throw SizeError("two-scale check: matrix shape mismatch");
    double err = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double x = static_cast<double>(s) / static_cast<double>(samples - 1);
        const Vector cv = coarse.evaluate_all(x, deriv);
        const Vector fv = fine.evaluate_all(x, deriv);
        for (std::size_t k = 0; k < h.cols(); ++k) {
            const BandMatrix::Column& col = h.column(k);
            double rec = 0.0;
            for (std::size_t j = 0; j < col.values.size(); ++j)
                rec += col.values[j] * fv[col.start + j];
            err = std::max(err, std::abs(cv[k] - rec));
        }
    }
    return err;
}

inline double max_row_sum_deviation(const BandMatrix& h) {
    const Vector s = h.row_sums();
    double err = 0.0;
    for (double v : s) err = std::max(err, std::abs(v - 1.0));
    return err;
}

} // namespace bbw
