#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bbw/errors.hpp"
#include "bbw/hermite.hpp"
#include "bbw/knots.hpp"
#include "bbw/linalg.hpp"
#include "bbw/quadrature.hpp"
#include "bbw/smooth_family.hpp"

// The broken basis: n + nu - 2 compactly supported piecewise functions, each
// a windowed combination of the family members over at most nu consecutive
// intervals, glued to continuity order nu - 2 at the knots and summing to one
// everywhere.
//
// Internally every interval carries its own affine chart (midpoint, half
// width) and polynomial members are stored in chart coordinates; this keeps
// the defining linear system well conditioned on nonequispaced grids. Public
// segment coefficients are always reported against the family as given.

namespace bbw {

namespace detail {
inline double ipow(double b, int e) {
    double p = 1.0;
    for (int j = 0; j < e; ++j) p *= b;
    return p;
}
inline double binom(int n, int k) {
    double v = 1.0;
    for (int j = 1; j <= k; ++j) v = v * static_cast<double>(n - k + j) / static_cast<double>(j);
    return v;
}
} // namespace detail

class BrokenBasis {
public:
    BrokenBasis(SmoothFamily family, KnotGrid grid)
        : family_(std::move(family)), grid_(std::move(grid)) {
        nu_ = static_cast<std::size_t>(family_.order());
        const std::size_t n = grid_.size();
        if (n < nu_ + 2)
            throw SizeError("basis of order " + std::to_string(nu_) + " needs at least " +
                            std::to_string(nu_ + 2) + " knots, got " + std::to_string(n));
        localized_ = family_.polynomial_degrees_downward_closed();
        if (localized_)
            for (std::size_t q = 0; q < nu_; ++q)
                if (family_.member(static_cast<int>(q)).polynomial())
                    degree_slot_[family_.member(static_cast<int>(q)).degree()] =
                        static_cast<std::size_t>(q);
        build_frames();
        assemble_and_solve();
    }

    const SmoothFamily& family() const { return family_; }
    const KnotGrid& grid() const { return grid_; }
    std::size_t order() const { return nu_; }

    // Number of basis functions: n + nu - 2.
    std::size_t count() const { return grid_.size() + nu_ - 2; }

    // Support of phi_k in interval indices, inclusive on both ends.
    std::size_t first_interval(std::size_t k) const {
        return k + 1 >= nu_ ? k + 1 - nu_ : 0;
    }
    std::size_t last_interval(std::size_t k) const {
        return std::min(grid_.intervals() - 1, k);
    }
    bool active_on(std::size_t k, std::size_t i) const {
        return i < grid_.intervals() && i + nu_ > k && k >= i;
    }

    // Chart-coordinate coefficients of phi_k on interval i.
    const Vector& segment_local(std::size_t k, std::size_t i) const {
        if (!active_on(k, i))
            throw DomainError("function " + std::to_string(k) + " is zero on interval " +
                              std::to_string(i));
        return coeffs_[i * nu_ + (k - i)];
    }

    // Coefficients of phi_k on interval i against the family as given.
    Vector segment(std::size_t k, std::size_t i) const {
        const Vector& local = segment_local(k, i);
        if (!localized_) return local;
        return LuFactors(frames_[i]).solve(local);
    }

    // r-th derivative of phi_k at x; values at interior knots are left
    // limits, matching the one-sided convention of the top-order derivative.
    double evaluate(std::size_t k, double x, int deriv = 0) const {
        const std::size_t i = grid_.interval_of(x);
        if (!active_on(k, i)) return 0.0;
        return segment_value(k, i, x, deriv);
    }

    // One-sided r-th derivative of phi_k at knot m; the side off the domain
    // reads as zero.
    double one_sided(std::size_t k, std::size_t m, int deriv, bool from_right) const {
        if (m >= grid_.size()) throw SizeError("knot index out of range");
        if (from_right) {
            if (m + 1 >= grid_.size()) return 0.0;
            if (!active_on(k, m)) return 0.0;
            return segment_value(k, m, grid_[m], deriv);
        }
        if (m == 0) return 0.0;
        if (!active_on(k, m - 1)) return 0.0;
        return segment_value(k, m - 1, grid_[m], deriv);
    }

    // All basis values (or derivatives) at x as a dense length-count vector.
    Vector evaluate_all(double x, int deriv = 0) const {
        Vector out(count(), 0.0);
        const std::size_t i = grid_.interval_of(x);
        for (std::size_t t = 0; t < nu_; ++t)
            out[i + t] = segment_value(i + t, i, x, deriv);
        return out;
    }

    // Endpoint jet of phi_k on interval i: derivatives 0..depth-1 at the
    // interval's left or right end, taken from inside the interval.
    Vector jet(std::size_t k, std::size_t i, bool right_end, std::size_t depth) const {
        const double x = right_end ? grid_[i + 1] : grid_[i];
        Vector out(depth, 0.0);
        if (!active_on(k, i)) return out;
        for (std::size_t r = 0; r < depth; ++r)
            out[r] = segment_value(k, i, x, static_cast<int>(r));
        return out;
    }

    // Monomial moments of every basis function: row q holds the integrals of
    // x^q phi_k over [0,1]. Each segment is integrated through its two-point
    // Hermite surrogate of degree 2 nu - 1, so callers that both design with
    // and test against these moments see one consistent quantity.
    Matrix moments(int max_q) const {
        if (max_q < 0) throw DomainError("moments: negative order");
        const std::size_t pts =
            static_cast<std::size_t>((2 * static_cast<int>(nu_) + max_q + 1) / 2);
        const QuadRule& rule = gauss_legendre(pts);
        Matrix out(static_cast<std::size_t>(max_q) + 1, count());
        for (std::size_t k = 0; k < count(); ++k)
            for (std::size_t i = first_interval(k); i <= last_interval(k); ++i) {
                const double a = grid_[i], b = grid_[i + 1];
                HermitePoly surr(a, b, jet(k, i, false, nu_), jet(k, i, true, nu_));
                const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                for (std::size_t s = 0; s < pts; ++s) {
                    const double x = mid + half * rule.nodes[s];
                    const double w = half * rule.weights[s];
                    const double v = surr.eval(x);
                    double xq = 1.0;
                    for (int q = 0; q <= max_q; ++q) {
                        out(static_cast<std::size_t>(q), k) += w * xq * v;
                        xq *= x;
                    }
                }
            }
        return out;
    }

    // Gram matrix of the basis in L2(0,1), by per-interval Gauss quadrature
    // on the functions themselves. Zero whenever supports do not overlap.
    Matrix gram() const {
        const QuadRule& rule = gauss_legendre(2 * nu_ + 8);
        Matrix g(count(), count());
        Vector vals(nu_);
        for (std::size_t i = 0; i < grid_.intervals(); ++i) {
            const auto [mid, half] = grid_.chart(i);
            for (std::size_t s = 0; s < rule.nodes.size(); ++s) {
                const double x = mid + half * rule.nodes[s];
                const double w = half * rule.weights[s];
                for (std::size_t t = 0; t < nu_; ++t)
                    vals[t] = segment_value(i + t, i, x, 0);
                for (std::size_t ta = 0; ta < nu_; ++ta)
                    for (std::size_t tb = 0; tb < nu_; ++tb)
                        g(i + ta, i + tb) += w * vals[ta] * vals[tb];
            }
        }
        return g;
    }

    struct Projection {
        Vector coeffs;
        double l2_error;
    };

    // L2-orthogonal projection of f onto the span, plus the L2 norm of the
    // residual measured with the same quadrature.
    Projection project(const std::function<double(double)>& f) const {
        const QuadRule& rule = gauss_legendre(2 * nu_ + 8);
        const std::size_t ni = grid_.intervals(), ns = rule.nodes.size();
        std::vector<double> fx(ni * ns), wts(ni * ns), xs(ni * ns);
        Vector rhs(count(), 0.0);
        for (std::size_t i = 0; i < ni; ++i) {
            const auto [mid, half] = grid_.chart(i);
            for (std::size_t s = 0; s < ns; ++s) {
                const double x = mid + half * rule.nodes[s];
                const std::size_t id = i * ns + s;
                xs[id] = x;
                wts[id] = half * rule.weights[s];
                fx[id] = f(x);
                for (std::size_t t = 0; t < nu_; ++t)
                    rhs[i + t] += wts[id] * fx[id] * segment_value(i + t, i, x, 0);
            }
        }
        Cholesky chol(gram());
        Vector c = chol.solve(rhs);
        double err2 = 0.0;
        for (std::size_t i = 0; i < ni; ++i)
            for (std::size_t s = 0; s < ns; ++s) {
                const std::size_t id = i * ns + s;
                double rec = 0.0;
                for (std::size_t t = 0; t < nu_; ++t)
                    rec += c[i + t] * segment_value(i + t, i, xs[id], 0);
                const double d = fx[id] - rec;
                err2 += wts[id] * d * d;
            }
        return {std::move(c), std::sqrt(std::max(err2, 0.0))};
    }

    // Expansion of each family member in the basis: count x nu matrix A with
    // omega_q = sum_k A(k, q) phi_k. Per interval the nu active segments are
    // inverted against the member coordinates; rows shared by neighboring
    // intervals agree up to roundoff and are averaged.
    Matrix expansion_matrix() const {
        Matrix a(count(), nu_);
        std::vector<double> hits(count(), 0.0);
        for (std::size_t i = 0; i < grid_.intervals(); ++i) {
            Matrix b(nu_, nu_);
            for (std::size_t t = 0; t < nu_; ++t) {
                const Vector& seg = coeffs_[i * nu_ + t];
                for (std::size_t q = 0; q < nu_; ++q) b(q, t) = seg[q];
            }
            LuFactors lu(b);
            for (std::size_t q = 0; q < nu_; ++q) {
                Vector target(nu_);
                for (std::size_t m = 0; m < nu_; ++m) target[m] = frames_[i](m, q);
                Vector w = lu.solve(target);
                for (std::size_t t = 0; t < nu_; ++t) a(i + t, q) += w[t];
            }
            for (std::size_t t = 0; t < nu_; ++t) hits[i + t] += 1.0;
        }
        for (std::size_t k = 0; k < count(); ++k)
            for (std::size_t q = 0; q < nu_; ++q) a(k, q) /= hits[k];
        return a;
    }

private:
    // Value of the localized member q in the chart of interval i. Polynomial
    // members become scaled powers of the chart coordinate; everything else
    // keeps its global form.
    double chart_entry(std::size_t q, double x, int r, std::size_t i) const {
        const SmoothFunction& f = family_.member(static_cast<int>(q));
        if (localized_ && f.polynomial()) {
            const int d = f.degree();
            if (r > d) return 0.0;
            const auto [c, h] = grid_.chart(i);
            double coeff = 1.0;
            for (int j = 0; j < r; ++j) coeff *= static_cast<double>(d - j);
            return coeff * detail::ipow((x - c) / h, d - r) / detail::ipow(h, r);
        }
        return f.eval(x, r);
    }

    double segment_value(std::size_t k, std::size_t i, double x, int r) const {
        const Vector& seg = coeffs_[i * nu_ + (k - i)];
        double v = 0.0;
        for (std::size_t q = 0; q < nu_; ++q) v += chart_entry(q, x, r, i) * seg[q];
        return v;
    }

    // Transfer from chart to family coordinates on each interval: column q of
    // frames_[i] expands member omega_q in the chart members, so a segment's
    // family coefficients solve frames_[i] * a = local.
    void build_frames() {
        const std::size_t ni = grid_.intervals();
        frames_.reserve(ni);
        for (std::size_t i = 0; i < ni; ++i) {
            Matrix c = Matrix::identity(nu_);
            if (localized_) {
                c = Matrix(nu_, nu_);
                const auto [mid, half] = grid_.chart(i);
                for (std::size_t q = 0; q < nu_; ++q) {
                    const SmoothFunction& f = family_.member(static_cast<int>(q));
                    if (!f.polynomial()) {
                        c(q, q) = 1.0;
                        continue;
                    }
                    const int d = f.degree();
                    const double shift = mid - f.center();
                    for (int m = 0; m <= d; ++m)
                        c(degree_slot_.at(m), q) += detail::binom(d, m) *
                                                    detail::ipow(half, m) *
                                                    detail::ipow(shift, d - m);
                }
            }
            frames_.push_back(std::move(c));
        }
    }

    // The defining square system, assembled interval-major so the matrix is
    // banded: per interval nu normalization rows plus the continuity rows of
    // the knot on its right; boundary rows bracket the whole thing. Row
    // scales follow the local mesh width so residuals are mesh-independent.
    void assemble_and_solve() {
        const std::size_t n = grid_.size(), nu = nu_;
        const std::size_t nfun = n + nu - 2;
        const std::size_t nsys = (n - 1) * nu * nu;
        const std::size_t bnd = nu * (nu - 1) / 2;
        BandedLu band(nsys, bnd + nu * nu - 1, 2 * nu * nu - 1 - bnd);
        std::vector<std::vector<std::pair<std::size_t, double>>> coo(nsys);
        Vector rhs(nsys, 0.0);
        std::size_t row = 0;
        const auto uid = [nu](std::size_t k, std::size_t i, std::size_t q) {
            return (i * nu + (k - i)) * nu + q;
        };
        const auto put = [&](std::size_t r, std::size_t c, double v) {
            band.add(r, c, v);
            coo[r].push_back({c, v});
        };

        // Left boundary: phi_k vanishes at 0 to derivative order k - 1.
        const double h0 = grid_.chart(0).second;
        for (std::size_t k = 1; k < nu; ++k)
            for (std::size_t r = 0; r < k; ++r) {
                const double s = detail::ipow(h0, static_cast<int>(r));
                for (std::size_t q = 0; q < nu; ++q)
                    put(row, uid(k, 0, q), chart_entry(q, 0.0, static_cast<int>(r), 0) * s);
                ++row;
            }

        for (std::size_t i = 0; i + 1 < n; ++i) {
            // Per-interval normalization: active segments sum to the constant.
            for (std::size_t q = 0; q < nu; ++q) {
                for (std::size_t t = 0; t < nu; ++t) put(row, uid(i + t, i, q), 1.0);
                rhs[row] = (q == 0) ? 1.0 : 0.0;
                ++row;
            }
            if (i + 2 < n) {
                // Continuity through knot m for derivative orders 0..nu-2:
                // the support-ending function vanishes from the left, the
                // support-starting one from the right, the rest cross with
                // matching limits. One crossing per order is redundant given
                // normalization and is dropped.
                const std::size_t m = i + 1;
                const double xm = grid_[m];
                const double hl = grid_.chart(m - 1).second, hr = grid_.chart(m).second;
                const double hs = std::min(hl, hr);
                const std::size_t kdrop = m + (nu - 2) / 2;
                for (std::size_t r = 0; r + 1 < nu; ++r) {
                    const double s = detail::ipow(hs, static_cast<int>(r));
                    Vector oml(nu), omr(nu);
                    for (std::size_t q = 0; q < nu; ++q) {
                        oml[q] = chart_entry(q, xm, static_cast<int>(r), m - 1) * s;
                        omr[q] = chart_entry(q, xm, static_cast<int>(r), m) * s;
                    }
                    for (std::size_t k = m - 1; k <= m + nu - 1; ++k) {
                        if (k == kdrop) continue;
                        const bool left_active = k <= m + nu - 2;
                        const bool right_active = k >= m;
                        for (std::size_t q = 0; q < nu; ++q) {
                            if (right_active) put(row, uid(k, m, q), omr[q]);
                            if (left_active) put(row, uid(k, m - 1, q), -oml[q]);
                        }
                        ++row;
                    }
                }
            } else {
                // Right boundary, mirror of the left.
                const double he = grid_.chart(n - 2).second;
                for (std::size_t k = n - 2; k < nfun; ++k) {
                    const std::size_t kp = nfun - 1 - k;
                    if (kp == 0) continue;
                    for (std::size_t r = 0; r < kp; ++r) {
                        const double s = detail::ipow(he, static_cast<int>(r));
                        for (std::size_t q = 0; q < nu; ++q)
                            put(row, uid(k, n - 2, q),
                                chart_entry(q, 1.0, static_cast<int>(r), n - 2) * s);
                        ++row;
                    }
                }
            }
        }
        if (row != nsys)
            throw InconsistencyError("basis system row count " + std::to_string(row) +
                                     " does not match " + std::to_string(nsys));

        band.factor();
        Vector sol = band.solve(rhs);

        for (std::size_t r = 0; r < nsys; ++r) {
            double ax = 0.0, scale = std::abs(rhs[r]);
            for (const auto& [c, v] : coo[r]) {
                ax += v * sol[c];
                scale += std::abs(v) * std::abs(sol[c]);
            }
            const double rel = std::abs(ax - rhs[r]) / std::max(1.0, scale);
            if (rel > 1e-9)
                throw ConditioningError("basis system residual " + std::to_string(rel) +
                                            " in equation " + std::to_string(r),
                                        static_cast<long>(r));
        }

        coeffs_.assign((n - 1) * nu, Vector(nu, 0.0));
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t t = 0; t < nu; ++t)
                for (std::size_t q = 0; q < nu; ++q)
                    coeffs_[i * nu + t][q] = sol[uid(i + t, i, q)];
    }

    SmoothFamily family_;
    KnotGrid grid_;
    std::size_t nu_ = 0;
    bool localized_ = false;
    std::map<int, std::size_t> degree_slot_;
    std::vector<Matrix> frames_;
    std::vector<Vector> coeffs_;
};

} // namespace bbw
