#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bbw/errors.hpp"

// Small dense and banded linear algebra used throughout the library. Problem
// sizes are tens to a few thousand unknowns with narrow bands, so everything
// is plain double precision with partial pivoting and no blocking.

namespace bbw {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    Vector data_;
};

inline Vector matvec(const Matrix& a, const Vector& x) {
    if (x.size() != a.cols()) throw SizeError("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* row = a.row_ptr(r);
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw SizeError("matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline double max_abs(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Dense LU with partial pivoting, kept factored for repeated solves and for
// the reciprocal-condition estimate.
class LuFactors {
public:
    explicit LuFactors(Matrix a) : lu_(std::move(a)), piv_(lu_.rows()) {
        if (lu_.rows() != lu_.cols()) throw SizeError("lu: matrix must be square");
        const std::size_t n = lu_.rows();
        norm1_ = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += std::abs(lu_(r, c));
            norm1_ = std::max(norm1_, s);
        }
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t p = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(lu_(r, col)) > std::abs(lu_(p, col))) p = r;
            piv_[col] = p;
            if (p != col)
                for (std::size_t c = 0; c < n; ++c) std::swap(lu_(col, c), lu_(p, c));
            const double pivot = lu_(col, col);
            if (pivot == 0.0)
                throw ConditioningError("lu: exactly singular at pivot " + std::to_string(col),
                                        static_cast<long>(col));
            for (std::size_t r = col + 1; r < n; ++r) {
                const double f = lu_(r, col) / pivot;
                lu_(r, col) = f;
                if (f == 0.0) continue;
                for (std::size_t c = col + 1; c < n; ++c) lu_(r, c) -= f * lu_(col, c);
            }
        }
    }

    std::size_t size() const { return lu_.rows(); }

    Vector solve(Vector b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw SizeError("lu solve: rhs length mismatch");
        for (std::size_t i = 0; i < n; ++i)
            if (piv_[i] != i) std::swap(b[i], b[piv_[i]]);
        for (std::size_t i = 1; i < n; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * b[j];
            b[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * b[j];
            b[ii] = s / lu_(ii, ii);
        }
        return b;
    }

    Vector solve_transposed(Vector b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw SizeError("lu solve: rhs length mismatch");
        // U^T then L^T, undoing the row swaps last.
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * b[j];
            b[i] = s / lu_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(j, ii) * b[j];
            b[ii] = s;
        }
        for (std::size_t ii = n; ii-- > 0;)
            if (piv_[ii] != ii) std::swap(b[ii], b[piv_[ii]]);
        return b;
    }

    // Reciprocal condition estimate in the 1-norm: ||A||_1 is exact, ||A^-1||_1
    // is estimated by the classic sign-vector iteration (a couple of solves).
    double rcond() const {
        const std::size_t n = lu_.rows();
        if (n == 0) return 1.0;
        Vector x(n, 1.0 / static_cast<double>(n));
        double inv_norm = 0.0;
        for (int iter = 0; iter < 5; ++iter) {
            Vector y = solve(x);
            double ynorm = 0.0;
            for (double v : y) ynorm += std::abs(v);
            inv_norm = std::max(inv_norm, ynorm);
            Vector xi(n);
            for (std::size_t i = 0; i < n; ++i) xi[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
            Vector z = solve_transposed(xi);
            std::size_t jmax = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::abs(z[i]) > std::abs(z[jmax])) jmax = i;
            if (std::abs(z[jmax]) <= 1.0 + 1e-15 && iter > 0) break;
            std::fill(x.begin(), x.end(), 0.0);
            x[jmax] = 1.0;
        }
        if (inv_norm == 0.0 || norm1_ == 0.0) return 1.0;
        return 1.0 / (norm1_ * inv_norm);
    }

private:
    Matrix lu_;
    std::vector<std::size_t> piv_;
    double norm1_ = 0.0;
};

// Banded matrix in LAPACK-style storage for the basis assembly: row index r,
// column c with |r - c| within the bands is stored at band(kl + ku + r - c, c).
// Factorization needs kl extra superdiagonal rows for pivoting fill.
class BandedLu {
public:
    BandedLu(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), store_(2 * kl + ku + 1, n), piv_(n) {}

    void set(std::size_t r, std::size_t c, double v) { at(r, c) = v; }
    void add(std::size_t r, std::size_t c, double v) { at(r, c) += v; }

    bool in_band(std::size_t r, std::size_t c) const {
        return (c + kl_ >= r) && (r + ku_ >= c);
    }

    // Factor in place; throws on an exactly zero pivot. Returns the smallest
    // |pivot| / largest |pivot| ratio as a cheap conditioning indicator.
    double factor() {
        double pmin = 0.0, pmax = 0.0;
        for (std::size_t col = 0; col < n_; ++col) {
            const std::size_t rlast = std::min(col + kl_, n_ - 1);
            std::size_t p = col;
            for (std::size_t r = col + 1; r <= rlast; ++r)
                if (std::abs(at(r, col)) > std::abs(at(p, col))) p = r;
            piv_[col] = p;
            if (p != col) {
                const std::size_t clast = std::min(col + kl_ + ku_, n_ - 1);
                for (std::size_t c = col; c <= clast; ++c) std::swap(at(col, c), at(p, c));
            }
            const double pivot = at(col, col);
            if (pivot == 0.0)
                throw ConditioningError("banded lu: exactly singular at pivot " + std::to_string(col),
                                        static_cast<long>(col));
            const double ap = std::abs(pivot);
            pmin = (col == 0) ? ap : std::min(pmin, ap);
            pmax = std::max(pmax, ap);
            const std::size_t clast = std::min(col + kl_ + ku_, n_ - 1);
            for (std::size_t r = col + 1; r <= rlast; ++r) {
                const double f = at(r, col) / pivot;
                at(r, col) = f;
                if (f == 0.0) continue;
                for (std::size_t c = col + 1; c <= clast; ++c) at(r, c) -= f * at(col, c);
            }
        }
        factored_ = true;
        return pmax > 0.0 ? pmin / pmax : 0.0;
    }

    Vector solve(Vector b) const {
        assert(factored_);
        if (b.size() != n_) throw SizeError("banded solve: rhs length mismatch");
        for (std::size_t col = 0; col < n_; ++col) {
            if (piv_[col] != col) std::swap(b[col], b[piv_[col]]);
            const std::size_t rlast = std::min(col + kl_, n_ - 1);
            for (std::size_t r = col + 1; r <= rlast; ++r) b[r] -= at(r, col) * b[col];
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            const std::size_t clast = std::min(ii + kl_ + ku_, n_ - 1);
            double s = b[ii];
            for (std::size_t c = ii + 1; c <= clast; ++c) s -= at(ii, c) * b[c];
            b[ii] = s / at(ii, ii);
        }
        return b;
    }

private:
    double& at(std::size_t r, std::size_t c) {
        assert(c + kl_ >= r && r + kl_ + ku_ >= c);
        return store_(kl_ + ku_ + r - c, c);
    }
    double at(std::size_t r, std::size_t c) const {
        assert(c + kl_ >= r && r + kl_ + ku_ >= c);
        return store_(kl_ + ku_ + r - c, c);
    }

    std::size_t n_, kl_, ku_;
    Matrix store_;
    std::vector<std::size_t> piv_;
    bool factored_ = false;
};

struct LeastSquaresResult {
    Vector solution;
    double residual_norm = 0.0; // Euclidean norm of A x - b
};

// Householder QR least squares for skinny systems (rows >= cols). Throws when
// the triangular factor has a diagonal entry below `rank_tol` times the
// largest, which signals a rank-deficient design.
inline LeastSquaresResult least_squares(Matrix a, Vector b, double rank_tol = 1e-12) {
    const std::size_t m = a.rows(), n = a.cols();
    if (b.size() != m) throw SizeError("least_squares: rhs length mismatch");
    if (m < n) throw SizeError("least_squares: fewer equations than unknowns");
    for (std::size_t col = 0; col < n; ++col) {
        double norm = 0.0;
        for (std::size_t r = col; r < m; ++r) norm += a(r, col) * a(r, col);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        if (a(col, col) > 0.0) norm = -norm;
        // Householder vector stored below the diagonal, scaled so v[col] = 1.
        const double head = a(col, col) - norm;
        for (std::size_t r = col + 1; r < m; ++r) a(r, col) /= head;
        const double tau = -head / norm;
        a(col, col) = norm;
        for (std::size_t c = col + 1; c < n; ++c) {
            double s = a(col, c);
            for (std::size_t r = col + 1; r < m; ++r) s += a(r, col) * a(r, c);
            s *= tau;
            a(col, c) -= s;
            for (std::size_t r = col + 1; r < m; ++r) a(r, c) -= s * a(r, col);
        }
        {
            double s = b[col];
            for (std::size_t r = col + 1; r < m; ++r) s += a(r, col) * b[r];
            s *= tau;
            b[col] -= s;
            for (std::size_t r = col + 1; r < m; ++r) b[r] -= s * a(r, col);
        }
    }
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(a(i, i)));
    if (dmax == 0.0) throw ConditioningError("least_squares: zero design matrix");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(a(i, i)) < rank_tol * dmax)
            throw ConditioningError("least_squares: rank-deficient design", static_cast<long>(i));
    LeastSquaresResult out;
    out.solution.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * out.solution[j];
        out.solution[ii] = s / a(ii, ii);
    }
    double res = 0.0;
    for (std::size_t r = n; r < m; ++r) res += b[r] * b[r];
    out.residual_norm = std::sqrt(res);
    return out;
}

// Cholesky factor of a symmetric positive definite matrix; failure to be
// positive definite throws. Used where positive definiteness is itself the
// property under test (Gram matrices).
class Cholesky {
public:
    explicit Cholesky(const Matrix& a) : l_(a.rows(), a.cols()) {
        if (a.rows() != a.cols()) throw SizeError("cholesky: matrix must be square");
        const std::size_t n = a.rows();
        for (std::size_t j = 0; j < n; ++j) {
            double d = a(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (d <= 0.0)
                throw ConditioningError("cholesky: matrix is not positive definite",
                                        static_cast<long>(j));
            l_(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = a(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / l_(j, j);
            }
        }
    }

    Vector solve(Vector b) const {
        const std::size_t n = l_.rows();
        if (b.size() != n) throw SizeError("cholesky solve: rhs length mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < i; ++j) s -= l_(i, j) * b[j];
            b[i] = s / l_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= l_(j, ii) * b[j];
            b[ii] = s / l_(ii, ii);
        }
        return b;
    }

private:
    Matrix l_;
};

} // namespace bbw
