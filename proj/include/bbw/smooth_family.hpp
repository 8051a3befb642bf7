#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bbw/errors.hpp"
#include "bbw/linalg.hpp"

// The building set: an ordered list of smooth, linearly independent functions
// on [0,1] whose segments are welded into the broken basis. Derivatives are
// closed-form per kind; nothing here differentiates numerically.

namespace bbw {

enum class FuncKind { Power, CenteredPower, Sine, Cosine, Exponential, Tabulated };

// Values and derivatives of one function at the points of a fixed grid; the
// only representation available for functions known by samples alone.
struct TabulatedData {
    std::vector<double> grid;               // strictly increasing
    std::vector<std::vector<double>> jets;  // jets[m][r] = r-th derivative at grid[m]
};

class SmoothFunction {
public:
    static SmoothFunction power(int degree) {
        if (degree < 0) throw DomainError("power: degree must be nonnegative");
        SmoothFunction f;
        f.kind_ = FuncKind::Power;
        f.degree_ = degree;
        return f;
    }
    static SmoothFunction centered_power(int degree, double center) {
        if (degree < 0) throw DomainError("centered power: degree must be nonnegative");
        if (center < 0.0 || center > 1.0)
            throw DomainError("centered power: center must lie in [0,1]");
        SmoothFunction f;
        f.kind_ = FuncKind::CenteredPower;
        f.degree_ = degree;
        f.center_ = center;
        return f;
    }
    static SmoothFunction sine(double freq) {
        if (freq <= 0.0) throw DomainError("sine: frequency must be positive");
        SmoothFunction f;
        f.kind_ = FuncKind::Sine;
        f.freq_ = freq;
        return f;
    }
    static SmoothFunction cosine(double freq) {
        if (freq <= 0.0) throw DomainError("cosine: frequency must be positive");
        SmoothFunction f;
        f.kind_ = FuncKind::Cosine;
        f.freq_ = freq;
        return f;
    }
    static SmoothFunction exponential(double rate) {
        SmoothFunction f;
        f.kind_ = FuncKind::Exponential;
        f.rate_ = rate;
        return f;
    }
    static SmoothFunction tabulated(std::shared_ptr<const TabulatedData> data) {
        if (!data || data->grid.size() < 2 || data->jets.size() != data->grid.size())
            throw DomainError("tabulated: need a grid with matching jets");
        SmoothFunction f;
        f.kind_ = FuncKind::Tabulated;
        f.table_ = std::move(data);
        return f;
    }

    FuncKind kind() const { return kind_; }

    bool operator==(const SmoothFunction& other) const {
        return kind_ == other.kind_ && degree_ == other.degree_ && center_ == other.center_ &&
               freq_ == other.freq_ && rate_ == other.rate_ && table_ == other.table_;
    }

    bool analytic() const { return kind_ != FuncKind::Tabulated; }
    bool polynomial() const {
        return kind_ == FuncKind::Power || kind_ == FuncKind::CenteredPower;
    }
    int degree() const { return degree_; }
    double center() const { return center_; }
    double freq() const { return freq_; }
    double rate() const { return rate_; }

    // r-th derivative at x. Analytic kinds are closed-form everywhere; the
    // tabulated kind answers only at its own grid points.
    double eval(double x, int r) const {
        switch (kind_) {
        case FuncKind::Power:
            return dpow(x, degree_, r);
        case FuncKind::CenteredPower:
            return dpow(x - center_, degree_, r);
        case FuncKind::Sine: {
            const double w = 2.0 * M_PI * freq_;
            return std::pow(w, r) * std::sin(w * x + 0.5 * M_PI * r);
        }
        case FuncKind::Cosine: {
            const double w = 2.0 * M_PI * freq_;
            return std::pow(w, r) * std::cos(w * x + 0.5 * M_PI * r);
        }
        case FuncKind::Exponential:
            return std::pow(rate_, r) * std::exp(rate_ * x);
        case FuncKind::Tabulated: {
            const auto& g = table_->grid;
            auto it = std::lower_bound(g.begin(), g.end(), x - 1e-12);
            if (it == g.end() || std::abs(*it - x) > 1e-12)
                throw DomainError("tabulated member queried off its grid at x=" +
                                  std::to_string(x));
            const std::size_t m = static_cast<std::size_t>(it - g.begin());
            if (r < 0 || static_cast<std::size_t>(r) >= table_->jets[m].size())
                throw DomainError("tabulated member has no derivative of order " +
                                  std::to_string(r));
            return table_->jets[m][r];
        }
        }
        return 0.0;
    }

private:
    static double dpow(double t, int d, int r) {
        if (r > d) return 0.0;
        double coeff = 1.0;
        for (int j = 0; j < r; ++j) coeff *= static_cast<double>(d - j);
        double p = 1.0;
        for (int j = 0; j < d - r; ++j) p *= t;
        return coeff * p;
    }

    FuncKind kind_ = FuncKind::Power;
    int degree_ = 0;
    double center_ = 0.0;
    double freq_ = 0.0;
    double rate_ = 0.0;
    std::shared_ptr<const TabulatedData> table_;
};

class SmoothFamily {
public:
    explicit SmoothFamily(std::vector<SmoothFunction> members) : members_(std::move(members)) {
        if (members_.size() < 2)
            throw DomainError("family order must be at least 2, got " +
                              std::to_string(members_.size()));
    }

    int order() const { return static_cast<int>(members_.size()); }

    bool operator==(const SmoothFamily& other) const { return members_ == other.members_; }

    const std::vector<SmoothFunction>& members() const { return members_; }
    const SmoothFunction& member(int q) const { return members_.at(static_cast<std::size_t>(q)); }

    bool analytic() const {
        return std::all_of(members_.begin(), members_.end(),
                           [](const SmoothFunction& f) { return f.analytic(); });
    }

    int max_deriv_supported() const { return analytic() ? 2 * order() : order() - 1; }

    // Values and derivatives of every member at x: row r holds the r-th
    // derivatives, column q the member index.
    Matrix evaluate(double x, int max_deriv) const {
        if (x < 0.0 || x > 1.0)
            throw DomainError("evaluate: x=" + std::to_string(x) + " outside [0,1]");
        if (max_deriv < 0 || max_deriv > max_deriv_supported())
            throw DomainError("evaluate: derivative order " + std::to_string(max_deriv) +
                              " beyond supported " + std::to_string(max_deriv_supported()));
        Matrix out(static_cast<std::size_t>(max_deriv) + 1, members_.size());
        for (int r = 0; r <= max_deriv; ++r)
            for (std::size_t q = 0; q < members_.size(); ++q)
                out(static_cast<std::size_t>(r), q) = members_[q].eval(x, r);
        return out;
    }

    Vector row(double x, int r) const {
        Vector out(members_.size());
        for (std::size_t q = 0; q < members_.size(); ++q) out[q] = members_[q].eval(x, r);
        return out;
    }

    // Re-center the polynomial members about `center`, leaving everything else
    // alone. Only applied when the set of polynomial degrees is downward
    // closed (0, 1, ..., D all present): then the shifted powers span the same
    // polynomial space and the joint span of the family is preserved. With
    // degree gaps, or for kinds with no re-centering rule, the member passes
    // through unchanged.
    SmoothFamily localize(double center) const {
        if (center < 0.0 || center > 1.0)
            throw DomainError("localize: center must lie in [0,1]");
        std::vector<SmoothFunction> out;
        out.reserve(members_.size());
        const bool closed = polynomial_degrees_downward_closed();
        for (const SmoothFunction& f : members_) {
            if (closed && f.polynomial() && f.degree() > 0 && center != 0.0)
                out.push_back(SmoothFunction::centered_power(f.degree(), center));
            else if (closed && f.polynomial() && f.degree() > 0 && center == 0.0 &&
                     f.kind() == FuncKind::CenteredPower)
                out.push_back(SmoothFunction::power(f.degree()));
            else
                out.push_back(f);
        }
        return SmoothFamily(std::move(out));
    }

    bool polynomial_degrees_downward_closed() const {
        std::set<int> degs;
        int dmax = -1;
        for (const SmoothFunction& f : members_)
            if (f.polynomial()) {
                degs.insert(f.degree());
                dmax = std::max(dmax, f.degree());
            }
        for (int d = 0; d <= dmax; ++d)
            if (degs.find(d) == degs.end()) return false;
        return true;
    }

    // Relative least-squares residual of fitting the reparameterized family
    // on the affine image, member by member: small residual means the family
    // is closed under x -> alpha*x + beta on the overlap with [0,1].
    double closure_residual(double alpha, double beta, int sample_count) const {
        if (alpha <= 0.0) throw DomainError("closure_residual: alpha must be positive");
        if (sample_count < 4 * order())
            throw DomainError("closure_residual: need at least " + std::to_string(4 * order()) +
                              " samples");
        if (!analytic())
            throw DomainError("closure_residual: tabulated members cannot be sampled freely");
        const double lo = std::max(0.0, -beta / alpha);
        const double hi = std::min(1.0, (1.0 - beta) / alpha);
        if (!(lo < hi))
            throw DomainError("closure_residual: affine image does not overlap [0,1]");
        const std::size_t m = static_cast<std::size_t>(sample_count);
        const std::size_t n = members_.size();
        Matrix design(m, n);
        Matrix targets(m, n);
        for (std::size_t s = 0; s < m; ++s) {
            const double x = lo + (hi - lo) * static_cast<double>(s) /
                                      static_cast<double>(m - 1);
            const double y = alpha * x + beta;
            for (std::size_t q = 0; q < n; ++q) {
                design(s, q) = members_[q].eval(x, 0);
                targets(s, q) = members_[q].eval(y, 0);
            }
        }
        double res2 = 0.0, tgt2 = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            Vector rhs(m);
            for (std::size_t s = 0; s < m; ++s) {
                rhs[s] = targets(s, q);
                tgt2 += rhs[s] * rhs[s];
            }
            LeastSquaresResult fit = least_squares(design, rhs, 1e-13);
            res2 += fit.residual_norm * fit.residual_norm;
        }
        if (tgt2 == 0.0) return 0.0;
        return std::sqrt(res2 / tgt2);
    }

private:
    std::vector<SmoothFunction> members_;
};

} // namespace bbw
