#pragma once

#include <cstddef>
#include <vector>

#include "bbw/errors.hpp"

// Two-point Hermite interpolation: the unique polynomial of degree
// 2*depth - 1 matching value and derivatives 0..depth-1 at both ends of an
// interval. Built once per interval as the portable stand-in for a piecewise
// function known only through its endpoint jets.

namespace bbw {

class HermitePoly {
public:
    HermitePoly(double a, double b, const std::vector<double>& jet_a,
                const std::vector<double>& jet_b) {
        if (!(a < b)) throw DomainError("hermite: need a < b");
        if (jet_a.empty() || jet_a.size() != jet_b.size())
            throw SizeError("hermite: endpoint jets must be nonempty and equally deep");
        const std::size_t d = jet_a.size();
        const std::size_t n = 2 * d;
        nodes_.assign(n, a);
        for (std::size_t i = d; i < n; ++i) nodes_[i] = b;

        // Divided differences with repeated nodes: a run of equal nodes of
        // length k+1 takes its value from the k-th derivative over k!.
        std::vector<double> fact(d, 1.0);
        for (std::size_t k = 1; k < d; ++k) fact[k] = fact[k - 1] * static_cast<double>(k);
        std::vector<std::vector<double>> dd(n);
        for (std::size_t i = 0; i < n; ++i) {
            dd[i].resize(n - i);
            dd[i][0] = (i < d) ? jet_a[0] : jet_b[0];
        }
        for (std::size_t k = 1; k < n; ++k)
            for (std::size_t i = 0; i + k < n; ++i) {
                if (nodes_[i] == nodes_[i + k]) {
                    const std::vector<double>& jet = (i < d) ? jet_a : jet_b;
                    dd[i][k] = jet[k] / fact[k];
                } else {
                    dd[i][k] = (dd[i + 1][k - 1] - dd[i][k - 1]) / (nodes_[i + k] - nodes_[i]);
                }
            }
        coeff_.resize(n);
        for (std::size_t k = 0; k < n; ++k) coeff_[k] = dd[0][k];
    }

    // r-th derivative at x, by Horner evaluation of the Newton form with
    // derivative propagation.
    double eval(double x, int r = 0) const {
        if (r < 0) throw DomainError("hermite: negative derivative order");
        const std::size_t n = coeff_.size();
        std::vector<double> d(static_cast<std::size_t>(r) + 1, 0.0);
        d[0] = coeff_[n - 1];
        for (std::size_t m = n - 1; m-- > 0;) {
            const double t = x - nodes_[m];
            for (std::size_t q = d.size(); q-- > 1;)
                d[q] = d[q] * t + static_cast<double>(q) * d[q - 1];
            d[0] = d[0] * t + coeff_[m];
        }
        return d[static_cast<std::size_t>(r)];
    }

private:
    std::vector<double> nodes_;
    std::vector<double> coeff_;
};

} // namespace bbw
