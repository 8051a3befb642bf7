#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "bbw/errors.hpp"

namespace bbw {

// Gauss-Legendre rule on [-1, 1]. Nodes are the Legendre roots found by
// Newton iteration from the Chebyshev initial guess; exact for polynomials of
// degree 2*points - 1.
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline const QuadRule& gauss_legendre(std::size_t points) {
    if (points == 0) throw DomainError("gauss_legendre: need at least one point");
    static std::map<std::size_t, QuadRule> cache;
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;

    QuadRule rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    const std::size_t n = points;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence for P_n(x) and its derivative.
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return cache.emplace(points, std::move(rule)).first->second;
}

// Integrate f over [a, b] with a fixed-order rule.
template <typename F>
double integrate(F&& f, double a, double b, std::size_t points) {
    const QuadRule& rule = gauss_legendre(points);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

} // namespace bbw
