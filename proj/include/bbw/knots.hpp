#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bbw/errors.hpp"

// Breakpoint grids on [0,1] and their nested refinements. A refinement step
// inserts exactly one new knot strictly inside every interval, so coarse
// knots sit at even positions of the fine grid and new knots at odd ones.

namespace bbw {

class KnotGrid {
public:
    explicit KnotGrid(std::vector<double> knots) : knots_(std::move(knots)) {
        if (knots_.size() < 2) throw SizeError("knot grid needs at least 2 knots");
        if (knots_.front() != 0.0 || knots_.back() != 1.0)
            throw DomainError("knot grid must start at exactly 0 and end at exactly 1");
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
            if (!(knots_[i] < knots_[i + 1]))
                throw DomainError("knots must be strictly increasing (violated at index " +
                                  std::to_string(i + 1) + ")");
    }

    std::size_t size() const { return knots_.size(); }
    std::size_t intervals() const { return knots_.size() - 1; }
    double operator[](std::size_t i) const { return knots_[i]; }
    const std::vector<double>& data() const { return knots_; }

    bool operator==(const KnotGrid& other) const { return knots_ == other.knots_; }

    // Interval index i with x in (x_i, x_{i+1}]; an interior knot belongs to
    // the interval on its left, so one-sided values at knots come out as left
    // limits. x = 0 belongs to interval 0.
    std::size_t interval_of(double x) const {
        if (x < 0.0 || x > 1.0)
            throw DomainError("point " + std::to_string(x) + " outside [0,1]");
        if (x == 0.0) return 0;
        const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
        return static_cast<std::size_t>(it - knots_.begin()) - 1;
    }

    // Affine chart of interval i: center (midpoint) and scale (half-width).
    // Local coordinate u = (x - center)/scale covers [-1,1] on the interval.
    std::pair<double, double> chart(std::size_t i) const {
        return {0.5 * (knots_[i] + knots_[i + 1]), 0.5 * (knots_[i + 1] - knots_[i])};
    }

    double interval_length(std::size_t i) const { return knots_[i + 1] - knots_[i]; }

private:
    std::vector<double> knots_;
};

// Insert the midpoint of every interval.
inline KnotGrid refine_midpoint(const KnotGrid& coarse) {
    std::vector<double> fine;
    fine.reserve(2 * coarse.size() - 1);
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        fine.push_back(coarse[i]);
        fine.push_back(0.5 * (coarse[i] + coarse[i + 1]));
    }
    fine.push_back(coarse[coarse.size() - 1]);
    return KnotGrid(std::move(fine));
}

// Insert one caller-chosen point per interval; points[i] must lie strictly
// inside interval i.
inline KnotGrid refine_points(const KnotGrid& coarse, const std::vector<double>& points) {
    if (points.size() != coarse.intervals())
        throw SizeError("need exactly one insertion point per interval");
    std::vector<double> fine;
    fine.reserve(2 * coarse.size() - 1);
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        if (!(coarse[i] < points[i] && points[i] < coarse[i + 1]))
            throw DomainError("insertion point " + std::to_string(points[i]) +
                              " not inside interval " + std::to_string(i));
        fine.push_back(coarse[i]);
        fine.push_back(points[i]);
    }
    fine.push_back(coarse[coarse.size() - 1]);
    return KnotGrid(std::move(fine));
}

class KnotHierarchy {
public:
    // Grids from coarse (index 0) to fine; consecutive grids must satisfy the
    // one-knot-per-interval nesting, with coarse knots reappearing bitwise.
    explicit KnotHierarchy(std::vector<KnotGrid> levels) : levels_(std::move(levels)) {
        if (levels_.empty()) throw SizeError("hierarchy needs at least one grid");
        for (std::size_t j = 0; j + 1 < levels_.size(); ++j) {
            const KnotGrid& c = levels_[j];
            const KnotGrid& f = levels_[j + 1];
            if (f.size() != 2 * c.size() - 1)
                throw SizeError("level " + std::to_string(j + 1) +
                                " must have exactly one new knot per coarse interval");
            for (std::size_t k = 0; k < c.size(); ++k)
                if (f[2 * k] != c[k])
                    throw DomainError("coarse knot " + std::to_string(k) +
                                      " not reproduced at level " + std::to_string(j + 1));
        }
    }

    std::size_t depth() const { return levels_.size(); }
    std::size_t refinements() const { return levels_.size() - 1; }
    const KnotGrid& grid(std::size_t j) const {
        if (j >= levels_.size()) throw SizeError("no grid at level " + std::to_string(j));
        return levels_[j];
    }
    const KnotGrid& coarsest() const { return levels_.front(); }
    const KnotGrid& finest() const { return levels_.back(); }

private:
    std::vector<KnotGrid> levels_;
};

// Repeated midpoint refinement: grids 0..refinements.
inline KnotHierarchy build_midpoint_hierarchy(KnotGrid coarse, std::size_t refinements) {
    std::vector<KnotGrid> levels;
    levels.push_back(std::move(coarse));
    for (std::size_t j = 0; j < refinements; ++j)
        levels.push_back(refine_midpoint(levels.back()));
    return KnotHierarchy(std::move(levels));
}

} // namespace bbw
