#pragma once

// Independent reference implementations used as test oracles. These stay on
// the dumbest possible path (full box scans, untruncated radius sweeps) so
// they share no pruning or caching logic with the library.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "maxlab/geometry.hpp"
#include "maxlab/maximal.hpp"
#include "maxlab/sparse_function.hpp"

namespace oracle {

using maxlab::Omega;
using maxlab::Point;
using maxlab::RealVec;
using maxlab::SparseFunction;

// Full box scan with a direct gauge test; no per-axis interval logic.
inline std::vector<Point> enumerate_ball(const Omega& om, const RealVec& x0, double r) {
    const int d = om.dim();
    double pad = om.lambda() * r + 1.0;
    std::vector<long> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = long(std::floor(x0[i] - pad));
        hi[i] = long(std::ceil(x0[i] + pad));
    }
    std::vector<Point> out;
    Point n(lo.begin(), lo.end());
    for (;;) {
        RealVec y(d);
        for (int i = 0; i < d; ++i) y[i] = double(n[i]) - x0[i];
        if (om.gauge(y) <= r + maxlab::radius_tol(r)) out.push_back(n);
        int axis = 0;
        while (axis < d && n[axis] == hi[axis]) n[axis] = lo[axis], ++axis;
        if (axis == d) break;
        ++n[axis];
    }
    return out;
}

inline long count_ball(const Omega& om, const RealVec& x0, double r) {
    return long(enumerate_ball(om, x0, r).size());
}

inline double ball_average(const SparseFunction& f, const Omega& om, const RealVec& x0, double r) {
    double mass = 0.0;
    for (const auto& [s, v] : f.entries()) {
        RealVec y(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) y[i] = double(s[i]) - x0[i];
        if (om.gauge(y) <= r + maxlab::radius_tol(r)) mass += std::abs(v);
    }
    return mass / double(count_ball(om, x0, r));
}

// Untruncated centered maximal value: every critical radius of the support up
// to the cap, no stopping rule.
inline double centered_maximal(const SparseFunction& f, const Omega& om, const Point& n,
                               double radius_cap = -1.0) {
    if (f.empty()) return 0.0;
    RealVec x0(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) x0[i] = double(n[i]);
    std::vector<double> all{0.0};
    for (const auto& [s, v] : f.entries()) {
        RealVec y(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) y[i] = double(s[i]) - x0[i];
        all.push_back(om.gauge(y));
    }
    double best = 0.0;
    for (double r : all) {
        if (radius_cap >= 0 && r > radius_cap) continue;
        best = std::max(best, ball_average(f, om, x0, r));
    }
    return best;
}

// d = 1 non-centered oracle over all integer intervals containing n.
inline double noncentered_1d(const SparseFunction& f, long n) {
    if (f.empty()) return 0.0;
    auto hull = f.support_hull();
    long lo = std::min(hull.lo[0], n), hi = std::max(hull.hi[0], n);
    double best = 0.0;
    for (long A = lo; A <= n; ++A)
        for (long B = n; B <= hi; ++B) {
            double mass = 0.0;
            for (const auto& [s, v] : f.entries())
                if (s[0] >= A && s[0] <= B) mass += std::abs(v);
            best = std::max(best, mass / double(B - A + 1));
        }
    return best;
}

// Dense (center, radius) grid search; a lower bound that converges to the
// non-centered value as the grid refines. Centers on the (1/q)-grid inside the
// padded hull, radii at the critical distances of supp(f) and of n.
inline double noncentered_grid(const SparseFunction& f, const Omega& om, const Point& n, int q,
                               long pad) {
    const int d = om.dim();
    auto hull = f.support_hull();
    for (int i = 0; i < d; ++i) {
        hull.lo[i] = std::min(hull.lo[i], n[i]) - pad;
        hull.hi[i] = std::max(hull.hi[i], n[i]) + pad;
    }
    double best = 0.0;
    std::vector<long> k(d);
    for (int i = 0; i < d; ++i) k[i] = hull.lo[i] * q;
    for (;;) {
        RealVec c(d);
        for (int i = 0; i < d; ++i) c[i] = double(k[i]) / q;
        RealVec yn(d);
        for (int i = 0; i < d; ++i) yn[i] = double(n[i]) - c[i];
        double rn = om.gauge(yn);
        std::vector<double> radii{rn};
        for (const auto& [s, v] : f.entries()) {
            RealVec y(d);
            for (int i = 0; i < d; ++i) y[i] = double(s[i]) - c[i];
            double g = om.gauge(y);
            if (g >= rn) radii.push_back(g);
        }
        for (double r : radii) {
            long cnt = count_ball(om, c, r);
            if (cnt == 0) continue;
            double mass = 0.0;
            for (const auto& [s, v] : f.entries()) {
                RealVec y(d);
                for (int i = 0; i < d; ++i) y[i] = double(s[i]) - c[i];
                if (om.gauge(y) <= r + maxlab::radius_tol(r)) mass += std::abs(v);
            }
            best = std::max(best, mass / double(cnt));
        }
        int axis = 0;
        while (axis < d && k[axis] == hull.hi[axis] * q) k[axis] = hull.lo[axis] * q, ++axis;
        if (axis == d) break;
        ++k[axis];
    }
    return best;
}

inline SparseFunction random_small(std::mt19937_64& rng, int d, int max_support = 8, long box = 20) {
    std::uniform_int_distribution<int> size_dist(1, max_support);
    std::uniform_int_distribution<long> coord(-box, box);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int size = size_dist(rng);
    std::vector<std::pair<Point, double>> entries;
    while (int(entries.size()) < size) {
        Point p(d);
        for (auto& c : p) c = coord(rng);
        bool dup = false;
        for (const auto& e : entries) dup = dup || e.first == p;
        if (!dup) entries.push_back({std::move(p), 1.0 - unit(rng)});
    }
    return SparseFunction::from_entries(d, std::move(entries));
}

} // namespace oracle
