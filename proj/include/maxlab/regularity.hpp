#pragma once

#include <optional>
#include <span>

#include "maxlab/grid.hpp"
#include "maxlab/maximal.hpp"
#include "maxlab/sparse_function.hpp"

namespace maxlab {

// Forward difference along e_axis; the window shrinks by one along that axis.
// A window of extent 1 along the axis has no differences: nullopt.
std::optional<Grid> partial_derivative(const Grid& g, int axis);
SparseFunction partial_derivative(const SparseFunction& f, int axis);

// Sum of |g(n + e_i) - g(n)| over all i and all pairs with both ends inside
// the window.
double grid_gradient_l1(const Grid& g);

double total_variation_1d(std::span<const double> values);

struct GradientNorm {
    double value = 0.0;
    bool converged = false;
    LatticeWindow window; // the window at which the value was accepted
    int doublings = 0;
};

// Windowed gradient norm of the maximal function, re-evaluated on doubled
// windows until the relative change drops below rel_tol.
GradientNorm gradient_l1_norm(const SparseFunction& f, const Omega& om, Variant variant,
                              LatticeWindow initial, double rel_tol = 1e-6, int max_doublings = 8,
                              BallCounter* counter = nullptr, int threads = 0);

// Alternating local extrema of a line profile, paper convention: a maximum has
// g(a-1) <= g(a), g(a+1) < g(a); a minimum has g(b-1) >= g(b), g(b+1) > g(b).
// Both select the right end of a plateau. Indices are absolute (first_index
// names values[0]).
struct ExtremaSequence {
    std::vector<long> maxima;
    std::vector<long> minima;
};

ExtremaSequence extract_extrema(std::span<const double> values, long first_index);

struct VariationIdentity {
    double lhs = 0.0;      // windowed sum of |d/dx_d Mf| over the line
    double rhs = 0.0;      // 2 * (sum of maxima - sum of minima)
    double gap = 0.0;
    double eps_tail = 0.0; // certified bound on Mf at the window ends
    bool pass = false;     // gap <= 4 * eps_tail
    ExtremaSequence extrema;
};

// Evaluates Mf along the line {(n', l) : lo <= l <= hi} (last axis) and checks
// the extrema decomposition of the line's variation. eps_tail defaults to the
// certified decay bound at the two window ends.
VariationIdentity variation_identity_check(const SparseFunction& f, const Omega& om,
                                           std::span<const long> n_prime, long lo, long hi,
                                           double eps_tail_override = 0.0,
                                           BallCounter* counter = nullptr);

// l1(f) / N(half_width / lambda): the certified decay level outside a window
// of the given half-width.
double default_tail_eps(const SparseFunction& f, const Omega& om, double half_width);

} // namespace maxlab
