#include "maxlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxlab {

std::optional<Grid> partial_derivative(const Grid& g, int axis) {
    const auto& w = g.window;
    if (axis < 0 || axis >= w.dim()) throw std::invalid_argument("partial_derivative: bad axis");
    if (w.extent(axis) <= 1) return std::nullopt;
    LatticeWindow out_w = w;
    out_w.hi[axis] -= 1;
    Grid out(out_w);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        Point p = out_w.point(idx);
        Point q = p;
        q[axis] += 1;
        out.values[idx] = g.at(q) - g.at(p);
    }
    return out;
}

SparseFunction partial_derivative(const SparseFunction& f, int axis) {
    if (axis < 0 || axis >= f.dim()) throw std::invalid_argument("partial_derivative: bad axis");
    std::vector<std::pair<Point, double>> entries;
    for (const auto& [p, v] : f.entries()) {
        Point back = p;
        back[axis] -= 1;
        entries.push_back({back, v});   // f(n + e) term at n = p - e
        entries.push_back({p, -v});     // -f(n) term
    }
    return SparseFunction::from_entries(f.dim(), std::move(entries));
}

double grid_gradient_l1(const Grid& g) {
    const auto& w = g.window;
    double sum = 0.0;
    for (int axis = 0; axis < w.dim(); ++axis) {
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            Point p = w.point(idx);
            if (p[axis] == w.hi[axis]) continue;
            Point q = p;
            q[axis] += 1;
            sum += std::abs(g.at(q) - g.values[idx]);
        }
    }
    return sum;
}

double total_variation_1d(std::span<const double> values) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) sum += std::abs(values[i + 1] - values[i]);
    return sum;
}

GradientNorm gradient_l1_norm(const SparseFunction& f, const Omega& om, Variant variant,
                              LatticeWindow initial, double rel_tol, int max_doublings,
                              BallCounter* counter, int threads) {
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;
    GridOptions go;
    go.variant = variant;
    go.threads = threads;
    GradientNorm out;
    out.window = initial;
    double prev = -1.0;
    for (int k = 0; k <= max_doublings; ++k) {
        Grid grid = maximal_grid(f, om, out.window, go, &bc);
        out.value = grid_gradient_l1(grid);
        out.doublings = k;
        if (prev >= 0.0) {
            double scale = std::max(std::abs(out.value), 1e-300);
            if (std::abs(out.value - prev) <= rel_tol * scale) {
                out.converged = true;
                return out;
            }
        }
        prev = out.value;
        if (k < max_doublings) out.window = out.window.doubled();
    }
    return out; // not converged within budget; value/window report the last state
}

ExtremaSequence extract_extrema(std::span<const double> values, long first_index) {
    ExtremaSequence seq;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        double prev = values[i - 1], cur = values[i], next = values[i + 1];
        if (!std::isfinite(cur)) throw std::invalid_argument("extract_extrema: non-finite value");
        if (prev <= cur && next < cur) seq.maxima.push_back(first_index + long(i));
        if (prev >= cur && next > cur) seq.minima.push_back(first_index + long(i));
    }
    return seq;
}

double default_tail_eps(const SparseFunction& f, const Omega& om, double half_width) {
    return f.l1() / double(count_lattice(om, RealVec(om.dim(), 0.0), half_width / om.lambda()));
}

VariationIdentity variation_identity_check(const SparseFunction& f, const Omega& om,
                                           std::span<const long> n_prime, long lo, long hi,
                                           double eps_tail_override, BallCounter* counter) {
    if (static_cast<int>(n_prime.size()) != om.dim() - 1)
        throw std::invalid_argument("variation_identity_check: n' must have dimension d-1");
    if (hi - lo < 2) throw std::invalid_argument("variation_identity_check: window too small");
    VariationIdentity out;
    if (f.empty()) {
        out.pass = true;
        return out;
    }
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;

    std::vector<double> line(std::size_t(hi - lo + 1));
    Point p(om.dim());
    for (std::size_t i = 0; i + 1 < p.size(); ++i) p[i] = n_prime[i];
    for (long l = lo; l <= hi; ++l) {
        p[om.dim() - 1] = l;
        line[std::size_t(l - lo)] = centered_maximal_at(f, om, p, &bc).value;
    }

    out.lhs = total_variation_1d(line);
    out.extrema = extract_extrema(line, lo);
    Point q(om.dim());
    for (std::size_t i = 0; i + 1 < q.size(); ++i) q[i] = n_prime[i];
    double sum_max = 0.0, sum_min = 0.0;
    for (long a : out.extrema.maxima) sum_max += line[std::size_t(a - lo)];
    for (long b : out.extrema.minima) sum_min += line[std::size_t(b - lo)];
    out.rhs = 2.0 * (sum_max - sum_min);
    out.gap = std::abs(out.lhs - out.rhs);

    if (eps_tail_override > 0.0) {
        out.eps_tail = eps_tail_override;
    } else {
        // certified boundary decay: Mf(b) <= l1 / N(distance to nearest support)
        double eps = 0.0;
        for (long l : {lo, hi}) {
            p[om.dim() - 1] = l;
            RealVec x0(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) x0[i] = double(p[i]);
            double rho = std::numeric_limits<double>::infinity();
            for (const auto& [s, v] : f.entries()) rho = std::min(rho, om.gauge_diff(s, x0));
            eps = std::max(eps, f.l1() / double(bc.count(x0, rho)));
        }
        out.eps_tail = eps;
    }
    out.pass = out.gap <= 4.0 * out.eps_tail;
    return out;
}

} // namespace maxlab
