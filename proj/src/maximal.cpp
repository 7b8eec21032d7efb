#include "maxlab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "maxlab/parallel.hpp"

namespace maxlab {

namespace {

RealVec to_real(std::span<const long> n) {
    RealVec x(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) x[i] = double(n[i]);
    return x;
}

std::string counter_key(std::span<const double> x0, double r) {
    std::string key((x0.size() + 1) * sizeof(double), '\0');
    for (std::size_t i = 0; i < x0.size(); ++i) {
        double frac = x0[i] - std::floor(x0[i]);
        std::memcpy(key.data() + i * sizeof(double), &frac, sizeof(double));
    }
    std::memcpy(key.data() + x0.size() * sizeof(double), &r, sizeof(double));
    return key;
}

// Distance profile of |f| as seen from a center: distinct gauge radii with
// cumulative masses. The ball sum is constant between consecutive radii.
struct MassProfile {
    std::vector<double> radii;
    std::vector<double> cum_mass;

    double mass_at(double r) const {
        // mass of the closed ball of radius r
        auto it = std::upper_bound(radii.begin(), radii.end(), r + radius_tol(r));
        if (it == radii.begin()) return 0.0;
        return cum_mass[std::size_t(it - radii.begin()) - 1];
    }
};

MassProfile mass_profile(const SparseFunction& f, std::span<const double> x0, const Omega& om) {
    std::vector<std::pair<double, double>> dist;
    dist.reserve(f.support_size());
    for (const auto& [s, v] : f.entries()) dist.push_back({om.gauge_diff(s, x0), std::abs(v)});
    std::sort(dist.begin(), dist.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    MassProfile prof;
    double cum = 0.0;
    for (const auto& [rho, m] : dist) {
        cum += m;
        if (!prof.radii.empty() && rho - prof.radii.back() <= radius_tol(rho))
            prof.cum_mass.back() = cum;
        else {
            prof.radii.push_back(rho);
            prof.cum_mass.push_back(cum);
        }
    }
    return prof;
}

// Smallest gauge radius strictly beyond rho at which the lattice count jumps.
double next_count_jump(const Omega& om, std::span<const double> x0, double rho) {
    for (double step = 1.0; step <= 64.0; step *= 2.0) {
        double best = -1.0;
        for (const auto& m : enumerate_ball(om, x0, rho + step)) {
            double g = om.gauge_diff(m, x0);
            if (g > rho + radius_tol(rho) && (best < 0 || g < best)) best = g;
        }
        if (best >= 0) return best;
    }
    throw std::logic_error("next_count_jump: no jump found within search range");
}

} // namespace

long BallCounter::count_or_zero(std::span<const double> x0, double r) {
    std::string key = counter_key(x0, r);
    {
        std::shared_lock lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    RealVec frac(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) frac[i] = x0[i] - std::floor(x0[i]);
    long n = count_lattice_or_zero(om_, frac, r);
    std::unique_lock lock(mu_);
    cache_.emplace(std::move(key), n);
    return n;
}

long BallCounter::count(std::span<const double> x0, double r) {
    long n = count_or_zero(x0, r);
    if (n == 0) throw std::domain_error("BallCounter: no lattice point to average");
    return n;
}

double average(const SparseFunction& f, const Omega& om, std::span<const double> x0, double r,
               BallCounter* counter) {
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;
    long n = bc.count(x0, r);
    return mass_profile(f, x0, om).mass_at(r) / double(n);
}

CenteredValue centered_maximal_at(const SparseFunction& f, const Omega& om,
                                  std::span<const long> n, BallCounter* counter,
                                  const CenteredOptions& opts) {
    CenteredValue out;
    if (f.empty()) {
        out.realizers.radii = {0.0};
        out.realizers.min_radius = 0.0;
        return out;
    }
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;

    RealVec x0 = to_real(n);
    MassProfile prof = mass_profile(f, x0, om);
    const double l1 = prof.cum_mass.back();
    const double c_om = om.volume();
    const double c1 = om.c1();
    const double r_cert = om.certified_rmax();
    const int d = om.dim();

    struct Scanned {
        double rho, avg, mass;
    };
    std::vector<Scanned> scanned;
    scanned.reserve(prof.radii.size() + 1);
    if (prof.radii.front() > 0.0) scanned.push_back({0.0, 0.0, 0.0}); // r = 0 term, no mass here

    double best = scanned.empty() ? -1.0 : 0.0;
    double tail_bound = 0.0;
    out.scan_stop = prof.radii.back();
    for (std::size_t k = 0; k < prof.radii.size(); ++k) {
        double rho = prof.radii[k];
        // certified stop: averages past rho are <= l1 / (C (rho - c1)_+^d), and the
        // count lower bound extends beyond r_cert by monotonicity of N.
        if (best > 0.0 && rho <= r_cert) {
            double denom = std::max(c_om * std::pow(std::max(rho - c1, 0.0), d), 1.0);
            double bound = l1 / denom;
            if (bound < best) {
                out.truncated = true;
                out.scan_stop = rho;
                tail_bound = bound;
                break;
            }
        }
        long cnt = bc.count(x0, rho);
        double avg = prof.cum_mass[k] / double(cnt);
        scanned.push_back({rho, avg, prof.cum_mass[k]});
        best = std::max(best, avg);
        // unconditional stop: for r >= rho, A_r <= l1 / N(rho)
        if (l1 / double(cnt) < best && k + 1 < prof.radii.size()) {
            out.truncated = true;
            out.scan_stop = rho;
            tail_bound = l1 / double(cnt);
            break;
        }
    }

    out.value = best;
    for (const auto& s : scanned)
        if (s.avg >= best * (1.0 - 1e-12)) out.realizers.radii.push_back(s.rho);
    out.realizers.min_radius = out.realizers.radii.front();

    if (opts.with_margin) {
        double second = 0.0;
        for (const auto& s : scanned) {
            if (s.avg >= best * (1.0 - 1e-12)) {
                // realizing stretch ends at the next count jump; value drops to mass/N'
                double jump = next_count_jump(om, x0, s.rho);
                second = std::max(second, s.mass / double(bc.count(x0, jump)));
            } else {
                second = std::max(second, s.avg);
            }
        }
        if (out.truncated) second = std::max(second, tail_bound);
        out.second_value = second;
        out.margin = best - second;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Non-centered operator

namespace {

// Dense |f| mass over the support hull with axiswise prefix sums; box masses
// by corner inclusion-exclusion.
struct PrefixMass {
    LatticeWindow hull;
    std::vector<double> table;

    PrefixMass(const SparseFunction& f, const LatticeWindow& h) : hull(h), table(h.size(), 0.0) {
        for (const auto& [p, v] : f.entries())
            if (hull.contains(p)) table[hull.index(p)] += std::abs(v);
        const int d = hull.dim();
        // prefix along each axis in turn
        for (int axis = 0; axis < d; ++axis) {
            std::size_t n = table.size();
            for (std::size_t idx = 0; idx < n; ++idx) {
                Point p = hull.point(idx);
                if (p[axis] == hull.lo[axis]) continue;
                Point q = p;
                q[axis] -= 1;
                table[hull.index(p)] += table[hull.index(q)];
            }
        }
    }

    // prefix value of the box hull.lo .. p (clamped); zero below the hull
    double corner(Point p) const {
        for (int i = 0; i < hull.dim(); ++i) {
            if (p[i] < hull.lo[i]) return 0.0;
            p[i] = std::min(p[i], hull.hi[i]);
        }
        return table[hull.index(p)];
    }

    double box(const Point& lo, const Point& hi) const {
        const int d = hull.dim();
        double sum = 0.0;
        for (unsigned mask = 0; mask < (1u << d); ++mask) {
            Point p = hi;
            int parity = 0;
            for (int i = 0; i < d; ++i)
                if (mask & (1u << i)) {
                    p[i] = lo[i] - 1;
                    ++parity;
                }
            double c = corner(std::move(p));
            sum += (parity % 2 == 0) ? c : -c;
        }
        return sum;
    }
};

NoncenteredValue noncentered_1d(const SparseFunction& f, const Omega& om, long n) {
    LatticeWindow hull = f.support_hull();
    long lo = std::min(hull.lo[0], n);
    long hi = std::max(hull.hi[0], n);
    std::vector<double> prefix(std::size_t(hi - lo + 2), 0.0);
    for (long m = lo; m <= hi; ++m)
        prefix[std::size_t(m - lo + 1)] = prefix[std::size_t(m - lo)] + std::abs(f.at(Point{m}));

    // left extent of the normalized body: Omega = (-a, 1), gauge(-1) = 1/a
    RealVec neg(1, -1.0);
    double a = 1.0 / om.gauge(neg);

    NoncenteredValue out;
    out.value = -1.0;
    std::vector<std::pair<long, long>> arg;
    for (long A = lo; A <= n; ++A)
        for (long B = n; B <= hi; ++B) {
            double mass = prefix[std::size_t(B - lo + 1)] - prefix[std::size_t(A - lo)];
            double val = mass / double(B - A + 1);
            if (val > out.value * (1.0 + 1e-15)) {
                out.value = val;
                arg.clear();
            }
            if (val >= out.value * (1.0 - 1e-12)) arg.push_back({A, B});
        }
    for (auto [A, B] : arg) {
        BallPair bp;
        bp.radius = double(B - A) / (1.0 + a);
        bp.center = {(a * double(B) + double(A)) / (1.0 + a)};
        out.realizers.push_back(std::move(bp));
    }
    out.exact = true;
    return out;
}

// Sup-norm balls intersect Z^d in boxes whose per-axis counts are floor(2r) or
// floor(2r)+1, so the achievable lattice sets are exactly the boxes with side
// lengths pairwise within 1, realized by half-integer centers with 2r = min side.
NoncenteredValue noncentered_box(const SparseFunction& f, std::span<const long> n) {
    const int d = static_cast<int>(n.size());
    LatticeWindow hull = f.support_hull();
    for (int i = 0; i < d; ++i) {
        hull.lo[i] = std::min(hull.lo[i], n[i]);
        hull.hi[i] = std::max(hull.hi[i], n[i]);
    }
    long max_ext = 1;
    for (int i = 0; i < d; ++i) max_ext = std::max(max_ext, hull.extent(i));
    PrefixMass pm(f, f.support_hull());

    NoncenteredValue out;
    out.value = -1.0;
    std::vector<std::pair<Point, Point>> arg; // (lo, hi) boxes

    Point blo(d), bhi(d), sides(d);
    for (long s = 1; s <= max_ext; ++s) {
        for (unsigned mask = 0; mask + 1 < (1u << d); ++mask) { // full mask == all (s+1): covered at s+1
            long cells = 1;
            for (int i = 0; i < d; ++i) {
                sides[i] = s + ((mask >> i) & 1u);
                cells *= sides[i];
            }
            // offsets: box must contain n
            auto sweep = [&](auto&& self, int axis) -> void {
                if (axis == d) {
                    double mass = pm.box(blo, bhi);
                    if (mass <= 0.0) return;
                    double val = mass / double(cells);
                    if (val > out.value * (1.0 + 1e-15)) {
                        out.value = val;
                        arg.clear();
                    }
                    if (val >= out.value * (1.0 - 1e-12)) arg.push_back({blo, bhi});
                    return;
                }
                for (long A = n[axis] - sides[axis] + 1; A <= n[axis]; ++A) {
                    blo[axis] = A;
                    bhi[axis] = A + sides[axis] - 1;
                    self(self, axis + 1);
                }
            };
            sweep(sweep, 0);
        }
    }
    if (out.value < 0) { // no mass anywhere
        out.value = 0.0;
        return out;
    }
    for (const auto& [lo, hi] : arg) {
        long s = hi[0] - lo[0] + 1;
        for (int i = 1; i < d; ++i) s = std::min(s, hi[i] - lo[i] + 1);
        BallPair bp;
        bp.radius = double(s) / 2.0;
        bp.center.resize(d);
        for (int i = 0; i < d; ++i) {
            long side = hi[i] - lo[i] + 1;
            bp.center[i] = (side == s + 1) ? double(lo[i]) + double(s) / 2.0
                                           : double(lo[i]) + double(s - 1) / 2.0;
        }
        out.realizers.push_back(std::move(bp));
    }
    out.exact = true;
    return out;
}

NoncenteredValue noncentered_grid_approx(const SparseFunction& f, const Omega& om,
                                         std::span<const long> n, int q, BallCounter& bc) {
    const int d = om.dim();
    LatticeWindow hull = f.support_hull();
    for (int i = 0; i < d; ++i) {
        hull.lo[i] = std::min(hull.lo[i], n[i]);
        hull.hi[i] = std::max(hull.hi[i], n[i]);
    }
    long max_ext = 1;
    for (int i = 0; i < d; ++i) max_ext = std::max(max_ext, hull.extent(i));
    long pad = static_cast<long>(std::ceil(om.lambda() * double(max_ext) / 2.0)) + 2;
    LatticeWindow region = hull.inflated(pad);

    double cells = 1.0;
    for (int i = 0; i < d; ++i) cells *= double(region.extent(i)) * q;
    if (cells > 2e7) throw std::runtime_error("noncentered grid approximation: center grid too large");

    NoncenteredValue out;
    out.exact = false;
    out.value = 0.0;

    std::vector<long> k(d);
    RealVec c(d);
    auto visit_center = [&](auto&& self, int axis) -> void {
        if (axis == d) {
            double r_n = 0.0;
            {
                RealVec y(d);
                for (int i = 0; i < d; ++i) y[i] = double(n[i]) - c[i];
                r_n = om.gauge(y);
            }
            MassProfile prof = mass_profile(f, c, om);
            std::vector<double> radii{r_n};
            for (double rho : prof.radii)
                if (rho > r_n + radius_tol(rho)) radii.push_back(rho);
            for (double r : radii) {
                long cnt = bc.count_or_zero(c, r);
                if (cnt == 0) continue;
                double val = prof.mass_at(r) / double(cnt);
                if (val > out.value * (1.0 + 1e-15)) {
                    out.value = val;
                    out.realizers.clear();
                }
                if (val > 0 && val >= out.value * (1.0 - 1e-12))
                    out.realizers.push_back({c, r});
            }
            return;
        }
        for (k[axis] = region.lo[axis] * q; k[axis] <= region.hi[axis] * q; ++k[axis]) {
            c[axis] = double(k[axis]) / double(q);
            self(self, axis + 1);
        }
    };
    visit_center(visit_center, 0);
    return out;
}

} // namespace

NoncenteredValue noncentered_maximal_at(const SparseFunction& f, const Omega& om,
                                        std::span<const long> n, const NoncenteredOptions& opts,
                                        BallCounter* counter) {
    if (static_cast<int>(n.size()) != om.dim())
        throw std::invalid_argument("noncentered_maximal_at: dimension mismatch");
    NoncenteredValue out;
    if (f.empty()) {
        out.value = 0.0;
        out.realizers.push_back({to_real(n), 0.0});
        return out;
    }
    if (om.dim() == 1) return noncentered_1d(f, om, n[0]);
    if (om.kind() == Omega::Kind::lp && std::isinf(om.p())) return noncentered_box(f, n);
    if (opts.require_exact)
        throw std::invalid_argument(
            "noncentered_maximal_at: exact evaluation for d >= 2 is available only for the sup-norm "
            "ball; general bodies use the grid approximation");
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;
    return noncentered_grid_approx(f, om, n, std::max(1, opts.center_refine_q), bc);
}

Grid maximal_grid(const SparseFunction& f, const Omega& om, const LatticeWindow& window,
                  const GridOptions& opts, BallCounter* counter) {
    if (window.dim() != om.dim()) throw std::invalid_argument("maximal_grid: dimension mismatch");
    if (window.size() > opts.max_cells)
        throw std::runtime_error("maximal_grid: window exceeds the memory guard");
    Grid grid(window);
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;
    parallel_for(
        grid.size(),
        [&](std::size_t idx) {
            Point p = window.point(idx);
            if (opts.variant == Variant::centered)
                grid.values[idx] = centered_maximal_at(f, om, p, &bc).value;
            else
                grid.values[idx] = noncentered_maximal_at(f, om, p, opts.nc, &bc).value;
        },
        opts.threads);
    return grid;
}

InclusionReport radius_set_inclusion(const SparseFunction& f, const SparseFunction& g,
                                     const Omega& om, const LatticeWindow& window,
                                     BallCounter* counter) {
    if (f.dim() != g.dim()) throw std::invalid_argument("radius_set_inclusion: dimension mismatch");
    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;
    InclusionReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    std::size_t count = window.size();
    rep.points.resize(count);
    parallel_for(count, [&](std::size_t idx) {
        Point p = window.point(idx);
        CenteredValue fv = centered_maximal_at(f, om, p, &bc, {.with_margin = true});
        CenteredValue gv = centered_maximal_at(g, om, p, &bc);
        InclusionPoint ip;
        ip.n = p;
        ip.margin = fv.margin;
        RealVec x0 = to_real(p);
        MassProfile prof = mass_profile(f, x0, om);
        for (double rho : gv.realizers.radii) {
            double avg = prof.mass_at(rho) / double(bc.count(x0, rho));
            if (avg < fv.value * (1.0 - 1e-12)) {
                ip.included = false;
                ip.offending_radius = rho;
                break;
            }
        }
        rep.points[idx] = std::move(ip);
    });
    for (const auto& ip : rep.points) {
        rep.all_included = rep.all_included && ip.included;
        rep.min_margin = std::min(rep.min_margin, ip.margin);
    }
    return rep;
}

} // namespace maxlab
