#include "maxlab/verifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "maxlab/parallel.hpp"

namespace maxlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 / (C (y)_+^d) with the capped-denominator convention max{C max(y,0)^d, 1}.
double capped_inv(const GeomConstants& k, double y) {
    double denom = std::max(k.c_omega * std::pow(std::max(y, 0.0), k.d), 1.0);
    return 1.0 / denom;
}

// Gap-1 telescoped summand, valid (and decreasing) for t > lambda * c2.
double phi1(const GeomConstants& k, double t) {
    double u = t / k.lambda;
    return 1.0 / (k.c_omega * std::pow(u - k.c1, k.d)) -
           1.0 / (k.c_omega * std::pow(u + 1.0 + k.c1, k.d));
}

double binom(int n, int r) {
    double v = 1.0;
    for (int i = 0; i < r; ++i) v = v * double(n - i) / double(i + 1);
    return v;
}

// Antiderivative of u^{d-1} (u - c)^{-d}: log(u - c) - sum_k binom(d-1,k) c^k / (k (u-c)^k).
double power_antideriv(int d, double c, double u) {
    double v = std::log(u - c);
    for (int k = 1; k <= d - 1; ++k) v -= binom(d - 1, k) * std::pow(c, k) / (k * std::pow(u - c, k));
    return v;
}

// Closed form for sum over |n|_2 > U of phi1(|n|): unit cells pushed inward by
// sqrt(d)/2 and the radial integral evaluated exactly.
double tail_integral_bound(const GeomConstants& k, double U) {
    double s0 = U - std::sqrt(double(k.d));
    if (s0 <= k.lambda * (k.c2 + 1.0)) return kInf; // too close in for the monotone regime
    double sigma = 2.0 * std::pow(M_PI, k.d / 2.0) / std::tgamma(k.d / 2.0);
    double factor = std::pow(1.0 + std::sqrt(double(k.d)) / (2.0 * s0), k.d - 1);
    double u0 = s0 / k.lambda;
    double integral = power_antideriv(k.d, -(1.0 + k.c1), u0) - power_antideriv(k.d, k.c1, u0);
    return sigma * factor * std::pow(k.lambda, k.d) / k.c_omega * integral;
}

// Iterate n' over the box |n'|_inf <= T in Z^{d-1} (a single empty vector for
// d = 1), calling fn(|n'|_2^2).
template <typename Fn>
void for_each_cross_section(int d, long T, Fn&& fn) {
    const int m = d - 1;
    if (m == 0) {
        fn(0.0);
        return;
    }
    std::vector<long> n(m, -T);
    for (;;) {
        double sq = 0.0;
        for (long c : n) sq += double(c) * double(c);
        fn(sq);
        int axis = 0;
        while (axis < m && n[axis] == T) n[axis++] = -T;
        if (axis == m) break;
        ++n[axis];
    }
}

// Box sweep over Z^d, |n|_inf <= T, calling fn(|n|_2).
template <typename Fn>
void for_each_lattice_box(int d, long T, Fn&& fn) {
    std::vector<long> n(d, -T);
    for (;;) {
        double sq = 0.0;
        for (long c : n) sq += double(c) * double(c);
        fn(std::sqrt(sq));
        int axis = 0;
        while (axis < d && n[axis] == T) n[axis++] = -T;
        if (axis == d) break;
        ++n[axis];
    }
}

} // namespace

double summability_term(const GeomConstants& k, double nprime_norm2, long a, long gap) {
    double x = std::sqrt(nprime_norm2 * nprime_norm2 + double(a) * double(a));
    double first = capped_inv(k, x / k.lambda - k.c1);
    double g = double(gap);
    double second = std::min(1.0 / (k.c_omega * std::pow(k.c2 + g + k.c1, k.d)),
                             1.0 / (k.c_omega * std::pow(x / k.lambda + g + k.c1, k.d)));
    return first - second;
}

SummabilityValue summability_sum(const SummabilityInput& in) {
    const auto& a = in.a_seq;
    if (a.size() < 2) throw std::invalid_argument("summability_sum: need at least two entries");
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i] <= a[i - 1]) throw std::invalid_argument("summability_sum: sequence not increasing");
    long max_j = std::max(std::abs(a.front()), std::abs(a.back()));
    if (in.T < max_j && in.constants.d > 1)
        throw std::invalid_argument("summability_sum: T below the sequence range");

    SummabilityValue out;
    const GeomConstants& k = in.constants;
    for_each_cross_section(k.d, in.T, [&](double npsq) {
        double np = std::sqrt(npsq);
        for (std::size_t j = 1; j < a.size(); ++j) {
            double t = summability_term(k, np, a[j], a[j] - a[j - 1]);
            if (!std::isfinite(t)) throw std::overflow_error("summability_sum: non-finite term");
            out.value += t;
        }
    });

    // The computed box covers |n'|_inf <= T crossed with positions [a_min, a_max];
    // everything outside sits beyond the Euclidean radius rho, and is majorized by
    // the canonical (gap 1) telescoped tail there.
    double rho = std::min(double(in.T), std::min(double(-a.front()), double(a.back())));
    out.tail_bound = tail_integral_bound(k, rho);
    return out;
}

SummabilityReport summability_lemma_check(int sequence_trials, int insertion_trials, int d,
                                          const Omega& om, long T, std::uint64_t seed,
                                          int threads) {
    GeomConstants k = GeomConstants::of(om);
    if (k.d != d) throw std::invalid_argument("summability_lemma_check: dimension mismatch");
    std::mt19937_64 rng(seed);

    auto random_sequence = [&](int min_len) {
        std::uniform_int_distribution<int> len_dist(min_len, 41);
        std::uniform_int_distribution<long> gap_dist(1, 6);
        int len = len_dist(rng);
        std::vector<long> a(len);
        long total = 0;
        std::vector<long> gaps(len - 1);
        for (auto& g : gaps) {
            g = gap_dist(rng);
            total += g;
        }
        a[0] = -total / 2;
        for (int i = 1; i < len; ++i) a[i] = a[i - 1] + gaps[i - 1];
        return a;
    };

    struct SeqCase {
        std::vector<long> a;
    };
    struct InsCase {
        std::vector<long> base, refined;
    };
    std::vector<SeqCase> seq_cases(sequence_trials);
    for (auto& c : seq_cases) c.a = random_sequence(9);
    std::vector<InsCase> ins_cases(insertion_trials);
    for (auto& c : ins_cases) {
        for (;;) {
            auto a = random_sequence(5);
            std::vector<int> wide;
            for (std::size_t i = 1; i < a.size(); ++i)
                if (a[i] - a[i - 1] >= 2) wide.push_back(int(i));
            if (wide.empty()) continue;
            int pick = wide[std::uniform_int_distribution<int>(0, int(wide.size()) - 1)(rng)];
            std::uniform_int_distribution<long> where(a[pick - 1] + 1, a[pick] - 1);
            long inserted = where(rng);
            c.base = a;
            c.refined = a;
            c.refined.insert(c.refined.begin() + pick, inserted);
            break;
        }
    }

    SummabilityReport rep;
    rep.sequence_cases = sequence_trials;
    rep.insertion_cases = insertion_trials;

    std::vector<double> seq_excess(sequence_trials, 0.0);
    parallel_for(
        std::size_t(sequence_trials),
        [&](std::size_t i) {
            const auto& a = seq_cases[i].a;
            double s = summability_sum({a, k, T}).value;
            std::vector<long> canon(std::size_t(a.back() - a.front() + 1));
            std::iota(canon.begin(), canon.end(), a.front());
            double s_canon = summability_sum({canon, k, T}).value;
            seq_excess[i] = s - s_canon;
        },
        threads);
    std::vector<double> ins_drop(insertion_trials, 0.0);
    parallel_for(
        std::size_t(insertion_trials),
        [&](std::size_t i) {
            double before = summability_sum({ins_cases[i].base, k, T}).value;
            double after = summability_sum({ins_cases[i].refined, k, T}).value;
            ins_drop[i] = after - before;
        },
        threads);

    for (double e : seq_excess) {
        rep.max_excess = std::max(rep.max_excess, e);
        if (e > 1e-9) ++rep.sequence_failures;
    }
    for (double dlt : ins_drop) {
        rep.max_insertion_drop = std::min(rep.max_insertion_drop, dlt);
        if (dlt < -1e-9) ++rep.insertion_failures;
    }
    rep.pass = rep.sequence_failures == 0 && rep.insertion_failures == 0;
    return rep;
}

CtildeBound c_tilde_bound(int d, const Omega& om, long T) {
    GeomConstants k = GeomConstants::of(om);
    if (k.d != d) throw std::invalid_argument("c_tilde_bound: dimension mismatch");
    if (d == 3) T = std::min(T, 60L);
    CtildeBound out;
    double head_radius = k.lambda * k.c2 + 1e-12;
    for_each_lattice_box(d, T, [&](double t) {
        if (t <= head_radius) ++out.head_count;
        else if (t <= double(T)) out.lattice_part += phi1(k, t);
    });
    out.tail_majorant = tail_integral_bound(k, double(T));
    out.value = double(out.head_count) + out.lattice_part + out.tail_majorant;
    return out;
}

double h_tail(const Omega& om, double R) {
    GeomConstants k = GeomConstants::of(om);
    long box = static_cast<long>(std::ceil(R)) + (k.d <= 2 ? 128 : 24);
    double sum = 0.0;
    double lo = std::max(R, k.lambda * k.c2 + 1e-9);
    for_each_lattice_box(k.d, box, [&](double t) {
        if (t >= lo && t <= double(box)) sum += phi1(k, t);
    });
    return sum + tail_integral_bound(k, double(box));
}

Certificate boundedness_certificate(const SparseFunction& f, const Omega& om, BallCounter* counter,
                                    long T_ctilde, int threads, CertCache* cache) {
    if (f.empty()) throw std::invalid_argument("boundedness_certificate: f must be nonzero");
    const int d = om.dim();
    GeomConstants k = GeomConstants::of(om);

    double supp_radius = 0.0;
    for (const auto& [p, v] : f.entries()) {
        double sq = 0.0;
        for (long c : p) sq += double(c) * double(c);
        supp_radius = std::max(supp_radius, std::sqrt(sq));
    }
    long R = static_cast<long>(std::ceil(std::max(k.lambda * (k.c2 + 2.0), supp_radius + 1.0)));

    Certificate cert;
    cert.R = R;
    cert.window_half = 2 * R + 1;
    cert.l1 = f.l1();

    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;
    GridOptions go;
    go.threads = threads;
    Grid grid = maximal_grid(f, om, LatticeWindow::cube(d, cert.window_half), go, &bc);
    cert.window_grad = grid_gradient_l1(grid);

    double h;
    if (cache) {
        auto it = cache->h_by_R.find(R);
        if (it == cache->h_by_R.end()) it = cache->h_by_R.emplace(R, h_tail(om, double(R))).first;
        h = it->second;
    } else {
        h = h_tail(om, double(R));
    }
    double cap = std::pow(4.0 * double(R) + 1.0, d - 1) /
                 (k.c_omega * std::pow(double(R) / k.lambda - k.c1, d));
    cert.tail_per_dir = (4.0 * cap + 6.0 * h) * cert.l1;
    cert.certified_grad = cert.window_grad + double(d) * cert.tail_per_dir;

    if (cache && cache->c_tilde > 0.0) cert.c_tilde = cache->c_tilde;
    else {
        cert.c_tilde = c_tilde_bound(d, om, T_ctilde).value;
        if (cache) cache->c_tilde = cert.c_tilde;
    }
    cert.bound = 2.0 * double(d) * cert.c_tilde;
    cert.ratio = cert.window_grad / cert.l1;
    cert.certified_ratio = cert.certified_grad / cert.l1;
    cert.pass = cert.certified_ratio <= cert.bound;
    return cert;
}

// ---------------------------------------------------------------------------
// Sharpness construction

namespace {

double remark2_f(long n) { return 1.0 / (double(n) * std::pow(std::log(double(n) + 1.0), 2)); }

} // namespace

Remark2Output remark2_construct(int n_terms) {
    if (n_terms < 2) throw std::invalid_argument("remark2_construct: need at least 2 terms");
    Remark2Output out;

    // certified upper bound on sum_{n>=1} 1/(n log^2(n+1)):
    // partial sum plus the integral tail 1/log(N0)
    const long N0 = 1000000;
    long double partial = 0.0L;
    for (long n = 1; n <= N0; ++n)
        partial += 1.0L / (static_cast<long double>(n) *
                           std::pow(std::log(static_cast<long double>(n) + 1.0L), 2.0L));
    out.l1_upper = double(partial) + 1.0 / std::log(double(N0));
    const double F = out.l1_upper;

    out.f_vals.resize(n_terms);
    for (int i = 0; i < n_terms; ++i) out.f_vals[i] = remark2_f(i + 1);
    out.a_seq.resize(n_terms);
    out.a_seq[0] = 1;

    // a2: smallest integer >= 4 with f(1) > F/(2(a2-a1)+1) and f(1)/3 > F/(2(a2-a1-1)+1)
    long a2 = 4;
    while (!(out.f_vals[0] > F / (2.0 * double(a2 - 1) + 1.0) &&
             out.f_vals[0] / 3.0 > F / (2.0 * double(a2 - 2) + 1.0))) {
        ++a2;
        if (a2 > 1000000) throw std::logic_error("remark2_construct: no admissible a2");
    }
    out.a_seq[1] = a2;

    for (int i = 2; i < n_terms; ++i) {
        long prev_gap = out.a_seq[i - 1] - out.a_seq[i - 2];
        double fn = out.f_vals[i]; // conditions at index n = i+1
        long gap = prev_gap + 3;   // strict growth by more than 2
        while (!(fn > F / (2.0 * double(gap) + 1.0) &&
                 fn / 3.0 > F / (2.0 * double(gap + 1) + 1.0))) {
            ++gap;
            if (gap > 100000000) throw std::logic_error("remark2_construct: no admissible gap");
        }
        out.a_seq[i] = out.a_seq[i - 1] + gap;
    }

    std::vector<std::pair<Point, double>> entries;
    for (int i = 0; i < n_terms; ++i) entries.push_back({Point{out.a_seq[i]}, out.f_vals[i]});
    out.g = SparseFunction::from_entries(1, std::move(entries));
    return out;
}

Remark2Report remark2_verify(const Remark2Output& out, const Omega& cube_1d) {
    if (cube_1d.dim() != 1) throw std::invalid_argument("remark2_verify: omega must be 1-d");
    Remark2Report rep;
    rep.g_l1 = out.g.l1();
    BallCounter bc(cube_1d);
    rep.identities_pass = true;
    double s90 = 0.0, s95 = 0.0, s100 = 0.0;
    for (std::size_t i = 0; i < out.a_seq.size(); ++i) {
        Remark2Term term;
        term.a = out.a_seq[i];
        term.f_n = out.f_vals[i];
        term.m_at_a = centered_maximal_at(out.g, cube_1d, Point{term.a}, &bc).value;
        term.m_at_a1 = centered_maximal_at(out.g, cube_1d, Point{term.a + 1}, &bc).value;
        term.deriv = term.m_at_a1 - term.m_at_a;
        term.ok = std::abs(term.m_at_a - term.f_n) <= 1e-12 &&
                  std::abs(term.m_at_a1 - term.f_n / 3.0) <= 1e-12 &&
                  std::abs(std::abs(term.deriv) - 2.0 * term.f_n / 3.0) <= 1e-12;
        rep.identities_pass = rep.identities_pass && term.ok;
        double mag = std::abs(term.deriv);
        s90 += std::pow(mag, 0.90);
        s95 += std::pow(mag, 0.95);
        s100 += mag;
        rep.psum_p090.push_back(s90);
        rep.psum_p095.push_back(s95);
        rep.psum_p100.push_back(s100);
        rep.terms.push_back(term);
    }
    rep.psum_p100_bounded = s100 <= (2.0 / 3.0) * rep.g_l1 + 1e-12;
    rep.pass = rep.identities_pass && rep.psum_p100_bounded;
    return rep;
}

// ---------------------------------------------------------------------------
// Continuity

ContinuityReport continuity_experiment(const SparseFunction& f,
                                       const std::vector<SparseFunction>& perturbations,
                                       const Omega& om, const LatticeWindow& inclusion_window,
                                       double tol, long grid_margin, BallCounter* counter) {
    if (perturbations.empty()) throw std::invalid_argument("continuity_experiment: empty schedule");
    for (std::size_t i = 1; i < perturbations.size(); ++i)
        if (!(perturbations[i].l1() < perturbations[i - 1].l1()))
            throw std::invalid_argument("continuity_experiment: perturbation norms must strictly decrease");

    BallCounter local(om);
    BallCounter& bc = counter ? *counter : local;

    LatticeWindow hull = f.support_hull();
    for (const auto& p : perturbations) {
        if (p.empty()) continue;
        LatticeWindow ph = p.support_hull();
        for (int i = 0; i < om.dim(); ++i) {
            hull.lo[i] = std::min(hull.lo[i], ph.lo[i]);
            hull.hi[i] = std::max(hull.hi[i], ph.hi[i]);
        }
    }
    LatticeWindow gw = hull.inflated(grid_margin);

    GridOptions go;
    Grid base = maximal_grid(f, om, gw, go, &bc);

    ContinuityReport rep;
    rep.eps_margin = kInf;
    for (std::size_t idx = 0; idx < inclusion_window.size(); ++idx) {
        Point p = inclusion_window.point(idx);
        CenteredValue cv = centered_maximal_at(f, om, p, &bc, {.with_margin = true});
        rep.eps_margin = std::min(rep.eps_margin, cv.margin);
    }

    const int d = om.dim();
    for (std::size_t ki = 0; ki < perturbations.size(); ++ki) {
        ContinuityRow row;
        row.k = int(ki) + 1;
        row.pert_l1 = perturbations[ki].l1();
        SparseFunction fk = f.plus(perturbations[ki]);
        Grid gk = maximal_grid(fk, om, gw, go, &bc);
        Grid diff = gk;
        for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= base.values[i];
        row.grad_gap = grid_gradient_l1(diff); // gradient is linear, so this is |grad Mf_k - grad Mf|_1

        auto axis_norm = [&](const Grid& g) {
            double s = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                Point p = g.window.point(i);
                if (p[d - 1] == g.window.hi[d - 1]) continue;
                Point q = p;
                q[d - 1] += 1;
                s += std::abs(g.at(q) - g.values[i]);
            }
            return s;
        };
        row.norm_gap = std::abs(axis_norm(gk) - axis_norm(base));
        row.inclusion = radius_set_inclusion(f, fk, om, inclusion_window, &bc).all_included;

        if (rep.k0 < 0 && perturbations[ki].linf() <= rep.eps_margin / 3.0) rep.k0 = row.k;
        rep.rows.push_back(row);
    }
    rep.final_gap = rep.rows.back().grad_gap;
    bool inclusion_from_k0 = rep.k0 >= 0;
    for (const auto& row : rep.rows)
        if (rep.k0 >= 0 && row.k >= rep.k0) inclusion_from_k0 = inclusion_from_k0 && row.inclusion;
    rep.pass = rep.final_gap <= tol && inclusion_from_k0;
    return rep;
}

// ---------------------------------------------------------------------------
// Random sweeps

SparseFunction random_sparse(std::mt19937_64& rng, int d, int max_support, long box) {
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
        if (dup) continue;
        entries.push_back({std::move(p), 1.0 - unit(rng)}); // values in (0, 1]
    }
    return SparseFunction::from_entries(d, std::move(entries));
}

SweepReport ratio_sweep(int trials, int d, const Omega& om, std::uint64_t seed, int threads) {
    std::mt19937_64 rng(seed);
    std::vector<SparseFunction> fs;
    fs.reserve(trials);
    for (int t = 0; t < trials; ++t) fs.push_back(random_sparse(rng, d));

    SweepReport rep;
    BallCounter bc(om);
    CertCache cache;
    for (int t = 0; t < trials; ++t) {
        Certificate c = boundedness_certificate(fs[t], om, &bc, 400, threads, &cache);
        rep.rows.push_back({t, c.l1, c.window_grad, c.ratio, c.certified_ratio});
        rep.max_ratio = std::max(rep.max_ratio, c.ratio);
        rep.max_certified_ratio = std::max(rep.max_certified_ratio, c.certified_ratio);
        rep.bound = c.bound;
    }
    rep.pass = rep.max_certified_ratio <= rep.bound;
    return rep;
}

} // namespace maxlab
