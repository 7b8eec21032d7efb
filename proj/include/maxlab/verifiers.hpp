#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "maxlab/maximal.hpp"
#include "maxlab/regularity.hpp"

namespace maxlab {

struct GeomConstants {
    int d = 1;
    double c_omega = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double lambda = 1.0;
    static GeomConstants of(const Omega& om) {
        return {om.dim(), om.volume(), om.c1(), om.c2(), om.lambda()};
    }
};

// One summand of the gradient-contribution functional at cross-section n' and
// sequence entry a with preceding gap: the capped reciprocal of the count
// lower bound minus the min of the two count upper-bound reciprocals.
double summability_term(const GeomConstants& k, double nprime_norm2, long a, long gap);

struct SummabilityInput {
    std::vector<long> a_seq; // strictly increasing; summed over entries with a predecessor
    GeomConstants constants;
    long T = 100; // |n'|_inf truncation
};

struct SummabilityValue {
    double value = 0.0;
    double tail_bound = 0.0; // canonical-telescoped majorant of the untruncated region
};

SummabilityValue summability_sum(const SummabilityInput& in);

struct SummabilityReport {
    int insertion_cases = 0;
    int insertion_failures = 0;
    int sequence_cases = 0;
    int sequence_failures = 0;
    double max_insertion_drop = 0.0; // most negative S(refined) - S(base) observed
    double max_excess = 0.0;         // most positive S({a_j}) - S(canonical) observed
    bool pass = false;
};

// (a) single-insertion monotonicity on constructed cases, (b) domination of
// random increasing sequences by consecutive integers at matched truncation.
SummabilityReport summability_lemma_check(int sequence_trials, int insertion_trials, int d,
                                          const Omega& om, long T, std::uint64_t seed,
                                          int threads = 0);

struct CtildeBound {
    double value = 0.0;
    long head_count = 0;        // lattice points with |n| <= lambda * c2
    double lattice_part = 0.0;  // telescoped sum up to |n|_inf <= T
    double tail_majorant = 0.0; // closed-form integral bound past T
};

CtildeBound c_tilde_bound(int d, const Omega& om, long T);

// Upper bound on sum over |n|_2 >= R of the gap-1 telescoped summand.
double h_tail(const Omega& om, double R);

struct Certificate {
    double l1 = 0.0;
    double window_grad = 0.0;    // gradient norm inside the certificate window
    double tail_per_dir = 0.0;   // certified bound on one direction's mass outside
    double certified_grad = 0.0; // window_grad + d * tail_per_dir
    double ratio = 0.0;          // window_grad / l1
    double certified_ratio = 0.0;
    double c_tilde = 0.0;
    double bound = 0.0; // 2 * d * c_tilde
    long R = 0;
    long window_half = 0;
    bool pass = false;
};

// Shared lookups for certificate sweeps (single-threaded access).
struct CertCache {
    double c_tilde = 0.0;
    std::map<long, double> h_by_R;
};

// Endpoint gradient bound check: certified |grad Mf|_1 / |f|_1 <= 2 d Ctilde.
// The tail outside the window uses the R-window decomposition: whole far lines
// plus the two far caps, each majorized through h(R) once supp(f) sits inside
// the Euclidean R-ball and R/lambda > c2.
Certificate boundedness_certificate(const SparseFunction& f, const Omega& om,
                                    BallCounter* counter = nullptr, long T_ctilde = 400,
                                    int threads = 0, CertCache* cache = nullptr);

struct Remark2Output {
    std::vector<double> f_vals; // f(n) = 1/(n log^2(n+1)), n = 1..terms
    std::vector<long> a_seq;
    SparseFunction g; // g(a_n) = f(n)
    double l1_upper = 0.0;
};

// Greedy spike placement: each gap is the smallest integer meeting the gap
// growth and both average-domination conditions against the certified l1
// upper bound of f.
Remark2Output remark2_construct(int n_terms);

struct Remark2Term {
    long a = 0;
    double f_n = 0.0;
    double m_at_a = 0.0;
    double m_at_a1 = 0.0;
    double deriv = 0.0;
    bool ok = false;
};

struct Remark2Report {
    std::vector<Remark2Term> terms;
    std::vector<double> psum_p090, psum_p095, psum_p100; // partial sums of |deriv|^p
    double g_l1 = 0.0;
    bool identities_pass = false;
    bool psum_p100_bounded = false; // stays <= (2/3) |g|_1
    bool pass = false;
};

Remark2Report remark2_verify(const Remark2Output& out, const Omega& cube_1d);

struct ContinuityRow {
    int k = 0;
    double pert_l1 = 0.0;
    double grad_gap = 0.0; // windowed |grad M f_k - grad M f|_1
    double norm_gap = 0.0; // windowed | |d_d M f_k|_1 - |d_d M f|_1 |
    bool inclusion = true; // R f_k(n) subseteq R f(n) on the inclusion window
};

struct ContinuityReport {
    std::vector<ContinuityRow> rows;
    int k0 = -1;              // first k with |p_k|_inf <= eps_margin / 3
    double eps_margin = 0.0;  // min over the inclusion window of the second-value margin
    double final_gap = 0.0;
    bool pass = false;
};

// Perturbation schedule must have strictly decreasing l1 norms. Verifies the
// gradient gap decays below tol and that radius-set inclusion holds from the
// margin-predicted k0 onward.
ContinuityReport continuity_experiment(const SparseFunction& f,
                                       const std::vector<SparseFunction>& perturbations,
                                       const Omega& om, const LatticeWindow& inclusion_window,
                                       double tol = 1e-6, long grid_margin = 64,
                                       BallCounter* counter = nullptr);

// Random family used by sweeps: support size U[1,10] in [-box,box]^d,
// values U(0,1].
SparseFunction random_sparse(std::mt19937_64& rng, int d, int max_support = 10, long box = 20);

struct SweepRow {
    int trial = 0;
    double l1 = 0.0;
    double grad = 0.0;
    double ratio = 0.0;
    double certified_ratio = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double max_ratio = 0.0;
    double max_certified_ratio = 0.0;
    double bound = 0.0;
    bool pass = false;
};

SweepReport ratio_sweep(int trials, int d, const Omega& om, std::uint64_t seed, int threads = 0);

} // namespace maxlab
