#pragma once

#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "maxlab/geometry.hpp"
#include "maxlab/grid.hpp"
#include "maxlab/sparse_function.hpp"

namespace maxlab {

enum class Variant { centered, noncentered };

// Memoized N(x0, r). The count depends only on (frac(x0), r) by translation
// invariance, so centered sweeps over a grid share almost every entry.
// Concurrent use is safe: values are pure functions of the key, so duplicated
// computation under contention cannot change any result.
class BallCounter {
  public:
    explicit BallCounter(const Omega& om) : om_(om) {}
    const Omega& omega() const { return om_; }
    long count(std::span<const double> x0, double r);         // throws on empty ball
    long count_or_zero(std::span<const double> x0, double r);

  private:
    const Omega& om_;
    std::unordered_map<std::string, long> cache_;
    std::shared_mutex mu_;
};

// Realizing radii of the centered supremum. `radii` holds the critical-radius
// representatives: the sum over the ball is constant on [radius, next count
// jump), so these witness every realizing r.
struct RadiusSet {
    std::vector<double> radii;
    double min_radius = 0.0;
};

struct CenteredValue {
    double value = 0.0;
    RadiusSet realizers;
    double second_value = 0.0; // best non-realizing average (margin witness), if requested
    double margin = 0.0;       // value - second_value
    bool truncated = false;    // scan stopped early under the certified tail bound
    double scan_stop = 0.0;    // last radius considered
};

struct CenteredOptions {
    bool with_margin = false; // also locate the "second larger" value
};

// Exact centered maximal value at n: scans the critical radii of supp(f) with
// best-so-far truncation certified by the count lower bound; falls back to the
// unconditional bound l1/N(r) past the fitted certificate range.
CenteredValue centered_maximal_at(const SparseFunction& f, const Omega& om,
                                  std::span<const long> n, BallCounter* counter = nullptr,
                                  const CenteredOptions& opts = {});

// Average of |f| over the closed ball: sum / N(x0, r). Throws on empty balls.
double average(const SparseFunction& f, const Omega& om, std::span<const double> x0, double r,
               BallCounter* counter = nullptr);

struct BallPair {
    RealVec center;
    double radius = 0.0;
};

struct NoncenteredValue {
    double value = 0.0;
    std::vector<BallPair> realizers;
    bool exact = true; // false for the d >= 2 general-omega grid approximation
};

struct NoncenteredOptions {
    bool require_exact = false; // error out instead of approximating
    int center_refine_q = 4;    // center grid 1/q for the approximate path
};

// d = 1: exact for every omega (balls are integer intervals). d >= 2 with the
// sup-norm ball: exact via near-square box enumeration. Otherwise a lower
// approximation over centers on the (1/q)-grid, flagged in the result.
NoncenteredValue noncentered_maximal_at(const SparseFunction& f, const Omega& om,
                                        std::span<const long> n, const NoncenteredOptions& opts = {},
                                        BallCounter* counter = nullptr);

struct GridOptions {
    Variant variant = Variant::centered;
    int threads = 0; // 0 = thread_budget()
    NoncenteredOptions nc;
    std::size_t max_cells = std::size_t(1) << 26; // memory guard, checked up front
};

// Pointwise operator values over the window; bit-identical for any thread count.
Grid maximal_grid(const SparseFunction& f, const Omega& om, const LatticeWindow& window,
                  const GridOptions& opts = {}, BallCounter* counter = nullptr);

struct InclusionPoint {
    Point n;
    bool included = true;
    double margin = 0.0;           // epsilon(n) of the reference function f
    double offending_radius = -1.0; // a g-realizer that fails to realize f, if any
};

struct InclusionReport {
    std::vector<InclusionPoint> points;
    bool all_included = true;
    double min_margin = 0.0;
};

// Checks R g(n) subseteq R f(n) over the window (radius-set inclusion), with
// the per-point second-value margins of f.
InclusionReport radius_set_inclusion(const SparseFunction& f, const SparseFunction& g,
                                     const Omega& om, const LatticeWindow& window,
                                     BallCounter* counter = nullptr);

} // namespace maxlab
