#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace maxlab {

using Point = std::vector<long>;     // lattice point in Z^d
using RealVec = std::vector<double>; // point in R^d

// Closed-ball membership tie tolerance: gauge(m - x0) <= r + tol(r) counts as inside.
constexpr double kMembershipTol = 1e-12;
inline double radius_tol(double r) { return kMembershipTol * (1.0 + (r < 0 ? -r : r)); }

// Inclusive integer box [lo_1,hi_1] x ... x [lo_d,hi_d].
struct LatticeWindow {
    std::vector<long> lo;
    std::vector<long> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    std::size_t size() const; // throws if the cell count overflows the guard
    bool contains(std::span<const long> n) const;
    std::size_t index(std::span<const long> n) const; // row-major
    Point point(std::size_t idx) const;
    long extent(int axis) const { return hi[axis] - lo[axis] + 1; }
    LatticeWindow inflated(long pad) const;
    LatticeWindow doubled() const; // half-extents doubled about the box center

    static LatticeWindow cube(int d, long half); // [-half, half]^d
    static LatticeWindow make(std::vector<long> lo, std::vector<long> hi);
};

// Half-space a.x <= b. The polytope is the intersection; 0 must be interior (b > 0).
struct Halfspace {
    RealVec normal;
    double offset = 1.0;
};

// Lattice-count deviation certificate: for all tested centers and r <= r_max,
//   C(max(r - c1, 0))^d <= N(x0, r) <= C (r + c1)^d     (nonempty balls only).
struct LatticeConstants {
    double c1 = 0.0;
    double c2 = 0.0;    // solves C (c2 - c1)^d = 1
    double r_max = 0.0; // certificate range
};

// A normalized open bounded convex body with 0 interior and gauge(e_d) = 1.
// Carries the derived geometric constants used by every maximal-operator bound:
// volume, circumscribing Euclidean radius, and the fitted count-deviation pair.
class Omega {
  public:
    enum class Kind { lp, polytope };

    // p in [1, inf]; pass std::numeric_limits<double>::infinity() for the cube.
    static Omega lp_ball(int dim, double p, double fit_r_max = 0.0);
    static Omega polytope(int dim, std::vector<Halfspace> hs, double fit_r_max = 0.0);
    // "cube"/"linf", "l1", "l2", "lp:<p>", or a path to a JSON descriptor.
    static Omega from_descriptor(const std::string& desc, int dim, double fit_r_max = 0.0);
    static Omega from_json_text(const std::string& text, double fit_r_max = 0.0);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double p() const { return p_; }
    double volume() const { return volume_; }  // C_Omega
    double lambda() const { return lambda_; }  // sup { |x|_2 : gauge(x) <= 1 }
    double c1() const { return consts_.c1; }
    double c2() const { return consts_.c2; }
    double certified_rmax() const { return consts_.r_max; }
    double normalization_scale() const { return scale_; }
    const std::vector<Halfspace>& halfspaces() const { return hs_; }

    // Minkowski functional: inf { t > 0 : x/t in closure }, gauge(0) = 0.
    double gauge(std::span<const double> x) const;
    double gauge_diff(std::span<const long> m, std::span<const double> x0) const;

    std::string descriptor() const; // short human-readable tag
    std::string to_json_text() const;

  private:
    Omega() = default;
    Kind kind_ = Kind::lp;
    int dim_ = 1;
    double p_ = 2.0; // infinity() for the sup-norm ball
    std::vector<Halfspace> hs_;
    double volume_ = 0.0;
    double lambda_ = 1.0;
    double scale_ = 1.0;
    LatticeConstants consts_;
};

bool is_lattice_point(std::span<const double> x0);

// All m in Z^d with gauge(m - x0) <= r (closed dilate). Deterministic lex order.
std::vector<Point> enumerate_ball(const Omega& om, std::span<const double> x0, double r);

// |enumerate_ball|, computed without materializing points. Throws std::domain_error
// when the ball holds no lattice point (no lattice point to average).
long count_lattice(const Omega& om, std::span<const double> x0, double r);
long count_lattice_or_zero(const Omega& om, std::span<const double> x0, double r);

// Sorted, deduplicated { gauge(s - x0) : s in support }, with 0 prepended for
// lattice centers. The map r -> sum over the ball is constant between entries.
std::vector<double> critical_radii(const Omega& om, std::span<const double> x0,
                                   std::span<const Point> support);

// Smallest c1 on a 1e-3 grid making both count bounds hold for every radius up
// to r_max and every center on the quarter-grid of a fundamental cell.
LatticeConstants fit_constants(const Omega& om, double r_max);

double lambda_bound(const Omega& om);

} // namespace maxlab
