#include "maxlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace maxlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long floor_long(double x) { return static_cast<long>(std::floor(x)); }
long ceil_long(double x) { return static_cast<long>(std::ceil(x)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

// Solve a small dense linear system in place (partial pivoting). Returns false
// if singular. Used only for polytope vertex enumeration, d <= 3.
bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> b, RealVec& out) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-12) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r][c] * out[c];
        out[r] = s / A[r][r];
    }
    return true;
}

std::vector<RealVec> polytope_vertices(int d, const std::vector<Halfspace>& hs) {
    const int m = static_cast<int>(hs.size());
    std::vector<RealVec> verts;
    std::vector<int> pick(d);
    // all d-subsets of half-space boundaries
    std::vector<int> idx(d);
    auto recurse = [&](auto&& self, int depth, int start) -> void {
        if (depth == d) {
            std::vector<std::vector<double>> A(d);
            std::vector<double> b(d);
            for (int i = 0; i < d; ++i) {
                A[i] = hs[idx[i]].normal;
                b[i] = hs[idx[i]].offset;
            }
            RealVec v;
            if (!solve_dense(A, b, v)) return;
            for (const auto& h : hs)
                if (dot(h.normal, v) > h.offset + 1e-9) return;
            for (const auto& w : verts) {
                double diff = 0.0;
                for (int i = 0; i < d; ++i) diff += std::abs(w[i] - v[i]);
                if (diff < 1e-9) return;
            }
            verts.push_back(std::move(v));
            return;
        }
        for (int i = start; i < m; ++i) {
            idx[depth] = i;
            self(self, depth + 1, i + 1);
        }
    };
    recurse(recurse, 0, 0);
    return verts;
}

double polygon_area(std::vector<std::array<double, 2>> pts) {
    std::array<double, 2> c{0, 0};
    for (auto& p : pts) { c[0] += p[0]; c[1] += p[1]; }
    c[0] /= pts.size();
    c[1] /= pts.size();
    std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
        return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
    });
    double area = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        area += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(area) / 2.0;
}

double polytope_volume(int d, const std::vector<Halfspace>& hs, const std::vector<RealVec>& verts) {
    if (verts.empty()) throw std::invalid_argument("polytope has no vertices");
    if (d == 1) {
        double lo = kInf, hi = -kInf;
        for (const auto& v : verts) { lo = std::min(lo, v[0]); hi = std::max(hi, v[0]); }
        return hi - lo;
    }
    if (d == 2) {
        std::vector<std::array<double, 2>> pts;
        for (const auto& v : verts) pts.push_back({v[0], v[1]});
        return polygon_area(std::move(pts));
    }
    if (d == 3) {
        // pyramid decomposition from the origin: V = sum (1/3) * area(F_i) * dist(0, F_i)
        double vol = 0.0;
        for (const auto& h : hs) {
            std::vector<RealVec> face;
            for (const auto& v : verts)
                if (std::abs(dot(h.normal, v) - h.offset) < 1e-7) face.push_back(v);
            if (face.size() < 3) continue;
            double nn = norm2(h.normal);
            // orthonormal basis of the facet plane
            RealVec u1(3), u2(3), n{h.normal[0] / nn, h.normal[1] / nn, h.normal[2] / nn};
            RealVec a = std::abs(n[0]) < 0.9 ? RealVec{1, 0, 0} : RealVec{0, 1, 0};
            double an = dot(a, n);
            for (int i = 0; i < 3; ++i) u1[i] = a[i] - an * n[i];
            double u1n = norm2(u1);
            for (int i = 0; i < 3; ++i) u1[i] /= u1n;
            u2 = {n[1] * u1[2] - n[2] * u1[1], n[2] * u1[0] - n[0] * u1[2],
                  n[0] * u1[1] - n[1] * u1[0]};
            std::vector<std::array<double, 2>> pts;
            for (const auto& v : face) pts.push_back({dot(u1, v), dot(u2, v)});
            vol += polygon_area(std::move(pts)) * (h.offset / nn) / 3.0;
        }
        return vol;
    }
    throw std::invalid_argument("polytope volume supported for d <= 3 only");
}

double lp_volume(int d, double p) {
    // vol of the unit l^p ball: 2^d Gamma(1 + 1/p)^d / Gamma(1 + d/p)
    if (std::isinf(p)) return std::pow(2.0, d);
    return std::pow(2.0, d) * std::exp(d * std::lgamma(1.0 + 1.0 / p) - std::lgamma(1.0 + double(d) / p));
}

// Recursive box sweep shared by enumerate and count. For each prefix of
// coordinates the admissible range of the next one is an interval; the last
// axis is resolved in closed form, so counting a ball costs O((2*lambda*r)^{d-1}).
struct BallSweep {
    const Omega& om;
    std::span<const double> x0;
    double r;
    double rtol;
    Point current;
    long total = 0;
    std::vector<Point>* out = nullptr;

    BallSweep(const Omega& o, std::span<const double> c, double radius)
        : om(o), x0(c), r(radius), rtol(radius + radius_tol(radius)), current(o.dim(), 0) {}

    // admissible interval of the relative coordinate y_axis given |y_i|^p budget used
    bool last_axis_interval(int axis, double used_p, double& lo, double& hi) const {
        if (om.kind() == Omega::Kind::lp) {
            double w;
            if (std::isinf(om.p())) {
                w = rtol;
            } else if (om.p() == 1.0) {
                w = rtol - used_p;
            } else if (om.p() == 2.0) {
                w = rtol * rtol - used_p;
                if (w < 0) return false;
                w = std::sqrt(w);
            } else {
                w = std::pow(rtol, om.p()) - used_p;
                if (w < 0) return false;
                w = std::pow(w, 1.0 / om.p());
            }
            if (w < 0) return false;
            lo = -w;
            hi = w;
            return true;
        }
        // polytope: project the half-space system onto the last free axis
        lo = -kInf;
        hi = kInf;
        for (const auto& h : hs_cache()) {
            double fixed = 0.0;
            for (int i = 0; i < axis; ++i) fixed += h.normal[i] * (current[i] - x0[i]);
            double rhs = rtol * h.offset - fixed;
            double c = h.normal[axis];
            if (c > 1e-15) hi = std::min(hi, rhs / c);
            else if (c < -1e-15) lo = std::max(lo, rhs / c);
            else if (rhs < 0) return false;
        }
        return lo <= hi;
    }

    const std::vector<Halfspace>& hs_cache() const { return om.halfspaces(); }

    void run(int axis, double used_p) {
        const int d = om.dim();
        if (axis == d - 1) {
            double lo, hi;
            if (!last_axis_interval(axis, used_p, lo, hi)) return;
            long mlo = ceil_long(x0[axis] + lo - kMembershipTol);
            long mhi = floor_long(x0[axis] + hi + kMembershipTol);
            if (mhi < mlo) return;
            if (out) {
                for (long m = mlo; m <= mhi; ++m) {
                    current[axis] = m;
                    out->push_back(current);
                }
            } else {
                total += mhi - mlo + 1;
            }
            return;
        }
        // interior axis: camp on the slice interval, accumulate the lp budget
        double lo, hi;
        if (om.kind() == Omega::Kind::lp) {
            if (!last_axis_interval(axis, used_p, lo, hi)) return;
        } else {
            double w = om.lambda() * rtol;
            lo = -w;
            hi = w;
        }
        long mlo = ceil_long(x0[axis] + lo - kMembershipTol);
        long mhi = floor_long(x0[axis] + hi + kMembershipTol);
        for (long m = mlo; m <= mhi; ++m) {
            current[axis] = m;
            double y = double(m) - x0[axis];
            double add = 0.0;
            if (om.kind() == Omega::Kind::lp && !std::isinf(om.p())) {
                add = (om.p() == 1.0) ? std::abs(y)
                    : (om.p() == 2.0) ? y * y
                                      : std::pow(std::abs(y), om.p());
            }
            run(axis + 1, used_p + add);
        }
    }
};

} // namespace

// ---------------------------------------------------------------------------
// LatticeWindow

std::size_t LatticeWindow::size() const {
    std::size_t n = 1;
    for (int i = 0; i < dim(); ++i) {
        long e = hi[i] - lo[i] + 1;
        if (e <= 0) throw std::invalid_argument("LatticeWindow: hi < lo");
        if (n > (std::size_t(1) << 40) / std::size_t(e))
            throw std::runtime_error("LatticeWindow: cell count exceeds guard");
        n *= std::size_t(e);
    }
    return n;
}

bool LatticeWindow::contains(std::span<const long> n) const {
    for (int i = 0; i < dim(); ++i)
        if (n[i] < lo[i] || n[i] > hi[i]) return false;
    return true;
}

std::size_t LatticeWindow::index(std::span<const long> n) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim(); ++i) idx = idx * std::size_t(extent(i)) + std::size_t(n[i] - lo[i]);
    return idx;
}

Point LatticeWindow::point(std::size_t idx) const {
    Point p(dim());
    for (int i = dim() - 1; i >= 0; --i) {
        std::size_t e = std::size_t(extent(i));
        p[i] = lo[i] + long(idx % e);
        idx /= e;
    }
    return p;
}

LatticeWindow LatticeWindow::inflated(long pad) const {
    LatticeWindow w = *this;
    for (int i = 0; i < dim(); ++i) {
        w.lo[i] -= pad;
        w.hi[i] += pad;
    }
    return w;
}

LatticeWindow LatticeWindow::doubled() const {
    LatticeWindow w = *this;
    for (int i = 0; i < dim(); ++i) {
        long half = (hi[i] - lo[i] + 1) / 2 + 1;
        w.lo[i] -= half;
        w.hi[i] += half;
    }
    return w;
}

LatticeWindow LatticeWindow::cube(int d, long half) {
    LatticeWindow w;
    w.lo.assign(d, -half);
    w.hi.assign(d, half);
    return w;
}

LatticeWindow LatticeWindow::make(std::vector<long> lo, std::vector<long> hi) {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("window: bad bounds");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (lo[i] > hi[i]) throw std::invalid_argument("window: lo > hi");
    LatticeWindow w;
    w.lo = std::move(lo);
    w.hi = std::move(hi);
    return w;
}

// ---------------------------------------------------------------------------
// Omega

double Omega::gauge(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("gauge: dimension mismatch");
    if (kind_ == Kind::lp) {
        if (std::isinf(p_)) {
            double m = 0.0;
            for (double v : x) m = std::max(m, std::abs(v));
            return m;
        }
        if (p_ == 1.0) {
            double s = 0.0;
            for (double v : x) s += std::abs(v);
            return s;
        }
        if (p_ == 2.0) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return std::sqrt(s);
        }
        double s = 0.0;
        for (double v : x) s += std::pow(std::abs(v), p_);
        return std::pow(s, 1.0 / p_);
    }
    double g = 0.0;
    for (const auto& h : hs_) g = std::max(g, dot(h.normal, x) / h.offset);
    return g;
}

double Omega::gauge_diff(std::span<const long> m, std::span<const double> x0) const {
    RealVec y(dim_);
    for (int i = 0; i < dim_; ++i) y[i] = double(m[i]) - x0[i];
    return gauge(y);
}

Omega Omega::lp_ball(int dim, double p, double fit_r_max) {
    if (dim < 1) throw std::invalid_argument("lp_ball: dim must be >= 1");
    if (!(p >= 1.0)) throw std::invalid_argument("lp_ball: p must be >= 1 (convexity)");
    Omega om;
    om.kind_ = Kind::lp;
    om.dim_ = dim;
    om.p_ = p;
    om.scale_ = 1.0; // |e_d|_p = 1 already
    om.volume_ = lp_volume(dim, p);
    om.lambda_ = std::isinf(p) ? std::sqrt(double(dim))
                               : std::max(1.0, std::pow(double(dim), 0.5 - 1.0 / p));
    if (fit_r_max <= 0) fit_r_max = std::max(10.0 * om.lambda_, dim <= 2 ? 60.0 : 20.0);
    om.consts_ = fit_constants(om, fit_r_max);
    return om;
}

Omega Omega::polytope(int dim, std::vector<Halfspace> hs, double fit_r_max) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("polytope: supported for 1 <= d <= 3");
    if (hs.size() < std::size_t(dim + 1)) throw std::invalid_argument("polytope: too few half-spaces");
    for (auto& h : hs) {
        if (static_cast<int>(h.normal.size()) != dim)
            throw std::invalid_argument("polytope: normal dimension mismatch");
        if (!(h.offset > 0)) throw std::invalid_argument("polytope: 0 must be interior (offsets > 0)");
    }
    Omega om;
    om.kind_ = Kind::polytope;
    om.dim_ = dim;
    om.p_ = 0.0;
    om.hs_ = std::move(hs);

    // normalize so gauge(e_d) = 1: dilating by s multiplies offsets by s
    RealVec ed(dim, 0.0);
    ed[dim - 1] = 1.0;
    double g = om.gauge(ed);
    if (!(g > 1e-12) || !std::isfinite(g))
        throw std::invalid_argument("polytope: e_d direction unbounded, body not normalizable");
    om.scale_ = g;
    for (auto& h : om.hs_) h.offset *= g;

    auto verts = polytope_vertices(dim, om.hs_);
    if (verts.empty()) throw std::invalid_argument("polytope: empty or unbounded");
    for (int i = 0; i < dim; ++i) {
        RealVec e(dim, 0.0);
        e[i] = 1.0;
        RealVec me(dim, 0.0);
        me[i] = -1.0;
        if (om.gauge(e) <= 1e-12 || om.gauge(me) <= 1e-12)
            throw std::invalid_argument("polytope: unbounded along a coordinate axis");
    }
    om.lambda_ = 0.0;
    for (const auto& v : verts) om.lambda_ = std::max(om.lambda_, norm2(v));
    om.volume_ = polytope_volume(dim, om.hs_, verts);
    if (fit_r_max <= 0) fit_r_max = std::max(10.0 * om.lambda_, dim <= 2 ? 60.0 : 20.0);
    om.consts_ = fit_constants(om, fit_r_max);
    return om;
}

Omega Omega::from_descriptor(const std::string& desc, int dim, double fit_r_max) {
    if (desc == "cube" || desc == "linf") return lp_ball(dim, kInf, fit_r_max);
    if (desc == "l1") return lp_ball(dim, 1.0, fit_r_max);
    if (desc == "l2") return lp_ball(dim, 2.0, fit_r_max);
    if (desc.rfind("lp:", 0) == 0) return lp_ball(dim, std::stod(desc.substr(3)), fit_r_max);
    std::ifstream in(desc);
    if (!in) throw std::invalid_argument("unknown omega descriptor: " + desc);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), fit_r_max);
}

Omega Omega::from_json_text(const std::string& text, double fit_r_max) {
    auto j = nlohmann::json::parse(text);
    int d = j.at("d").get<int>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "lp") {
        double p;
        if (j.at("p").is_string()) {
            std::string ps = j["p"].get<std::string>();
            p = (ps == "inf") ? kInf : std::stod(ps);
        } else {
            p = j["p"].get<double>();
        }
        return lp_ball(d, p, fit_r_max);
    }
    if (kind == "polytope") {
        std::vector<Halfspace> hs;
        auto normals = j.at("normals");
        auto offsets = j.at("offsets");
        for (std::size_t i = 0; i < normals.size(); ++i)
            hs.push_back({normals[i].get<RealVec>(), offsets[i].get<double>()});
        return polytope(d, std::move(hs), fit_r_max);
    }
    throw std::invalid_argument("omega json: unknown kind " + kind);
}

std::string Omega::descriptor() const {
    if (kind_ == Kind::polytope) return "polytope(d=" + std::to_string(dim_) + ")";
    if (std::isinf(p_)) return "linf(d=" + std::to_string(dim_) + ")";
    std::ostringstream os;
    os << "l" << p_ << "(d=" << dim_ << ")";
    return os.str();
}

std::string Omega::to_json_text() const {
    nlohmann::json j;
    j["d"] = dim_;
    if (kind_ == Kind::lp) {
        j["kind"] = "lp";
        if (std::isinf(p_)) j["p"] = "inf";
        else j["p"] = p_;
    } else {
        j["kind"] = "polytope";
        nlohmann::json normals = nlohmann::json::array();
        nlohmann::json offsets = nlohmann::json::array();
        for (const auto& h : hs_) {
            normals.push_back(h.normal);
            offsets.push_back(h.offset);
        }
        j["normals"] = normals;
        j["offsets"] = offsets;
    }
    j["volume"] = volume_;
    j["lambda"] = lambda_;
    j["c1"] = consts_.c1;
    j["c2"] = consts_.c2;
    j["r_max"] = consts_.r_max;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Ball enumeration / counting

bool is_lattice_point(std::span<const double> x0) {
    for (double v : x0)
        if (std::abs(v - std::round(v)) > kMembershipTol) return false;
    return true;
}

std::vector<Point> enumerate_ball(const Omega& om, std::span<const double> x0, double r) {
    if (static_cast<int>(x0.size()) != om.dim()) throw std::invalid_argument("enumerate_ball: dim mismatch");
    if (r < 0) throw std::invalid_argument("enumerate_ball: negative radius");
    std::vector<Point> pts;
    BallSweep sweep(om, x0, r);
    sweep.out = &pts;
    sweep.run(0, 0.0);
    return pts;
}

long count_lattice_or_zero(const Omega& om, std::span<const double> x0, double r) {
    if (static_cast<int>(x0.size()) != om.dim()) throw std::invalid_argument("count_lattice: dim mismatch");
    if (r < 0) throw std::invalid_argument("count_lattice: negative radius");
    BallSweep sweep(om, x0, r);
    sweep.run(0, 0.0);
    return sweep.total;
}

long count_lattice(const Omega& om, std::span<const double> x0, double r) {
    long n = count_lattice_or_zero(om, x0, r);
    if (n == 0) throw std::domain_error("count_lattice: no lattice point to average");
    return n;
}

std::vector<double> critical_radii(const Omega& om, std::span<const double> x0,
                                   std::span<const Point> support) {
    std::vector<double> radii;
    radii.reserve(support.size() + 1);
    if (is_lattice_point(x0)) radii.push_back(0.0);
    for (const auto& s : support) radii.push_back(om.gauge_diff(s, x0));
    std::sort(radii.begin(), radii.end());
    std::vector<double> dedup;
    for (double r : radii)
        if (dedup.empty() || r - dedup.back() > radius_tol(r)) dedup.push_back(r);
    return dedup;
}

// ---------------------------------------------------------------------------
// Constant fitting

LatticeConstants fit_constants(const Omega& om, double r_max) {
    if (r_max < 10.0 * om.lambda())
        throw std::invalid_argument("fit_constants: r_max must be >= 10*lambda");
    const int d = om.dim();
    const double c_om = om.volume();
    const double inv_d = 1.0 / double(d);

    double need = 0.0; // max over samples of |r - (N/C)^(1/d)| at the step extremes
    std::vector<int> frac(d, 0);
    for (;;) {
        RealVec x0(d);
        for (int i = 0; i < d; ++i) x0[i] = 0.25 * frac[i];

        auto pts = enumerate_ball(om, x0, r_max);
        std::vector<double> gs;
        gs.reserve(pts.size());
        for (const auto& m : pts) gs.push_back(om.gauge_diff(m, x0));
        std::sort(gs.begin(), gs.end());

        std::size_t k = 0;
        while (k < gs.size()) {
            std::size_t k2 = k;
            while (k2 + 1 < gs.size() && gs[k2 + 1] - gs[k] <= radius_tol(gs[k])) ++k2;
            double rho = gs[k];
            double n_pow = std::pow(double(k2 + 1) / c_om, inv_d);
            // upper bound is tightest at the jump radius itself
            need = std::max(need, n_pow - rho);
            // lower bound is tightest approaching the next jump (or r_max)
            double next = (k2 + 1 < gs.size()) ? gs[k2 + 1] : r_max;
            if (next > rho) need = std::max(need, next - n_pow);
            k = k2 + 1;
        }

        int axis = 0;
        while (axis < d && frac[axis] == 3) frac[axis++] = 0;
        if (axis == d) break;
        ++frac[axis];
    }

    if (need > r_max) throw std::invalid_argument("fit_constants: no admissible c1 (malformed omega)");
    LatticeConstants c;
    c.c1 = std::ceil(need / 1e-3 - 1e-9) * 1e-3;
    c.c2 = c.c1 + std::pow(1.0 / c_om, inv_d);
    c.r_max = r_max;
    return c;
}

double lambda_bound(const Omega& om) { return om.lambda(); }

} // namespace maxlab
