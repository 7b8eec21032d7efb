#include "maxlab/sparse_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace maxlab {

SparseFunction SparseFunction::from_entries(int dim, std::vector<std::pair<Point, double>> entries) {
    SparseFunction f(dim);
    for (auto& [p, v] : entries) {
        if (static_cast<int>(p.size()) != dim)
            throw std::invalid_argument("SparseFunction: entry dimension mismatch");
        if (!std::isfinite(v)) throw std::invalid_argument("SparseFunction: non-finite value");
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // merge duplicates by summing
    for (auto& e : entries) {
        if (!f.entries_.empty() && f.entries_.back().first == e.first)
            f.entries_.back().second += e.second;
        else
            f.entries_.push_back(std::move(e));
    }
    std::erase_if(f.entries_, [](const auto& e) { return e.second == 0.0; });
    return f;
}

SparseFunction SparseFunction::delta(const Point& n, double value) {
    return from_entries(static_cast<int>(n.size()), {{n, value}});
}

bool SparseFunction::empty() const { return entries_.empty(); }

double SparseFunction::at(std::span<const long> n) const {
    Point key(n.begin(), n.end());
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const auto& e, const Point& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key) return it->second;
    return 0.0;
}

double SparseFunction::l1() const {
    double s = 0.0;
    for (const auto& [p, v] : entries_) s += std::abs(v);
    return s;
}

double SparseFunction::linf() const {
    double m = 0.0;
    for (const auto& [p, v] : entries_) m = std::max(m, std::abs(v));
    return m;
}

SparseFunction SparseFunction::scaled(double c) const {
    auto entries = entries_;
    for (auto& [p, v] : entries) v *= c;
    return from_entries(dim_, std::move(entries));
}

SparseFunction SparseFunction::plus(const SparseFunction& other) const {
    if (other.dim_ != dim_ && !other.empty() && !empty())
        throw std::invalid_argument("SparseFunction: dimension mismatch in sum");
    auto entries = entries_;
    entries.insert(entries.end(), other.entries_.begin(), other.entries_.end());
    return from_entries(dim_, std::move(entries));
}

SparseFunction SparseFunction::translated(std::span<const long> v) const {
    auto entries = entries_;
    for (auto& [p, val] : entries)
        for (int i = 0; i < dim_; ++i) p[i] += v[i];
    return from_entries(dim_, std::move(entries));
}

LatticeWindow SparseFunction::support_hull() const {
    LatticeWindow w;
    w.lo.assign(dim_, 0);
    w.hi.assign(dim_, 0);
    if (entries_.empty()) return w;
    w.lo = entries_.front().first;
    w.hi = entries_.front().first;
    for (const auto& [p, v] : entries_)
        for (int i = 0; i < dim_; ++i) {
            w.lo[i] = std::min(w.lo[i], p[i]);
            w.hi[i] = std::max(w.hi[i], p[i]);
        }
    return w;
}

void SparseFunction::set(const Point& n, double value) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), n,
                               [](const auto& e, const Point& k) { return e.first < k; });
    if (it != entries_.end() && it->first == n) {
        if (value == 0.0) entries_.erase(it);
        else it->second = value;
    } else if (value != 0.0) {
        entries_.insert(it, {n, value});
    }
}

SparseFunction SparseFunction::parse(std::istream& in) {
    std::string line;
    int lineno = 0;
    int dim = -1;
    std::vector<std::pair<Point, double>> entries;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue; // blank
        if (dim < 0) {
            if (first != "dim")
                throw std::runtime_error("line " + std::to_string(lineno) + ": expected 'dim d' header");
            if (!(ls >> dim) || dim < 1)
                throw std::runtime_error("line " + std::to_string(lineno) + ": bad dimension");
            continue;
        }
        Point p(dim);
        try {
            p[0] = std::stol(first);
        } catch (...) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": bad coordinate");
        }
        for (int i = 1; i < dim; ++i)
            if (!(ls >> p[i]))
                throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                                         std::to_string(dim) + " coordinates");
        double v;
        if (!(ls >> v))
            throw std::runtime_error("line " + std::to_string(lineno) + ": missing value");
        std::string extra;
        if (ls >> extra)
            throw std::runtime_error("line " + std::to_string(lineno) + ": trailing tokens");
        entries.push_back({std::move(p), v});
    }
    if (dim < 0) throw std::runtime_error("missing 'dim d' header");
    return from_entries(dim, std::move(entries));
}

SparseFunction SparseFunction::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse(in);
}

void SparseFunction::emit(std::ostream& out) const {
    out << "dim " << dim_ << "\n";
    char buf[64];
    for (const auto& [p, v] : entries_) {
        for (long c : p) out << c << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << "\n";
    }
}

void SparseFunction::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    emit(out);
}

} // namespace maxlab
