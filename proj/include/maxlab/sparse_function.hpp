#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "maxlab/geometry.hpp"

namespace maxlab {

// Finitely supported f : Z^d -> R. Entries are kept lexicographically sorted
// and unique, so every traversal is deterministic. Operators consume |f|.
class SparseFunction {
  public:
    SparseFunction() = default;
    explicit SparseFunction(int dim) : dim_(dim) {}
    static SparseFunction from_entries(int dim, std::vector<std::pair<Point, double>> entries);
    static SparseFunction delta(const Point& n, double value = 1.0);

    int dim() const { return dim_; }
    bool empty() const;                  // true when |f| has no nonzero mass
    std::size_t support_size() const { return entries_.size(); }
    const std::vector<std::pair<Point, double>>& entries() const { return entries_; }

    double at(std::span<const long> n) const;
    double l1() const;
    double linf() const;

    SparseFunction scaled(double c) const;
    SparseFunction plus(const SparseFunction& other) const;
    SparseFunction translated(std::span<const long> v) const;

    // Hull box of the support; for empty support returns {n0} around the origin.
    LatticeWindow support_hull() const;

    void set(const Point& n, double value); // insert or overwrite; value 0 erases

    // Text format: header "dim d", then one entry per line "n1 ... nd value".
    static SparseFunction parse(std::istream& in);
    static SparseFunction load(const std::string& path);
    void emit(std::ostream& out) const;
    void save(const std::string& path) const;

  private:
    int dim_ = 1;
    std::vector<std::pair<Point, double>> entries_;
};

} // namespace maxlab
