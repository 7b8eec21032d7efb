#pragma once

#include <span>
#include <vector>

#include "maxlab/geometry.hpp"

namespace maxlab {

// Dense real-valued function on a lattice window, row-major.
struct Grid {
    LatticeWindow window;
    std::vector<double> values;

    explicit Grid(LatticeWindow w) : window(std::move(w)), values(window.size(), 0.0) {}

    double at(std::span<const long> n) const { return values[window.index(n)]; }
    double& at(std::span<const long> n) { return values[window.index(n)]; }
    std::size_t size() const { return values.size(); }
};

} // namespace maxlab
