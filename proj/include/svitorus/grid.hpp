#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svt {

/// Uniform grid on the unit torus [0,1)^d, d in {1,2}, n points per axis.
/// n must be a power of two and at least 8; spacing h = 1/n, cell measure h^d.
struct PeriodicGrid {
    int d = 1;
    int n = 8;

    PeriodicGrid() = default;
    PeriodicGrid(int dim, int points) : d(dim), n(points) {
        if (d != 1 && d != 2) {
            throw std::invalid_argument("PeriodicGrid: d must be 1 or 2, got " + std::to_string(d));
        }
        if (n < 8 || (n & (n - 1)) != 0) {
            throw std::invalid_argument("PeriodicGrid: n must be a power of two >= 8, got " +
                                        std::to_string(n));
        }
    }

    double spacing() const { return 1.0 / n; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
        return s;
    }

    /// Quadrature weight of one grid cell, h^d.
    double cell_measure() const {
        double m = 1.0;
        for (int i = 0; i < d; ++i) m /= n;
        return m;
    }

    /// Coordinate of grid index i along one axis (index taken mod n).
    double coord(int i) const {
        int j = i % n;
        if (j < 0) j += n;
        return static_cast<double>(j) / n;
    }

    bool operator==(const PeriodicGrid&) const = default;
};

}  // namespace svt
