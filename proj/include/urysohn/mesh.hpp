#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace urysohn {

/// Uniform partition t_i = i/n of [0,1]. Cells are indexed 0..n-1 with cell j
/// covering [t_j, t_{j+1}].
class UniformMesh {
public:
    explicit UniformMesh(int n) : n_(n) {
        if (n < 1) throw std::invalid_argument("UniformMesh: cell count must be >= 1");
    }

    int n() const noexcept { return n_; }
    double h() const noexcept { return 1.0 / n_; }

    /// t_i, computed as i/n so that nested meshes share bit-identical points.
    double point(int i) const noexcept { return static_cast<double>(i) / n_; }

    std::vector<double> points() const {
        std::vector<double> pts(n_ + 1);
        for (int i = 0; i <= n_; ++i) pts[i] = point(i);
        return pts;
    }

    /// Index i when s equals t_i up to rounding (1e-11 of a cell width), else -1.
    int partition_index(double s) const noexcept {
        const double scaled = s * n_;
        const double k = std::round(scaled);
        if (k < 0 || k > n_) return -1;
        return std::abs(scaled - k) <= 1e-11 ? static_cast<int>(k) : -1;
    }

    /// Cell containing s. An interior partition point belongs to the cell on its left.
    int cell_of(double s) const {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::out_of_range("cell_of: point " + std::to_string(s) + " outside [0,1]");
        }
        const int k = partition_index(s);
        if (k >= 0) return std::max(k - 1, 0);
        return std::clamp(static_cast<int>(std::floor(s * n_)), 0, n_ - 1);
    }

    /// Local coordinate of s in cell j, in [0,1].
    double local(int j, double s) const noexcept {
        return std::clamp((s - point(j)) * n_, 0.0, 1.0);
    }

    bool operator==(const UniformMesh&) const = default;

private:
    int n_;
};

inline UniformMesh make_mesh(int n) { return UniformMesh(n); }

}  // namespace urysohn
