#pragma once

// Orthonormal shifted-Legendre bases, discontinuous piecewise polynomials on a
// uniform mesh, and the L2 orthogonal projection onto them.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "urysohn/mesh.hpp"
#include "urysohn/quadrature.hpp"

namespace urysohn {

/// Writes e_0(tau), ..., e_{r-1}(tau) into out, where e_q = sqrt(2q+1) P_q(2 tau - 1)
/// is orthonormal in L2[0,1]. No range check on tau.
inline void eval_basis_all(double tau, std::span<double> out) noexcept {
    const int r = static_cast<int>(out.size());
    if (r == 0) return;
    const double x = 2.0 * tau - 1.0;
    double p0 = 1.0;
    double p1 = x;
    out[0] = 1.0;
    if (r > 1) out[1] = std::sqrt(3.0) * x;
    for (int q = 2; q < r; ++q) {
        const double pq = ((2.0 * q - 1.0) * x * p1 - (q - 1.0) * p0) / q;
        p0 = p1;
        p1 = pq;
        out[q] = std::sqrt(2.0 * q + 1.0) * pq;
    }
}

/// Orthonormal Legendre polynomial of degree q on [0,1].
inline double eval_basis(int q, double tau) {
    if (q < 0) throw std::invalid_argument("eval_basis: negative degree");
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw std::out_of_range("eval_basis: tau outside [0,1]");
    }
    std::vector<double> vals(q + 1);
    eval_basis_all(tau, vals);
    return vals[q];
}

/// Element of the space of piecewise polynomials of degree <= r-1 with no
/// continuity across partition points. coeff(j, q) multiplies
/// e_q((s - t_j)/h) / sqrt(h), which is orthonormal in L2 of cell j, so the
/// squared L2[0,1] norm is the sum of squared coefficients.
class PiecewisePoly {
public:
    PiecewisePoly(UniformMesh mesh, int r)
        : mesh_(mesh), r_(r), coeffs_(checked_size(mesh, r), 0.0) {}

    PiecewisePoly(UniformMesh mesh, int r, std::vector<double> coeffs)
        : mesh_(mesh), r_(r), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != checked_size(mesh, r)) {
            throw std::invalid_argument("PiecewisePoly: coefficient count must be n*r");
        }
    }

    const UniformMesh& mesh() const noexcept { return mesh_; }
    int r() const noexcept { return r_; }
    std::size_t size() const noexcept { return coeffs_.size(); }

    double& coeff(int j, int q) { return coeffs_[static_cast<std::size_t>(j) * r_ + q]; }
    double coeff(int j, int q) const { return coeffs_[static_cast<std::size_t>(j) * r_ + q]; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    std::vector<double>& coeffs() noexcept { return coeffs_; }

    /// Value of the cell-j polynomial at local coordinate tau in [0,1].
    double eval_in_cell(int j, double tau) const {
        double vals[64];
        std::vector<double> heap;
        std::span<double> basis(vals, static_cast<std::size_t>(r_));
        if (r_ > 64) {
            heap.resize(r_);
            basis = heap;
        }
        eval_basis_all(tau, basis);
        double sum = 0.0;
        const double* c = coeffs_.data() + static_cast<std::size_t>(j) * r_;
        for (int q = 0; q < r_; ++q) sum += c[q] * basis[q];
        return sum * std::sqrt(static_cast<double>(mesh_.n()));
    }

    /// Value at s; interior partition points take the left limit.
    double operator()(double s) const {
        const int j = mesh_.cell_of(s);
        return eval_in_cell(j, mesh_.local(j, s));
    }

    /// Limit from the left at s. At s = 0 there is no left cell and the
    /// value from cell 0 is returned.
    double eval_left(double s) const {
        check_domain(s);
        const int k = mesh_.partition_index(s);
        if (k >= 1) return eval_in_cell(k - 1, 1.0);
        return (*this)(s);
    }

    /// Limit from the right at s. At s = 1 the value from the last cell is returned.
    double eval_right(double s) const {
        check_domain(s);
        const int k = mesh_.partition_index(s);
        if (k >= 0 && k < mesh_.n()) return eval_in_cell(k, 0.0);
        if (k == mesh_.n()) return eval_in_cell(k - 1, 1.0);
        return (*this)(s);
    }

private:
    static std::size_t checked_size(const UniformMesh& mesh, int r) {
        if (r < 1) throw std::invalid_argument("PiecewisePoly: r must be >= 1");
        return static_cast<std::size_t>(mesh.n()) * static_cast<std::size_t>(r);
    }
    static void check_domain(double s) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::out_of_range("PiecewisePoly: evaluation point outside [0,1]");
        }
    }

    UniformMesh mesh_;
    int r_;
    std::vector<double> coeffs_;
};

inline double eval_piecewise(const PiecewisePoly& p, double s) { return p(s); }

/// Points per cell used for projecting non-polynomial integrands.
inline int default_projection_points(int r) { return r > 10 ? r : 10; }

/// Cell-wise L2 projection of f: coeff(j, q) = <f, e_q mapped to cell j>,
/// each inner product evaluated with `rule` on the cell.
template <class F>
PiecewisePoly project(F&& f, const UniformMesh& mesh, int r, const GaussRule& rule) {
    if (r < 1) throw std::invalid_argument("project: r must be >= 1");
    PiecewisePoly out(mesh, r);
    const double h = mesh.h();
    const double scale = std::sqrt(h);
    std::vector<double> basis(r);
    for (int j = 0; j < mesh.n(); ++j) {
        const double a = mesh.point(j);
        for (int k = 0; k < rule.points; ++k) {
            const double tau = rule.nodes[k];
            const double fv = f(a + h * tau);
            eval_basis_all(tau, basis);
            for (int q = 0; q < r; ++q) out.coeff(j, q) += rule.weights[k] * fv * basis[q];
        }
        for (int q = 0; q < r; ++q) out.coeff(j, q) *= scale;
    }
    return out;
}

template <class F>
PiecewisePoly project(F&& f, const UniformMesh& mesh, int r) {
    return project(std::forward<F>(f), mesh, r, gauss_rule(default_projection_points(r)));
}

}  // namespace urysohn
