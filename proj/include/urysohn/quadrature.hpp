#pragma once

// Gauss-Legendre rules on [0,1] and composite integration over a uniform mesh
// that never lets a panel straddle a mesh point or the kernel diagonal t = s.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "urysohn/mesh.hpp"

namespace urysohn {

struct GaussRule {
    int points = 0;
    std::vector<double> nodes;    // ascending, in (0,1)
    std::vector<double> weights;  // positive, sum to 1
};

/// p-point Gauss-Legendre rule on [0,1], exact for polynomials of degree 2p-1.
/// Nodes are found by Newton iteration on P_p from the Tricomi initial guesses.
inline GaussRule gauss_rule(int p) {
    if (p < 1 || p > 64) {
        throw std::invalid_argument("gauss_rule: point count must lie in [1, 64], got " +
                                    std::to_string(p));
    }
    GaussRule rule;
    rule.points = p;
    rule.nodes.resize(p);
    rule.weights.resize(p);
    const int half = (p + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (p + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= p; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double dp = p * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= p; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = p * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is descending in i; store mirrored pairs so nodes ascend.
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[p - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[p - 1 - i] = 0.5 * w;
    }
    if (p % 2 == 1) rule.nodes[p / 2] = 0.5;
    return rule;
}

/// Affine-mapped Gauss approximation of the integral of g over [a, b].
template <class G>
double integrate_cell(G&& g, double a, double b, const GaussRule& rule) {
    if (a > b) throw std::invalid_argument("integrate_cell: lower limit exceeds upper limit");
    const double len = b - a;
    if (len == 0.0) return 0.0;
    double sum = 0.0;
    for (int k = 0; k < rule.points; ++k) {
        sum += rule.weights[k] * g(a + len * rule.nodes[k]);
    }
    return len * sum;
}

/// Plain composite Gauss integral of g over [0,1], one panel per mesh cell.
template <class G>
double integrate_composite(G&& g, const UniformMesh& mesh, const GaussRule& rule) {
    double sum = 0.0;
    for (int j = 0; j < mesh.n(); ++j) {
        sum += integrate_cell(g, mesh.point(j), mesh.point(j + 1), rule);
    }
    return sum;
}

/// Integral of g1 over [0, s] plus g2 over [s, 1]. Works cell by cell; the cell
/// containing s is cut at s so g1 is only sampled at t <= s and g2 at t >= s.
template <class G1, class G2>
double integrate_split(G1&& g1, G2&& g2, double s, const UniformMesh& mesh,
                       const GaussRule& rule) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw std::out_of_range("integrate_split: split point outside [0,1]");
    }
    // Snap s onto a partition point when it is within rounding of one, so a
    // sliver panel of width ~1e-17 is never created.
    const int snapped = mesh.partition_index(s);
    double sum = 0.0;
    for (int j = 0; j < mesh.n(); ++j) {
        const double a = mesh.point(j);
        const double b = mesh.point(j + 1);
        if (snapped >= 0) {
            sum += (j + 1 <= snapped) ? integrate_cell(g1, a, b, rule)
                                      : integrate_cell(g2, a, b, rule);
        } else if (b <= s) {
            sum += integrate_cell(g1, a, b, rule);
        } else if (a >= s) {
            sum += integrate_cell(g2, a, b, rule);
        } else {
            sum += integrate_cell(g1, a, s, rule);
            sum += integrate_cell(g2, s, b, rule);
        }
    }
    return sum;
}

}  // namespace urysohn
