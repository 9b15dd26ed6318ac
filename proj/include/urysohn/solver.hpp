#pragma once

// Galerkin solution of x - P K(x) = P f on discontinuous piecewise polynomials,
// the iterated solution K(x_G) + f, and Richardson extrapolation at partition
// points.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urysohn/basis.hpp"
#include "urysohn/errors.hpp"
#include "urysohn/mesh.hpp"
#include "urysohn/problem.hpp"
#include "urysohn/quadrature.hpp"

namespace urysohn {

enum class Method { Picard, Newton };

/// FullGalerkin integrates every inner product with quad_points-point Gauss
/// panels, cutting at the diagonal. PaperDiscrete replaces all integrals by an
/// r-point Gauss sum per cell (the one-point midpoint system when r = 1).
enum class DiscreteMode { FullGalerkin, PaperDiscrete };

enum class InitialGuess { ProjectF, Zero, Supplied };

struct SolveOptions {
    Method method = Method::Picard;
    double tol = 1e-12;
    int max_iter = 500;
    int quad_points = 10;
    InitialGuess initial_guess = InitialGuess::ProjectF;
    std::optional<PiecewisePoly> supplied_guess;
    /// Picard relaxation factor omega in (0, 1]; 1 is plain fixed-point iteration.
    double relaxation = 1.0;
    DiscreteMode mode = DiscreteMode::FullGalerkin;

    void validate() const {
        if (!(tol > 0.0)) throw ConfigError("SolveOptions: tol must be positive");
        if (max_iter < 1) throw ConfigError("SolveOptions: max_iter must be >= 1");
        if (quad_points < 2 || quad_points > 64) {
            throw ConfigError("SolveOptions: quad_points must lie in [2, 64]");
        }
        if (!(relaxation > 0.0 && relaxation <= 1.0)) {
            throw ConfigError("SolveOptions: relaxation must lie in (0, 1]");
        }
        if (initial_guess == InitialGuess::Supplied && !supplied_guess) {
            throw ConfigError("SolveOptions: supplied initial guess missing");
        }
    }
};

struct GalerkinSolution {
    PiecewisePoly x_g;
    int iterations = 0;
    double final_update = 0.0;
    double final_residual = 0.0;
    DiscreteMode mode = DiscreteMode::FullGalerkin;
    int quad_points = 0;
};

/// A function sampled at the n+1 partition points of a mesh.
struct PartitionValues {
    UniformMesh mesh;
    std::vector<double> values;

    PartitionValues(UniformMesh m, std::vector<double> v) : mesh(m), values(std::move(v)) {
        if (values.size() != static_cast<std::size_t>(mesh.n()) + 1) {
            throw std::invalid_argument("PartitionValues: need n+1 values");
        }
    }
};

namespace detail {

/// Quadrature layout shared by projection, operator application and
/// linearization for one (mesh, r, mode) triple.
class GalerkinDiscretization {
public:
    GalerkinDiscretization(const GreenKernel& kernel, UniformMesh mesh, int r, int quad_points,
                           DiscreteMode mode)
        : kernel_(kernel),
          mesh_(mesh),
          r_(r),
          mode_(mode),
          rule_(gauss_rule(mode == DiscreteMode::PaperDiscrete ? r : quad_points)),
          h_(mesh.h()),
          inv_sqrt_h_(std::sqrt(static_cast<double>(mesh.n()))) {
        const int p = rule_.points;
        basis_.resize(static_cast<std::size_t>(p) * r_);
        for (int k = 0; k < p; ++k) {
            eval_basis_all(rule_.nodes[k], std::span<double>(&basis_[k * r_], r_));
        }
    }

    const UniformMesh& mesh() const noexcept { return mesh_; }
    int r() const noexcept { return r_; }
    int points() const noexcept { return rule_.points; }
    const GaussRule& rule() const noexcept { return rule_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(mesh_.n()) * r_; }

    double node(int j, int k) const noexcept { return mesh_.point(j) + h_ * rule_.nodes[k]; }

    /// Unnormalized basis value e_q at standard node k.
    double basis(int k, int q) const noexcept { return basis_[k * r_ + q]; }

    /// Projection of a function given by values at the standard nodes
    /// (values[j * p + k]).
    std::vector<double> project_nodal(std::span<const double> values) const {
        const int p = rule_.points;
        std::vector<double> c(dim(), 0.0);
        const double scale = std::sqrt(h_);
        for (int j = 0; j < mesh_.n(); ++j) {
            for (int k = 0; k < p; ++k) {
                const double wv = rule_.weights[k] * values[j * p + k];
                for (int q = 0; q < r_; ++q) c[j * r_ + q] += wv * basis(k, q);
            }
            for (int q = 0; q < r_; ++q) c[j * r_ + q] *= scale;
        }
        return c;
    }

    /// x at every standard node for coefficient vector c.
    std::vector<double> nodal_values(std::span<const double> c) const {
        const int p = rule_.points;
        std::vector<double> x(static_cast<std::size_t>(mesh_.n()) * p);
        for (int j = 0; j < mesh_.n(); ++j) {
            for (int k = 0; k < p; ++k) {
                double sum = 0.0;
                for (int q = 0; q < r_; ++q) sum += c[j * r_ + q] * basis(k, q);
                x[j * p + k] = sum * inv_sqrt_h_;
            }
        }
        return x;
    }

    template <class F>
    std::vector<double> sample(F&& f) const {
        const int p = rule_.points;
        std::vector<double> v(static_cast<std::size_t>(mesh_.n()) * p);
        for (int j = 0; j < mesh_.n(); ++j) {
            for (int k = 0; k < p; ++k) v[j * p + k] = f(node(j, k));
        }
        return v;
    }

    /// Visits every inner quadrature sample (t, weight, cell m, local tau,
    /// standard-node index or -1) used to approximate int_0^1 g(t) dt at outer
    /// point s. In full mode the cell containing s is cut at s.
    template <class Visit>
    void for_each_inner(double s, Visit&& visit) const {
        const int p = rule_.points;
        const int split_cell = split_cell_of(s);
        for (int m = 0; m < mesh_.n(); ++m) {
            if (m != split_cell) {
                for (int k = 0; k < p; ++k) {
                    visit(node(m, k), h_ * rule_.weights[k], m, rule_.nodes[k], k);
                }
                continue;
            }
            const double a = mesh_.point(m);
            const double b = mesh_.point(m + 1);
            for (const auto [lo, hi] : {std::pair{a, s}, std::pair{s, b}}) {
                const double len = hi - lo;
                if (len <= 0.0) continue;
                for (int k = 0; k < p; ++k) {
                    const double t = lo + len * rule_.nodes[k];
                    visit(t, len * rule_.weights[k], m, mesh_.local(m, t), -1);
                }
            }
        }
    }

    /// Value at local coordinate tau of cell m for coefficients c.
    double eval(std::span<const double> c, int m, double tau) const {
        double vals[64];
        std::span<double> b(vals, static_cast<std::size_t>(std::min(r_, 64)));
        eval_basis_all(tau, b);
        double sum = 0.0;
        for (int q = 0; q < r_; ++q) sum += c[m * r_ + q] * b[q];
        return sum * inv_sqrt_h_;
    }

    /// K(x_c)(s), with nodal[] the values of x_c at the standard nodes.
    double apply_operator(std::span<const double> c, std::span<const double> nodal,
                          double s) const {
        const int p = rule_.points;
        double sum = 0.0;
        for_each_inner(s, [&](double t, double w, int m, double tau, int k) {
            const double u = k >= 0 ? nodal[m * p + k] : eval(c, m, tau);
            sum += w * (t <= s ? kernel_.kappa1(s, t, u) : kernel_.kappa2(s, t, u));
        });
        return sum;
    }

    /// Coefficients of P K(x_c).
    std::vector<double> project_operator(std::span<const double> c) const {
        const std::vector<double> nodal = nodal_values(c);
        const int p = rule_.points;
        std::vector<double> kv(static_cast<std::size_t>(mesh_.n()) * p);
        for (int j = 0; j < mesh_.n(); ++j) {
            for (int k = 0; k < p; ++k) kv[j * p + k] = apply_operator(c, nodal, node(j, k));
        }
        return project_nodal(kv);
    }

    /// Matrix of <K'(x_c) b_mu, b_nu> over the cell-mapped orthonormal basis.
    Eigen::MatrixXd linearization(std::span<const double> c) const {
        if (!kernel_.has_first_derivative()) {
            throw UnsupportedOperation("linearization requires kernel u-derivative pieces");
        }
        const int p = rule_.points;
        const std::vector<double> nodal = nodal_values(c);
        const Eigen::Index N = static_cast<Eigen::Index>(dim());
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, N);
        Eigen::VectorXd row(N);
        double bvals[64];
        std::span<double> bspan(bvals, static_cast<std::size_t>(std::min(r_, 64)));
        for (int j = 0; j < mesh_.n(); ++j) {
            for (int k = 0; k < p; ++k) {
                const double s = node(j, k);
                // row(mu) = int l(s, t, x(t)) b_mu(t) dt
                row.setZero();
                for_each_inner(s, [&](double t, double w, int m, double tau, int kk) {
                    const double u = kk >= 0 ? nodal[m * p + kk] : eval(c, m, tau);
                    const double l = t <= s ? kernel_.du_kappa1(s, t, u)
                                            : kernel_.du_kappa2(s, t, u);
                    const double wl = w * l * inv_sqrt_h_;
                    if (kk >= 0) {
                        for (int q = 0; q < r_; ++q) row(m * r_ + q) += wl * basis(kk, q);
                    } else {
                        eval_basis_all(tau, bspan);
                        for (int q = 0; q < r_; ++q) row(m * r_ + q) += wl * bspan[q];
                    }
                });
                const double wo = h_ * rule_.weights[k] * inv_sqrt_h_;
                for (int q = 0; q < r_; ++q) a.row(j * r_ + q) += (wo * basis(k, q)) * row.transpose();
            }
        }
        return a;
    }

private:
    int split_cell_of(double s) const {
        if (mode_ == DiscreteMode::PaperDiscrete) return -1;
        if (mesh_.partition_index(s) >= 0) return -1;
        return mesh_.cell_of(s);
    }

    const GreenKernel& kernel_;
    UniformMesh mesh_;
    int r_;
    DiscreteMode mode_;
    GaussRule rule_;
    double h_;
    double inv_sqrt_h_;
    std::vector<double> basis_;
};

inline double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

/// <K'(x) b_mu, b_nu> for the cell-mapped basis of x's space, inner and outer
/// integrals both with `rule` and the inner one cut at the diagonal.
inline Eigen::MatrixXd assemble_linearized(const UrysohnProblem& prob, const PiecewisePoly& x,
                                           const GaussRule& rule) {
    detail::GalerkinDiscretization disc(prob.kernel, x.mesh(), x.r(), rule.points,
                                        DiscreteMode::FullGalerkin);
    return disc.linearization(x.coeffs());
}

/// Solves the Galerkin equation for x_G in the degree-(r-1) piecewise space.
/// Throws DivergenceError when max_iter is reached and SingularLinearization
/// when a Newton matrix cannot be factored reliably.
inline GalerkinSolution solve_galerkin(const UrysohnProblem& prob, const UniformMesh& mesh,
                                       int r, const SolveOptions& opts) {
    opts.validate();
    if (r < 1) throw ConfigError("solve_galerkin: r must be >= 1");
    if (opts.method == Method::Newton && !prob.kernel.has_first_derivative()) {
        throw UnsupportedOperation("Newton's method needs kernel u-derivative pieces");
    }
    const detail::GalerkinDiscretization disc(prob.kernel, mesh, r, opts.quad_points, opts.mode);
    const std::vector<double> pf = disc.project_nodal(disc.sample(prob.f));

    std::vector<double> c;
    switch (opts.initial_guess) {
        case InitialGuess::ProjectF: c = pf; break;
        case InitialGuess::Zero: c.assign(disc.dim(), 0.0); break;
        case InitialGuess::Supplied:
            if (opts.supplied_guess->mesh() != mesh || opts.supplied_guess->r() != r) {
                throw ConfigError("supplied initial guess lives on a different space");
            }
            c = opts.supplied_guess->coeffs();
            break;
    }

    // F(c) = P (K(x_c) + f)
    const auto fixed_point_map = [&](std::span<const double> coeffs) {
        std::vector<double> g = disc.project_operator(coeffs);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += pf[i];
        return g;
    };

    GalerkinSolution sol{PiecewisePoly(mesh, r), 0, std::numeric_limits<double>::infinity(), 0.0,
                         opts.mode, disc.points()};
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iter && !converged;) {
        ++it;
        std::vector<double> g = fixed_point_map(c);
        double update = 0.0;
        if (opts.method == Method::Picard) {
            for (std::size_t i = 0; i < c.size(); ++i) {
                const double next = (1.0 - opts.relaxation) * c[i] + opts.relaxation * g[i];
                update = std::max(update, std::abs(next - c[i]));
                c[i] = next;
            }
        } else {
            const Eigen::Index N = static_cast<Eigen::Index>(c.size());
            Eigen::MatrixXd jac = -disc.linearization(c);
            jac += Eigen::MatrixXd::Identity(N, N);
            Eigen::VectorXd rhs(N);
            for (Eigen::Index i = 0; i < N; ++i) rhs(i) = g[i] - c[i];
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
            const double rcond = lu.rcond();
            if (!(rcond > 1e-13)) {
                throw SingularLinearization(
                    "Newton linearization is singular (rcond " + std::to_string(rcond) +
                        "); 1 may be an eigenvalue of the discrete Frechet derivative",
                    rcond);
            }
            const Eigen::VectorXd delta = lu.solve(rhs);
            for (Eigen::Index i = 0; i < N; ++i) {
                update = std::max(update, std::abs(delta(i)));
                c[i] += delta(i);
            }
        }
        sol.final_update = update;
        if (!std::isfinite(update)) break;
        converged = update <= opts.tol;
    }
    sol.iterations = it;
    if (!converged) {
        throw DivergenceError("Galerkin iteration did not converge after " + std::to_string(it) +
                                  " iterations (last update " + std::to_string(sol.final_update) +
                                  ")",
                              c, sol.final_update, it);
    }

    // Sup of x_c - P(K(x_c) + f) over a 201-point grid, both one-sided limits
    // at partition points.
    const std::vector<double> g = fixed_point_map(c);
    std::vector<double> diff(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) diff[i] = c[i] - g[i];
    const PiecewisePoly res(mesh, r, std::move(diff));
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double s = i / 200.0;
        worst = std::max({worst, std::abs(res.eval_left(s)), std::abs(res.eval_right(s))});
    }
    sol.final_residual = worst;
    sol.x_g = PiecewisePoly(mesh, r, std::move(c));
    return sol;
}

/// x_S(s) = K(x_G)(s) + f(s), using the same quadrature family the solution
/// was computed with. In full mode `rule` selects the panel rule.
inline double iterated_eval(const UrysohnProblem& prob, const GalerkinSolution& sol, double s,
                            const GaussRule& rule) {
    detail::check_unit(s, "iterated_eval point");
    if (sol.mode == DiscreteMode::FullGalerkin) {
        return apply_K(prob, sol.x_g, s, rule, sol.x_g.mesh()) + prob.f(s);
    }
    const detail::GalerkinDiscretization disc(prob.kernel, sol.x_g.mesh(), sol.x_g.r(),
                                              rule.points, sol.mode);
    const auto& c = sol.x_g.coeffs();
    return disc.apply_operator(c, disc.nodal_values(c), s) + prob.f(s);
}

inline double iterated_eval(const UrysohnProblem& prob, const GalerkinSolution& sol, double s) {
    return iterated_eval(prob, sol, s, gauss_rule(std::max(sol.quad_points, 2)));
}

/// x_S at t_0, ..., t_n of the solution's mesh.
inline PartitionValues iterated_at_partition(const UrysohnProblem& prob,
                                             const GalerkinSolution& sol,
                                             const GaussRule& rule) {
    const UniformMesh& mesh = sol.x_g.mesh();
    std::vector<double> v(mesh.n() + 1);
    if (sol.mode == DiscreteMode::FullGalerkin) {
        for (int i = 0; i <= mesh.n(); ++i) v[i] = iterated_eval(prob, sol, mesh.point(i), rule);
    } else {
        const detail::GalerkinDiscretization disc(prob.kernel, mesh, sol.x_g.r(), rule.points,
                                                  sol.mode);
        const auto& c = sol.x_g.coeffs();
        const std::vector<double> nodal = disc.nodal_values(c);
        for (int i = 0; i <= mesh.n(); ++i) {
            const double s = mesh.point(i);
            v[i] = disc.apply_operator(c, nodal, s) + prob.f(s);
        }
    }
    return PartitionValues(mesh, std::move(v));
}

inline PartitionValues iterated_at_partition(const UrysohnProblem& prob,
                                             const GalerkinSolution& sol) {
    return iterated_at_partition(prob, sol, gauss_rule(std::max(sol.quad_points, 2)));
}

/// One Richardson step removing the h^{2r} term:
/// (4^r x_{2n}(t_i) - x_n(t_i)) / (4^r - 1) on the coarse partition points.
inline PartitionValues richardson(const PartitionValues& coarse, const PartitionValues& fine,
                                  int r) {
    if (r < 1) throw ConfigError("richardson: r must be >= 1");
    if (fine.mesh.n() != 2 * coarse.mesh.n()) {
        throw IncompatibleMesh("richardson: fine mesh must have twice the coarse cell count (" +
                               std::to_string(coarse.mesh.n()) + " vs " +
                               std::to_string(fine.mesh.n()) + ")");
    }
    const double w = std::ldexp(1.0, 2 * r);
    std::vector<double> out(coarse.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (w * fine.values[2 * i] - coarse.values[i]) / (w - 1.0);
    }
    return PartitionValues(coarse.mesh, std::move(out));
}

}  // namespace urysohn
