#pragma once

// Urysohn operators K(x)(s) = int_0^1 kappa(s, t, x(t)) dt whose kernels are of
// Green's-function type: continuous on [0,1]^2 x R, smooth on each of the
// closed triangles {t <= s} and {s <= t}, with derivative jumps across t = s.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "urysohn/errors.hpp"
#include "urysohn/mesh.hpp"
#include "urysohn/quadrature.hpp"

namespace urysohn {

using RealFunction = std::function<double(double)>;

struct GreenKernel {
    /// kappa piece evaluated at (s, t, u).
    using Piece = std::function<double(double, double, double)>;

    Piece kappa1;  // t <= s
    Piece kappa2;  // s <= t
    Piece du_kappa1;
    Piece du_kappa2;
    Piece du2_kappa1;
    Piece du2_kappa2;
    int smoothness_r = 0;

    bool has_first_derivative() const noexcept { return du_kappa1 && du_kappa2; }
    bool has_second_derivative() const noexcept { return du2_kappa1 && du2_kappa2; }
};

struct UrysohnProblem {
    std::string id;
    GreenKernel kernel;
    RealFunction f;
    std::optional<RealFunction> exact;
};

enum class RhsMode { Manufactured, PaperPrinted };

namespace detail {

inline void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::out_of_range(std::string(what) + " outside [0,1]");
    }
}

inline double eval_piece(const GreenKernel::Piece& left, const GreenKernel::Piece& right,
                         double s, double t, double u) {
    check_unit(s, "kernel argument s");
    check_unit(t, "kernel argument t");
    return t <= s ? left(s, t, u) : right(s, t, u);
}

}  // namespace detail

inline double kernel_eval(const GreenKernel& k, double s, double t, double u) {
    return detail::eval_piece(k.kappa1, k.kappa2, s, t, u);
}

inline double kernel_du_eval(const GreenKernel& k, double s, double t, double u) {
    if (!k.has_first_derivative()) throw UnsupportedOperation("kernel has no u-derivative pieces");
    return detail::eval_piece(k.du_kappa1, k.du_kappa2, s, t, u);
}

inline double kernel_du2_eval(const GreenKernel& k, double s, double t, double u) {
    if (!k.has_second_derivative()) {
        throw UnsupportedOperation("kernel has no second u-derivative pieces");
    }
    return detail::eval_piece(k.du2_kappa1, k.du2_kappa2, s, t, u);
}

/// K(x)(s) with the panel containing s cut at the diagonal.
template <class X>
double apply_K(const GreenKernel& k, X&& x, double s, const GaussRule& rule,
               const UniformMesh& mesh) {
    return integrate_split([&](double t) { return k.kappa1(s, t, x(t)); },
                           [&](double t) { return k.kappa2(s, t, x(t)); }, s, mesh, rule);
}

template <class X>
double apply_K(const UrysohnProblem& prob, X&& x, double s, const GaussRule& rule,
               const UniformMesh& mesh) {
    return apply_K(prob.kernel, std::forward<X>(x), s, rule, mesh);
}

/// K'(x)v (s) = int dkappa/du (s, t, x(t)) v(t) dt.
template <class X, class V>
double apply_Kprime(const UrysohnProblem& prob, X&& x, V&& v, double s, const GaussRule& rule,
                    const UniformMesh& mesh) {
    const GreenKernel& k = prob.kernel;
    if (!k.has_first_derivative()) throw UnsupportedOperation("apply_Kprime: no u-derivative");
    return integrate_split([&](double t) { return k.du_kappa1(s, t, x(t)) * v(t); },
                           [&](double t) { return k.du_kappa2(s, t, x(t)) * v(t); }, s, mesh,
                           rule);
}

/// K''(x)(v1, v2)(s) = int d2kappa/du2 (s, t, x(t)) v1(t) v2(t) dt.
template <class X, class V1, class V2>
double apply_Ksecond(const UrysohnProblem& prob, X&& x, V1&& v1, V2&& v2, double s,
                     const GaussRule& rule, const UniformMesh& mesh) {
    const GreenKernel& k = prob.kernel;
    if (!k.has_second_derivative()) {
        throw UnsupportedOperation("apply_Ksecond: no second u-derivative");
    }
    return integrate_split([&](double t) { return k.du2_kappa1(s, t, x(t)) * v1(t) * v2(t); },
                           [&](double t) { return k.du2_kappa2(s, t, x(t)) * v1(t) * v2(t); },
                           s, mesh, rule);
}

/// f(s) = phi(s) - K(phi)(s), the right-hand side for which phi is an exact solution.
template <class Phi>
double manufactured_f(const GreenKernel& k, Phi&& phi, double s, const GaussRule& rule,
                      const UniformMesh& mesh) {
    return phi(s) - apply_K(k, phi, s, rule, mesh);
}

/// x(s) - K(x)(s) - f(s).
template <class X>
double residual(const UrysohnProblem& prob, X&& x, double s, const GaussRule& rule,
                const UniformMesh& mesh) {
    return x(s) - apply_K(prob, x, s, rule, mesh) - prob.f(s);
}

// ---------------------------------------------------------------------------
// Built-in problems
// ---------------------------------------------------------------------------

/// Dirichlet Green's function of -u'' + gamma^2 u on [0,1]:
/// sinh(gamma min(s,t)) sinh(gamma (1 - max(s,t))) / (gamma sinh gamma).
class DirichletGreen {
public:
    explicit DirichletGreen(double gamma) : gamma_(gamma), denom_(gamma * std::sinh(gamma)) {}

    double gamma() const noexcept { return gamma_; }

    double lower(double s, double t) const {  // t <= s
        return std::sinh(gamma_ * t) * std::sinh(gamma_ * (1.0 - s)) / denom_;
    }
    double upper(double s, double t) const {  // s <= t
        return std::sinh(gamma_ * s) * std::sinh(gamma_ * (1.0 - t)) / denom_;
    }
    double operator()(double s, double t) const { return t <= s ? lower(s, t) : upper(s, t); }

private:
    double gamma_;
    double denom_;
};

/// Hammerstein kernel G(s,t) psi(t,u) with psi and its u-derivatives supplied.
inline GreenKernel make_hammerstein_kernel(DirichletGreen green,
                                           std::function<double(double, double)> psi,
                                           std::function<double(double, double)> dpsi,
                                           std::function<double(double, double)> d2psi,
                                           int smoothness_r) {
    GreenKernel k;
    k.kappa1 = [green, psi](double s, double t, double u) { return green.lower(s, t) * psi(t, u); };
    k.kappa2 = [green, psi](double s, double t, double u) { return green.upper(s, t) * psi(t, u); };
    if (dpsi) {
        k.du_kappa1 = [green, dpsi](double s, double t, double u) {
            return green.lower(s, t) * dpsi(t, u);
        };
        k.du_kappa2 = [green, dpsi](double s, double t, double u) {
            return green.upper(s, t) * dpsi(t, u);
        };
    }
    if (d2psi) {
        k.du2_kappa1 = [green, d2psi](double s, double t, double u) {
            return green.lower(s, t) * d2psi(t, u);
        };
        k.du2_kappa2 = [green, d2psi](double s, double t, double u) {
            return green.upper(s, t) * d2psi(t, u);
        };
    }
    k.smoothness_r = smoothness_r;
    return k;
}

/// Panels and points used when manufacturing a right-hand side.
inline constexpr int kManufacturePoints = 16;
inline constexpr int kManufactureCells = 16;

/// Right-hand side phi - K(phi), evaluated on demand with a 16-point rule on
/// 16 cells.
inline RealFunction make_manufactured_rhs(const GreenKernel& k, RealFunction phi) {
    return [k, phi, rule = gauss_rule(kManufacturePoints),
            mesh = UniformMesh(kManufactureCells)](double s) {
        return manufactured_f(k, phi, s, rule, mesh);
    };
}

using ProblemParams = std::map<std::string, double>;

namespace detail {

inline double take_param(const ProblemParams& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

inline void reject_unknown(const std::string& id, const ProblemParams& params,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, value] : params) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("problem '" + id + "' has no parameter '" + key + "'");
    }
}

}  // namespace detail

/// phi(s) - int G(s,t) (gamma^2 phi - 2 phi^3) dt = f(s) with phi = 2/(2s+1).
/// `gamma` defaults to sqrt(12).
inline UrysohnProblem paper_hammerstein(const ProblemParams& params = {},
                                        RhsMode rhs = RhsMode::Manufactured) {
    detail::reject_unknown("paper-hammerstein", params, {"gamma"});
    const double gamma = detail::take_param(params, "gamma", std::sqrt(12.0));
    if (!(gamma > 0.0)) throw ConfigError("paper-hammerstein: gamma must be positive");
    const double g2 = gamma * gamma;
    UrysohnProblem prob;
    prob.id = "paper-hammerstein";
    prob.kernel = make_hammerstein_kernel(
        DirichletGreen(gamma), [g2](double, double u) { return g2 * u - 2.0 * u * u * u; },
        [g2](double, double u) { return g2 - 6.0 * u * u; },
        [](double, double u) { return -12.0 * u; }, 4);
    RealFunction phi = [](double s) { return 2.0 / (2.0 * s + 1.0); };
    if (rhs == RhsMode::Manufactured) {
        prob.f = make_manufactured_rhs(prob.kernel, phi);
        prob.exact = phi;
    } else {
        // Right-hand side exactly as printed; phi does not solve this variant.
        prob.f = [gamma](double s) {
            return (2.0 * std::sinh(gamma * (1.0 - s)) + (2.0 / 3.0) * std::sinh(gamma * s)) /
                   (gamma * std::sinh(gamma));
        };
    }
    return prob;
}

/// Linear equation x - int G(s,t) x(t) dt = f with exact solution e^s.
inline UrysohnProblem linear_green(const ProblemParams& params = {}) {
    detail::reject_unknown("linear-green", params, {"gamma"});
    const double gamma = detail::take_param(params, "gamma", 3.0);
    if (!(gamma > 0.0)) throw ConfigError("linear-green: gamma must be positive");
    UrysohnProblem prob;
    prob.id = "linear-green";
    prob.kernel = make_hammerstein_kernel(
        DirichletGreen(gamma), [](double, double u) { return u; }, [](double, double) { return 1.0; },
        [](double, double) { return 0.0; }, 4);
    RealFunction phi = [](double s) { return std::exp(s); };
    prob.f = make_manufactured_rhs(prob.kernel, phi);
    prob.exact = phi;
    return prob;
}

/// kappa = 0, so the solution is f itself.
inline UrysohnProblem zero_kernel(const ProblemParams& params = {}) {
    detail::reject_unknown("zero-kernel", params, {});
    UrysohnProblem prob;
    prob.id = "zero-kernel";
    const auto zero = [](double, double, double) { return 0.0; };
    prob.kernel.kappa1 = zero;
    prob.kernel.kappa2 = zero;
    prob.kernel.du_kappa1 = zero;
    prob.kernel.du_kappa2 = zero;
    prob.kernel.du2_kappa1 = zero;
    prob.kernel.du2_kappa2 = zero;
    prob.kernel.smoothness_r = 64;
    prob.f = [](double s) { return std::cos(3.0 * s) + s; };
    prob.exact = prob.f;
    return prob;
}

/// Built-in problem by identifier: "paper-hammerstein", "linear-green", "zero-kernel".
inline UrysohnProblem make_problem(const std::string& id, const ProblemParams& params = {},
                                   RhsMode rhs = RhsMode::Manufactured) {
    if (id != "paper-hammerstein" && rhs == RhsMode::PaperPrinted) {
        throw ConfigError("rhs 'paper' is only defined for paper-hammerstein");
    }
    if (id == "paper-hammerstein") return paper_hammerstein(params, rhs);
    if (id == "linear-green") return linear_green(params);
    if (id == "zero-kernel") return zero_kernel(params);
    throw ConfigError("unknown problem id '" + id + "'");
}

}  // namespace urysohn
