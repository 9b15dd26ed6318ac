#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "urysohn/solver.hpp"

using namespace urysohn;

namespace {

const double kGamma = std::sqrt(12.0);

SolveOptions picard(double tol = 1e-12) {
    SolveOptions o;
    o.tol = tol;
    return o;
}

SolveOptions newton(double tol = 1e-12) {
    SolveOptions o;
    o.method = Method::Newton;
    o.tol = tol;
    return o;
}

/// <G b_mu, b_nu> for r = 1 by adaptive integration over each pair of cells,
/// splitting the inner integral at the diagonal.
Eigen::MatrixXd green_galerkin_matrix(double gamma, int n) {
    const double h = 1.0 / n;
    Eigen::MatrixXd a(n, n);
    for (int nu = 0; nu < n; ++nu) {
        for (int mu = 0; mu < n; ++mu) {
            const double lo = mu * h, hi = (mu + 1) * h;
            const auto inner = [&](double s) {
                const auto g = [&](double t) { return oracle::green(gamma, s, t); };
                if (s > lo && s < hi) {
                    return (oracle::integral_smooth(g, lo, s) + oracle::integral_smooth(g, s, hi)) /
                           std::sqrt(h);
                }
                return oracle::integral_smooth(g, lo, hi) / std::sqrt(h);
            };
            a(nu, mu) = oracle::integral_smooth(inner, nu * h, (nu + 1) * h) / std::sqrt(h);
        }
    }
    return a;
}

}  // namespace

TEST(SolveOptions, Validation) {
    SolveOptions o;
    o.tol = 0.0;
    EXPECT_THROW(o.validate(), ConfigError);
    o = SolveOptions{};
    o.max_iter = 0;
    EXPECT_THROW(o.validate(), ConfigError);
    o = SolveOptions{};
    o.quad_points = 1;
    EXPECT_THROW(o.validate(), ConfigError);
    o = SolveOptions{};
    o.initial_guess = InitialGuess::Supplied;
    EXPECT_THROW(o.validate(), ConfigError);
    o = SolveOptions{};
    o.relaxation = 1.5;
    EXPECT_THROW(o.validate(), ConfigError);
}

TEST(SolveGalerkin, ZeroKernelIsProjectionInOneIteration) {
    const UrysohnProblem z = make_problem("zero-kernel");
    const UniformMesh mesh(8);
    const GalerkinSolution sol = solve_galerkin(z, mesh, 2, picard());
    EXPECT_EQ(sol.iterations, 1);
    const PiecewisePoly pf = project(z.f, mesh, 2, gauss_rule(10));
    for (std::size_t i = 0; i < pf.size(); ++i) EXPECT_EQ(sol.x_g.coeffs()[i], pf.coeffs()[i]);
}

TEST(SolveGalerkin, LinearPicardNewtonAndDirectSolveAgree) {
    const UrysohnProblem lin = make_problem("linear-green");
    const int n = 6;
    const UniformMesh mesh(n);
    const GalerkinSolution p = solve_galerkin(lin, mesh, 1, picard(1e-14));
    const GalerkinSolution q = solve_galerkin(lin, mesh, 1, newton(1e-14));
    EXPECT_LE(q.iterations, 3);

    // (I - A) c = P f with A and P f computed independently.
    const Eigen::MatrixXd a = green_galerkin_matrix(3.0, n);
    Eigen::VectorXd pf(n);
    for (int j = 0; j < n; ++j) {
        pf(j) = oracle::integral([](double s) { return oracle::linear_green_rhs(3.0, s); }, j * mesh.h(),
                                 (j + 1) * mesh.h()) /
                std::sqrt(mesh.h());
    }
    const Eigen::VectorXd c = (Eigen::MatrixXd::Identity(n, n) - a).lu().solve(pf);
    for (int j = 0; j < n; ++j) {
        EXPECT_NEAR(p.x_g.coeffs()[j], c(j), 1e-10);
        EXPECT_NEAR(q.x_g.coeffs()[j], c(j), 1e-10);
        EXPECT_NEAR(p.x_g.coeffs()[j], q.x_g.coeffs()[j], 1e-10);
    }
}

TEST(SolveGalerkin, PicardAndNewtonAgreeOnAllBuiltins) {
    for (const char* id : {"paper-hammerstein", "linear-green", "zero-kernel"}) {
        const UrysohnProblem prob = make_problem(id);
        for (int r : {1, 2}) {
            const double tol = 1e-12;
            const GalerkinSolution a = solve_galerkin(prob, UniformMesh(8), r, picard(tol));
            const GalerkinSolution b = solve_galerkin(prob, UniformMesh(8), r, newton(tol));
            for (std::size_t i = 0; i < a.x_g.size(); ++i) {
                EXPECT_NEAR(a.x_g.coeffs()[i], b.x_g.coeffs()[i], 100 * tol) << id << " r=" << r;
            }
            EXPECT_LE(a.final_update, tol);
            EXPECT_LE(b.final_update, tol);
        }
    }
}

TEST(SolveGalerkin, RelaxedPicardConvergesToSameSolution) {
    const UrysohnProblem prob = make_problem("paper-hammerstein");
    SolveOptions o = picard();
    o.relaxation = 0.7;
    const GalerkinSolution a = solve_galerkin(prob, UniformMesh(6), 1, o);
    const GalerkinSolution b = solve_galerkin(prob, UniformMesh(6), 1, picard());
    for (std::size_t i = 0; i < a.x_g.size(); ++i) EXPECT_NEAR(a.x_g.coeffs()[i], b.x_g.coeffs()[i], 1e-10);
}

TEST(SolveGalerkin, InitialGuessVariantsConverge) {
    const UrysohnProblem prob = make_problem("paper-hammerstein");
    const GalerkinSolution ref = solve_galerkin(prob, UniformMesh(5), 2, picard());
    SolveOptions z = picard();
    z.initial_guess = InitialGuess::Zero;
    SolveOptions s = picard();
    s.initial_guess = InitialGuess::Supplied;
    s.supplied_guess = ref.x_g;
    const GalerkinSolution a = solve_galerkin(prob, UniformMesh(5), 2, z);
    const GalerkinSolution b = solve_galerkin(prob, UniformMesh(5), 2, s);
    EXPECT_EQ(b.iterations, 1);
    for (std::size_t i = 0; i < ref.x_g.size(); ++i) {
        EXPECT_NEAR(a.x_g.coeffs()[i], ref.x_g.coeffs()[i], 1e-11);
        EXPECT_NEAR(b.x_g.coeffs()[i], ref.x_g.coeffs()[i], 1e-11);
    }
    s.supplied_guess = PiecewisePoly(UniformMesh(4), 2);
    EXPECT_THROW(solve_galerkin(prob, UniformMesh(5), 2, s), ConfigError);
}

TEST(SolveGalerkin, DivergenceCarriesLastIterate) {
    const UrysohnProblem prob = make_problem("paper-hammerstein");
    SolveOptions o = picard();
    o.max_iter = 2;
    try {
        solve_galerkin(prob, UniformMesh(4), 1, o);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.iterations(), 2);
        EXPECT_EQ(e.last_coeffs().size(), 4u);
        EXPECT_GT(e.last_update(), 1e-12);
    }

    // Contraction factor ~ 30 / (1 + pi^2) > 1: Picard blows up, Newton does not.
    UrysohnProblem strong = make_problem("linear-green", {{"gamma", 1.0}});
    const auto scale = [](GreenKernel::Piece p) {
        return [p](double s, double t, double u) { return 30.0 * p(s, t, u); };
    };
    strong.kernel.kappa1 = scale(strong.kernel.kappa1);
    strong.kernel.kappa2 = scale(strong.kernel.kappa2);
    strong.kernel.du_kappa1 = scale(strong.kernel.du_kappa1);
    strong.kernel.du_kappa2 = scale(strong.kernel.du_kappa2);
    strong.f = [](double) { return 1.0; };
    SolveOptions many = picard();
    many.max_iter = 200;
    EXPECT_THROW(solve_galerkin(strong, UniformMesh(4), 1, many), DivergenceError);
    EXPECT_NO_THROW(solve_galerkin(strong, UniformMesh(4), 1, newton()));
}

TEST(SolveGalerkin, NewtonReportsSingularLinearization) {
    // kappa = u: K'(x) v = int v, which has eigenvalue 1 on constants.
    UrysohnProblem prob;
    prob.id = "degenerate";
    const auto k = [](double, double, double u) { return u; };
    const auto dk = [](double, double, double) { return 1.0; };
    prob.kernel.kappa1 = prob.kernel.kappa2 = k;
    prob.kernel.du_kappa1 = prob.kernel.du_kappa2 = dk;
    prob.f = [](double s) { return s; };
    EXPECT_THROW(solve_galerkin(prob, UniformMesh(4), 1, newton()), SingularLinearization);
}

TEST(SolveGalerkin, NewtonNeedsDerivativePieces) {
    UrysohnProblem prob = make_problem("paper-hammerstein");
    prob.kernel.du_kappa1 = nullptr;
    EXPECT_THROW(solve_galerkin(prob, UniformMesh(4), 1, newton()), UnsupportedOperation);
    EXPECT_NO_THROW(solve_galerkin(prob, UniformMesh(4), 1, picard()));
}

TEST(AssembleLinearized, ZeroKernelGivesZeroMatrix) {
    const UrysohnProblem z = make_problem("zero-kernel");
    const PiecewisePoly x = project([](double t) { return t; }, UniformMesh(3), 2);
    EXPECT_EQ(assemble_linearized(z, x, gauss_rule(10)).norm(), 0.0);
}

TEST(AssembleLinearized, MatchesDoubleIntegralOracle) {
    const UrysohnProblem lin = make_problem("linear-green");
    const PiecewisePoly x(UniformMesh(2), 1);
    const Eigen::MatrixXd a = assemble_linearized(lin, x, gauss_rule(10));
    const Eigen::MatrixXd ref = green_galerkin_matrix(3.0, 2);
    ASSERT_EQ(a.rows(), 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(a(i, j), ref(i, j), 1e-10) << i << "," << j;
}

TEST(AssembleLinearized, SymmetricForSymmetricDerivativeKernel) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    for (int r : {1, 2, 3}) {
        const PiecewisePoly x = project([](double) { return 1.3; }, UniformMesh(5), r);
        const Eigen::MatrixXd a = assemble_linearized(p, x, gauss_rule(10));
        EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-10) << "r=" << r;
    }
}

TEST(AssembleLinearized, ColumnsMatchDirectionalDerivative) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    const UniformMesh mesh(4);
    const int r = 2;
    const PiecewisePoly x = project([](double t) { return 2.0 / (2.0 * t + 1.0); }, mesh, r);
    const GaussRule rule = gauss_rule(10);
    const Eigen::MatrixXd a = assemble_linearized(p, x, rule);
    for (int col = 0; col < 8; ++col) {
        PiecewisePoly b(mesh, r);
        b.coeffs()[col] = 1.0;
        const PiecewisePoly proj = project(
            [&](double s) { return apply_Kprime(p, x, b, s, rule, mesh); }, mesh, r, rule);
        for (int row = 0; row < 8; ++row) EXPECT_NEAR(a(row, col), proj.coeffs()[row], 1e-12);
    }
}

TEST(IteratedEval, ZeroKernelReturnsF) {
    const UrysohnProblem z = make_problem("zero-kernel");
    const GalerkinSolution sol = solve_galerkin(z, UniformMesh(4), 1, picard());
    for (double s : {0.0, 0.33, 1.0}) EXPECT_EQ(iterated_eval(z, sol, s), z.f(s));
    const PartitionValues pv = iterated_at_partition(z, sol);
    for (int i = 0; i <= 4; ++i) EXPECT_EQ(pv.values[i], z.f(i / 4.0));
}

TEST(IteratedEval, ProjectionOfIteratedIsGalerkin) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    for (int r : {1, 2}) {
        const double tol = 1e-12;
        const GalerkinSolution sol = solve_galerkin(p, UniformMesh(8), r, picard(tol));
        const GaussRule rule = gauss_rule(10);
        const PiecewisePoly pxs =
            project([&](double s) { return iterated_eval(p, sol, s, rule); }, UniformMesh(8), r, rule);
        for (std::size_t i = 0; i < pxs.size(); ++i) EXPECT_NEAR(pxs.coeffs()[i], sol.x_g.coeffs()[i], 10 * tol);
    }
}

TEST(IteratedEval, GalerkinOrthogonality) {
    for (const char* id : {"paper-hammerstein", "linear-green"}) {
        const UrysohnProblem p = make_problem(id);
        for (int r : {1, 2, 3}) {
            const double tol = 1e-12;
            const UniformMesh mesh(6);
            const GalerkinSolution sol = solve_galerkin(p, mesh, r, picard(tol));
            const GaussRule rule = gauss_rule(10);
            const PiecewisePoly res = project(
                [&](double s) { return sol.x_g(s) - apply_K(p, sol.x_g, s, rule, mesh) - p.f(s); }, mesh, r,
                rule);
            for (double c : res.coeffs()) EXPECT_LE(std::abs(c), 10 * tol) << id << " r=" << r;
            EXPECT_LE(sol.final_residual, 10 * tol);
        }
    }
}

TEST(IteratedEval, EndpointsEqualRightHandSide) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    for (int n : {5, 20}) {
        const GalerkinSolution sol = solve_galerkin(p, UniformMesh(n), 1, picard());
        const PartitionValues pv = iterated_at_partition(p, sol);
        EXPECT_EQ(pv.values.front(), p.f(0.0));
        EXPECT_EQ(pv.values.back(), p.f(1.0));
    }
}

TEST(IteratedEval, IsContinuousAcrossPartitionPoints) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    const GalerkinSolution sol = solve_galerkin(p, UniformMesh(10), 1, picard());
    for (int i = 1; i < 10; ++i) {
        const double t = i / 10.0;
        EXPECT_NEAR(iterated_eval(p, sol, t - 1e-9), iterated_eval(p, sol, t + 1e-9), 1e-8);
        // x_G itself jumps there
        EXPECT_GT(std::abs(sol.x_g.eval_left(t) - sol.x_g.eval_right(t)), 1e-3);
    }
}

TEST(IteratedEval, OrderTwoAtPartitionPointsForPiecewiseConstants) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    std::vector<PartitionValues> pv;
    for (int n : {20, 40, 80}) pv.push_back(iterated_at_partition(p, solve_galerkin(p, UniformMesh(n), 1, picard())));
    const auto& phi = *p.exact;
    // Away from the zero of the leading coefficient near t = 0.65.
    for (int i : {1, 2, 5, 10, 16, 19}) {
        const double t = i / 20.0;
        const double e20 = std::abs(phi(t) - pv[0].values[i]);
        const double e40 = std::abs(phi(t) - pv[1].values[2 * i]);
        const double e80 = std::abs(phi(t) - pv[2].values[4 * i]);
        EXPECT_NEAR(std::log2(e40 / e80), 2.0, 0.1) << t;
        EXPECT_NEAR(std::log2(e20 / e40), 2.0, 0.1) << t;
    }
}

TEST(IteratedEval, RegressionValueAtMidpoint) {
    // Pipeline output frozen for change detection, not an oracle.
    const UrysohnProblem p = make_problem("paper-hammerstein");
    const PartitionValues pv = iterated_at_partition(p, solve_galerkin(p, UniformMesh(20), 1, picard()));
    EXPECT_NEAR(1.0 - pv.values[10], 5.1286e-05, 1e-8);
}

TEST(PaperDiscrete, MatchesMidpointSystemForPiecewiseConstants) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    const int n = 10;
    const double h = 1.0 / n;
    // x_j = h sum_l G(s_j, s_l) psi(x_l) + f(s_j) at midpoints, by plain iteration.
    std::vector<double> x(n, 1.0);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> next(n);
        for (int j = 0; j < n; ++j) {
            const double sj = (j + 0.5) * h;
            double sum = 0.0;
            for (int l = 0; l < n; ++l) {
                const double u = x[l];
                sum += h * oracle::green(kGamma, sj, (l + 0.5) * h) * (12.0 * u - 2.0 * u * u * u);
            }
            next[j] = sum + p.f(sj);
        }
        x = next;
    }
    SolveOptions o = picard();
    o.mode = DiscreteMode::PaperDiscrete;
    const GalerkinSolution sol = solve_galerkin(p, UniformMesh(n), 1, o);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(sol.x_g.coeffs()[j] / std::sqrt(h), x[j], 1e-11);

    // Iterated values use the same midpoint sum.
    const PartitionValues pv = iterated_at_partition(p, sol);
    for (int i = 0; i <= n; ++i) {
        const double t = i * h;
        double sum = 0.0;
        for (int l = 0; l < n; ++l) {
            const double u = x[l];
            sum += h * oracle::green(kGamma, t, (l + 0.5) * h) * (12.0 * u - 2.0 * u * u * u);
        }
        EXPECT_NEAR(pv.values[i], sum + p.f(t), 1e-11);
    }
}

TEST(PaperDiscrete, NewtonAgreesWithPicard) {
    const UrysohnProblem p = make_problem("paper-hammerstein");
    SolveOptions a = picard();
    a.mode = DiscreteMode::PaperDiscrete;
    SolveOptions b = newton();
    b.mode = DiscreteMode::PaperDiscrete;
    const GalerkinSolution sa = solve_galerkin(p, UniformMesh(8), 2, a);
    const GalerkinSolution sb = solve_galerkin(p, UniformMesh(8), 2, b);
    for (std::size_t i = 0; i < sa.x_g.size(); ++i) EXPECT_NEAR(sa.x_g.coeffs()[i], sb.x_g.coeffs()[i], 1e-10);
}

TEST(Richardson, IdentityAndWeights) {
    const PartitionValues coarse(UniformMesh(2), {1.0, 2.0, 3.0});
    const PartitionValues same(UniformMesh(4), {1.0, 7.0, 2.0, 9.0, 3.0});
    const PartitionValues ex = richardson(coarse, same, 1);
    for (int i = 0; i <= 2; ++i) EXPECT_NEAR(ex.values[i], coarse.values[i], 1e-15);

    const PartitionValues fine(UniformMesh(4), {0.5, 0.0, 1.0, 0.0, 4.0});
    const PartitionValues e1 = richardson(coarse, fine, 1);
    for (int i = 0; i <= 2; ++i) EXPECT_DOUBLE_EQ(e1.values[i], (4 * fine.values[2 * i] - coarse.values[i]) / 3);
    const PartitionValues e2 = richardson(coarse, fine, 2);
    for (int i = 0; i <= 2; ++i) EXPECT_DOUBLE_EQ(e2.values[i], (16 * fine.values[2 * i] - coarse.values[i]) / 15);

    EXPECT_THROW(richardson(coarse, PartitionValues(UniformMesh(3), {0, 0, 0, 0}), 1), IncompatibleMesh);
    EXPECT_THROW(PartitionValues(UniformMesh(2), {1.0}), std::invalid_argument);
}

TEST(Richardson, CancelsLeadingTermExactly) {
    // v_n = 1 + h^2 + h^4: extrapolated error is -h^4/4 with the h^2 term gone.
    for (int n : {2, 4, 10}) {
        const auto v = [](double h) { return 1.0 + h * h + h * h * h * h; };
        const double h = 1.0 / n;
        const PartitionValues coarse(UniformMesh(n), std::vector<double>(n + 1, v(h)));
        const PartitionValues fine(UniformMesh(2 * n), std::vector<double>(2 * n + 1, v(h / 2)));
        const PartitionValues ex = richardson(coarse, fine, 1);
        for (double e : ex.values) EXPECT_NEAR(e - 1.0, -std::pow(h, 4) / 4.0, 1e-15);
    }
}
