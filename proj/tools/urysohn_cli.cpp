// Command-line driver: `study` runs a convergence study and writes a report,
// `solve` solves a single level and dumps samples of the iterated solution.
//
// Exit codes: 0 success, 1 I/O failure, 2 solver divergence, 3 config error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "urysohn/urysohn.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitConfig = 3;

struct CommonFlags {
    std::string config_path;
    std::string problem;
    std::vector<std::string> params;
    int r = 0;
    std::string method;
    double tol = 0.0;
    int max_iter = 0;
    int quad_points = 0;
    std::string rhs;
    std::string mode;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON file with StudyConfig fields");
    cmd->add_option("--problem", f.problem, "paper-hammerstein | linear-green | zero-kernel");
    cmd->add_option("--param", f.params, "problem parameter override, key=value (repeatable)");
    cmd->add_option("--r", f.r, "piecewise polynomial degree bound (degree <= r-1)");
    cmd->add_option("--method", f.method, "picard | newton");
    cmd->add_option("--tol", f.tol, "coefficient update tolerance");
    cmd->add_option("--max-iter", f.max_iter, "iteration limit");
    cmd->add_option("--quad-points", f.quad_points, "Gauss points per panel");
    cmd->add_option("--rhs", f.rhs, "manufactured | paper");
    cmd->add_option("--mode", f.mode, "full | paper-discrete");
    cmd->add_option("--out", f.out, "output path (stdout when omitted)");
}

// File values first, then any flag given on the command line.
urysohn::StudyConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
    using namespace urysohn;
    StudyConfig c = f.config_path.empty() ? StudyConfig{} : load_config(f.config_path);
    if (cmd->count("--problem")) c.problem_id = f.problem;
    for (const std::string& kv : f.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--param expects key=value, got '" + kv + "'");
        }
        try {
            std::size_t used = 0;
            const std::string value = kv.substr(eq + 1);
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            c.params[kv.substr(0, eq)] = v;
        } catch (const std::logic_error&) {
            throw ConfigError("--param value is not a number in '" + kv + "'");
        }
    }
    if (cmd->count("--r")) c.r = f.r;
    if (cmd->count("--method")) c.method = parse_method(f.method);
    if (cmd->count("--tol")) c.tol = f.tol;
    if (cmd->count("--max-iter")) c.max_iter = f.max_iter;
    if (cmd->count("--quad-points")) c.quad_points = f.quad_points;
    if (cmd->count("--rhs")) c.rhs_mode = parse_rhs_mode(f.rhs);
    if (cmd->count("--mode")) c.discrete_mode = parse_discrete_mode(f.mode);
    if (cmd->count("--out")) c.output_path = f.out;
    return c;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw urysohn::ReportWriteError("cannot write '" + path + "'");
}

int run_study_cmd(const CLI::App* cmd, const CommonFlags& f, const std::string& n_list,
                  const std::string& format, bool timing) {
    using namespace urysohn;
    StudyConfig c = build_config(cmd, f);
    if (cmd->count("--n")) {
        c.n_sequence.clear();
        std::stringstream ss(n_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                const int n = std::stoi(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                c.n_sequence.push_back(n);
            } catch (const std::logic_error&) {
                throw ConfigError("--n expects a comma-separated list of integers, got '" + n_list + "'");
            }
        }
    }
    if (cmd->count("--format")) c.output_format = parse_output_format(format);
    const ConvergenceReport rep = run_study(c);
    write_output(c.output_path, render_report(rep, c.output_format, timing));
    return 0;
}

int run_solve_cmd(const CLI::App* cmd, const CommonFlags& f, int n, int samples) {
    using namespace urysohn;
    StudyConfig c = build_config(cmd, f);
    if (n < 1) throw ConfigError("--n must be a positive cell count");
    if (samples < 1) throw ConfigError("--samples must be >= 1");
    c.n_sequence = {n, 2 * n};  // satisfies validation; only n is solved
    c.validate();
    const UrysohnProblem prob = make_problem(c.problem_id, c.params, c.rhs_mode);
    const GalerkinSolution sol = solve_galerkin(prob, UniformMesh(n), c.r, c.solve_options());

    std::ostringstream out;
    out << "s,x_s,x_g_left,x_g_right,exact,error\n";
    for (int i = 0; i <= samples; ++i) {
        const double s = static_cast<double>(i) / samples;
        const double xs = iterated_eval(prob, sol, s);
        const double ex = prob.exact ? (*prob.exact)(s) : std::numeric_limits<double>::quiet_NaN();
        out << format_number(s) << ',' << format_number(xs) << ','
            << format_number(sol.x_g.eval_left(s)) << ',' << format_number(sol.x_g.eval_right(s))
            << ',' << format_number(ex) << ',' << format_number(ex - xs) << '\n';
    }
    write_output(c.output_path, out.str());
    std::cerr << "n=" << n << " r=" << c.r << " iterations=" << sol.iterations
              << " final_update=" << sol.final_update << " final_residual=" << sol.final_residual
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galerkin and iterated Galerkin solver for Urysohn equations with Green's kernels"};
    app.require_subcommand(1);

    CommonFlags study_flags;
    std::string n_list;
    std::string format;
    bool timing = false;
    CLI::App* study = app.add_subcommand("study", "run a convergence study over a doubling mesh sequence");
    add_common(study, study_flags);
    study->add_option("--n", n_list, "comma-separated doubling cell counts, e.g. 20,40,80");
    study->add_option("--format", format, "csv | json | md");
    study->add_flag("--timing", timing, "include wall-clock times in json metadata");

    CommonFlags solve_flags;
    int n = 20;
    int samples = 100;
    CLI::App* solve = app.add_subcommand("solve", "solve one level and sample x_n^S on [0,1]");
    add_common(solve, solve_flags);
    solve->add_option("--n", n, "cell count");
    solve->add_option("--samples", samples, "number of uniform sample intervals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*study) return run_study_cmd(study, study_flags, n_list, format, timing);
        return run_solve_cmd(solve, solve_flags, n, samples);
    } catch (const urysohn::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const urysohn::SingularLinearization& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const urysohn::ReportWriteError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::logic_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
}
