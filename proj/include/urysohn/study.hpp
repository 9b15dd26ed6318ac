#pragma once

// Convergence studies over a doubling mesh sequence: partition-point errors of
// the iterated solution, Richardson-extrapolated errors, observed orders and
// estimates of the leading error coefficient.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "urysohn/errors.hpp"
#include "urysohn/problem.hpp"
#include "urysohn/solver.hpp"

namespace urysohn {

enum class OutputFormat { Csv, Json, Md };

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

inline std::string to_string(Method m) { return m == Method::Picard ? "picard" : "newton"; }
inline std::string to_string(RhsMode m) {
    return m == RhsMode::Manufactured ? "manufactured" : "paper";
}
inline std::string to_string(DiscreteMode m) {
    return m == DiscreteMode::FullGalerkin ? "full" : "paper-discrete";
}
inline std::string to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
        case OutputFormat::Md: return "md";
    }
    return "csv";
}

inline Method parse_method(const std::string& s) {
    if (s == "picard") return Method::Picard;
    if (s == "newton") return Method::Newton;
    throw ConfigError("unknown method '" + s + "' (expected picard|newton)");
}
inline RhsMode parse_rhs_mode(const std::string& s) {
    if (s == "manufactured") return RhsMode::Manufactured;
    if (s == "paper") return RhsMode::PaperPrinted;
    throw ConfigError("unknown rhs mode '" + s + "' (expected manufactured|paper)");
}
inline DiscreteMode parse_discrete_mode(const std::string& s) {
    if (s == "full") return DiscreteMode::FullGalerkin;
    if (s == "paper-discrete") return DiscreteMode::PaperDiscrete;
    throw ConfigError("unknown mode '" + s + "' (expected full|paper-discrete)");
}
inline OutputFormat parse_output_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    if (s == "md") return OutputFormat::Md;
    throw ConfigError("unknown output format '" + s + "' (expected csv|json|md)");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct StudyConfig {
    std::string problem_id = "paper-hammerstein";
    ProblemParams params;
    int r = 1;
    std::vector<int> n_sequence{20, 40, 80};
    Method method = Method::Picard;
    double tol = 1e-12;
    int max_iter = 500;
    int quad_points = 10;
    RhsMode rhs_mode = RhsMode::Manufactured;
    DiscreteMode discrete_mode = DiscreteMode::FullGalerkin;
    std::string output_path;
    OutputFormat output_format = OutputFormat::Csv;

    void validate() const {
        if (r < 1) throw ConfigError("r must be >= 1");
        if (n_sequence.size() < 2) throw ConfigError("n_sequence needs at least two levels");
        if (n_sequence.front() < 1) throw ConfigError("n_sequence entries must be positive");
        for (std::size_t i = 1; i < n_sequence.size(); ++i) {
            if (n_sequence[i] != 2 * n_sequence[i - 1]) {
                throw ConfigError("n_sequence must double at every step (" +
                                  std::to_string(n_sequence[i - 1]) + " -> " +
                                  std::to_string(n_sequence[i]) + ")");
            }
        }
        solve_options().validate();
    }

    SolveOptions solve_options() const {
        SolveOptions o;
        o.method = method;
        o.tol = tol;
        o.max_iter = max_iter;
        o.quad_points = quad_points;
        o.mode = discrete_mode;
        return o;
    }
};

inline void to_json(nlohmann::json& j, const StudyConfig& c) {
    j = nlohmann::json{{"problem_id", c.problem_id},
                       {"params", c.params},
                       {"r", c.r},
                       {"n_sequence", c.n_sequence},
                       {"method", to_string(c.method)},
                       {"tol", c.tol},
                       {"max_iter", c.max_iter},
                       {"quad_points", c.quad_points},
                       {"rhs_mode", to_string(c.rhs_mode)},
                       {"discrete_mode", to_string(c.discrete_mode)},
                       {"output_path", c.output_path},
                       {"output_format", to_string(c.output_format)}};
}

/// Reads the fields present in j over the defaults in c. Unknown keys are rejected.
inline void merge_config(const nlohmann::json& j, StudyConfig& c) {
    if (!j.is_object()) throw ConfigError("config document must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "problem_id") c.problem_id = value.get<std::string>();
            else if (key == "params") c.params = value.get<ProblemParams>();
            else if (key == "r") c.r = value.get<int>();
            else if (key == "n_sequence") c.n_sequence = value.get<std::vector<int>>();
            else if (key == "method") c.method = parse_method(value.get<std::string>());
            else if (key == "tol") c.tol = value.get<double>();
            else if (key == "max_iter") c.max_iter = value.get<int>();
            else if (key == "quad_points") c.quad_points = value.get<int>();
            else if (key == "rhs_mode") c.rhs_mode = parse_rhs_mode(value.get<std::string>());
            else if (key == "discrete_mode") {
                c.discrete_mode = parse_discrete_mode(value.get<std::string>());
            } else if (key == "output_path") c.output_path = value.get<std::string>();
            else if (key == "output_format") {
                c.output_format = parse_output_format(value.get<std::string>());
            } else {
                throw ConfigError("unknown config field '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

inline StudyConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    StudyConfig c;
    merge_config(j, c);
    return c;
}

// ---------------------------------------------------------------------------
// Order and coefficient estimates
// ---------------------------------------------------------------------------

/// log2(e_coarse / e_fine); NaN when either input is not a positive finite number.
inline double estimate_order(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0 && e_fine > 0.0) || !std::isfinite(e_coarse) || !std::isfinite(e_fine)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::log2(e_coarse / e_fine);
}

struct ZetaEstimate {
    std::vector<std::vector<double>> zeta;  // [level][point]
    std::vector<double> stabilization;      // [level pair (l, l+1)]
};

/// zeta_l(t_i) = error_l(t_i) / h_l^{2r}, and for each consecutive pair
/// max_i |zeta_l - zeta_{l+1}| / max_i |zeta_{l+1}|.
inline ZetaEstimate zeta_estimate(const std::vector<std::vector<double>>& signed_errors,
                                  const std::vector<double>& h, int r) {
    if (signed_errors.size() != h.size()) {
        throw std::invalid_argument("zeta_estimate: one h per level required");
    }
    ZetaEstimate out;
    for (std::size_t l = 0; l < h.size(); ++l) {
        const double scale = std::pow(h[l], 2 * r);
        std::vector<double> z(signed_errors[l].size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = signed_errors[l][i] / scale;
        out.zeta.push_back(std::move(z));
    }
    for (std::size_t l = 0; l + 1 < out.zeta.size(); ++l) {
        double diff = 0.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < out.zeta[l].size(); ++i) {
            diff = std::max(diff, std::abs(out.zeta[l][i] - out.zeta[l + 1][i]));
            ref = std::max(ref, std::abs(out.zeta[l + 1][i]));
        }
        out.stabilization.push_back(ref > 0.0 ? diff / ref
                                              : (diff == 0.0 ? 0.0
                                                             : std::numeric_limits<double>::infinity()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Study
// ---------------------------------------------------------------------------

struct LevelDiagnostics {
    int n = 0;
    int iterations = 0;
    double final_update = 0.0;
    double final_residual = 0.0;
    double wall_seconds = 0.0;
};

struct ConvergenceReport {
    StudyConfig config;
    bool reference_based = false;
    int reference_n = 0;
    std::vector<int> levels;
    std::vector<double> points;                  // coarse interior partition points
    std::vector<std::vector<double>> e1;         // [level][point] |phi - x_n^S|
    std::vector<std::vector<double>> signed_e1;  // phi - x_n^S
    std::vector<std::vector<double>> alpha;      // [level pair][point]
    std::vector<std::vector<double>> e2;         // [extrapolation pair][point]
    std::vector<std::vector<double>> beta;       // [consecutive e2 pair][point]
    ZetaEstimate zeta;
    std::vector<LevelDiagnostics> diagnostics;
};

/// Thrown when a level's solve fails; names the level.
class StudyLevelError : public DivergenceError {
public:
    StudyLevelError(int n, const DivergenceError& cause)
        : DivergenceError("level n=" + std::to_string(n) + ": " + cause.what(),
                          cause.last_coeffs(), cause.last_update(), cause.iterations()),
          n_(n) {}
    int level() const noexcept { return n_; }

private:
    int n_;
};

inline ConvergenceReport run_study(const StudyConfig& config) {
    config.validate();
    const UrysohnProblem prob = make_problem(config.problem_id, config.params, config.rhs_mode);
    const SolveOptions opts = config.solve_options();
    const int n_min = config.n_sequence.front();

    ConvergenceReport rep;
    rep.config = config;
    rep.levels = config.n_sequence;
    for (int i = 1; i < n_min; ++i) rep.points.push_back(static_cast<double>(i) / n_min);

    const auto solve_level = [&](int n, LevelDiagnostics& diag) {
        const auto start = std::chrono::steady_clock::now();
        try {
            const GalerkinSolution sol = solve_galerkin(prob, UniformMesh(n), config.r, opts);
            PartitionValues pv = iterated_at_partition(prob, sol);
            diag = {n, sol.iterations, sol.final_update, sol.final_residual,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
            return pv;
        } catch (const StudyLevelError&) {
            throw;
        } catch (const DivergenceError& e) {
            throw StudyLevelError(n, e);
        }
    };

    std::vector<PartitionValues> values;
    for (int n : config.n_sequence) {
        LevelDiagnostics diag;
        values.push_back(solve_level(n, diag));
        rep.diagnostics.push_back(diag);
    }

    // phi at the coarse points, exact or from a mesh 8x finer than the finest level.
    std::vector<double> reference(rep.points.size());
    if (prob.exact) {
        for (std::size_t i = 0; i < reference.size(); ++i) reference[i] = (*prob.exact)(rep.points[i]);
    } else {
        rep.reference_based = true;
        rep.reference_n = 8 * config.n_sequence.back();
        LevelDiagnostics diag;
        const PartitionValues ref = solve_level(rep.reference_n, diag);
        const int stride = rep.reference_n / n_min;
        for (std::size_t i = 0; i < reference.size(); ++i) {
            reference[i] = ref.values[(i + 1) * stride];
        }
    }

    const auto at_coarse = [&](const PartitionValues& pv, std::size_t i) {
        return pv.values[(i + 1) * (pv.mesh.n() / n_min)];
    };

    std::vector<double> hs;
    for (const PartitionValues& pv : values) {
        std::vector<double> se(rep.points.size());
        std::vector<double> ae(rep.points.size());
        for (std::size_t i = 0; i < se.size(); ++i) {
            se[i] = reference[i] - at_coarse(pv, i);
            ae[i] = std::abs(se[i]);
        }
        rep.signed_e1.push_back(std::move(se));
        rep.e1.push_back(std::move(ae));
        hs.push_back(pv.mesh.h());
    }
    for (std::size_t l = 0; l + 1 < values.size(); ++l) {
        std::vector<double> a(rep.points.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = estimate_order(rep.e1[l][i], rep.e1[l + 1][i]);
        rep.alpha.push_back(std::move(a));

        const PartitionValues ex = richardson(values[l], values[l + 1], config.r);
        std::vector<double> e(rep.points.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::abs(reference[i] - at_coarse(ex, i));
        rep.e2.push_back(std::move(e));
    }
    for (std::size_t l = 0; l + 1 < rep.e2.size(); ++l) {
        std::vector<double> b(rep.points.size());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = estimate_order(rep.e2[l][i], rep.e2[l + 1][i]);
        rep.beta.push_back(std::move(b));
    }
    rep.zeta = zeta_estimate(rep.signed_e1, hs, config.r);
    return rep;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

/// Flat column view of a report, shared by the csv and json encodings.
struct ReportTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline ReportTable to_table(const ConvergenceReport& rep) {
    ReportTable t;
    const auto& lv = rep.levels;
    const auto pair = [&](std::size_t l, std::size_t step) {
        return std::to_string(lv[l]) + "-" + std::to_string(lv[l + step]);
    };
    t.columns.push_back("t_i");
    for (std::size_t l = 0; l < rep.e1.size(); ++l) t.columns.push_back("E1@" + std::to_string(lv[l]));
    for (std::size_t l = 0; l < rep.alpha.size(); ++l) t.columns.push_back("alpha@" + pair(l, 1));
    for (std::size_t l = 0; l < rep.e2.size(); ++l) t.columns.push_back("E2@" + std::to_string(lv[l]));
    for (std::size_t l = 0; l < rep.beta.size(); ++l) t.columns.push_back("beta@" + pair(l, 1));
    for (std::size_t l = 0; l < rep.zeta.zeta.size(); ++l) {
        t.columns.push_back("zeta@" + std::to_string(lv[l]));
    }
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        std::vector<double> row{rep.points[i]};
        for (const auto& c : rep.e1) row.push_back(c[i]);
        for (const auto& c : rep.alpha) row.push_back(c[i]);
        for (const auto& c : rep.e2) row.push_back(c[i]);
        for (const auto& c : rep.beta) row.push_back(c[i]);
        for (const auto& c : rep.zeta.zeta) row.push_back(c[i]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Shortest decimal string that reads back to the same double; "nan" for NaN.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline nlohmann::json report_metadata(const ConvergenceReport& rep, bool include_timing) {
    nlohmann::json levels = nlohmann::json::array();
    for (const LevelDiagnostics& d : rep.diagnostics) {
        nlohmann::json l{{"n", d.n},
                         {"iterations", d.iterations},
                         {"final_update", d.final_update},
                         {"final_residual", d.final_residual}};
        if (include_timing) l["wall_seconds"] = d.wall_seconds;
        levels.push_back(std::move(l));
    }
    nlohmann::json meta{{"config", rep.config},
                        {"reference_based", rep.reference_based},
                        {"levels", levels},
                        {"zeta_stabilization", rep.zeta.stabilization}};
    if (rep.reference_based) meta["reference_n"] = rep.reference_n;
    return meta;
}

inline std::string render_csv(const ReportTable& t) {
    std::ostringstream out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
    return out.str();
}

inline std::string render_json(const ConvergenceReport& rep, bool include_timing = false) {
    const ReportTable t = to_table(rep);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (double v : row) {
            if (std::isfinite(v)) r.push_back(v);
            else r.push_back(nullptr);
        }
        rows.push_back(std::move(r));
    }
    nlohmann::json doc{{"columns", t.columns},
                       {"rows", rows},
                       {"metadata", report_metadata(rep, include_timing)}};
    return doc.dump(2) + "\n";
}

/// Inverse of render_json for the column table; null cells read back as NaN.
inline ReportTable parse_report_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    ReportTable t;
    t.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& row : doc.at("rows")) {
        std::vector<double> r;
        for (const auto& v : row) {
            r.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

namespace detail {

inline std::string sci(double v) {
    if (!std::isfinite(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}
inline std::string fixed2(double v) {
    if (!std::isfinite(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline void md_table(std::ostringstream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    out << '|';
    for (const auto& h : header) out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& row : rows) {
        out << '|';
        for (const auto& c : row) out << ' ' << c << " |";
        out << '\n';
    }
}

}  // namespace detail

/// Markdown tables: iterated errors with orders, extrapolated errors with orders,
/// and coefficient estimates.
inline std::string render_md(const ConvergenceReport& rep) {
    std::ostringstream out;
    const auto& lv = rep.levels;
    out << "# Convergence study: " << rep.config.problem_id << ", r = " << rep.config.r << "\n\n";
    if (rep.reference_based) {
        out << "Errors are measured against a reference solution with n = " << rep.reference_n
            << ".\n\n";
    }
    {
        std::vector<std::string> header{"t_i"};
        for (int n : lv) header.push_back("E1 (n=" + std::to_string(n) + ")");
        for (std::size_t l = 0; l < rep.alpha.size(); ++l) {
            header.push_back("alpha (" + std::to_string(lv[l]) + "/" + std::to_string(lv[l + 1]) + ")");
        }
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < rep.points.size(); ++i) {
            std::vector<std::string> row{detail::fixed2(rep.points[i])};
            for (const auto& c : rep.e1) row.push_back(detail::sci(c[i]));
            for (const auto& c : rep.alpha) row.push_back(detail::fixed2(c[i]));
            rows.push_back(std::move(row));
        }
        out << "## Iterated solution at partition points\n\n";
        detail::md_table(out, header, rows);
    }
    {
        std::vector<std::string> header{"t_i"};
        for (std::size_t l = 0; l < rep.e2.size(); ++l) header.push_back("E2 (n=" + std::to_string(lv[l]) + ")");
        for (std::size_t l = 0; l < rep.beta.size(); ++l) {
            header.push_back("beta (" + std::to_string(lv[l]) + "/" + std::to_string(lv[l + 1]) + ")");
        }
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < rep.points.size(); ++i) {
            std::vector<std::string> row{detail::fixed2(rep.points[i])};
            for (const auto& c : rep.e2) row.push_back(detail::sci(c[i]));
            for (const auto& c : rep.beta) row.push_back(detail::fixed2(c[i]));
            rows.push_back(std::move(row));
        }
        out << "\n## Richardson extrapolation\n\n";
        detail::md_table(out, header, rows);
    }
    {
        std::vector<std::string> header{"t_i"};
        for (int n : lv) header.push_back("zeta (n=" + std::to_string(n) + ")");
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < rep.points.size(); ++i) {
            std::vector<std::string> row{detail::fixed2(rep.points[i])};
            for (const auto& c : rep.zeta.zeta) row.push_back(detail::sci(c[i]));
            rows.push_back(std::move(row));
        }
        out << "\n## Leading coefficient estimates\n\n";
        detail::md_table(out, header, rows);
        out << "\nStabilization:";
        for (std::size_t l = 0; l < rep.zeta.stabilization.size(); ++l) {
            out << ' ' << lv[l] << '/' << lv[l + 1] << " = " << detail::sci(rep.zeta.stabilization[l]);
        }
        out << '\n';
    }
    return out.str();
}

class ReportWriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string render_report(const ConvergenceReport& rep, OutputFormat format,
                                 bool include_timing = false) {
    switch (format) {
        case OutputFormat::Csv: return render_csv(to_table(rep));
        case OutputFormat::Json: return render_json(rep, include_timing);
        case OutputFormat::Md: return render_md(rep);
    }
    return {};
}

inline void emit_report(const ConvergenceReport& rep, OutputFormat format, const std::string& path,
                        bool include_timing = false) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportWriteError("cannot open '" + path + "' for writing");
    out << render_report(rep, format, include_timing);
    if (!out) throw ReportWriteError("failed writing '" + path + "'");
}

}  // namespace urysohn
