#include "fksobol/runner.hpp"

#include "fksobol/error.hpp"
#include "fksobol/galerkin.hpp"
#include "fksobol/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace fksobol {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json to_json(const SolveDiagnostics& d)
{
    return json{{"method", to_string(d.method)},
                {"solves", d.solves},
                {"iterations", d.iterations},
                {"max_relative_residual", d.max_relative_residual}};
}

std::string error_tag(ErrorKind k)
{
    switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate_variance: return "degenerate_variance";
    case ErrorKind::solver_divergence: return "solver_divergence";
    case ErrorKind::mc_truncation: return "mc_truncation";
    case ErrorKind::unsupported_model: return "unsupported_model";
    }
    return "error";
}

struct GalerkinOutcome {
    std::vector<SobolEntry> entries;
    std::optional<ChaosFemField> field;
};

GalerkinOutcome run_galerkin(const RunConfig& cfg, json& report)
{
    const auto start = Clock::now();
    const SdeModel sde = cfg.model.to_sde();
    auto basis = std::make_shared<const ChaosBasis>(sde.params(), cfg.chaos.truncation, cfg.chaos.p_max,
                                                    cfg.chaos.resolved_quad_nodes());
    auto grid = std::make_shared<const FemGrid>(cfg.model.domain, cfg.fem.cells);

    std::optional<ChaosFemField> field;
    json section;
    if (cfg.effective_quantity() == Quantity::exit_time) {
        const EllipticSystem sys = assemble_elliptic(cfg.model, *basis, *grid);
        for (const auto& w : sys.warnings) {
            report["diagnostics"]["warnings"].push_back(w);
        }
        EllipticSolution sol = solve_elliptic(sys, grid, basis, cfg.solver);
        section["solver"] = to_json(sol.diagnostics);
        field.emplace(std::move(sol.field));
    } else {
        const ParabolicSystem sys = assemble_parabolic(sde, *basis, *grid, [](double) { return 1.0; });
        ParabolicSolution sol = solve_parabolic(sys, grid, basis, cfg.time, cfg.solver);
        for (const auto& w : sol.warnings) {
            report["diagnostics"]["warnings"].push_back(w);
        }
        section["solver"] = to_json(sol.diagnostics);
        field.emplace(std::move(sol.field));
    }

    const Eigen::VectorXd coeffs = chaos_coeffs_at(*field, cfg.x());
    section["mean"] = coeffs(0);
    section["variance"] = coeffs.tail(coeffs.size() - 1).squaredNorm();
    section["basis_size"] = basis->size();
    section["seconds"] = seconds_since(start);
    // Recorded before the indices so a degenerate variance still leaves the mean in the report.
    report["galerkin"] = section;

    GalerkinOutcome out;
    for (const auto& set : cfg.index_sets) {
        SobolEntry e = sobol_parseval(coeffs, *basis, set);
        e.x = cfg.x();
        if (field->kind() == FieldKind::parabolic) {
            e.t = field->time();
        }
        out.entries.push_back(std::move(e));
    }
    out.field = std::move(field);
    return out;
}

McSobolResult run_mc(const RunConfig& cfg, json& report)
{
    const auto start = Clock::now();
    const SdeModel sde = cfg.model.to_sde();
    const Kernel kernel = cfg.effective_quantity() == Quantity::exit_time ? Kernel::exit_time()
                                                                         : Kernel::survival(cfg.time.horizon);
    McSobolResult res = double_mc_sobol(sde, cfg.index_sets, cfg.mc.n_outer, cfg.mc.m_inner, kernel, cfg.mc.euler,
                                        cfg.mc.threads, cfg.mc.estimator);
    double mean = 0.0;
    for (double y : res.y_base) {
        mean += y;
    }
    mean /= static_cast<double>(res.y_base.size());
    report["mc"] = json{{"N", cfg.mc.n_outer},
                        {"M", cfg.mc.m_inner},
                        {"dt", cfg.mc.euler.dt},
                        {"seed", cfg.mc.euler.seed},
                        {"keying", to_string(cfg.mc.euler.keying)},
                        {"estimator", to_string(cfg.mc.estimator)},
                        {"inner_noise", res.inner_noise},
                        {"boundary_shift", cfg.mc.euler.boundary_shift},
                        {"path_evaluations", res.path_evaluations},
                        {"mean", mean},
                        {"seconds", seconds_since(start)}};
    return res;
}

void write_mc_samples(const RunConfig& cfg, const McSobolResult& res, const std::filesystem::path& path)
{
    std::ofstream out(path);
    out.precision(17);
    out << "l,Y_B";
    for (const auto& s : cfg.index_sets) {
        out << ",Y_I" << s.label();
    }
    out << '\n';
    for (std::size_t l = 0; l < res.y_base.size(); ++l) {
        out << l + 1 << ',' << res.y_base[l];
        for (const auto& col : res.y_frozen) {
            out << ',' << col[l];
        }
        out << '\n';
    }
}

} // namespace

nlohmann::json to_json(const SobolEntry& e)
{
    json j{{"method", to_string(e.method)},
           {"I", e.set.coords},
           {"estimate", e.estimate},
           {"variance", e.variance},
           {"numerator", e.numerator},
           {"x", e.x},
           {"out_of_range", e.out_of_range}};
    if (e.std_error) {
        j["stderr"] = *e.std_error;
    }
    if (e.n_outer) {
        j["N"] = *e.n_outer;
    }
    if (e.n_inner) {
        j["M"] = *e.n_inner;
    }
    if (e.t) {
        j["t"] = *e.t;
    }
    return j;
}

nlohmann::json to_json(const RunConfig& cfg)
{
    json sets = json::array();
    for (const auto& s : cfg.index_sets) {
        sets.push_back(s.coords);
    }
    return json{
        {"mode", to_string(cfg.mode)},
        {"quantity", to_string(cfg.quantity)},
        {"model",
         {{"name", "ou"},
          {"mu1", cfg.model.mu1},
          {"mu2", cfg.model.mu2},
          {"sigma1", cfg.model.sigma1},
          {"sigma2", cfg.model.sigma2},
          {"x0", cfg.model.x0},
          {"domain", {cfg.model.domain.lo, cfg.model.domain.hi}}}},
        {"chaos",
         {{"truncation", to_string(cfg.chaos.truncation)},
          {"p_max", cfg.chaos.p_max},
          {"quad_nodes", cfg.chaos.resolved_quad_nodes()}}},
        {"fem", {{"N", cfg.fem.cells}}},
        {"solver",
         {{"tol", cfg.solver.tol},
          {"max_iter", cfg.solver.max_iter},
          {"restart", cfg.solver.restart},
          {"method", to_string(cfg.solver.method)}}},
        {"time", {{"T", cfg.time.horizon}, {"M", cfg.time.steps}, {"theta", cfg.time.theta}}},
        {"mc",
         {{"N", cfg.mc.n_outer},
          {"M", cfg.mc.m_inner},
          {"dt", cfg.mc.euler.dt},
          {"seed", cfg.mc.euler.seed},
          {"max_steps", cfg.mc.euler.max_steps},
          {"boundary_shift", cfg.mc.euler.boundary_shift},
          {"keying", to_string(cfg.mc.euler.keying)},
          {"estimator", to_string(cfg.mc.estimator)},
          {"threads", cfg.mc.threads}}},
        {"output",
         {{"dir", cfg.output.dir},
          {"coeffs_csv", cfg.output.coeffs_csv},
          {"mc_samples_csv", cfg.output.mc_samples_csv}}},
        {"sobol", {{"index_sets", sets}}},
    };
}

nlohmann::json run(const RunConfig& cfg, bool write_files)
{
    const auto start = Clock::now();
    json report{{"tool", "fksobol"},
                {"version", tool_version},
                {"mode", to_string(cfg.mode)},
                {"quantity", to_string(cfg.effective_quantity())},
                {"config", to_json(cfg)},
                {"seed", cfg.mc.euler.seed},
                {"sobol", json::array()},
                {"errors", json::array()}};
    report["diagnostics"]["warnings"] = json::array();
    report["diagnostics"]["poincare_constant"] = poincare_constant(1, cfg.model.domain.length());
    const CoercivityCheck coer = check_coercivity_ou(cfg.model);
    report["diagnostics"]["coercivity"] = {{"satisfied", coer.satisfied}, {"lhs", coer.lhs}, {"rhs", coer.rhs}};

    const std::filesystem::path dir(cfg.output.dir);
    if (write_files) {
        std::filesystem::create_directories(dir);
    }

    const auto record_error = [&](const std::string& stage, const std::exception& e) {
        json err{{"stage", stage}, {"message", e.what()}};
        if (const auto* fe = dynamic_cast<const Error*>(&e)) {
            err["kind"] = error_tag(fe->kind());
        }
        if (const auto* se = dynamic_cast<const SolverError*>(&e)) {
            err["residual_history"] = se->residual_history();
        }
        if (const auto* te = dynamic_cast<const TruncationError*>(&e)) {
            err["truncated_paths"] = te->truncated_paths();
        }
        report["errors"].push_back(err);
    };

    std::optional<GalerkinOutcome> galerkin;
    if (cfg.mode == Mode::elliptic || cfg.mode == Mode::parabolic || cfg.mode == Mode::compare) {
        try {
            galerkin = run_galerkin(cfg, report);
            for (const auto& e : galerkin->entries) {
                report["sobol"].push_back(to_json(e));
            }
            if (write_files && cfg.output.coeffs_csv && galerkin->field) {
                std::ofstream out(dir / "coeffs.csv");
                write_field_csv(*galerkin->field, out);
            }
        } catch (const std::exception& e) {
            record_error("galerkin", e);
        }
    }

    std::optional<McSobolResult> mc;
    if (cfg.mode == Mode::mc_exit || cfg.mode == Mode::mc_survival || cfg.mode == Mode::compare) {
        try {
            mc = run_mc(cfg, report);
            for (const auto& e : mc->entries) {
                report["sobol"].push_back(to_json(e));
            }
            if (write_files && cfg.output.mc_samples_csv) {
                write_mc_samples(cfg, *mc, dir / "mc_samples.csv");
            }
        } catch (const std::exception& e) {
            record_error("mc", e);
        }
    }

    if (cfg.mode == Mode::compare && galerkin && mc) {
        json cmp = json::array();
        for (std::size_t s = 0; s < cfg.index_sets.size(); ++s) {
            const double g = galerkin->entries[s].estimate;
            const double m = mc->entries[s].estimate;
            cmp.push_back({{"I", cfg.index_sets[s].coords},
                           {"galerkin", g},
                           {"mc", m},
                           {"mc_stderr", mc->entries[s].std_error.value_or(0.0)},
                           {"abs_diff", std::abs(g - m)}});
        }
        report["compare"] = cmp;
    }

    report["timings"] = {{"total_seconds", seconds_since(start)}};
    report["status"] = report["errors"].empty() ? "ok" : "error";
    if (write_files) {
        std::ofstream out(dir / "report.json");
        out << report.dump(2) << '\n';
    }
    return report;
}

int run_cli(const CliRequest& req)
{
    RunConfig cfg;
    try {
        cfg = load_config(req.config_path, req.mode);
        if (req.out_dir) {
            cfg.output.dir = *req.out_dir;
        }
        if (req.seed) {
            cfg.mc.euler.seed = *req.seed;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    try {
        const json report = run(cfg, true);
        for (const auto& e : report["sobol"]) {
            std::cout << e["method"].get<std::string>() << " S" << e["I"].dump() << " = " << e["estimate"].get<double>();
            if (e.contains("stderr")) {
                std::cout << " (stderr " << e["stderr"].get<double>() << ")";
            }
            std::cout << '\n';
        }
        for (const auto& err : report["errors"]) {
            std::cerr << "error [" << err["stage"].get<std::string>() << "]: " << err["message"].get<std::string>()
                      << '\n';
        }
        std::cout << "report: " << (std::filesystem::path(cfg.output.dir) / "report.json").string() << '\n';
        return report["status"] == "ok" ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace fksobol
