#include "fksobol/config.hpp"

#include "fksobol/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace fksobol {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what)
{
    fail(ErrorKind::config, "config: " + path + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!node.IsMap()) {
        config_error(path, "expected a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            config_error(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

template <typename T>
T read(const YAML::Node& node, const std::string& path)
{
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        config_error(path, "cannot parse value '" + YAML::Dump(node) + "'");
    }
}

template <typename T>
void read_optional(const YAML::Node& parent, const std::string& path, const char* key, T& out)
{
    if (const YAML::Node n = parent[key]) {
        out = read<T>(n, path + "." + key);
    }
}

template <typename T>
T read_required(const YAML::Node& parent, const std::string& path, const char* key)
{
    const YAML::Node n = parent[key];
    if (!n) {
        config_error(path + "." + key, "missing required key");
    }
    return read<T>(n, path + "." + key);
}

YAML::Node section(const YAML::Node& root, const char* key, bool required)
{
    const YAML::Node n = root[key];
    if (!n && required) {
        config_error(key, "missing required section for this mode");
    }
    return n;
}

bool needs_galerkin(Mode m) { return m == Mode::elliptic || m == Mode::parabolic || m == Mode::compare; }
bool needs_mc(Mode m) { return m == Mode::mc_exit || m == Mode::mc_survival || m == Mode::compare; }

void parse_model(const YAML::Node& n, OuModel& model)
{
    const auto name = read_required<std::string>(n, "model", "name");
    if (name == "ou") {
        check_keys(n, "model", {"name", "mu1", "mu2", "sigma1", "sigma2", "x0", "domain"});
        model.mu1 = read_required<double>(n, "model", "mu1");
        model.mu2 = read_required<double>(n, "model", "mu2");
        model.sigma1 = read_required<double>(n, "model", "sigma1");
        model.sigma2 = read_required<double>(n, "model", "sigma2");
    } else if (name == "brownian") {
        // Zero drift and deterministic diffusion: the OU model with μ1 = σ1 = σ2 = 0.
        check_keys(n, "model", {"name", "sigma", "x0", "domain"});
        model.mu1 = 0.0;
        model.sigma1 = 0.0;
        model.sigma2 = 0.0;
        model.mu2 = read_required<double>(n, "model", "sigma");
    } else {
        config_error("model.name", "unknown model '" + name + "' (expected \"ou\" or \"brownian\")");
    }
    model.x0 = read_required<double>(n, "model", "x0");
    if (const YAML::Node d = n["domain"]) {
        const auto v = read<std::vector<double>>(d, "model.domain");
        if (v.size() != 2 || !(v[0] < v[1])) {
            config_error("model.domain", "expected [x_lo, x_hi] with x_lo < x_hi");
        }
        model.domain = Interval{v[0], v[1]};
    }
    try {
        model.validate();
    } catch (const Error& e) {
        config_error("model", e.what());
    }
}

} // namespace

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::elliptic: return "elliptic";
    case Mode::parabolic: return "parabolic";
    case Mode::mc_exit: return "mc-exit";
    case Mode::mc_survival: return "mc-survival";
    case Mode::compare: return "compare";
    }
    return "elliptic";
}

Mode mode_from_string(const std::string& s)
{
    for (Mode m : {Mode::elliptic, Mode::parabolic, Mode::mc_exit, Mode::mc_survival, Mode::compare}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    fail(ErrorKind::config,
         "unknown mode '" + s + "' (expected elliptic, parabolic, mc-exit, mc-survival or compare)");
}

std::string to_string(Quantity q) { return q == Quantity::survival ? "survival" : "exit_time"; }

Quantity quantity_from_string(const std::string& s)
{
    if (s == "exit_time") {
        return Quantity::exit_time;
    }
    if (s == "survival") {
        return Quantity::survival;
    }
    fail(ErrorKind::config, "config: quantity: unknown quantity '" + s + "' (expected exit_time or survival)");
}

Quantity RunConfig::effective_quantity() const
{
    switch (mode) {
    case Mode::elliptic:
    case Mode::mc_exit: return Quantity::exit_time;
    case Mode::parabolic:
    case Mode::mc_survival: return Quantity::survival;
    case Mode::compare: return quantity;
    }
    return quantity;
}

RunConfig parse_config(const std::string& text, std::optional<Mode> mode_override)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::config, std::string("config: parse error: ") + e.what());
    }
    if (!root.IsMap()) {
        fail(ErrorKind::config, "config: top level must be a mapping");
    }
    check_keys(root, "",
               {"mode", "quantity", "model", "chaos", "fem", "solver", "time", "mc", "output", "sobol"});

    RunConfig cfg;
    if (mode_override) {
        cfg.mode = *mode_override;
    } else if (const YAML::Node m = root["mode"]) {
        cfg.mode = mode_from_string(read<std::string>(m, "mode"));
    } else {
        config_error("mode", "missing (give it in the file or on the command line)");
    }
    if (const YAML::Node q = root["quantity"]) {
        cfg.quantity = quantity_from_string(read<std::string>(q, "quantity"));
    }

    parse_model(section(root, "model", true), cfg.model);

    const bool galerkin = needs_galerkin(cfg.mode);
    const bool mc = needs_mc(cfg.mode);
    const bool timed = cfg.effective_quantity() == Quantity::survival;

    if (const YAML::Node n = section(root, "chaos", galerkin)) {
        check_keys(n, "chaos", {"truncation", "p_max", "quad_nodes"});
        if (const YAML::Node t = n["truncation"]) {
            cfg.chaos.truncation = truncation_from_string(read<std::string>(t, "chaos.truncation"));
        }
        read_optional(n, "chaos", "p_max", cfg.chaos.p_max);
        read_optional(n, "chaos", "quad_nodes", cfg.chaos.quad_nodes);
    }
    if (const YAML::Node n = section(root, "fem", galerkin)) {
        check_keys(n, "fem", {"N"});
        cfg.fem.cells = read_required<std::size_t>(n, "fem", "N");
    }
    if (const YAML::Node n = root["solver"]) {
        check_keys(n, "solver", {"tol", "max_iter", "restart", "method"});
        read_optional(n, "solver", "tol", cfg.solver.tol);
        read_optional(n, "solver", "max_iter", cfg.solver.max_iter);
        read_optional(n, "solver", "restart", cfg.solver.restart);
        if (const YAML::Node m = n["method"]) {
            cfg.solver.method = solve_method_from_string(read<std::string>(m, "solver.method"));
        }
    }
    if (const YAML::Node n = section(root, "time", timed)) {
        check_keys(n, "time", {"T", "M", "theta"});
        cfg.time.horizon = read_required<double>(n, "time", "T");
        cfg.time.steps = read_required<std::size_t>(n, "time", "M");
        read_optional(n, "time", "theta", cfg.time.theta);
    }
    if (const YAML::Node n = section(root, "mc", mc)) {
        check_keys(n, "mc", {"N", "M", "dt", "seed", "max_steps", "boundary_shift", "keying", "estimator", "threads"});
        cfg.mc.n_outer = read_required<std::size_t>(n, "mc", "N");
        cfg.mc.m_inner = read_required<std::size_t>(n, "mc", "M");
        cfg.mc.euler.dt = read_required<double>(n, "mc", "dt");
        read_optional(n, "mc", "seed", cfg.mc.euler.seed);
        read_optional(n, "mc", "max_steps", cfg.mc.euler.max_steps);
        read_optional(n, "mc", "boundary_shift", cfg.mc.euler.boundary_shift);
        read_optional(n, "mc", "threads", cfg.mc.threads);
        if (const YAML::Node k = n["keying"]) {
            cfg.mc.euler.keying = path_keying_from_string(read<std::string>(k, "mc.keying"));
        }
        if (const YAML::Node e = n["estimator"]) {
            cfg.mc.estimator = mc_estimator_from_string(read<std::string>(e, "mc.estimator"));
        }
    }
    if (const YAML::Node n = root["output"]) {
        check_keys(n, "output", {"dir", "coeffs_csv", "mc_samples_csv"});
        read_optional(n, "output", "dir", cfg.output.dir);
        read_optional(n, "output", "coeffs_csv", cfg.output.coeffs_csv);
        read_optional(n, "output", "mc_samples_csv", cfg.output.mc_samples_csv);
    }

    const std::size_t m = 2;
    if (const YAML::Node n = root["sobol"]) {
        check_keys(n, "sobol", {"index_sets"});
        const auto sets = read<std::vector<std::vector<int>>>(n["index_sets"], "sobol.index_sets");
        for (const auto& s : sets) {
            try {
                cfg.index_sets.push_back(make_index_set(s, m));
            } catch (const Error& e) {
                config_error("sobol.index_sets", e.what());
            }
        }
    }
    if (cfg.index_sets.empty()) {
        for (std::size_t j = 1; j <= m; ++j) {
            cfg.index_sets.push_back(IndexSet{{static_cast<int>(j)}});
        }
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Mode> mode_override)
{
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::config, "config: cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), mode_override);
}

void validate(const RunConfig& cfg)
{
    if (!cfg.model.domain.contains_closed(cfg.x())) {
        config_error("model.x0", "evaluation point outside the closed domain");
    }
    if (needs_galerkin(cfg.mode)) {
        if (cfg.fem.cells < 2) {
            config_error("fem.N", "need at least 2 cells");
        }
        if (cfg.chaos.p_max < 0) {
            config_error("chaos.p_max", "must be non-negative");
        }
        if (cfg.chaos.resolved_quad_nodes() < cfg.chaos.p_max + 2) {
            config_error("chaos.quad_nodes", "must be at least p_max + 2");
        }
        if (!(cfg.solver.tol > 0.0)) {
            config_error("solver.tol", "must be positive");
        }
    }
    if (cfg.effective_quantity() == Quantity::survival) {
        if (!(cfg.time.horizon > 0.0)) {
            config_error("time.T", "must be positive");
        }
        if (cfg.time.steps < 1) {
            config_error("time.M", "must be at least 1");
        }
        if (cfg.time.theta < 0.0 || cfg.time.theta > 1.0) {
            config_error("time.theta", "must lie in [0, 1]");
        }
    }
    if (needs_mc(cfg.mode)) {
        if (cfg.mc.n_outer < 2) {
            config_error("mc.N", "must be at least 2");
        }
        if (cfg.mc.m_inner < 2) {
            config_error("mc.M", "must be at least 2");
        }
        if (!(cfg.mc.euler.dt > 0.0)) {
            config_error("mc.dt", "must be positive");
        }
        if (cfg.mc.estimator == McEstimator::debiased && cfg.mc.euler.keying != PathKeying::independent) {
            config_error("mc.estimator", "debiased needs keying: independent");
        }
        if (cfg.mc.euler.boundary_shift < 0.0) {
            config_error("mc.boundary_shift", "must be non-negative");
        }
    }
}

} // namespace fksobol
