#pragma once

#include "fksobol/chaos.hpp"
#include "fksobol/galerkin.hpp"
#include "fksobol/model.hpp"
#include "fksobol/montecarlo.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fksobol {

enum class Mode { elliptic, parabolic, mc_exit, mc_survival, compare };
enum class Quantity { exit_time, survival };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

struct ChaosSection {
    Truncation truncation = Truncation::total_degree;
    int p_max = 10;
    int quad_nodes = 0; // 0: p_max + 4

    [[nodiscard]] int resolved_quad_nodes() const { return quad_nodes > 0 ? quad_nodes : p_max + 4; }
};

struct FemSection {
    std::size_t cells = 1000;
};

struct McSection {
    std::size_t n_outer = 0;
    std::size_t m_inner = 0;
    EulerConfig euler;
    McEstimator estimator = McEstimator::debiased;
    unsigned threads = 0;
};

struct OutputSection {
    std::string dir = "out";
    bool coeffs_csv = true;
    bool mc_samples_csv = false;
};

/// Everything one batch run needs. Sections that a mode does not use are
/// still carried (with defaults) so the echoed config is complete.
struct RunConfig {
    Mode mode = Mode::elliptic;
    Quantity quantity = Quantity::exit_time;
    OuModel model;
    ChaosSection chaos;
    FemSection fem;
    SolverConfig solver;
    ThetaSchemeConfig time;
    McSection mc;
    OutputSection output;
    std::vector<IndexSet> index_sets;

    [[nodiscard]] double x() const { return model.x0; }
    /// Quantity actually computed by the mode (compare uses `quantity`).
    [[nodiscard]] Quantity effective_quantity() const;
};

/// Parses YAML (JSON is accepted too). Errors name the offending key path
/// and carry ErrorKind::config. `mode_override` replaces the `mode` key.
RunConfig parse_config(const std::string& text, std::optional<Mode> mode_override = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<Mode> mode_override = std::nullopt);

/// Checks mode-specific requirements (x in the domain, t in (0, T], ...).
void validate(const RunConfig& cfg);

} // namespace fksobol
