#pragma once

#include "fksobol/chaos.hpp"
#include "fksobol/model.hpp"
#include "fksobol/rng.hpp"
#include "fksobol/sobol.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fksobol {

/// How Brownian paths W^{(k)} are assigned to parameter evaluations.
///  - common: path k is the same for every ξ, so the inner mean Ē^M(ξ) is a
///    deterministic function of ξ (the M driving paths are sampled once).
///  - independent: every evaluation draws fresh paths.
enum class PathKeying { common, independent };

std::string to_string(PathKeying k);
PathKeying path_keying_from_string(const std::string& s);

/// Default exit-shift constant: declare exit within 0.5826·σ·√δt of ∂D.
inline constexpr double default_boundary_shift = 0.5826;

struct EulerConfig {
    double dt = 1e-3;
    std::uint64_t max_steps = 100'000'000;
    std::uint64_t seed = 0;
    double boundary_shift = default_boundary_shift;
    PathKeying keying = PathKeying::independent;
};

/// c = shift · σ · √δt.
double exit_shift(const EulerConfig& cfg, double sigma);

/// Euler walk X ← X + b(X,z)δt + σ(X,z)ΔW from the model's start point until
/// X leaves D or comes within the exit shift of ∂D. Returns steps·δt.
double simulate_exit_time(const SdeModel& model, ParamPoint z, const EulerConfig& cfg, StreamRng& rng);

/// Same walk up to round(t/δt) steps; f(X_t) if no exit occurred, else 0.
double simulate_survival(const SdeModel& model, ParamPoint z, double t_target, const std::function<double(double)>& f,
                         const EulerConfig& cfg, StreamRng& rng);

/// What a single path contributes: F̂_𝔘 (exit time) or F̂_𝔙 (killed functional).
struct Kernel {
    enum class Kind { exit_time, survival };

    Kind kind = Kind::exit_time;
    double t = 0.0;
    std::function<double(double)> f;

    static Kernel exit_time() { return Kernel{}; }
    static Kernel survival(double t, std::function<double(double)> f = [](double) { return 1.0; })
    {
        return Kernel{Kind::survival, t, std::move(f)};
    }
};

struct InnerStats {
    double mean = 0.0;
    double variance = 0.0; // unbiased sample variance of the M path values
};

/// Ē^M[F̂](z) = (1/M) Σ_k F̂(W^{(k)}, z). Path k uses the stream keyed by
/// (seed, k) under common keying, or (seed, evaluation_id, k) otherwise.
/// Throws TruncationError carrying the number of truncated paths.
double inner_average(const SdeModel& model, ParamPoint z, std::size_t m_inner, const Kernel& kernel,
                     const EulerConfig& cfg, std::uint64_t evaluation_id);
InnerStats inner_stats(const SdeModel& model, ParamPoint z, std::size_t m_inner, const Kernel& kernel,
                       const EulerConfig& cfg, std::uint64_t evaluation_id);

/// plain: the pick-freeze formula on the inner averages as they are.
/// debiased: also subtracts the estimated inner noise E[s²]/M from the
/// denominator. Needs independent keying, so that the noise in Y_I and Y_B
/// is uncorrelated.
enum class McEstimator { plain, debiased };

std::string to_string(McEstimator e);
McEstimator mc_estimator_from_string(const std::string& s);

struct McSobolResult {
    std::vector<SobolEntry> entries;
    std::vector<double> y_base;               // Y(ξ^{B,(l)})
    std::vector<std::vector<double>> y_frozen; // per index set, Y(ξ^{I,(l)})
    std::vector<double> inner_noise;           // per index set, mean s²/M over Y_B and Y_I
    std::size_t path_evaluations = 0;          // M·N·(#sets + 1)
};

/// Double-loop estimator: inner averages at ξ^B and every ξ^I, then the
/// pick-freeze formula per index set. Parallel over outer evaluations with
/// results independent of `threads` (0 = hardware concurrency).
McSobolResult double_mc_sobol(const SdeModel& model, const std::vector<IndexSet>& sets, std::size_t n_outer,
                              std::size_t m_inner, const Kernel& kernel, const EulerConfig& cfg,
                              unsigned threads = 0, McEstimator estimator = McEstimator::debiased);

} // namespace fksobol
