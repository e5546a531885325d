#pragma once

#include "fksobol/chaos.hpp"
#include "fksobol/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace fksobol {

enum class SobolMethod { parseval, pick_freeze };

std::string to_string(SobolMethod m);

/// One Sobol' index estimate with the quantities it was formed from.
/// Pick-freeze estimates are never clipped; `out_of_range` flags S ∉ [0,1].
struct SobolEntry {
    SobolMethod method = SobolMethod::parseval;
    IndexSet set;
    double estimate = 0.0;
    std::optional<double> std_error;
    double variance = 0.0;
    double numerator = 0.0;
    std::optional<std::size_t> n_outer;
    std::optional<std::size_t> n_inner;
    double x = 0.0;
    std::optional<double> t;
    bool out_of_range = false;
};

/// Variance floor: max(1e-14 · mean², 1e-300).
double degenerate_variance_floor(double mean);

/// S_I = Σ_{q∈K_I} c_q² / Σ_{q≥1} c_q² for chaos coefficients c at a point.
SobolEntry sobol_parseval(std::span<const double> coeffs, const ChaosBasis& basis, const IndexSet& set);
SobolEntry sobol_parseval(const Eigen::VectorXd& coeffs, const ChaosBasis& basis, const IndexSet& set);

/// Independent draws ξ^A, ξ^B (rows are samples). `frozen(I)` builds ξ^I,
/// which takes coordinate ℓ from ξ^B when ℓ ∈ I and from ξ^A otherwise.
struct PickFreezeDesign {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(b.rows()); }
    [[nodiscard]] Eigen::MatrixXd frozen(const IndexSet& set) const;
};

PickFreezeDesign pick_freeze_design(std::span<const UncertainParam> params, std::size_t n, std::uint64_t seed);
/// m independent U(0,1) coordinates.
PickFreezeDesign pick_freeze_design(std::size_t m, std::size_t n, std::uint64_t seed);

/// Symmetrized pick-freeze estimator on paired outputs Y_I = Y(ξ^I), Y_B = Y(ξ^B),
/// with a delta-method standard error. When the outputs are themselves noisy
/// averages driven by independent samples, `inner_noise` (an estimate of the
/// mean noise variance E[s²]/M) is subtracted from the denominator; the
/// numerator needs no correction because the noise in Y_I and Y_B is uncorrelated.
SobolEntry sobol_pick_freeze(std::span<const double> y_frozen, std::span<const double> y_base,
                             double inner_noise = 0.0);

} // namespace fksobol
