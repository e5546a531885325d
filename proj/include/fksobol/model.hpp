#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fksobol {

using ParamPoint = std::span<const double>;

/// Coefficient of the SDE, evaluated at state x and parameter realization z.
using Coefficient = std::function<double(double x, ParamPoint z)>;
using ParamFunction = std::function<double(ParamPoint z)>;

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

using Distribution = std::variant<Uniform>;

struct UncertainParam {
    std::string name;
    Distribution distribution;
    std::size_t index = 0;
};

/// Maps a U(0,1) variate through the inverse CDF of the parameter's law.
double sample_param(const UncertainParam& param, double u01);

/// Maps a point of the parameter support onto [0,1], the reference
/// coordinate the chaos basis is built on.
double to_reference(const UncertainParam& param, double z);
double from_reference(const UncertainParam& param, double t);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    [[nodiscard]] double length() const { return hi - lo; }
    [[nodiscard]] bool contains(double x) const { return x > lo && x < hi; }
    [[nodiscard]] bool contains_closed(double x) const { return x >= lo && x <= hi; }
    [[nodiscard]] double distance_to_boundary(double x) const;
};

/// Drift b(x,z) = offset(z) + slope(z)·x with diffusion σ(z) independent of
/// the state. Models carrying this structure get exact Kronecker assembly in
/// the Galerkin route and the inlined Euler loop in the Monte Carlo route.
struct AffineStructure {
    ParamFunction drift_offset;
    ParamFunction drift_slope;
    ParamFunction diffusion;
};

/// Scalar SDE dX = b(X,ξ)dt + σ(X,ξ)dW on an open interval, with independent
/// uncertain parameters ξ. Immutable after construction.
class SdeModel {
public:
    SdeModel(std::string name, Coefficient drift, Coefficient diffusion,
             std::vector<UncertainParam> params, Interval domain, double start,
             std::optional<AffineStructure> affine = std::nullopt);

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] std::size_t dimension() const { return 1; }
    [[nodiscard]] double drift(double x, ParamPoint z) const { return drift_(x, z); }
    [[nodiscard]] double diffusion(double x, ParamPoint z) const { return diffusion_(x, z); }
    [[nodiscard]] const std::vector<UncertainParam>& params() const { return params_; }
    [[nodiscard]] std::size_t num_params() const { return params_.size(); }
    [[nodiscard]] const Interval& domain() const { return domain_; }
    [[nodiscard]] double start() const { return start_; }
    [[nodiscard]] const std::optional<AffineStructure>& affine() const { return affine_; }

private:
    std::string name_;
    Coefficient drift_;
    Coefficient diffusion_;
    std::vector<UncertainParam> params_;
    Interval domain_;
    double start_;
    std::optional<AffineStructure> affine_;
};

/// Ornstein-Uhlenbeck reference model dX = -α(ξ)X dt + σ(ξ)dW with
/// α(ξ) = μ1 + √3σ1(2ξ1 − 1), σ(ξ) = μ2 + √3σ2(2ξ2 − 1), ξ ~ U([0,1]²).
struct OuModel {
    double mu1 = 1.0;
    double sigma1 = 0.2;
    double mu2 = 9.0;
    double sigma2 = 0.2;
    double x0 = 5.0;
    Interval domain{0.0, 10.0};

    /// Throws unless α ≥ 0 and σ > 0 on the whole parameter support.
    void validate() const;

    [[nodiscard]] double alpha(ParamPoint z) const;
    [[nodiscard]] double sigma(ParamPoint z) const;
    [[nodiscard]] double alpha_max() const;
    [[nodiscard]] double sigma_min() const;

    [[nodiscard]] SdeModel to_sde() const;
};

/// Poincaré-type constant C(d,|D|) = sqrt(1 + (d·Γ(d/2)/(2π^{d/2})·|D|)^{1/d}).
double poincare_constant(int d, double volume);

struct CoercivityCheck {
    bool satisfied = false;
    double lhs = 0.0; // sup |b̃| over the domain and the parameter support
    double rhs = 0.0; // λ̃ / sqrt(2·C(1,|D|))
};

CoercivityCheck check_coercivity_ou(const OuModel& model);

/// Divergence-form coefficients: -∂(ã ∂u) + b̃ ∂u = f̃.
struct DivergenceCoeffs {
    Coefficient a_tilde;
    Coefficient b_tilde;
    Coefficient f_tilde;
};

DivergenceCoeffs divergence_coeffs(const SdeModel& model);

} // namespace fksobol
