#include "fksobol/model.hpp"

#include "fksobol/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fksobol {

namespace {

const double sqrt3 = std::sqrt(3.0);

const Uniform& as_uniform(const UncertainParam& param) { return std::get<Uniform>(param.distribution); }

// Lattice over [domain] x support(params) with `k` points per axis, endpoints
// included. Used to witness positivity of the diffusion coefficient.
template <typename Visit>
void visit_lattice(const SdeModel& model, std::size_t k, Visit&& visit)
{
    const std::size_t m = model.num_params();
    std::vector<std::size_t> counter(m + 1, 0);
    std::vector<double> z(m);
    const auto at = [k](double lo, double hi, std::size_t i) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    };
    while (true) {
        const double x = at(model.domain().lo, model.domain().hi, counter[0]);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& u = as_uniform(model.params()[j]);
            z[j] = at(u.lo, u.hi, counter[j + 1]);
        }
        visit(x, ParamPoint(z));
        std::size_t axis = 0;
        while (axis <= m && ++counter[axis] == k) {
            counter[axis++] = 0;
        }
        if (axis > m) {
            break;
        }
    }
}

} // namespace

double sample_param(const UncertainParam& param, double u01)
{
    const auto& u = as_uniform(param);
    return u.lo + (u.hi - u.lo) * u01;
}

double to_reference(const UncertainParam& param, double z)
{
    const auto& u = as_uniform(param);
    return (z - u.lo) / (u.hi - u.lo);
}

double from_reference(const UncertainParam& param, double t) { return sample_param(param, t); }

double Interval::distance_to_boundary(double x) const { return std::min(x - lo, hi - x); }

SdeModel::SdeModel(std::string name, Coefficient drift, Coefficient diffusion,
                   std::vector<UncertainParam> params, Interval domain, double start,
                   std::optional<AffineStructure> affine)
    : name_(std::move(name)),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      params_(std::move(params)),
      domain_(domain),
      start_(start),
      affine_(std::move(affine))
{
    require(static_cast<bool>(drift_) && static_cast<bool>(diffusion_), "model coefficients must be callable");
    require(domain_.lo < domain_.hi, "model domain requires x_lo < x_hi");
    require(domain_.contains_closed(start_), "starting point lies outside the closed domain");
    for (std::size_t j = 0; j < params_.size(); ++j) {
        const auto& u = as_uniform(params_[j]);
        require(u.lo < u.hi, "uniform parameter '" + params_[j].name + "' requires lo < hi");
        require(params_[j].index == j, "parameter indices must follow declaration order");
    }
}

void OuModel::validate() const
{
    require(sigma1 >= 0.0 && sigma2 >= 0.0, "OU model requires sigma1, sigma2 >= 0");
    require(mu1 >= sqrt3 * sigma1, "OU model requires mu1 >= sqrt(3)*sigma1 (alpha >= 0)");
    require(mu2 > sqrt3 * sigma2, "OU model requires mu2 > sqrt(3)*sigma2 (sigma > 0)");
    require(domain.lo < domain.hi, "OU model domain requires x_lo < x_hi");
    require(domain.contains_closed(x0), "OU starting point x0 lies outside the domain");
}

double OuModel::alpha(ParamPoint z) const { return mu1 + sqrt3 * sigma1 * (2.0 * z[0] - 1.0); }

double OuModel::sigma(ParamPoint z) const { return mu2 + sqrt3 * sigma2 * (2.0 * z[1] - 1.0); }

double OuModel::alpha_max() const { return mu1 + sqrt3 * sigma1; }

double OuModel::sigma_min() const { return mu2 - sqrt3 * sigma2; }

SdeModel OuModel::to_sde() const
{
    validate();
    const OuModel self = *this;
    std::vector<UncertainParam> params{
        {"xi1", Uniform{0.0, 1.0}, 0},
        {"xi2", Uniform{0.0, 1.0}, 1},
    };
    AffineStructure affine{
        [](ParamPoint) { return 0.0; },
        [self](ParamPoint z) { return -self.alpha(z); },
        [self](ParamPoint z) { return self.sigma(z); },
    };
    return SdeModel(
        "ou",
        [self](double x, ParamPoint z) { return -self.alpha(z) * x; },
        [self](double, ParamPoint z) { return self.sigma(z); },
        std::move(params), domain, x0, std::move(affine));
}

double poincare_constant(int d, double volume)
{
    require(d >= 1, "poincare_constant requires d >= 1");
    require(volume >= 0.0, "poincare_constant requires a non-negative volume");
    const double dd = static_cast<double>(d);
    const double unit = dd * std::tgamma(dd / 2.0) / (2.0 * std::pow(std::numbers::pi, dd / 2.0));
    return std::sqrt(1.0 + std::pow(unit * volume, 1.0 / dd));
}

CoercivityCheck check_coercivity_ou(const OuModel& model)
{
    model.validate();
    const double x_sup = std::max(std::abs(model.domain.lo), std::abs(model.domain.hi));
    const double lambda = model.sigma_min() * model.sigma_min() / 2.0;
    CoercivityCheck out;
    out.lhs = x_sup * model.alpha_max();
    out.rhs = lambda / std::sqrt(2.0 * poincare_constant(1, model.domain.length()));
    out.satisfied = out.lhs < out.rhs;
    return out;
}

DivergenceCoeffs divergence_coeffs(const SdeModel& model)
{
    std::size_t per_axis = 2;
    while (std::pow(static_cast<double>(per_axis + 1), static_cast<double>(model.num_params() + 1)) <= 20000.0
           && per_axis < 21) {
        ++per_axis;
    }
    visit_lattice(model, per_axis, [&](double x, ParamPoint z) {
        const double s = model.diffusion(x, z);
        if (!(s > 0.0)) {
            std::ostringstream msg;
            msg << "diffusion coefficient is not positive (sigma = " << s << " at x = " << x << ")";
            fail(ErrorKind::unsupported_model, msg.str());
        }
    });

    const Interval dom = model.domain();
    auto a_tilde = [model](double x, ParamPoint z) {
        const double s = model.diffusion(x, z);
        return 0.5 * s * s;
    };
    auto b_tilde = [model, dom, a_tilde](double x, ParamPoint z) {
        // Central difference of ã, one-sided within a step of the boundary.
        const double step = 1e-5 * std::max(1.0, std::abs(x));
        const double lo = std::max(dom.lo, x - step);
        const double hi = std::min(dom.hi, x + step);
        const double da = (a_tilde(hi, z) - a_tilde(lo, z)) / (hi - lo);
        return da - model.drift(x, z);
    };
    return DivergenceCoeffs{a_tilde, b_tilde, [](double, ParamPoint) { return 1.0; }};
}

} // namespace fksobol
