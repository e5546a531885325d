#include "fksobol/sobol.hpp"

#include "fksobol/error.hpp"
#include "fksobol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace fksobol {

namespace {

constexpr std::uint64_t design_tag = 0x5049434b46525a45ULL;

} // namespace

std::string to_string(SobolMethod m) { return m == SobolMethod::pick_freeze ? "pick_freeze" : "parseval"; }

double degenerate_variance_floor(double mean) { return std::max(1e-14 * mean * mean, 1e-300); }

SobolEntry sobol_parseval(std::span<const double> coeffs, const ChaosBasis& basis, const IndexSet& set)
{
    require(coeffs.size() == basis.size(), "coefficient vector length differs from the basis size");
    double total = 0.0;
    for (std::size_t q = 1; q < coeffs.size(); ++q) {
        total += coeffs[q] * coeffs[q];
    }
    if (!(total > degenerate_variance_floor(coeffs[0]))) {
        std::ostringstream msg;
        msg << "degenerate variance: chaos variance " << total << " below floor "
            << degenerate_variance_floor(coeffs[0]);
        fail(ErrorKind::degenerate_variance, msg.str());
    }
    double part = 0.0;
    for (std::size_t q : index_set_K(basis, set)) {
        part += coeffs[q] * coeffs[q];
    }
    SobolEntry e;
    e.method = SobolMethod::parseval;
    e.set = set;
    e.estimate = part / total;
    e.variance = total;
    e.numerator = part;
    e.out_of_range = e.estimate < 0.0 || e.estimate > 1.0;
    return e;
}

SobolEntry sobol_parseval(const Eigen::VectorXd& coeffs, const ChaosBasis& basis, const IndexSet& set)
{
    return sobol_parseval(std::span<const double>(coeffs.data(), static_cast<std::size_t>(coeffs.size())), basis,
                          set);
}

Eigen::MatrixXd PickFreezeDesign::frozen(const IndexSet& set) const
{
    require(!set.coords.empty(), "pick-freeze needs a non-empty index set");
    Eigen::MatrixXd out = a;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (set.contains(static_cast<std::size_t>(j))) {
            out.col(j) = b.col(j);
        }
    }
    return out;
}

PickFreezeDesign pick_freeze_design(std::span<const UncertainParam> params, std::size_t n, std::uint64_t seed)
{
    require(n >= 2, "pick-freeze design needs N >= 2");
    require(!params.empty(), "pick-freeze design needs at least one parameter");
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(params.size());
    PickFreezeDesign d{Eigen::MatrixXd(rows, cols), Eigen::MatrixXd(rows, cols)};
    for (Eigen::Index l = 0; l < rows; ++l) {
        StreamRng ra(seed, design_tag, static_cast<std::uint64_t>(l), 0);
        StreamRng rb(seed, design_tag, static_cast<std::uint64_t>(l), 1);
        for (Eigen::Index j = 0; j < cols; ++j) {
            d.a(l, j) = sample_param(params[static_cast<std::size_t>(j)], ra.uniform01());
            d.b(l, j) = sample_param(params[static_cast<std::size_t>(j)], rb.uniform01());
        }
    }
    return d;
}

PickFreezeDesign pick_freeze_design(std::size_t m, std::size_t n, std::uint64_t seed)
{
    std::vector<UncertainParam> params;
    for (std::size_t j = 0; j < m; ++j) {
        params.push_back({"xi" + std::to_string(j + 1), Uniform{0.0, 1.0}, j});
    }
    return pick_freeze_design(params, n, seed);
}

SobolEntry sobol_pick_freeze(std::span<const double> y_frozen, std::span<const double> y_base, double inner_noise)
{
    require(inner_noise >= 0.0, "inner noise variance must be non-negative");
    require(y_frozen.size() == y_base.size(), "pick-freeze output vectors differ in length");
    require(y_base.size() >= 2, "pick-freeze needs N >= 2");
    const std::size_t n = y_base.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    double cross = 0.0;
    double square = 0.0;
    double centre = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        cross += y_frozen[l] * y_base[l];
        square += 0.5 * (y_frozen[l] * y_frozen[l] + y_base[l] * y_base[l]);
        centre += 0.5 * (y_frozen[l] + y_base[l]);
    }
    cross *= inv_n;
    square *= inv_n;
    centre *= inv_n;

    const double num = cross - centre * centre;
    const double den = square - centre * centre - inner_noise;
    if (!(den > degenerate_variance_floor(centre))) {
        std::ostringstream msg;
        msg << "degenerate variance: pick-freeze denominator " << den << " is not positive";
        fail(ErrorKind::degenerate_variance, msg.str());
    }
    const double s = num / den;

    // Delta method on the three sample means (cross, square, centre).
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double u = y_frozen[l] * y_base[l] - cross;
        const double v = 0.5 * (y_frozen[l] * y_frozen[l] + y_base[l] * y_base[l]) - square;
        const double w = 0.5 * (y_frozen[l] + y_base[l]) - centre;
        const double infl = (u - s * v - 2.0 * centre * (1.0 - s) * w) / den;
        acc += infl * infl;
    }
    SobolEntry e;
    e.method = SobolMethod::pick_freeze;
    e.estimate = s;
    e.std_error = std::sqrt(acc / (static_cast<double>(n) * static_cast<double>(n - 1)));
    e.variance = den;
    e.numerator = num;
    e.n_outer = n;
    e.out_of_range = s < 0.0 || s > 1.0;
    return e;
}

} // namespace fksobol
