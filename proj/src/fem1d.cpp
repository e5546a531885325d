#include "fksobol/fem1d.hpp"

#include "fksobol/error.hpp"

#include <cmath>
#include <sstream>

namespace fksobol {

FemGrid::FemGrid(Interval domain, std::size_t cells) : domain_(domain), cells_(cells), h_(0.0)
{
    require(domain.lo < domain.hi, "FEM grid requires x_lo < x_hi");
    require(cells >= 2, "FEM grid requires N >= 2 cells");
    h_ = domain.length() / static_cast<double>(cells);
}

void TriDiag::apply(std::span<const double> x, std::span<double> y) const
{
    const std::size_t n = size();
    for (std::size_t r = 0; r < n; ++r) {
        double v = diag[r] * x[r];
        if (r > 0) {
            v += sub[r - 1] * x[r - 1];
        }
        if (r + 1 < n) {
            v += super[r] * x[r + 1];
        }
        y[r] = v;
    }
}

TriDiag TriDiag::transposed() const { return TriDiag{super, diag, sub}; }

TriDiag TriDiag::scaled(double s) const
{
    TriDiag out = *this;
    for (auto* v : {&out.sub, &out.diag, &out.super}) {
        for (double& e : *v) {
            e *= s;
        }
    }
    return out;
}

TriDiag TriDiag::plus(double s, const TriDiag& other) const
{
    require(other.size() == size(), "tridiagonal sizes differ");
    TriDiag out = *this;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        out.diag[i] += s * other.diag[i];
    }
    for (std::size_t i = 0; i < sub.size(); ++i) {
        out.sub[i] += s * other.sub[i];
        out.super[i] += s * other.super[i];
    }
    return out;
}

Eigen::MatrixXd TriDiag::dense() const
{
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        out(r, r) = diag[static_cast<std::size_t>(r)];
        if (r + 1 < n) {
            out(r, r + 1) = super[static_cast<std::size_t>(r)];
            out(r + 1, r) = sub[static_cast<std::size_t>(r)];
        }
    }
    return out;
}

TriDiagLU::TriDiagLU(const TriDiag& t) : lower_(t.sub.size()), diag_(t.diag), super_(t.super)
{
    const std::size_t n = t.size();
    require(n >= 1, "cannot factor an empty matrix");
    for (std::size_t r = 1; r < n; ++r) {
        if (diag_[r - 1] == 0.0) {
            fail(ErrorKind::solver_divergence, "zero pivot in tridiagonal factorization");
        }
        lower_[r - 1] = t.sub[r - 1] / diag_[r - 1];
        diag_[r] -= lower_[r - 1] * super_[r - 1];
    }
    if (diag_[n - 1] == 0.0) {
        fail(ErrorKind::solver_divergence, "zero pivot in tridiagonal factorization");
    }
}

void TriDiagLU::solve(std::span<double> rhs) const
{
    const std::size_t n = diag_.size();
    for (std::size_t r = 1; r < n; ++r) {
        rhs[r] -= lower_[r - 1] * rhs[r - 1];
    }
    rhs[n - 1] /= diag_[n - 1];
    for (std::size_t r = n - 1; r-- > 0;) {
        rhs[r] = (rhs[r] - super_[r] * rhs[r + 1]) / diag_[r];
    }
}

TriDiag stiffness(const FemGrid& grid)
{
    const std::size_t n = grid.interior();
    const double inv_h = 1.0 / grid.h();
    return TriDiag{std::vector<double>(n - 1, -inv_h), std::vector<double>(n, 2.0 * inv_h),
                   std::vector<double>(n - 1, -inv_h)};
}

TriDiag mass(const FemGrid& grid)
{
    const std::size_t n = grid.interior();
    const double h = grid.h();
    return TriDiag{std::vector<double>(n - 1, h / 6.0), std::vector<double>(n, 2.0 * h / 3.0),
                   std::vector<double>(n - 1, h / 6.0)};
}

TriDiag convection(const FemGrid& grid)
{
    // On the element [x_e, x_e + h] with local coordinate s in [0,1]:
    //   ∫ x φ_right' φ_left = x_e/2 + h/6,   ∫ x φ_left' φ_right = -(x_e/2 + h/3),
    //   ∫ x φ_left' φ_left  = -(x_e/2 + h/6), ∫ x φ_right' φ_right = x_e/2 + h/3.
    const std::size_t n = grid.interior();
    const double h = grid.h();
    TriDiag out{std::vector<double>(n - 1, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.0)};
    for (std::size_t e = 0; e < grid.cells(); ++e) {
        const double xe = grid.node(e);
        // Interior unknown r corresponds to node r + 1.
        const bool left_interior = e >= 1;
        const bool right_interior = e + 1 <= n;
        if (left_interior) {
            out.diag[e - 1] += -(xe / 2.0 + h / 6.0);
        }
        if (right_interior) {
            out.diag[e] += xe / 2.0 + h / 3.0;
        }
        if (left_interior && right_interior) {
            out.super[e - 1] += xe / 2.0 + h / 6.0;
            out.sub[e - 1] += -(xe / 2.0 + h / 3.0);
        }
    }
    return out;
}

TriDiag convection_constant(const FemGrid& grid)
{
    const std::size_t n = grid.interior();
    return TriDiag{std::vector<double>(n - 1, -0.5), std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.5)};
}

std::vector<double> load_constant(const FemGrid& grid, double c)
{
    return std::vector<double>(grid.interior(), c * grid.h());
}

double eval_fem(const FemGrid& grid, std::span<const double> coeffs, double x)
{
    require(coeffs.size() == grid.interior(), "FEM coefficient vector has the wrong length");
    if (!grid.domain().contains_closed(x)) {
        std::ostringstream msg;
        msg << "x = " << x << " lies outside the domain [" << grid.domain().lo << ", " << grid.domain().hi << "]";
        fail(ErrorKind::invalid_argument, msg.str());
    }
    const double s = (x - grid.domain().lo) / grid.h();
    auto cell = static_cast<std::size_t>(std::floor(s));
    if (cell >= grid.cells()) {
        cell = grid.cells() - 1;
    }
    const double frac = s - static_cast<double>(cell);
    const auto nodal = [&](std::size_t i) {
        return (i == 0 || i == grid.cells()) ? 0.0 : coeffs[i - 1];
    };
    return (1.0 - frac) * nodal(cell) + frac * nodal(cell + 1);
}

} // namespace fksobol
