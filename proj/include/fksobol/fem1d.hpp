#pragma once

#include "fksobol/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace fksobol {

/// Uniform P1 mesh on [x_lo, x_hi] with N cells. The unknowns live on the
/// N - 1 interior nodes; hat functions vanish at both endpoints.
class FemGrid {
public:
    FemGrid(Interval domain, std::size_t cells);

    [[nodiscard]] const Interval& domain() const { return domain_; }
    [[nodiscard]] std::size_t cells() const { return cells_; }
    [[nodiscard]] std::size_t interior() const { return cells_ - 1; }
    [[nodiscard]] double h() const { return h_; }
    /// Node x_i = x_lo + i h, i = 0..N.
    [[nodiscard]] double node(std::size_t i) const { return domain_.lo + static_cast<double>(i) * h_; }

private:
    Interval domain_;
    std::size_t cells_;
    double h_;
};

/// Tridiagonal (n x n) matrix: sub/super have n - 1 entries. Row r holds
/// sub[r-1], diag[r], super[r].
struct TriDiag {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> super;

    [[nodiscard]] std::size_t size() const { return diag.size(); }

    /// y = T x (overwrites y).
    void apply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] TriDiag transposed() const;
    [[nodiscard]] TriDiag scaled(double s) const;
    [[nodiscard]] Eigen::MatrixXd dense() const;

    /// this + s·other, same size required.
    [[nodiscard]] TriDiag plus(double s, const TriDiag& other) const;
};

/// LU factorization of a tridiagonal matrix without pivoting (Thomas
/// algorithm), reused across many right-hand sides.
class TriDiagLU {
public:
    TriDiagLU() = default;
    explicit TriDiagLU(const TriDiag& t);

    /// In-place solve T x = rhs.
    void solve(std::span<double> rhs) const;
    [[nodiscard]] std::size_t size() const { return diag_.size(); }

private:
    std::vector<double> lower_; // multipliers l_r, r = 1..n-1
    std::vector<double> diag_;  // pivots u_rr
    std::vector<double> super_; // u_{r,r+1}
};

/// A_ij = ∫ φ_j' φ_i' = (1/h) tridiag(-1, 2, -1).
TriDiag stiffness(const FemGrid& grid);
/// M_ij = ∫ φ_j φ_i = tridiag(h/6, 2h/3, h/6).
TriDiag mass(const FemGrid& grid);
/// B_ij = ∫ x φ_j'(x) φ_i(x) dx, assembled from exact element integrals.
TriDiag convection(const FemGrid& grid);
/// C_ij = ∫ φ_j' φ_i: zero diagonal, +1/2 above, -1/2 below.
TriDiag convection_constant(const FemGrid& grid);

/// (∫ c φ_i)_i = c·h per interior node.
std::vector<double> load_constant(const FemGrid& grid, double c);

/// Σ_j coeffs[j-1] φ_j(x) for x in the closed domain.
double eval_fem(const FemGrid& grid, std::span<const double> coeffs, double x);

} // namespace fksobol
