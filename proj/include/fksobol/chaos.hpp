#pragma once

#include "fksobol/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fksobol {

enum class Truncation { total_degree, tensor };

std::string to_string(Truncation t);
Truncation truncation_from_string(const std::string& s);

/// Per-dimension polynomial degrees (q_1, ..., q_m).
struct MultiIndex {
    std::vector<int> degrees;

    [[nodiscard]] int total() const;
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// A non-empty subset of parameter coordinates, 1-based as in {1, ..., m}.
struct IndexSet {
    std::vector<int> coords;

    [[nodiscard]] bool contains(std::size_t zero_based) const;
    [[nodiscard]] std::string label() const;
    friend bool operator==(const IndexSet&, const IndexSet&) = default;
};

/// Validates against m parameters, sorts and removes duplicates.
IndexSet make_index_set(std::vector<int> coords, std::size_t m);

/// Three-term recurrence of the monic orthogonal polynomials,
/// π_{k+1}(t) = (t - a_k) π_k(t) - b_k π_{k-1}(t), with b_0 = total mass.
struct Recurrence {
    std::vector<double> a;
    std::vector<double> b;
};

/// Recurrence for U(0,1) generated from its moments 1/(k+1) by the Chebyshev
/// algorithm in exact rational arithmetic, then rounded.
Recurrence uniform_recurrence(std::size_t n);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss rule from the first n recurrence coefficients (Golub-Welsch
/// eigenproblem, nodes Newton-polished, weights from the Christoffel function).
GaussRule gauss_rule(const Recurrence& rec, std::size_t n);

/// Orthonormal values p_0(t), ..., p_degree(t).
void orthonormal_values(const Recurrence& rec, double t, std::span<double> out);

/// Truncated tensorized orthonormal polynomial basis {ψ_q} on the parameter
/// space, in graded lexicographic order (index 0 is the constant ψ_0 ≡ 1),
/// together with the tensor Gauss rule used for expectations.
class ChaosBasis {
public:
    ChaosBasis(std::vector<UncertainParam> params, Truncation truncation, int p_max, int quad_nodes,
               int coeff_degree = 2);

    [[nodiscard]] std::size_t size() const { return indices_.size(); }
    [[nodiscard]] std::size_t num_params() const { return params_.size(); }
    [[nodiscard]] Truncation truncation() const { return truncation_; }
    [[nodiscard]] int p_max() const { return p_max_; }
    [[nodiscard]] int quad_nodes() const { return quad_nodes_; }
    [[nodiscard]] const std::vector<UncertainParam>& params() const { return params_; }
    [[nodiscard]] const MultiIndex& multi_index(std::size_t q) const { return indices_.at(q); }
    [[nodiscard]] const std::vector<MultiIndex>& multi_indices() const { return indices_; }
    [[nodiscard]] std::size_t index_of(const MultiIndex& mi) const;

    [[nodiscard]] double eval(std::size_t q, ParamPoint z) const;
    [[nodiscard]] Eigen::VectorXd eval_all(ParamPoint z) const;

    /// Tensor quadrature: points (row-major, num_points x m) in parameter
    /// coordinates, their weights, and ψ_q at every point (size x num_points).
    [[nodiscard]] const Eigen::MatrixXd& quad_points() const { return quad_points_; }
    [[nodiscard]] const Eigen::VectorXd& quad_weights() const { return quad_weights_; }
    [[nodiscard]] const Eigen::MatrixXd& quad_values() const { return quad_values_; }

    [[nodiscard]] const Recurrence& recurrence() const { return rec_; }

private:
    std::vector<UncertainParam> params_;
    Truncation truncation_;
    int p_max_;
    int quad_nodes_;
    Recurrence rec_;
    std::vector<MultiIndex> indices_;
    Eigen::MatrixXd quad_points_;
    Eigen::VectorXd quad_weights_;
    Eigen::MatrixXd quad_values_;
};

/// Basis over m independent U(0,1) parameters.
ChaosBasis build_basis(std::size_t m, Truncation truncation, int p_max, int quad_nodes);

/// M[p][q] = E[g(ξ) ψ_p(ξ) ψ_q(ξ)] by tensor Gauss quadrature, symmetrized.
Eigen::MatrixXd expectation_matrix(const ChaosBasis& basis, const ParamFunction& g);

/// K_I: positions q >= 1 whose multi-index has zero degree outside I.
std::vector<std::size_t> index_set_K(const ChaosBasis& basis, const IndexSet& set);

/// Positions q >= 1 with nonzero degree both inside and outside I.
std::vector<std::size_t> index_set_mixed(const ChaosBasis& basis, const IndexSet& set);

} // namespace fksobol
