#pragma once

#include "fksobol/chaos.hpp"
#include "fksobol/fem1d.hpp"
#include "fksobol/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fksobol {

/// Σ_k G_k ⊗ T_k acting on coefficient arrays V of shape
/// (spatial unknowns) x (chaos size) as Σ_k T_k V G_kᵀ. Never densified
/// except through `dense()` on small instances.
class BlockOperator {
public:
    struct Term {
        Eigen::MatrixXd chaos;
        TriDiag space;
    };

    BlockOperator(std::size_t n_space, std::size_t n_chaos);

    void add(Eigen::MatrixXd chaos, TriDiag space);

    [[nodiscard]] std::size_t n_space() const { return n_space_; }
    [[nodiscard]] std::size_t n_chaos() const { return n_chaos_; }
    [[nodiscard]] std::size_t dim() const { return n_space_ * n_chaos_; }
    [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }

    void apply(const Eigen::MatrixXd& v, Eigen::MatrixXd& y) const;
    /// Flattened column-major form: block q occupies [q·n_space, (q+1)·n_space).
    void apply(const Eigen::VectorXd& v, Eigen::VectorXd& y) const;

    /// a·this + b·other as a single operator (terms concatenated).
    [[nodiscard]] BlockOperator combined(double a, const BlockOperator& other, double b) const;

    /// Σ_k G_k[0][0] T_k: the mean-block approximation used as preconditioner.
    [[nodiscard]] TriDiag mean_block() const;

    /// Σ_k kron(G_k, T_k). Refuses dimensions above `dense_limit`.
    [[nodiscard]] Eigen::MatrixXd dense() const;

    static constexpr std::size_t dense_limit = 4000;

private:
    std::size_t n_space_;
    std::size_t n_chaos_;
    std::vector<Term> terms_;
};

enum class SolveMethod { krylov, dense };

std::string to_string(SolveMethod m);
SolveMethod solve_method_from_string(const std::string& s);

struct SolverConfig {
    double tol = 1e-10;
    std::size_t max_iter = 0; // 0: 10·(N-1)(P+1)
    std::size_t restart = 60;
    SolveMethod method = SolveMethod::krylov;
};

struct SolveDiagnostics {
    SolveMethod method = SolveMethod::krylov;
    std::size_t solves = 0;
    std::size_t iterations = 0;          // summed over solves
    double max_relative_residual = 0.0;  // worst over solves
    std::vector<double> residual_history; // last solve
};

enum class FieldKind { elliptic, parabolic };

/// U_j^q coefficients of Σ_j Σ_q U_j^q φ_j(x) ψ_q(z).
class ChaosFemField {
public:
    ChaosFemField(std::shared_ptr<const FemGrid> grid, std::shared_ptr<const ChaosBasis> basis,
                  Eigen::MatrixXd coeffs, FieldKind kind, double time = 0.0);

    [[nodiscard]] const FemGrid& grid() const { return *grid_; }
    [[nodiscard]] const ChaosBasis& basis() const { return *basis_; }
    [[nodiscard]] const Eigen::MatrixXd& coeffs() const { return coeffs_; }
    [[nodiscard]] FieldKind kind() const { return kind_; }
    [[nodiscard]] double time() const { return time_; }

private:
    std::shared_ptr<const FemGrid> grid_;
    std::shared_ptr<const ChaosBasis> basis_;
    Eigen::MatrixXd coeffs_;
    FieldKind kind_;
    double time_;
};

/// (U_0^N(x), ..., U_P^N(x)) with U_q^N(x) = Σ_j U_j^q φ_j(x).
Eigen::VectorXd chaos_coeffs_at(const ChaosFemField& field, double x);
double evaluate_field(const ChaosFemField& field, double x, ParamPoint z);

/// Metadata header lines starting with '#', then `j,q,value` rows.
void write_field_csv(const ChaosFemField& field, std::ostream& out);

struct EllipticSystem {
    BlockOperator op;
    Eigen::MatrixXd rhs;
    std::vector<std::string> warnings;
};

/// Σ ⊗ A + β ⊗ B (+ an offset-drift term when present) and the load with
/// block 0 = (h, ..., h). Needs a model with affine structure.
EllipticSystem assemble_elliptic(const SdeModel& model, const ChaosBasis& basis, const FemGrid& grid);
/// Same, plus a diagnostics warning when the OU coercivity bound fails.
EllipticSystem assemble_elliptic(const OuModel& model, const ChaosBasis& basis, const FemGrid& grid);

struct EllipticSolution {
    ChaosFemField field;
    SolveDiagnostics diagnostics;
};

EllipticSolution solve_elliptic(const EllipticSystem& system, std::shared_ptr<const FemGrid> grid,
                                std::shared_ptr<const ChaosBasis> basis, const SolverConfig& cfg);

struct ParabolicSystem {
    BlockOperator stiffness_op; // 𝐀
    BlockOperator mass_op;      // 𝓜 ⊗ M1
    Eigen::MatrixXd initial;    // 𝐟, block 0 = nodal values of f
    double diffusion_max = 0.0; // max of ã over the chaos quadrature, for the explicit-stability heuristic
    double mesh_size = 0.0;
};

ParabolicSystem assemble_parabolic(const SdeModel& model, const ChaosBasis& basis, const FemGrid& grid,
                                   const std::function<double(double)>& initial);

struct ThetaSchemeConfig {
    double theta = 0.5;
    std::size_t steps = 300;
    double horizon = 0.3;

    [[nodiscard]] double dt() const { return horizon / static_cast<double>(steps); }
};

/// (𝐌 + θΔt𝐀) V[m+1] = (𝐌 - (1-θ)Δt𝐀) V[m]; the left operator and its
/// preconditioner (or dense LU) are built once.
class ThetaStepper {
public:
    ThetaStepper(const ParabolicSystem& system, const ThetaSchemeConfig& time, const SolverConfig& solver);

    [[nodiscard]] Eigen::MatrixXd step(const Eigen::MatrixXd& v, std::size_t step_index);
    [[nodiscard]] const SolveDiagnostics& diagnostics() const { return diag_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

private:
    BlockOperator lhs_;
    BlockOperator rhs_;
    SolverConfig solver_;
    TriDiagLU precond_;
    Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu_;
    SolveDiagnostics diag_;
    std::vector<std::string> warnings_;
};

struct ParabolicSolution {
    ChaosFemField field;
    SolveDiagnostics diagnostics;
    std::vector<std::string> warnings;
};

/// Runs `time.steps` θ-steps from 𝐟 and returns V at the final time.
ParabolicSolution solve_parabolic(const ParabolicSystem& system, std::shared_ptr<const FemGrid> grid,
                                  std::shared_ptr<const ChaosBasis> basis, const ThetaSchemeConfig& time,
                                  const SolverConfig& solver);

} // namespace fksobol
