#include "fksobol/galerkin.hpp"

#include "fksobol/error.hpp"
#include "fksobol/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace fksobol {

namespace {

const AffineStructure& require_affine(const SdeModel& model)
{
    if (!model.affine()) {
        fail(ErrorKind::unsupported_model,
             "the Galerkin route needs a state-affine drift and state-constant diffusion (model '" + model.name()
                 + "')");
    }
    return *model.affine();
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const Eigen::VectorXd& v, std::size_t rows, std::size_t cols)
{
    return {v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

void apply_columnwise(const TriDiagLU& lu, const Eigen::VectorXd& in, Eigen::VectorXd& out)
{
    out = in;
    const std::size_t n = lu.size();
    for (std::size_t off = 0; off < static_cast<std::size_t>(out.size()); off += n) {
        lu.solve(std::span<double>(out.data() + off, n));
    }
}

std::size_t resolve_max_iter(const SolverConfig& cfg, std::size_t dim)
{
    return cfg.max_iter == 0 ? 10 * dim : cfg.max_iter;
}

[[noreturn]] void throw_divergence(const std::string& where, const KrylovResult& res)
{
    std::ostringstream msg;
    msg << where << ": GMRES did not reach the tolerance after " << res.iterations
        << " iterations (relative residual " << res.relative_residual << ")";
    throw SolverError(msg.str(), res.history);
}

} // namespace

BlockOperator::BlockOperator(std::size_t n_space, std::size_t n_chaos) : n_space_(n_space), n_chaos_(n_chaos)
{
    require(n_space >= 1 && n_chaos >= 1, "block operator needs positive sizes");
}

void BlockOperator::add(Eigen::MatrixXd chaos, TriDiag space)
{
    require(static_cast<std::size_t>(chaos.rows()) == n_chaos_ && static_cast<std::size_t>(chaos.cols()) == n_chaos_,
            "chaos factor has the wrong size");
    require(space.size() == n_space_, "spatial factor has the wrong size");
    terms_.push_back(Term{std::move(chaos), std::move(space)});
}

void BlockOperator::apply(const Eigen::MatrixXd& v, Eigen::MatrixXd& y) const
{
    const auto rows = static_cast<Eigen::Index>(n_space_);
    const auto cols = static_cast<Eigen::Index>(n_chaos_);
    y.setZero(rows, cols);
    Eigen::MatrixXd tv(rows, cols);
    for (const auto& term : terms_) {
        for (Eigen::Index q = 0; q < cols; ++q) {
            term.space.apply(std::span<const double>(v.col(q).data(), n_space_),
                             std::span<double>(tv.col(q).data(), n_space_));
        }
        y.noalias() += tv * term.chaos.transpose();
    }
}

void BlockOperator::apply(const Eigen::VectorXd& v, Eigen::VectorXd& y) const
{
    Eigen::MatrixXd out;
    apply(Eigen::MatrixXd(as_matrix(v, n_space_, n_chaos_)), out);
    y = Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
}

BlockOperator BlockOperator::combined(double a, const BlockOperator& other, double b) const
{
    require(other.n_space_ == n_space_ && other.n_chaos_ == n_chaos_, "block operators differ in shape");
    BlockOperator out(n_space_, n_chaos_);
    for (const auto& t : terms_) {
        out.add(a * t.chaos, t.space);
    }
    for (const auto& t : other.terms_) {
        out.add(b * t.chaos, t.space);
    }
    return out;
}

TriDiag BlockOperator::mean_block() const
{
    TriDiag out{std::vector<double>(n_space_ - 1, 0.0), std::vector<double>(n_space_, 0.0),
                std::vector<double>(n_space_ - 1, 0.0)};
    for (const auto& t : terms_) {
        out = out.plus(t.chaos(0, 0), t.space);
    }
    return out;
}

Eigen::MatrixXd BlockOperator::dense() const
{
    if (dim() > dense_limit) {
        fail(ErrorKind::invalid_argument,
             "refusing to densify a block operator of dimension " + std::to_string(dim()));
    }
    const auto ns = static_cast<Eigen::Index>(n_space_);
    const auto nc = static_cast<Eigen::Index>(n_chaos_);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ns * nc, ns * nc);
    for (const auto& t : terms_) {
        const Eigen::MatrixXd s = t.space.dense();
        for (Eigen::Index p = 0; p < nc; ++p) {
            for (Eigen::Index q = 0; q < nc; ++q) {
                out.block(p * ns, q * ns, ns, ns) += t.chaos(p, q) * s;
            }
        }
    }
    return out;
}

std::string to_string(SolveMethod m) { return m == SolveMethod::dense ? "dense" : "krylov"; }

SolveMethod solve_method_from_string(const std::string& s)
{
    if (s == "krylov") {
        return SolveMethod::krylov;
    }
    if (s == "dense") {
        return SolveMethod::dense;
    }
    fail(ErrorKind::config, "unknown solver method '" + s + "' (expected \"krylov\" or \"dense\")");
}

ChaosFemField::ChaosFemField(std::shared_ptr<const FemGrid> grid, std::shared_ptr<const ChaosBasis> basis,
                             Eigen::MatrixXd coeffs, FieldKind kind, double time)
    : grid_(std::move(grid)), basis_(std::move(basis)), coeffs_(std::move(coeffs)), kind_(kind), time_(time)
{
    require(grid_ && basis_, "field needs a grid and a basis");
    require(static_cast<std::size_t>(coeffs_.rows()) == grid_->interior()
                && static_cast<std::size_t>(coeffs_.cols()) == basis_->size(),
            "field coefficient array has the wrong shape");
}

Eigen::VectorXd chaos_coeffs_at(const ChaosFemField& field, double x)
{
    const std::size_t nc = field.basis().size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(nc));
    for (std::size_t q = 0; q < nc; ++q) {
        const auto col = field.coeffs().col(static_cast<Eigen::Index>(q));
        out(static_cast<Eigen::Index>(q)) =
            eval_fem(field.grid(), std::span<const double>(col.data(), field.grid().interior()), x);
    }
    return out;
}

double evaluate_field(const ChaosFemField& field, double x, ParamPoint z)
{
    return chaos_coeffs_at(field, x).dot(field.basis().eval_all(z));
}

void write_field_csv(const ChaosFemField& field, std::ostream& out)
{
    const auto& g = field.grid();
    const auto& b = field.basis();
    out.precision(17);
    out << "# kind: " << (field.kind() == FieldKind::elliptic ? "elliptic" : "parabolic") << '\n';
    out << "# time: " << field.time() << '\n';
    out << "# grid: x_lo=" << g.domain().lo << " x_hi=" << g.domain().hi << " N=" << g.cells() << '\n';
    out << "# basis: m=" << b.num_params() << " truncation=" << to_string(b.truncation()) << " p_max=" << b.p_max()
        << " size=" << b.size() << " ordering=graded-lex\n";
    for (std::size_t q = 0; q < b.size(); ++q) {
        out << "# q=" << q << " degrees=(";
        const auto& d = b.multi_index(q).degrees;
        for (std::size_t j = 0; j < d.size(); ++j) {
            out << (j ? "," : "") << d[j];
        }
        out << ")\n";
    }
    out << "j,q,value\n";
    for (Eigen::Index q = 0; q < field.coeffs().cols(); ++q) {
        for (Eigen::Index j = 0; j < field.coeffs().rows(); ++j) {
            out << j + 1 << ',' << q << ',' << field.coeffs()(j, q) << '\n';
        }
    }
}

namespace {

// 𝐀 = E[ã ψψ] ⊗ A + E[-slope ψψ] ⊗ B + E[-offset ψψ] ⊗ C, zero factors dropped.
BlockOperator assemble_operator(const SdeModel& model, const ChaosBasis& basis, const FemGrid& grid)
{
    const AffineStructure& aff = require_affine(model);
    require(basis.num_params() == model.num_params(), "basis and model disagree on the number of parameters");
    BlockOperator op(grid.interior(), basis.size());
    op.add(expectation_matrix(basis, [&](ParamPoint z) {
               const double s = aff.diffusion(z);
               return 0.5 * s * s;
           }),
           stiffness(grid));
    Eigen::MatrixXd slope = expectation_matrix(basis, [&](ParamPoint z) { return -aff.drift_slope(z); });
    if (slope.cwiseAbs().maxCoeff() > 0.0) {
        op.add(std::move(slope), convection(grid));
    }
    Eigen::MatrixXd offset = expectation_matrix(basis, [&](ParamPoint z) { return -aff.drift_offset(z); });
    if (offset.cwiseAbs().maxCoeff() > 0.0) {
        op.add(std::move(offset), convection_constant(grid));
    }
    return op;
}

} // namespace

EllipticSystem assemble_elliptic(const SdeModel& model, const ChaosBasis& basis, const FemGrid& grid)
{
    BlockOperator op = assemble_operator(model, basis, grid);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.interior()),
                                                static_cast<Eigen::Index>(basis.size()));
    const auto load = load_constant(grid, 1.0);
    for (std::size_t j = 0; j < load.size(); ++j) {
        rhs(static_cast<Eigen::Index>(j), 0) = load[j];
    }
    return EllipticSystem{std::move(op), std::move(rhs), {}};
}

EllipticSystem assemble_elliptic(const OuModel& model, const ChaosBasis& basis, const FemGrid& grid)
{
    EllipticSystem sys = assemble_elliptic(model.to_sde(), basis, grid);
    const CoercivityCheck c = check_coercivity_ou(model);
    if (!c.satisfied) {
        std::ostringstream msg;
        msg << "OU coercivity bound not satisfied (lhs " << c.lhs << " >= rhs " << c.rhs
            << "); elliptic well-posedness is not guaranteed";
        sys.warnings.push_back(msg.str());
    }
    return sys;
}

EllipticSolution solve_elliptic(const EllipticSystem& system, std::shared_ptr<const FemGrid> grid,
                                std::shared_ptr<const ChaosBasis> basis, const SolverConfig& cfg)
{
    const BlockOperator& op = system.op;
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), system.rhs.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    SolveDiagnostics diag;
    diag.method = cfg.method;
    diag.solves = 1;

    if (cfg.method == SolveMethod::dense) {
        const Eigen::MatrixXd a = op.dense();
        x = a.partialPivLu().solve(rhs);
        const double bn = rhs.norm();
        diag.max_relative_residual = bn == 0.0 ? 0.0 : (a * x - rhs).norm() / bn;
        diag.residual_history = {diag.max_relative_residual};
    } else {
        const TriDiagLU pre(op.mean_block());
        KrylovOptions opts{cfg.tol, resolve_max_iter(cfg, op.dim()), cfg.restart};
        const KrylovResult res = gmres(
            [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { op.apply(in, out); },
            [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { apply_columnwise(pre, in, out); }, rhs, x, opts);
        if (!res.converged) {
            throw_divergence("elliptic solve", res);
        }
        diag.iterations = res.iterations;
        diag.max_relative_residual = res.relative_residual;
        diag.residual_history = res.history;
    }
    Eigen::MatrixXd coeffs = as_matrix(x, op.n_space(), op.n_chaos());
    return EllipticSolution{ChaosFemField(std::move(grid), std::move(basis), std::move(coeffs), FieldKind::elliptic),
                            std::move(diag)};
}

ParabolicSystem assemble_parabolic(const SdeModel& model, const ChaosBasis& basis, const FemGrid& grid,
                                   const std::function<double(double)>& initial)
{
    BlockOperator a_op = assemble_operator(model, basis, grid);
    BlockOperator m_op(grid.interior(), basis.size());
    m_op.add(expectation_matrix(basis, [](ParamPoint) { return 1.0; }), mass(grid));

    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.interior()),
                                              static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < grid.interior(); ++j) {
        f(static_cast<Eigen::Index>(j), 0) = initial(grid.node(j + 1));
    }

    const AffineStructure& aff = require_affine(model);
    double amax = 0.0;
    const auto& pts = basis.quad_points();
    std::vector<double> z(static_cast<std::size_t>(pts.cols()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = 0; j < pts.cols(); ++j) {
            z[static_cast<std::size_t>(j)] = pts(i, j);
        }
        const double s = aff.diffusion(z);
        amax = std::max(amax, 0.5 * s * s);
    }
    return ParabolicSystem{std::move(a_op), std::move(m_op), std::move(f), amax, grid.h()};
}

ThetaStepper::ThetaStepper(const ParabolicSystem& system, const ThetaSchemeConfig& time, const SolverConfig& solver)
    : lhs_(system.mass_op.combined(1.0, system.stiffness_op, time.theta * time.dt())),
      rhs_(system.mass_op.combined(1.0, system.stiffness_op, -(1.0 - time.theta) * time.dt())),
      solver_(solver)
{
    require(time.theta >= 0.0 && time.theta <= 1.0, "theta must lie in [0, 1]");
    require(time.steps >= 1 && time.horizon > 0.0, "time stepping needs M >= 1 and T > 0");
    diag_.method = solver.method;
    if (time.theta < 0.5) {
        // Largest eigenvalue of M1^{-1} A for P1 hats is about 12/h².
        const double h = system.mesh_size;
        const double lambda = 12.0 * system.diffusion_max / (h * h);
        if (time.dt() * (1.0 - 2.0 * time.theta) * lambda > 2.0) {
            std::ostringstream msg;
            msg << "theta = " << time.theta << " < 1/2 with dt = " << time.dt()
                << " exceeds the explicit stability estimate; iterates may blow up";
            warnings_.push_back(msg.str());
        }
    }
    if (solver_.method == SolveMethod::dense) {
        dense_lu_.compute(lhs_.dense());
    } else {
        precond_ = TriDiagLU(lhs_.mean_block());
    }
}

Eigen::MatrixXd ThetaStepper::step(const Eigen::MatrixXd& v, std::size_t step_index)
{
    Eigen::MatrixXd r;
    rhs_.apply(v, r);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    ++diag_.solves;
    if (solver_.method == SolveMethod::dense) {
        x = dense_lu_.solve(b);
        Eigen::VectorXd ax;
        lhs_.apply(x, ax);
        const double bn = b.norm();
        diag_.max_relative_residual = std::max(diag_.max_relative_residual, bn == 0.0 ? 0.0 : (ax - b).norm() / bn);
    } else {
        KrylovOptions opts{solver_.tol, resolve_max_iter(solver_, lhs_.dim()), solver_.restart};
        const KrylovResult res = gmres(
            [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { lhs_.apply(in, out); },
            [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { apply_columnwise(precond_, in, out); }, b, x,
            opts);
        if (!res.converged) {
            throw_divergence("theta step " + std::to_string(step_index), res);
        }
        diag_.iterations += res.iterations;
        diag_.max_relative_residual = std::max(diag_.max_relative_residual, res.relative_residual);
        diag_.residual_history = res.history;
    }
    return as_matrix(x, lhs_.n_space(), lhs_.n_chaos());
}

ParabolicSolution solve_parabolic(const ParabolicSystem& system, std::shared_ptr<const FemGrid> grid,
                                  std::shared_ptr<const ChaosBasis> basis, const ThetaSchemeConfig& time,
                                  const SolverConfig& solver)
{
    ThetaStepper stepper(system, time, solver);
    Eigen::MatrixXd v = system.initial;
    for (std::size_t m = 0; m < time.steps; ++m) {
        v = stepper.step(v, m + 1);
    }
    return ParabolicSolution{
        ChaosFemField(std::move(grid), std::move(basis), std::move(v), FieldKind::parabolic, time.horizon),
        stepper.diagnostics(), stepper.warnings()};
}

} // namespace fksobol
