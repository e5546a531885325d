#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace fksobol {

/// out = Op(in). `out` is pre-sized by the caller.
using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct KrylovOptions {
    double tol = 1e-10;
    std::size_t max_iter = 1000;
    std::size_t restart = 60;
};

struct KrylovResult {
    bool converged = false;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
};

/// Restarted GMRES with right preconditioning, so the monitored residual is
/// the unpreconditioned ‖b - Ax‖ / ‖b‖. `x` holds the initial guess on entry.
KrylovResult gmres(const LinearMap& op, const LinearMap& precond, const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
                   const KrylovOptions& opts);

} // namespace fksobol
