#include "fksobol/krylov.hpp"

#include "fksobol/error.hpp"

#include <cmath>

namespace fksobol {

KrylovResult gmres(const LinearMap& op, const LinearMap& precond, const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
                   const KrylovOptions& opts)
{
    require(opts.restart >= 1, "GMRES restart length must be positive");
    const Eigen::Index n = rhs.size();
    KrylovResult res;
    if (x.size() != n) {
        x = Eigen::VectorXd::Zero(n);
    }
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) {
        x.setZero();
        res.converged = true;
        return res;
    }

    const auto m = static_cast<Eigen::Index>(opts.restart);
    Eigen::MatrixXd basis(n, m + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m);
    Eigen::VectorXd sn(m);
    Eigen::VectorXd g(m + 1);
    Eigen::VectorXd w(n);
    Eigen::VectorXd z(n);
    Eigen::VectorXd r(n);

    op(x, r);
    r = rhs - r;
    double rel = r.norm() / bnorm;
    res.history.push_back(rel);

    while (rel > opts.tol && res.iterations < opts.max_iter) {
        const double beta = r.norm();
        basis.col(0) = r / beta;
        g.setZero();
        g(0) = beta;
        hess.setZero();
        Eigen::Index k = 0;
        for (; k < m && res.iterations < opts.max_iter; ++k) {
            precond(basis.col(k), z);
            op(z, w);
            for (Eigen::Index i = 0; i <= k; ++i) {
                hess(i, k) = w.dot(basis.col(i));
                w -= hess(i, k) * basis.col(i);
            }
            hess(k + 1, k) = w.norm();
            if (hess(k + 1, k) > 0.0) {
                basis.col(k + 1) = w / hess(k + 1, k);
            }
            for (Eigen::Index i = 0; i < k; ++i) {
                const double t = cs(i) * hess(i, k) + sn(i) * hess(i + 1, k);
                hess(i + 1, k) = -sn(i) * hess(i, k) + cs(i) * hess(i + 1, k);
                hess(i, k) = t;
            }
            const double denom = std::hypot(hess(k, k), hess(k + 1, k));
            cs(k) = denom == 0.0 ? 1.0 : hess(k, k) / denom;
            sn(k) = denom == 0.0 ? 0.0 : hess(k + 1, k) / denom;
            hess(k, k) = denom;
            hess(k + 1, k) = 0.0;
            g(k + 1) = -sn(k) * g(k);
            g(k) = cs(k) * g(k);
            ++res.iterations;
            const double est = std::abs(g(k + 1)) / bnorm;
            res.history.push_back(est);
            if (est <= opts.tol || denom == 0.0) {
                ++k;
                break;
            }
        }
        const Eigen::VectorXd y =
            hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        w = basis.leftCols(k) * y;
        precond(w, z);
        x += z;

        op(x, r);
        r = rhs - r;
        rel = r.norm() / bnorm;
        res.history.back() = rel;
    }
    res.relative_residual = rel;
    res.converged = rel <= opts.tol;
    return res;
}

} // namespace fksobol
