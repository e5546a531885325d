#include "fksobol/chaos.hpp"

#include "fksobol/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fksobol {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Chebyshev algorithm: recurrence coefficients from ordinary moments
// mom[0 .. 2n-1]. Exact arithmetic sidesteps the Hankel ill-conditioning.
void chebyshev_algorithm(const std::vector<Rational>& mom, std::size_t n, std::vector<Rational>& a,
                         std::vector<Rational>& b)
{
    const std::size_t len = 2 * n;
    a.assign(n, Rational(0));
    b.assign(n, Rational(0));
    std::vector<Rational> prev2(len, Rational(0));
    std::vector<Rational> prev(mom.begin(), mom.begin() + static_cast<std::ptrdiff_t>(len));
    a[0] = mom[1] / mom[0];
    b[0] = mom[0];
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<Rational> cur(len, Rational(0));
        for (std::size_t l = k; l < len - k; ++l) {
            cur[l] = prev[l + 1] - a[k - 1] * prev[l] - b[k - 1] * prev2[l];
        }
        a[k] = cur[k + 1] / cur[k] - prev[k] / prev[k - 1];
        b[k] = cur[k] / prev[k - 1];
        prev2 = std::move(prev);
        prev = std::move(cur);
    }
}

std::vector<MultiIndex> enumerate_indices(std::size_t m, Truncation truncation, int p_max)
{
    std::vector<MultiIndex> out;
    std::vector<int> deg(m, 0);
    while (true) {
        int total = 0;
        for (int d : deg) {
            total += d;
        }
        if (truncation == Truncation::tensor || total <= p_max) {
            out.push_back(MultiIndex{deg});
        }
        std::size_t axis = 0;
        while (axis < m && ++deg[axis] > p_max) {
            deg[axis++] = 0;
        }
        if (axis == m) {
            break;
        }
    }
    // Graded lexicographic: total degree first, then larger leading degrees.
    std::sort(out.begin(), out.end(), [](const MultiIndex& l, const MultiIndex& r) {
        if (l.total() != r.total()) {
            return l.total() < r.total();
        }
        return l.degrees > r.degrees;
    });
    return out;
}

} // namespace

std::string to_string(Truncation t) { return t == Truncation::tensor ? "tensor" : "total"; }

Truncation truncation_from_string(const std::string& s)
{
    if (s == "total" || s == "total_degree") {
        return Truncation::total_degree;
    }
    if (s == "tensor") {
        return Truncation::tensor;
    }
    fail(ErrorKind::config, "unknown truncation '" + s + "' (expected \"total\" or \"tensor\")");
}

int MultiIndex::total() const
{
    int t = 0;
    for (int d : degrees) {
        t += d;
    }
    return t;
}

bool IndexSet::contains(std::size_t zero_based) const
{
    return std::find(coords.begin(), coords.end(), static_cast<int>(zero_based) + 1) != coords.end();
}

std::string IndexSet::label() const
{
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < coords.size(); ++i) {
        out << (i ? "," : "") << coords[i];
    }
    out << '}';
    return out.str();
}

IndexSet make_index_set(std::vector<int> coords, std::size_t m)
{
    require(!coords.empty(), "index set must be non-empty");
    for (int c : coords) {
        require(c >= 1 && static_cast<std::size_t>(c) <= m,
                "index set coordinate " + std::to_string(c) + " outside {1, ..., " + std::to_string(m) + "}");
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    return IndexSet{std::move(coords)};
}

Recurrence uniform_recurrence(std::size_t n)
{
    require(n >= 1, "uniform_recurrence requires n >= 1");
    std::vector<Rational> mom(2 * n);
    for (std::size_t k = 0; k < mom.size(); ++k) {
        mom[k] = Rational(1, static_cast<long long>(k + 1));
    }
    std::vector<Rational> a;
    std::vector<Rational> b;
    chebyshev_algorithm(mom, n, a, b);
    Recurrence rec;
    for (std::size_t k = 0; k < n; ++k) {
        rec.a.push_back(a[k].convert_to<double>());
        rec.b.push_back(b[k].convert_to<double>());
    }
    return rec;
}

void orthonormal_values(const Recurrence& rec, double t, std::span<double> out)
{
    if (out.empty()) {
        return;
    }
    require(out.size() <= rec.a.size(), "recurrence too short for requested degree");
    out[0] = 1.0 / std::sqrt(rec.b[0]);
    if (out.size() > 1) {
        out[1] = (t - rec.a[0]) * out[0] / std::sqrt(rec.b[1]);
    }
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        out[k + 1] = ((t - rec.a[k]) * out[k] - std::sqrt(rec.b[k]) * out[k - 1]) / std::sqrt(rec.b[k + 1]);
    }
}

GaussRule gauss_rule(const Recurrence& rec, std::size_t n)
{
    require(n >= 1 && rec.a.size() >= n + 1, "gauss_rule needs n + 1 recurrence coefficients");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = rec.a[k];
        if (k + 1 < n) {
            const double off = std::sqrt(rec.b[k + 1]);
            jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k + 1)) = off;
            jacobi(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);

    GaussRule rule;
    std::vector<double> p(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double t = eig.eigenvalues()(static_cast<Eigen::Index>(i));
        // Newton on p_n using p_n' from the differentiated recurrence.
        for (int it = 0; it < 3; ++it) {
            double v_prev = 0.0;
            double v = 1.0 / std::sqrt(rec.b[0]);
            double d_prev = 0.0;
            double d = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double sb = k == 0 ? 0.0 : std::sqrt(rec.b[k]);
                const double v_next = ((t - rec.a[k]) * v - sb * v_prev) / std::sqrt(rec.b[k + 1]);
                const double d_next = (v + (t - rec.a[k]) * d - sb * d_prev) / std::sqrt(rec.b[k + 1]);
                v_prev = v;
                v = v_next;
                d_prev = d;
                d = d_next;
            }
            if (d == 0.0) {
                break;
            }
            t -= v / d;
        }
        orthonormal_values(rec, t, std::span<double>(p.data(), n));
        double christoffel = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            christoffel += p[k] * p[k];
        }
        rule.nodes.push_back(t);
        rule.weights.push_back(1.0 / christoffel);
    }
    return rule;
}

ChaosBasis::ChaosBasis(std::vector<UncertainParam> params, Truncation truncation, int p_max, int quad_nodes,
                       int coeff_degree)
    : params_(std::move(params)), truncation_(truncation), p_max_(p_max), quad_nodes_(quad_nodes)
{
    require(!params_.empty(), "chaos basis needs at least one parameter");
    require(p_max >= 0, "chaos basis requires p_max >= 0");
    require(coeff_degree >= 0, "coefficient degree must be non-negative");
    // Exactness of E[g ψ_p ψ_q] per dimension needs 2n - 1 >= 2 p_max + deg(g).
    if (2 * quad_nodes - 1 < 2 * p_max + coeff_degree) {
        std::ostringstream msg;
        msg << "quadrature with " << quad_nodes << " nodes per dimension cannot integrate degree "
            << 2 * p_max + coeff_degree << " exactly (need at least " << (2 * p_max + coeff_degree + 2) / 2
            << ")";
        fail(ErrorKind::invalid_argument, msg.str());
    }

    const auto n_rec = static_cast<std::size_t>(std::max(p_max + 1, quad_nodes + 1));
    rec_ = uniform_recurrence(n_rec);
    indices_ = enumerate_indices(params_.size(), truncation_, p_max_);

    const GaussRule rule = gauss_rule(rec_, static_cast<std::size_t>(quad_nodes));
    const std::size_t m = params_.size();
    std::size_t npts = 1;
    for (std::size_t j = 0; j < m; ++j) {
        npts *= rule.nodes.size();
    }
    quad_points_.resize(static_cast<Eigen::Index>(npts), static_cast<Eigen::Index>(m));
    quad_weights_.resize(static_cast<Eigen::Index>(npts));
    quad_values_.resize(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(npts));

    const std::size_t nq = rule.nodes.size();
    // Univariate values at every node, reused across the tensor grid.
    std::vector<std::vector<double>> uni(nq, std::vector<double>(static_cast<std::size_t>(p_max_) + 1));
    for (std::size_t i = 0; i < nq; ++i) {
        orthonormal_values(rec_, rule.nodes[i], uni[i]);
    }
    std::vector<std::size_t> digit(m, 0);
    for (std::size_t pt = 0; pt < npts; ++pt) {
        std::size_t rem = pt;
        double w = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            digit[j] = rem % nq;
            rem /= nq;
            quad_points_(static_cast<Eigen::Index>(pt), static_cast<Eigen::Index>(j)) =
                from_reference(params_[j], rule.nodes[digit[j]]);
            w *= rule.weights[digit[j]];
        }
        quad_weights_(static_cast<Eigen::Index>(pt)) = w;
        for (std::size_t q = 0; q < size(); ++q) {
            double v = 1.0;
            for (std::size_t j = 0; j < m; ++j) {
                v *= uni[digit[j]][static_cast<std::size_t>(indices_[q].degrees[j])];
            }
            quad_values_(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(pt)) = v;
        }
    }
}

std::size_t ChaosBasis::index_of(const MultiIndex& mi) const
{
    const auto it = std::find(indices_.begin(), indices_.end(), mi);
    require(it != indices_.end(), "multi-index not in the truncated basis");
    return static_cast<std::size_t>(it - indices_.begin());
}

double ChaosBasis::eval(std::size_t q, ParamPoint z) const
{
    require(q < size(), "basis index " + std::to_string(q) + " out of range");
    require(z.size() == num_params(), "parameter point has the wrong dimension");
    std::vector<double> vals(static_cast<std::size_t>(p_max_) + 1);
    double out = 1.0;
    for (std::size_t j = 0; j < num_params(); ++j) {
        const int d = indices_[q].degrees[j];
        if (d == 0) {
            continue;
        }
        orthonormal_values(rec_, to_reference(params_[j], z[j]), std::span<double>(vals.data(), d + 1));
        out *= vals[static_cast<std::size_t>(d)];
    }
    return out;
}

Eigen::VectorXd ChaosBasis::eval_all(ParamPoint z) const
{
    require(z.size() == num_params(), "parameter point has the wrong dimension");
    const std::size_t m = num_params();
    std::vector<std::vector<double>> uni(m, std::vector<double>(static_cast<std::size_t>(p_max_) + 1));
    for (std::size_t j = 0; j < m; ++j) {
        orthonormal_values(rec_, to_reference(params_[j], z[j]), uni[j]);
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t q = 0; q < size(); ++q) {
        double v = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            v *= uni[j][static_cast<std::size_t>(indices_[q].degrees[j])];
        }
        out(static_cast<Eigen::Index>(q)) = v;
    }
    return out;
}

ChaosBasis build_basis(std::size_t m, Truncation truncation, int p_max, int quad_nodes)
{
    std::vector<UncertainParam> params;
    for (std::size_t j = 0; j < m; ++j) {
        params.push_back({"xi" + std::to_string(j + 1), Uniform{0.0, 1.0}, j});
    }
    return ChaosBasis(std::move(params), truncation, p_max, quad_nodes);
}

Eigen::MatrixXd expectation_matrix(const ChaosBasis& basis, const ParamFunction& g)
{
    const auto& pts = basis.quad_points();
    Eigen::VectorXd gw(pts.rows());
    std::vector<double> z(static_cast<std::size_t>(pts.cols()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = 0; j < pts.cols(); ++j) {
            z[static_cast<std::size_t>(j)] = pts(i, j);
        }
        gw(i) = basis.quad_weights()(i) * g(z);
    }
    const Eigen::MatrixXd& psi = basis.quad_values();
    Eigen::MatrixXd out = psi * gw.asDiagonal() * psi.transpose();
    return 0.5 * (out + out.transpose());
}

std::vector<std::size_t> index_set_K(const ChaosBasis& basis, const IndexSet& set)
{
    require(!set.coords.empty(), "index set must be non-empty");
    std::vector<std::size_t> out;
    for (std::size_t q = 1; q < basis.size(); ++q) {
        const auto& deg = basis.multi_index(q).degrees;
        bool inside = true;
        for (std::size_t j = 0; j < deg.size(); ++j) {
            if (deg[j] != 0 && !set.contains(j)) {
                inside = false;
                break;
            }
        }
        if (inside) {
            out.push_back(q);
        }
    }
    return out;
}

std::vector<std::size_t> index_set_mixed(const ChaosBasis& basis, const IndexSet& set)
{
    std::vector<std::size_t> out;
    for (std::size_t q = 1; q < basis.size(); ++q) {
        const auto& deg = basis.multi_index(q).degrees;
        bool in = false;
        bool outside = false;
        for (std::size_t j = 0; j < deg.size(); ++j) {
            if (deg[j] != 0) {
                (set.contains(j) ? in : outside) = true;
            }
        }
        if (in && outside) {
            out.push_back(q);
        }
    }
    return out;
}

} // namespace fksobol
