#include "fksobol/montecarlo.hpp"

#include "fksobol/error.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace fksobol {

namespace {

constexpr std::uint64_t path_tag = 0x4252574e50415448ULL;

struct Walk {
    std::uint64_t steps = 0;
    double x = 0.0;
    bool exited = false;
};

// Runs at most `limit` Euler steps; `coeffs(x)` yields {b(x), σ(x)}.
template <typename Coeffs>
Walk euler_walk(const Interval& dom, double x0, std::uint64_t limit, double dt, double shift, Coeffs&& coeffs,
                StreamRng& rng)
{
    boost::random::normal_distribution<double> normal;
    const double sqdt = std::sqrt(dt);
    Walk w{0, x0, false};
    auto [b, s] = coeffs(w.x);
    if (!dom.contains(w.x) || dom.distance_to_boundary(w.x) <= shift * s * sqdt) {
        w.exited = true;
        return w;
    }
    while (w.steps < limit) {
        w.x += b * dt + s * sqdt * normal(rng);
        ++w.steps;
        std::tie(b, s) = coeffs(w.x);
        if (!dom.contains(w.x) || dom.distance_to_boundary(w.x) <= shift * s * sqdt) {
            w.exited = true;
            break;
        }
    }
    return w;
}

template <typename Run>
Walk dispatch_walk(const SdeModel& model, ParamPoint z, Run&& run)
{
    if (const auto& aff = model.affine()) {
        const double offset = aff->drift_offset(z);
        const double slope = aff->drift_slope(z);
        const double sigma = aff->diffusion(z);
        return run([=](double x) { return std::pair<double, double>{offset + slope * x, sigma}; });
    }
    return run([&](double x) { return std::pair<double, double>{model.drift(x, z), model.diffusion(x, z)}; });
}

void check_config(const EulerConfig& cfg)
{
    require(cfg.dt > 0.0, "Euler time step must be positive");
    require(cfg.boundary_shift >= 0.0, "boundary shift constant must be non-negative");
    require(cfg.max_steps >= 1, "max_steps must be positive");
}

} // namespace

std::string to_string(PathKeying k) { return k == PathKeying::independent ? "independent" : "common"; }

PathKeying path_keying_from_string(const std::string& s)
{
    if (s == "common") {
        return PathKeying::common;
    }
    if (s == "independent") {
        return PathKeying::independent;
    }
    fail(ErrorKind::config, "unknown path keying '" + s + "' (expected \"common\" or \"independent\")");
}

double exit_shift(const EulerConfig& cfg, double sigma) { return cfg.boundary_shift * sigma * std::sqrt(cfg.dt); }

double simulate_exit_time(const SdeModel& model, ParamPoint z, const EulerConfig& cfg, StreamRng& rng)
{
    check_config(cfg);
    const Walk w = dispatch_walk(model, z, [&](auto&& coeffs) {
        return euler_walk(model.domain(), model.start(), cfg.max_steps, cfg.dt, cfg.boundary_shift, coeffs, rng);
    });
    if (!w.exited) {
        std::ostringstream msg;
        msg << "exit-time path truncated after max_steps = " << cfg.max_steps << " Euler steps";
        throw TruncationError(msg.str(), 1);
    }
    return static_cast<double>(w.steps) * cfg.dt;
}

double simulate_survival(const SdeModel& model, ParamPoint z, double t_target, const std::function<double(double)>& f,
                         const EulerConfig& cfg, StreamRng& rng)
{
    check_config(cfg);
    require(t_target > 0.0, "survival horizon must be positive");
    const auto steps = static_cast<std::uint64_t>(std::llround(t_target / cfg.dt));
    if (steps > cfg.max_steps) {
        std::ostringstream msg;
        msg << "survival horizon needs " << steps << " steps, above max_steps = " << cfg.max_steps;
        throw TruncationError(msg.str(), 1);
    }
    const Walk w = dispatch_walk(model, z, [&](auto&& coeffs) {
        return euler_walk(model.domain(), model.start(), steps, cfg.dt, cfg.boundary_shift, coeffs, rng);
    });
    return w.exited ? 0.0 : f(w.x);
}

std::string to_string(McEstimator e) { return e == McEstimator::debiased ? "debiased" : "plain"; }

McEstimator mc_estimator_from_string(const std::string& s)
{
    if (s == "plain") {
        return McEstimator::plain;
    }
    if (s == "debiased") {
        return McEstimator::debiased;
    }
    fail(ErrorKind::config, "unknown estimator '" + s + "' (expected \"plain\" or \"debiased\")");
}

double inner_average(const SdeModel& model, ParamPoint z, std::size_t m_inner, const Kernel& kernel,
                     const EulerConfig& cfg, std::uint64_t evaluation_id)
{
    return inner_stats(model, z, m_inner, kernel, cfg, evaluation_id).mean;
}

InnerStats inner_stats(const SdeModel& model, ParamPoint z, std::size_t m_inner, const Kernel& kernel,
                       const EulerConfig& cfg, std::uint64_t evaluation_id)
{
    require(m_inner >= 1, "inner average needs M >= 1");
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t truncated = 0;
    std::string first_msg;
    const std::uint64_t key = cfg.keying == PathKeying::common ? 0 : evaluation_id + 1;
    for (std::size_t k = 0; k < m_inner; ++k) {
        StreamRng rng(cfg.seed, path_tag, key, k);
        try {
            const double v = kernel.kind == Kernel::Kind::exit_time
                                 ? simulate_exit_time(model, z, cfg, rng)
                                 : simulate_survival(model, z, kernel.t, kernel.f, cfg, rng);
            sum += v;
            sum_sq += v * v;
        } catch (const TruncationError& e) {
            if (truncated++ == 0) {
                first_msg = e.what();
            }
        }
    }
    if (truncated > 0) {
        std::ostringstream msg;
        msg << truncated << " of " << m_inner << " paths truncated (" << first_msg << ")";
        throw TruncationError(msg.str(), truncated);
    }
    const double m = static_cast<double>(m_inner);
    const double mean = sum / m;
    const double var = m_inner > 1 ? std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0)) : 0.0;
    return InnerStats{mean, var};
}

McSobolResult double_mc_sobol(const SdeModel& model, const std::vector<IndexSet>& sets, std::size_t n_outer,
                              std::size_t m_inner, const Kernel& kernel, const EulerConfig& cfg, unsigned threads,
                              McEstimator estimator)
{
    require(estimator == McEstimator::plain || cfg.keying == PathKeying::independent,
            "the debiased estimator needs independent path keying");
    require(n_outer >= 2 && m_inner >= 2, "double Monte Carlo needs N, M >= 2");
    require(!sets.empty(), "double Monte Carlo needs at least one index set");
    check_config(cfg);

    const PickFreezeDesign design = pick_freeze_design(model.params(), n_outer, cfg.seed);
    // Evaluation points: block 0 is ξ^B, block s+1 is ξ^{I_s}.
    std::vector<Eigen::MatrixXd> points{design.b};
    for (const auto& s : sets) {
        points.push_back(design.frozen(s));
    }
    const std::size_t total = points.size() * n_outer;
    std::vector<double> values(total, 0.0);
    std::vector<double> noise(total, 0.0);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> truncated{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const std::size_t m = model.num_params();

    auto worker = [&]() {
        std::vector<double> z(m);
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t block = i / n_outer;
            const auto row = static_cast<Eigen::Index>(i % n_outer);
            for (std::size_t j = 0; j < m; ++j) {
                z[j] = points[block](row, static_cast<Eigen::Index>(j));
            }
            try {
                const InnerStats st = inner_stats(model, z, m_inner, kernel, cfg, i);
                values[i] = st.mean;
                noise[i] = st.variance / static_cast<double>(m_inner);
            } catch (const TruncationError& e) {
                truncated += e.truncated_paths();
                std::lock_guard lock(err_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                next = total;
            }
        }
    };

    unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (truncated > 0) {
        std::ostringstream msg;
        msg << truncated.load() << " Monte Carlo paths exceeded max_steps = " << cfg.max_steps;
        throw TruncationError(msg.str(), truncated.load());
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    McSobolResult out;
    out.y_base.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n_outer));
    for (std::size_t s = 0; s < sets.size(); ++s) {
        const auto begin = values.begin() + static_cast<std::ptrdiff_t>((s + 1) * n_outer);
        out.y_frozen.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(n_outer));
        double eta = 0.0;
        for (std::size_t l = 0; l < n_outer; ++l) {
            eta += 0.5 * (noise[l] + noise[(s + 1) * n_outer + l]);
        }
        eta /= static_cast<double>(n_outer);
        out.inner_noise.push_back(eta);
        SobolEntry e = sobol_pick_freeze(out.y_frozen.back(), out.y_base,
                                         estimator == McEstimator::debiased ? eta : 0.0);
        e.set = sets[s];
        e.n_inner = m_inner;
        e.x = model.start();
        if (kernel.kind == Kernel::Kind::survival) {
            e.t = kernel.t;
        }
        out.entries.push_back(std::move(e));
    }
    out.path_evaluations = total * m_inner;
    return out;
}

} // namespace fksobol
