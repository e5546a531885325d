#include "fksobol/error.hpp"
#include "fksobol/montecarlo.hpp"

#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

using namespace fksobol;

namespace {

SdeModel brownian(double sigma, double x0 = 5.0)
{
    OuModel m;
    m.mu1 = 0.0;
    m.sigma1 = 0.0;
    m.mu2 = sigma;
    m.sigma2 = 0.0;
    m.x0 = x0;
    return m.to_sde();
}

struct Moments {
    double mean = 0.0;
    double std_error = 0.0;
};

Moments exit_moments(const SdeModel& model, const EulerConfig& cfg, std::size_t paths)
{
    const std::array<double, 2> z{0.5, 0.5};
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k < paths; ++k) {
        StreamRng rng(cfg.seed, 99, k);
        const double t = simulate_exit_time(model, z, cfg, rng);
        s += t;
        s2 += t * t;
    }
    const double n = static_cast<double>(paths);
    const double mean = s / n;
    return Moments{mean, std::sqrt((s2 / n - mean * mean) / n)};
}

} // namespace

TEST_CASE("Brownian mean exit time")
{
    EulerConfig cfg;
    cfg.dt = 1e-3;
    cfg.seed = 21;
    const Moments m = exit_moments(brownian(9.0), cfg, 100000);
    MESSAGE("mean " << m.mean << " stderr " << m.std_error);
    CHECK(std::abs(m.mean - 25.0 / 81.0) < 3.0 * m.std_error);
}

TEST_CASE("boundary shift removes most of the discretization bias")
{
    EulerConfig shifted;
    shifted.dt = 1e-2;
    shifted.seed = 4;
    EulerConfig naive = shifted;
    naive.boundary_shift = 0.0;
    const double exact = 25.0 / 81.0;
    const Moments a = exit_moments(brownian(9.0), shifted, 50000);
    const Moments b = exit_moments(brownian(9.0), naive, 50000);
    MESSAGE("shifted " << a.mean << " naive " << b.mean << " exact " << exact);
    CHECK(b.mean - exact > 5.0 * b.std_error);
    CHECK(std::abs(a.mean - exact) < 0.5 * std::abs(b.mean - exact));
}

TEST_CASE("exit shift scales with the square root of the step")
{
    EulerConfig cfg;
    cfg.dt = 1e-2;
    const double c1 = exit_shift(cfg, 9.0);
    CHECK(c1 == doctest::Approx(0.5826 * 9.0 * 0.1));
    cfg.dt = 2e-2;
    CHECK(exit_shift(cfg, 9.0) / c1 == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("start on or near the boundary exits immediately")
{
    EulerConfig cfg;
    const std::array<double, 2> z{0.5, 0.5};
    StreamRng rng(1, 2);
    CHECK(simulate_exit_time(brownian(9.0, 0.0), z, cfg, rng) == 0.0);
    CHECK(simulate_exit_time(brownian(9.0, 10.0), z, cfg, rng) == 0.0);
    // Inside but within 0.5826·σ·√δt of the boundary.
    CHECK(simulate_exit_time(brownian(9.0, 0.1), z, cfg, rng) == 0.0);
    CHECK(simulate_survival(brownian(9.0, 0.1), z, 0.3, [](double) { return 1.0; }, cfg, rng) == 0.0);
    CHECK(simulate_exit_time(brownian(9.0, 5.0), z, cfg, rng) > 0.0);
}

TEST_CASE("survival over a short horizon is close to one")
{
    EulerConfig cfg;
    cfg.dt = 1e-4;
    const SdeModel m = brownian(2.0);
    const std::array<double, 2> z{0.5, 0.5};
    const double short_t = inner_average(m, z, 2000, Kernel::survival(1e-3), cfg, 0);
    CHECK(short_t == 1.0);
    const double long_t = inner_average(m, z, 2000, Kernel::survival(5.0), cfg, 0);
    CHECK(long_t < short_t);
    // f(X_t) enters only for surviving paths.
    const double weighted = inner_average(m, z, 2000, Kernel::survival(1e-3, [](double) { return 0.25; }), cfg, 0);
    CHECK(weighted == doctest::Approx(0.25));
}

TEST_CASE("variance of the inner mean decays like 1/M")
{
    EulerConfig cfg;
    cfg.dt = 1e-2;
    cfg.seed = 8;
    cfg.keying = PathKeying::independent;
    const SdeModel m = brownian(9.0);
    const std::array<double, 2> z{0.5, 0.5};
    const std::vector<std::size_t> sizes{25, 50, 100, 200, 400, 800};
    const std::size_t reps = 1000;
    std::vector<double> lx;
    std::vector<double> ly;
    std::uint64_t id = 0;
    for (std::size_t mi : sizes) {
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double v = inner_average(m, z, mi, Kernel::exit_time(), cfg, id++);
            s += v;
            s2 += v * v;
        }
        const double mean = s / reps;
        lx.push_back(std::log(static_cast<double>(mi)));
        ly.push_back(std::log(s2 / reps - mean * mean));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / n;
        my += ly[i] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    MESSAGE("log-log slope " << slope);
    CHECK(std::abs(slope + 1.0) < 0.1);
}

TEST_CASE("common keying shares paths across parameter points")
{
    EulerConfig cfg;
    cfg.seed = 3;
    cfg.keying = PathKeying::common;
    const SdeModel m = brownian(9.0);
    const std::array<double, 2> z{0.5, 0.5};
    CHECK(inner_average(m, z, 50, Kernel::exit_time(), cfg, 0) == inner_average(m, z, 50, Kernel::exit_time(), cfg, 7));
    cfg.keying = PathKeying::independent;
    CHECK(inner_average(m, z, 50, Kernel::exit_time(), cfg, 0) != inner_average(m, z, 50, Kernel::exit_time(), cfg, 7));
}

TEST_CASE("double Monte Carlo is identical across thread counts")
{
    const SdeModel m = OuModel{}.to_sde();
    EulerConfig cfg;
    cfg.dt = 1e-2;
    cfg.seed = 12;
    const std::vector<IndexSet> sets{make_index_set({1}, 2), make_index_set({2}, 2)};
    for (PathKeying k : {PathKeying::common, PathKeying::independent}) {
        cfg.keying = k;
        const auto one = double_mc_sobol(m, sets, 40, 30, Kernel::exit_time(), cfg, 1, McEstimator::plain);
        const auto eight = double_mc_sobol(m, sets, 40, 30, Kernel::exit_time(), cfg, 8, McEstimator::plain);
        CHECK(one.y_base == eight.y_base);
        CHECK(one.y_frozen == eight.y_frozen);
        for (std::size_t s = 0; s < sets.size(); ++s) {
            CHECK(one.entries[s].estimate == eight.entries[s].estimate);
        }
        CHECK(one.path_evaluations == 40 * 30 * 3);
    }
    const auto entry = double_mc_sobol(m, sets, 40, 30, Kernel::exit_time(), cfg, 1, McEstimator::plain).entries[0];
    CHECK(entry.method == SobolMethod::pick_freeze);
    CHECK(entry.n_outer == 40);
    CHECK(entry.n_inner == 30);
    CHECK(entry.x == 5.0);
}

TEST_CASE("debiased estimator")
{
    // Same samples, same numerator; the denominator drops by the reported inner noise.
    const SdeModel m = OuModel{}.to_sde();
    EulerConfig cfg;
    cfg.dt = 1e-2;
    cfg.seed = 2;
    const std::vector<IndexSet> sets{make_index_set({2}, 2)};
    const auto plain = double_mc_sobol(m, sets, 100, 2000, Kernel::exit_time(), cfg, 1, McEstimator::plain);
    const auto deb = double_mc_sobol(m, sets, 100, 2000, Kernel::exit_time(), cfg, 1, McEstimator::debiased);
    CHECK(plain.y_base == deb.y_base);
    REQUIRE(deb.inner_noise.size() == 1);
    CHECK(deb.inner_noise[0] > 0.0);
    CHECK(deb.entries[0].numerator == plain.entries[0].numerator);
    CHECK(deb.entries[0].variance == doctest::Approx(plain.entries[0].variance - deb.inner_noise[0]));

    cfg.keying = PathKeying::common;
    CHECK_THROWS_AS(double_mc_sobol(m, sets, 10, 10, Kernel::exit_time(), cfg, 1, McEstimator::debiased), Error);
}

TEST_CASE("inner sample variance predicts the spread of inner means")
{
    EulerConfig cfg;
    cfg.dt = 1e-2;
    const SdeModel m = brownian(9.0);
    const std::array<double, 2> z{0.5, 0.5};
    const std::size_t reps = 2000;
    const std::size_t mi = 50;
    double s = 0.0;
    double s2 = 0.0;
    double predicted = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const InnerStats st = inner_stats(m, z, mi, Kernel::exit_time(), cfg, r);
        CHECK(inner_average(m, z, mi, Kernel::exit_time(), cfg, r) == st.mean);
        s += st.mean;
        s2 += st.mean * st.mean;
        predicted += st.variance / static_cast<double>(mi) / static_cast<double>(reps);
    }
    const double mean = s / reps;
    const double observed = s2 / reps - mean * mean;
    MESSAGE("observed " << observed << " predicted " << predicted);
    CHECK(observed == doctest::Approx(predicted).epsilon(0.1));
}

TEST_CASE("paths hitting the step cap are reported")
{
    EulerConfig cfg;
    cfg.max_steps = 10;
    const SdeModel m = brownian(9.0);
    const std::array<double, 2> z{0.5, 0.5};
    try {
        (void)inner_average(m, z, 20, Kernel::exit_time(), cfg, 0);
        FAIL("expected a truncation error");
    } catch (const TruncationError& e) {
        CHECK(e.kind() == ErrorKind::mc_truncation);
        CHECK(e.truncated_paths() == 20);
    }
    CHECK_THROWS_AS(double_mc_sobol(m, {make_index_set({1}, 2)}, 4, 4, Kernel::exit_time(), cfg, 2), TruncationError);
}

TEST_CASE("parameter-free dynamics give a degenerate variance")
{
    // With shared paths the inner mean does not depend on ξ at all.
    EulerConfig cfg;
    cfg.dt = 1e-2;
    cfg.keying = PathKeying::common;
    try {
        (void)double_mc_sobol(brownian(9.0), {make_index_set({1}, 2)}, 20, 20, Kernel::exit_time(), cfg, 1,
                              McEstimator::plain);
        FAIL("expected degenerate_variance");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_variance);
    }
}
