// Acceptance suite: one PASS / FAIL / SKIP line per criterion, exit status 1
// if anything failed. The full-size Monte Carlo configurations take hours on
// one core and only run with FKSOBOL_ACCEPTANCE_FULL=1; the reduced smoke
// configurations always run.

#include "fksobol/chaos.hpp"
#include "fksobol/error.hpp"
#include "fksobol/galerkin.hpp"
#include "fksobol/montecarlo.hpp"
#include "fksobol/sobol.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace fksobol;

namespace {

int failures = 0;

void report(const std::string& id, const std::string& status, const std::string& detail)
{
    std::printf("[%s] %-4s %s\n", status.c_str(), id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (status == "FAIL") {
        ++failures;
    }
}

void verdict(const std::string& id, bool ok, const std::string& detail) { report(id, ok ? "PASS" : "FAIL", detail); }

// Runs a criterion body, turning an unexpected exception into a FAIL line.
void guarded(const std::string& id, const std::function<void()>& body)
{
    try {
        body();
    } catch (const std::exception& e) {
        report(id, "FAIL", std::string("exception: ") + e.what());
    }
}

bool full_runs()
{
    const char* v = std::getenv("FKSOBOL_ACCEPTANCE_FULL");
    return v != nullptr && std::string(v) == "1";
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

OuModel ou(double mu2, double x0)
{
    OuModel m;
    m.mu2 = mu2;
    m.x0 = x0;
    return m;
}

OuModel brownian(double sigma, double x0)
{
    OuModel m;
    m.mu1 = 0.0;
    m.sigma1 = 0.0;
    m.mu2 = sigma;
    m.sigma2 = 0.0;
    m.x0 = x0;
    return m;
}

// P(τ > t) for σ̄W from x in (0, 10): Σ_{k odd ≤ 199} 4/(kπ) sin(kπx/10) e^{-σ̄²k²π²t/200}.
double fourier_survival(double sigma, double t, double x)
{
    double s = 0.0;
    for (int k = 1; k <= 199; k += 2) {
        const double kp = k * std::numbers::pi;
        s += 4.0 / kp * std::sin(kp * x / 10.0) * std::exp(-sigma * sigma * kp * kp * t / 200.0);
    }
    return s;
}

struct GalerkinIndices {
    double s1 = 0.0;
    double s2 = 0.0;
    double mean = 0.0;
    double seconds = 0.0;
};

GalerkinIndices galerkin_elliptic(const OuModel& m, std::size_t cells, int p)
{
    const auto t0 = std::chrono::steady_clock::now();
    const SdeModel sde = m.to_sde();
    auto grid = std::make_shared<const FemGrid>(m.domain, cells);
    auto basis = std::make_shared<const ChaosBasis>(sde.params(), Truncation::total_degree, p, p + 4);
    const auto sol = solve_elliptic(assemble_elliptic(m, *basis, *grid), grid, basis, SolverConfig{});
    const Eigen::VectorXd c = chaos_coeffs_at(sol.field, m.x0);
    return GalerkinIndices{sobol_parseval(c, *basis, make_index_set({1}, 2)).estimate,
                           sobol_parseval(c, *basis, make_index_set({2}, 2)).estimate, c(0), seconds_since(t0)};
}

GalerkinIndices galerkin_survival(const OuModel& m, std::size_t cells, int p, ThetaSchemeConfig time)
{
    const auto t0 = std::chrono::steady_clock::now();
    const SdeModel sde = m.to_sde();
    auto grid = std::make_shared<const FemGrid>(m.domain, cells);
    auto basis = std::make_shared<const ChaosBasis>(sde.params(), Truncation::total_degree, p, p + 4);
    const auto sys = assemble_parabolic(sde, *basis, *grid, [](double) { return 1.0; });
    const auto sol = solve_parabolic(sys, grid, basis, time, SolverConfig{});
    const Eigen::VectorXd c = chaos_coeffs_at(sol.field, m.x0);
    GalerkinIndices out{0.0, 0.0, c(0), 0.0};
    if (c.size() > 1) {
        out.s1 = sobol_parseval(c, *basis, make_index_set({1}, 2)).estimate;
        out.s2 = sobol_parseval(c, *basis, make_index_set({2}, 2)).estimate;
    }
    out.seconds = seconds_since(t0);
    return out;
}

// Default estimator: independent paths per evaluation, inner noise removed
// from the denominator. `paper_plain` switches to paths shared by every ξ and
// the uncorrected formula.
std::vector<SobolEntry> mc_indices(const OuModel& m, std::size_t n, std::size_t mm, double dt, const Kernel& kernel,
                                   const std::vector<IndexSet>& sets, double& seconds, bool paper_plain = false)
{
    const auto t0 = std::chrono::steady_clock::now();
    EulerConfig cfg;
    cfg.dt = dt;
    cfg.seed = 20240601;
    cfg.keying = paper_plain ? PathKeying::common : PathKeying::independent;
    const auto res = double_mc_sobol(m.to_sde(), sets, n, mm, kernel, cfg, 0,
                                     paper_plain ? McEstimator::plain : McEstimator::debiased);
    seconds = seconds_since(t0);
    return res.entries;
}

std::string mc_line(const std::vector<SobolEntry>& e, double seconds)
{
    std::ostringstream s;
    for (const auto& x : e) {
        s << "S" << x.set.label() << "=" << fmt("%.6f", x.estimate) << " (se " << fmt("%.4f", x.std_error.value_or(0.0))
          << ") ";
    }
    s << fmt("[%.0f s]", seconds);
    return s.str();
}

void table1_galerkin(GalerkinIndices& g1)
{
    g1 = galerkin_elliptic(ou(9.0, 5.0), 1000, 10);
    const bool ok = std::abs(g1.s1 - 0.0253) <= 0.002 && std::abs(g1.s2 - 0.9747) <= 0.002 && g1.seconds < 120.0;
    verdict("1", ok,
            fmt("Table 1 Galerkin N=1000 p=10: S1=%.6f (0.0253 +- 0.002) S2=%.6f (0.9747 +- 0.002) in %.2f s", g1.s1,
                g1.s2, g1.seconds));
}

void table1_mc(const GalerkinIndices& g1)
{
    const OuModel m = ou(9.0, 5.0);
    const std::vector<IndexSet> both{make_index_set({1}, 2), make_index_set({2}, 2)};
    double sec = 0.0;
    const auto smoke = mc_indices(m, 2000, 2000, 1e-3, Kernel::exit_time(), both, sec);
    const double d1 = std::abs(smoke[0].estimate - g1.s1);
    const double d2 = std::abs(smoke[1].estimate - g1.s2);
    verdict("2a", d1 <= 0.02 && d2 <= 0.02,
            "Table 1 MC smoke N=M=2000 dt=1e-3 vs Galerkin (+- 0.02): " + mc_line(smoke, sec) +
                fmt(" |dS1|=%.4f |dS2|=%.4f", d1, d2));
    const auto plain = mc_indices(m, 2000, 2000, 1e-3, Kernel::exit_time(), both, sec, true);
    report("2a", "INFO",
           "same smoke run with shared paths and the uncorrected formula: " + mc_line(plain, sec) +
               fmt(" |dS1|=%.4f |dS2|=%.4f", std::abs(plain[0].estimate - g1.s1), std::abs(plain[1].estimate - g1.s2)));

    if (!full_runs()) {
        report("2b", "SKIP", "Table 1 MC S1 at N=M=1e4 dt=1e-3: full-size run, set FKSOBOL_ACCEPTANCE_FULL=1");
        report("2c", "SKIP", "Table 1 MC S2 at N=M=2e4 dt=1e-4: full-size run, set FKSOBOL_ACCEPTANCE_FULL=1");
        return;
    }
    const auto s1 = mc_indices(m, 10000, 10000, 1e-3, Kernel::exit_time(), {make_index_set({1}, 2)}, sec);
    verdict("2b", std::abs(s1[0].estimate - 0.024927) <= 0.01,
            "Table 1 MC N=M=1e4 dt=1e-3, S1 within 0.01 of 0.024927: " + mc_line(s1, sec));
    const auto s2 = mc_indices(m, 20000, 20000, 1e-4, Kernel::exit_time(), {make_index_set({2}, 2)}, sec);
    verdict("2c", std::abs(s2[0].estimate - 0.971277) <= 0.01,
            "Table 1 MC N=M=2e4 dt=1e-4, S2 within 0.01 of 0.971277: " + mc_line(s2, sec));
}

void table2_galerkin(GalerkinIndices& g2)
{
    g2 = galerkin_survival(ou(2.0, 1.0), 1000, 10, ThetaSchemeConfig{0.5, 300, 0.3});
    const bool ok = std::abs(g2.s1 - 0.0961) <= 0.003 && std::abs(g2.s2 - 0.9039) <= 0.003;
    verdict("3", ok,
            fmt("Table 2 Crank-Nicolson N=1000 M=300 p=10: S1=%.6f (0.0961 +- 0.003) S2=%.6f (0.9039 +- 0.003) "
                "in %.1f s",
                g2.s1, g2.s2, g2.seconds));
}

void table2_mc(const GalerkinIndices& g2)
{
    const OuModel m = ou(2.0, 1.0);
    const std::vector<IndexSet> both{make_index_set({1}, 2), make_index_set({2}, 2)};
    double sec = 0.0;
    if (full_runs()) {
        const auto full = mc_indices(m, 50000, 50000, 6e-4, Kernel::survival(0.3), both, sec);
        verdict("4", std::abs(full[0].estimate - 0.095812) <= 0.01 && std::abs(full[1].estimate - 0.903182) <= 0.01,
                "Table 2 MC N=M=5e4 dt=6e-4 within 0.01 of (0.095812, 0.903182): " + mc_line(full, sec));
        return;
    }
    const auto smoke = mc_indices(m, 2000, 2000, 6e-4, Kernel::survival(0.3), both, sec);
    const double d1 = std::abs(smoke[0].estimate - g2.s1);
    const double d2 = std::abs(smoke[1].estimate - g2.s2);
    verdict("4", d1 <= 0.02 && d2 <= 0.02,
            "Table 2 MC smoke N=M=2000 dt=6e-4 vs Galerkin (+- 0.02): " + mc_line(smoke, sec) +
                fmt(" |dS1|=%.4f |dS2|=%.4f", d1, d2));
    const auto plain = mc_indices(m, 2000, 2000, 6e-4, Kernel::survival(0.3), both, sec, true);
    report("4", "INFO",
           "same smoke run with shared paths and the uncorrected formula: " + mc_line(plain, sec) +
               fmt(" |dS1|=%.4f |dS2|=%.4f", std::abs(plain[0].estimate - g2.s1), std::abs(plain[1].estimate - g2.s2)));
}

void elliptic_oracle()
{
    const double exact = 25.0 / 81.0;
    const OuModel m = brownian(9.0, 5.0);
    const GalerkinIndices g = [&] {
        const SdeModel sde = m.to_sde();
        auto grid = std::make_shared<const FemGrid>(m.domain, 1000);
        auto basis = std::make_shared<const ChaosBasis>(sde.params(), Truncation::total_degree, 1, 4);
        const auto sol = solve_elliptic(assemble_elliptic(m, *basis, *grid), grid, basis, SolverConfig{});
        return GalerkinIndices{0.0, 0.0, chaos_coeffs_at(sol.field, 5.0)(0), 0.0};
    }();

    EulerConfig cfg;
    cfg.dt = 1e-3;
    cfg.seed = 77;
    const SdeModel sde = m.to_sde();
    const std::vector<double> z{0.5, 0.5};
    const std::size_t paths = 100000;
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k < paths; ++k) {
        StreamRng rng(cfg.seed, 5, k);
        const double t = simulate_exit_time(sde, z, cfg, rng);
        s += t;
        s2 += t * t;
    }
    const double mean = s / paths;
    const double se = std::sqrt((s2 / paths - mean * mean) / paths);
    const bool ok = std::abs(g.mean - exact) < 1e-8 && std::abs(mean - exact) <= 3.0 * se;
    verdict("5", ok,
            fmt("Brownian sigma=9 x=5: Galerkin %.12f (25/81 +- 1e-8, err %.1e); MC M=1e5 dt=1e-3 %.5f, "
                "|err|/se=%.2f (<= 3)",
                g.mean, std::abs(g.mean - exact), mean, std::abs(mean - exact) / se));
}

void parabolic_oracle()
{
    const double oracle = fourier_survival(2.0, 0.3, 5.0);
    const GalerkinIndices g = galerkin_survival(brownian(2.0, 5.0), 1000, 0, ThetaSchemeConfig{0.5, 300, 0.3});
    const double err = std::abs(g.mean - oracle);
    verdict("6", err <= 5e-3,
            fmt("Brownian survival sigma=2 t=0.3 x=5, N=1000 M=300: FEM %.6f vs series %.6f, |err|=%.2e (<= 5e-3)",
                g.mean, oracle, err));
}

void temporal_order()
{
    const double oracle = fourier_survival(2.0, 0.3, 5.0);
    std::vector<double> err;
    for (std::size_t steps : {75, 150, 300}) {
        const GalerkinIndices g =
            galerkin_survival(brownian(2.0, 5.0), 2000, 0, ThetaSchemeConfig{0.5, steps, 0.3});
        err.push_back(std::abs(g.mean - oracle));
    }
    const double r1 = err[0] / err[1];
    const double r2 = err[1] / err[2];
    verdict("7", r1 >= 3.6 && r2 >= 3.6,
            fmt("Crank-Nicolson N=2000, M=75/150/300: errors %.3e %.3e %.3e, ratios %.2f %.2f (>= 3.6)", err[0],
                err[1], err[2], r1, r2));
}

void property_suites()
{
    guarded("8.1", [] {
        const ChaosBasis b = build_basis(2, Truncation::tensor, 12, 16);
        const Eigen::MatrixXd g = expectation_matrix(b, [](ParamPoint) { return 1.0; });
        const double dev = (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
        verdict("8.1", dev < 1e-12, fmt("chaos Gram matrix up to degree 12: max|G-I|=%.2e (< 1e-12)", dev));
    });

    guarded("8.2", [] {
        const OuModel m;
        double worst = 0.0;
        std::size_t largest = 0;
        for (auto [cells, p, trunc] : {std::tuple{5, 2, Truncation::total_degree},
                                       std::tuple{9, 1, Truncation::tensor}, std::tuple{17, 1, Truncation::total_degree},
                                       std::tuple{4, 3, Truncation::total_degree}}) {
            const SdeModel sde = m.to_sde();
            const FemGrid grid(m.domain, static_cast<std::size_t>(cells));
            const ChaosBasis basis(sde.params(), trunc, p, p + 4);
            const EllipticSystem sys = assemble_elliptic(m, basis, grid);
            const auto n = static_cast<Eigen::Index>(sys.op.dim());
            largest = std::max(largest, sys.op.dim());
            Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(n, n);
            for (const auto& term : sys.op.terms()) {
                const Eigen::MatrixXd t = term.space.dense();
                for (Eigen::Index a = 0; a < term.chaos.rows(); ++a) {
                    for (Eigen::Index b = 0; b < term.chaos.cols(); ++b) {
                        oracle.block(a * t.rows(), b * t.cols(), t.rows(), t.cols()) += term.chaos(a, b) * t;
                    }
                }
            }
            Eigen::VectorXd v(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                v(i) = std::sin(1.3 * static_cast<double>(i) + 0.2);
            }
            Eigen::VectorXd y;
            sys.op.apply(v, y);
            worst = std::max(worst, (y - oracle * v).cwiseAbs().maxCoeff() / oracle.cwiseAbs().maxCoeff());
        }
        verdict("8.2", worst < 1e-12 && largest <= 48,
                fmt("block matvec vs dense Kronecker oracle, dims <= %zu: max rel diff %.2e (< 1e-12)", largest, worst));
    });

    guarded("8.3", [] {
        const ChaosBasis b = build_basis(2, Truncation::total_degree, 8, 12);
        StreamRng rng(404, 0);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            Eigen::VectorXd c(static_cast<Eigen::Index>(b.size()));
            for (Eigen::Index q = 0; q < c.size(); ++q) {
                c(q) = rng.uniform01() - 0.5;
            }
            double mixed = 0.0;
            for (auto q : index_set_mixed(b, make_index_set({1}, 2))) {
                mixed += c(static_cast<Eigen::Index>(q)) * c(static_cast<Eigen::Index>(q));
            }
            const double s = sobol_parseval(c, b, make_index_set({1}, 2)).estimate +
                             sobol_parseval(c, b, make_index_set({2}, 2)).estimate +
                             mixed / c.tail(c.size() - 1).squaredNorm();
            worst = std::max(worst, std::abs(s - 1.0));
        }
        verdict("8.3", worst < 1e-12, fmt("Parseval partition S1+S2+S12=1 over 50 random expansions: max dev %.2e", worst));
    });

    guarded("8.4", [] {
        StreamRng rng(9, 9);
        std::vector<double> y(1000);
        for (double& v : y) {
            v = rng.uniform01();
        }
        const double s = sobol_pick_freeze(y, y).estimate;
        verdict("8.4", s == 1.0, fmt("pick-freeze on Y_I = Y_B: S=%.17g (exactly 1)", s));
    });

    guarded("8.5", [] {
        const std::size_t n = 100000;
        int covered = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const PickFreezeDesign d = pick_freeze_design(2, n, 1000 + seed);
            const Eigen::MatrixXd xi = d.frozen(make_index_set({1}, 2));
            std::vector<double> yb(n);
            std::vector<double> yi(n);
            for (std::size_t l = 0; l < n; ++l) {
                const auto r = static_cast<Eigen::Index>(l);
                yb[l] = d.b(r, 0) + d.b(r, 1);
                yi[l] = xi(r, 0) + xi(r, 1);
            }
            const SobolEntry e = sobol_pick_freeze(yi, yb);
            covered += std::abs(e.estimate - 0.5) <= 3.0 * e.std_error.value_or(0.0) ? 1 : 0;
        }
        verdict("8.5", covered >= 95,
                fmt("additive model Y=xi1+xi2, N=1e5: %d/100 seeded runs within 3 se of 0.5 (>= 95)", covered));
    });

    guarded("8.6", [] {
        const SdeModel sde = OuModel{}.to_sde();
        EulerConfig cfg;
        cfg.dt = 1e-2;
        cfg.seed = 31337;
        const std::vector<IndexSet> sets{make_index_set({1}, 2), make_index_set({2}, 2)};
        bool same = true;
        for (PathKeying k : {PathKeying::common, PathKeying::independent}) {
            cfg.keying = k;
            const auto a = double_mc_sobol(sde, sets, 200, 100, Kernel::exit_time(), cfg, 1, McEstimator::plain);
            const auto b = double_mc_sobol(sde, sets, 200, 100, Kernel::exit_time(), cfg, 8, McEstimator::plain);
            same = same && a.y_base == b.y_base && a.y_frozen == b.y_frozen &&
                   a.entries[0].estimate == b.entries[0].estimate && a.entries[1].estimate == b.entries[1].estimate;
        }
        verdict("8.6", same, "MC outputs bitwise identical with 1 and 8 threads under a fixed seed");
    });
}

} // namespace

int main()
{
    std::printf("fksobol acceptance (%s)\n", full_runs() ? "full-size Monte Carlo enabled" : "smoke Monte Carlo");
    GalerkinIndices g1;
    GalerkinIndices g2;
    guarded("1", [&] { table1_galerkin(g1); });
    guarded("3", [&] { table2_galerkin(g2); });
    guarded("5", elliptic_oracle);
    guarded("6", parabolic_oracle);
    guarded("7", temporal_order);
    property_suites();
    guarded("2", [&] { table1_mc(g1); });
    guarded("4", [&] { table2_mc(g2); });
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
