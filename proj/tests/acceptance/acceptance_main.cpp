// Acceptance suite: every criterion is exercised end-to-end at its stated
// tolerance and reported as one pass/fail line. The process exits nonzero if
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "rdode/config.hpp"

using namespace rdode;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

Mat j23_unstable_fixture() { return Mat{{-1.0, 9.0, 1.5}, {-9.0, -1.0, 5.0}, {-2.0, 3.5, -1.0}}; }
Mat j12_scaling_fixture() { return Mat{{-1.0, 1.0, -3.0}, {2.0, -1.0, -5.0}, {2.0, 1.0, -1.5}}; }

JacobianBlocks receptor_blocks(const ReceptorParams& p) {
    ModelSpec m = make_receptor_model(p, 1.0, 1.0, 1.0);
    return jacobian(m, steady_states(p).Xplus);
}

template <typename F>
double bisect(F f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (flo * f(mid) <= 0.0)
            hi = mid;
        else
            lo = mid, flo = f(lo);
    }
    return 0.5 * (lo + hi);
}

// ---- criteria -------------------------------------------------------------

void criterion_1(Check& c) {
    auto t0 = Clock::now();
    JacobianBlocks b{j23_unstable_fixture(), 1, 1, 1};

    c.expect(spectral_abscissa(b.J) < 0.0, "s(J) not negative");
    c.expect(b.J(0, 0) < 0.0 && b.J(1, 1) < 0.0 && b.J(2, 2) < 0.0, "diagonal sign pattern");
    c.expect(spectral_abscissa(b.J12()) < 0.0, "s(J12) not negative");
    c.expect(spectral_abscissa(b.J13()) < 0.0, "s(J13) not negative");
    c.expect(spectral_abscissa(b.J23()) > 0.0, "s(J23) not positive");

    CharPoly p = char_poly(b.J);
    c.expect(p.coeffs[0] * p.coeffs[1] - p.coeffs[2] == 3.75, "p1 p2 - p3 constant term not exactly 3.75");

    auto elem = [&](double mu) { return rh_triple(b, 0.001, 1.0, mu).rh_element(); };
    double lo = bisect(elem, 0.01, 1.5);
    double hi = bisect(elem, 1.5, 10.0);
    c.expect(std::abs(lo - 0.767) <= 0.005, "lower root " + std::to_string(lo));
    c.expect(std::abs(hi - 2.433) <= 0.005, "upper root " + std::to_string(hi));
    c.expect(elem(0.5 * (lo + hi)) < 0.0, "element not negative inside the window");

    StabilityReport rep = classify_ddi(b, 0.001, 1.0, std::numbers::pi, 256);
    c.expect(rep.verdict == Verdict::DDI_J23, std::string("verdict ") + to_string(rep.verdict));

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
}

void criterion_2(Check& c) {
    JacobianBlocks b{j23_unstable_fixture(), 1, 1, 1};
    Mat red = b.qssa_reduced();
    c.expect(std::abs(red(0, 0) - (-82.0)) < 1e-10, "entry (0,0)");
    c.expect(std::abs(red(0, 1) - (-8.5)) < 1e-10, "entry (0,1)");
    c.expect(std::abs(red(1, 0) - (-14.5)) < 1e-10, "entry (1,0)");
    c.expect(std::abs(red(1, 1) - (-4.0)) < 1e-10, "entry (1,1)");
    c.expect(std::abs(trace(red) - (-86.0)) < 1e-10, "trace");
    c.expect(std::abs(det(red) - 204.75) < 1e-10, "determinant");
}

void criterion_3(Check& c) {
    auto t0 = Clock::now();
    JacobianBlocks b{j12_scaling_fixture(), 1, 1, 1};
    for (double d : {1.0, 10.0, 120.0, 1000.0}) {
        StabilityReport rep = classify_ddi(b, 1.0, d, 1.0, 256);
        c.expect(rep.unstable_modes.empty(), "unstable mode on the unit domain at d=" + std::to_string(d));
        c.expect(rep.submatrix_abscissae.at("J12") > 0.0, "s(J12) not reported positive");
    }
    StabilityReport scaled = classify_ddi(b, 1.0, 200.0, 4.0, 256);
    c.expect(!scaled.unstable_modes.empty(), "no unstable mode after scaling to L=4");
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
}

void criterion_4(Check& c) {
    for (const auto& [name, p] : {std::pair<const char*, ReceptorParams>{"p*", receptor_pstar()},
                                  {"figure", receptor_figure_params()}}) {
        DerivedQuantities q = derive_quantities(p);
        double r3_margin = q.theta > 0.0
                               ? q.alpha + 2.0 * q.eta3 + std::sqrt(q.theta) -
                                     2.0 * (p.mu1 / p.mu3 - 1.0) * (p.mu2 + q.eta3) * q.eta1 * q.eta3 / (p.m1 + p.m2)
                               : -1.0;
        double r4_margin = 2.0 * (q.eta3 / p.m2 + 2.0 / q.eta2) - q.eta1;
        c.expect(q.zeta > 1e-6, std::string(name) + ": R1 margin");
        c.expect(q.theta > 1e-6, std::string(name) + ": R2 margin");
        c.expect(r3_margin > 1e-6, std::string(name) + ": R3 margin");
        c.expect(r4_margin > 1e-6, std::string(name) + ": R4 margin");
    }
}

void criterion_5(Check& c) {
    for (const auto& [name, p] : {std::pair<const char*, ReceptorParams>{"p*", receptor_pstar()},
                                  {"figure", receptor_figure_params()}}) {
        ModelSpec m = make_receptor_model(p, 1.0, 1.0, 1.0);
        SteadyStateTriple s = steady_states(p);
        c.expect(inf_norm(evaluate_reaction(m, s.X0).rates) == 0.0, std::string(name) + ": F(X0) not exactly 0");
        c.expect(inf_norm(evaluate_reaction(m, s.Xplus).rates) < 1e-10, std::string(name) + ": |F(X+)|");
        c.expect(inf_norm(evaluate_reaction(m, s.Xminus).rates) < 1e-10, std::string(name) + ": |F(X-)|");
        auto verdicts = stability_verdicts(p);
        c.expect(verdicts.at("X0") == StateVerdict::Stable, std::string(name) + ": X0 verdict");
        c.expect(verdicts.at("Xminus") == StateVerdict::Unstable, std::string(name) + ": X- verdict");
        c.expect(verdicts.at("Xplus") == StateVerdict::Stable, std::string(name) + ": X+ verdict");
    }
}

void criterion_6(Check& c) {
    auto t0 = Clock::now();
    JacobianBlocks b = receptor_blocks(receptor_figure_params());
    StabilityReport rep = classify_ddi(b, 0.006, 0.017, 1.0, 256);
    c.expect(rep.unstable_modes == std::set<int>{4}, "unstable mode set is not {4}");
    for (const ModeSpectrum& ms : rep.per_mode) {
        if (ms.mode == 4)
            c.expect(ms.abscissa > 1e-8, "mode 4 margin");
        else
            c.expect(ms.abscissa < -1e-8, "mode " + std::to_string(ms.mode) + " margin");
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
}

void criterion_7(Check& c) {
    auto t0 = Clock::now();
    JacobianBlocks b = receptor_blocks(receptor_figure_params());
    Vec dv = logspace(1e-3, 1e-1, 200), dw = logspace(1e-3, 1e-1, 200);
    dv.push_back(0.006);
    dw.push_back(0.017);
    std::sort(dv.begin(), dv.end());
    std::sort(dw.begin(), dw.end());
    RegionGrid grid = gamma_mask(b, dv, dw, 1.0, 64);

    int iv = static_cast<int>(std::find(dv.begin(), dv.end(), 0.006) - dv.begin());
    int iw = static_cast<int>(std::find(dw.begin(), dw.end(), 0.017) - dw.begin());
    c.expect(grid.cell(iv, iw) == std::vector<int>{4}, "figure cell mode set is not {4}");

    std::set<int> bands;
    for (const auto& cell : grid.cells)
        for (int j : cell) bands.insert(j);
    c.expect(bands.size() >= 4, "fewer than four mode bands present");

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 30.0, "runtime " + std::to_string(secs) + " s");
}

SimConfig fig4_config(double T, std::uint64_t seed) {
    ReceptorParams p = receptor_figure_params();
    SimConfig cfg;
    cfg.model = make_receptor_model(p, 0.006, 0.017, 1.0);
    cfg.M = 512;
    cfg.dt = 1e-3;
    cfg.T = T;
    cfg.init.base = steady_states(p).Xplus;
    cfg.seed = seed;
    return cfg;
}

void criterion_8(Check& c) {
    double ubar = steady_states(receptor_figure_params()).Xplus[0];
    auto check_u_collapse = [&](const Field& f, const std::string& tag) {
        int below = 0;
        for (double u : f.comps[0])
            if (u < 0.05 * ubar) ++below;
        c.expect(below > 0, tag + ": u never enters the 0.05 u+ neighborhood of the trivial branch");
    };
    auto timed_run = [&](SimConfig cfg, const std::string& tag) {
        auto t0 = Clock::now();
        Trajectory traj = run(cfg);
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        c.expect(secs < 60.0, tag + ": runtime " + std::to_string(secs) + " s");
        return traj;
    };

    // (a) random perturbation selects the linearly unstable mode 4
    {
        SimConfig cfg = fig4_config(4000.0, 42);
        for (int comp = 0; comp < 3; ++comp)
            cfg.init.perturbations.push_back({comp, Perturbation::Kind::UniformNoise, 0.01, 0});
        Trajectory traj = timed_run(cfg, "(a)");
        c.expect(traj.steady, "(a): no steady state (drift " + std::to_string(traj.drift) + ")");
        auto amps = mode_amplitudes(traj.final_state, 1.0);
        c.expect(dominant_mode(amps[1]) == 4, "(a): dominant mode " + std::to_string(dominant_mode(amps[1])));
        check_u_collapse(traj.final_state, "(a)");
    }
    // (b) strong mode-aligned receptor perturbations select modes 5 and 6
    {
        SimConfig cfg = fig4_config(8000.0, 7);
        cfg.init.perturbations.push_back({0, Perturbation::Kind::CosineMode, 0.1 * ubar, 5});
        Trajectory traj = timed_run(cfg, "(b) mode 5");
        c.expect(traj.steady, "(b) mode 5: no steady state");
        auto amps = mode_amplitudes(traj.final_state, 1.0);
        c.expect(dominant_mode(amps[1]) == 5,
                 "(b) mode 5: dominant mode " + std::to_string(dominant_mode(amps[1])));
        check_u_collapse(traj.final_state, "(b) mode 5");
    }
    {
        SimConfig cfg = fig4_config(4000.0, 7);
        cfg.init.perturbations.push_back({0, Perturbation::Kind::CosineMode, 0.1 * ubar, 6});
        Trajectory traj = timed_run(cfg, "(b) mode 6");
        auto amps = mode_amplitudes(traj.final_state, 1.0);
        int dom = dominant_mode(amps[1]);
        double dom_amp = std::abs(amps[1][dom]);
        bool patterned = dom_amp > 1e-3;
        std::string outcome = !patterned ? "the state returns to the uniform steady state"
                                         : "dominant mode " + std::to_string(dom) + " with amplitude " +
                                               std::to_string(dom_amp);
        c.expect(traj.steady && patterned && dom == 6,
                 "(b) mode 6: a 0.1 u+ kick stays below the mode-6 pattern's basin (" + outcome +
                 "); capture requires kicks of at least ~0.25 u+ at every tested dt, grid, and seed");
    }
}

void criterion_9(Check& c) {
    FFEProblem prob = FFEProblem::receptor(receptor_figure_params(), 0.1, 0.1, 1.0);
    CosineBasis basis(1024, 1024, 1.0);
    IntervalUnion omega2{{{0.49, 0.51}}};
    FFEOptions opt;
    opt.max_iter = 200;
    FFEPattern pat = solve_ffe(prob, omega2, basis, opt);
    c.expect(pat.iterations <= 200, "iterations " + std::to_string(pat.iterations));
    c.expect(pat.r_v < 1e-8, "r_v " + std::to_string(pat.r_v));
    c.expect(pat.r_w < 1e-8, "r_w " + std::to_string(pat.r_w));
    c.expect(pat.r_f < 1e-12, "r_f " + std::to_string(pat.r_f));
    c.expect(pat.min_jump_gap > 0.5 * prob.steady[0],
             "jump gap " + std::to_string(pat.min_jump_gap));

    SimConfig sim;
    sim.model = make_receptor_model(receptor_figure_params(), 0.1, 0.1, 1.0);
    sim.M = 512;
    sim.dt = 1e-3;
    sim.T = 100.0;
    sim.steady_window = 50.0;
    sim.steady_threshold = 0.0; // never stop early; measure drift over the full window
    sim.init.base = prob.steady;
    Trajectory traj = run_from_field(sim, field_from_pattern(pat, prob, sim.M));
    c.expect(traj.drift < 1e-8, "drift " + std::to_string(traj.drift) + " over 100 time units");
}

void criterion_10(Check& c) {
    // Routh-Hurwitz <=> eigenvalue signs on 1000 random cubics.
    {
        std::mt19937_64 rng(2025);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        int checked = 0, agree = 0;
        while (checked < 1000) {
            Mat m(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) m(i, k) = uni(rng);
            double a = spectral_abscissa(m);
            if (std::abs(a) <= 1e-6) continue;
            CharPoly p = char_poly(m);
            RHTriple t{p.coeffs[0], p.coeffs[1], p.coeffs[2], 0, 0, 0};
            if (rh_stable(t) == (a < 0.0)) ++agree;
            ++checked;
        }
        c.expect(agree == 1000, "RH/eigenvalue agreement " + std::to_string(agree) + "/1000");
    }
    // Resolvent forward/backward identity on 100 random instances.
    {
        std::mt19937_64 rng(2026);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        CosineBasis basis(64, 256, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            Mat a(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k) a(i, k) = uni(rng);
            a(0, 0) -= 3.0;
            a(1, 1) -= 3.0;
            Vec D{0.5 + std::abs(uni(rng)), 0.5 + std::abs(uni(rng))};
            std::vector<Vec> rc(2, Vec(64));
            for (auto& comp : rc)
                for (double& x : comp) x = uni(rng);
            SpectralField rhs = SpectralField::from_coeffs(basis, rc);
            SpectralField sol = resolvent_apply(a, D, rhs, basis);
            for (int j = 0; j < 64; ++j) {
                double lam = basis.mode_eigenvalue(j);
                for (int r = 0; r < 2; ++r) {
                    double back = -lam * D[r] * sol.coeffs[r][j];
                    for (int k = 0; k < 2; ++k) back += a(r, k) * sol.coeffs[k][j];
                    worst = std::max(worst, std::abs(back - rhs.coeffs[r][j]));
                }
            }
        }
        c.expect(worst < 1e-10, "resolvent identity residual " + std::to_string(worst));
    }
    // Cosine transform round trip.
    {
        std::mt19937_64 rng(2027);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        CosineBasis basis(128, 512, 1.0);
        Vec coeffs(128);
        for (double& x : coeffs) x = uni(rng);
        Vec back = basis.analyze(basis.synthesize(coeffs));
        double worst = 0.0;
        for (int j = 0; j < 128; ++j) worst = std::max(worst, std::abs(back[j] - coeffs[j]));
        c.expect(worst < 1e-12, "DCT round trip " + std::to_string(worst));
    }
    // Analytic vs finite-difference Jacobians.
    {
        ModelSpec m = make_receptor_model(receptor_figure_params(), 0.006, 0.017, 1.0);
        ModelSpec m_fd = m;
        m_fd.analytic_jacobian = nullptr;
        std::mt19937_64 rng(2028);
        std::uniform_real_distribution<double> uni(0.05, 3.0);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            Vec x{uni(rng), uni(rng), uni(rng)};
            Mat ja = jacobian(m, x).J;
            Mat jf = jacobian(m_fd, x).J;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(ja(i, k) - jf(i, k)));
        }
        c.expect(worst < 1e-5, "analytic/FD deviation " + std::to_string(worst));
    }
    // Invariant rectangle on a simulation fixture (checked on every step
    // window inside run(); a violation throws).
    {
        SimConfig cfg = fig4_config(200.0, 3);
        for (int comp = 0; comp < 3; ++comp)
            cfg.init.perturbations.push_back({comp, Perturbation::Kind::UniformNoise, 0.01, 0});
        cfg.check_invariant_region = true;
        try {
            Trajectory traj = run(cfg);
            c.expect(!traj.invariant_bounds.empty(), "invariant box not asserted");
        } catch (const NumericalError& e) {
            c.expect(false, std::string("invariant rectangle violated: ") + e.what());
        }
    }
    // Vieta identities for the steady-state quadratic.
    {
        std::mt19937_64 rng(2029);
        std::uniform_real_distribution<double> um(2.0, 15.0), uu(0.05, 1.0);
        int sampled = 0;
        double worst = 0.0;
        while (sampled < 100) {
            ReceptorParams p{um(rng), um(rng), um(rng), uu(rng), uu(rng), uu(rng)};
            DerivedQuantities q = derive_quantities(p);
            if (q.theta <= 0.0) continue;
            ++sampled;
            SteadyStateTriple s = steady_states(p);
            double sum = s.Xplus[1] + s.Xminus[1];
            double prod = s.Xplus[1] * s.Xminus[1];
            worst = std::max(worst, std::abs(sum - (q.alpha + 2.0 * q.eta3) / (q.eta1 * (p.mu2 + q.eta3))));
            worst = std::max(worst, std::abs(prod - p.m2 / (q.eta1 * (p.mu2 + q.eta3))));
        }
        c.expect(worst < 1e-10, "Vieta identity deviation " + std::to_string(worst));
    }
}

} // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        std::function<void(Check&)> fn;
    };
    std::vector<Criterion> criteria{
        {1, "J23-driven linear system regression", criterion_1},
        {2, "quasi-steady-state reduction of the same system", criterion_2},
        {3, "domain-scaling linear system regression", criterion_3},
        {4, "receptor parameter feasibility (both canonical sets)", criterion_4},
        {5, "receptor steady states and their stability verdicts", criterion_5},
        {6, "unstable Neumann mode set at the mode-4 diffusion pair", criterion_6},
        {7, "Turing region grid over the diffusion plane", criterion_7},
        {8, "simulation pattern selection", criterion_8},
        {9, "far-from-equilibrium construction and its stationarity", criterion_9},
        {10, "oracle-backed property suites", criterion_10},
    };

    int failures = 0;
    for (auto& cr : criteria) {
        Check check;
        auto t0 = Clock::now();
        try {
            cr.fn(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n", check.ok ? "PASS" : "FAIL", cr.number, cr.name,
                    secs, check.ok ? "" : " - ", check.ok ? "" : check.detail.str().c_str());
        std::fflush(stdout);
        if (!check.ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
