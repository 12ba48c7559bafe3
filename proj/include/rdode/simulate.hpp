#pragma once

// Time integration of the full system on (0, L) with no-flux boundaries:
// backward-Euler diffusion (tridiagonal solves on the midpoint grid with
// mirror ghost cells) and explicit reactions. Nondiffusive components step
// by plain explicit Euler. First order in time, second order in space.

#include <cstdint>
#include <random>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "rdode/ffe.hpp"

namespace rdode {

// Grid samples of all components on the midpoint grid x_k = (k+1/2) L / M.
struct Field {
    double L = 1.0;
    std::vector<Vec> comps; // one Vec of length M per component

    int grid_points() const { return comps.empty() ? 0 : static_cast<int>(comps[0].size()); }
    int components() const { return static_cast<int>(comps.size()); }
    double x(int k) const { return (k + 0.5) * L / grid_points(); }

    double max_abs() const {
        double m = 0.0;
        for (const Vec& c : comps) m = std::max(m, inf_norm(c));
        return m;
    }
    bool all_finite() const {
        for (const Vec& c : comps)
            for (double v : c)
                if (!std::isfinite(v)) return false;
        return true;
    }
    double max_abs_diff(const Field& o) const {
        double m = 0.0;
        for (int c = 0; c < components(); ++c)
            for (size_t k = 0; k < comps[c].size(); ++k) m = std::max(m, std::abs(comps[c][k] - o.comps[c][k]));
        return m;
    }
};

struct Perturbation {
    enum class Kind { CosineMode, XSin, UniformNoise };
    int component = 0;
    Kind kind = Kind::UniformNoise;
    double amplitude = 0.01;
    int mode = 0; // cosine mode index, or the sine frequency of the x-sin recipe
};

struct InitialCondition {
    Vec base;                                   // uniform base state, size m
    std::vector<Perturbation> perturbations;    // applied in order, one RNG stream
    std::vector<std::pair<double, double>> force_zero_u; // intervals where component 0 is zeroed
};

struct SimConfig {
    ModelSpec model;
    int M = 512;
    double dt = 1e-3;
    double T = 2000.0;
    double steady_window = 50.0;   // drift window W
    double steady_threshold = 1e-9;
    double snapshot_dt = 50.0;
    InitialCondition init;
    std::uint64_t seed = 1;
    bool check_invariant_region = true; // receptor model only
    double invariant_margin = 1.05;

    void validate() const {
        model.validate();
        if (M < 16) throw ValidationError("sim config: M must be at least 16");
        if (dt <= 0.0 || T <= 0.0) throw ValidationError("sim config: dt and T must be positive");
        if (steady_window <= 0.0 || snapshot_dt <= 0.0)
            throw ValidationError("sim config: windows must be positive");
        if (static_cast<int>(init.base.size()) != model.dim())
            throw ValidationError("sim config: initial base state size does not match model dimension");
    }

    double cfl_number() const {
        double dmax = 0.0;
        for (double d : model.D_v) dmax = std::max(dmax, d);
        for (double d : model.D_w) dmax = std::max(dmax, d);
        double dx = model.domain_length / M;
        return dt * dmax / (dx * dx);
    }
};

inline Field build_initial_field(const SimConfig& cfg) {
    int m = cfg.model.dim(), M = cfg.M;
    Field f;
    f.L = cfg.model.domain_length;
    f.comps.assign(m, Vec(M));
    for (int c = 0; c < m; ++c)
        for (int k = 0; k < M; ++k) f.comps[c][k] = cfg.init.base[c];
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (const Perturbation& p : cfg.init.perturbations) {
        if (p.component < 0 || p.component >= m) throw ValidationError("perturbation: bad component index");
        Vec& comp = f.comps[p.component];
        for (int k = 0; k < M; ++k) {
            double x = f.x(k);
            switch (p.kind) {
                case Perturbation::Kind::CosineMode:
                    comp[k] += p.amplitude * std::cos(p.mode * std::numbers::pi * x / f.L);
                    break;
                case Perturbation::Kind::XSin:
                    comp[k] += p.amplitude * (x / 10.0) * std::sin(p.mode * std::numbers::pi * x / f.L);
                    break;
                case Perturbation::Kind::UniformNoise:
                    comp[k] += p.amplitude * uni(rng);
                    break;
            }
        }
    }
    for (auto [a, b] : cfg.init.force_zero_u)
        for (int k = 0; k < M; ++k)
            if (f.x(k) > a && f.x(k) < b) f.comps[0][k] = 0.0;
    return f;
}

namespace detail {

// The nondiffusive component decays exponentially toward the trivial branch
// wherever it switches off, which drags its values through the subnormal
// range for millions of steps; flush-to-zero keeps that from dominating the
// runtime. Scoped so library callers outside run() keep IEEE semantics.
struct DenormalGuard {
#if defined(__SSE2__)
    unsigned int saved = _mm_getcsr();
    DenormalGuard() { _mm_setcsr(saved | 0x8040); } // FTZ | DAZ
    ~DenormalGuard() { _mm_setcsr(saved); }
#else
    DenormalGuard() = default;
#endif
    DenormalGuard(const DenormalGuard&) = delete;
};

// Prefactored Thomas solve for (I - dt D Lap_h) with mirror Neumann closure.
struct TridiagSolver {
    Vec cprime, inv_diag; // stored forward-elimination coefficients
    double off = 0.0;
    int M = 0;

    TridiagSolver() = default;
    TridiagSolver(int M_, double alpha) : M(M_) {
        // alpha = dt * D / dx^2; diagonal is 1+alpha at the ends, 1+2 alpha inside.
        off = -alpha;
        Vec b(M);
        b[0] = 1.0 + alpha;
        for (int i = 1; i + 1 < M; ++i) b[i] = 1.0 + 2.0 * alpha;
        b[M - 1] = 1.0 + alpha;
        cprime.resize(M);
        inv_diag.resize(M);
        cprime[0] = off / b[0];
        inv_diag[0] = 1.0 / b[0];
        for (int i = 1; i < M; ++i) {
            double denom = b[i] - off * cprime[i - 1];
            cprime[i] = off / denom;
            inv_diag[i] = 1.0 / denom;
        }
    }

    void solve_inplace(Vec& d) const {
        const double* inv = inv_diag.data();
        const double* cp = cprime.data();
        double* x = d.data();
        x[0] *= inv[0];
        for (int i = 1; i < M; ++i) x[i] = (x[i] - off * x[i - 1]) * inv[i];
        for (int i = M - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];
    }
};

struct Stepper {
    std::vector<TridiagSolver> solvers; // per component; empty solver for nondiffusive ones
    Vec diffusion;
    Vec alpha; // dt * D / dx^2 per component
    int m = 0, M = 0;
    double dt = 0.0;
    mutable std::vector<Vec> rates;
    mutable Vec incr;
    mutable Vec point, point_rates;

    Stepper(const SimConfig& cfg) : m(cfg.model.dim()), M(cfg.M), dt(cfg.dt) {
        diffusion = cfg.model.diffusion_diagonal();
        double dx = cfg.model.domain_length / cfg.M;
        solvers.resize(m);
        alpha.assign(m, 0.0);
        for (int c = 0; c < m; ++c)
            if (diffusion[c] > 0.0) {
                alpha[c] = cfg.dt * diffusion[c] / (dx * dx);
                solvers[c] = TridiagSolver(cfg.M, alpha[c]);
            }
        rates.assign(m, Vec(M));
        incr.resize(M);
        point.resize(m);
        point_rates.resize(m);
    }

    void evaluate_rates(const ModelSpec& model, const Field& f) const {
        if (model.rhs_bulk) {
            model.rhs_bulk(f.comps, rates);
            return;
        }
        for (int k = 0; k < M; ++k) {
            for (int c = 0; c < m; ++c) point[c] = f.comps[c][k];
            model.rhs(point, point_rates);
            for (int c = 0; c < m; ++c) rates[c][k] = point_rates[c];
        }
    }

    void step(const ModelSpec& model, Field& f) const {
        evaluate_rates(model, f);
        for (int c = 0; c < m; ++c) {
            Vec& comp = f.comps[c];
            const Vec& rate = rates[c];
            if (diffusion[c] <= 0.0) {
                for (int k = 0; k < M; ++k) comp[k] += dt * rate[k];
                continue;
            }
            // Increment form of (I - dt D Lap) x = comp + dt rate: solve for
            // y = x - comp so that constant states pass through untouched
            // (their mirror-closed second difference vanishes exactly).
            double a = alpha[c];
            incr[0] = a * (comp[1] - comp[0]) + dt * rate[0];
            for (int k = 1; k + 1 < M; ++k)
                incr[k] = a * ((comp[k - 1] - comp[k]) + (comp[k + 1] - comp[k])) + dt * rate[k];
            incr[M - 1] = a * (comp[M - 2] - comp[M - 1]) + dt * rate[M - 1];
            solvers[c].solve_inplace(incr);
            for (int k = 0; k < M; ++k) comp[k] += incr[k];
        }
    }
};

} // namespace detail

// One IMEX step, exposed for tests; production runs use `run`.
inline Field step_imex(const Field& state, const SimConfig& cfg) {
    if (!state.all_finite()) throw ValidationError("step_imex: state must be finite");
    detail::Stepper stepper(cfg);
    Field next = state;
    stepper.step(cfg.model, next);
    if (!next.all_finite()) throw NumericalError("step_imex: non-finite state after step");
    return next;
}

struct InvariantViolation {
    int component = 0;
    int index = 0;
    double value = 0.0;
};

// Componentwise box check 0 <= state <= A (lower bound relaxed by 1e-12 for
// roundoff). The continuous receptor system cannot leave this box once
// A_i >= eta_i, so a violation flags a scheme artifact.
inline bool invariant_region_check(const Field& state, std::span<const double> A,
                                   InvariantViolation* out = nullptr) {
    for (int c = 0; c < state.components(); ++c)
        for (size_t k = 0; k < state.comps[c].size(); ++k) {
            double v = state.comps[c][k];
            if (v < -1e-12 || v > A[c]) {
                if (out) *out = {c, static_cast<int>(k), v};
                return false;
            }
        }
    return true;
}

// Cosine coefficients of each component on the midpoint grid (full bandwidth).
inline std::vector<Vec> mode_amplitudes(const Field& field, double L) {
    std::vector<Vec> out;
    int M = field.grid_points();
    for (const Vec& comp : field.comps) {
        Vec c(M, 0.0);
        for (int j = 0; j < M; ++j) {
            double s = 0.0;
            for (int k = 0; k < M; ++k) s += comp[k] * std::cos(j * std::numbers::pi * (k + 0.5) / M);
            c[j] = (j == 0 ? s / M : 2.0 * s / M);
        }
        out.push_back(std::move(c));
        (void)L;
    }
    return out;
}

inline int dominant_mode(std::span<const double> coeffs) {
    int best = 1;
    double mag = 0.0;
    for (size_t j = 1; j < coeffs.size(); ++j)
        if (std::abs(coeffs[j]) > mag) {
            mag = std::abs(coeffs[j]);
            best = static_cast<int>(j);
        }
    return best;
}

struct Trajectory {
    std::vector<double> snapshot_times;
    std::vector<Field> snapshots;
    Field final_state;
    double final_time = 0.0;
    bool steady = false;
    double drift = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> drift_history; // (time, drift)
    double cfl_number = 0.0;
    Vec invariant_bounds; // the box actually asserted (empty when unchecked)
};

// Integrate from an explicit initial field (pattern handoff, CSV import).
inline Trajectory run_from_field(const SimConfig& cfg, Field state) {
    cfg.validate();
    if (state.grid_points() != cfg.M || state.components() != cfg.model.dim())
        throw ValidationError("run: initial field shape does not match the configuration");
    detail::DenormalGuard ftz;
    detail::Stepper stepper(cfg);

    Trajectory traj;
    traj.cfl_number = cfg.cfl_number();

    bool check_box = cfg.check_invariant_region && cfg.model.name == "receptor";
    Vec box;
    if (check_box) {
        ReceptorParams p{cfg.model.params.at("m1"), cfg.model.params.at("m2"), cfg.model.params.at("m3"),
                         cfg.model.params.at("mu1"), cfg.model.params.at("mu2"), cfg.model.params.at("mu3")};
        DerivedQuantities q = derive_quantities(p);
        Vec eta{q.eta1, q.eta2, q.eta3};
        box.resize(3);
        for (int c = 0; c < 3; ++c) box[c] = cfg.invariant_margin * std::max(eta[c], inf_norm(state.comps[c]));
        traj.invariant_bounds = box;
    }

    auto check_state = [&](double t) {
        if (!state.all_finite())
            throw NumericalError("run: solution blew up at t=" + std::to_string(t));
        if (check_box) {
            InvariantViolation v;
            if (!invariant_region_check(state, box, &v))
                throw NumericalError("run: invariant region violated at t=" + std::to_string(t) +
                                     ", component " + std::to_string(v.component) + ", x=" +
                                     std::to_string(state.x(v.index)) + ", value " + std::to_string(v.value));
        }
    };

    auto snapshot = [&](double t) {
        traj.snapshot_times.push_back(t);
        traj.snapshots.push_back(state);
    };

    check_state(0.0);
    snapshot(0.0);

    long total_steps = static_cast<long>(std::ceil(cfg.T / cfg.dt));
    long window_steps = std::max<long>(1, static_cast<long>(std::llround(cfg.steady_window / cfg.dt)));
    long snap_steps = std::max<long>(1, static_cast<long>(std::llround(cfg.snapshot_dt / cfg.dt)));

    Field window_ref = state;
    double t = 0.0;
    for (long step = 1; step <= total_steps; ++step) {
        stepper.step(cfg.model, state);
        t = step * cfg.dt;
        if (step % 64 == 0 || step == total_steps)
            if (!state.all_finite()) throw NumericalError("run: solution blew up at t=" + std::to_string(t));
        if (step % snap_steps == 0) {
            check_state(t);
            snapshot(t);
        }
        if (step % window_steps == 0) {
            double drift = state.max_abs_diff(window_ref) / cfg.steady_window;
            traj.drift_history.emplace_back(t, drift);
            traj.drift = drift;
            window_ref = state;
            if (drift < cfg.steady_threshold) {
                traj.steady = true;
                break;
            }
        }
    }
    check_state(t);
    if (traj.snapshot_times.back() != t) snapshot(t);
    traj.final_state = state;
    traj.final_time = t;
    return traj;
}

inline Trajectory run(const SimConfig& cfg) {
    cfg.validate();
    return run_from_field(cfg, build_initial_field(cfg));
}

// Resample a constructed stationary pattern onto the simulator grid: v and w
// from their cosine coefficients, u from the branch formulas with the same
// Omega_2 geometry.
inline Field field_from_pattern(const FFEPattern& pat, const FFEProblem& prob, int M) {
    Field f;
    f.L = pat.L;
    f.comps.assign(3, Vec(M));
    CosineBasis basis(pat.N, std::max(M, pat.N), pat.L);
    for (int k = 0; k < M; ++k) {
        double x = (k + 0.5) * pat.L / M;
        double v = basis.evaluate(pat.vw.coeffs[0], x);
        double w = basis.evaluate(pat.vw.coeffs[1], x);
        bool in2 = pat.omega2.contains(x);
        f.comps[0][k] = in2 ? prob.psi(v, w) : prob.phi(v, w);
        f.comps[1][k] = v;
        f.comps[2][k] = w;
    }
    return f;
}

} // namespace rdode
