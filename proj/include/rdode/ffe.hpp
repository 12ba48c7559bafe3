#pragma once

// Far-from-equilibrium stationary patterns: the nondiffusive component u is
// placed on one nullcline branch of f = 0 on Omega_1 and on another branch on
// a small complement Omega_2, and the diffusive pair (v, w) is solved by a
// Picard iteration around the constant steady state. The converged u may jump
// across the Omega_1/Omega_2 boundary while v and w stay continuous.

#include <cstdint>
#include <functional>

#include "rdode/cosine.hpp"
#include "rdode/receptor.hpp"

namespace rdode {

// Disjoint open subintervals of (0, L), sorted.
struct IntervalUnion {
    std::vector<std::pair<double, double>> intervals;

    void validate(double L) const {
        double prev_end = 0.0;
        bool first = true;
        for (auto [a, b] : intervals) {
            if (!(0.0 <= a && a < b && b <= L))
                throw ValidationError("IntervalUnion: intervals must satisfy 0 <= a < b <= L");
            if (!first && a < prev_end) throw ValidationError("IntervalUnion: intervals must be disjoint and sorted");
            prev_end = b;
            first = false;
        }
    }

    double measure() const {
        double s = 0.0;
        for (auto [a, b] : intervals) s += b - a;
        return s;
    }

    bool contains(double x) const {
        for (auto [a, b] : intervals)
            if (x > a && x < b) return true;
        return false;
    }

    bool empty() const { return intervals.empty(); }
};

// Exact cosine coefficients of the indicator of omega2, in the convention
// 1_{Omega2} ~ c0 + sum_j c_j cos(j pi x / L).
inline Vec indicator_coefficients(const IntervalUnion& omega2, double L, int N) {
    omega2.validate(L);
    Vec c(N, 0.0);
    c[0] = omega2.measure() / L;
    for (int j = 1; j < N; ++j) {
        double s = 0.0;
        for (auto [a, b] : omega2.intervals)
            s += std::sin(j * std::numbers::pi * b / L) - std::sin(j * std::numbers::pi * a / L);
        c[j] = 2.0 / (j * std::numbers::pi) * s;
    }
    return c;
}

// Mode-wise resolvent of D Lap + A with Neumann conditions: solves
// (A - lambda_j D) c_j = rhs_j for every retained mode.
inline SpectralField resolvent_apply(const Mat& A, std::span<const double> D, const SpectralField& rhs,
                                     const CosineBasis& basis) {
    int d = rhs.components;
    if (A.rows() != d || static_cast<int>(D.size()) != d)
        throw ValidationError("resolvent_apply: dimension mismatch");
    int N = basis.modes();
    std::vector<Vec> out(d, Vec(N, 0.0));
    Mat m(d, d);
    Vec b(d), x(d);
    for (int j = 0; j < N; ++j) {
        double lam = basis.mode_eigenvalue(j);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) m(r, c) = A(r, c);
            m(r, r) -= lam * D[r];
            b[r] = rhs.coeffs[r][j];
        }
        double scale = 1.0;
        for (int r = 0; r < d; ++r) scale *= std::max(1.0, A.max_abs() + lam * inf_norm(D));
        if (std::abs(det(m)) < 1e-12 * scale)
            throw NumericalError("resolvent_apply: near-singular mode j=" + std::to_string(j) +
                                 " (nondegeneracy assumption fails at this mode)");
        x = solve(m, b);
        for (int r = 0; r < d; ++r) out[r][j] = x[r];
    }
    return SpectralField::from_coeffs(basis, std::move(out));
}

using BranchFn = std::function<double(double, double)>; // (v, w) -> u

// Everything the Picard iteration needs: the kinetics, the constant steady
// state, the two u-branches (already extended to bounded functions), and the
// linearization A of the reduced (v,w) reaction at the steady state.
struct FFEProblem {
    ModelSpec model;          // (1,1,1) partition
    Vec steady;               // (u, v, w) constant state on the phi branch
    BranchFn phi;             // branch through the steady state (C^2-bounded extension)
    BranchFn psi;             // alternative branch
    Mat A;                    // reduced linearization, 2x2
    Vec D;                    // (D_v, D_w)
    std::pair<double, double> clamp_window{0.0, 0.0}; // v-range where phi is exact

    static FFEProblem receptor(const ReceptorParams& p, double D_v, double D_w, double L) {
        FFEProblem prob;
        prob.model = make_receptor_model(p, D_v, D_w, L);
        SteadyStateTriple ss = steady_states(p);
        if (!ss.has_nontrivial)
            throw ValidationError("ffe: receptor parameters admit no nontrivial steady state");
        prob.steady = ss.Xplus;
        prob.A = jacobian(prob.model, prob.steady).qssa_reduced();
        prob.D = {D_v, D_w};
        BranchPair branches = branch_pair(p);
        double vbar = ss.Xplus[1];
        double lo = vbar / 2.0, hi = 2.0 * vbar;
        prob.clamp_window = {lo, hi};
        double eta1 = branches.eta1;
        // Cubic Hermite blend of phi(v) = eta1 - 1/v to constants outside
        // [lo, hi]; keeps the map bounded during transient iterates. The blend
        // must be inactive at convergence for the pattern to solve f = 0.
        prob.phi = [eta1, lo, hi](double v, double) {
            auto raw = [eta1](double t) { return eta1 - 1.0 / t; };
            auto slope = [](double t) { return 1.0 / (t * t); };
            auto blend = [](double p0, double m0, double p1, double m1, double t, double h) {
                double t2 = t * t, t3 = t2 * t;
                return p0 * (2 * t3 - 3 * t2 + 1) + m0 * h * (t3 - 2 * t2 + t) +
                       p1 * (-2 * t3 + 3 * t2) + m1 * h * (t3 - t2);
            };
            double h_lo = lo / 2.0, h_hi = hi / 2.0;
            if (v >= lo && v <= hi) return raw(v);
            if (v > hi) {
                if (v >= hi + h_hi) return raw(hi) + slope(hi) * h_hi / 2.0;
                double t = (v - hi) / h_hi;
                return blend(raw(hi), slope(hi), raw(hi) + slope(hi) * h_hi / 2.0, 0.0, t, h_hi);
            }
            if (v <= lo - h_lo) return raw(lo) - slope(lo) * h_lo / 2.0;
            double t = (v - (lo - h_lo)) / h_lo;
            return blend(raw(lo) - slope(lo) * h_lo / 2.0, 0.0, raw(lo), slope(lo), t, h_lo);
        };
        prob.psi = [](double, double) { return 0.0; };
        return prob;
    }
};

// One application of the fixed-point map: evaluate A nu - q(nu) pointwise on
// the midpoint grid (q from the phi branch on Omega_1, from psi on Omega_2),
// transform, and apply the resolvent with the frozen linearization A.
inline SpectralField picard_map(const SpectralField& state, const FFEProblem& prob,
                                const IntervalUnion& omega2, const CosineBasis& basis) {
    int M = basis.grid_points();
    Vec r1(M), r2(M);
    Vec xyz(3), rates(3);
    for (int k = 0; k < M; ++k) {
        double x = basis.grid_x(k);
        double nu1 = state.values[0][k], nu2 = state.values[1][k];
        double v = prob.steady[1] + nu1, w = prob.steady[2] + nu2;
        bool in_omega2 = omega2.contains(x);
        double u = in_omega2 ? prob.psi(v, w) : prob.phi(v, w);
        xyz[0] = u;
        xyz[1] = v;
        xyz[2] = w;
        prob.model.rhs(xyz, rates);
        double a_nu_1 = prob.A(0, 0) * nu1 + prob.A(0, 1) * nu2;
        double a_nu_2 = prob.A(1, 0) * nu1 + prob.A(1, 1) * nu2;
        r1[k] = a_nu_1 - rates[1];
        r2[k] = a_nu_2 - rates[2];
    }
    SpectralField rhs = SpectralField::from_values(basis, {std::move(r1), std::move(r2)});
    return resolvent_apply(prob.A, prob.D, rhs, basis);
}

struct FFEPattern {
    double L = 1.0;
    int N = 0, M = 0;
    IntervalUnion omega2;
    SpectralField vw;              // absolute v and w fields (d = 2)
    Vec u;                         // piecewise branch values on the grid
    std::vector<std::uint8_t> branch_label; // 1 where x in Omega_2
    Vec x;                         // grid coordinates
    double r_f = 0.0, r_v = 0.0, r_w = 0.0;
    int iterations = 0;
    bool clamp_active = false;
    Vec steady;

    // Magnitude of the branch gap |phi - psi| minimized over Omega_2 points.
    double min_jump_gap = 0.0;
};

struct FFEOptions {
    double tol = 1e-12;
    int max_iter = 500;
    double max_omega2_fraction = 1.0;
};

inline FFEPattern solve_ffe(const FFEProblem& prob, const IntervalUnion& omega2, const CosineBasis& basis,
                            const FFEOptions& opt = {}) {
    double L = basis.domain_length();
    omega2.validate(L);
    if (omega2.measure() > opt.max_omega2_fraction * L)
        throw ValidationError("solve_ffe: |Omega_2| exceeds the configured bound");

    // Nondegeneracy across all retained modes (fails loudly, not silently).
    {
        SpectralField probe = SpectralField::zero(basis, 2);
        resolvent_apply(prob.A, prob.D, probe, basis);
    }

    SpectralField nu = SpectralField::zero(basis, 2);
    double ball_max = 50.0 * (1.0 + inf_norm(prob.steady));
    int iterations = 0;
    double delta = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        SpectralField next = picard_map(nu, prob, omega2, basis);
        delta = next.max_abs_coeff_diff(nu);
        nu = std::move(next);
        iterations = it;
        double amp = std::max(inf_norm(nu.values[0]), inf_norm(nu.values[1]));
        if (!std::isfinite(amp) || amp > ball_max)
            throw NumericalError("solve_ffe: contraction failed, iterates left the admissible ball after " +
                                 std::to_string(it) + " steps (|Omega_2| too large for this configuration; "
                                 "shrink Omega_2 or adjust diffusion)");
        if (delta < opt.tol) break;
    }
    if (!(delta < opt.tol))
        throw NumericalError("solve_ffe: contraction failed, no fixed point within " +
                             std::to_string(opt.max_iter) + " iterations (last update " + std::to_string(delta) +
                             "; |Omega_2| may exceed the contraction radius)");

    FFEPattern pat;
    pat.L = L;
    pat.N = basis.modes();
    pat.M = basis.grid_points();
    pat.omega2 = omega2;
    pat.iterations = iterations;
    pat.steady = prob.steady;

    std::vector<Vec> absolute = nu.coeffs;
    absolute[0][0] += prob.steady[1];
    absolute[1][0] += prob.steady[2];
    pat.vw = SpectralField::from_coeffs(basis, std::move(absolute));

    int M = basis.grid_points();
    pat.u.resize(M);
    pat.x.resize(M);
    pat.branch_label.resize(M);
    pat.min_jump_gap = std::numeric_limits<double>::infinity();
    auto [clamp_lo, clamp_hi] = prob.clamp_window;
    for (int k = 0; k < M; ++k) {
        double x = basis.grid_x(k);
        double v = pat.vw.values[0][k], w = pat.vw.values[1][k];
        bool in2 = omega2.contains(x);
        pat.x[k] = x;
        pat.branch_label[k] = in2 ? 1 : 0;
        pat.u[k] = in2 ? prob.psi(v, w) : prob.phi(v, w);
        if (!in2 && clamp_hi > clamp_lo && (v < clamp_lo || v > clamp_hi)) pat.clamp_active = true;
        if (in2) pat.min_jump_gap = std::min(pat.min_jump_gap, std::abs(prob.phi(v, w) - prob.psi(v, w)));
    }
    if (omega2.empty()) pat.min_jump_gap = 0.0;

    Vec vpp = basis.synthesize(pat.vw.coeffs[0], true);
    Vec wpp = basis.synthesize(pat.vw.coeffs[1], true);
    Vec xyz(3), rates(3);
    for (int k = 0; k < M; ++k) {
        xyz[0] = pat.u[k];
        xyz[1] = pat.vw.values[0][k];
        xyz[2] = pat.vw.values[1][k];
        prob.model.rhs(xyz, rates);
        pat.r_f = std::max(pat.r_f, std::abs(rates[0]));
        pat.r_v = std::max(pat.r_v, std::abs(prob.D[0] * vpp[k] + rates[1]));
        pat.r_w = std::max(pat.r_w, std::abs(prob.D[1] * wpp[k] + rates[2]));
    }
    return pat;
}

} // namespace rdode
