#pragma once

// Linear stability machinery: per-mode spectra of -lambda_j D + J, the
// Routh-Hurwitz elements for three-component systems, the spectral bound of
// the linearized operator, and the classifier that names which subsystem is
// responsible for a diffusion-driven instability.

#include <optional>
#include <random>
#include <set>

#include "rdode/model.hpp"

namespace rdode {

// Routh-Hurwitz elements of the characteristic polynomial of -mu D + J for a
// (1,1,1) partition, lambda^3 + p1 lambda^2 + p2 lambda + p3.
struct RHTriple {
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;
    double mu = 0.0;
    double D_v = 0.0, D_w = 0.0;

    double rh_element() const { return p1 * p2 - p3; }
    bool marginal() const {
        return std::abs(p1) < tol::degenerate || std::abs(p3) < tol::degenerate ||
               std::abs(rh_element()) < tol::degenerate;
    }
};

inline void require_scalar_partition(const JacobianBlocks& b, const char* who) {
    if (b.m_n != 1 || b.m_s != 1 || b.m_f != 1)
        throw ValidationError(std::string(who) + ": requires the (1,1,1) component partition");
}

inline RHTriple rh_triple(const JacobianBlocks& blocks, double D_v, double D_w, double mu) {
    require_scalar_partition(blocks, "rh_triple");
    if (mu < 0.0) throw ValidationError("rh_triple: mu must be nonnegative");
    const Mat& J = blocks.J;
    RHTriple t;
    t.mu = mu;
    t.D_v = D_v;
    t.D_w = D_w;
    t.p1 = mu * (D_v + D_w) - trace(J);
    // Principal 2x2 minors of J - mu D, with D = diag(0, D_v, D_w).
    double j12 = (J(0, 0)) * (J(1, 1) - mu * D_v) - J(0, 1) * J(1, 0);
    double j13 = (J(0, 0)) * (J(2, 2) - mu * D_w) - J(0, 2) * J(2, 0);
    double j23 = (J(1, 1) - mu * D_v) * (J(2, 2) - mu * D_w) - J(1, 2) * J(2, 1);
    t.p2 = j12 + j13 + j23;
    Mat shifted = J;
    shifted(1, 1) -= mu * D_v;
    shifted(2, 2) -= mu * D_w;
    t.p3 = -det_cofactor(shifted);
    return t;
}

// Stability of the cubic via Routh-Hurwitz: p1 > 0, p3 > 0, p1 p2 - p3 > 0.
inline bool rh_stable(const RHTriple& t) {
    return t.p1 > 0.0 && t.p3 > 0.0 && t.rh_element() > 0.0;
}

struct ModeSpectrum {
    int mode = 0;
    Mat matrix;
    std::vector<Complex> eigenvalues;
    double abscissa = 0.0;
};

// Spectrum of -lambda_j D + J; D is the full diffusion diagonal (zeros on the
// nondiffusive indices).
inline ModeSpectrum mode_abscissa(const JacobianBlocks& blocks, std::span<const double> diffusion,
                                  const NeumannMode& mode) {
    if (static_cast<int>(diffusion.size()) != blocks.dim())
        throw ValidationError("mode_abscissa: diffusion diagonal size mismatch");
    for (int i = 0; i < blocks.m_n; ++i)
        if (diffusion[i] != 0.0)
            throw ValidationError("mode_abscissa: diffusion must vanish on nondiffusive indices");
    ModeSpectrum ms;
    ms.mode = mode.index;
    ms.matrix = blocks.J;
    for (int i = 0; i < blocks.dim(); ++i) ms.matrix(i, i) -= mode.eigenvalue * diffusion[i];
    ms.eigenvalues = eigenvalues(ms.matrix);
    ms.abscissa = ms.eigenvalues.front().real();
    return ms;
}

namespace detail {

// Tail criterion behind the finite mode cutoff. Past lambda_j* with
// lambda_j* dmin > 2 m |J|_inf, the diffusive directions sit far in the left
// half-plane and the nondiffusive block's eigenvalues lie within
// m^2 |J|_inf^2 / (lambda dmin - 2 m |J|_inf) of s(J1) (scalar resolvent
// bound on the coupling). Checked at j_max; a violation means j_max is too
// small to stand in for the infinite mode union.
inline void check_mode_tail(const JacobianBlocks& blocks, std::span<const double> diffusion, double L,
                            int j_max, double tail_abscissa, double s_j1) {
    double dmin = std::numeric_limits<double>::infinity();
    for (double d : diffusion)
        if (d > 0.0) dmin = std::min(dmin, d);
    if (!std::isfinite(dmin)) return; // no diffusion: every mode equals J, truncation is exact
    double m = blocks.dim();
    double jn = blocks.J.max_abs();
    double lambda_jmax = neumann_eigenvalue(j_max, L).eigenvalue;
    double gap = lambda_jmax * dmin - 2.0 * m * jn;
    double ref = blocks.m_n > 0 ? s_j1 : 0.0;
    if (gap <= 0.0 || tail_abscissa > ref + m * m * jn * jn / gap + tol::degenerate)
        throw NumericalError("mode tail criterion violated at j_max=" + std::to_string(j_max) +
                             ": increase j_max (lambda_jmax=" + std::to_string(lambda_jmax) +
                             ", coupling gap=" + std::to_string(gap) + ")");
}

} // namespace detail

struct SpectralBound {
    double bound = 0.0;
    int mode = -1;          // attaining Neumann mode, or -1 when the ODE part attains it
    bool from_ode_part = false;
};

// Spectral bound of L = D Lap + J at a constant state: the essential part
// s(J1) joined with the point spectra over modes 0..j_max.
inline SpectralBound operator_spectral_bound(const JacobianBlocks& blocks, std::span<const double> diffusion,
                                             double L, int j_max) {
    if (j_max < 1) throw ValidationError("operator_spectral_bound: j_max must be >= 1");
    double s_j1 = blocks.m_n > 0 ? spectral_abscissa(blocks.J1()) : -std::numeric_limits<double>::infinity();
    SpectralBound best;
    best.bound = s_j1;
    best.from_ode_part = blocks.m_n > 0;
    double tail = 0.0;
    for (int j = 0; j <= j_max; ++j) {
        ModeSpectrum ms = mode_abscissa(blocks, diffusion, neumann_eigenvalue(j, L));
        if (ms.abscissa > best.bound) {
            best.bound = ms.abscissa;
            best.mode = j;
            best.from_ode_part = false;
        }
        if (j == j_max) tail = ms.abscissa;
    }
    detail::check_mode_tail(blocks, diffusion, L, j_max, tail, s_j1);
    return best;
}

// Searches for a positive diagonal M with J M + M J^T negative definite.
// Success certifies stability for every diffusion choice; absence proves
// nothing (the search is a heuristic), except that for small systems the
// submatrix-semistability necessary condition is checked first.
inline std::optional<Vec> volterra_lyapunov_search(const Mat& j, std::uint64_t seed = 20240901u) {
    int n = j.rows();
    if (n == 0) return std::nullopt;

    if (n <= 4) {
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<int> idx;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) idx.push_back(i);
            if (spectral_abscissa(j.principal(idx)) > tol::degenerate) return std::nullopt;
        }
    }

    auto symmetrized = [&](const Vec& logd) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = std::exp(logd[i]);
        return j * m + m * j.transposed();
    };
    auto objective = [&](const Vec& logd) {
        Mat s = symmetrized(logd);
        return sym_eigenvalues(s).back() / (1.0 + s.max_abs());
    };
    auto recenter = [&](Vec& logd) {
        double mean = 0.0;
        for (double d : logd) mean += d;
        mean /= n;
        for (double& d : logd) d -= mean;
    };
    auto definite = [&](const Vec& logd) {
        Mat s = symmetrized(logd);
        if (sym_eigenvalues(s).back() >= 0.0) return false;
        double sign = -1.0;
        for (int k = 1; k <= n; ++k) {
            if (sign * det(s.block(0, 0, k, k)) <= 0.0) return false;
            sign = -sign;
        }
        return true;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    const int n_starts = 9;
    for (int start = 0; start < n_starts; ++start) {
        Vec logd(n, 0.0);
        if (start > 0)
            for (double& d : logd) d = uni(rng);
        recenter(logd);
        double best = objective(logd);
        double step = 1.0;
        while (step > 1e-4 && best >= 0.0) {
            bool improved = false;
            for (int i = 0; i < n; ++i)
                for (double s : {step, -step}) {
                    Vec trial = logd;
                    trial[i] += s;
                    recenter(trial);
                    double val = objective(trial);
                    if (val < best - 1e-15) {
                        best = val;
                        logd = trial;
                        improved = true;
                    }
                }
            if (!improved) step *= 0.5;
        }
        if (best < 0.0 && definite(logd)) {
            Vec m(n);
            for (int i = 0; i < n; ++i) m[i] = std::exp(logd[i]);
            return m;
        }
    }
    return std::nullopt;
}

enum class Verdict {
    NoDDI_VolterraLyapunov,
    NoDDI_AllStable,
    DDI_Autocatalysis,
    DDI_J12,
    DDI_J13,
    DDI_J23,
    DDI_Collective,
    NotStableODE,
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::NoDDI_VolterraLyapunov: return "NoDDI_VolterraLyapunov";
        case Verdict::NoDDI_AllStable: return "NoDDI_AllStable";
        case Verdict::DDI_Autocatalysis: return "DDI_Autocatalysis";
        case Verdict::DDI_J12: return "DDI_J12";
        case Verdict::DDI_J13: return "DDI_J13";
        case Verdict::DDI_J23: return "DDI_J23";
        case Verdict::DDI_Collective: return "DDI_Collective";
        case Verdict::NotStableODE: return "NotStableODE";
    }
    return "?";
}

struct StabilityReport {
    double s_ode = 0.0;
    std::map<std::string, double> submatrix_abscissae;
    std::vector<ModeSpectrum> per_mode;
    std::set<int> unstable_modes;
    std::set<int> marginal_modes; // |abscissa| below the degeneracy tolerance
    std::vector<std::string> unstable_submatrices;
    Verdict verdict = Verdict::NoDDI_AllStable;
    std::optional<Vec> vl_diagonal;
    double L = 1.0;
    int j_max = 0;
};

// DDI classification at a constant steady state. Verdict precedence: ODE
// instability first, then the Volterra-Lyapunov certificate, then absence of
// unstable modes, then the responsible subsystem in the fixed order
// autocatalysis, J12, J13, J23, collective.
inline StabilityReport classify_ddi(const JacobianBlocks& blocks, std::span<const double> diffusion,
                                    double L, int j_max) {
    StabilityReport rep;
    rep.L = L;
    rep.j_max = j_max;
    rep.s_ode = spectral_abscissa(blocks.J);

    auto put = [&](const char* name, const Mat& m) {
        if (m.rows() > 0) rep.submatrix_abscissae[name] = spectral_abscissa(m);
    };
    put("J1", blocks.J1());
    put("J2", blocks.J2());
    put("J3", blocks.J3());
    put("J12", blocks.J12());
    put("J13", blocks.J13());
    put("J23", blocks.J23());

    double s_j1 = blocks.m_n > 0 ? rep.submatrix_abscissae.at("J1") : -std::numeric_limits<double>::infinity();
    rep.per_mode.reserve(j_max + 1);
    for (int j = 0; j <= j_max; ++j) {
        rep.per_mode.push_back(mode_abscissa(blocks, diffusion, neumann_eigenvalue(j, L)));
        double a = rep.per_mode.back().abscissa;
        if (a > 0.0) rep.unstable_modes.insert(j);
        if (std::abs(a) < tol::degenerate) rep.marginal_modes.insert(j);
    }
    detail::check_mode_tail(blocks, diffusion, L, j_max, rep.per_mode.back().abscissa, s_j1);

    for (const char* name : {"J12", "J13", "J23"})
        if (auto it = rep.submatrix_abscissae.find(name);
            it != rep.submatrix_abscissae.end() && it->second > 0.0)
            rep.unstable_submatrices.push_back(name);

    if (rep.s_ode >= 0.0) {
        rep.verdict = Verdict::NotStableODE;
        return rep;
    }
    rep.vl_diagonal = volterra_lyapunov_search(blocks.J);
    if (rep.vl_diagonal) {
        rep.verdict = Verdict::NoDDI_VolterraLyapunov;
        return rep;
    }
    if (rep.unstable_modes.empty()) {
        rep.verdict = Verdict::NoDDI_AllStable;
        return rep;
    }
    if (blocks.m_n > 0 && s_j1 > 0.0) {
        rep.verdict = Verdict::DDI_Autocatalysis;
        return rep;
    }
    if (!rep.unstable_submatrices.empty()) {
        const std::string& first = rep.unstable_submatrices.front();
        rep.verdict = first == "J12" ? Verdict::DDI_J12 : first == "J13" ? Verdict::DDI_J13 : Verdict::DDI_J23;
        return rep;
    }
    if (blocks.dim() == 3)
        throw NumericalError("classify_ddi: collective verdict is unreachable for 3-component systems "
                             "(some subsystem must be unstable when DDI occurs)");
    rep.verdict = Verdict::DDI_Collective;
    return rep;
}

inline StabilityReport classify_ddi(const JacobianBlocks& blocks, double D_v, double D_w, double L, int j_max) {
    require_scalar_partition(blocks, "classify_ddi");
    Vec diffusion = {0.0, D_v, D_w};
    return classify_ddi(blocks, diffusion, L, j_max);
}

struct SmallDvThreshold {
    double epsilon = 0.0;
    int attaining_j = 0;
};

// Critical slow-diffusion threshold for fixed D_w: DDI occurs for every
// 0 < D_v below the returned supremum. Requires the J12 mechanism
// (det J12 < 0) within a stable (1,1,1) Jacobian.
inline SmallDvThreshold small_Dv_threshold(const JacobianBlocks& blocks, double D_w, double L, int j_max) {
    require_scalar_partition(blocks, "small_Dv_threshold");
    if (spectral_abscissa(blocks.J) >= 0.0)
        throw ValidationError("small_Dv_threshold: Jacobian must be stable");
    double detJ = det_cofactor(blocks.J);
    double detJ12 = det_cofactor(blocks.J12());
    double detJ13 = det_cofactor(blocks.J13());
    double j1 = blocks.J(0, 0);
    SmallDvThreshold out;
    bool found = false;
    for (int j = 1; j <= j_max; ++j) {
        double lam = neumann_eigenvalue(j, L).eigenvalue;
        double num = detJ - detJ12 * D_w * lam;
        double den = lam * (detJ13 - j1 * D_w * lam);
        if (den == 0.0) continue;
        double val = num / den;
        if (val > 0.0 && (!found || val > out.epsilon)) {
            out.epsilon = val;
            out.attaining_j = j;
            found = true;
        }
    }
    if (!found)
        throw NumericalError("small_Dv_threshold: mechanism absent (no positive term up to j_max; "
                             "det J12 >= 0 or j_max too small)");
    return out;
}

struct LargeDwRequirements {
    double L_min = 0.0;
    double Dw_min = 0.0;
    double L_eval = 0.0; // domain length at which the D_w threshold was evaluated
};

// Domain-scaling route to DDI for fixed D_v: the minimal domain length that
// brings lambda_j below det J12 / (J1 D_v), and the fast-diffusion threshold
// evaluated just past it (at margin * L_min, default ten percent past).
inline LargeDwRequirements large_Dw_requirements(const JacobianBlocks& blocks, double D_v, int j,
                                                 double margin = 1.1) {
    require_scalar_partition(blocks, "large_Dw_requirements");
    if (j < 1) throw ValidationError("large_Dw_requirements: mode index must be >= 1");
    if (margin <= 1.0) throw ValidationError("large_Dw_requirements: margin must exceed 1");
    double j1 = blocks.J(0, 0);
    double detJ = det_cofactor(blocks.J);
    double detJ12 = det_cofactor(blocks.J12());
    double detJ13 = det_cofactor(blocks.J13());
    double ratio = j1 * D_v / detJ12;
    if (ratio <= 0.0)
        throw ValidationError("large_Dw_requirements: J1 D_v / det J12 must be positive "
                              "(requires J1 < 0 and det J12 < 0)");
    LargeDwRequirements out;
    out.L_min = std::numbers::pi * j * std::sqrt(ratio);
    out.L_eval = margin * out.L_min;
    double lam = neumann_eigenvalue(j, out.L_eval).eigenvalue;
    double num = detJ - detJ13 * D_v * lam;
    double den = lam * (detJ12 - j1 * D_v * lam);
    out.Dw_min = num / den;
    if (!(out.Dw_min > 0.0))
        throw NumericalError("large_Dw_requirements: threshold not positive at the evaluation length");
    return out;
}

} // namespace rdode
