#pragma once

// The receptor-ligand-enzyme kinetics
//
//   f(u,v,w) = -mu1 u + m1 uv/(1+uv)
//   g(u,v,w) = -mu2 v + m2 uv/(1+uv) - v w
//   h(u,v,w) = -mu3 w + m3 uv/(1+uv)
//
// with immobile receptors u, diffusing ligands v and enzymes w. Closed forms
// for the constant steady states, the parameter assumptions, the instability
// condition on J12, and the two nullcline branches of f = 0.

#include "rdode/stability.hpp"

namespace rdode {

struct ReceptorParams {
    double m1 = 2.5, m2 = 9.68, m3 = 7.0;
    double mu1 = 1.0, mu2 = 1.0, mu3 = 0.6;

    void validate() const {
        if (!(m1 >= 2.0 && m2 >= 2.0 && m3 >= 2.0))
            throw ValidationError("receptor params: production rates m_i must satisfy m_i >= 2");
        if (!(mu1 > 0.0 && mu1 <= 1.0 && mu2 > 0.0 && mu2 <= 1.0 && mu3 > 0.0 && mu3 <= 1.0))
            throw ValidationError("receptor params: decay rates mu_i must lie in (0, 1]");
    }
};

// Canonical parameter sets: the feasibility point of the parameter-space
// study, and the set used by every simulation figure (mu1 = mu2 = 1).
inline ReceptorParams receptor_pstar() { return {2.5, 9.68, 7.0, 0.95, 0.95, 0.6}; }
inline ReceptorParams receptor_figure_params() { return {2.5, 9.68, 7.0, 1.0, 1.0, 0.6}; }

struct DerivedQuantities {
    double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0;
    double alpha = 0.0, zeta = 0.0, theta = 0.0;
};

inline DerivedQuantities derive_quantities(const ReceptorParams& p) {
    p.validate();
    DerivedQuantities q;
    q.eta1 = p.m1 / p.mu1;
    q.eta2 = p.m2 / p.mu2;
    q.eta3 = p.m3 / p.mu3;
    q.alpha = p.m2 * q.eta1 - q.eta3;
    q.zeta = q.alpha - 2.0 * p.mu2;
    q.theta = q.zeta * q.zeta - 4.0 * p.mu2 * (p.mu2 + q.eta3);
    return q;
}

// Parameter assumption items guaranteeing three steady states with the
// bistable arrangement. Returns the violated item numbers (empty = all hold).
//
// Item (3) is stated purely in the parameters; through
// vbar_+ = (alpha + 2 eta3 + sqrt(theta)) / (2 eta1 (mu2 + eta3)) it is
// algebraically the same inequality as the state-space stability condition
// vbar_+ > (mu1/mu3 - 1) eta3 / (m1 + m2).
inline std::vector<int> assumption_violations(const ReceptorParams& p) {
    DerivedQuantities q = derive_quantities(p);
    std::vector<int> bad;
    if (!(q.zeta > 0.0)) bad.push_back(1);
    if (!(q.theta > 0.0)) bad.push_back(2);
    if (q.theta > 0.0) {
        double lhs = q.alpha + 2.0 * q.eta3 + std::sqrt(q.theta);
        double rhs = 2.0 * (p.mu1 / p.mu3 - 1.0) * (p.mu2 + q.eta3) * q.eta1 * q.eta3 / (p.m1 + p.m2);
        if (!(lhs > rhs)) bad.push_back(3);
    } else {
        bad.push_back(3); // item (3) needs sqrt(theta)
    }
    return bad;
}

struct SteadyStateTriple {
    Vec X0{0.0, 0.0, 0.0};
    Vec Xminus;
    Vec Xplus;
    bool has_nontrivial = false;  // theta > 0
    bool minus_positive = false;
    bool plus_positive = false;
};

inline ModelSpec make_receptor_model(const ReceptorParams& p, double D_v, double D_w, double L);

// All constant steady states: the origin always, and the two roots of the
// quadratic  eta1 (mu2 + eta3) v^2 - (alpha + 2 eta3) v + m2 = 0  when its
// discriminant theta is positive.
inline SteadyStateTriple steady_states(const ReceptorParams& p) {
    DerivedQuantities q = derive_quantities(p);
    SteadyStateTriple s;
    if (q.theta <= 0.0) return s;
    s.has_nontrivial = true;
    double root = std::sqrt(q.theta);
    double denom = 2.0 * q.eta1 * (p.mu2 + q.eta3);
    auto build = [&](double vbar) {
        double ubar = q.eta1 - 1.0 / vbar;
        double wbar = q.eta3 * (1.0 - 1.0 / (q.eta1 * vbar));
        return Vec{ubar, vbar, wbar};
    };
    s.Xplus = build((q.alpha + 2.0 * q.eta3 + root) / denom);
    s.Xminus = build((q.alpha + 2.0 * q.eta3 - root) / denom);
    auto positive = [](const Vec& x) { return x[0] > 0.0 && x[1] > 0.0 && x[2] > 0.0; };
    s.plus_positive = positive(s.Xplus);
    s.minus_positive = positive(s.Xminus);
    return s;
}

enum class StateVerdict { Stable, Unstable };

// Numerical stability verdicts at the three steady states, via the spectral
// abscissa of the analytic Jacobian (nothing is taken from the closed-form
// argument).
inline std::map<std::string, StateVerdict> stability_verdicts(const ReceptorParams& p) {
    auto bad = assumption_violations(p);
    if (!bad.empty()) {
        std::string msg = "stability_verdicts: parameter assumption item(s) violated:";
        for (int i : bad) msg += " (" + std::to_string(i) + ")";
        throw ValidationError(msg);
    }
    ModelSpec model = make_receptor_model(p, 1.0, 1.0, 1.0);
    SteadyStateTriple s = steady_states(p);
    std::map<std::string, StateVerdict> verdicts;
    auto judge = [&](const std::string& name, const Vec& x) {
        double a = spectral_abscissa(jacobian(model, x).J);
        verdicts[name] = a < 0.0 ? StateVerdict::Stable : StateVerdict::Unstable;
    };
    judge("X0", s.X0);
    judge("Xminus", s.Xminus);
    judge("Xplus", s.Xplus);
    return verdicts;
}

// Instability condition for the (u,v) subsystem at the upper steady state:
// eta1 < 2 (eta3/m2 + 2/eta2). When it holds together with the parameter
// assumption, det J12(X+) < 0 is cross-checked.
inline bool j12_condition(const ReceptorParams& p) {
    DerivedQuantities q = derive_quantities(p);
    bool holds = q.eta1 < 2.0 * (q.eta3 / p.m2 + 2.0 / q.eta2);
    if (holds && assumption_violations(p).empty()) {
        ModelSpec model = make_receptor_model(p, 1.0, 1.0, 1.0);
        SteadyStateTriple s = steady_states(p);
        double d12 = det_cofactor(jacobian(model, s.Xplus).J12());
        if (!(d12 < 0.0))
            throw NumericalError("j12_condition: condition holds but det J12(X+) is not negative");
    }
    return holds;
}

// The two branches of f(u,v,w) = 0 solved for u: the nontrivial branch
// phi(v,w) = eta1 - 1/v and the trivial branch psi = 0. phi is positive for
// v > 1/eta1.
struct BranchPair {
    double eta1 = 0.0;

    double phi(double v, double /*w*/) const {
        if (v <= 0.0) throw ValidationError("branch phi: requires v > 0");
        return eta1 - 1.0 / v;
    }
    double psi(double /*v*/, double /*w*/) const { return 0.0; }
    double validity_lower_v() const { return 1.0 / eta1; }
};

inline BranchPair branch_pair(const ReceptorParams& p) {
    return BranchPair{derive_quantities(p).eta1};
}

inline ModelSpec make_receptor_model(const ReceptorParams& p, double D_v, double D_w, double L) {
    p.validate();
    DerivedQuantities q = derive_quantities(p);
    ModelSpec spec;
    spec.name = "receptor";
    spec.m_n = spec.m_s = spec.m_f = 1;
    spec.params = {{"m1", p.m1}, {"m2", p.m2}, {"m3", p.m3},
                   {"mu1", p.mu1}, {"mu2", p.mu2}, {"mu3", p.mu3}};
    spec.domain_length = L;
    spec.D_v = {D_v};
    spec.D_w = {D_w};
    double box = 10.0 * std::max({q.eta1, q.eta2, q.eta3});
    spec.box_lo = {0.0, 0.0, 0.0};
    spec.box_hi = {box, box, box};
    double m1 = p.m1, m2 = p.m2, m3 = p.m3, mu1 = p.mu1, mu2 = p.mu2, mu3 = p.mu3;
    spec.rhs = [=](std::span<const double> x, std::span<double> out) {
        double u = x[0], v = x[1], w = x[2];
        double sat = u * v / (1.0 + u * v);
        out[0] = -mu1 * u + m1 * sat;
        out[1] = -mu2 * v + m2 * sat - v * w;
        out[2] = -mu3 * w + m3 * sat;
    };
    spec.rhs_bulk = [=](const std::vector<Vec>& comps, std::vector<Vec>& rates) {
        const double* u = comps[0].data();
        const double* v = comps[1].data();
        const double* w = comps[2].data();
        double* fu = rates[0].data();
        double* fv = rates[1].data();
        double* fw = rates[2].data();
        size_t n = comps[0].size();
        for (size_t k = 0; k < n; ++k) {
            double sat = u[k] * v[k] / (1.0 + u[k] * v[k]);
            fu[k] = -mu1 * u[k] + m1 * sat;
            fv[k] = -mu2 * v[k] + m2 * sat - v[k] * w[k];
            fw[k] = -mu3 * w[k] + m3 * sat;
        }
    };
    spec.analytic_jacobian = [=](std::span<const double> x) {
        double u = x[0], v = x[1], w = x[2];
        double s = 1.0 + u * v;
        double s2 = s * s;
        Mat j(3, 3);
        j(0, 0) = -mu1 + m1 * v / s2;
        j(0, 1) = m1 * u / s2;
        j(0, 2) = 0.0;
        j(1, 0) = m2 * v / s2;
        j(1, 1) = -mu2 - w + m2 * u / s2;
        j(1, 2) = -v;
        j(2, 0) = m3 * v / s2;
        j(2, 1) = m3 * u / s2;
        j(2, 2) = -mu3;
        return j;
    };
    spec.validate();
    return spec;
}

} // namespace rdode
