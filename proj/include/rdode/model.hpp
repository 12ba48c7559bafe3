#pragma once

// Model definitions for coupled systems with nondiffusive (u), slow-diffusive
// (v) and fast-diffusive (w) components:
//
//   du/dt = f(u,v,w)
//   dv/dt = Dv Lap v + g(u,v,w)
//   dw/dt = Dw Lap w + h(u,v,w)
//
// on the interval (0, L) with no-flux boundaries. A model carries its
// reaction map, an optional analytic Jacobian, and the admissible state box.

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "rdode/polynomial.hpp"

namespace rdode {

struct ModelSpec {
    std::string name;
    int m_n = 0, m_s = 0, m_f = 0; // nondiffusive / slow / fast component counts
    std::map<std::string, double> params;
    double domain_length = 1.0;
    Vec D_v; // size m_s, strictly positive
    Vec D_w; // size m_f, strictly positive

    std::function<void(std::span<const double>, std::span<double>)> rhs;
    // Optional array-wide evaluator for time steppers (one call per step
    // instead of one per grid point); semantics identical to mapping rhs over
    // the columns of comps.
    std::function<void(const std::vector<Vec>&, std::vector<Vec>&)> rhs_bulk;
    std::function<Mat(std::span<const double>)> analytic_jacobian; // may be empty
    Vec box_lo, box_hi; // admissible state box, sizes m

    int dim() const { return m_n + m_s + m_f; }

    void validate() const {
        if (dim() < 1) throw ValidationError("model '" + name + "': needs at least one component");
        if (m_n < 0 || m_s < 0 || m_f < 0) throw ValidationError("model '" + name + "': negative component count");
        if (domain_length <= 0.0) throw ValidationError("model '" + name + "': domain length must be positive");
        if (static_cast<int>(D_v.size()) != m_s || static_cast<int>(D_w.size()) != m_f)
            throw ValidationError("model '" + name + "': diffusion vector sizes do not match partition");
        for (double d : D_v)
            if (d <= 0.0) throw ValidationError("model '" + name + "': D_v entries must be positive");
        for (double d : D_w)
            if (d <= 0.0) throw ValidationError("model '" + name + "': D_w entries must be positive");
        if (!rhs) throw ValidationError("model '" + name + "': no reaction map registered");
    }

    // Full diffusion diagonal diag(0, Dv, Dw) as an m-vector.
    Vec diffusion_diagonal() const {
        Vec d(dim(), 0.0);
        for (int i = 0; i < m_s; ++i) d[m_n + i] = D_v[i];
        for (int i = 0; i < m_f; ++i) d[m_n + m_s + i] = D_w[i];
        return d;
    }

    bool in_box(std::span<const double> x) const {
        if (box_lo.empty()) return true;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] < box_lo[i] || x[i] > box_hi[i]) return false;
        return true;
    }
};

struct ReactionEval {
    Vec rates;
};

// The Jacobian at a state point together with the principal submatrices that
// drive the instability classification. Index order is (u, v, w).
struct JacobianBlocks {
    Mat J;
    int m_n = 0, m_s = 0, m_f = 0;

    Mat J1() const { return J.block(0, 0, m_n, m_n); }
    Mat J2() const { return J.block(m_n, m_n, m_s, m_s); }
    Mat J3() const { return J.block(m_n + m_s, m_n + m_s, m_f, m_f); }
    Mat J12() const { return J.block(0, 0, m_n + m_s, m_n + m_s); }
    Mat J23() const { return J.block(m_n, m_n, m_s + m_f, m_s + m_f); }
    Mat J13() const {
        std::vector<int> idx;
        for (int i = 0; i < m_n; ++i) idx.push_back(i);
        for (int i = 0; i < m_f; ++i) idx.push_back(m_n + m_s + i);
        return J.principal(idx);
    }

    int dim() const { return m_n + m_s + m_f; }

    // Quasi-steady-state reduction: eliminate the nondiffusive block through
    // the Schur complement J_vw - J_vw,u J1^{-1} J_u,vw. Also the linearization
    // of the reduced reaction map used by the stationary-pattern solver.
    Mat qssa_reduced() const {
        int d = m_s + m_f;
        Mat a = J.block(m_n, m_n, d, d);
        if (m_n == 0) return a;
        Mat j1 = J1();
        Mat cols = J.block(m_n, 0, d, m_n);   // d x m_n
        Mat rows = J.block(0, m_n, m_n, d);   // m_n x d
        // a -= cols * j1^{-1} * rows, column by column of `rows`.
        for (int c = 0; c < d; ++c) {
            Vec rhs(m_n);
            for (int i = 0; i < m_n; ++i) rhs[i] = rows(i, c);
            Vec x = solve(j1, rhs);
            for (int r = 0; r < d; ++r) {
                double s = 0.0;
                for (int k = 0; k < m_n; ++k) s += cols(r, k) * x[k];
                a(r, c) -= s;
            }
        }
        return a;
    }
};

// Neumann eigenpair of -Lap on (0, L): lambda_j = (j pi / L)^2 with
// eigenfunction cos(j pi x / L).
struct NeumannMode {
    int index = 0;
    double L = 1.0;
    double eigenvalue = 0.0;

    double eigenfunction(double x) const { return std::cos(index * std::numbers::pi * x / L); }
};

inline NeumannMode neumann_eigenvalue(int j, double L) {
    if (j < 0) throw ValidationError("neumann_eigenvalue: mode index must be nonnegative");
    if (L <= 0.0) throw ValidationError("neumann_eigenvalue: domain length must be positive");
    double k = j * std::numbers::pi / L;
    return NeumannMode{j, L, k * k};
}

inline ReactionEval evaluate_reaction(const ModelSpec& model, std::span<const double> state) {
    if (static_cast<int>(state.size()) != model.dim())
        throw ValidationError("evaluate_reaction: state dimension " + std::to_string(state.size()) +
                              " does not match model dimension " + std::to_string(model.dim()));
    ReactionEval out;
    out.rates.resize(state.size());
    model.rhs(state, out.rates);
    for (double r : out.rates)
        if (!std::isfinite(r))
            throw NumericalError("evaluate_reaction: non-finite rate, state outside the admissible box of '" +
                                 model.name + "'");
    return out;
}

namespace detail {

inline Mat finite_difference_jacobian(const ModelSpec& model, std::span<const double> point) {
    int m = model.dim();
    double h = 1e-6 * std::max(1.0, inf_norm(point));
    Mat j(m, m);
    Vec xp(point.begin(), point.end()), xm(point.begin(), point.end());
    Vec fp(m), fm(m);
    for (int c = 0; c < m; ++c) {
        xp[c] = point[c] + h;
        xm[c] = point[c] - h;
        model.rhs(xp, fp);
        model.rhs(xm, fm);
        for (int r = 0; r < m; ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
        xp[c] = point[c];
        xm[c] = point[c];
    }
    return j;
}

} // namespace detail

inline JacobianBlocks jacobian(const ModelSpec& model, std::span<const double> point) {
    if (static_cast<int>(point.size()) != model.dim())
        throw ValidationError("jacobian: point dimension does not match model");
    Mat j = model.analytic_jacobian ? model.analytic_jacobian(point)
                                    : detail::finite_difference_jacobian(model, point);
    if (!j.all_finite()) throw NumericalError("jacobian: non-finite entries at the evaluation point");
    return JacobianBlocks{std::move(j), model.m_n, model.m_s, model.m_f};
}

// Linear model F(X) = J X with a chosen (m_n, m_s, m_f) partition; the only
// reaction family besides the receptor kinetics that the tool registers.
inline ModelSpec make_linear_model(Mat j, int m_n, int m_s, int m_f, Vec d_v, Vec d_w, double L,
                                   std::string name = "linear") {
    if (!j.square() || j.rows() != m_n + m_s + m_f)
        throw ValidationError("make_linear_model: matrix size does not match partition");
    ModelSpec spec;
    spec.name = std::move(name);
    spec.m_n = m_n;
    spec.m_s = m_s;
    spec.m_f = m_f;
    spec.domain_length = L;
    spec.D_v = std::move(d_v);
    spec.D_w = std::move(d_w);
    int m = j.rows();
    spec.rhs = [j, m](std::span<const double> x, std::span<double> out) {
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += j(i, k) * x[k];
            out[i] = s;
        }
    };
    spec.analytic_jacobian = [j](std::span<const double>) { return j; };
    spec.validate();
    return spec;
}

} // namespace rdode
