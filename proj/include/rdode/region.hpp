#pragma once

// Turing-unstable regions in the (D_v, D_w) plane for three-component
// systems, and feasibility masks over the kinetic parameter space.

#include <array>
#include <thread>

#include "rdode/receptor.hpp"

namespace rdode {

inline Vec linspace(double lo, double hi, int n) {
    if (n < 2 || !(hi > lo)) throw ValidationError("linspace: need n >= 2 and hi > lo");
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

inline Vec logspace(double lo, double hi, int n) {
    if (!(lo > 0.0)) throw ValidationError("logspace: lower bound must be positive");
    Vec v = linspace(std::log(lo), std::log(hi), n);
    for (double& x : v) x = std::exp(x);
    return v;
}

// Lattice over diffusion pairs; each cell carries the set of Neumann modes
// destabilized there. A cell belongs to the Turing-unstable set iff its set
// is nonempty.
struct RegionGrid {
    Vec dv_axis, dw_axis;
    std::vector<std::vector<int>> cells; // indexed iv * dw_axis.size() + iw, sorted mode lists
    int mode_cap = 0;
    JacobianBlocks blocks; // retained for boundary extraction
    double L = 1.0;

    const std::vector<int>& cell(int iv, int iw) const { return cells[static_cast<size_t>(iv) * dw_axis.size() + iw]; }

    // Signed instability indicator for one mode: negative inside Gamma_j.
    double indicator(int iv, int iw, int j) const {
        RHTriple t = rh_triple(blocks, dv_axis[iv], dw_axis[iw], neumann_eigenvalue(j, L).eigenvalue);
        return std::min(t.p3, t.rh_element());
    }
};

// Mode-resolved Turing-unstable set: mode j is destabilized at (D_v, D_w)
// iff one of the Routh-Hurwitz failure conditions p3(lambda_j) < 0 or
// (p1 p2 - p3)(lambda_j) < 0 holds. Both are checked; for some systems only
// the second one can fail.
inline RegionGrid gamma_mask(const JacobianBlocks& blocks, Vec dv_axis, Vec dw_axis, double L, int j_max,
                             int jobs = 1) {
    require_scalar_partition(blocks, "gamma_mask");
    if (spectral_abscissa(blocks.J) >= 0.0)
        throw ValidationError("gamma_mask: Jacobian must be ODE-stable (otherwise every cell merely "
                              "reflects the kinetic instability)");
    for (const Vec* ax : {&dv_axis, &dw_axis}) {
        if (ax->size() < 2) throw ValidationError("gamma_mask: axes need at least two samples");
        for (size_t i = 1; i < ax->size(); ++i)
            if (!((*ax)[i] > (*ax)[i - 1])) throw ValidationError("gamma_mask: axes must be strictly increasing");
        if ((*ax)[0] <= 0.0) throw ValidationError("gamma_mask: diffusion samples must be positive");
    }
    RegionGrid grid;
    grid.dv_axis = std::move(dv_axis);
    grid.dw_axis = std::move(dw_axis);
    grid.mode_cap = j_max;
    grid.blocks = blocks;
    grid.L = L;
    grid.cells.assign(grid.dv_axis.size() * grid.dw_axis.size(), {});

    Vec lambdas(j_max + 1);
    for (int j = 1; j <= j_max; ++j) lambdas[j] = neumann_eigenvalue(j, L).eigenvalue;

    // Cells are independent; rows fan out across threads when asked to.
    auto fill_rows = [&](size_t v0, size_t v1) {
        for (size_t iv = v0; iv < v1; ++iv)
            for (size_t iw = 0; iw < grid.dw_axis.size(); ++iw) {
                auto& set = grid.cells[iv * grid.dw_axis.size() + iw];
                for (int j = 1; j <= j_max; ++j) {
                    RHTriple t = rh_triple(blocks, grid.dv_axis[iv], grid.dw_axis[iw], lambdas[j]);
                    if (t.p3 < 0.0 || t.rh_element() < 0.0) set.push_back(j);
                }
            }
    };
    size_t nv = grid.dv_axis.size();
    int workers = std::clamp(jobs, 1, static_cast<int>(nv));
    if (workers <= 1) {
        fill_rows(0, nv);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back(fill_rows, nv * t / workers, nv * (t + 1) / workers);
        for (auto& th : pool) th.join();
    }
    return grid;
}

using Polyline = std::vector<std::array<double, 2>>;

namespace detail {

inline std::vector<Polyline> chain_segments(std::vector<std::array<std::array<double, 2>, 2>> segs) {
    auto close = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        double s = std::max({std::abs(a[0]), std::abs(b[0]), std::abs(a[1]), std::abs(b[1]), 1e-300});
        return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) < 1e-9 * s;
    };
    std::vector<Polyline> lines;
    std::vector<bool> used(segs.size(), false);
    for (size_t i = 0; i < segs.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        Polyline line{segs[i][0], segs[i][1]};
        bool grew = true;
        while (grew) {
            grew = false;
            for (size_t k = 0; k < segs.size(); ++k) {
                if (used[k]) continue;
                if (close(line.back(), segs[k][0])) {
                    line.push_back(segs[k][1]);
                } else if (close(line.back(), segs[k][1])) {
                    line.push_back(segs[k][0]);
                } else if (close(line.front(), segs[k][1])) {
                    line.insert(line.begin(), segs[k][0]);
                } else if (close(line.front(), segs[k][0])) {
                    line.insert(line.begin(), segs[k][1]);
                } else {
                    continue;
                }
                used[k] = true;
                grew = true;
            }
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace detail

// Zero contour of the mode-j instability indicator by marching squares with
// linear interpolation on the grid samples. An empty region yields an empty
// list.
inline std::vector<Polyline> region_boundary(const RegionGrid& grid, int j) {
    if (j < 1 || j > grid.mode_cap)
        throw ValidationError("region_boundary: mode index outside the grid's mode range");
    size_t nv = grid.dv_axis.size(), nw = grid.dw_axis.size();
    std::vector<double> f(nv * nw);
    for (size_t iv = 0; iv < nv; ++iv)
        for (size_t iw = 0; iw < nw; ++iw) f[iv * nw + iw] = grid.indicator(static_cast<int>(iv), static_cast<int>(iw), j);

    auto interp = [](double x0, double x1, double f0, double f1) {
        double t = f0 / (f0 - f1);
        return x0 + t * (x1 - x0);
    };

    std::vector<std::array<std::array<double, 2>, 2>> segs;
    for (size_t iv = 0; iv + 1 < nv; ++iv)
        for (size_t iw = 0; iw + 1 < nw; ++iw) {
            double f00 = f[iv * nw + iw], f10 = f[(iv + 1) * nw + iw];
            double f01 = f[iv * nw + iw + 1], f11 = f[(iv + 1) * nw + iw + 1];
            double x0 = grid.dv_axis[iv], x1 = grid.dv_axis[iv + 1];
            double y0 = grid.dw_axis[iw], y1 = grid.dw_axis[iw + 1];
            int c = (f00 < 0.0 ? 1 : 0) | (f10 < 0.0 ? 2 : 0) | (f11 < 0.0 ? 4 : 0) | (f01 < 0.0 ? 8 : 0);
            if (c == 0 || c == 15) continue;
            // Edge crossing points: bottom (y0), right (x1), top (y1), left (x0).
            std::array<double, 2> pb{interp(x0, x1, f00, f10), y0};
            std::array<double, 2> pr{x1, interp(y0, y1, f10, f11)};
            std::array<double, 2> pt{interp(x0, x1, f01, f11), y1};
            std::array<double, 2> pl{x0, interp(y0, y1, f00, f01)};
            auto add = [&](std::array<double, 2> a, std::array<double, 2> b) { segs.push_back({a, b}); };
            switch (c) {
                case 1: case 14: add(pl, pb); break;
                case 2: case 13: add(pb, pr); break;
                case 3: case 12: add(pl, pr); break;
                case 4: case 11: add(pr, pt); break;
                case 6: case 9: add(pb, pt); break;
                case 7: case 8: add(pl, pt); break;
                case 5: case 10: {
                    double fc = 0.25 * (f00 + f10 + f01 + f11);
                    bool center_neg = fc < 0.0;
                    if ((c == 5) == center_neg) {
                        add(pl, pt);
                        add(pb, pr);
                    } else {
                        add(pl, pb);
                        add(pr, pt);
                    }
                    break;
                }
            }
        }
    return detail::chain_segments(std::move(segs));
}

// Feasibility masks over two kinetic parameters, the remaining four fixed.
struct ParamMask {
    std::string axis1_name, axis2_name;
    Vec axis1, axis2;
    // Flags stored cell-major: index i1 * axis2.size() + i2.
    std::vector<std::array<bool, 4>> regions;
    std::vector<bool> intersection;

    bool flag(int i1, int i2, int r) const { return regions[static_cast<size_t>(i1) * axis2.size() + i2][r]; }
};

namespace detail {

inline double& param_by_name(ReceptorParams& p, const std::string& name) {
    if (name == "m1") return p.m1;
    if (name == "m2") return p.m2;
    if (name == "m3") return p.m3;
    if (name == "mu1") return p.mu1;
    if (name == "mu2") return p.mu2;
    if (name == "mu3") return p.mu3;
    throw ValidationError("param_masks: unknown parameter name '" + name + "'");
}

} // namespace detail

inline ParamMask param_masks(const ReceptorParams& base, const std::string& axis1_name, Vec axis1,
                             const std::string& axis2_name, Vec axis2) {
    base.validate();
    if (axis1_name == axis2_name) throw ValidationError("param_masks: axes must name distinct parameters");
    ParamMask mask;
    mask.axis1_name = axis1_name;
    mask.axis2_name = axis2_name;
    mask.axis1 = std::move(axis1);
    mask.axis2 = std::move(axis2);
    mask.regions.resize(mask.axis1.size() * mask.axis2.size());
    mask.intersection.resize(mask.regions.size());

    for (size_t i1 = 0; i1 < mask.axis1.size(); ++i1)
        for (size_t i2 = 0; i2 < mask.axis2.size(); ++i2) {
            ReceptorParams p = base;
            detail::param_by_name(p, axis1_name) = mask.axis1[i1];
            detail::param_by_name(p, axis2_name) = mask.axis2[i2];
            p.validate(); // samples outside the admissible parameter box are rejected
            DerivedQuantities q = derive_quantities(p);
            std::array<bool, 4> r{};
            r[0] = q.zeta > 0.0;
            r[1] = q.theta > 0.0;
            if (q.theta > 0.0) {
                double rhs = 2.0 * (p.mu1 / p.mu3 - 1.0) * (p.mu2 + q.eta3) * q.eta1 * q.eta3 / (p.m1 + p.m2);
                r[2] = q.alpha + 2.0 * q.eta3 + std::sqrt(q.theta) > rhs;
            } else {
                r[2] = false; // sqrt(theta) undefined: fails together with the discriminant region
            }
            r[3] = q.eta1 < 2.0 * (q.eta3 / p.m2 + 2.0 / q.eta2);
            size_t idx = i1 * mask.axis2.size() + i2;
            mask.regions[idx] = r;
            mask.intersection[idx] = r[0] && r[1] && r[2] && r[3];
        }
    return mask;
}

} // namespace rdode
