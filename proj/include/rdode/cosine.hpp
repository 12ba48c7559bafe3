#pragma once

// Neumann-compatible cosine basis cos(j pi x / L) on the midpoint grid
// x_k = (k + 1/2) L / M. The midpoint samples make the forward/inverse pair
// exactly orthogonal for j < M and keep evaluation points away from interval
// endpoints, where stationary patterns may jump.

#include "rdode/linalg.hpp"

#include <numbers>

namespace rdode {

class CosineBasis {
public:
    CosineBasis(int n_modes, int n_grid, double L) : N_(n_modes), M_(n_grid), L_(L) {
        if (n_modes < 1 || n_grid < n_modes) throw ValidationError("CosineBasis: need 1 <= N <= M");
        if (L <= 0.0) throw ValidationError("CosineBasis: domain length must be positive");
        table_.resize(static_cast<size_t>(M_) * N_);
        for (int k = 0; k < M_; ++k)
            for (int j = 0; j < N_; ++j)
                table_[static_cast<size_t>(k) * N_ + j] = std::cos(j * std::numbers::pi * (k + 0.5) / M_);
    }

    int modes() const { return N_; }
    int grid_points() const { return M_; }
    double domain_length() const { return L_; }
    double grid_x(int k) const { return (k + 0.5) * L_ / M_; }

    double mode_eigenvalue(int j) const {
        double kj = j * std::numbers::pi / L_;
        return kj * kj;
    }

    // Grid samples -> leading N cosine coefficients.
    Vec analyze(std::span<const double> values) const {
        if (static_cast<int>(values.size()) != M_) throw ValidationError("CosineBasis::analyze: size mismatch");
        Vec c(N_, 0.0);
        for (int k = 0; k < M_; ++k) {
            const double* row = &table_[static_cast<size_t>(k) * N_];
            double fk = values[k];
            for (int j = 0; j < N_; ++j) c[j] += fk * row[j];
        }
        c[0] /= M_;
        for (int j = 1; j < N_; ++j) c[j] *= 2.0 / M_;
        return c;
    }

    // Coefficients -> grid samples; `second_derivative` multiplies each mode
    // by -lambda_j first.
    Vec synthesize(std::span<const double> coeffs, bool second_derivative = false) const {
        if (static_cast<int>(coeffs.size()) > N_) throw ValidationError("CosineBasis::synthesize: too many coefficients");
        Vec weighted(coeffs.begin(), coeffs.end());
        if (second_derivative)
            for (size_t j = 0; j < weighted.size(); ++j) weighted[j] *= -mode_eigenvalue(static_cast<int>(j));
        Vec values(M_, 0.0);
        for (int k = 0; k < M_; ++k) {
            const double* row = &table_[static_cast<size_t>(k) * N_];
            double s = 0.0;
            for (size_t j = 0; j < weighted.size(); ++j) s += weighted[j] * row[j];
            values[k] = s;
        }
        return values;
    }

    // Point evaluation anywhere in [0, L] from coefficients.
    double evaluate(std::span<const double> coeffs, double x) const {
        double s = 0.0;
        for (size_t j = 0; j < coeffs.size(); ++j) s += coeffs[j] * std::cos(j * std::numbers::pi * x / L_);
        return s;
    }

private:
    int N_, M_;
    double L_;
    std::vector<double> table_; // table[k*N + j] = cos(j pi (k+1/2) / M)
};

// A d-component field kept in both representations; the grid twin is always
// the synthesis of the stored coefficients.
struct SpectralField {
    int components = 0;
    std::vector<Vec> coeffs; // per component, basis.modes() entries
    std::vector<Vec> values; // per component, basis.grid_points() entries

    static SpectralField zero(const CosineBasis& basis, int d) {
        SpectralField f;
        f.components = d;
        f.coeffs.assign(d, Vec(basis.modes(), 0.0));
        f.values.assign(d, Vec(basis.grid_points(), 0.0));
        return f;
    }

    static SpectralField from_values(const CosineBasis& basis, std::vector<Vec> vals) {
        SpectralField f;
        f.components = static_cast<int>(vals.size());
        f.values = std::move(vals);
        f.coeffs.reserve(f.components);
        for (const Vec& v : f.values) f.coeffs.push_back(basis.analyze(v));
        // Re-synthesize so both twins agree exactly even when M > N.
        for (int c = 0; c < f.components; ++c) f.values[c] = basis.synthesize(f.coeffs[c]);
        return f;
    }

    static SpectralField from_coeffs(const CosineBasis& basis, std::vector<Vec> cs) {
        SpectralField f;
        f.components = static_cast<int>(cs.size());
        f.coeffs = std::move(cs);
        f.values.reserve(f.components);
        for (const Vec& c : f.coeffs) f.values.push_back(basis.synthesize(c));
        return f;
    }

    double max_abs_coeff_diff(const SpectralField& other) const {
        double m = 0.0;
        for (int c = 0; c < components; ++c)
            for (size_t j = 0; j < coeffs[c].size(); ++j)
                m = std::max(m, std::abs(coeffs[c][j] - other.coeffs[c][j]));
        return m;
    }
};

} // namespace rdode
