#pragma once

// Characteristic polynomials and their roots. These back every spectrum in
// the library, so the root finder reports residuals instead of silently
// returning garbage on hard cases.

#include <complex>
#include <numbers>

#include "rdode/linalg.hpp"

namespace rdode {

using Complex = std::complex<double>;

namespace tol {
inline constexpr double root_rel = 1e-10;    // relative residual accepted for a root
inline constexpr int aberth_max_iter = 200;
inline constexpr double degenerate = 1e-9;   // margin below which a sign test is marginal
} // namespace tol

// Monic polynomial lambda^n + c[0] lambda^(n-1) + ... + c[n-1].
struct CharPoly {
    Vec coeffs;

    int degree() const { return static_cast<int>(coeffs.size()); }

    Complex eval(Complex z) const {
        Complex p = 1.0;
        for (double c : coeffs) p = p * z + c;
        return p;
    }
    Complex derivative(Complex z) const {
        Complex p = 1.0, dp = 0.0;
        for (double c : coeffs) {
            dp = dp * z + p;
            p = p * z + c;
        }
        return dp;
    }
};

// Faddeev-LeVerrier recurrence, run on the rescaled matrix A/s to dodge the
// cancellation the recurrence suffers on badly scaled input. The constant
// coefficient is cross-checked against a cofactor determinant for n <= 4.
inline CharPoly char_poly(const Mat& a) {
    if (!a.square()) throw ValidationError("char_poly: matrix not square");
    if (!a.all_finite()) throw NumericalError("char_poly: non-finite entries");
    if (a.max_abs() > 1e100) throw NumericalError("char_poly: entries too large, coefficients would overflow");
    int n = a.rows();
    double s = a.max_abs();
    if (s == 0.0) s = 1.0;
    // Keep dyadic fixtures exact: scale by a power of two.
    s = std::exp2(std::ceil(std::log2(s)));
    Mat scaled = a;
    scaled *= 1.0 / s;

    CharPoly p;
    p.coeffs.assign(n, 0.0);
    Mat m = scaled;
    double c = -trace(m);
    if (n >= 1) p.coeffs[0] = c;
    for (int k = 2; k <= n; ++k) {
        Mat shifted = m;
        for (int i = 0; i < n; ++i) shifted(i, i) += c;
        m = scaled * shifted;
        c = -trace(m) / k;
        p.coeffs[k - 1] = c;
    }
    if (n <= 4) {
        double d = det_cofactor(scaled);
        double expect = (n % 2 == 0) ? d : -d;
        if (std::abs(p.coeffs[n - 1] - expect) > 1e-8 * std::max(1.0, std::abs(expect)))
            throw NumericalError("char_poly: determinant cross-check failed");
        p.coeffs[n - 1] = expect; // keep the cofactor value, exact on small fixtures
    }
    double factor = s;
    for (int k = 0; k < n; ++k) {
        p.coeffs[k] *= factor;
        factor *= s;
    }
    return p;
}

namespace detail {

// Fujiwara bound on root magnitudes of a monic polynomial.
inline double root_radius(const CharPoly& p) {
    double r = 0.0;
    int n = p.degree();
    for (int k = 0; k < n; ++k) {
        double c = std::abs(p.coeffs[k]);
        if (c > 0.0) r = std::max(r, std::pow(c, 1.0 / (k + 1)));
    }
    return 2.0 * r + 1e-30;
}

inline void sort_roots(std::vector<Complex>& roots) {
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

} // namespace detail

// All complex roots. Closed form through degree 2, Aberth-Ehrlich
// simultaneous iteration from a circle initialization for degree >= 3.
// Roots come back sorted by descending real part.
inline std::vector<Complex> poly_roots(const CharPoly& p) {
    int n = p.degree();
    if (n < 1) throw ValidationError("poly_roots: degree must be >= 1");
    std::vector<Complex> roots;
    if (n == 1) {
        roots = {Complex(-p.coeffs[0], 0.0)};
        return roots;
    }
    if (n == 2) {
        double b = p.coeffs[0], c = p.coeffs[1];
        Complex disc = std::sqrt(Complex(b * b - 4.0 * c, 0.0));
        // Pick the larger-magnitude root first to avoid cancellation.
        Complex q = (b >= 0.0) ? (-b - disc) * 0.5 : (-b + disc) * 0.5;
        if (std::abs(q) > 0.0)
            roots = {q, Complex(c, 0.0) / q};
        else
            roots = {Complex(0.0, 0.0), Complex(0.0, 0.0)};
        detail::sort_roots(roots);
        return roots;
    }

    double radius = detail::root_radius(p);
    roots.resize(n);
    for (int k = 0; k < n; ++k) {
        double angle = 2.0 * std::numbers::pi * k / n + 0.4;
        roots[k] = radius * Complex(std::cos(angle), std::sin(angle));
    }

    double coeff_scale = 1.0 + inf_norm(p.coeffs);
    // Residuals are judged against max(coefficient scale, per-root evaluation
    // magnitude): |P(z)| cannot drop below the Horner noise floor of
    // |z|^n + sum |c_k| |z|^(n-k) when the root is large.
    auto residual_bound = [&](Complex z) {
        double az = std::abs(z);
        double b = 1.0;
        for (double c : p.coeffs) b = b * az + std::abs(c);
        return tol::root_rel * std::max(coeff_scale, b);
    };
    for (int iter = 0; iter < tol::aberth_max_iter; ++iter) {
        double max_rel_step = 0.0;
        for (int i = 0; i < n; ++i) {
            Complex pi = p.eval(roots[i]);
            Complex dpi = p.derivative(roots[i]);
            if (dpi == Complex(0.0, 0.0)) {
                roots[i] += Complex(1e-8 * radius, 1e-8 * radius);
                max_rel_step = 1.0;
                continue;
            }
            Complex w = pi / dpi;
            Complex s = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (roots[i] - roots[j]);
            Complex corr = w / (1.0 - w * s);
            roots[i] -= corr;
            max_rel_step = std::max(max_rel_step, std::abs(corr) / (1.0 + std::abs(roots[i])));
        }
        if (max_rel_step < 1e-14) break;
        bool all_small = true;
        for (int i = 0; i < n; ++i)
            if (std::abs(p.eval(roots[i])) > residual_bound(roots[i])) { all_small = false; break; }
        if (all_small && max_rel_step < 1e-10) break;
    }

    for (int i = 0; i < n; ++i) {
        double res = std::abs(p.eval(roots[i]));
        if (res > 1e3 * residual_bound(roots[i]))
            throw NumericalError("poly_roots: Aberth iteration did not converge, residual " + std::to_string(res));
    }
    detail::sort_roots(roots);
    return roots;
}

inline std::vector<Complex> eigenvalues(const Mat& a) { return poly_roots(char_poly(a)); }

// Spectral bound s(A): the largest real part over the spectrum.
inline double spectral_abscissa(const Mat& a) {
    if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
    if (a.rows() == 1) return a(0, 0);
    return eigenvalues(a).front().real();
}

} // namespace rdode
