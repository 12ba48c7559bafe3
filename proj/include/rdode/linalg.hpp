#pragma once

// Small dense linear algebra for reaction networks: matrices are m-by-m with
// m rarely above 6, so everything is direct (cofactors, Gaussian elimination,
// cyclic Jacobi). No external dependencies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdode {

using Vec = std::vector<double>;

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}
    Mat(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = static_cast<int>(rows.size());
        cols_ = rows_ ? static_cast<int>(rows.begin()->size()) : 0;
        a_.reserve(static_cast<size_t>(rows_) * cols_);
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != cols_) throw ValidationError("Mat: ragged initializer");
            a_.insert(a_.end(), r.begin(), r.end());
        }
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diagonal(std::span<const double> d) {
        Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    std::span<const double> data() const { return a_; }

    Mat& operator+=(const Mat& o) {
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (double& x : a_) x *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, double s) { return a *= s; }
    friend Mat operator*(double s, Mat a) { return a *= s; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        Mat c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                double aik = a(i, k);
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    Vec operator*(std::span<const double> x) const {
        Vec y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    Mat transposed() const {
        Mat t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    // Principal submatrix picked by row/column index set.
    Mat principal(std::span<const int> idx) const {
        Mat s(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
        for (size_t i = 0; i < idx.size(); ++i)
            for (size_t j = 0; j < idx.size(); ++j) s(static_cast<int>(i), static_cast<int>(j)) = (*this)(idx[i], idx[j]);
        return s;
    }

    Mat block(int r0, int c0, int nr, int nc) const {
        Mat s(nr, nc);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j) s(i, j) = (*this)(r0 + i, c0 + j);
        return s;
    }

    double max_abs() const { return inf_norm(a_); }

    bool all_finite() const {
        return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); });
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline double trace(const Mat& m) {
    double t = 0.0;
    for (int i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

// Cofactor expansion; intended for n <= 4 where it is exact in the dyadic
// fixtures used throughout.
inline double det_cofactor(const Mat& m) {
    int n = m.rows();
    if (n == 0) return 1.0;
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (n == 3)
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
             - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
             + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    double d = 0.0;
    std::vector<int> idx(n - 1);
    for (int j = 0; j < n; ++j) {
        int k = 0;
        for (int c = 0; c < n; ++c)
            if (c != j) idx[k++] = c;
        Mat minor(n - 1, n - 1);
        for (int i = 1; i < n; ++i)
            for (int c = 0; c < n - 1; ++c) minor(i - 1, c) = m(i, idx[c]);
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        d += sign * m(0, j) * det_cofactor(minor);
    }
    return d;
}

// LU with partial pivoting; returns determinant and leaves the factorization
// usable for solves.
inline double det_lu(Mat m) {
    int n = m.rows();
    double d = 1.0;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            d = -d;
        }
        if (m(k, k) == 0.0) return 0.0;
        d *= m(k, k);
        for (int i = k + 1; i < n; ++i) {
            double f = m(i, k) / m(k, k);
            for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return d;
}

inline double det(const Mat& m) {
    if (!m.square()) throw ValidationError("det: matrix not square");
    return m.rows() <= 4 ? det_cofactor(m) : det_lu(m);
}

// Solve A x = b by Gaussian elimination with partial pivoting.
inline Vec solve(Mat a, Vec b) {
    int n = a.rows();
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (std::abs(a(p, k)) < std::numeric_limits<double>::min())
            throw NumericalError("solve: singular matrix");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        for (int i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            b[i] -= f * b[k];
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
        b[i] = s / a(i, i);
    }
    return b;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline Vec sym_eigenvalues(Mat s) {
    int n = s.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-30 * (1.0 + s.max_abs() * s.max_abs())) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (s(p, q) == 0.0) continue;
                double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (int k = 0; k < n; ++k) {
                    double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
    }
    Vec ev(n);
    for (int i = 0; i < n; ++i) ev[i] = s(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace rdode
