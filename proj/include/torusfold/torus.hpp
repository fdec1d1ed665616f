#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace torusfold {

using Vec = std::vector<double>;

constexpr std::size_t kMaxDim = 64;

// Representative of t in [0, 1).
inline double wrap01(double t) {
    double v = t - std::floor(t);
    if (v >= 1.0) v -= 1.0;
    if (v < 0.0) v += 1.0;
    return v;
}

// Signed displacement from a to the representative of t nearest a; lies in
// [-1/2, 1/2].
inline double wrap_diff(double t, double a) {
    double d = t - a;
    return d - std::round(d);
}

// Point of T^n stored by its canonical representative in [0, 1)^n.
struct TorusPoint {
    Vec x;

    TorusPoint() = default;
    explicit TorusPoint(Vec coords) : x(std::move(coords)) {
        if (x.size() < 1 || x.size() > kMaxDim) {
            throw std::invalid_argument("TorusPoint: dimension out of range");
        }
        canonicalize();
    }

    std::size_t dim() const { return x.size(); }
    double operator[](std::size_t i) const { return x[i]; }

    void canonicalize() {
        for (double& c : x) c = wrap01(c);
    }

    // Representative in R^n minimizing Euclidean distance to the anchor.
    Vec lift_near(const Vec& anchor) const {
        assert(anchor.size() == x.size());
        Vec out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = anchor[i] + wrap_diff(x[i], anchor[i]);
        }
        return out;
    }
};

inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    assert(a.dim() == b.dim());
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        double d = wrap_diff(a.x[i], b.x[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

inline double norm(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Dense square matrix, row major.
struct Mat {
    std::size_t n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static Mat identity(std::size_t dim) {
        Mat m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Vec mat_vec(const Mat& m, const Vec& v) {
    assert(v.size() == m.n);
    Vec out(m.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
    assert(a.n == b.n);
    Mat c(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t k = 0; k < a.n; ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < a.n; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

// Determinant via LU with partial pivoting. Kept separate from any closed
// form so the two can be checked against each other.
inline double lu_determinant(Mat m) {
    const std::size_t n = m.n;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::fabs(m(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(k, j));
            det = -det;
        }
        det *= m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = m(i, k) / m(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return det;
}

// Spectral norm by power iteration on M^T M; enough accuracy for the
// sampled operator-norm gap diagnostics.
inline double operator_norm(const Mat& m, int iters = 60) {
    const std::size_t n = m.n;
    Vec v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(n) + i);
    double nv = norm(v);
    for (double& c : v) c /= nv;
    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
        Vec w = mat_vec(m, v);
        // multiply by M^T
        Vec u(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += m(i, j) * w[i];
            u[j] = s;
        }
        double nu = norm(u);
        if (nu == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] / nu;
        sigma = std::sqrt(nu);
    }
    return sigma;
}

} // namespace torusfold
