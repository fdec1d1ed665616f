#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "torusfold/params.hpp"
#include "torusfold/profiles.hpp"
#include "torusfold/torus.hpp"

namespace torusfold {

// A self-map of T^n with an analytic Jacobian.
class MapBundle {
public:
    virtual ~MapBundle() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual TorusPoint eval(const TorusPoint& x) const = 0;
    virtual Mat jacobian(const TorusPoint& x) const = 0;
};

// x -> (8 x1, 2 x2, ..., 2 xn) mod 1.
class AffineMap : public MapBundle {
public:
    explicit AffineMap(std::size_t n) : n_(n) {}

    std::string name() const override { return "A"; }
    std::size_t dim() const override { return n_; }

    TorusPoint eval(const TorusPoint& x) const override {
        Vec y(n_);
        y[0] = 8.0 * x[0];
        for (std::size_t i = 1; i < n_; ++i) y[i] = 2.0 * x[i];
        return TorusPoint(std::move(y));
    }

    Mat jacobian(const TorusPoint&) const override {
        Mat j(n_);
        j(0, 0) = 8.0;
        for (std::size_t i = 1; i < n_; ++i) j(i, i) = 2.0;
        return j;
    }

private:
    std::size_t n_;
};

// The singular perturbation of A: last coordinate gets
// 2 x_n - phi(x_n) * psi(|x~|^2), everything evaluated on the lift of x
// nearest the distinguished point p.
class FoldMap : public MapBundle {
public:
    FoldMap(MapParams mp, SmoothProfile psi, SmoothProfile phi)
        : mp_(std::move(mp)),
          psi_(std::move(psi)),
          phi_(std::move(phi)),
          anchor_(base_point(mp_.n).x) {}

    explicit FoldMap(const MapParams& mp)
        : FoldMap(mp, build_psi(mp.theta), build_phi(mp.delta)) {}

    std::string name() const override { return "f"; }
    std::size_t dim() const override { return mp_.n; }
    const MapParams& params() const { return mp_; }
    const SmoothProfile& psi() const { return psi_; }
    const SmoothProfile& phi() const { return phi_; }
    const Vec& anchor() const { return anchor_; }

    // Sum of the squared first n-1 coordinates, taken on the symmetric
    // fundamental domain [-1/2, 1/2)^{n-1}. The bump shell has radius below
    // 0.29, so this chart contains it with margin; the lift of points near p
    // agrees with this one coordinatewise.
    double radial_arg(const TorusPoint& x) const {
        double q = 0.0;
        for (std::size_t k = 0; k + 1 < mp_.n; ++k) {
            double c = wrap_diff(x[k], 0.0);
            q += c * c;
        }
        return q;
    }

    // 2 - phi'(x_n) psi(q): the determinant factor whose zero set is the
    // critical set.
    double residual(const TorusPoint& x) const {
        double xn = anchor_.back() + wrap_diff(x[mp_.n - 1], anchor_.back());
        return 2.0 - phi_.eval(xn).d1 * psi_.eval(radial_arg(x)).value;
    }

    TorusPoint eval(const TorusPoint& x) const override {
        const std::size_t n = mp_.n;
        Vec y(n);
        y[0] = 8.0 * x[0];
        for (std::size_t i = 1; i < n; ++i) y[i] = 2.0 * x[i];
        double xn = anchor_.back() + wrap_diff(x[n - 1], anchor_.back());
        ProfileEval pe = phi_.eval(xn);
        if (pe.value != 0.0) {
            y[n - 1] -= pe.value * psi_.eval(radial_arg(x)).value;
        }
        return TorusPoint(std::move(y));
    }

    Mat jacobian(const TorusPoint& x) const override {
        const std::size_t n = mp_.n;
        Mat j(n);
        j(0, 0) = 8.0;
        for (std::size_t i = 1; i < n; ++i) j(i, i) = 2.0;
        double xn = anchor_.back() + wrap_diff(x[n - 1], anchor_.back());
        ProfileEval pe = phi_.eval(xn);
        ProfileEval se = psi_.eval(radial_arg(x));
        if (pe.value != 0.0 && se.d1 != 0.0) {
            for (std::size_t k = 0; k + 1 < n; ++k) {
                double c = wrap_diff(x[k], 0.0);
                j(n - 1, k) = -2.0 * c * pe.value * se.d1;
            }
        }
        j(n - 1, n - 1) = 2.0 - pe.d1 * se.value;
        return j;
    }

    // Closed form 8 * 2^(n-2) * (2 - phi' psi).
    double det_jacobian(const TorusPoint& x) const {
        return 8.0 * std::ldexp(1.0, static_cast<int>(mp_.n) - 2) * residual(x);
    }

    // True iff the perturbation term is identically zero at x, i.e. the
    // point is outside the support shell of phi * psi.
    bool outside_perturbation(const TorusPoint& x) const {
        double xn = anchor_.back() + wrap_diff(x[mp_.n - 1], anchor_.back());
        if (phi_.eval(xn).value == 0.0 && phi_.eval(xn).d1 == 0.0) return true;
        double q = radial_arg(x);
        return q <= psi_.lo || q >= psi_.hi;
    }

private:
    MapParams mp_;
    SmoothProfile psi_;
    SmoothProfile phi_;
    Vec anchor_;
};

// Central-difference Jacobian on the lift of x; used as the independent
// check of the analytic Jacobians.
inline Mat fd_jacobian(const MapBundle& map, const TorusPoint& x, double h = 1e-7) {
    const std::size_t n = map.dim();
    Mat j(n);
    TorusPoint base = map.eval(x);
    for (std::size_t k = 0; k < n; ++k) {
        Vec xp = x.x, xm = x.x;
        xp[k] += h;
        xm[k] -= h;
        TorusPoint fp = map.eval(TorusPoint(xp));
        TorusPoint fm = map.eval(TorusPoint(xm));
        for (std::size_t i = 0; i < n; ++i) {
            // difference taken on the lift of the images nearest each other
            double dp = wrap_diff(fp[i], base[i]);
            double dm = wrap_diff(fm[i], base[i]);
            j(i, k) = (dp - dm) / (2.0 * h);
        }
    }
    return j;
}

} // namespace torusfold
