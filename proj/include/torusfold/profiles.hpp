#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace torusfold {

struct NonPositiveWidth : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct LobeBalanceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DerivativeBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProfileEval {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// Scalar C^2 function bundle with closed-form value and first two
// derivatives. Outside [lo, hi] the value is the constant `outside_value`
// and both derivatives vanish identically.
struct SmoothProfile {
    enum class Kind { psi, phi, omega, mu, chi, zero };

    Kind kind = Kind::zero;
    double lo = 0.0;
    double hi = 0.0;
    double outside_value = 0.0;
    // Natural length unit of the template; finite-difference checks use
    // steps proportional to it.
    double width_scale = 1.0;
    // Interior joints of the piecewise template, in x units.
    std::vector<double> breakpoints;
    std::function<ProfileEval(double)> fn;

    ProfileEval eval(double x) const { return fn(x); }

    static SmoothProfile zero_profile() {
        SmoothProfile p;
        p.kind = Kind::zero;
        p.lo = -1.0;
        p.hi = 1.0;
        p.fn = [](double) { return ProfileEval{0.0, 0.0, 0.0}; };
        return p;
    }
};

namespace detail {

// Quintic smoothstep on [0,1] and its calculus.
inline double s2(double v) { return v * v * v * (10.0 + v * (-15.0 + 6.0 * v)); }
inline double s2_d(double v) {
    double w = v * (1.0 - v);
    return 30.0 * w * w;
}
inline double s2_dd(double v) { return 60.0 * v * (1.0 - v) * (1.0 - 2.0 * v); }
inline double s2_int(double v) {
    double v4 = v * v * v * v;
    return v4 * (2.5 + v * (-3.0 + v));
}

// C^3 unit transition 0 -> 1: derivative profile is a plateau of height
// kTableHeight with quintic ramps of width kTableRamp on both sides.
// sup|h'| = kTableHeight, sup|h''| = kTableHeight * 1.875 / kTableRamp.
constexpr double kTableRamp = 0.45;
constexpr double kTableHeight = 1.0 / (1.0 - kTableRamp); // 20/11

inline void table_step(double u, double& v, double& d1, double& d2) {
    const double tau = kTableRamp;
    const double m = kTableHeight;
    if (u <= 0.0) {
        v = 0.0;
        d1 = d2 = 0.0;
    } else if (u < tau) {
        double w = u / tau;
        v = m * tau * s2_int(w);
        d1 = m * s2(w);
        d2 = m * s2_d(w) / tau;
    } else if (u <= 1.0 - tau) {
        v = m * (u - 0.5 * tau);
        d1 = m;
        d2 = 0.0;
    } else if (u < 1.0) {
        double w = (1.0 - u) / tau;
        v = 1.0 - m * tau * s2_int(w);
        d1 = m * s2(w);
        d2 = -m * s2_d(w) / tau;
    } else {
        v = 1.0;
        d1 = d2 = 0.0;
    }
}

} // namespace detail

// psi: even bump of height 4 centred at 1/16 with support width 2*theta,
// template 4*exp(-t^4/(1-t^2)). The quartic exponent kills the first and
// second derivative at the centre while leaving a single interior critical
// point.
inline SmoothProfile build_psi(double theta) {
    if (!(theta > 0.0)) throw NonPositiveWidth("build_psi: theta must be positive");
    SmoothProfile p;
    p.kind = SmoothProfile::Kind::psi;
    p.lo = 1.0 / 16.0 - theta;
    p.hi = 1.0 / 16.0 + theta;
    p.width_scale = theta;
    p.fn = [theta](double x) -> ProfileEval {
        double t = (x - 1.0 / 16.0) / theta;
        double s = t * t;
        if (s >= 1.0) return {0.0, 0.0, 0.0};
        double om = 1.0 - s;
        double g = -s * s / om;
        if (g < -700.0) return {0.0, 0.0, 0.0};
        double value = 4.0 * std::exp(g);
        double gs = s * (s - 2.0) / (om * om);      // dg/ds
        double gss = -2.0 / (om * om * om);         // d2g/ds2
        double gt = 2.0 * t * gs;                   // dg/dt
        double gtt = 2.0 * gs + 4.0 * s * gss;      // d2g/dt2
        double d1 = value * gt / theta;
        double d2 = value * (gt * gt + gtt) / (theta * theta);
        return {value, d1, d2};
    };
    return p;
}

namespace detail {

// Shape constants of the phi' template in the scaled coordinate
// s = (x - 1/4)/delta. The template is a fixed C^2 piecewise polynomial:
//   [-1/4, -0.15]  ramp down to the left trough
//   [-0.15,-0.06]  trough plateau -NL
//   [-0.06, 0]     rise through (0, 1/2) with slope 6
//   [0, 1/8]       cubic 1/2 + 6s - 128 s^3, peak 1 at s = 1/8
//   [1/8, 3/8]     descent to the right trough
//   [3/8, 0.60]    trough plateau -NR
//   [0.60, 3/4]    ramp back to zero
// Trough depths NL, NR balance the signed area on each side of s = 0 so the
// antiderivative vanishes at 0 and at both support endpoints.
struct PhiShape {
    static constexpr double wA = 0.10;
    static constexpr double w1 = 0.06;
    static constexpr double wD = 0.25;
    static constexpr double wE = 0.225;
    static constexpr double wF = 0.15;

    double NL = 0.0;
    double NR = 0.0;
    double kappa = 0.0;
    double C3 = 0.0; // antiderivative offset of the rise piece
    double C1 = 0.0; // antiderivative value at the left support end
    double C7 = 0.0; // antiderivative value at the right support end
    double I38 = 0.0; // antiderivative at s = 3/8

    PhiShape() {
        // left balance: integral of phi' over [-1/4, 0] is zero
        NL = (w1 / 4.0 - 0.6 * w1 * w1) / (wA / 2.0 + 0.09 + w1 / 2.0);
        // right balance: integral over [0, 3/4] is zero
        NR = (13.0 / 128.0 + wD * (0.5 - 0.8 * wD * wD)) /
             (wD / 2.0 + wE + wF / 2.0);
        kappa = 6.0 / (1.0 + NR);
        C3 = -w1 * (-NL + (0.5 + NL) / 2.0 - 0.6 * w1);
        C1 = C3 + NL * (0.09 + wA / 2.0);
        I38 = 13.0 / 128.0 + wD * (1.0 - (1.0 + NR) * (0.5 + kappa / 120.0));
        C7 = I38 - NR * (wE + wF / 2.0);
        if (!(NL > 0.0 && NL < 0.74 && NR > 0.0 && NR < 0.74)) {
            throw LobeBalanceFailure("phi template: trough amplitude out of range");
        }
        if (std::fabs(C1) > 1e-15 || std::fabs(C7) > 1e-15) {
            throw LobeBalanceFailure("phi template: lobe areas do not balance");
        }
    }

    // E: quintic with E(0)=E'(0)=E''(0)=0, E(1)=0, E'(1)=1, E''(1)=0.
    static double e_val(double u) { return u * u * u * (-4.0 + u * (7.0 - 3.0 * u)); }
    static double e_d(double u) { return u * u * (-12.0 + u * (28.0 - 15.0 * u)); }
    static double e_int(double u) {
        double u4 = u * u * u * u;
        return u4 * (-1.0 + u * (1.4 - 0.5 * u));
    }

    // B: quintic with B(0)=B'(0)=0, B''(0)=1 and B,B',B'' zero at 1.
    static double b_val(double u) {
        double om = 1.0 - u;
        return 0.5 * u * u * om * om * om;
    }
    static double b_d(double u) {
        double om = 1.0 - u;
        return u * om * om * (1.0 - 2.5 * u);
    }
    static double b_int(double u) {
        double u3 = u * u * u;
        return 0.5 * u3 * (1.0 / 3.0 + u * (-0.75 + u * (0.6 - u / 6.0)));
    }

    // template value (phi' in s units), its s derivative, and antiderivative
    void eval(double s, double& f, double& fd, double& fint) const {
        if (s <= -0.25 || s >= 0.75) {
            f = fd = fint = 0.0;
            return;
        }
        if (s < -0.15) { // P1: ramp down
            double v = (s + 0.25) / wA;
            f = -NL * s2(v);
            fd = -NL * s2_d(v) / wA;
            fint = -NL * wA * s2_int(v) + C1;
        } else if (s < -w1) { // P2: plateau
            f = -NL;
            fd = 0.0;
            fint = C3 + NL * (-w1 - s);
        } else if (s < 0.0) { // P3: rise to (0, 1/2)
            double u = (s + w1) / w1;
            f = -NL + (0.5 + NL) * s2(u) + 6.0 * w1 * e_val(u);
            fd = ((0.5 + NL) * s2_d(u) + 6.0 * w1 * e_d(u)) / w1;
            fint = w1 * (-NL * u + (0.5 + NL) * s2_int(u) + 6.0 * w1 * e_int(u)) + C3;
        } else if (s < 0.125) { // P4: cubic through the fold peak
            f = 0.5 + 6.0 * s - 128.0 * s * s * s;
            fd = 6.0 - 384.0 * s * s;
            fint = s * (0.5 + s * (3.0 - 32.0 * s * s));
        } else if (s < 0.375) { // P5: descent
            double u = (s - 0.125) / wD;
            double h = s2(u) + kappa * b_val(u);
            double hd = s2_d(u) + kappa * b_d(u);
            f = 1.0 - (1.0 + NR) * h;
            fd = -(1.0 + NR) * hd / wD;
            fint = 13.0 / 128.0 + wD * (u - (1.0 + NR) * (s2_int(u) + kappa * b_int(u)));
        } else if (s < 0.60) { // P6: plateau
            f = -NR;
            fd = 0.0;
            fint = I38 - NR * (s - 0.375);
        } else { // P7: ramp back to zero
            double v = (0.75 - s) / wF;
            f = -NR * s2(v);
            fd = NR * s2_d(v) / wF;
            fint = C7 + NR * wF * s2_int(v);
        }
    }
};

inline const PhiShape& phi_shape() {
    static const PhiShape shape;
    return shape;
}

} // namespace detail

// phi: compactly supported antiderivative of a fixed two-lobe template.
// phi(1/4) = 0, phi'(1/4) = 1/2, phi'(1/4 + delta/8) = 1 is the unique
// maximum of phi' inside the level band [1/2, 1], and -3/4 <= phi' <= 1.
inline SmoothProfile build_phi(double delta) {
    if (!(delta > 0.0)) throw NonPositiveWidth("build_phi: delta must be positive");
    const detail::PhiShape& shape = detail::phi_shape();
    SmoothProfile p;
    p.kind = SmoothProfile::Kind::phi;
    p.lo = 0.25 - delta / 4.0;
    p.hi = 0.25 + 0.75 * delta;
    p.width_scale = delta;
    const double knots[] = {-0.25, -0.15, -detail::PhiShape::w1, 0.0,
                            0.125, 0.375, 0.60, 0.75};
    for (double k : knots) p.breakpoints.push_back(0.25 + delta * k);
    const double lo = p.lo, hi = p.hi;
    p.fn = [delta, lo, hi, &shape](double x) -> ProfileEval {
        if (x <= lo || x >= hi) return {0.0, 0.0, 0.0};
        double s = (x - 0.25) / delta;
        if (s <= -0.25 || s >= 0.75) return {0.0, 0.0, 0.0};
        double f, fd, fint;
        shape.eval(s, f, fd, fint);
        return {delta * fint, f, fd / delta};
    };
    return p;
}

// omega: even cutoff equal to 1 on [-l, l] and 0 outside [-2l, 2l], with
// sup|omega'| < 2/l and sup|omega''| < 8/l^2.
inline SmoothProfile build_omega(double l) {
    if (!(l > 0.0)) throw NonPositiveWidth("build_omega: l must be positive");
    SmoothProfile p;
    p.kind = SmoothProfile::Kind::omega;
    p.lo = -2.0 * l;
    p.hi = 2.0 * l;
    p.width_scale = l;
    p.breakpoints = {-l, l};
    p.fn = [l](double x) -> ProfileEval {
        double a = std::fabs(x);
        if (a >= 2.0 * l) return {0.0, 0.0, 0.0};
        if (a <= l) return {1.0, 0.0, 0.0};
        double v, d1, d2;
        detail::table_step((a - l) / l, v, d1, d2);
        double sign = x < 0.0 ? -1.0 : 1.0;
        return {1.0 - v, -sign * d1 / l, -d2 / (l * l)};
    };
    return p;
}

// mu: even transition equal to 0 on [-r/2, r/2] and 1 for |t| >= r, with
// sup|mu'| < 4/r.
inline SmoothProfile build_mu(double r) {
    if (!(r > 0.0)) throw NonPositiveWidth("build_mu: r must be positive");
    SmoothProfile p;
    p.kind = SmoothProfile::Kind::mu;
    p.lo = -r;
    p.hi = r;
    p.outside_value = 1.0;
    p.width_scale = r / 2.0;
    p.breakpoints = {-r / 2.0, r / 2.0};
    p.fn = [r](double x) -> ProfileEval {
        double a = std::fabs(x);
        if (a >= r) return {1.0, 0.0, 0.0};
        if (a <= 0.5 * r) return {0.0, 0.0, 0.0};
        double v, d1, d2;
        detail::table_step((a - 0.5 * r) / (0.5 * r), v, d1, d2);
        double sign = x < 0.0 ? -1.0 : 1.0;
        return {v, sign * 2.0 * d1 / r, 4.0 * d2 / (r * r)};
    };
    return p;
}

// chi: collapse cutoff, 1 on [-rho/2, rho/2] and 0 for |t| >= rho, with
// sup|chi'| < 4/rho. Reflected mu template.
inline SmoothProfile build_chi(double rho) {
    if (!(rho > 0.0)) throw NonPositiveWidth("build_chi: rho must be positive");
    SmoothProfile p;
    p.kind = SmoothProfile::Kind::chi;
    p.lo = -rho;
    p.hi = rho;
    p.width_scale = rho / 2.0;
    p.breakpoints = {-rho / 2.0, rho / 2.0};
    p.fn = [rho](double x) -> ProfileEval {
        double a = std::fabs(x);
        if (a >= rho) return {0.0, 0.0, 0.0};
        if (a <= 0.5 * rho) return {1.0, 0.0, 0.0};
        double v, d1, d2;
        detail::table_step((a - 0.5 * rho) / (0.5 * rho), v, d1, d2);
        double sign = x < 0.0 ? -1.0 : 1.0;
        return {1.0 - v, -sign * 2.0 * d1 / rho, -4.0 * d2 / (rho * rho)};
    };
    return p;
}

// Sup of |d1| or |d2| over the support: dense grid scan plus local ternary
// refinement around the best grid point.
inline double sup_abs_derivative(const SmoothProfile& p, int order,
                                 std::size_t grid = 200000) {
    if (order != 1 && order != 2) {
        throw std::invalid_argument("sup_abs_derivative: order must be 1 or 2");
    }
    if (p.hi <= p.lo) return 0.0;
    auto pick = [order](const ProfileEval& e) {
        return std::fabs(order == 1 ? e.d1 : e.d2);
    };
    double best = 0.0;
    double best_x = p.lo;
    const double step = (p.hi - p.lo) / static_cast<double>(grid);
    for (std::size_t i = 0; i <= grid; ++i) {
        double x = p.lo + step * static_cast<double>(i);
        double v = pick(p.eval(x));
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    // ternary search on the bracketing interval
    double a = std::max(p.lo, best_x - step);
    double b = std::min(p.hi, best_x + step);
    for (int it = 0; it < 120; ++it) {
        double m1 = a + (b - a) / 3.0;
        double m2 = b - (b - a) / 3.0;
        if (pick(p.eval(m1)) < pick(p.eval(m2))) {
            a = m1;
        } else {
            b = m2;
        }
    }
    best = std::max(best, pick(p.eval(0.5 * (a + b))));
    return best;
}

// Throws unless sup|d^order| stays below cap with at least min_margin
// relative slack.
inline void enforce_derivative_cap(const SmoothProfile& p, int order, double cap,
                                   double min_margin = 0.01) {
    double sup = sup_abs_derivative(p, order, 50000);
    if (!(sup < cap * (1.0 - min_margin))) {
        throw DerivativeBudgetExceeded("profile derivative cap violated");
    }
}

struct DerivativeCheckResult {
    double max_rel_d1 = 0.0;
    double max_rel_d2 = 0.0;
    std::size_t points = 0;
};

// Central-difference consistency check of d1/d2 against the value channel.
// Steps are taken in the template's natural unit, and sample points stay
// clear of piecewise joints where the third derivative may jump. The
// three-point stencil for d2 uses a larger step than the d1 stencil: at
// 1e-5 the second difference of an O(1) value channel is dominated by
// rounding noise. Errors are measured relative to the sup of the
// respective derivative over the sample set.
inline DerivativeCheckResult check_derivative_consistency(
    const SmoothProfile& p, std::size_t n_points = 1000,
    double normalized_step = 1e-5, double normalized_step_d2 = 1e-4) {
    DerivativeCheckResult res;
    if (p.hi <= p.lo) return res;
    const double h = normalized_step * p.width_scale;
    const double h2 = normalized_step_d2 * p.width_scale;

    std::vector<double> edges;
    edges.push_back(p.lo);
    for (double b : p.breakpoints) {
        if (b > p.lo && b < p.hi) edges.push_back(b);
    }
    edges.push_back(p.hi);
    std::sort(edges.begin(), edges.end());

    std::vector<double> xs;
    xs.reserve(n_points + edges.size() * 2);
    const double total = p.hi - p.lo;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        double a = edges[e] + 10.0 * h2;
        double b = edges[e + 1] - 10.0 * h2;
        if (b <= a) continue;
        auto count = static_cast<std::size_t>(
            std::ceil(static_cast<double>(n_points) * (edges[e + 1] - edges[e]) / total));
        count = std::max<std::size_t>(count, 3);
        for (std::size_t i = 0; i < count; ++i) {
            xs.push_back(a + (b - a) * (static_cast<double>(i) + 0.5) /
                                 static_cast<double>(count));
        }
    }

    double scale1 = 0.0, scale2 = 0.0;
    std::vector<ProfileEval> evals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        evals[i] = p.eval(xs[i]);
        scale1 = std::max(scale1, std::fabs(evals[i].d1));
        scale2 = std::max(scale2, std::fabs(evals[i].d2));
    }
    if (scale1 == 0.0) scale1 = 1.0;
    if (scale2 == 0.0) scale2 = 1.0;

    for (std::size_t i = 0; i < xs.size(); ++i) {
        double vp = p.eval(xs[i] + h).value;
        double vm = p.eval(xs[i] - h).value;
        double fd1 = (vp - vm) / (2.0 * h);
        // d2 stencil at both steps; the small one is truncation-accurate,
        // the large one rides above value rounding noise.
        double fd2a = (vp - 2.0 * evals[i].value + vm) / (h * h);
        double fd2b = (p.eval(xs[i] + h2).value - 2.0 * evals[i].value +
                       p.eval(xs[i] - h2).value) /
                      (h2 * h2);
        double err2 = std::min(std::fabs(fd2a - evals[i].d2), std::fabs(fd2b - evals[i].d2));
        res.max_rel_d1 = std::max(res.max_rel_d1, std::fabs(fd1 - evals[i].d1) / scale1);
        res.max_rel_d2 = std::max(res.max_rel_d2, err2 / scale2);
    }
    res.points = xs.size();
    return res;
}

inline void profile_to_csv(const SmoothProfile& p, std::size_t n_points,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("profile_to_csv: cannot open " + path);
    out << "x,value,d1,d2\n";
    double span = p.hi - p.lo;
    double a = p.lo - 0.05 * span;
    double b = p.hi + 0.05 * span;
    char buf[140];
    for (std::size_t i = 0; i <= n_points; ++i) {
        double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_points);
        ProfileEval e = p.eval(x);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", x, e.value, e.d1,
                      e.d2);
        out << buf;
    }
}

} // namespace torusfold
