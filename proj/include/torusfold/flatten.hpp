#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "torusfold/critical.hpp"
#include "torusfold/maps.hpp"
#include "torusfold/params.hpp"
#include "torusfold/profiles.hpp"
#include "torusfold/rng.hpp"
#include "torusfold/torus.hpp"

namespace torusfold {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionViolated : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Shared state of the flattening construction: the implicit-graph machinery,
// the certified graph radius W, the final radii b > l, and the radial cutoff.
class FlattenKit {
public:
    explicit FlattenKit(std::shared_ptr<const FoldMap> fold)
        : fold_(std::move(fold)), crit_(std::make_shared<CriticalSet>(*fold_)) {
        const MapParams& mp = fold_->params();
        W_ = crit_->find_W_radius(mp.eps_prime);
        b_ = std::min(mp.b, 0.45 * W_);
        l_ = std::min(mp.l, 0.45 * b_);
        if (!(mp.eps_prime < mp.eps / 50.0)) {
            throw ConfigInvalid("flatten: eps' must stay below eps/50");
        }
        if (!(l_ > 0.0 && l_ < b_ && 2.0 * b_ < W_ && b_ < 0.25)) {
            throw ConfigInvalid("flatten: radii must satisfy 0 < l < b and 2b < W");
        }
        omega_ = build_omega(l_);
        axial_inner_ = mp.r / 8.0;
        axial_outer_ = mp.r / 2.0;
    }

    const FoldMap& fold() const { return *fold_; }
    const CriticalSet& critical() const { return *crit_; }
    double W() const { return W_; }
    double b() const { return b_; }
    double l() const { return l_; }
    double axial_inner() const { return axial_inner_; }
    double axial_outer() const { return axial_outer_; }
    const SmoothProfile& omega() const { return omega_; }

    // u(x~) - 1/2 = omega(|x~|) (Phi(x~) - 1/2); identically zero outside
    // the 2l disk, computed without touching Phi there.
    double shift(const Vec& xt) const {
        double nx = norm(xt);
        if (nx >= 2.0 * l_) return 0.0;
        double w = omega_.eval(nx).value;
        if (w == 0.0) return 0.0;
        return w * (crit_->eval_Phi(xt) - 0.5);
    }

    double u_value(const Vec& xt) const { return 0.5 + shift(xt); }

    Vec grad_u(const Vec& xt) const {
        Vec g(xt.size(), 0.0);
        double nx = norm(xt);
        if (nx >= 2.0 * l_) return g;
        ProfileEval oe = omega_.eval(nx);
        if (oe.value == 0.0 && oe.d1 == 0.0) return g;
        double dev = crit_->eval_Phi(xt) - 0.5;
        Vec gp = crit_->grad_Phi(xt);
        for (std::size_t k = 0; k < xt.size(); ++k) {
            double radial = nx > 1e-300 ? oe.d1 * (xt[k] / nx) * dev : 0.0;
            g[k] = radial + oe.value * gp[k];
        }
        return g;
    }

    // Axial cutoff around x_n = 1/2: 1 on |x_n-1/2| <= r/8, 0 beyond r/2.
    void axial(double xn, double& value, double& slope) const {
        double d = wrap_diff(xn, 0.5);
        double ad = std::fabs(d);
        if (ad >= axial_outer_) {
            value = 0.0;
            slope = 0.0;
            return;
        }
        if (ad <= axial_inner_) {
            value = 1.0;
            slope = 0.0;
            return;
        }
        double width = axial_outer_ - axial_inner_;
        double v, d1, d2;
        detail::table_step((ad - axial_inner_) / width, v, d1, d2);
        value = 1.0 - v;
        slope = -(d < 0.0 ? -1.0 : 1.0) * d1 / width;
    }

private:
    std::shared_ptr<const FoldMap> fold_;
    std::shared_ptr<const CriticalSet> crit_;
    double W_ = 0.0, b_ = 0.0, l_ = 0.0;
    double axial_inner_ = 0.0, axial_outer_ = 0.0;
    SmoothProfile omega_;
};

// The flattening diffeomorphism F: shifts the last coordinate by
// -nu(x_n) * (u(x~) - 1/2). The axial factor nu confines the support to a
// compact slab around {x_n = 1/2}, so F is the identity (bit for bit) on a
// neighbourhood of the invariant hyperplane {x_n = 0}; its determinant
// stays within 5e-13 of 1 because l is sized against the certified
// quadratic envelope of Phi.
class FlattenMap : public MapBundle {
public:
    explicit FlattenMap(std::shared_ptr<const FlattenKit> kit) : kit_(std::move(kit)) {}

    std::string name() const override { return "F"; }
    std::size_t dim() const override { return kit_->fold().dim(); }

    TorusPoint eval(const TorusPoint& x) const override {
        const std::size_t n = dim();
        double nu, nud;
        kit_->axial(x[n - 1], nu, nud);
        if (nu == 0.0) return x;
        Vec xt = lift_block(x);
        double sh = kit_->shift(xt);
        if (sh == 0.0) return x;
        Vec y = x.x;
        y[n - 1] = x[n - 1] - nu * sh;
        return TorusPoint(std::move(y));
    }

    Mat jacobian(const TorusPoint& x) const override {
        const std::size_t n = dim();
        Mat j = Mat::identity(n);
        double nu, nud;
        kit_->axial(x[n - 1], nu, nud);
        if (nu == 0.0 && nud == 0.0) return j;
        Vec xt = lift_block(x);
        double sh = kit_->shift(xt);
        Vec gu = kit_->grad_u(xt);
        for (std::size_t k = 0; k + 1 < n; ++k) j(n - 1, k) = -nu * gu[k];
        j(n - 1, n - 1) = 1.0 - nud * sh;
        return j;
    }

    // Explicit inverse: x_n = y_n + nu(x_n) shift(y~), solved by a fixed
    // point iteration that contracts at rate |nu' shift| <~ 1e-12.
    TorusPoint inverse(const TorusPoint& y) const {
        const std::size_t n = dim();
        Vec yt = lift_block(y);
        double sh = kit_->shift(yt);
        if (sh == 0.0) return y;
        double xn = y[n - 1];
        for (int it = 0; it < 4; ++it) {
            double nu, nud;
            kit_->axial(xn, nu, nud);
            xn = y[n - 1] + nu * sh;
        }
        Vec x = y.x;
        x[n - 1] = xn;
        return TorusPoint(std::move(x));
    }

    const FlattenKit& kit() const { return *kit_; }

private:
    std::shared_ptr<const FlattenKit> kit_;

    Vec lift_block(const TorusPoint& x) const {
        const std::size_t n = dim();
        Vec xt(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) xt[k] = wrap_diff(x[k], 0.0);
        return xt;
    }
};

// H = F o f.
class FlattenedFoldMap : public MapBundle {
public:
    FlattenedFoldMap(std::shared_ptr<const FoldMap> fold,
                     std::shared_ptr<const FlattenKit> kit)
        : fold_(std::move(fold)), flatten_(std::make_shared<FlattenMap>(kit)) {}

    std::string name() const override { return "H"; }
    std::size_t dim() const override { return fold_->dim(); }

    TorusPoint eval(const TorusPoint& x) const override {
        return flatten_->eval(fold_->eval(x));
    }

    Mat jacobian(const TorusPoint& x) const override {
        TorusPoint fx = fold_->eval(x);
        return mat_mul(flatten_->jacobian(fx), fold_->jacobian(x));
    }

    const FoldMap& fold() const { return *fold_; }
    const FlattenMap& flatten() const { return *flatten_; }

    // det DH = det Df * (1 - nu' shift); the second factor never vanishes,
    // so S_H and S_f coincide.
    double det_jacobian(const TorusPoint& x) const {
        TorusPoint fx = fold_->eval(x);
        Mat jf = flatten_->jacobian(fx);
        return fold_->det_jacobian(x) * jf(dim() - 1, dim() - 1);
    }

private:
    std::shared_ptr<const FoldMap> fold_;
    std::shared_ptr<const FlattenMap> flatten_;
};

// The collapse perturbation g^: equal to H outside B(p, rho); inside, the
// last coordinate of the image is blended toward 1/2 so that the whole
// ball B(p, rho/2) lands exactly on {x_n = 1/2}.
class CollapseMap : public MapBundle {
public:
    CollapseMap(std::shared_ptr<const FlattenedFoldMap> h, double rho)
        : h_(std::move(h)), rho_(rho), center_(base_point(h_->dim())) {
        const MapParams& mp = h_->fold().params();
        if (!(rho_ > 0.0 && rho_ < h_->flatten().kit().l())) {
            throw ConfigInvalid("collapse: rho must lie in (0, l)");
        }
        (void)mp;
        chi_ = build_chi(rho_);
    }

    std::string name() const override { return "g_collapse"; }
    std::size_t dim() const override { return h_->dim(); }
    double rho() const { return rho_; }
    const SmoothProfile& chi() const { return chi_; }
    const FlattenedFoldMap& base() const { return *h_; }

    TorusPoint eval(const TorusPoint& x) const override {
        double dist = torus_distance(x, center_);
        if (dist >= rho_) return h_->eval(x);
        TorusPoint y = h_->eval(x);
        double c = chi_.eval(dist).value;
        if (c == 0.0) return y;
        const std::size_t n = dim();
        double dn = wrap_diff(y[n - 1], 0.5);
        Vec out = y.x;
        out[n - 1] = 0.5 + dn * (1.0 - c);
        return TorusPoint(std::move(out));
    }

    // Analytic rows from H; the blended last row via central differences.
    Mat jacobian(const TorusPoint& x) const override {
        Mat j = h_->jacobian(x);
        double dist = torus_distance(x, center_);
        if (dist >= rho_) return j;
        const std::size_t n = dim();
        const double h = rho_ * 1e-4;
        TorusPoint base = eval(x);
        for (std::size_t k = 0; k < n; ++k) {
            Vec xp = x.x, xm = x.x;
            xp[k] += h;
            xm[k] -= h;
            double vp = wrap_diff(eval(TorusPoint(xp))[n - 1], base[n - 1]);
            double vm = wrap_diff(eval(TorusPoint(xm))[n - 1], base[n - 1]);
            j(n - 1, k) = (vp - vm) / (2.0 * h);
        }
        return j;
    }

private:
    std::shared_ptr<const FlattenedFoldMap> h_;
    double rho_;
    TorusPoint center_;
    SmoothProfile chi_;
};

struct C2Distance {
    double sup0 = 0.0; // |u - 1/2|
    double sup1 = 0.0; // first derivatives of u
    double sup2 = 0.0; // second derivatives of u
};

// Sampled C^2 distance data of F to the identity: the three suprema of the
// displacement field u - 1/2. Samples concentrate where the field lives
// (the 2l disk); second derivatives come from differences of the analytic
// gradient at a step tied to l.
inline C2Distance c2_distance_F_Id(const FlattenKit& kit, std::size_t samples,
                                   std::uint64_t rng_seed) {
    C2Distance out;
    const std::size_t m = kit.fold().dim() - 1;
    Rng rng(rng_seed);
    const double l = kit.l();
    const double h = l / 3.0;
    for (std::size_t i = 0; i < samples; ++i) {
        Vec xt(m);
        double rad;
        if (i % 4 == 3) {
            rad = 3.0 * l * rng.uniform(); // just outside the support too
        } else {
            rad = 2.0 * l * std::pow(rng.uniform(), 1.0 / static_cast<double>(m));
        }
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            xt[k] = rng.normal();
            s += xt[k] * xt[k];
        }
        s = std::sqrt(s);
        for (std::size_t k = 0; k < m; ++k) xt[k] = s > 0.0 ? xt[k] * rad / s : 0.0;

        out.sup0 = std::max(out.sup0, std::fabs(kit.shift(xt)));
        Vec g = kit.grad_u(xt);
        for (double c : g) out.sup1 = std::max(out.sup1, std::fabs(c));
        for (std::size_t k = 0; k < m; ++k) {
            Vec xp = xt, xm = xt;
            xp[k] += h;
            xm[k] -= h;
            Vec gp = kit.grad_u(xp);
            Vec gm = kit.grad_u(xm);
            for (std::size_t kk = 0; kk < m; ++kk) {
                out.sup2 = std::max(out.sup2, std::fabs(gp[kk] - gm[kk]) / (2.0 * h));
            }
        }
    }
    return out;
}

struct C1C2Gap {
    double gap0 = 0.0;
    double gap1 = 0.0;
    double gap2 = 0.0;
};

// Sampled C^0/C^1/C^2 gaps between the collapse map and H. Only the last
// coordinate differs; the C^1 row uses finite differences of the blended
// coordinate against the analytic H row, and the C^2 channel measures
// second differences of the discrepancy along each axis.
inline C1C2Gap c1_c2_gap(const CollapseMap& g, const FlattenedFoldMap& h,
                         std::size_t samples, std::uint64_t rng_seed) {
    C1C2Gap out;
    const std::size_t n = g.dim();
    const double rho = g.rho();
    TorusPoint center = base_point(n);
    Rng rng(rng_seed);
    const double hstep = rho / 20.0;

    auto discrepancy = [&](const TorusPoint& x) {
        TorusPoint yg = g.eval(x);
        TorusPoint yh = h.eval(x);
        return wrap_diff(yg[n - 1], yh[n - 1]);
    };

    for (std::size_t i = 0; i < samples; ++i) {
        Vec x(n);
        double rad = 1.2 * rho * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = rng.normal();
            s += x[k] * x[k];
        }
        s = std::sqrt(s);
        for (std::size_t k = 0; k < n; ++k) x[k] = center[k] + (s > 0.0 ? x[k] * rad / s : 0.0);
        TorusPoint tp(x);

        out.gap0 = std::max(out.gap0, std::fabs(discrepancy(tp)));

        Mat jg = g.jacobian(tp);
        Mat jh = h.jacobian(tp);
        double row = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double dd = jg(n - 1, k) - jh(n - 1, k);
            row += dd * dd;
        }
        out.gap1 = std::max(out.gap1, std::sqrt(row));

        for (std::size_t k = 0; k < n; ++k) {
            Vec xp = tp.x, xm = tp.x;
            xp[k] += hstep;
            xm[k] -= hstep;
            double d2 = (discrepancy(TorusPoint(xp)) - 2.0 * discrepancy(tp) +
                         discrepancy(TorusPoint(xm))) /
                        (hstep * hstep);
            out.gap2 = std::max(out.gap2, std::fabs(d2));
        }
    }
    return out;
}

// Surface dump of u (or Phi via the kit's critical set) over the first two
// block coordinates, for plotting.
inline void u_surface_to_csv(const FlattenKit& kit, double radius, std::size_t per_axis,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("u_surface_to_csv: cannot open " + path);
    const std::size_t m = kit.fold().dim() - 1;
    out << "z1,z2,u,phi_graph\n";
    char buf[120];
    for (std::size_t i = 0; i <= per_axis; ++i) {
        for (std::size_t j = 0; j <= (m > 1 ? per_axis : 0); ++j) {
            Vec z(m, 0.0);
            z[0] = -radius + 2.0 * radius * static_cast<double>(i) /
                                 static_cast<double>(per_axis);
            if (m > 1) {
                z[1] = -radius + 2.0 * radius * static_cast<double>(j) /
                                     static_cast<double>(per_axis);
            }
            double uval = kit.u_value(z);
            double phival = std::numeric_limits<double>::quiet_NaN();
            if (norm(z) < 1.9 * kit.critical().implicit_patch_radius()) {
                try {
                    phival = kit.critical().eval_Phi(z);
                } catch (const NoRoot&) {
                } catch (const BranchAmbiguity&) {
                }
            }
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", z[0],
                          m > 1 ? z[1] : 0.0, uval, phival);
            out << buf;
        }
    }
}

struct DemoReport {
    double r = 0.0;
    double eps = 0.0;
    double sup_c0 = 0.0;      // sup |f - g|
    double bound_c0 = 0.0;    // r^2
    double sup_c1 = 0.0;      // sup |d_n (f - g)|
    double bound_c1 = 0.0;    // 7 r
    bool collapse_exact = false;  // g(B(0, r/2)) inside {x_n = 0}
    bool agrees_outside = false;  // g = f outside B(0, r)
    bool pass = false;
};

// Normal-form demonstration in R^n: f(x) = (x~, x_n^2) against
// g(x) = (x~, x_n^2 mu(x_n)). The two maps differ only in the last
// coordinate, so the scan is one dimensional.
inline DemoReport nf_fold_demo(double r, double eps, std::size_t n,
                               std::size_t grid = 200001) {
    if (!(r > 0.0) || !(7.0 * r < eps) || !(r * r < eps)) {
        throw PreconditionViolated("nf_fold_demo: need r > 0, 7r < eps and r^2 < eps");
    }
    (void)n;
    SmoothProfile mu = build_mu(r);
    DemoReport rep;
    rep.r = r;
    rep.eps = eps;
    rep.bound_c0 = r * r;
    rep.bound_c1 = 7.0 * r;
    rep.collapse_exact = true;
    rep.agrees_outside = true;
    for (std::size_t i = 0; i < grid; ++i) {
        double xn = -1.3 * r + 2.6 * r * static_cast<double>(i) / static_cast<double>(grid - 1);
        ProfileEval me = mu.eval(xn);
        double diff = xn * xn * (1.0 - me.value);
        double ddiff = 2.0 * xn * (1.0 - me.value) - xn * xn * me.d1;
        rep.sup_c0 = std::max(rep.sup_c0, std::fabs(diff));
        rep.sup_c1 = std::max(rep.sup_c1, std::fabs(ddiff));
        if (std::fabs(xn) <= 0.5 * r && xn * xn * me.value != 0.0) rep.collapse_exact = false;
        if (std::fabs(xn) >= r && diff != 0.0) rep.agrees_outside = false;
    }
    rep.pass = rep.sup_c0 < rep.bound_c0 && rep.sup_c1 < rep.bound_c1 &&
               rep.collapse_exact && rep.agrees_outside;
    return rep;
}

} // namespace torusfold
