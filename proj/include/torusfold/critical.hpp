#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "torusfold/maps.hpp"
#include "torusfold/params.hpp"
#include "torusfold/profiles.hpp"
#include "torusfold/rng.hpp"
#include "torusfold/torus.hpp"

namespace torusfold {

struct LevelOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NotCritical : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoRoot : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BranchAmbiguity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDenominator : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FoldClass { Fold, NonFold };

constexpr double kResidualTol = 1e-8;  // acceptance tolerance for "on S_f"
constexpr double kFoldTol = 1e-8;      // |phi'' psi| below this means NonFold

struct CriticalSample {
    TorusPoint point;
    double residual = 0.0;
    double level = 0.0;  // x_n
    double radius = 0.0; // sqrt(radial_arg)
    FoldClass fold = FoldClass::Fold;
};

struct LevelRadii {
    double level = 0.0;
    double d = 0.0; // inner squared radius
    double D = 0.0; // outer squared radius
    double c = 0.0; // right endpoint of the level interval
};

// Critical-set machinery for a fold map: level interval, level radii, sphere
// sampling, fold classification, and the implicit graph functions.
class CriticalSet {
public:
    explicit CriticalSet(const FoldMap& map)
        : mp_(map.params()), psi_(map.psi()), phi_(map.phi()) {
        c_ = solve_right_endpoint();
        patch_radius_ = patch_radius();
    }

    const MapParams& params() const { return mp_; }
    double right_endpoint() const { return c_; }
    double implicit_patch_radius() const { return patch_radius_; }

    double residual_at(double level, double q) const {
        return 2.0 - phi_.eval(level).d1 * psi_.eval(q).value;
    }

    // Two squared radii d <= D with psi(d) = psi(D) = 2/phi'(level). They
    // are solved through the symmetric template variable: with
    // y = ((q - 1/16)/theta)^2 the equation becomes y^2/(1-y) = L,
    // L = log(4 phi'(level) / 2), which is monotone and well conditioned
    // down to the peak.
    LevelRadii solve_level_radii(double level) const {
        double slope = phi_.eval(level).d1;
        if (slope < 0.5 - 1e-12) {
            throw LevelOutOfRange("solve_level_radii: phi'(level) < 1/2");
        }
        if (slope > 1.0 + 1e-12) {
            throw LevelOutOfRange("solve_level_radii: phi'(level) > 1");
        }
        double target = 2.0 / slope; // in [2, 4]
        double big_l = std::log(4.0 / target);
        double y = solve_template_y(big_l);
        double t = std::sqrt(y);
        LevelRadii out;
        out.level = level;
        out.d = 1.0 / 16.0 - mp_.theta * t;
        out.D = 1.0 / 16.0 + mp_.theta * t;
        out.c = c_;
        return out;
    }

    FoldClass classify_fold(const CriticalSample& s) const {
        if (std::fabs(s.residual) > kResidualTol) {
            throw NotCritical("classify_fold: residual exceeds tolerance");
        }
        double q = s.radius * s.radius;
        double transversality = phi_.eval(s.level).d2 * psi_.eval(q).value;
        return std::fabs(transversality) > kFoldTol ? FoldClass::Fold : FoldClass::NonFold;
    }

    // Sweeps the level interval [1/4, c] (always touching both endpoints and
    // the equator level 1/4 + delta/8) and emits points on both spheres per
    // level. Directions are seeded deterministically.
    std::vector<CriticalSample> sample_critical_set(std::size_t levels,
                                                    std::size_t points_per_sphere,
                                                    std::uint64_t seed = 1234) const {
        if (levels < 1 || points_per_sphere < 1) {
            throw std::invalid_argument("sample_critical_set: counts must be >= 1");
        }
        std::vector<double> level_list;
        level_list.reserve(levels + 3);
        for (std::size_t i = 0; i < levels; ++i) {
            double u = levels == 1 ? 0.0
                                   : static_cast<double>(i) / static_cast<double>(levels - 1);
            level_list.push_back(0.25 + (c_ - 0.25) * u);
        }
        level_list.push_back(equator_level());

        std::vector<CriticalSample> out;
        out.reserve(level_list.size() * points_per_sphere * 2);
        for (std::size_t li = 0; li < level_list.size(); ++li) {
            double level = level_list[li];
            LevelRadii lr = solve_level_radii(level);
            Rng rng(Rng::derive(seed, li));
            emit_sphere(level, lr.d, points_per_sphere, rng, out);
            if (lr.D != lr.d) emit_sphere(level, lr.D, points_per_sphere, rng, out);
        }
        return out;
    }

    // Implicit graph x_n = phi_im(x~) through (p~, 1/4): solves
    // 2 - phi'(t) psi(|x~|^2) = 0 on the rising branch [1/4, 1/4 + delta/8).
    double eval_phi_implicit(const Vec& xt) const {
        double q = dot(xt, xt);
        ensure_in_patch(xt);
        double psival = psi_.eval(q).value;
        if (psival <= 2.0 + 1e-9) {
            throw NoRoot("eval_phi_implicit: psi(|x~|^2) <= 2, no branch point");
        }
        const double peak = equator_level();
        double t = 0.25;
        for (int it = 0; it < 80; ++it) {
            ProfileEval pe = phi_.eval(t);
            double g = 2.0 - pe.d1 * psival;
            if (std::fabs(g) < 1e-13) return t;
            double gd = -pe.d2 * psival;
            if (gd == 0.0) break;
            double tn = t - g / gd;
            if (tn < 0.25 - 1e-12 || tn > peak + 1e-12) {
                throw BranchAmbiguity("eval_phi_implicit: iterate left the branch");
            }
            t = std::min(std::max(tn, 0.25), peak);
        }
        double g = 2.0 - phi_.eval(t).d1 * psival;
        if (std::fabs(g) < 1e-11) return t;
        throw BranchAmbiguity("eval_phi_implicit: Newton failed to converge");
    }

    // Analytic gradient -2 x_k phi'(t) psi'(q) / (phi''(t) psi(q)).
    Vec grad_phi_implicit(const Vec& xt) const {
        double t = eval_phi_implicit(xt);
        double q = dot(xt, xt);
        ProfileEval pe = phi_.eval(t);
        ProfileEval se = psi_.eval(q);
        double denom = pe.d2 * se.value;
        if (std::fabs(denom) < 1e-12) {
            throw DegenerateDenominator("grad_phi_implicit: phi''(t) psi(q) ~ 0");
        }
        Vec g(xt.size());
        for (std::size_t k = 0; k < xt.size(); ++k) {
            g[k] = -2.0 * xt[k] * pe.d1 * se.d1 / denom;
        }
        return g;
    }

    // Last coordinate of the image of the critical graph near f(p) as a
    // function of the image first block: Phi(z) with the lift of A^{-1}
    // through p~.
    double eval_Phi(const Vec& zt) const {
        Vec wt = pullback(zt);
        double t = eval_phi_implicit(wt);
        double q = dot(wt, wt);
        return 2.0 * t - phi_.eval(t).value * psi_.eval(q).value;
    }

    Vec grad_Phi(const Vec& zt) const {
        Vec wt = pullback(zt);
        double t = eval_phi_implicit(wt);
        double q = dot(wt, wt);
        Vec gphi = grad_phi_implicit(wt);
        ProfileEval pe = phi_.eval(t);
        ProfileEval se = psi_.eval(q);
        Vec g(zt.size());
        for (std::size_t k = 0; k < zt.size(); ++k) {
            double dw = 2.0 * gphi[k] - (pe.d1 * gphi[k] * se.value + pe.value * se.d1 * 2.0 * wt[k]);
            g[k] = dw * (k == 0 ? 0.125 : 0.5);
        }
        return g;
    }

    double equator_level() const { return 0.25 + mp_.delta / 8.0; }

    // Largest lattice-tested radius w such that on B(0~, w) the image graph
    // satisfies |Phi - 1/2| < eps', all first and second differences stay
    // below eps', and the quadratic/linear envelope bounds hold.
    double find_W_radius(double eps_prime, std::size_t lattice_points = 10000,
                         std::uint64_t seed = 99) const {
        if (!(eps_prime > 0.0)) throw OutOfRange("find_W_radius: eps' must be positive");
        double cap = 1.96 * patch_radius_;
        for (int step = 0; step < 90; ++step) {
            double w = cap * std::pow(0.92, step);
            if (w < 1e-9) break;
            if (w_radius_ok(w, eps_prime, lattice_points, seed)) return w;
        }
        throw NotFound("find_W_radius: no radius passed the bounds");
    }

    bool w_radius_ok(double w, double eps_prime, std::size_t lattice_points,
                     std::uint64_t seed) const {
        const std::size_t m = mp_.n - 1;
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(w * 1e9)));
        double h1 = std::max(1e-7, 1e-3 * w);
        double h2 = std::max(1e-6, 3e-3 * w);
        for (std::size_t i = 0; i < lattice_points; ++i) {
            Vec z(m);
            double rad = w * std::pow(rng.uniform(), 1.0 / static_cast<double>(m));
            if (i == 0) rad = 0.0;
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                z[k] = rng.normal();
                s += z[k] * z[k];
            }
            s = std::sqrt(s);
            for (std::size_t k = 0; k < m; ++k) z[k] = s > 0.0 ? z[k] * rad / s : 0.0;
            double nz = norm(z);
            double phi_val;
            try {
                phi_val = eval_Phi(z);
            } catch (const NoRoot&) {
                return false;
            } catch (const BranchAmbiguity&) {
                return false;
            }
            double dev = std::fabs(phi_val - 0.5);
            if (dev >= eps_prime) return false;
            if (dev > eps_prime * nz * nz + 1e-18) return false;
            for (std::size_t k = 0; k < m; ++k) {
                Vec zp = z, zm = z;
                zp[k] += h1;
                zm[k] -= h1;
                if (norm(zp) >= cap_radius() || norm(zm) >= cap_radius()) continue;
                double dphi = (eval_Phi(zp) - eval_Phi(zm)) / (2.0 * h1);
                if (std::fabs(dphi) >= eps_prime) return false;
                if (std::fabs(dphi) > eps_prime * nz + 1e-14) return false;
            }
            for (std::size_t k = 0; k < m; ++k) {
                Vec zp = z, zm = z;
                zp[k] += h2;
                zm[k] -= h2;
                if (norm(zp) >= cap_radius() || norm(zm) >= cap_radius()) continue;
                Vec gp = grad_Phi(zp);
                Vec gm = grad_Phi(zm);
                for (std::size_t kk = 0; kk < m; ++kk) {
                    double d2 = (gp[kk] - gm[kk]) / (2.0 * h2);
                    if (std::fabs(d2) >= eps_prime) return false;
                }
            }
        }
        return true;
    }

private:
    MapParams mp_;
    SmoothProfile psi_;
    SmoothProfile phi_;
    double c_ = 0.0;
    double patch_radius_ = 0.0;

    double cap_radius() const { return 2.0 * patch_radius_; }

    // c solves phi'(c) = 1/2 on the decreasing side of the peak: bracketed
    // bisection followed by Newton polish.
    double solve_right_endpoint() const {
        double lo = equator_level();
        double hi = 0.25 + mp_.delta * 0.375;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            if (phi_.eval(mid).d1 > 0.5) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        double t = 0.5 * (lo + hi);
        for (int it = 0; it < 8; ++it) {
            ProfileEval pe = phi_.eval(t);
            double g = pe.d1 - 0.5;
            if (pe.d2 == 0.0) break;
            t -= g / pe.d2;
        }
        return t;
    }

    // Ball around p~ whose squared-radius range keeps psi well above 2.
    double patch_radius() const {
        double band = 0.70 * 0.745 * mp_.theta; // stay inside 70% of the psi >= 2 band
        double up = std::sqrt(1.0 / 16.0 + band) - 0.25;
        double down = 0.25 - std::sqrt(1.0 / 16.0 - band);
        return std::min(up, down);
    }

    void ensure_in_patch(const Vec& xt) const {
        Vec anchor(xt.size(), 0.0);
        anchor[0] = 0.25;
        double s = 0.0;
        for (std::size_t k = 0; k < xt.size(); ++k) {
            double d = xt[k] - anchor[k];
            s += d * d;
        }
        if (std::sqrt(s) > patch_radius_ * (1.0 + 1e-9)) {
            throw NoRoot("implicit patch: point outside the domain ball");
        }
    }

    // A^{-1} branch through p~ of the first block of (z, 0).
    Vec pullback(const Vec& zt) const {
        Vec wt(zt.size());
        wt[0] = 0.25 + zt[0] / 8.0;
        for (std::size_t k = 1; k < zt.size(); ++k) wt[k] = zt[k] / 2.0;
        return wt;
    }

    // Monotone solve of y^2/(1-y) = L on [0, 1).
    static double solve_template_y(double big_l) {
        if (big_l <= 0.0) return 0.0;
        double lo = 0.0, hi = 0.999999;
        auto g = [big_l](double y) { return y * y / (1.0 - y) - big_l; };
        while (g(hi) < 0.0 && hi < 1.0 - 1e-12) hi = 0.5 * (hi + 1.0);
        for (int it = 0; it < 40; ++it) {
            double mid = 0.5 * (lo + hi);
            if (g(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        double y = 0.5 * (lo + hi);
        for (int it = 0; it < 30; ++it) {
            double om = 1.0 - y;
            double val = y * y / om - big_l;
            double der = y * (2.0 - y) / (om * om);
            if (der <= 0.0) break;
            double yn = y - val / der;
            if (yn <= 0.0 || yn >= 1.0) break;
            if (std::fabs(yn - y) < 1e-17) {
                y = yn;
                break;
            }
            y = yn;
        }
        return y;
    }

    void emit_sphere(double level, double q, std::size_t count, Rng& rng,
                     std::vector<CriticalSample>& out) const {
        const std::size_t n = mp_.n;
        double rad = std::sqrt(std::max(q, 0.0));
        for (std::size_t i = 0; i < count; ++i) {
            Vec x(n, 0.0);
            if (n == 2) {
                x[0] = (i % 2 == 0) ? rad : -rad;
                if (count == 1) x[0] = rad;
            } else {
                double s = 0.0;
                for (std::size_t k = 0; k + 1 < n; ++k) {
                    x[k] = rng.normal();
                    s += x[k] * x[k];
                }
                s = std::sqrt(s);
                if (s == 0.0) {
                    x[0] = rad;
                } else {
                    for (std::size_t k = 0; k + 1 < n; ++k) x[k] *= rad / s;
                }
            }
            x[n - 1] = level;
            CriticalSample cs;
            cs.point = TorusPoint(x);
            // radial argument of the emitted point (symmetric chart)
            double qq = 0.0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                double c = wrap_diff(cs.point[k], 0.0);
                qq += c * c;
            }
            cs.level = level;
            cs.radius = std::sqrt(qq);
            cs.residual = residual_at(level, qq);
            cs.fold = classify_fold(cs);
            out.push_back(cs);
        }
    }
};

inline void critical_samples_to_csv(const std::vector<CriticalSample>& samples,
                                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("critical_samples_to_csv: cannot open " + path);
    out << "level,radius";
    if (!samples.empty()) {
        for (std::size_t k = 0; k < samples.front().point.dim(); ++k) out << ",x" << k;
    }
    out << ",residual,fold\n";
    char buf[64];
    for (const CriticalSample& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.level);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", s.radius);
        out << buf;
        for (std::size_t k = 0; k < s.point.dim(); ++k) {
            std::snprintf(buf, sizeof(buf), ",%.17g", s.point[k]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g", s.residual);
        out << buf;
        out << (s.fold == FoldClass::Fold ? ",fold" : ",nonfold") << "\n";
    }
}

} // namespace torusfold
