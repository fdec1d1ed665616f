#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "torusfold/maps.hpp"
#include "torusfold/params.hpp"
#include "torusfold/rng.hpp"
#include "torusfold/torus.hpp"

namespace torusfold {

struct ZeroVector : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unstable cone of index n-1: the tail (v_2,...,v_n) is a-dominated by v_1.
inline bool in_cone(const Vec& v, double a) {
    double tail = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) tail += v[i] * v[i];
    double head = std::fabs(v[0]);
    if (head == 0.0 && tail == 0.0) throw ZeroVector("in_cone: zero vector");
    return std::sqrt(tail) < a * head;
}

// Unit vector in the closed cone. Half of the draws sit exactly on the
// boundary sphere ||tail|| = a |v1|, the rest are rejection-sampled from
// the uniform sphere measure restricted to the cone.
inline Vec sample_cone_vector(std::size_t n, double a, Rng& rng, bool boundary) {
    Vec v(n, 0.0);
    if (n == 1) {
        v[0] = rng.uniform() < 0.5 ? 1.0 : -1.0;
        return v;
    }
    if (boundary) {
        double tail_norm = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            v[i] = rng.normal();
            tail_norm += v[i] * v[i];
        }
        tail_norm = std::sqrt(tail_norm);
        double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        if (tail_norm == 0.0) {
            v[0] = sign;
            return v;
        }
        for (std::size_t i = 1; i < n; ++i) v[i] *= a / tail_norm;
        v[0] = sign;
        double nv = norm(v);
        for (double& c : v) c /= nv;
        return v;
    }
    for (;;) {
        double tail = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = rng.normal();
            if (i > 0) tail += v[i] * v[i];
        }
        if (v[0] == 0.0) continue;
        if (std::sqrt(tail) <= a * std::fabs(v[0])) {
            double nv = norm(v);
            for (double& c : v) c /= nv;
            return v;
        }
    }
}

struct PointReport {
    Vec point;
    double worst_ratio = 0.0;   // post-image tail/head ratio, max over samples
    double worst_growth = 0.0;  // ||Jv||/||v||, min over samples
    Vec worst_ratio_vector;
    Vec worst_growth_vector;
    std::size_t samples = 0;

    bool pass(double a, double growth_floor = 7.0) const {
        return worst_ratio < a && worst_growth > growth_floor;
    }
};

// Pushes m closed-cone unit vectors through the Jacobian at x and records
// the worst post-image ratio and growth factor.
inline PointReport check_point(const MapBundle& map, const TorusPoint& x, double a,
                               std::size_t m, std::uint64_t rng_seed) {
    if (m < 1) throw std::invalid_argument("check_point: m must be >= 1");
    const std::size_t n = map.dim();
    Mat j = map.jacobian(x);
    Rng rng(rng_seed);

    PointReport rep;
    rep.point = x.x;
    rep.worst_growth = std::numeric_limits<double>::infinity();

    auto push = [&](const Vec& v) {
        Vec u = mat_vec(j, v);
        double tail = 0.0;
        for (std::size_t i = 1; i < n; ++i) tail += u[i] * u[i];
        double ratio = std::sqrt(tail) / std::fabs(u[0]);
        double growth = norm(u) / norm(v);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_ratio_vector = v;
        }
        if (growth < rep.worst_growth) {
            rep.worst_growth = growth;
            rep.worst_growth_vector = v;
        }
        ++rep.samples;
    };

    // deterministic extreme rays first
    Vec e1(n, 0.0);
    e1[0] = 1.0;
    push(e1);
    for (std::size_t i = 1; i < n && rep.samples < m; ++i) {
        Vec v(n, 0.0);
        v[0] = 1.0;
        v[i] = a;
        double nv = norm(v);
        for (double& c : v) c /= nv;
        push(v);
        if (rep.samples < m) {
            v[i] = -v[i];
            push(v);
        }
    }
    while (rep.samples < m) {
        push(sample_cone_vector(n, a, rng, (rep.samples % 2) == 0));
    }
    return rep;
}

struct CertReport {
    std::string map_id;
    double a = 0.0;
    std::size_t lattice_size = 0;      // number of base points tested
    std::size_t samples_per_point = 0;
    std::size_t violations = 0;
    double worst_ratio_margin = 0.0;   // min over points of (a - worst_ratio)
    double worst_growth_margin = 0.0;  // min over points of (worst_growth - 7)
    double worst_ball_ratio = 0.0;     // worst ratio over the B(p,r) lattice
    double analytic_ball_bound = 0.0;  // a/4 + 2 r ((1+a)/8) delta M + 5a/8
    std::uint64_t seed = 0;
    bool param_gate_passed = true;
    std::vector<PointReport> violation_witnesses;
    double points_per_second = 0.0;    // not serialized; reporting only
};

// Deterministic base-point set: a lattice inside B(p, r), a lattice across
// the perturbation shell (where the Jacobian is non-diagonal), and random
// torus points.
inline std::vector<std::pair<TorusPoint, bool>> cone_base_points(
    const MapParams& mp, std::size_t grid_density, std::uint64_t seed) {
    const std::size_t n = mp.n;
    std::vector<std::pair<TorusPoint, bool>> pts; // flag: inside B(p,r)
    TorusPoint p = base_point(n);
    Rng rng(Rng::derive(seed, 0xba5e));

    // ball lattice (random directions, stratified radii)
    std::size_t ball_count = grid_density;
    for (std::size_t i = 0; i < ball_count; ++i) {
        Vec x(n);
        double rad = mp.r * (static_cast<double>(i) + 0.5) / static_cast<double>(ball_count);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = rng.normal();
            s += x[k] * x[k];
        }
        s = std::sqrt(s);
        for (std::size_t k = 0; k < n; ++k) x[k] = p[k] + x[k] * rad / s;
        pts.emplace_back(TorusPoint(x), true);
    }

    // shell lattice: radial-squared coordinate sweeps the psi support,
    // level sweeps the phi support
    std::size_t shell_count = grid_density;
    for (std::size_t i = 0; i < shell_count; ++i) {
        double t = -0.98 + 1.96 * rng.uniform();
        double q = 1.0 / 16.0 + mp.theta * t;
        double level = 0.25 + mp.delta * (-0.24 + 0.98 * rng.uniform());
        Vec dir(n - 1, 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            dir[k] = rng.normal();
            s += dir[k] * dir[k];
        }
        s = std::sqrt(s);
        Vec x(n);
        double rad = std::sqrt(q);
        for (std::size_t k = 0; k + 1 < n; ++k) x[k] = dir[k] * rad / s;
        x[n - 1] = level;
        TorusPoint tp(x);
        pts.emplace_back(tp, torus_distance(tp, p) < mp.r);
    }

    // random torus points
    for (std::size_t i = 0; i < grid_density; ++i) {
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k) x[k] = rng.uniform();
        TorusPoint tp(x);
        pts.emplace_back(tp, torus_distance(tp, p) < mp.r);
    }
    return pts;
}

inline double cone_analytic_ball_bound(const MapParams& mp) {
    return mp.a / 4.0 + 2.0 * mp.r * ((1.0 + mp.a) / 8.0) * mp.delta * mp.M +
           5.0 * mp.a / 8.0;
}

// Cone invariance and expansion certification over a deterministic lattice
// plus random points. Chunked deterministically, so the outcome does not
// depend on the worker count.
inline CertReport certify_cones(const MapBundle& map, const MapParams& mp,
                                const SmoothProfile& psi, double a,
                                std::size_t grid_density, std::size_t samples_per_point,
                                std::uint64_t rng_seed,
                                unsigned threads = 1) {
    CertReport rep;
    rep.map_id = map.name();
    rep.a = a;
    rep.samples_per_point = samples_per_point;
    rep.seed = rng_seed;
    rep.analytic_ball_bound = cone_analytic_ball_bound(mp);

    ConstraintReport gate = verify_params(mp, psi);
    if (!gate.pass) {
        rep.param_gate_passed = false;
        return rep;
    }

    auto pts = cone_base_points(mp, grid_density, rng_seed);
    rep.lattice_size = pts.size();

    struct ChunkAgg {
        std::size_t violations = 0;
        double min_ratio_margin = std::numeric_limits<double>::infinity();
        double min_growth_margin = std::numeric_limits<double>::infinity();
        double worst_ball_ratio = 0.0;
        std::vector<PointReport> witnesses;
    };
    const std::size_t chunk = 64;
    const std::size_t n_chunks = (pts.size() + chunk - 1) / chunk;
    std::vector<ChunkAgg> agg(n_chunks);

    auto t0 = std::chrono::steady_clock::now();
    parallel_chunks(pts.size(), chunk, threads,
                    [&](std::size_t c, std::size_t lo, std::size_t hi) {
                        ChunkAgg& out = agg[c];
                        for (std::size_t i = lo; i < hi; ++i) {
                            PointReport pr = check_point(map, pts[i].first, a,
                                                         samples_per_point,
                                                         Rng::derive(rng_seed, i));
                            if (!pr.pass(a)) {
                                ++out.violations;
                                if (out.witnesses.size() < 4) out.witnesses.push_back(pr);
                            }
                            out.min_ratio_margin =
                                std::min(out.min_ratio_margin, a - pr.worst_ratio);
                            out.min_growth_margin =
                                std::min(out.min_growth_margin, pr.worst_growth - 7.0);
                            if (pts[i].second) {
                                out.worst_ball_ratio =
                                    std::max(out.worst_ball_ratio, pr.worst_ratio);
                            }
                        }
                    });
    auto t1 = std::chrono::steady_clock::now();

    rep.worst_ratio_margin = std::numeric_limits<double>::infinity();
    rep.worst_growth_margin = std::numeric_limits<double>::infinity();
    for (const ChunkAgg& aggc : agg) {
        rep.violations += aggc.violations;
        rep.worst_ratio_margin = std::min(rep.worst_ratio_margin, aggc.min_ratio_margin);
        rep.worst_growth_margin = std::min(rep.worst_growth_margin, aggc.min_growth_margin);
        rep.worst_ball_ratio = std::max(rep.worst_ball_ratio, aggc.worst_ball_ratio);
        for (const auto& w : aggc.witnesses) {
            if (rep.violation_witnesses.size() < 8) rep.violation_witnesses.push_back(w);
        }
    }
    double secs = std::chrono::duration<double>(t1 - t0).count();
    double total = static_cast<double>(pts.size()) * static_cast<double>(samples_per_point);
    rep.points_per_second = secs > 0.0 ? total / secs : 0.0;
    return rep;
}

} // namespace torusfold
