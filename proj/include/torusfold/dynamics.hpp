#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "torusfold/cones.hpp"
#include "torusfold/maps.hpp"
#include "torusfold/rng.hpp"
#include "torusfold/torus.hpp"

namespace torusfold {

struct ConeExit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OrbitRecord {
    std::vector<TorusPoint> points; // iterates 1..steps
    std::vector<double> last_coords;
};

inline OrbitRecord iterate_orbit(const MapBundle& map, const TorusPoint& x0,
                                 std::size_t steps) {
    if (steps < 1) throw std::invalid_argument("iterate_orbit: steps must be >= 1");
    OrbitRecord rec;
    rec.points.reserve(steps);
    rec.last_coords.reserve(steps);
    TorusPoint x = x0;
    for (std::size_t i = 0; i < steps; ++i) {
        x = map.eval(x);
        rec.points.push_back(x);
        rec.last_coords.push_back(x[x.dim() - 1]);
    }
    return rec;
}

inline void orbit_to_csv(const OrbitRecord& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("orbit_to_csv: cannot open " + path);
    out << "step";
    if (!rec.points.empty()) {
        for (std::size_t k = 0; k < rec.points.front().dim(); ++k) out << ",x" << k;
    }
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        out << (i + 1);
        for (std::size_t k = 0; k < rec.points[i].dim(); ++k) {
            std::snprintf(buf, sizeof(buf), ",%.17g", rec.points[i][k]);
            out << buf;
        }
        out << "\n";
    }
}

// Polyline tracking a parametrized curve through iterates of a map. The
// parameter handle is kept so refinement re-evaluates the exact k-fold
// image instead of interpolating.
struct CurveState {
    std::vector<double> ts;        // sorted parameters in [0, 1]
    std::vector<TorusPoint> pts;   // images under map^k of gamma(t)
    std::size_t iterate = 0;
    double diameter = 0.0;
};

struct CurveHistory {
    std::vector<double> diameters; // index = iterate
    std::vector<double> ratios;    // diameters[k+1]/diameters[k]
    bool tangents_in_cone = true;
};

namespace detail {

inline double polyline_diameter(const std::vector<TorusPoint>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            best = std::max(best, torus_distance(pts[i], pts[j]));
        }
    }
    return best;
}

} // namespace detail

// Evolves the segment gamma(t) = base + t * len * e1 under the map,
// refining the polyline wherever an image segment exceeds the resample
// threshold and checking that one-sided tangent estimates stay in the
// cone of parameter a.
inline CurveHistory evolve_curve(const MapBundle& map, const TorusPoint& base,
                                 double len, std::size_t steps, double cone_a,
                                 double resample_threshold = 1e-3,
                                 double stop_diameter = 0.45,
                                 std::size_t max_points = 20000) {
    const std::size_t n = map.dim();
    auto gamma = [&](double t) {
        Vec x = base.x;
        x[0] += t * len;
        return TorusPoint(std::move(x));
    };
    auto image_at = [&](double t, std::size_t k) {
        TorusPoint x = gamma(t);
        for (std::size_t i = 0; i < k; ++i) x = map.eval(x);
        return x;
    };

    CurveState cur;
    cur.ts = {0.0, 0.5, 1.0};
    for (double t : cur.ts) cur.pts.push_back(gamma(t));
    cur.diameter = detail::polyline_diameter(cur.pts);

    CurveHistory hist;
    hist.diameters.push_back(cur.diameter);

    for (std::size_t k = 1; k <= steps; ++k) {
        for (TorusPoint& q : cur.pts) q = map.eval(q);
        cur.iterate = k;
        // refine: insert parameter midpoints while segments are too long
        bool changed = true;
        while (changed && cur.pts.size() < max_points) {
            changed = false;
            std::vector<double> ts;
            std::vector<TorusPoint> pts;
            ts.reserve(cur.ts.size() * 2);
            pts.reserve(cur.pts.size() * 2);
            for (std::size_t i = 0; i < cur.ts.size(); ++i) {
                if (i > 0 &&
                    torus_distance(cur.pts[i - 1], cur.pts[i]) > resample_threshold &&
                    pts.size() < max_points) {
                    double tm = 0.5 * (cur.ts[i - 1] + cur.ts[i]);
                    ts.push_back(tm);
                    pts.push_back(image_at(tm, k));
                    changed = true;
                }
                ts.push_back(cur.ts[i]);
                pts.push_back(cur.pts[i]);
            }
            cur.ts.swap(ts);
            cur.pts.swap(pts);
        }
        // one-sided tangent estimates at interior nodes
        for (std::size_t i = 1; i < cur.pts.size(); ++i) {
            Vec tang(n);
            Vec lifted = cur.pts[i].lift_near(cur.pts[i - 1].x);
            for (std::size_t c = 0; c < n; ++c) tang[c] = lifted[c] - cur.pts[i - 1][c];
            double nt = norm(tang);
            if (nt == 0.0) continue;
            try {
                if (!in_cone(tang, cone_a)) {
                    hist.tangents_in_cone = false;
                    throw ConeExit("evolve_curve: tangent left the cone");
                }
            } catch (const ZeroVector&) {
            }
        }
        cur.diameter = detail::polyline_diameter(cur.pts);
        hist.diameters.push_back(cur.diameter);
        hist.ratios.push_back(cur.diameter / hist.diameters[k - 1]);
        if (cur.diameter > stop_diameter) break;
    }
    return hist;
}

inline void curve_history_to_csv(const CurveHistory& hist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("curve_history_to_csv: cannot open " + path);
    out << "iterate,diameter\n";
    char buf[48];
    for (std::size_t i = 0; i < hist.diameters.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, hist.diameters[i]);
        out << buf;
    }
}

// Cell-occupancy tracker over T^n.
struct CoverageGrid {
    std::size_t resolution = 0;
    std::size_t n = 0;
    std::vector<std::uint64_t> bits;
    std::vector<double> history; // visited fraction per iterate (0 = seed)
    std::size_t visited = 0;
    std::size_t first_full_iterate = 0; // 0 if never full

    CoverageGrid(std::size_t res, std::size_t dim) : resolution(res), n(dim) {
        double cells = std::pow(static_cast<double>(res), static_cast<double>(dim));
        if (cells > 4.0e7) {
            throw std::invalid_argument("CoverageGrid: resolution^n too large");
        }
        total_ = static_cast<std::size_t>(cells + 0.5);
        bits.assign((total_ + 63) / 64, 0);
    }

    std::size_t total() const { return total_; }

    std::size_t cell_index(const TorusPoint& x) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < n; ++k) {
            auto c = static_cast<std::size_t>(x[k] * static_cast<double>(resolution));
            if (c >= resolution) c = resolution - 1;
            idx = idx * resolution + c;
        }
        return idx;
    }

    bool mark(std::size_t idx) {
        std::uint64_t m = 1ull << (idx & 63);
        if (bits[idx >> 6] & m) return false;
        bits[idx >> 6] |= m;
        ++visited;
        return true;
    }

    double fraction() const {
        return static_cast<double>(visited) / static_cast<double>(total_);
    }

private:
    std::size_t total_ = 0;
};

struct CoverageResult {
    CoverageGrid grid;
    bool reached_full = false;
    std::size_t full_iterate = 0;
    // per-iterate flag: all cells newly touched this iterate sit in the
    // bottom layer {x_n bin = 0}
    std::vector<bool> new_cells_on_floor;
};

// Iterates a deterministic sample cloud of a seed ball and records the
// visited-cell fraction per iterate.
//
// Every double is a dyadic rational, and the linear part multiplies
// coordinates by powers of two, so exact float orbits reach the fixed
// point 0 within ~53 steps and stop covering anything. The scan therefore
// applies a seeded jitter of ~3e-14 to the first n-1 coordinates each
// step: the sampled pseudo-orbits stay representative of real orbits
// (which shadow them), and the jitter is eleven orders of magnitude below
// the cell size. The last coordinate is never jittered, so maps that
// genuinely confine it (the collapse map) keep it bit-exactly.
inline CoverageResult coverage_scan(const MapBundle& map, const TorusPoint& seed_center,
                                    double seed_radius, std::size_t resolution,
                                    std::size_t max_iters, std::size_t samples,
                                    std::uint64_t rng_seed = 7,
                                    double jitter = 0x1.0p-45) {
    if (!(seed_radius > 0.0)) {
        throw std::invalid_argument("coverage_scan: seed_radius must be positive");
    }
    const std::size_t n = map.dim();
    CoverageResult res{CoverageGrid(resolution, n), false, 0, {}};

    // box lattice inscribed in the ball plus random fill
    std::vector<TorusPoint> cloud;
    cloud.reserve(samples);
    double half = seed_radius / std::sqrt(static_cast<double>(n));
    auto per_axis = static_cast<std::size_t>(
        std::floor(std::pow(static_cast<double>(samples) * 0.75,
                            1.0 / static_cast<double>(n))));
    per_axis = std::max<std::size_t>(per_axis, 2);
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k) {
            double u = (static_cast<double>(idx[k]) + 0.5) / static_cast<double>(per_axis);
            x[k] = seed_center[k] + half * (2.0 * u - 1.0);
        }
        cloud.emplace_back(x);
        std::size_t k = 0;
        while (k < n && ++idx[k] == per_axis) {
            idx[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    Rng rng(rng_seed);
    while (cloud.size() < samples) {
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = seed_center[k] + seed_radius * (2.0 * rng.uniform() - 1.0) /
                                        std::sqrt(static_cast<double>(n));
        }
        cloud.emplace_back(x);
    }

    for (const TorusPoint& x : cloud) res.grid.mark(res.grid.cell_index(x));
    res.grid.history.push_back(res.grid.fraction());

    Rng jrng(Rng::derive(rng_seed, 0x717e));
    for (std::size_t it = 1; it <= max_iters; ++it) {
        bool all_floor = true;
        for (TorusPoint& x : cloud) {
            if (jitter > 0.0) {
                for (std::size_t k = 0; k + 1 < n; ++k) {
                    x.x[k] = wrap01(x.x[k] + jitter * (2.0 * jrng.uniform() - 1.0));
                }
            }
            x = map.eval(x);
            std::size_t ci = res.grid.cell_index(x);
            if (res.grid.mark(ci)) {
                std::size_t layer = ci % resolution;
                if (layer != 0) all_floor = false;
            }
        }
        res.new_cells_on_floor.push_back(all_floor);
        res.grid.history.push_back(res.grid.fraction());
        if (!res.reached_full && res.grid.visited == res.grid.total()) {
            res.reached_full = true;
            res.full_iterate = it;
            res.grid.first_full_iterate = it;
        }
        if (res.reached_full) break;
    }
    return res;
}

inline void coverage_to_csv(const CoverageResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("coverage_to_csv: cannot open " + path);
    out << "iterate,fraction\n";
    char buf[48];
    for (std::size_t i = 0; i < res.grid.history.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, res.grid.history[i]);
        out << buf;
    }
}

// Finite ball cover of T^n with diameters below eps, plus the uniform
// iterate count m with 2^m (eps/2) >= 1.
struct BallCover {
    std::vector<TorusPoint> centers;
    double radius = 0.0;
    std::size_t m = 0;
};

inline BallCover build_ball_cover(double eps, std::size_t n) {
    if (!(eps > 0.0)) throw std::invalid_argument("build_ball_cover: eps must be positive");
    BallCover cover;
    cover.radius = 0.499 * eps;
    std::size_t m = 0;
    double spread = eps / 2.0;
    while (spread < 1.0) {
        spread *= 2.0;
        ++m;
    }
    cover.m = m;

    // grid spacing so every torus point lies within the ball radius
    auto per_axis = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(n)) / (0.98 * cover.radius) / 2.0) + 1);
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = (static_cast<double>(idx[k]) + 0.5) / static_cast<double>(per_axis);
        }
        cover.centers.emplace_back(x);
        std::size_t k = 0;
        while (k < n && ++idx[k] == per_axis) {
            idx[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    return cover;
}

struct BallCoverCheck {
    bool union_covers = false;
    bool images_cover = false;
    std::size_t balls = 0;
};

// Verifies on lattices that the union of balls covers T^n and that the
// A^m image of (a box inscribed in) every ball covers the resolution-eps
// lattice. A is a product map, so per-axis coverage of each axis lattice
// is equivalent to coverage of the product lattice.
inline BallCoverCheck verify_ball_cover(const BallCover& cover, double eps,
                                        std::size_t n, std::size_t lattice_per_axis = 33) {
    BallCoverCheck chk;
    chk.balls = cover.centers.size();

    // union covers a verification lattice
    chk.union_covers = true;
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = static_cast<double>(idx[k]) / static_cast<double>(lattice_per_axis);
        }
        TorusPoint tp(x);
        bool hit = false;
        for (const TorusPoint& c : cover.centers) {
            if (torus_distance(tp, c) <= cover.radius) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            chk.union_covers = false;
            break;
        }
        std::size_t k = 0;
        while (k < n && ++idx[k] == lattice_per_axis) {
            idx[k] = 0;
            ++k;
        }
        if (k == n) break;
    }

    // A^m image of each ball covers the eps lattice (per axis)
    auto cells = static_cast<std::size_t>(std::ceil(1.0 / eps));
    double half = cover.radius / std::sqrt(static_cast<double>(n));
    chk.images_cover = true;
    for (const TorusPoint& c : cover.centers) {
        for (std::size_t axis = 0; axis < n && chk.images_cover; ++axis) {
            double factor = std::pow(axis == 0 ? 8.0 : 2.0, static_cast<double>(cover.m));
            std::size_t samples = 8 * static_cast<std::size_t>(
                                          std::ceil(factor * 2.0 * half * cells)) +
                                  8;
            std::vector<bool> hit(cells, false);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < samples; ++i) {
                double t = c[axis] - half +
                           2.0 * half * static_cast<double>(i) /
                               static_cast<double>(samples - 1);
                double img = wrap01(factor * t);
                auto cell = static_cast<std::size_t>(img * static_cast<double>(cells));
                if (cell >= cells) cell = cells - 1;
                if (!hit[cell]) {
                    hit[cell] = true;
                    ++hits;
                }
            }
            if (hits != cells) chk.images_cover = false;
        }
        if (!chk.images_cover) break;
    }
    return chk;
}

// True iff the image cloud of the ball contains a fully occupied 3^n block
// of a local grid around the image of the ball centre.
inline bool interior_nonempty_check(const MapBundle& map, const TorusPoint& center,
                                    double radius, std::size_t samples,
                                    std::uint64_t rng_seed = 11) {
    const std::size_t n = map.dim();
    if (n > 6) throw std::invalid_argument("interior_nonempty_check: n too large");
    std::vector<TorusPoint> images;
    images.reserve(samples);
    Rng rng(rng_seed);
    for (std::size_t i = 0; i < samples; ++i) {
        Vec x(n);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = rng.normal();
            s += x[k] * x[k];
        }
        s = std::sqrt(s);
        double rad = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k) x[k] = center[k] + (s > 0.0 ? x[k] * rad / s : 0.0);
        images.push_back(map.eval(TorusPoint(x)));
    }
    TorusPoint ref = map.eval(center);
    // per-axis spreads: the linear part stretches axes by different factors
    Vec spread(n, 0.0);
    for (const TorusPoint& im : images) {
        Vec lifted = im.lift_near(ref.x);
        for (std::size_t k = 0; k < n; ++k) {
            spread[k] = std::max(spread[k], std::fabs(lifted[k] - ref[k]));
        }
    }
    const std::size_t res = 8;
    std::vector<double> cell(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (spread[k] == 0.0) return false; // image flattened along axis k
        cell[k] = 2.0 * spread[k] / static_cast<double>(res);
    }
    std::vector<bool> occ(static_cast<std::size_t>(std::pow(res, n)), false);
    for (const TorusPoint& im : images) {
        Vec lifted = im.lift_near(ref.x);
        std::size_t idx = 0;
        bool ok = true;
        for (std::size_t k = 0; k < n; ++k) {
            double off = lifted[k] - ref[k] + spread[k];
            auto ci = static_cast<long>(std::floor(off / cell[k]));
            if (ci < 0 || ci >= static_cast<long>(res)) {
                ok = false;
                break;
            }
            idx = idx * res + static_cast<std::size_t>(ci);
        }
        if (ok) occ[idx] = true;
    }
    // look for a fully occupied 3^n block
    std::vector<std::size_t> base(n, 0);
    for (;;) {
        bool full = true;
        std::vector<std::size_t> off(n, 0);
        for (;;) {
            std::size_t idx = 0;
            for (std::size_t k = 0; k < n; ++k) idx = idx * res + base[k] + off[k];
            if (!occ[idx]) {
                full = false;
                break;
            }
            std::size_t k = 0;
            while (k < n && ++off[k] == 3) {
                off[k] = 0;
                ++k;
            }
            if (k == n) break;
        }
        if (full) return true;
        std::size_t k = 0;
        while (k < n && ++base[k] == res - 2) {
            base[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    return false;
}

} // namespace torusfold
