#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusfold/profiles.hpp"
#include "torusfold/torus.hpp"

namespace torusfold {

struct OutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kConeParamMax = 3.0 / 7.0;

// Full parameter record of the construction. Immutable after solve_params.
struct MapParams {
    std::size_t n = 2; // torus dimension
    double r = 0.0;    // perturbation ball radius
    double theta = 0.0; // psi half-support width (in the radial-squared unit)
    double a = 0.0;    // cone parameter
    double delta = 0.0; // phi support scale
    double M = 0.0;    // sup |psi'|
    double eps = 0.0;  // flattening C^2 budget
    double eps_prime = 0.0; // implicit-bound budget
    double b = 0.0;    // outer flatten radius
    double l = 0.0;    // inner flatten radius
    double rho = 0.0;  // collapse ball radius
};

// Distinguished points of the construction.
inline TorusPoint base_point(std::size_t n) { // p
    Vec x(n, 0.0);
    x[0] = 0.25;
    x[n - 1] = 0.25;
    return TorusPoint(x);
}

inline TorusPoint image_point(std::size_t n) { // A p
    Vec x(n, 0.0);
    x[n - 1] = 0.5;
    return TorusPoint(x);
}

struct ConstraintEntry {
    std::string name;
    double slack = 0.0;
    bool pass = false;
};

struct ConstraintReport {
    std::vector<ConstraintEntry> entries;
    bool pass = true;

    void add(const std::string& name, double slack) {
        bool ok = slack > 0.0;
        entries.push_back({name, slack, ok});
        pass = pass && ok;
    }
};

// Geometric slack of the three ball conditions on r; they reduce to exact
// torus distances between p, Ap, 0 and the hyperplane {x_n = 0}:
//  - the A image of B(p,r) is inside B(Ap, 8r), so d(p, Ap) > 9r separates
//    it from the closure of B(p,r);
//  - A^{-1}(B(p,r)) has last coordinate within r/2 of {1/8, 5/8};
//  - pairwise disjointness of B(p,r), B(Ap,r), B(0,r).
inline void r_condition_slacks(std::size_t n, double r, ConstraintReport& rep) {
    TorusPoint p = base_point(n);
    TorusPoint ap = image_point(n);
    TorusPoint origin{Vec(n, 0.0)};
    double d_p_ap = torus_distance(p, ap);
    double d_ap_0 = torus_distance(ap, origin);
    rep.add("A(B(p,r)) disjoint from closure of B(p,r)", d_p_ap - 9.0 * r);
    rep.add("A^{-1}(B(p,r)) disjoint from {x_n=0}", 0.125 - 0.5 * r);
    rep.add("B(p,r), B(Ap,r) disjoint", d_p_ap - 2.0 * r);
    rep.add("B(Ap,r), B(0,r) disjoint", d_ap_0 - 2.0 * r);
}

inline ConstraintReport verify_params(const MapParams& mp, const SmoothProfile& psi) {
    ConstraintReport rep;
    rep.add("n >= 2", static_cast<double>(mp.n) - 2.0 + 0.5);
    rep.add("n <= 64", 64.5 - static_cast<double>(mp.n));
    r_condition_slacks(mp.n, mp.r, rep);
    rep.add("theta > 0", mp.theta);
    rep.add("theta < r/2", 0.5 * mp.r - mp.theta);
    rep.add("a > 0", mp.a);
    rep.add("a < 3/7", kConeParamMax - mp.a);
    rep.add("delta > 0", mp.delta);
    rep.add("delta < 2*theta", 2.0 * mp.theta - mp.delta);
    rep.add("2*M*r*delta*(1+a) < a", mp.a - 2.0 * mp.M * mp.r * mp.delta * (1.0 + mp.a));
    rep.add("eps > 0", mp.eps);
    rep.add("eps' < eps/50", mp.eps / 50.0 - mp.eps_prime);
    rep.add("b > 0", mp.b);
    rep.add("b < 1/4", 0.25 - mp.b);
    rep.add("l > 0", mp.l);
    rep.add("l < b", mp.b - mp.l);
    rep.add("rho > 0", mp.rho);
    rep.add("rho < l", mp.l - mp.rho);
    double sup1 = sup_abs_derivative(psi, 1, 50000);
    rep.add("M matches sup|psi'|", 0.01 * mp.M - std::fabs(mp.M - sup1));
    return rep;
}

// Fixes the whole parameter chain for a given dimension, cone parameter and
// flatten budget. r is found by a descending scan over candidates until the
// three ball conditions hold with at least 1% relative slack; theta, delta,
// eps', b, l, rho follow from it.
inline MapParams solve_params(std::size_t n, double a, double eps) {
    if (n < 2 || n > kMaxDim) throw OutOfRange("solve_params: n out of [2,64]");
    if (!(a > 0.0 && a < kConeParamMax)) {
        throw OutOfRange("solve_params: cone parameter a outside (0, 3/7)");
    }
    if (!(eps > 0.0)) throw OutOfRange("solve_params: eps must be positive");

    MapParams mp;
    mp.n = n;
    mp.a = a;
    mp.eps = eps;

    TorusPoint p = base_point(n);
    TorusPoint ap = image_point(n);
    double d_p_ap = torus_distance(p, ap);
    double d_ap_0 = torus_distance(ap, TorusPoint{Vec(n, 0.0)});

    double r_found = -1.0;
    for (double r = 0.05; r > 1e-4; r *= 0.98) {
        bool ok = (d_p_ap - 9.0 * r) / d_p_ap >= 0.01;
        ok = ok && (0.125 - 0.5 * r) / 0.125 >= 0.01;
        ok = ok && (d_p_ap - 2.0 * r) / d_p_ap >= 0.01;
        ok = ok && (d_ap_0 - 2.0 * r) / d_ap_0 >= 0.01;
        if (ok) {
            r_found = r;
            break;
        }
    }
    if (r_found < 0.0) throw Infeasible("solve_params: no admissible r in scan range");
    mp.r = r_found;

    // theta stays below r/2 and below 1/16 so the radial bump cannot reach
    // squared radius zero.
    mp.theta = std::min(0.45 * mp.r, 0.05);

    SmoothProfile psi = build_psi(mp.theta);
    mp.M = sup_abs_derivative(psi, 1);

    double delta_cap = mp.a / (2.0 * mp.M * mp.r * (1.0 + mp.a));
    mp.delta = 0.9 * std::min(2.0 * mp.theta, delta_cap);

    mp.eps_prime = eps / 100.0;

    mp.b = 0.02;
    // l keeps |det DF - 1| below 5e-13: the axial cutoff slope is at most
    // 5/r and |Phi - 1/2| <= eps' (2l)^2 on the flatten disk.
    double l_det = 0.5 * std::sqrt(1e-13 * mp.r / mp.eps_prime);
    mp.l = std::min(l_det, 0.45 * mp.b);
    mp.rho = 0.25 * mp.l;
    return mp;
}

// Flat key=value serialization; doubles printed with 17 significant digits
// so the round trip is bit exact.
inline std::string params_to_kv(const MapParams& mp) {
    char buf[64];
    std::ostringstream out;
    out << "# torusfold map parameters\n";
    out << "n = " << mp.n << "\n";
    auto emit = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << key << " = " << buf << "\n";
    };
    emit("r", mp.r);
    emit("theta", mp.theta);
    emit("a", mp.a);
    emit("delta", mp.delta);
    emit("M", mp.M);
    emit("eps", mp.eps);
    emit("eps_prime", mp.eps_prime);
    emit("b", mp.b);
    emit("l", mp.l);
    emit("rho", mp.rho);
    return out.str();
}

inline MapParams params_from_kv(const std::string& text) {
    MapParams mp;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            auto last = s.find_last_not_of(" \t\r");
            if (last != std::string::npos) s.erase(last + 1);
        };
        trim(key);
        trim(val);
        if (key.empty() || val.empty()) continue;
        if (key == "n") {
            mp.n = static_cast<std::size_t>(std::strtoull(val.c_str(), nullptr, 10));
            continue;
        }
        double d = std::strtod(val.c_str(), nullptr);
        if (key == "r") mp.r = d;
        else if (key == "theta") mp.theta = d;
        else if (key == "a") mp.a = d;
        else if (key == "delta") mp.delta = d;
        else if (key == "M") mp.M = d;
        else if (key == "eps") mp.eps = d;
        else if (key == "eps_prime") mp.eps_prime = d;
        else if (key == "b") mp.b = d;
        else if (key == "l") mp.l = d;
        else if (key == "rho") mp.rho = d;
    }
    return mp;
}

} // namespace torusfold
