#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "torusfold/cones.hpp"
#include "torusfold/flatten.hpp"
#include "torusfold/params.hpp"

namespace torusfold {

// Insertion-ordered JSON keeps report bytes stable across runs.
using json = nlohmann::ordered_json;

inline json to_json(const ConstraintReport& rep) {
    json j;
    j["pass"] = rep.pass;
    json entries = json::array();
    for (const auto& e : rep.entries) {
        json je;
        je["name"] = e.name;
        je["slack"] = e.slack;
        je["pass"] = e.pass;
        entries.push_back(je);
    }
    j["constraints"] = entries;
    return j;
}

inline json to_json(const MapParams& mp) {
    json j;
    j["n"] = mp.n;
    j["r"] = mp.r;
    j["theta"] = mp.theta;
    j["a"] = mp.a;
    j["delta"] = mp.delta;
    j["M"] = mp.M;
    j["eps"] = mp.eps;
    j["eps_prime"] = mp.eps_prime;
    j["b"] = mp.b;
    j["l"] = mp.l;
    j["rho"] = mp.rho;
    return j;
}

inline json to_json(const CertReport& rep) {
    json j;
    j["map"] = rep.map_id;
    j["a"] = rep.a;
    j["lattice_size"] = rep.lattice_size;
    j["samples_per_point"] = rep.samples_per_point;
    j["violations"] = rep.violations;
    j["worst_ratio_margin"] = rep.worst_ratio_margin;
    j["worst_growth_margin"] = rep.worst_growth_margin;
    j["worst_ball_ratio"] = rep.worst_ball_ratio;
    j["analytic_ball_bound"] = rep.analytic_ball_bound;
    j["seed"] = rep.seed;
    j["param_gate_passed"] = rep.param_gate_passed;
    return j;
}

inline json to_json(const DemoReport& rep) {
    json j;
    j["r"] = rep.r;
    j["eps"] = rep.eps;
    j["sup_c0"] = rep.sup_c0;
    j["bound_c0"] = rep.bound_c0;
    j["sup_c1"] = rep.sup_c1;
    j["bound_c1"] = rep.bound_c1;
    j["collapse_exact"] = rep.collapse_exact;
    j["agrees_outside"] = rep.agrees_outside;
    j["pass"] = rep.pass;
    return j;
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

} // namespace torusfold
