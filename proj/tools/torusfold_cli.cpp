// Command-line runner: builds the maps, runs certifications and experiments,
// and writes JSON reports plus CSV plot data.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "torusfold/cones.hpp"
#include "torusfold/critical.hpp"
#include "torusfold/dynamics.hpp"
#include "torusfold/flatten.hpp"
#include "torusfold/maps.hpp"
#include "torusfold/params.hpp"
#include "torusfold/profiles.hpp"
#include "torusfold/report.hpp"

namespace fs = std::filesystem;
using namespace torusfold;

namespace {

struct RunConfig {
    std::size_t n = 2;
    double a = 0.3;
    double eps = 1e-2;
    std::uint64_t seed = 1;
    std::size_t grid = 0;    // 0 = per-command default
    std::size_t samples = 0; // 0 = per-command default
    std::string out = "torusfold_out";
    std::string map_sel = "H";
    unsigned threads = default_threads();
    std::size_t rho_halvings = 4;
    std::size_t steps = 1000;
};

json config_json(const RunConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["a"] = cfg.a;
    j["eps"] = cfg.eps;
    j["seed"] = cfg.seed;
    j["map"] = cfg.map_sel;
    return j;
}

// Lazily constructed map family for one parameter set.
struct MapFamily {
    MapParams mp;
    std::shared_ptr<AffineMap> affine;
    std::shared_ptr<FoldMap> fold;
    std::shared_ptr<FlattenKit> kit;
    std::shared_ptr<FlattenedFoldMap> h;
    std::shared_ptr<CollapseMap> collapse;

    explicit MapFamily(const RunConfig& cfg) : mp(solve_params(cfg.n, cfg.a, cfg.eps)) {
        affine = std::make_shared<AffineMap>(cfg.n);
        fold = std::make_shared<FoldMap>(mp);
    }

    void need_flatten() {
        if (!kit) {
            kit = std::make_shared<FlattenKit>(fold);
            h = std::make_shared<FlattenedFoldMap>(fold, kit);
        }
    }

    void need_collapse() {
        need_flatten();
        if (!collapse) collapse = std::make_shared<CollapseMap>(h, mp.rho);
    }

    const MapBundle& select(const std::string& name) {
        if (name == "A") return *affine;
        if (name == "f") return *fold;
        if (name == "H") {
            need_flatten();
            return *h;
        }
        if (name == "g_collapse") {
            need_collapse();
            return *collapse;
        }
        throw CLI::ValidationError("--map", "unknown map selector: " + name);
    }
};

void write_report(const RunConfig& cfg, const std::string& name, json j) {
    fs::create_directories(cfg.out);
    write_json(j, cfg.out + "/" + name + ".json");
}

int cmd_params(const RunConfig& cfg) {
    MapParams mp = solve_params(cfg.n, cfg.a, cfg.eps);
    SmoothProfile psi = build_psi(mp.theta);
    ConstraintReport rep = verify_params(mp, psi);

    json j;
    j["subcommand"] = "params";
    j["config"] = config_json(cfg);
    j["params"] = to_json(mp);
    j["verify"] = to_json(rep);
    j["pass"] = rep.pass;
    write_report(cfg, "params", j);

    fs::create_directories(cfg.out);
    std::ofstream kv(cfg.out + "/params.kv");
    kv << params_to_kv(mp);

    if (rep.pass) {
        std::cout << "params: all constraints hold (" << rep.entries.size()
                  << " checked)\n";
        return 0;
    }
    for (const auto& e : rep.entries) {
        if (!e.pass) std::cout << "params: FAILED " << e.name << " slack=" << e.slack << "\n";
    }
    return 1;
}

int cmd_profiles(const RunConfig& cfg) {
    MapParams mp = solve_params(cfg.n, cfg.a, cfg.eps);
    SmoothProfile psi = build_psi(mp.theta);
    SmoothProfile phi = build_phi(mp.delta);
    SmoothProfile omega = build_omega(mp.l);
    SmoothProfile mu = build_mu(mp.r);
    SmoothProfile chi = build_chi(mp.rho);

    fs::create_directories(cfg.out);
    profile_to_csv(psi, 2000, cfg.out + "/psi.csv");
    profile_to_csv(phi, 2000, cfg.out + "/phi.csv");
    profile_to_csv(omega, 2000, cfg.out + "/omega.csv");
    profile_to_csv(mu, 2000, cfg.out + "/mu.csv");
    profile_to_csv(chi, 2000, cfg.out + "/chi.csv");

    bool pass = true;
    json checks = json::array();
    auto check = [&](const std::string& name, bool ok, double value) {
        json c;
        c["name"] = name;
        c["pass"] = ok;
        c["value"] = value;
        checks.push_back(c);
        pass = pass && ok;
        if (!ok) std::cout << "profiles: FAILED " << name << " (" << value << ")\n";
    };

    ProfileEval pc = psi.eval(0.0625);
    check("psi(1/16) = 4", pc.value == 4.0, pc.value);
    check("psi'(1/16) = 0", pc.d1 == 0.0, pc.d1);
    check("psi''(1/16) = 0", pc.d2 == 0.0, pc.d2);
    ProfileEval ph = phi.eval(0.25);
    check("phi(1/4) = 0", std::fabs(ph.value) < 1e-10, ph.value);
    check("phi'(1/4) = 1/2", std::fabs(ph.d1 - 0.5) < 1e-10, ph.d1);
    check("phi''(1/4) != 0", std::fabs(ph.d2) > 1.0, ph.d2);
    ProfileEval pk = phi.eval(0.25 + mp.delta / 8.0);
    check("phi'(1/4+delta/8) = 1", std::fabs(pk.d1 - 1.0) < 1e-10, pk.d1);
    check("omega' cap", sup_abs_derivative(omega, 1) < 0.99 * 2.0 / mp.l,
          sup_abs_derivative(omega, 1) * mp.l);
    check("omega'' cap", sup_abs_derivative(omega, 2) < 0.99 * 8.0 / (mp.l * mp.l),
          sup_abs_derivative(omega, 2) * mp.l * mp.l);
    check("mu' cap", sup_abs_derivative(mu, 1) < 0.99 * 4.0 / mp.r,
          sup_abs_derivative(mu, 1) * mp.r);
    check("chi' cap", sup_abs_derivative(chi, 1) < 0.99 * 4.0 / mp.rho,
          sup_abs_derivative(chi, 1) * mp.rho);
    for (const SmoothProfile* p : {&psi, &phi, &omega, &mu, &chi}) {
        DerivativeCheckResult r = check_derivative_consistency(*p, 1000);
        check("derivative consistency", r.max_rel_d1 < 1e-6 && r.max_rel_d2 < 1e-6,
              std::max(r.max_rel_d1, r.max_rel_d2));
    }

    json j;
    j["subcommand"] = "profiles";
    j["config"] = config_json(cfg);
    j["checks"] = checks;
    j["pass"] = pass;
    write_report(cfg, "profiles", j);
    if (pass) std::cout << "profiles: all conformance checks hold\n";
    return pass ? 0 : 1;
}

int cmd_certify_cones(const RunConfig& cfg) {
    MapFamily fam(cfg);
    const MapBundle& map = fam.select(cfg.map_sel);
    std::size_t grid = cfg.grid ? cfg.grid : 1200;
    std::size_t spp = cfg.samples ? cfg.samples : 28;
    CertReport rep =
        certify_cones(map, fam.mp, fam.fold->psi(), fam.mp.a, grid, spp, cfg.seed,
                      cfg.threads);
    std::cerr << "certify-cones: " << rep.points_per_second << " samples/s\n";

    bool pass = rep.param_gate_passed && rep.violations == 0 &&
                rep.worst_ball_ratio <= rep.analytic_ball_bound;
    json j;
    j["subcommand"] = "certify-cones";
    j["config"] = config_json(cfg);
    j["report"] = to_json(rep);
    j["pass"] = pass;
    write_report(cfg, "cones_" + cfg.map_sel, j);
    if (!pass) {
        std::cout << "certify-cones: FAILED (violations=" << rep.violations
                  << ", gate=" << rep.param_gate_passed << ")\n";
        return 1;
    }
    std::cout << "certify-cones: map " << rep.map_id << ", " << rep.lattice_size
              << " points x " << rep.samples_per_point << " vectors, 0 violations\n";
    return 0;
}

int cmd_critical_set(const RunConfig& cfg) {
    MapFamily fam(cfg);
    CriticalSet crit(*fam.fold);
    std::size_t levels = cfg.grid ? cfg.grid : 200;
    std::size_t pps = cfg.samples ? cfg.samples : 32;
    auto samples = crit.sample_critical_set(levels, pps, cfg.seed);
    fs::create_directories(cfg.out);
    critical_samples_to_csv(samples, cfg.out + "/critical.csv");

    double worst = 0.0;
    std::size_t nonfold = 0;
    bool nonfold_at_equator = true;
    for (const auto& s : samples) {
        worst = std::max(worst, std::fabs(s.residual));
        if (s.fold == FoldClass::NonFold) {
            ++nonfold;
            if (std::fabs(s.level - crit.equator_level()) >= 1e-8) nonfold_at_equator = false;
        }
    }
    bool pass = worst < 1e-10 && nonfold > 0 && nonfold_at_equator;

    json j;
    j["subcommand"] = "critical-set";
    j["config"] = config_json(cfg);
    j["samples"] = samples.size();
    j["worst_residual"] = worst;
    j["nonfold_samples"] = nonfold;
    j["right_endpoint"] = crit.right_endpoint();
    j["pass"] = pass;
    write_report(cfg, "critical", j);
    if (!pass) {
        std::cout << "critical-set: FAILED (worst residual " << worst << ")\n";
        return 1;
    }
    std::cout << "critical-set: " << samples.size() << " samples, worst residual "
              << worst << "\n";
    return 0;
}

int cmd_folds(const RunConfig& cfg) {
    MapFamily fam(cfg);
    CriticalSet crit(*fam.fold);
    std::size_t levels = cfg.grid ? cfg.grid : 200;
    auto samples = crit.sample_critical_set(levels, 8, cfg.seed);
    std::size_t folds = 0, nonfolds = 0;
    bool localized = true;
    for (const auto& s : samples) {
        if (s.fold == FoldClass::Fold) {
            ++folds;
        } else {
            ++nonfolds;
            if (std::fabs(s.level - crit.equator_level()) >= 1e-8) localized = false;
        }
    }
    bool pass = localized && nonfolds > 0 && folds > 0;
    json j;
    j["subcommand"] = "folds";
    j["config"] = config_json(cfg);
    j["fold_samples"] = folds;
    j["nonfold_samples"] = nonfolds;
    j["nonfold_only_at_equator"] = localized;
    j["equator_level"] = crit.equator_level();
    j["pass"] = pass;
    write_report(cfg, "folds", j);
    std::cout << (pass ? "folds: classification localized to the equator level\n"
                       : "folds: FAILED localization\n");
    return pass ? 0 : 1;
}

int cmd_flatten_check(const RunConfig& cfg) {
    MapFamily fam(cfg);
    fam.need_flatten();
    FlattenMap F(fam.kit);
    C2Distance c2 = c2_distance_F_Id(*fam.kit, cfg.samples ? cfg.samples : 4000, cfg.seed);

    Rng rng(cfg.seed);
    double det_dev = 0.0;
    for (int i = 0; i < 4000; ++i) {
        Vec x(cfg.n);
        if (i % 2 == 0) {
            for (auto& c : x) c = rng.uniform();
        } else {
            for (std::size_t k = 0; k + 1 < cfg.n; ++k) {
                x[k] = 2.2 * fam.kit->l() * (2.0 * rng.uniform() - 1.0);
            }
            x[cfg.n - 1] = 0.5 + fam.mp.r * (rng.uniform() - 0.5);
        }
        det_dev = std::max(det_dev,
                           std::fabs(lu_determinant(F.jacobian(TorusPoint(x))) - 1.0));
    }

    // flatten the image of the critical graph
    const CriticalSet& crit = fam.kit->critical();
    double worst_flat = 0.0;
    for (int i = 0; i < 500; ++i) {
        Vec zt(cfg.n - 1, 0.0);
        double s = 0.0;
        for (auto& c : zt) {
            c = rng.normal();
            s += c * c;
        }
        s = std::sqrt(s);
        double rad = (fam.kit->l() / 8.0) * rng.uniform();
        for (auto& c : zt) c = s > 0.0 ? c * rad / s : 0.0;
        Vec wt(cfg.n - 1);
        wt[0] = 0.25 + zt[0] / 8.0;
        for (std::size_t k = 1; k + 1 < cfg.n; ++k) wt[k] = zt[k] / 2.0;
        double t = crit.eval_phi_implicit(wt);
        Vec x(cfg.n);
        for (std::size_t k = 0; k + 1 < cfg.n; ++k) x[k] = wt[k];
        x[cfg.n - 1] = t;
        TorusPoint img = F.eval(fam.fold->eval(TorusPoint(x)));
        worst_flat = std::max(worst_flat, std::fabs(wrap_diff(img[cfg.n - 1], 0.5)));
    }

    // surface dumps of the displacement field and the image graph
    fs::create_directories(cfg.out);
    u_surface_to_csv(*fam.kit, 3.0 * fam.kit->l(), 40, cfg.out + "/u_surface.csv");
    u_surface_to_csv(*fam.kit, 0.8 * fam.kit->W(), 40, cfg.out + "/phi_surface.csv");

    DemoReport demo = nf_fold_demo(0.01, 0.1, cfg.n);
    write_report(cfg, "nf_demo", to_json(demo));

    bool pass = c2.sup0 < fam.mp.eps && c2.sup1 < fam.mp.eps && c2.sup2 < fam.mp.eps &&
                det_dev < 1e-12 && worst_flat < 1e-9 && demo.pass;
    json j;
    j["subcommand"] = "flatten-check";
    j["config"] = config_json(cfg);
    j["W"] = fam.kit->W();
    j["b"] = fam.kit->b();
    j["l"] = fam.kit->l();
    j["sup_u_dev"] = c2.sup0;
    j["sup_grad_u"] = c2.sup1;
    j["sup_hess_u"] = c2.sup2;
    j["max_det_deviation"] = det_dev;
    j["max_flatten_deviation"] = worst_flat;
    j["nf_demo_pass"] = demo.pass;
    j["pass"] = pass;
    write_report(cfg, "flatten", j);
    std::cout << (pass ? "flatten-check: C2-small, volume preserving, graph flattened\n"
                       : "flatten-check: FAILED\n");
    return pass ? 0 : 1;
}

int cmd_collapse(const RunConfig& cfg) {
    MapFamily fam(cfg);
    fam.need_flatten();

    json halvings = json::array();
    double rho = fam.mp.rho;
    std::vector<C1C2Gap> gaps;
    for (std::size_t hv = 0; hv <= cfg.rho_halvings; ++hv) {
        CollapseMap g(fam.h, rho);
        C1C2Gap gap = c1_c2_gap(g, *fam.h, cfg.samples ? cfg.samples : 400,
                                Rng::derive(cfg.seed, hv));
        gaps.push_back(gap);
        json row;
        row["rho"] = rho;
        row["gap0"] = gap.gap0;
        row["gap1"] = gap.gap1;
        row["gap2"] = gap.gap2;
        halvings.push_back(row);
        rho *= 0.5;
    }
    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        monotone = monotone && gaps[i].gap0 < gaps[i - 1].gap0 &&
                   gaps[i].gap1 < gaps[i - 1].gap1;
    }
    double gap2_max = 0.0;
    for (const auto& g : gaps) gap2_max = std::max(gap2_max, g.gap2);
    bool floor_ok = true;
    for (const auto& g : gaps) floor_ok = floor_ok && g.gap2 > 0.2 * gap2_max && g.gap2 > 1.0;

    // orbit confinement from the collapse half ball
    fam.need_collapse();
    TorusPoint p = base_point(cfg.n);
    Rng rng(cfg.seed);
    double worst_xn = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        Vec x(cfg.n);
        double s = 0.0;
        for (auto& c : x) {
            c = rng.normal();
            s += c * c;
        }
        s = std::sqrt(s);
        double rad = 0.5 * fam.mp.rho * rng.uniform();
        for (std::size_t k = 0; k < cfg.n; ++k) x[k] = p[k] + (s > 0.0 ? x[k] * rad / s : 0.0);
        OrbitRecord rec = iterate_orbit(*fam.collapse, TorusPoint(x), cfg.steps);
        for (std::size_t i = 1; i < rec.last_coords.size(); ++i) {
            worst_xn = std::max(worst_xn, std::fabs(rec.last_coords[i]));
        }
    }
    bool orbit_ok = worst_xn < 1e-9;

    bool pass = monotone && floor_ok && orbit_ok;
    json j;
    j["subcommand"] = "collapse";
    j["config"] = config_json(cfg);
    j["halvings"] = halvings;
    j["gap_monotone"] = monotone;
    j["gap2_floor"] = floor_ok;
    j["orbit_max_xn"] = worst_xn;
    j["orbit_confined"] = orbit_ok;
    j["pass"] = pass;
    write_report(cfg, "collapse", j);
    std::cout << (pass ? "collapse: gaps shrink in C0/C1, C2 floor holds, orbits confined\n"
                       : "collapse: FAILED\n");
    return pass ? 0 : 1;
}

int cmd_orbit(const RunConfig& cfg) {
    MapFamily fam(cfg);
    const MapBundle& map = fam.select(cfg.map_sel);
    TorusPoint p = base_point(cfg.n);
    Vec x = p.x;
    x[0] += fam.mp.rho / 4.0; // seed inside the collapse half ball
    OrbitRecord rec = iterate_orbit(map, TorusPoint(x), cfg.steps);
    fs::create_directories(cfg.out);
    orbit_to_csv(rec, cfg.out + "/orbit_" + cfg.map_sel + ".csv");

    double worst_xn = 0.0;
    for (std::size_t i = 1; i < rec.last_coords.size(); ++i) {
        worst_xn = std::max(worst_xn, std::fabs(rec.last_coords[i]));
    }
    bool pass = cfg.map_sel == "g_collapse" ? worst_xn < 1e-9 : true;
    json j;
    j["subcommand"] = "orbit";
    j["config"] = config_json(cfg);
    j["steps"] = cfg.steps;
    j["max_xn_from_step2"] = worst_xn;
    j["pass"] = pass;
    write_report(cfg, "orbit_" + cfg.map_sel, j);
    std::cout << "orbit: " << cfg.steps << " steps under " << cfg.map_sel
              << ", max |x_n| from step 2 = " << worst_xn << "\n";
    return pass ? 0 : 1;
}

int cmd_coverage(const RunConfig& cfg) {
    MapFamily fam(cfg);
    const MapBundle& map = fam.select(cfg.map_sel);
    std::size_t res = cfg.grid ? cfg.grid : (cfg.n <= 3 ? 32 : 8);
    std::size_t samples = cfg.samples ? cfg.samples : (cfg.n <= 2 ? 6000 : 48000);
    TorusPoint p = base_point(cfg.n);
    CoverageResult cov =
        coverage_scan(map, p, fam.mp.rho / 2.0, res, 80, samples, cfg.seed);
    fs::create_directories(cfg.out);
    coverage_to_csv(cov, cfg.out + "/coverage_" + cfg.map_sel + ".csv");

    bool pass = cfg.map_sel == "g_collapse" ? !cov.reached_full : cov.reached_full;
    json j;
    j["subcommand"] = "coverage";
    j["config"] = config_json(cfg);
    j["resolution"] = res;
    j["samples"] = samples;
    j["reached_full"] = cov.reached_full;
    j["full_iterate"] = cov.full_iterate;
    j["final_fraction"] = cov.grid.history.back();
    j["pass"] = pass;
    write_report(cfg, "coverage_" + cfg.map_sel, j);
    std::cout << "coverage: map " << cfg.map_sel << " fraction "
              << cov.grid.history.back()
              << (cov.reached_full
                      ? " (full at iterate " + std::to_string(cov.full_iterate) + ")\n"
                      : " (plateau)\n");
    return pass ? 0 : 1;
}

int cmd_report(const RunConfig& cfg) {
    if (!fs::exists(cfg.out)) {
        std::cout << "report: no output directory " << cfg.out << "\n";
        return 2;
    }
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(cfg.out)) {
        if (entry.path().extension() == ".json" &&
            entry.path().filename() != "report.json") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    json summary;
    summary["subcommand"] = "report";
    json items = json::array();
    bool all = true;
    for (const auto& path : files) {
        std::ifstream in(path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) continue;
        bool pass = j.value("pass", false);
        all = all && pass;
        json item;
        item["file"] = fs::path(path).filename().string();
        item["subcommand"] = j.value("subcommand", "?");
        item["pass"] = pass;
        items.push_back(item);
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << fs::path(path).filename().string()
                  << "\n";
    }
    summary["items"] = items;
    summary["pass"] = all;
    write_json(summary, cfg.out + "/report.json");
    std::cout << (all ? "report: all checks pass\n" : "report: some checks FAILED\n");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"torusfold: singular torus endomorphisms, cone certification, "
                 "and collapse experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value config file (flags override it)");

    app.add_option("--n", cfg.n, "torus dimension")->envname("TORUSFOLD_N");
    app.add_option("--a", cfg.a, "cone parameter in (0, 3/7)")->envname("TORUSFOLD_A");
    app.add_option("--eps", cfg.eps, "flatten C2 budget")->envname("TORUSFOLD_EPS");
    app.add_option("--seed", cfg.seed, "rng seed, recorded in every output")
        ->envname("TORUSFOLD_SEED");
    app.add_option("--grid", cfg.grid, "lattice density / grid resolution")
        ->envname("TORUSFOLD_GRID");
    app.add_option("--samples", cfg.samples, "sample count")->envname("TORUSFOLD_SAMPLES");
    app.add_option("--out", cfg.out, "output directory")->envname("TORUSFOLD_OUT");
    app.add_option("--map", cfg.map_sel, "map selector: A | f | H | g_collapse")
        ->envname("TORUSFOLD_MAP");
    app.add_option("--threads", cfg.threads, "worker cap")->envname("TORUSFOLD_THREADS");

    auto* sub_params = app.add_subcommand("params", "solve and verify the parameter chain");
    auto* sub_profiles = app.add_subcommand("profiles", "build profiles, check conformance, dump CSV");
    auto* sub_cones = app.add_subcommand("certify-cones", "cone invariance and expansion certification");
    auto* sub_crit = app.add_subcommand("critical-set", "sample the critical set and verify residuals");
    auto* sub_folds = app.add_subcommand("folds", "fold classification sweep");
    auto* sub_flat = app.add_subcommand("flatten-check", "flattening map checks");
    auto* sub_coll = app.add_subcommand("collapse", "collapse gaps and orbit confinement");
    auto* sub_orbit = app.add_subcommand("orbit", "iterate an orbit and dump CSV");
    auto* sub_cov = app.add_subcommand("coverage", "grid coverage experiment");
    auto* sub_report = app.add_subcommand("report", "aggregate reports in the output directory");

    sub_coll->add_option("--rho-halvings", cfg.rho_halvings, "number of rho halvings");
    sub_orbit->add_option("--steps", cfg.steps, "orbit length");
    sub_coll->add_option("--steps", cfg.steps, "orbit length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            return app.exit(e);
        }
        app.exit(e);
        return 2;
    }

    try {
        if (sub_params->parsed()) return cmd_params(cfg);
        if (sub_profiles->parsed()) return cmd_profiles(cfg);
        if (sub_cones->parsed()) return cmd_certify_cones(cfg);
        if (sub_crit->parsed()) return cmd_critical_set(cfg);
        if (sub_folds->parsed()) return cmd_folds(cfg);
        if (sub_flat->parsed()) return cmd_flatten_check(cfg);
        if (sub_coll->parsed()) return cmd_collapse(cfg);
        if (sub_orbit->parsed()) return cmd_orbit(cfg);
        if (sub_cov->parsed()) return cmd_coverage(cfg);
        if (sub_report->parsed()) return cmd_report(cfg);
    } catch (const OutOfRange& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
