#include <catch2/catch_amalgamated.hpp>

#include "torusfold/params.hpp"

using namespace torusfold;

TEST_CASE("solve_params output passes verify_params for several dimensions") {
    for (std::size_t n : {2u, 3u, 5u, 10u}) {
        MapParams mp = solve_params(n, 0.3, 1e-2);
        SmoothProfile psi = build_psi(mp.theta);
        ConstraintReport rep = verify_params(mp, psi);
        INFO("n = " << n);
        for (const auto& e : rep.entries) {
            INFO(e.name << " slack=" << e.slack);
            REQUIRE(e.slack > 0.0);
        }
        REQUIRE(rep.pass);
    }
}

TEST_CASE("the delta chain inequality holds with margin") {
    MapParams mp = solve_params(3, 0.3, 1e-2);
    double lhs = 2.0 * mp.M * mp.r * mp.delta * (1.0 + mp.a);
    REQUIRE(lhs < mp.a);
    REQUIRE(lhs < mp.a * 0.99); // at least 1% slack
    REQUIRE(mp.delta < 2.0 * mp.theta);
    REQUIRE(mp.theta < 0.5 * mp.r);
}

TEST_CASE("cone parameter domain is enforced") {
    REQUIRE_THROWS_AS(solve_params(3, 0.5, 1e-2), OutOfRange);
    REQUIRE_THROWS_AS(solve_params(3, 3.0 / 7.0, 1e-2), OutOfRange);
    REQUIRE_THROWS_AS(solve_params(3, 0.0, 1e-2), OutOfRange);
    REQUIRE_THROWS_AS(solve_params(3, -0.1, 1e-2), OutOfRange);
    REQUIRE_THROWS_AS(solve_params(1, 0.3, 1e-2), OutOfRange);
    REQUIRE_THROWS_AS(solve_params(65, 0.3, 1e-2), OutOfRange);
    REQUIRE_THROWS_AS(solve_params(3, 0.3, 0.0), OutOfRange);
}

TEST_CASE("violated constraints appear as failing report entries") {
    MapParams mp = solve_params(2, 0.3, 1e-2);
    SmoothProfile psi = build_psi(mp.theta);

    MapParams bad_theta = mp;
    bad_theta.theta = bad_theta.r; // violates theta < r/2
    ConstraintReport rep1 = verify_params(bad_theta, build_psi(bad_theta.theta));
    REQUIRE_FALSE(rep1.pass);
    bool found = false;
    for (const auto& e : rep1.entries) {
        if (e.name == "theta < r/2") {
            found = true;
            REQUIRE_FALSE(e.pass);
        }
    }
    REQUIRE(found);

    MapParams bad_delta = mp;
    bad_delta.delta = 3.0 * bad_delta.theta; // violates delta < 2*theta
    ConstraintReport rep2 = verify_params(bad_delta, psi);
    REQUIRE_FALSE(rep2.pass);
    found = false;
    for (const auto& e : rep2.entries) {
        if (e.name == "delta < 2*theta") {
            found = true;
            REQUIRE_FALSE(e.pass);
        }
    }
    REQUIRE(found);
}

TEST_CASE("M matches the built psi") {
    MapParams mp = solve_params(4, 0.2, 1e-2);
    SmoothProfile psi = build_psi(mp.theta);
    double sup = sup_abs_derivative(psi, 1);
    REQUIRE(mp.M == Catch::Approx(sup).epsilon(1e-9));
}

TEST_CASE("distinguished points") {
    TorusPoint p = base_point(4);
    REQUIRE(p[0] == 0.25);
    REQUIRE(p[1] == 0.0);
    REQUIRE(p[2] == 0.0);
    REQUIRE(p[3] == 0.25);
    TorusPoint ap = image_point(4);
    REQUIRE(ap[0] == 0.0);
    REQUIRE(ap[3] == 0.5);
    REQUIRE(torus_distance(p, ap) == Catch::Approx(std::sqrt(0.125)));
}

TEST_CASE("key=value serialization round-trips bit exactly") {
    MapParams mp = solve_params(5, 0.31, 7e-3);
    std::string text = params_to_kv(mp);
    MapParams back = params_from_kv(text);
    REQUIRE(back.n == mp.n);
    REQUIRE(back.r == mp.r);
    REQUIRE(back.theta == mp.theta);
    REQUIRE(back.a == mp.a);
    REQUIRE(back.delta == mp.delta);
    REQUIRE(back.M == mp.M);
    REQUIRE(back.eps == mp.eps);
    REQUIRE(back.eps_prime == mp.eps_prime);
    REQUIRE(back.b == mp.b);
    REQUIRE(back.l == mp.l);
    REQUIRE(back.rho == mp.rho);
    // and the text itself is reproducible
    REQUIRE(params_to_kv(back) == text);
}
