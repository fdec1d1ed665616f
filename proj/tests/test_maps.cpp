#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "torusfold/maps.hpp"
#include "torusfold/rng.hpp"

using namespace torusfold;

namespace {

MapParams params3() {
    static MapParams mp = solve_params(3, 0.3, 1e-2);
    return mp;
}

} // namespace

TEST_CASE("A on distinguished points") {
    AffineMap a(4);
    TorusPoint p = base_point(4);
    TorusPoint ap = a.eval(p);
    REQUIRE(ap[0] == 0.0);
    REQUIRE(ap[1] == 0.0);
    REQUIRE(ap[2] == 0.0);
    REQUIRE(ap[3] == 0.5);
    TorusPoint a2p = a.eval(ap);
    for (std::size_t k = 0; k < 4; ++k) REQUIRE(a2p[k] == 0.0);
    TorusPoint origin{Vec(4, 0.0)};
    TorusPoint a0 = a.eval(origin);
    for (std::size_t k = 0; k < 4; ++k) REQUIRE(a0[k] == 0.0);
}

TEST_CASE("radial argument") {
    MapParams mp = params3();
    FoldMap f(mp);
    REQUIRE(f.radial_arg(base_point(3)) == 0.0625);
    // last coordinate is excluded
    TorusPoint q{Vec{0.25, 0.0, 0.25 + mp.delta / 8.0}};
    REQUIRE(f.radial_arg(q) == 0.0625);
    // direct arithmetic for an offset first coordinate
    double h = 0.003;
    TorusPoint q2{Vec{0.25 + h, 0.0, 0.25}};
    REQUIRE(f.radial_arg(q2) == Catch::Approx((0.25 + h) * (0.25 + h)).epsilon(1e-15));
}

TEST_CASE("f at distinguished points") {
    MapParams mp = params3();
    FoldMap f(mp);
    TorusPoint p = base_point(3);
    TorusPoint fp = f.eval(p);
    REQUIRE(fp[0] == 0.0);
    REQUIRE(fp[1] == 0.0);
    REQUIRE(fp[2] == 0.5);
    TorusPoint ffp = f.eval(fp);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(ffp[k] == 0.0);
}

TEST_CASE("f equals A wherever the bump term vanishes") {
    MapParams mp = params3();
    FoldMap f(mp);
    AffineMap a(3);
    Rng rng(5);
    std::size_t tested = 0;
    while (tested < 2000) {
        Vec x(3);
        for (auto& c : x) c = rng.uniform();
        TorusPoint tp(x);
        if (!f.outside_perturbation(tp)) continue;
        ++tested;
        TorusPoint ft = f.eval(tp);
        TorusPoint at = a.eval(tp);
        for (std::size_t k = 0; k < 3; ++k) REQUIRE(ft[k] == at[k]);
        Mat j = f.jacobian(tp);
        REQUIRE(j(2, 0) == 0.0);
        REQUIRE(j(2, 1) == 0.0);
        REQUIRE(j(2, 2) == 2.0);
    }
    // points with the right radius but x_n far from the phi support are
    // untouched as well
    for (int i = 0; i < 200; ++i) {
        Vec x(3);
        double ang = rng.uniform() * 6.283185307179586;
        x[0] = 0.25 * std::cos(ang);
        x[1] = 0.25 * std::sin(ang);
        x[2] = 0.75; // far from the phi window around 1/4
        TorusPoint tp(x);
        TorusPoint ft = f.eval(tp);
        TorusPoint at = a.eval(tp);
        for (std::size_t k = 0; k < 3; ++k) REQUIRE(ft[k] == at[k]);
    }
}

TEST_CASE("the hyperplane x_n = 0 is untouched by the perturbation") {
    MapParams mp = params3();
    FoldMap f(mp);
    AffineMap a(3);
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        Vec x(3);
        x[0] = rng.uniform();
        x[1] = rng.uniform();
        x[2] = 0.0;
        TorusPoint tp(x);
        TorusPoint ft = f.eval(tp);
        TorusPoint at = a.eval(tp);
        for (std::size_t k = 0; k < 3; ++k) REQUIRE(ft[k] == at[k]);
        REQUIRE(ft[2] == 0.0);
    }
}

TEST_CASE("Jacobian structure at p") {
    MapParams mp = params3();
    FoldMap f(mp);
    Mat j = f.jacobian(base_point(3));
    REQUIRE(j(0, 0) == 8.0);
    REQUIRE(j(1, 1) == 2.0);
    // last row vanishes at p: phi(1/4) = 0 and 2 - phi'(1/4) psi(1/16) = 0
    REQUIRE(j(2, 0) == 0.0);
    REQUIRE(j(2, 1) == 0.0);
    REQUIRE(j(2, 2) == 0.0);
    REQUIRE(f.det_jacobian(base_point(3)) == 0.0);
    REQUIRE(f.residual(base_point(3)) == 0.0);
}

TEST_CASE("residual examples") {
    MapParams mp = params3();
    FoldMap f(mp);
    // q2 = (1/4, 0, 1/4 + delta/8): phi' = 1, psi = 4
    TorusPoint q2{Vec{0.25, 0.0, 0.25 + mp.delta / 8.0}};
    REQUIRE(f.residual(q2) == Catch::Approx(-2.0).margin(1e-9));
    // closed-form determinant: 8 * 2^(n-2) * (2 - 4) = -2^(n+2)
    REQUIRE(f.det_jacobian(q2) == Catch::Approx(-32.0).margin(1e-7));
    // far away the residual is exactly 2
    TorusPoint far{Vec{0.6, 0.6, 0.6}};
    REQUIRE(f.residual(far) == 2.0);
}

TEST_CASE("determinant closed form matches LU at random points") {
    MapParams mp = params3();
    FoldMap f(mp);
    Rng rng(23);
    TorusPoint p = base_point(3);
    for (int i = 0; i < 3000; ++i) {
        Vec x(3);
        if (i % 2 == 0) {
            for (auto& c : x) c = rng.uniform();
        } else {
            // concentrate on the shell where the perturbation acts
            double q = 1.0 / 16.0 + mp.theta * (2.0 * rng.uniform() - 1.0) * 0.98;
            double ang = rng.uniform() * 6.283185307179586;
            x[0] = std::sqrt(q) * std::cos(ang);
            x[1] = std::sqrt(q) * std::sin(ang);
            x[2] = 0.25 + mp.delta * (rng.uniform() - 0.25);
        }
        TorusPoint tp(x);
        double closed = f.det_jacobian(tp);
        double lu = lu_determinant(f.jacobian(tp));
        double scale = std::max({std::fabs(closed), std::fabs(lu), 1e-30});
        REQUIRE(std::fabs(closed - lu) / scale < 1e-9);
    }
}

TEST_CASE("finite-difference Jacobian matches the analytic one") {
    MapParams mp = params3();
    FoldMap f(mp);
    Rng rng(31);
    for (int i = 0; i < 400; ++i) {
        Vec x(3);
        if (i % 2 == 0) {
            for (auto& c : x) c = rng.uniform();
        } else {
            double q = 1.0 / 16.0 + mp.theta * (2.0 * rng.uniform() - 1.0) * 0.9;
            double ang = rng.uniform() * 6.283185307179586;
            x[0] = std::sqrt(q) * std::cos(ang);
            x[1] = std::sqrt(q) * std::sin(ang);
            x[2] = 0.25 + mp.delta * (rng.uniform() - 0.25) * 0.9;
        }
        TorusPoint tp(x);
        Mat ja = f.jacobian(tp);
        Mat jf = fd_jacobian(f, tp);
        double scale = 0.0;
        for (double v : ja.a) scale = std::max(scale, std::fabs(v));
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                REQUIRE(std::fabs(ja(r, c) - jf(r, c)) / scale < 1e-5);
            }
        }
    }
}

TEST_CASE("determinant changes sign across the critical shell") {
    MapParams mp = params3();
    FoldMap f(mp);
    // along the x_n axis through the shell at radius 1/4 the residual moves
    // from 2 (outside the phi window) down through 0 to negative values
    double det_lo = f.det_jacobian(TorusPoint{Vec{0.25, 0.0, 0.25 - mp.delta / 8.0}});
    double det_mid = f.det_jacobian(TorusPoint{Vec{0.25, 0.0, 0.25 + mp.delta / 8.0}});
    REQUIRE(det_lo > 0.0);
    REQUIRE(det_mid < 0.0);
}

TEST_CASE("dimension sweep keeps the structure") {
    for (std::size_t n : {2u, 5u, 10u}) {
        MapParams mp = solve_params(n, 0.3, 1e-2);
        FoldMap f(mp);
        TorusPoint p = base_point(n);
        TorusPoint fp = f.eval(p);
        for (std::size_t k = 0; k + 1 < n; ++k) REQUIRE(fp[k] == 0.0);
        REQUIRE(fp[n - 1] == 0.5);
        REQUIRE(f.det_jacobian(p) == 0.0);
        Mat j = f.jacobian(TorusPoint{Vec(n, 0.9)});
        REQUIRE(j(0, 0) == 8.0);
        for (std::size_t k = 1; k < n; ++k) REQUIRE(j(k, k) == 2.0);
    }
}
