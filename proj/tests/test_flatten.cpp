#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "torusfold/dynamics.hpp"
#include "torusfold/flatten.hpp"

using namespace torusfold;

namespace {

struct Fixture {
    MapParams mp;
    std::shared_ptr<FoldMap> fold;
    std::shared_ptr<FlattenKit> kit;
    std::shared_ptr<FlattenedFoldMap> h;
    Fixture()
        : mp(solve_params(3, 0.3, 1e-2)),
          fold(std::make_shared<FoldMap>(mp)),
          kit(std::make_shared<FlattenKit>(fold)),
          h(std::make_shared<FlattenedFoldMap>(fold, kit)) {}
};

Fixture& fix() {
    static Fixture f;
    return f;
}

} // namespace

TEST_CASE("flatten radii hierarchy") {
    auto& f = fix();
    REQUIRE(f.kit->l() > 0.0);
    REQUIRE(f.kit->l() < f.kit->b());
    REQUIRE(2.0 * f.kit->b() < f.kit->W());
    REQUIRE(f.kit->b() < 0.25);
    REQUIRE(f.mp.eps_prime < f.mp.eps / 50.0);
}

TEST_CASE("u equals 1/2 outside the 2l disk, exactly") {
    auto& f = fix();
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        Vec xt(2);
        double ang = rng.uniform() * 6.283185307179586;
        double rad = 2.0 * f.kit->l() + rng.uniform() * 0.3;
        xt[0] = rad * std::cos(ang);
        xt[1] = rad * std::sin(ang);
        REQUIRE(f.kit->shift(xt) == 0.0);
        REQUIRE(f.kit->u_value(xt) == 0.5);
        REQUIRE(norm(f.kit->grad_u(xt)) == 0.0);
    }
    Vec origin{0.0, 0.0};
    REQUIRE(f.kit->u_value(origin) == 0.5);
}

TEST_CASE("C2 smallness of F against the identity") {
    auto& f = fix();
    C2Distance d = c2_distance_F_Id(*f.kit, 2000, 17);
    REQUIRE(d.sup0 < f.mp.eps);
    REQUIRE(d.sup1 < f.mp.eps);
    REQUIRE(d.sup2 < f.mp.eps);
}

TEST_CASE("F is volume preserving to 1e-12 and identity away from the slab") {
    auto& f = fix();
    FlattenMap F(f.kit);
    Rng rng(5);
    for (int i = 0; i < 3000; ++i) {
        Vec x(3);
        if (i % 3 == 0) {
            for (auto& c : x) c = rng.uniform();
        } else {
            // stress the support: small first block, x_n near 1/2 or in the
            // axial transition band
            double ang = rng.uniform() * 6.283185307179586;
            double rad = 2.2 * f.kit->l() * rng.uniform();
            x[0] = rad * std::cos(ang);
            x[1] = rad * std::sin(ang);
            x[2] = 0.5 + f.mp.r * (rng.uniform() - 0.5);
        }
        TorusPoint tp(x);
        Mat j = F.jacobian(tp);
        REQUIRE(std::fabs(lu_determinant(j) - 1.0) < 1e-12);
        // inverse composes to the identity
        TorusPoint fx = F.eval(tp);
        TorusPoint back = F.inverse(fx);
        for (std::size_t k = 0; k < 3; ++k) {
            REQUIRE(std::fabs(wrap_diff(back[k], tp[k])) < 1e-12);
        }
    }
    // identity off the first-block disk
    TorusPoint far{Vec{0.3, 0.3, 0.5}};
    TorusPoint ffar = F.eval(far);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(ffar[k] == far[k]);
    // identity near the hyperplane x_n = 0, bit for bit
    TorusPoint low{Vec{0.0, 0.0, 0.0}};
    TorusPoint flow = F.eval(low);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(flow[k] == low[k]);
}

TEST_CASE("F flattens the image of the critical graph to x_n = 1/2") {
    auto& f = fix();
    FlattenMap F(f.kit);
    const CriticalSet& crit = f.kit->critical();
    Rng rng(7);
    // sample critical points near p whose images stay in the l ball
    for (int i = 0; i < 200; ++i) {
        double ang = rng.uniform() * 6.283185307179586;
        double rad = (f.kit->l() / 8.0) * rng.uniform(); // image first block within l
        Vec zt{rad * std::cos(ang), rad * std::sin(ang)};
        // preimage point on the critical graph
        Vec wt{0.25 + zt[0] / 8.0, zt[1] / 2.0};
        double t = crit.eval_phi_implicit(wt);
        TorusPoint x{Vec{wt[0], wt[1], t}};
        TorusPoint fx = f.fold->eval(x);
        // the image sits on the graph of Phi
        REQUIRE(std::fabs(wrap_diff(fx[2], 0.5)) < 1e-6);
        TorusPoint hx = F.eval(fx);
        REQUIRE(std::fabs(wrap_diff(hx[2], 0.5)) < 1e-9);
    }
}

TEST_CASE("H agrees with f at p and with A far away") {
    auto& f = fix();
    TorusPoint p = base_point(3);
    TorusPoint hp = f.h->eval(p);
    TorusPoint fp = f.fold->eval(p);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(hp[k] == fp[k]);

    AffineMap a(3);
    Rng rng(9);
    std::size_t tested = 0;
    while (tested < 1000) {
        Vec x(3);
        for (auto& c : x) c = rng.uniform();
        TorusPoint tp(x);
        if (!f.fold->outside_perturbation(tp)) continue;
        // also skip points whose image lands in the flatten support
        TorusPoint ax = a.eval(tp);
        double bn = 0.0;
        for (int k = 0; k < 2; ++k) {
            double c = wrap_diff(ax[k], 0.0);
            bn += c * c;
        }
        if (std::sqrt(bn) < 2.0 * f.kit->l() &&
            std::fabs(wrap_diff(ax[2], 0.5)) < f.mp.r / 2.0) {
            continue;
        }
        ++tested;
        TorusPoint hx = f.h->eval(tp);
        for (std::size_t k = 0; k < 3; ++k) REQUIRE(hx[k] == ax[k]);
    }
}

TEST_CASE("S_H equals S_f through the determinant factorization") {
    auto& f = fix();
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        double q = 1.0 / 16.0 + f.mp.theta * (2.0 * rng.uniform() - 1.0) * 0.95;
        double ang = rng.uniform() * 6.283185307179586;
        Vec x{std::sqrt(q) * std::cos(ang), std::sqrt(q) * std::sin(ang),
              0.25 + f.mp.delta * (rng.uniform() - 0.25)};
        TorusPoint tp(x);
        double det_f = f.fold->det_jacobian(tp);
        double det_h = f.h->det_jacobian(tp);
        // the flatten factor is within 1e-12 of 1, so the zero sets match
        if (det_f == 0.0) {
            REQUIRE(det_h == 0.0);
        } else {
            REQUIRE(det_h / det_f == Catch::Approx(1.0).margin(1e-11));
        }
    }
    REQUIRE(f.h->det_jacobian(base_point(3)) == 0.0);
}

TEST_CASE("H does not return the perturbation ball into itself") {
    auto& f = fix();
    TorusPoint p = base_point(3);
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        Vec x(3);
        double s = 0.0;
        for (auto& c : x) {
            c = rng.normal();
            s += c * c;
        }
        double rad = f.mp.r * std::pow(rng.uniform(), 1.0 / 3.0) / std::sqrt(s);
        for (std::size_t k = 0; k < 3; ++k) x[k] = p[k] + x[k] * rad;
        TorusPoint hx = f.h->eval(TorusPoint(x));
        REQUIRE(torus_distance(hx, p) > f.mp.r);
    }
}

TEST_CASE("collapse map construction and exactness") {
    auto& f = fix();
    auto g = std::make_shared<CollapseMap>(f.h, f.mp.rho);
    TorusPoint p = base_point(3);

    // identical to H outside the rho ball
    Rng rng(15);
    for (int i = 0; i < 500; ++i) {
        Vec x(3);
        for (auto& c : x) c = rng.uniform();
        TorusPoint tp(x);
        if (torus_distance(tp, p) < f.mp.rho) continue;
        TorusPoint gx = g->eval(tp);
        TorusPoint hx = f.h->eval(tp);
        for (std::size_t k = 0; k < 3; ++k) REQUIRE(gx[k] == hx[k]);
    }

    // the half ball collapses exactly onto {x_n = 1/2}
    for (int i = 0; i < 500; ++i) {
        Vec x(3);
        double s = 0.0;
        for (auto& c : x) {
            c = rng.normal();
            s += c * c;
        }
        double rad = 0.5 * f.mp.rho * std::pow(rng.uniform(), 1.0 / 3.0) / std::sqrt(s);
        for (std::size_t k = 0; k < 3; ++k) x[k] = p[k] + x[k] * rad;
        TorusPoint gx = g->eval(TorusPoint(x));
        REQUIRE(gx[2] == 0.5);
        // and the second image lies on {x_n = 0}
        TorusPoint g2 = g->eval(gx);
        REQUIRE(g2[2] == 0.0);
    }

    REQUIRE_THROWS_AS(CollapseMap(f.h, f.kit->l() * 2.0), ConfigInvalid);
    REQUIRE_THROWS_AS(CollapseMap(f.h, 0.0), ConfigInvalid);
}

TEST_CASE("collapse gaps shrink in C0/C1 and stay bounded away from zero in C2") {
    auto& f = fix();
    double rho = f.mp.rho;
    std::vector<C1C2Gap> gaps;
    for (int hv = 0; hv < 3; ++hv) {
        CollapseMap g(f.h, rho);
        gaps.push_back(c1_c2_gap(g, *f.h, 300, 23));
        rho *= 0.5;
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        REQUIRE(gaps[i].gap0 < gaps[i - 1].gap0);
        REQUIRE(gaps[i].gap1 < gaps[i - 1].gap1);
    }
    double gap2_max = 0.0;
    for (const auto& gp : gaps) gap2_max = std::max(gap2_max, gp.gap2);
    for (const auto& gp : gaps) {
        REQUIRE(gp.gap2 > 1.0);
        REQUIRE(gp.gap2 > 0.2 * gap2_max);
    }
    // C0 gap is controlled by the deviation of H_n from 1/2 on the ball
    CollapseMap g(f.h, f.mp.rho);
    double sup_dev = 0.0;
    Rng rng(29);
    TorusPoint p = base_point(3);
    for (int i = 0; i < 2000; ++i) {
        Vec x(3);
        double s = 0.0;
        for (auto& c : x) {
            c = rng.normal();
            s += c * c;
        }
        double rad = f.mp.rho * std::pow(rng.uniform(), 1.0 / 3.0) / std::sqrt(s);
        for (std::size_t k = 0; k < 3; ++k) x[k] = p[k] + x[k] * rad;
        TorusPoint hx = f.h->eval(TorusPoint(x));
        sup_dev = std::max(sup_dev, std::fabs(wrap_diff(hx[2], 0.5)));
    }
    C1C2Gap gp = c1_c2_gap(g, *f.h, 300, 31);
    REQUIRE(gp.gap0 <= sup_dev * 1.5 + 1e-15);
}

TEST_CASE("normal-form demonstration") {
    DemoReport rep = nf_fold_demo(0.01, 0.1, 3);
    REQUIRE(rep.pass);
    REQUIRE(rep.sup_c0 < rep.bound_c0);
    REQUIRE(rep.sup_c1 < rep.bound_c1);
    REQUIRE(rep.sup_c1 < 6.0 * rep.r); // the template cap is stronger
    REQUIRE(rep.collapse_exact);
    REQUIRE(rep.agrees_outside);

    REQUIRE_THROWS_AS(nf_fold_demo(0.02, 0.1, 3), PreconditionViolated);  // 7r >= eps
    REQUIRE_THROWS_AS(nf_fold_demo(0.5, 1.0, 3), PreconditionViolated);   // r^2 >= eps is fine but 7r >= eps
    REQUIRE_THROWS_AS(nf_fold_demo(-1.0, 0.1, 3), PreconditionViolated);
}

TEST_CASE("halving eps-prime does not enlarge the displacement field") {
    // In this construction the image graph is so flat near the anchor that
    // the displacement supremum underflows to zero; the contract is that the
    // re-derived supremum never grows when the budget shrinks.
    auto& f = fix();
    MapParams tighter = f.mp;
    tighter.eps_prime = f.mp.eps_prime / 2.0;
    tighter.l = 0.5 * std::sqrt(1e-13 * tighter.r / tighter.eps_prime);
    auto fold2 = std::make_shared<FoldMap>(tighter);
    FlattenKit kit2(fold2);
    C2Distance d1 = c2_distance_F_Id(*f.kit, 800, 41);
    C2Distance d2 = c2_distance_F_Id(kit2, 800, 41);
    bool shrank = d2.sup0 <= d1.sup0 / 1.5;
    bool both_floor = d1.sup0 < 1e-20 && d2.sup0 < 1e-20;
    REQUIRE((shrank || both_floor));
}
