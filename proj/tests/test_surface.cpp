#include "doctest.h"

#include <array>
#include <cmath>

#include "bend/surface.hpp"

using namespace bend;

namespace {

// closed-form curvature of the quartic graph z = (s^2+t^2)^2
double quartic_K(double s, double t) {
    double r2 = s * s + t * t;
    double denom = 1.0 + 16.0 * r2 * r2 * r2;
    return 48.0 * r2 * r2 / (denom * denom);
}

// finite-difference cross-check of an analytic jet at one parameter point
void check_jet_consistency(const SurfaceDefinition& def, double s, double t) {
    const double d = 1e-6;
    Vec3 fd_Rs = (def.R(s + d, t) - def.R(s - d, t)) / (2 * d);
    Vec3 fd_Rt = (def.R(s, t + d) - def.R(s, t - d)) / (2 * d);
    Vec3 fd_Rss = (def.Rs(s + d, t) - def.Rs(s - d, t)) / (2 * d);
    Vec3 fd_Rst = (def.Rs(s, t + d) - def.Rs(s, t - d)) / (2 * d);
    Vec3 fd_Rtt = (def.Rt(s, t + d) - def.Rt(s, t - d)) / (2 * d);
    CHECK((def.Rs(s, t) - fd_Rs).norm() < 1e-7);
    CHECK((def.Rt(s, t) - fd_Rt).norm() < 1e-7);
    CHECK((def.Rss(s, t) - fd_Rss).norm() < 1e-6);
    CHECK((def.Rst(s, t) - fd_Rst).norm() < 1e-6);
    CHECK((def.Rtt(s, t) - fd_Rtt).norm() < 1e-6);
}

} // namespace

TEST_SUITE_BEGIN("surface");

TEST_CASE("catalog jets agree with finite differences") {
    for (const auto& name : catalog_names()) {
        auto def = catalog_surface(name);
        check_jet_consistency(def, 0.21, -0.13);
        check_jet_consistency(def, -0.4, 0.35);
    }
}

TEST_CASE("paraboloid jet values at the origin") {
    auto def = catalog_surface("paraboloid");
    auto g = build_domain(RegionSpec::rectangle(-0.5, -0.5, 0.5, 0.5), 9);
    auto jet = eval_jet(def, g);
    CHECK((def.Rss(0, 0) - Vec3(0, 0, 1)).norm() == 0.0);
    CHECK((def.Rst(0, 0) - Vec3(0, 0, 0)).norm() == 0.0);
    Vec3 n0 = def.Rs(0, 0).cross(def.Rt(0, 0)).normalized();
    CHECK((n0 - Vec3(0, 0, 1)).norm() < 1e-15);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) CHECK(std::abs(jet.N(i, j).norm() - 1.0) < 1e-12);
}

TEST_CASE("sphere-cap jet at the origin") {
    auto def = catalog_surface("sphere-cap");
    CHECK((def.Rss(0, 0) - Vec3(0, 0, -1)).norm() < 1e-15);
    Vec3 n0 = def.Rs(0, 0).cross(def.Rt(0, 0)).normalized();
    CHECK((n0 - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("plane: flat jet, forms all zero, detection rejects") {
    auto def = SurfaceDefinition::graph(
        "plane", RegionSpec::rectangle(0, 0, 1, 1), [](double, double) { return 0.0; },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; });
    auto g = build_domain(def.domain, 17);
    auto jet = eval_jet(def, g);
    auto ff = fundamental_forms(jet, g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                CHECK(ff.e(i, j) == 0.0);
                CHECK(ff.f(i, j) == 0.0);
                CHECK(ff.g(i, j) == 0.0);
                CHECK(ff.K(i, j) == 0.0);
            }
    CHECK_THROWS_AS(detect_planar_points(ff, g, def), BendError);
    try {
        detect_planar_points(ff, g, def);
    } catch (const BendError& e) {
        CHECK(e.kind() == ErrKind::CurvatureHypothesisViolated);
    }
}

TEST_CASE("paraboloid forms: frozen values at (0,0) and (1,0)") {
    auto def = catalog_surface("paraboloid");
    // hand computation: at (0,0): E=G=1, F=0, e=g=1, f=0, K=1;
    // at (1,0): Rs=(1,0,1), Rt=(0,1,0), N=(-1,0,1)/sqrt(2), Rss=(0,0,1)
    //           E=2, F=0, G=1, e=g=1/sqrt(2), f=0, K=(1/2)/2 = 1/4
    struct Probe {
        double s, t, E, F, G, e, f, g, K;
    } probes[] = {
        {0, 0, 1, 0, 1, 1, 0, 1, 1},
        {1, 0, 2, 0, 1, 1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0), 0.25},
    };
    for (const auto& p : probes) {
        Vec3 rs = def.Rs(p.s, p.t), rt = def.Rt(p.s, p.t);
        Vec3 n = rs.cross(rt).normalized();
        double E = rs.dot(rs), F = rs.dot(rt), G = rt.dot(rt);
        double e = def.Rss(p.s, p.t).dot(n), f = def.Rst(p.s, p.t).dot(n),
               g2 = def.Rtt(p.s, p.t).dot(n);
        double K = (e * g2 - f * f) / (E * G - F * F);
        CHECK(E == doctest::Approx(p.E).epsilon(1e-14));
        CHECK(F == doctest::Approx(p.F).epsilon(1e-14));
        CHECK(G == doctest::Approx(p.G).epsilon(1e-14));
        CHECK(e == doctest::Approx(p.e).epsilon(1e-14));
        CHECK(f == doctest::Approx(p.f).epsilon(1e-14));
        CHECK(g2 == doctest::Approx(p.g).epsilon(1e-14));
        CHECK(K == doctest::Approx(p.K).epsilon(1e-14));
    }
}

TEST_CASE("K identity and quartic closed form") {
    auto def = catalog_surface("quartic");
    auto g = build_domain(def.domain, 33);
    auto ff = fundamental_forms(eval_jet(def, g), g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double lhs = ff.K(i, j) * (ff.E(i, j) * ff.G(i, j) - ff.F(i, j) * ff.F(i, j));
            double rhs = ff.e(i, j) * ff.g(i, j) - ff.f(i, j) * ff.f(i, j);
            CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(rhs)));
            CHECK(ff.K(i, j) == doctest::Approx(quartic_K(g.s(i), g.t(j))).epsilon(1e-10));
        }
}

TEST_CASE("orientation: downward paraboloid gets flipped, K unchanged") {
    auto def = SurfaceDefinition::graph(
        "downward", RegionSpec::disc(0.8),
        [](double s, double t) { return -0.5 * (s * s + t * t); },
        [](double s, double) { return -s; }, [](double, double t) { return -t; },
        [](double, double) { return -1.0; }, [](double, double) { return 0.0; },
        [](double, double) { return -1.0; });
    auto g = build_domain(def.domain, 17);
    auto ff = fundamental_forms(eval_jet(def, g), g);
    CHECK(ff.orientation_flipped);
    auto up = catalog_surface("paraboloid");
    auto ffu = fundamental_forms(eval_jet(up, g), g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                CHECK(ff.g(i, j) > 0);
                // K invariant under N -> -N
                CHECK(ff.K(i, j) == doctest::Approx(ffu.K(i, j)).epsilon(1e-13));
            }
}

TEST_CASE("saddle surface: orientation undecidable") {
    auto def = SurfaceDefinition::graph(
        "saddle", RegionSpec::disc(0.8), [](double s, double t) { return 0.5 * (s * s - t * t); },
        [](double s, double) { return s; }, [](double, double t) { return -t; },
        [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double, double) { return -1.0; });
    auto g = build_domain(def.domain, 17);
    CHECK_THROWS_AS(fundamental_forms(eval_jet(def, g), g), BendError);
}

TEST_CASE("planar point detection: sphere cap empty, quartic exactly the origin") {
    {
        auto def = catalog_surface("sphere-cap");
        auto g = build_domain(def.domain, 33);
        auto ff = fundamental_forms(eval_jet(def, g), g);
        CHECK(detect_planar_points(ff, g, def).empty());
    }
    {
        auto def = catalog_surface("quartic");
        auto g = build_domain(def.domain, 65);
        auto ff = fundamental_forms(eval_jet(def, g), g);
        auto pts = detect_planar_points(ff, g, def);
        REQUIRE(pts.size() == 1);
        CHECK(std::abs(pts[0].s) < g.h);
        CHECK(std::abs(pts[0].t) < g.h);
        REQUIRE(pts[0].declared_m.has_value());
        CHECK(*pts[0].declared_m == 4);
    }
}

TEST_CASE("vanishing orders: quartic ~4, sextic ~8") {
    {
        auto def = catalog_surface("quartic");
        auto g = build_domain(def.domain, 65);
        auto ff = fundamental_forms(eval_jet(def, g), g);
        auto pts = detect_planar_points(ff, g, def);
        REQUIRE(pts.size() == 1);
        CHECK(std::abs(vanishing_order(ff, g, pts[0]) - 4.0) < 0.1);
    }
    {
        auto def = catalog_surface("sextic");
        auto g = build_domain(def.domain, 65);
        auto ff = fundamental_forms(eval_jet(def, g), g);
        auto pts = detect_planar_points(ff, g, def);
        REQUIRE(pts.size() == 1);
        CHECK(std::abs(vanishing_order(ff, g, pts[0]) - 8.0) < 0.2);
    }
}

TEST_CASE("surfaces of revolution: reflection symmetry of the forms") {
    for (const char* name : {"paraboloid", "quartic", "sextic", "sphere-cap"}) {
        auto def = catalog_surface(name);
        double pts[][2] = {{0.3, 0.2}, {0.1, -0.45}, {-0.25, 0.33}};
        for (auto& p : pts) {
            double s = p[0], t = p[1];
            auto forms_at = [&](double a, double b) {
                Vec3 rs = def.Rs(a, b), rt = def.Rt(a, b);
                Vec3 n = rs.cross(rt).normalized();
                return std::array<double, 6>{rs.dot(rs),           rs.dot(rt),
                                             rt.dot(rt),           def.Rss(a, b).dot(n),
                                             def.Rst(a, b).dot(n), def.Rtt(a, b).dot(n)};
            };
            auto f1 = forms_at(s, t), f2 = forms_at(s, -t);
            CHECK(f1[0] == doctest::Approx(f2[0]).epsilon(1e-13));   // E even
            CHECK(f1[1] == doctest::Approx(-f2[1]).epsilon(1e-13));  // F odd
            CHECK(f1[2] == doctest::Approx(f2[2]).epsilon(1e-13));   // G even
            CHECK(f1[3] == doctest::Approx(f2[3]).epsilon(1e-13));   // e even
            CHECK(f1[4] == doctest::Approx(-f2[4]).epsilon(1e-13));  // f odd
            CHECK(f1[5] == doctest::Approx(f2[5]).epsilon(1e-13));   // g even
        }
    }
}

TEST_CASE("expression-defined surface matches the hand-coded quartic") {
    auto expr_def = SurfaceDefinition::from_expression("quartic-expr", RegionSpec::disc(0.8),
                                                       "(s^2 + t^2)^2");
    auto ref = catalog_surface("quartic");
    for (double s : {0.0, 0.3, -0.5})
        for (double t : {0.1, -0.4}) {
            CHECK((expr_def.R(s, t) - ref.R(s, t)).norm() < 1e-13);
            CHECK((expr_def.Rs(s, t) - ref.Rs(s, t)).norm() < 1e-12);
            CHECK((expr_def.Rss(s, t) - ref.Rss(s, t)).norm() < 1e-12);
            CHECK((expr_def.Rst(s, t) - ref.Rst(s, t)).norm() < 1e-12);
        }
}

TEST_CASE("degenerate immersion rejected") {
    auto def = catalog_surface("paraboloid");
    def.Rs = [](double, double) { return Vec3(1e-11, 0, 0); };  // collapse the s tangent
    auto g = build_domain(def.domain, 16);
    CHECK_THROWS_AS(eval_jet(def, g), BendError);
}

TEST_SUITE_END();
