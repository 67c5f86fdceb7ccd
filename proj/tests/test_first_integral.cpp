#include "doctest.h"

#include <cmath>

#include "bend/first_integral.hpp"
#include "helpers.hpp"

using namespace bend;
using testutil::constant_field;
using testutil::field_for;

TEST_SUITE_BEGIN("first_integral");

TEST_CASE("holomorphic structure: Z is an affine image of s+it") {
    auto g = build_domain(RegionSpec::rectangle(0, 0, 1, 1), 21);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    auto fi = solve_first_integral(field, g);
    CHECK(fi.residual_rel < 1e-12);
    // oracle: the affine map through the two pins
    Complex z0(g.s(fi.pin0 % g.nx), g.t(fi.pin0 / g.nx));
    Complex z1(g.s(fi.pin1 % g.nx), g.t(fi.pin1 / g.nx));
    Complex alpha = 1.0 / (z1 - z0);
    double err = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            Complex zeta(g.s(i), g.t(j));
            err = std::max(err, std::abs(fi.Z(i, j) - alpha * (zeta - z0)));
        }
    CHECK(err < 1e-10);
    CHECK(std::abs(fi.Z[fi.pin0]) == 0.0);
    CHECK(std::abs(fi.Z[fi.pin1] - Complex(1, 0)) < 1e-15);
}

TEST_CASE("g=1, lambda=2i: Z is an affine image of 2s+it") {
    auto g = build_domain(RegionSpec::rectangle(0, 0, 1, 1), 21);
    auto field = constant_field(g, 1.0, Complex(0, 2));
    auto fi = solve_first_integral(field, g);
    CHECK(fi.residual_rel < 1e-10);
    Complex w0(2.0 * g.s(fi.pin0 % g.nx), g.t(fi.pin0 / g.nx));
    Complex w1(2.0 * g.s(fi.pin1 % g.nx), g.t(fi.pin1 / g.nx));
    Complex alpha = 1.0 / (w1 - w0);
    double err = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            Complex w(2.0 * g.s(i), g.t(j));
            err = std::max(err, std::abs(fi.Z(i, j) - alpha * (w - w0)));
        }
    CHECK(err < 1e-10);
}

TEST_CASE("affine reparametrization invariance of the pinned solve") {
    auto g = build_domain(RegionSpec::disc(0.7), 33);
    auto def = catalog_surface("sphere-cap");
    auto ff = fundamental_forms(eval_jet(def, g), g);
    ff.planar = detect_planar_points(ff, g, def);
    auto field = field_for(ff, g);
    auto base = solve_first_integral(field, g, ff.planar);
    FirstIntegralOptions opts;
    const Complex c(2.0, -1.0);
    opts.pin1_value = c;
    auto scaled = solve_first_integral(field, g, ff.planar, opts);
    double err = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j))
                err = std::max(err, std::abs(scaled.Z(i, j) - c * base.Z(i, j)));
    CHECK(err < 1e-8);
    CHECK(scaled.residual_rel == doctest::Approx(base.residual_rel).epsilon(1e-6));
}

TEST_CASE("mu exponent closed form: P == 1 gives sqrt(m-1)") {
    for (int m = 3; m <= 8; ++m) {
        PlanarPointModel model;
        model.m = m;
        model.P.cos_c = {1.0};
        auto res = mu_exponent(model);
        CHECK(std::abs(res.mu - std::sqrt(double(m - 1))) < 1e-10);
        CHECK(std::abs(res.integral_M) < 1e-12);
    }
}

TEST_CASE("mu for the perturbed catalog profile: quadrature vs 4096-panel reference") {
    // perturbed-quartic declares P = 1.1 + 0.1 cos 4phi
    auto def = catalog_surface("perturbed-quartic");
    REQUIRE(def.declared.size() == 1);
    PlanarPointModel model;
    model.m = def.declared[0].m;
    model.P = def.declared[0].profile;
    auto coarse = mu_exponent(model, 1024);
    auto reference = mu_exponent(model, 4096);
    CHECK(coarse.mu > 0);
    CHECK(std::abs(coarse.mu - reference.mu) < 1e-9);
    CHECK(std::abs(coarse.integral_M) < 1e-10);
}

TEST_CASE("invalid profiles rejected") {
    PlanarPointModel nonpos;
    nonpos.m = 3;
    nonpos.P.cos_c = {1.0, 1.5};  // P(pi) < 0
    CHECK_THROWS_AS(mu_exponent(nonpos), BendError);
    PlanarPointModel curvature_fails;
    curvature_fails.m = 3;
    curvature_fails.P.cos_c = {1.0, 0, 0, 0, 0, 0, 0.45};  // P > 0 but positivity fails
    CHECK_THROWS_AS(mu_exponent(curvature_fails), BendError);
    PlanarPointModel bad_degree;
    bad_degree.m = 2;
    bad_degree.P.cos_c = {1.0};
    CHECK_THROWS_AS(mu_exponent(bad_degree), BendError);
}

TEST_CASE("local model fit on constructed data: slope sqrt(3) within 1e-6") {
    auto g = build_domain(RegionSpec::disc(0.8), 65);
    FirstIntegral fi;
    fi.Z = ComplexField(g);
    const double mu = std::sqrt(3.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double r = std::hypot(g.s(i), g.t(j));
            double th = std::atan2(g.t(j), g.s(i));
            fi.Z(i, j) = std::pow(r, mu) * Complex(std::cos(th), std::sin(th));
        }
    PlanarPoint p;
    // center node (odd lattice puts one exactly at the origin)
    p.i = g.nx / 2;
    p.j = g.ny / 2;
    p.s = g.s(p.i);
    p.t = g.t(p.j);
    REQUIRE(std::abs(p.s) < 1e-14);
    auto fit = validate_local_model(fi, g, p, mu);
    CHECK(std::abs(fit.fit.slope - mu) < 1e-6);
    CHECK(fit.rel_dev < 1e-6);
}

TEST_CASE("injectivity: identity passes, squaring map fails") {
    auto g = build_domain(RegionSpec::disc(0.8), 33);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    {
        FirstIntegral fi;
        fi.Z = ComplexField(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) fi.Z(i, j) = Complex(g.s(i), g.t(j));
        fi.Zs = differentiate(g, fi.Z, Axis::S);
        fi.Zt = differentiate(g, fi.Z, Axis::T);
        fi.jac = ScalarField(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.inside(i, j))
                    fi.jac(i, j) = std::imag(std::conj(fi.Zs(i, j)) * fi.Zt(i, j));
        auto rep = check_injectivity(fi, g, field);
        CHECK(rep.pass);
        CHECK(rep.jac_sign == 1);
        for (int w : rep.windings) CHECK(w == 1);
    }
    {
        FirstIntegral fi;
        fi.Z = ComplexField(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Complex zeta(g.s(i), g.t(j));
                fi.Z(i, j) = zeta * zeta;
            }
        fi.Zs = differentiate(g, fi.Z, Axis::S);
        fi.Zt = differentiate(g, fi.Z, Axis::T);
        fi.jac = ScalarField(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.inside(i, j))
                    fi.jac(i, j) = std::imag(std::conj(fi.Zs(i, j)) * fi.Zt(i, j));
        auto rep = check_injectivity(fi, g, field);
        CHECK(!rep.pass);
        bool winding_two = false;
        for (int w : rep.windings)
            if (w == 2) winding_two = true;
        CHECK(winding_two);
    }
}

TEST_CASE("sphere cap solve: small residual, injectivity certificate") {
    auto g = build_domain(RegionSpec::disc(0.7), 65);
    auto def = catalog_surface("sphere-cap");
    auto ff = fundamental_forms(eval_jet(def, g), g);
    ff.planar = detect_planar_points(ff, g, def);
    auto field = field_for(ff, g);
    auto fi = solve_first_integral(field, g, ff.planar);
    CHECK(fi.residual_rel < 5e-3);
    auto rep = check_injectivity(fi, g, field);
    CHECK(rep.pass);
    // Z is locally affine at a smooth point: modulus exponent fits 1 within 5%
    PlanarPoint smooth;
    smooth.i = g.nx / 2 + 4;
    smooth.j = g.ny / 2 + 2;
    smooth.s = g.s(smooth.i);
    smooth.t = g.t(smooth.j);
    auto fit = validate_local_model(fi, g, smooth, 1.0);
    CHECK(fit.rel_dev < 0.05);
}

TEST_CASE("quartic solve: residual, single-signed Jacobian, local exponent") {
    auto g = build_domain(RegionSpec::disc(0.8), 65);
    auto def = catalog_surface("quartic");
    auto ff = fundamental_forms(eval_jet(def, g), g);
    ff.planar = detect_planar_points(ff, g, def);
    REQUIRE(ff.planar.size() == 1);
    auto field = field_for(ff, g);
    auto fi = solve_first_integral(field, g, ff.planar);
    CHECK(fi.residual_rel < 5e-3);
    REQUIRE(fi.planar_images.size() == 1);
    auto rep = check_injectivity(fi, g, field, ff.planar);
    CHECK(rep.jacobian_ok);
}

TEST_SUITE_END();
