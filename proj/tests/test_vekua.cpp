#include "doctest.h"

#include <cmath>
#include <iostream>

#include "bend/bending.hpp"
#include "bend/vekua.hpp"
#include "helpers.hpp"

using namespace bend;
using testutil::constant_field;
using testutil::field_for;

namespace {

// rigid displacement field evaluated through the analytic jet
struct RigidData {
    ComplexField w;
    ScalarField u, v;
};

RigidData rigid_w(const SurfaceJet& jet, const AsymptoticField& field, const DomainGrid& g,
                  const Vec3& A, const Vec3& B) {
    RigidData out{ComplexField(g), ScalarField(g), ScalarField(g)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            Vec3 U = A.cross(jet.R(i, j)) + B;
            out.u(i, j) = jet.Rs(i, j).dot(U);
            out.v(i, j) = jet.Rt(i, j).dot(U);
            out.w(i, j) = field.g(i, j) * out.u(i, j) + field.lambda(i, j) * out.v(i, j);
        }
    return out;
}

// sup of |C Lw - A w - B wbar| over clean nodes, and the magnitude scale
std::pair<double, double> equation_residual(const VekuaCoefficients& coeffs,
                                            const AsymptoticField& field, const DomainGrid& g,
                                            const ComplexField& w) {
    ComplexField Lw = apply_L(field, w, g);
    double sup = 0, scale = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j) || !g.stencil_ok[g.idx(i, j)] || field.degenerate(i, j)) continue;
            Complex res = coeffs.C(i, j) * Lw(i, j) - coeffs.A(i, j) * w(i, j) -
                          coeffs.B(i, j) * std::conj(w(i, j));
            sup = std::max(sup, std::abs(res));
            scale = std::max(scale, std::abs(coeffs.C(i, j)) * std::abs(Lw(i, j)) +
                                        std::abs(coeffs.A(i, j)) * std::abs(w(i, j)) +
                                        std::abs(coeffs.B(i, j)) * std::abs(w(i, j)));
        }
    return {sup, scale};
}

} // namespace

TEST_SUITE_BEGIN("vekua");

TEST_CASE("coefficients: frozen hand computation at a synthetic node") {
    // g=1, lambda=i, Rs=(1,0,0), Rt=(0,1,0), second partials zero:
    // LR=(1,i,0), conj(LR)=(1,-i,0), LR x conj(LR) = (0,0,-2i), C = (-2i)^2 = -4,
    // L2R = 0 so A = B = 0
    auto g = build_domain(RegionSpec::rectangle(0, 0, 1, 1), 9);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    SurfaceJet jet{Vec3Field(g), Vec3Field(g), Vec3Field(g),
                   Vec3Field(g), Vec3Field(g), Vec3Field(g), Vec3Field(g)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            jet.Rs(i, j) = Vec3(1, 0, 0);
            jet.Rt(i, j) = Vec3(0, 1, 0);
            jet.N(i, j) = Vec3(0, 0, 1);
        }
    auto coeffs = vekua_coefficients(jet, field, g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            CHECK(std::abs(coeffs.C(i, j) - Complex(-4, 0)) < 1e-13);
            CHECK(std::abs(coeffs.A(i, j)) < 1e-13);
            CHECK(std::abs(coeffs.B(i, j)) < 1e-13);
        }
}

TEST_CASE("coefficients on the quartic: C real, C <= 0, zero at the planar node") {
    auto def = catalog_surface("quartic");
    auto g = build_domain(def.domain, 33);
    auto jet = eval_jet(def, g);
    auto ff = fundamental_forms(jet, g);
    ff.planar = detect_planar_points(ff, g, def);
    REQUIRE(ff.planar.size() == 1);
    auto field = field_for(ff, g);
    auto coeffs = vekua_coefficients(jet, field, g);
    CHECK(coeffs.max_im_C_rel < 1e-9);
    int pi = ff.planar[0].i, pj = ff.planar[0].j;
    CHECK(std::abs(coeffs.C(pi, pj)) == 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            CHECK(coeffs.C(i, j).real() <= 1e-15);
            if (!field.degenerate(i, j)) CHECK(coeffs.C(i, j).real() < 0);
        }
}

TEST_CASE("rigid fields satisfy the equation at O(h^2), shrinking under refinement") {
    const Vec3 As[3] = {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.3, -0.7, 0.5)};
    const Vec3 Bs[3] = {Vec3(0, 0, 0), Vec3(0.2, -0.1, 0.4), Vec3(-1, 0.5, 0)};
    auto def = catalog_surface("paraboloid");
    for (int c = 0; c < 3; ++c) {
        double prev_rel = -1;
        for (int n : {33, 65}) {
            auto g = build_domain(def.domain, n);
            auto jet = eval_jet(def, g);
            auto ff = fundamental_forms(jet, g);
            ff.planar = detect_planar_points(ff, g, def);
            auto field = field_for(ff, g);
            auto coeffs = vekua_coefficients(jet, field, g);
            auto data = rigid_w(jet, field, g, As[c], Bs[c]);
            auto [sup, scale] = equation_residual(coeffs, field, g, data.w);
            double rel = sup / scale;
            CHECK(rel < 10.0 * g.h * g.h);
            if (prev_rel > 0) CHECK(prev_rel / rel > 3.0);
            prev_rel = rel;
        }
    }
}

TEST_CASE("rescaling covariance: residual of (a w) under aL equals a^6 residual of w") {
    auto def = catalog_surface("paraboloid");
    auto g = build_domain(def.domain, 33);
    auto jet = eval_jet(def, g);
    auto ff = fundamental_forms(jet, g);
    ff.planar = detect_planar_points(ff, g, def);
    auto field = field_for(ff, g);
    auto coeffs = vekua_coefficients(jet, field, g);

    auto scaled_field = field;
    ScalarField a(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            a(i, j) = 1.0 + 0.4 * g.s(i) - 0.2 * g.t(j);
            scaled_field.g(i, j) *= a(i, j);
            scaled_field.lambda(i, j) *= a(i, j);
        }
    auto scaled_coeffs = vekua_coefficients(jet, scaled_field, g);

    // a non-solution test function makes the O(1) identity meaningful
    ComplexField w(g), aw(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            w(i, j) = Complex(g.s(i) * g.s(i) - g.t(j), 0.3 * g.s(i) * g.t(j));
            aw(i, j) = a(i, j) * w(i, j);
        }
    ComplexField Lw = apply_L(field, w, g);
    ComplexField Law = apply_L(scaled_field, aw, g);
    double sup_diff = 0, sup_ref = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j) || !g.stencil_ok[g.idx(i, j)]) continue;
            Complex res = coeffs.C(i, j) * Lw(i, j) - coeffs.A(i, j) * w(i, j) -
                          coeffs.B(i, j) * std::conj(w(i, j));
            Complex res_scaled = scaled_coeffs.C(i, j) * Law(i, j) -
                                 scaled_coeffs.A(i, j) * aw(i, j) -
                                 scaled_coeffs.B(i, j) * std::conj(aw(i, j));
            double a6 = std::pow(a(i, j), 6);
            sup_diff = std::max(sup_diff, std::abs(res_scaled - a6 * res));
            sup_ref = std::max(sup_ref, std::abs(a6 * res));
        }
    CHECK(sup_ref > 0);
    CHECK(sup_diff / sup_ref < 0.05);
}

TEST_CASE("pushforward with the identity first integral: frozen chain-rule oracle") {
    // g=1, lambda=i makes L = d/ds + i d/dt = 2 d/dzetabar, so with Z = s + it
    // and C = -1 the Wirtinger-form coefficients are a = -A/2, b = -B/2
    auto g = build_domain(RegionSpec::rectangle(0, 0, 1, 1), 17);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    VekuaCoefficients coeffs{ComplexField(g), ComplexField(g), ComplexField(g),
                             CVec3Field(g), CVec3Field(g), 0.0};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            coeffs.A(i, j) = Complex(0.3 * g.s(i), -0.2);
            coeffs.B(i, j) = Complex(0.1, 0.4 * g.t(j));
            coeffs.C(i, j) = Complex(-1, 0);
        }
    FirstIntegral fi;
    fi.Z = ComplexField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) fi.Z(i, j) = Complex(g.s(i), g.t(j));
    fi.Zs = differentiate(g, fi.Z, Axis::S);
    fi.Zt = differentiate(g, fi.Z, Axis::T);
    fi.jac = ScalarField(g, 1.0);
    auto pb = pushforward(coeffs, fi, field, g, {}, 0);
    REQUIRE(pb.Zj.empty());
    for (size_t k = 0; k < pb.nodes.size(); ++k) {
        int node = pb.nodes[k];
        CHECK(std::abs(pb.H[k] - Complex(1, 0)) == 0.0);  // empty product
        CHECK(std::abs(pb.a[k] - (-0.5) * coeffs.A[node]) < 1e-12);
        CHECK(std::abs(pb.b[k] - (-0.5) * coeffs.B[node]) < 1e-12);
    }
}

TEST_CASE("pompeiu transform: T[1] = zbar on the unit disc") {
    auto g = build_domain(RegionSpec::disc(1.0), 65);
    std::vector<Complex> zeta;
    std::vector<double> area;
    std::vector<int> nodes;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                zeta.emplace_back(g.s(i), g.t(j));
                area.push_back(g.weight[g.idx(i, j)]);
                nodes.push_back(g.idx(i, j));
            }
    std::vector<Complex> one(zeta.size(), Complex(1, 0));
    auto T = pompeiu_transform(zeta, area, one, zeta);
    double err = 0;
    for (size_t k = 0; k < zeta.size(); ++k) {
        if (std::abs(zeta[k]) > 1.0 - 2.0 * g.h) continue;
        err = std::max(err, std::abs(T[k] - std::conj(zeta[k])));
        if (std::abs(zeta[k]) < 1e-14) CHECK(std::abs(T[k]) < 1e-10);  // odd kernel
    }
    CHECK(err < 2e-2);  // the acceptance suite pins 5e-3 at n = 129
    // f = 0 maps to 0
    std::vector<Complex> zero(zeta.size(), Complex(0, 0));
    auto T0 = pompeiu_transform(zeta, area, zero, zeta);
    for (auto& v : T0) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("discrete dbar of T[f] reproduces a smooth bump, improving with n") {
    double prev = -1;
    for (int n : {33, 65}) {
        auto g = build_domain(RegionSpec::disc(1.0), n);
        std::vector<Complex> zeta;
        std::vector<double> area;
        std::vector<int> nodes;
        ComplexField ffield(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.inside(i, j)) continue;
                double r2 = (g.s(i) * g.s(i) + g.t(j) * g.t(j)) / (0.6 * 0.6);
                Complex val = r2 < 1.0 ? Complex(std::pow(1.0 - r2, 4), 0) : Complex(0, 0);
                ffield(i, j) = val;
                zeta.emplace_back(g.s(i), g.t(j));
                area.push_back(g.weight[g.idx(i, j)]);
                nodes.push_back(g.idx(i, j));
            }
        std::vector<Complex> fv;
        for (int node : nodes) fv.push_back(ffield[node]);
        auto T = pompeiu_transform(zeta, area, fv, zeta);
        ComplexField Tf(g);
        for (size_t k = 0; k < nodes.size(); ++k) Tf[nodes[k]] = T[k];
        auto Ts = differentiate(g, Tf, Axis::S);
        auto Tt = differentiate(g, Tf, Axis::T);
        double err = 0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.inside(i, j) || !g.stencil_ok[g.idx(i, j)]) continue;
                if (std::hypot(g.s(i), g.t(j)) > 1.0 - 2.0 * g.h) continue;
                Complex dbar = 0.5 * (Ts(i, j) + Complex(0, 1) * Tt(i, j));
                err = std::max(err, std::abs(dbar - ffield(i, j)));
            }
        if (prev > 0) CHECK(prev / err > 1.5);
        prev = err;
    }
}

TEST_CASE("solve_modified: zero coefficients give W1 = phi exactly") {
    auto g = build_domain(RegionSpec::disc(1.0), 21);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    VekuaCoefficients coeffs{ComplexField(g), ComplexField(g), ComplexField(g, Complex(-1, 0)),
                             CVec3Field(g), CVec3Field(g), 0.0};
    FirstIntegral fi;
    fi.Z = ComplexField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) fi.Z(i, j) = Complex(g.s(i), g.t(j));
    fi.jac = ScalarField(g, 1.0);
    auto pb = pushforward(coeffs, fi, field, g, {}, 0);
    auto sol = solve_modified(pb);
    CHECK(sol.method == "dense");
    for (auto& w : sol.W1) CHECK(std::abs(w - Complex(1, 0)) < 1e-12);
    CHECK(sol.residual_modified < 1e-12);
}

TEST_CASE("solve_modified: constant coefficient, oracle and solver residuals") {
    const Complex c(0.3, 0.0);
    // the oracle W* = exp(c zbar) satisfies dbar W* = c W*: finite-difference check
    for (Complex z : {Complex(0.2, 0.1), Complex(-0.3, 0.4)}) {
        const double d = 1e-6;
        auto W = [&](Complex zz) { return std::exp(c * std::conj(zz)); };
        Complex dx = (W(z + d) - W(z - d)) / (2 * d);
        Complex dy = (W(z + Complex(0, d)) - W(z - Complex(0, d))) / (2 * d);
        Complex dbar = 0.5 * (dx + Complex(0, 1) * dy);
        CHECK(std::abs(dbar - c * W(z)) < 1e-8);
    }
    auto g = build_domain(RegionSpec::disc(1.0), 33);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    FirstIntegral fi;
    fi.Z = ComplexField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) fi.Z(i, j) = Complex(g.s(i), g.t(j));
    fi.jac = ScalarField(g, 1.0);
    // a = c requires A = -2cC ... use the identity pushforward with A = -2c, C = -1
    VekuaCoefficients coeffs{ComplexField(g, -2.0 * c), ComplexField(g),
                             ComplexField(g, Complex(-1, 0)), CVec3Field(g), CVec3Field(g), 0.0};
    auto pb = pushforward(coeffs, fi, field, g, {}, 0);
    for (size_t k = 0; k < pb.a.size(); ++k) REQUIRE(std::abs(pb.a[k] - c) < 1e-12);
    auto sol = solve_modified(pb);
    CHECK(sol.residual_modified < 1e-6);
    CHECK(sol.method == "dense");
    // iterative route agrees with the dense one
    VekuaSolveOptions it_opts;
    it_opts.dense_max_unknowns = 0;
    auto sol_it = solve_modified(pb, it_opts);
    double diff = 0;
    for (size_t k = 0; k < sol.W1.size(); ++k)
        diff = std::max(diff, std::abs(sol.W1[k] - sol_it.W1[k]));
    CHECK(diff < 1e-4);
}

TEST_CASE("assemble_solution: H factor and vanishing order slope 3 for M = 3") {
    auto g = build_domain(RegionSpec::disc(0.8), 33);
    auto field = constant_field(g, 1.0, Complex(0, 1));
    FirstIntegral fi;
    fi.Z = ComplexField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) fi.Z(i, j) = Complex(g.s(i), g.t(j));
    fi.jac = ScalarField(g, 1.0);
    PlanarPoint center;
    center.i = g.nx / 2;
    center.j = g.ny / 2;
    center.s = g.s(center.i);
    center.t = g.t(center.j);
    REQUIRE(std::abs(center.s) < 1e-14);
    fi.planar_images.push_back(fi.Z(center.i, center.j));
    VekuaCoefficients coeffs{ComplexField(g), ComplexField(g), ComplexField(g, Complex(-1, 0)),
                             CVec3Field(g), CVec3Field(g), 0.0};
    auto pb = pushforward(coeffs, fi, field, g, {center}, 3);
    // |Hphase| = 1 off the singular image, so sup |b H/Hbar| = sup |b|
    for (size_t k = 0; k < pb.Hphase.size(); ++k)
        CHECK(std::abs(std::abs(pb.Hphase[k]) - 1.0) < 1e-12);
    auto sol = solve_modified(pb);
    assemble_solution(pb, g, {center}, sol);
    REQUIRE(sol.vanish_fits.size() == 1);
    CHECK(std::abs(sol.vanish_fits[0].slope - 3.0) < 0.2);
    // W = H W1 with W1 = 1: l = 0 case collapses to W = W1
    fi.planar_images.clear();
    auto pb0 = pushforward(coeffs, fi, field, g, {}, 0);
    auto sol0 = solve_modified(pb0);
    assemble_solution(pb0, g, {}, sol0);
    for (size_t k = 0; k < sol0.W.size(); ++k) CHECK(sol0.W[k] == sol0.W1[k]);
}

TEST_SUITE_END();
