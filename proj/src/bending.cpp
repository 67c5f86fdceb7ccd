#include "bend/bending.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace bend {

namespace {

bool in_planar_disc(const DomainGrid& g, const std::vector<PlanarPoint>& planar, int i, int j,
                    double radius_in_h) {
    for (const auto& p : planar)
        if (std::hypot(g.s(i) - p.s, g.t(j) - p.t) <= radius_in_h * g.h + 1e-12) return true;
    return false;
}

} // namespace

int choose_M(int k, const std::vector<std::pair<double, double>>& planar_mu_mk) {
    if (planar_mu_mk.empty()) return 0;
    int M = 1;
    for (const auto& [mu, mk] : planar_mu_mk) {
        if (!(mu > 0))
            throw BendError(ErrKind::VerificationFailed, "planar exponent must be positive");
        double need = (k + mk + 1.0) / mu;
        M = std::max(M, int(std::ceil(need - 1e-12)));
    }
    return M;
}

ComplexField pullback_w(const VekuaSolution& sol, const VekuaProblem& pb, const DomainGrid& g) {
    ComplexField w(g);
    for (size_t k = 0; k < pb.nodes.size(); ++k) w[pb.nodes[k]] = sol.W[k];
    return w;
}

ScalarBendingData recover_uv(const ComplexField& w, const FundamentalForms& forms,
                             const DomainGrid& g, const std::vector<PlanarPoint>& planar) {
    ScalarBendingData out{w, ScalarField(g), ScalarField(g), 0.0};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            if (in_planar_disc(g, planar, i, j, 2.0)) continue;  // u = v = 0 there
            double disc = forms.e(i, j) * forms.g(i, j) - forms.f(i, j) * forms.f(i, j);
            double q = std::sqrt(std::max(disc, 0.0));
            if (q < 1e-12)
                throw BendError(ErrKind::DivisionUnstable,
                                "sqrt(eg - f^2) below 1e-12 outside planar discs at node (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
            double v = w(i, j).imag() / q;
            double u = (w(i, j).real() + forms.f(i, j) * v) / forms.g(i, j);
            out.v(i, j) = v;
            out.u(i, j) = u;
        }
    // continuity across the zeroed discs: magnitude on the first ring outside
    double sup = 0, ring = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            sup = std::max({sup, std::abs(out.u(i, j)), std::abs(out.v(i, j))});
            if (!in_planar_disc(g, planar, i, j, 2.0) && in_planar_disc(g, planar, i, j, 3.5))
                ring = std::max({ring, std::abs(out.u(i, j)), std::abs(out.v(i, j))});
        }
    out.boundary_jump = sup > 0 ? ring / sup : 0.0;
    return out;
}

BendingField recover_U(const SurfaceJet& jet, const ScalarBendingData& data,
                       const FundamentalForms& forms, const DomainGrid& g,
                       const std::vector<PlanarPoint>& planar, int smoothness_k) {
    BendingField bf;
    bf.U = Vec3Field(g);
    bf.smoothness_k = smoothness_k;

    ScalarField us = differentiate(g, data.u, Axis::S);
    ScalarField vt = differentiate(g, data.v, Axis::T);

    double vt_diff = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            if (in_planar_disc(g, planar, i, j, 2.0)) continue;  // U = 0 assigned
            const Vec3 &rs = jet.Rs(i, j), &rt = jet.Rt(i, j);
            double cross_norm = rs.cross(rt).norm();
            if (std::abs(forms.e(i, j)) < 1e-10 * cross_norm)
                throw BendError(ErrKind::DeterminantTooSmall,
                                "second-form coefficient e vanishes outside planar discs at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
            Eigen::Matrix3d A;
            A.row(0) = rs;
            A.row(1) = rt;
            A.row(2) = jet.Rss(i, j);
            Vec3 rhs(data.u(i, j), data.v(i, j), us(i, j));
            bf.U(i, j) = A.partialPivLu().solve(rhs);
            // cross-check: the v_t variant of the third row
            Eigen::Matrix3d Av;
            Av.row(0) = rs;
            Av.row(1) = rt;
            Av.row(2) = jet.Rtt(i, j);
            if (std::abs(forms.g(i, j)) > 1e-10 * cross_norm) {
                Vec3 alt = Av.partialPivLu().solve(Vec3(data.u(i, j), data.v(i, j), vt(i, j)));
                vt_diff = std::max(vt_diff, (alt - bf.U(i, j)).norm());
            }
        }
    bf.vt_cross_check = vt_diff;

    double supU = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) supU = std::max(supU, bf.U(i, j).norm());
    if (supU <= 0) throw BendError(ErrKind::VerificationFailed, "recovered U is identically zero");

    // vanishing order of |U| at each planar point
    for (const auto& p : planar) {
        std::vector<double> lx, ly;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.inside(i, j)) continue;
                double r = std::hypot(g.s(i) - p.s, g.t(j) - p.t);
                if (r < 3.0 * g.h || r > 12.0 * g.h) continue;
                double mag = bf.U(i, j).norm();
                if (mag <= 0) continue;
                lx.push_back(std::log(r));
                ly.push_back(std::log(mag));
            }
        bf.vanish_fits.push_back(fit_slope(lx, ly));
    }
    return bf;
}

void bending_residual(const SurfaceJet& jet, BendingField& bf, const DomainGrid& g,
                      const std::vector<PlanarPoint>& planar) {
    Vec3Field Us = differentiate(g, bf.U, Axis::S);
    Vec3Field Ut = differentiate(g, bf.U, Axis::T);
    bf.rho1 = ScalarField(g);
    bf.rho2 = ScalarField(g);
    bf.rho3 = ScalarField(g);
    double sup1 = 0, sup2 = 0, sup3 = 0, scale = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const Vec3 &rs = jet.Rs(i, j), &rt = jet.Rt(i, j);
            bf.rho1(i, j) = rs.dot(Us(i, j));
            bf.rho2(i, j) = rt.dot(Ut(i, j));
            bf.rho3(i, j) = rs.dot(Ut(i, j)) + rt.dot(Us(i, j));
            if (!g.stencil_ok[g.idx(i, j)] || in_planar_disc(g, planar, i, j, 4.0)) continue;
            sup1 = std::max(sup1, std::abs(bf.rho1(i, j)));
            sup2 = std::max(sup2, std::abs(bf.rho2(i, j)));
            sup3 = std::max(sup3, std::abs(bf.rho3(i, j)));
            scale = std::max(scale,
                             rs.norm() * Us(i, j).norm() + rt.norm() * Ut(i, j).norm());
        }
    bf.used_row_residual = sup1;
    bf.unused_row_residual = std::max(sup2, sup3);
    bf.residual_rel = scale > 0 ? std::max({sup1, sup2, sup3}) / scale : 0.0;
}

RigidMotionFit rigid_fit(const Vec3Field& R, const Vec3Field& U, const DomainGrid& g) {
    Eigen::Matrix<double, 6, 6> G = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const Vec3& r = R(i, j);
            Eigen::Matrix<double, 3, 6> M;
            // A x R + B = -[R]x A + B
            M << 0, r.z(), -r.y(), 1, 0, 0,
                -r.z(), 0, r.x(), 0, 1, 0,
                r.y(), -r.x(), 0, 0, 0, 1;
            G += M.transpose() * M;
            rhs += M.transpose() * U(i, j);
        }
    Eigen::Matrix<double, 6, 1> x = G.ldlt().solve(rhs);
    RigidMotionFit fit;
    fit.A = x.head<3>();
    fit.B = x.tail<3>();
    fit.normal_eq_residual =
        (G * x - rhs).norm() / std::max(1.0, rhs.norm() + G.norm() * x.norm());
    double num = 0, den = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            Vec3 model = fit.A.cross(R(i, j)) + fit.B;
            num += (U(i, j) - model).squaredNorm();
            den += U(i, j).squaredNorm();
        }
    fit.relative_residual = den > 0 ? std::sqrt(num / den) : 0.0;
    fit.nontrivial = fit.relative_residual >= 0.1;
    return fit;
}

DeformationFamily make_deformation(const SurfaceJet& jet, const Vec3Field& U,
                                   const std::vector<double>& sigmas, const DomainGrid& g) {
    Vec3Field Us = differentiate(g, U, Axis::S);
    Vec3Field Ut = differentiate(g, U, Axis::T);
    DeformationFamily fam;
    fam.sigmas = sigmas;
    for (double sigma : sigmas) {
        double defect = 0, odd = 0, even_err = 0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.inside(i, j) || !g.stencil_ok[g.idx(i, j)]) continue;
                const Vec3 &rs = jet.Rs(i, j), &rt = jet.Rt(i, j);
                const Vec3 &us = Us(i, j), &ut = Ut(i, j);
                double E = rs.dot(rs), F = rs.dot(rt), Gm = rt.dot(rt);
                Vec3 rsp = rs + sigma * us, rtp = rt + sigma * ut;
                Vec3 rsm = rs - sigma * us, rtm = rt - sigma * ut;
                double Ep = rsp.dot(rsp), Fp = rsp.dot(rtp), Gp = rtp.dot(rtp);
                double Em = rsm.dot(rsm), Fm = rsm.dot(rtm), Gmm = rtm.dot(rtm);
                defect = std::max({defect, std::abs(Ep - E), std::abs(Fp - F),
                                   std::abs(Gp - Gm)});
                odd = std::max({odd, 0.5 * std::abs(Ep - Em), 0.5 * std::abs(Fp - Fm),
                                0.5 * std::abs(Gp - Gmm)});
                // dR_{+s}^2 + dR_{-s}^2 = 2 dR^2 + 2 s^2 dU^2, exact in exact arithmetic
                double s2 = sigma * sigma;
                double eE = std::abs(0.5 * (Ep + Em) - E - s2 * us.dot(us));
                double eF = std::abs(0.5 * (Fp + Fm) - F - s2 * us.dot(ut));
                double eG = std::abs(0.5 * (Gp + Gmm) - Gm - s2 * ut.dot(ut));
                double sc = 1.0 + std::abs(E) + std::abs(F) + std::abs(Gm) +
                            s2 * (us.squaredNorm() + ut.squaredNorm());
                even_err = std::max({even_err, eE / sc, eF / sc, eG / sc});
            }
        fam.defects.push_back(defect);
        fam.odd_defects.push_back(odd);
        fam.pm_identity_err = std::max(fam.pm_identity_err, even_err);
    }
    std::vector<double> lx, ly;
    for (size_t k = 0; k < sigmas.size(); ++k)
        if (fam.defects[k] > 0) {
            lx.push_back(std::log(sigmas[k]));
            ly.push_back(std::log(fam.defects[k]));
        }
    fam.slope = fit_slope(lx, ly).slope;
    for (size_t k = 0; k + 1 < lx.size(); ++k)
        fam.window_slopes.push_back((ly[k + 1] - ly[k]) / (lx[k + 1] - lx[k]));
    return fam;
}

Vec3Field deformed_positions(const SurfaceJet& jet, const Vec3Field& U, double sigma,
                             const DomainGrid& g) {
    Vec3Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) out(i, j) = jet.R(i, j) + sigma * U(i, j);
    return out;
}

} // namespace bend
