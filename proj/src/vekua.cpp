#include "bend/vekua.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "bend/parallel.hpp"

namespace bend {

namespace {

CVec3 complex_cross(const CVec3& a, const CVec3& b) {
    return CVec3(a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(),
                 a.x() * b.y() - a.y() * b.x());
}

// bilinear dot, no conjugation
Complex complex_dot(const CVec3& a, const CVec3& b) {
    return a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
}

} // namespace

VekuaCoefficients vekua_coefficients(const SurfaceJet& jet, const AsymptoticField& field,
                                     const DomainGrid& g) {
    VekuaCoefficients out{ComplexField(g), ComplexField(g), ComplexField(g),
                          CVec3Field(g),   CVec3Field(g),   0.0};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out.LR(i, j) = field.g(i, j) * jet.Rs(i, j).cast<Complex>() +
                           field.lambda(i, j) * jet.Rt(i, j).cast<Complex>();
        }
    // L^2 R applies L to the assembled LR field with grid derivatives
    CVec3Field dLRs = differentiate(g, out.LR, Axis::S);
    CVec3Field dLRt = differentiate(g, out.LR, Axis::T);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out.L2R(i, j) = field.g(i, j) * dLRs(i, j) + field.lambda(i, j) * dLRt(i, j);
            CVec3 LRbar = out.LR(i, j).conjugate();
            CVec3 v1 = complex_cross(out.LR(i, j), LRbar);
            out.A(i, j) = complex_dot(v1, complex_cross(out.L2R(i, j), LRbar));
            out.B(i, j) = complex_dot(v1, complex_cross(out.L2R(i, j), out.LR(i, j)));
            out.C(i, j) = complex_dot(v1, v1);
            double im_rel = std::abs(out.C(i, j).imag()) /
                            (std::abs(out.C(i, j)) + 1e-12);
            out.max_im_C_rel = std::max(out.max_im_C_rel, im_rel);
            if (std::abs(out.C(i, j).imag()) >= 1e-9 * std::abs(out.C(i, j)) + 1e-12)
                throw BendError(ErrKind::VerificationFailed,
                                "C acquired an imaginary part at node (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
        }
    return out;
}

VekuaProblem pushforward(const VekuaCoefficients& coeffs, const FirstIntegral& fi,
                         const AsymptoticField& field, const DomainGrid& g,
                         const std::vector<PlanarPoint>& planar, int M) {
    VekuaProblem pb;
    pb.M = M;
    pb.Zj = fi.planar_images;
    if (pb.Zj.size() != planar.size())
        throw BendError(ErrKind::VerificationFailed,
                        "planar image count does not match planar point count");

    ComplexField Zbar(g);
    for (size_t k = 0; k < Zbar.size(); ++k) Zbar[k] = std::conj(fi.Z[k]);
    ComplexField LZbar = apply_L(field, Zbar, g);

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const int node = g.idx(i, j);
            const bool flagged = field.degenerate(i, j) != 0;
            if (!flagged && std::abs(fi.jac(i, j)) < 1e-10)
                throw BendError(ErrKind::JacobianSingular,
                                "Z Jacobian below 1e-10 off planar discs at node (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
            pb.nodes.push_back(node);
            pb.zeta.push_back(fi.Z[node]);
            pb.area.push_back(g.weight[node] * std::abs(fi.jac(i, j)));
            pb.flagged.push_back(flagged ? 1 : 0);

            Complex prod(1, 0);
            for (const auto& zj : pb.Zj) prod *= fi.Z[node] - zj;
            Complex Hval(1, 0);
            for (int p = 0; p < M; ++p) Hval *= prod;
            pb.H.push_back(Hval);
            pb.Hphase.push_back(std::abs(Hval) > 0 ? std::conj(Hval) / Hval : Complex(1, 0));

            bool excl = false;
            for (const auto& p : planar)
                if (std::hypot(g.s(i) - p.s, g.t(j) - p.t) <= 4.0 * g.h) excl = true;
            pb.excluded.push_back(excl ? 1 : 0);

            if (flagged) {
                pb.a.push_back(Complex(0, 0));
                pb.b.push_back(Complex(0, 0));
                continue;
            }
            Complex denom = coeffs.C(i, j) * LZbar(i, j);
            if (std::abs(denom) < 1e-300)
                throw BendError(ErrKind::JacobianSingular,
                                "pushforward denominator vanishes off planar discs");
            pb.a.push_back(prod * coeffs.A(i, j) / denom);
            pb.b.push_back(prod * coeffs.B(i, j) / denom);
        }

    for (size_t k = 0; k < pb.a.size(); ++k) {
        if (pb.flagged[k] || !g.stencil_ok[pb.nodes[k]]) continue;
        pb.sup_a = std::max(pb.sup_a, std::abs(pb.a[k]));
        pb.sup_b = std::max(pb.sup_b, std::abs(pb.b[k]));
    }
    return pb;
}

std::vector<Complex> pompeiu_transform(const std::vector<Complex>& zeta,
                                       const std::vector<double>& area,
                                       const std::vector<Complex>& f,
                                       const std::vector<Complex>& targets) {
    const size_t n = zeta.size();
    std::vector<Complex> q(n);
    for (size_t s = 0; s < n; ++s) q[s] = f[s] * area[s] * (-1.0 / M_PI);
    std::vector<Complex> out(targets.size());
    parallel_for(0, long(targets.size()), [&](long t) {
        const Complex z = targets[size_t(t)];
        Complex acc(0, 0);
        for (size_t s = 0; s < n; ++s) {
            Complex d = zeta[s] - z;
            double m2 = std::norm(d);
            if (m2 < 1e-30) continue;  // self cell: kernel averages to zero
            acc += q[s] * std::conj(d) / m2;
        }
        out[size_t(t)] = acc;
    });
    return out;
}

namespace {

using RVec = Eigen::VectorXd;

// restarted GMRES, matrix-free; returns achieved residual 2-norm
template <typename MatVec>
double gmres(const MatVec& apply, const RVec& b, RVec& x, double tol, int restart, int max_iter,
             int& used) {
    const int n = int(b.size());
    RVec r = b - apply(x);
    double beta = r.norm();
    used = 0;
    if (beta <= tol) return beta;
    Eigen::MatrixXd V(n, restart + 1);
    Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(restart + 1, restart);
    RVec cs(restart), sn(restart), gvec(restart + 1);
    while (used < max_iter) {
        V.col(0) = r / beta;
        gvec.setZero();
        gvec(0) = beta;
        int j = 0;
        for (; j < restart && used < max_iter; ++j, ++used) {
            RVec w = apply(V.col(j));
            for (int i = 0; i <= j; ++i) {
                Hm(i, j) = w.dot(V.col(i));
                w -= Hm(i, j) * V.col(i);
            }
            Hm(j + 1, j) = w.norm();
            if (Hm(j + 1, j) > 1e-300) V.col(j + 1) = w / Hm(j + 1, j);
            for (int i = 0; i < j; ++i) {
                double t = cs(i) * Hm(i, j) + sn(i) * Hm(i + 1, j);
                Hm(i + 1, j) = -sn(i) * Hm(i, j) + cs(i) * Hm(i + 1, j);
                Hm(i, j) = t;
            }
            double denom = std::hypot(Hm(j, j), Hm(j + 1, j));
            if (denom < 1e-300) {
                ++j;
                break;
            }
            cs(j) = Hm(j, j) / denom;
            sn(j) = Hm(j + 1, j) / denom;
            Hm(j, j) = denom;
            Hm(j + 1, j) = 0;
            gvec(j + 1) = -sn(j) * gvec(j);
            gvec(j) = cs(j) * gvec(j);
            if (std::abs(gvec(j + 1)) <= tol) {
                ++j;
                break;
            }
        }
        // back substitution and update
        RVec y = RVec::Zero(j);
        for (int i = j - 1; i >= 0; --i) {
            double acc = gvec(i);
            for (int k2 = i + 1; k2 < j; ++k2) acc -= Hm(i, k2) * y(k2);
            y(i) = acc / Hm(i, i);
        }
        for (int i = 0; i < j; ++i) x += y(i) * V.col(i);
        r = b - apply(x);
        beta = r.norm();
        if (beta <= tol) return beta;
    }
    return beta;
}

} // namespace

VekuaSolution solve_modified(const VekuaProblem& pb, const VekuaSolveOptions& opts) {
    const size_t n = pb.zeta.size();
    if (n == 0) throw BendError(ErrKind::SolverDiverged, "empty Vekua problem");

    VekuaSolution sol;
    sol.phi.resize(n);
    for (size_t k = 0; k < n; ++k) {
        switch (opts.seed) {
            case PhiSeed::One: sol.phi[k] = Complex(1, 0); break;
            case PhiSeed::Z: sol.phi[k] = pb.zeta[k]; break;
            case PhiSeed::Z2: sol.phi[k] = pb.zeta[k] * pb.zeta[k]; break;
        }
    }

    std::vector<Complex> btilde(n);
    for (size_t k = 0; k < n; ++k) btilde[k] = pb.b[k] * pb.Hphase[k];

    auto source = [&](const std::vector<Complex>& W) {
        std::vector<Complex> src(n);
        for (size_t k = 0; k < n; ++k) src[k] = pb.a[k] * W[k] + btilde[k] * std::conj(W[k]);
        return src;
    };
    auto residual_of = [&](const std::vector<Complex>& W, std::vector<Complex>& TW) {
        TW = pompeiu_transform(pb.zeta, pb.area, source(W), pb.zeta);
        double sup = 0;
        for (size_t k = 0; k < n; ++k)
            sup = std::max(sup, std::abs(W[k] - sol.phi[k] - TW[k]));
        return sup;
    };

    if (2 * long(n) <= opts.dense_max_unknowns) {
        // real-linear dense solve: W - K diag(a) W - K diag(btilde) conj(W) = phi
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (size_t t = 0; t < n; ++t) {
            for (size_t s = 0; s < n; ++s) {
                Complex kernel(0, 0);
                if (s != t) {
                    Complex d = pb.zeta[s] - pb.zeta[t];
                    double m2 = std::norm(d);
                    if (m2 >= 1e-30) kernel = -pb.area[s] / M_PI * std::conj(d) / m2;
                }
                Complex c1 = kernel * pb.a[s];
                Complex c2 = kernel * btilde[s];
                S(t, s) = (s == t ? 1.0 : 0.0) - c1.real() - c2.real();
                S(t, s + n) = c1.imag() - c2.imag();
                S(t + n, s) = -c1.imag() - c2.imag();
                S(t + n, s + n) = (s == t ? 1.0 : 0.0) - c1.real() + c2.real();
            }
        }
        RVec rhs(2 * n);
        for (size_t k = 0; k < n; ++k) {
            rhs(k) = sol.phi[k].real();
            rhs(k + n) = sol.phi[k].imag();
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
        RVec x = lu.solve(rhs);
        if (!x.allFinite())
            throw BendError(ErrKind::SolverDiverged, "dense real-linear solve failed");
        sol.W1.resize(n);
        for (size_t k = 0; k < n; ++k) sol.W1[k] = Complex(x(k), x(k + n));
        sol.method = "dense";
        sol.iterations = 1;
    } else {
        // damped fixed point; fall back to matrix-free GMRES if not contracting
        std::vector<Complex> W = sol.phi, TW;
        double omega = 1.0;
        double res = residual_of(W, TW);
        int applies = 1;
        bool converged = res < opts.tolerance;
        double prev = res;
        while (!converged && applies < opts.max_fixed_point) {
            for (size_t k = 0; k < n; ++k)
                W[k] = (1.0 - omega) * W[k] + omega * (sol.phi[k] + TW[k]);
            res = residual_of(W, TW);
            ++applies;
            if (!std::isfinite(res))
                throw BendError(ErrKind::IterationDiverged, "fixed-point iterate is not finite");
            if (res < opts.tolerance) {
                converged = true;
                break;
            }
            if (res > 0.9 * prev) {
                omega *= 0.5;
                if (omega < 0.1) break;  // not contracting, switch methods
            }
            prev = res;
        }
        sol.method = "fixed-point";
        if (!converged) {
            auto apply = [&](const RVec& xr) {
                std::vector<Complex> Wc(n);
                for (size_t k = 0; k < n; ++k) Wc[k] = Complex(xr(k), xr(k + n));
                auto T = pompeiu_transform(pb.zeta, pb.area, source(Wc), pb.zeta);
                RVec out(2 * n);
                for (size_t k = 0; k < n; ++k) {
                    Complex v = Wc[k] - T[k];
                    out(k) = v.real();
                    out(k + n) = v.imag();
                }
                return out;
            };
            RVec b(2 * n), x(2 * n);
            for (size_t k = 0; k < n; ++k) {
                b(k) = sol.phi[k].real();
                b(k + n) = sol.phi[k].imag();
                x(k) = W[k].real();
                x(k + n) = W[k].imag();
            }
            int used = 0;
            double l2 = gmres(apply, b, x, 0.1 * opts.tolerance, 60, opts.max_gmres, used);
            applies += used;
            if (!std::isfinite(l2) || !x.allFinite())
                throw BendError(ErrKind::IterationDiverged, "GMRES iterate is not finite");
            for (size_t k = 0; k < n; ++k) W[k] = Complex(x(k), x(k + n));
            sol.method = "gmres";
        }
        sol.W1 = std::move(W);
        sol.iterations = applies;
    }

    // final algebraic residual of the integral equation
    std::vector<Complex> TW;
    sol.residual_modified = residual_of(sol.W1, TW);
    sol.alg_residual.resize(n);
    for (size_t k = 0; k < n; ++k)
        sol.alg_residual[k] = std::abs(sol.W1[k] - sol.phi[k] - TW[k]);
    if (!std::isfinite(sol.residual_modified))
        throw BendError(ErrKind::IterationDiverged, "solution residual is not finite");
    if (sol.residual_modified > opts.tolerance)
        throw BendError(ErrKind::ResidualAboveTolerance,
                        "modified-equation residual " + std::to_string(sol.residual_modified) +
                            " exceeds " + std::to_string(opts.tolerance));
    return sol;
}

void assemble_solution(const VekuaProblem& pb, const DomainGrid& g,
                       const std::vector<PlanarPoint>& planar, VekuaSolution& sol) {
    const size_t n = pb.zeta.size();
    sol.W.resize(n);
    double sup_W = 0;
    for (size_t k = 0; k < n; ++k) {
        sol.W[k] = pb.H[k] * sol.W1[k];
        sup_W = std::max(sup_W, std::abs(sol.W[k]));
    }
    if (sup_W <= 0)
        throw BendError(ErrKind::VerificationFailed, "assembled W is identically zero");

    // the assembled-equation residual inherits |H| times the modified residual
    // (H is holomorphic, d(H W1)/dZbar = H dW1/dZbar)
    sol.residual_original = 0;
    for (size_t k = 0; k < n; ++k) {
        if (pb.excluded[k]) continue;
        sol.residual_original = std::max(
            sol.residual_original, std::abs(pb.H[k]) * std::abs(sol.alg_residual[k]));
    }

    sol.vanish_fits.clear();
    for (size_t pidx = 0; pidx < planar.size(); ++pidx) {
        std::vector<double> lx, ly;
        for (size_t k = 0; k < n; ++k) {
            int node = pb.nodes[k];
            double r = std::hypot(g.s(node % g.nx) - planar[pidx].s,
                                  g.t(node / g.nx) - planar[pidx].t);
            if (r < 3.0 * g.h || r > 12.0 * g.h) continue;
            double dist = std::abs(pb.zeta[k] - pb.Zj[pidx]);
            double mag = std::abs(sol.W[k]);
            if (dist <= 0 || mag <= 0) continue;
            lx.push_back(std::log(dist));
            ly.push_back(std::log(mag));
        }
        if (lx.size() < 8)
            throw BendError(ErrKind::FitUnstable, "vanishing-order annulus has too few samples");
        SlopeFit fit = fit_slope(lx, ly);
        sol.vanish_fits.push_back(fit);
        if (fit.slope < pb.M - 0.2)
            throw BendError(ErrKind::VanishingOrderTooLow,
                            "W vanishes to order " + std::to_string(fit.slope) +
                                " < M - 0.2 at singular point " + std::to_string(pidx));
    }
}

} // namespace bend
