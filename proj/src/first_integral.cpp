#include "bend/first_integral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace bend {

namespace {

using SpMat = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;

struct Tri {
    int n0, n1, n2;  // node ids, counterclockwise
    double weight;
};

// full cells contribute both diagonal splits at half weight (symmetric),
// three-corner cells their single triangle
std::vector<Tri> triangulate(const DomainGrid& g) {
    std::vector<Tri> tris;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            int a = g.idx(i, j), b = g.idx(i + 1, j), c = g.idx(i + 1, j + 1), d = g.idx(i, j + 1);
            bool ia = g.inside(i, j), ib = g.inside(i + 1, j), ic = g.inside(i + 1, j + 1),
                 id = g.inside(i, j + 1);
            int count = ia + ib + ic + id;
            if (count == 4) {
                tris.push_back({a, b, c, 0.5});
                tris.push_back({a, c, d, 0.5});
                tris.push_back({a, b, d, 0.5});
                tris.push_back({b, c, d, 0.5});
            } else if (count == 3) {
                if (!ia) tris.push_back({b, c, d, 1.0});
                if (!ib) tris.push_back({a, c, d, 1.0});
                if (!ic) tris.push_back({a, b, d, 1.0});
                if (!id) tris.push_back({a, b, c, 1.0});
            }
        }
    return tris;
}

} // namespace

FirstIntegral solve_first_integral(const AsymptoticField& field, const DomainGrid& g,
                                   const std::vector<PlanarPoint>& planar,
                                   const FirstIntegralOptions& opts) {
    // compact unknown indexing over inside nodes
    std::vector<int> node_of;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) node_of.push_back(g.idx(i, j));
    const int n_nodes = int(node_of.size());

    // pins: q0 nearest the centroid of inside nodes, q1 the rightmost boundary node
    double cx = 0, cy = 0;
    for (int k : node_of) {
        cx += g.s(k % g.nx);
        cy += g.t(k / g.nx);
    }
    cx /= n_nodes;
    cy /= n_nodes;
    int pin0 = -1, pin1 = -1;
    double best0 = 1e300;
    for (int k : node_of) {
        double d = std::hypot(g.s(k % g.nx) - cx, g.t(k / g.nx) - cy);
        if (d < best0) {
            best0 = d;
            pin0 = k;
        }
    }
    double best_s = -1e300, best_t = 1e300;
    for (int k : node_of) {
        if (g.mask[k] != NodeClass::Boundary) continue;
        double sk = g.s(k % g.nx), tk = g.t(k / g.nx);
        if (sk > best_s + 1e-15 || (std::abs(sk - best_s) <= 1e-15 && tk < best_t)) {
            best_s = sk;
            best_t = tk;
            pin1 = k;
        }
    }
    if (pin0 < 0 || pin1 < 0 || pin0 == pin1)
        throw BendError(ErrKind::SolverDiverged, "cannot place normalization pins");

    auto tris = triangulate(g);
    if (tris.empty()) throw BendError(ErrKind::SolverDiverged, "domain has no full cells");

    std::vector<std::vector<std::pair<int, Complex>>> row_entries;
    row_entries.reserve(tris.size() + 16);
    std::vector<char> covered(g.mask.size(), 0);

    for (const auto& tr : tris) {
        const int nodes[3] = {tr.n0, tr.n1, tr.n2};
        double x[3], y[3];
        Complex mu_avg = 0;
        bool degen = false;
        for (int k = 0; k < 3; ++k) {
            x[k] = g.s(nodes[k] % g.nx);
            y[k] = g.t(nodes[k] / g.nx);
            mu_avg += field.beltrami[nodes[k]];
            if (field.degenerate[nodes[k]]) degen = true;
        }
        mu_avg /= 3.0;
        double area2 = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        double area = 0.5 * area2;
        double w = tr.weight * (degen ? opts.degenerate_weight : 1.0);
        double scale = std::sqrt(w * std::abs(area));
        std::vector<std::pair<int, Complex>> row;
        row.reserve(3);
        for (int k = 0; k < 3; ++k) {
            double bk = y[(k + 1) % 3] - y[(k + 2) % 3];
            double ck = x[(k + 2) % 3] - x[(k + 1) % 3];
            // fx = sum f_k bk/(2A), fy = sum f_k ck/(2A);
            // f_zetabar = (fx + i fy)/2, f_zeta = (fx - i fy)/2
            Complex dzbar = Complex(bk, ck) / (2.0 * area2);
            Complex dz = Complex(bk, -ck) / (2.0 * area2);
            row.emplace_back(nodes[k], scale * (dzbar - mu_avg * dz));
            covered[nodes[k]] = 1;
        }
        row_entries.push_back(std::move(row));
    }

    // nodes untouched by any triangle get a weak tie to a covered neighbor
    for (int k : node_of) {
        if (covered[k]) continue;
        int i = k % g.nx, j = k / g.nx;
        const int di[8] = {1, -1, 0, 0, 1, 1, -1, -1}, dj[8] = {0, 0, 1, -1, 1, -1, 1, -1};
        bool tied = false;
        for (int d = 0; d < 8 && !tied; ++d) {
            int ni = i + di[d], nj = j + dj[d];
            if (g.inside(ni, nj) && covered[g.idx(ni, nj)]) {
                row_entries.push_back(
                    {{k, Complex(1e-3, 0)}, {g.idx(ni, nj), Complex(-1e-3, 0)}});
                tied = true;
            }
        }
        if (!tied) throw BendError(ErrKind::SolverDiverged, "isolated node cannot be constrained");
    }

    // eliminate the pinned unknowns
    std::vector<int> col_of(g.mask.size(), -1);
    int n_free = 0;
    for (int k : node_of)
        if (k != pin0 && k != pin1) col_of[k] = n_free++;

    const int m_rows = int(row_entries.size());
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(m_rows);
    std::vector<Triplet> trips;
    trips.reserve(3 * row_entries.size());
    for (int r = 0; r < m_rows; ++r)
        for (auto& [node, coef] : row_entries[r]) {
            if (node == pin0)
                continue;  // pin value is 0
            else if (node == pin1)
                b(r) -= coef * opts.pin1_value;
            else
                trips.emplace_back(r, col_of[node], coef);
        }

    SpMat A(m_rows, n_free);
    A.setFromTriplets(trips.begin(), trips.end());
    SpMat M = SpMat(A.adjoint()) * A;
    M.makeCompressed();
    Eigen::VectorXcd rhs = A.adjoint() * b;

    Eigen::SimplicialLDLT<SpMat> ldlt;
    ldlt.compute(M);
    Eigen::VectorXcd zfree;
    if (ldlt.info() == Eigen::Success) {
        zfree = ldlt.solve(rhs);
    } else {
        Eigen::SparseLU<SpMat> lu;
        lu.compute(M);
        if (lu.info() != Eigen::Success)
            throw BendError(ErrKind::SolverDiverged, "normal equations are singular");
        zfree = lu.solve(rhs);
    }
    if (!zfree.allFinite())
        throw BendError(ErrKind::SolverDiverged, "least-squares solution is not finite");

    FirstIntegral fi;
    fi.Z = ComplexField(g);
    fi.pin0 = pin0;
    fi.pin1 = pin1;
    for (int k : node_of) {
        if (k == pin0)
            fi.Z[k] = Complex(0, 0);
        else if (k == pin1)
            fi.Z[k] = opts.pin1_value;
        else
            fi.Z[k] = zfree(col_of[k]);
    }

    fi.Zs = differentiate(g, fi.Z, Axis::S);
    fi.Zt = differentiate(g, fi.Z, Axis::T);
    fi.jac = ScalarField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j))
                fi.jac(i, j) = std::imag(std::conj(fi.Zs(i, j)) * fi.Zt(i, j));

    // residual norm excludes degenerate collars and nodes without clean stencils
    ComplexField LZ = apply_L(field, fi.Z, g);
    double num = 0, den = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j) || field.degenerate(i, j) || !g.stencil_ok[g.idx(i, j)]) continue;
            num += std::norm(LZ(i, j));
            double grad = std::abs(fi.Zs(i, j)) + std::abs(fi.Zt(i, j));
            den += grad * grad;
        }
    if (den <= 0) throw BendError(ErrKind::SolverDiverged, "solution has zero gradient");
    fi.residual_rel = std::sqrt(num / den);

    // Jacobian sign census on clean interior nodes; the 4h discs around planar
    // points are skipped (there the truncation error is O((h/r)^2) relative to
    // the Jacobian itself, so no sign can be certified at any resolution)
    auto near_planar = [&](int i, int j) {
        for (const auto& p : planar)
            if (std::hypot(g.s(i) - p.s, g.t(j) - p.t) <= 4.0 * g.h + 1e-12) return true;
        return false;
    };
    long pos = 0, neg = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.is_interior(i, j) || field.degenerate(i, j) || !g.stencil_ok[g.idx(i, j)] ||
                near_planar(i, j))
                continue;
            if (fi.jac(i, j) > 0)
                ++pos;
            else
                ++neg;
        }
    fi.jac_sign = pos >= neg ? 1 : -1;
    long flips = std::min(pos, neg);
    if (flips > 0)
        throw BendError(ErrKind::InjectivityFailed,
                        "Jacobian sign flips at " + std::to_string(flips) +
                            " nodes outside planar neighborhoods");

    for (const auto& p : planar) fi.planar_images.push_back(fi.Z(p.i, p.j));
    return fi;
}

double PlanarPointModel::M_of(double phi) const { return P.d1(phi) / (m * P.eval(phi)); }

double PlanarPointModel::positivity(double phi) const {
    double p = P.eval(phi), p1 = P.d1(phi), p2 = P.d2(phi);
    return double(m) * m * p * p + m * p * p2 - (m - 1.0) * p1 * p1;
}

double PlanarPointModel::N_of(double phi) const {
    double p = P.eval(phi);
    return std::sqrt(positivity(phi) / ((m - 1.0) * p * p)) / m;
}

MuResult mu_exponent(const PlanarPointModel& model, int panels) {
    if (model.m <= 2)
        throw BendError(ErrKind::CurvatureProfileInvalid,
                        "degree m must exceed 2, got " + std::to_string(model.m));
    double int_N = 0, int_M = 0;
    const double dphi = 2.0 * M_PI / panels;
    for (int k = 0; k < panels; ++k) {
        double phi = k * dphi;
        if (model.P.eval(phi) <= 0)
            throw BendError(ErrKind::CurvatureProfileInvalid, "profile P is not positive");
        if (model.positivity(phi) <= 0)
            throw BendError(ErrKind::CurvatureProfileInvalid,
                            "curvature positivity expression fails at phi = " +
                                std::to_string(phi));
        int_N += model.N_of(phi) * dphi;
        int_M += model.M_of(phi) * dphi;
    }
    if (std::abs(int_M) >= 1e-10)
        throw BendError(ErrKind::CurvatureProfileInvalid,
                        "integral of M over a period must vanish, got " + std::to_string(int_M));
    MuResult out;
    out.integral_M = int_M;
    out.mu = 2.0 * M_PI / int_N;
    if (!(out.mu > 0))
        throw BendError(ErrKind::CurvatureProfileInvalid, "computed exponent is not positive");
    return out;
}

LocalModelFit validate_local_model(const FirstIntegral& fi, const DomainGrid& g,
                                   const PlanarPoint& p, double mu) {
    Complex zp = fi.Z(p.i, p.j);
    std::vector<double> lx, ly;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double r = std::hypot(g.s(i) - p.s, g.t(j) - p.t);
            if (r < 3.0 * g.h || r > 12.0 * g.h) continue;
            double mag = std::abs(fi.Z(i, j) - zp);
            if (mag <= 0) continue;
            lx.push_back(std::log(r));
            ly.push_back(std::log(mag));
        }
    if (lx.size() < 8)
        throw BendError(ErrKind::FitUnstable, "annulus 3h..12h has too few nodes");
    LocalModelFit out;
    out.fit = fit_slope(lx, ly);
    if (out.fit.r2 < 0.99)
        throw BendError(ErrKind::FitUnstable,
                        "local-model fit R^2 = " + std::to_string(out.fit.r2));
    out.rel_dev = std::abs(out.fit.slope - mu) / mu;
    return out;
}

InjectivityReport check_injectivity(const FirstIntegral& fi, const DomainGrid& g,
                                    const AsymptoticField& field,
                                    const std::vector<PlanarPoint>& planar) {
    InjectivityReport rep;
    auto near_planar = [&](int i, int j) {
        for (const auto& p : planar)
            if (std::hypot(g.s(i) - p.s, g.t(j) - p.t) <= 4.0 * g.h + 1e-12) return true;
        return false;
    };
    long pos = 0, neg = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.is_interior(i, j) || field.degenerate(i, j) || !g.stencil_ok[g.idx(i, j)] ||
                near_planar(i, j))
                continue;
            if (fi.jac(i, j) > 0)
                ++pos;
            else
                ++neg;
        }
    rep.jac_sign = pos >= neg ? 1 : -1;
    rep.sign_flips = int(std::min(pos, neg));
    rep.jacobian_ok = rep.sign_flips == 0;

    // up to 16 deep-interior sample nodes, deterministic stride
    std::vector<int> candidates;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.is_interior(i, j) || field.degenerate(i, j)) continue;
            bool deep = true;
            for (int b = -4; b <= 4 && deep; ++b)
                for (int a = -4; a <= 4; ++a)
                    if (!g.inside(i + a, j + b)) {
                        deep = false;
                        break;
                    }
            if (deep) candidates.push_back(g.idx(i, j));
        }
    const int n_samples = std::min<int>(16, int(candidates.size()));
    rep.winding_ok = n_samples > 0;
    for (int k = 0; k < n_samples; ++k) {
        int node = candidates[size_t(k) * candidates.size() / std::max(1, n_samples)];
        Complex p = fi.Z[node];
        double angle = 0;
        const auto& tr = g.boundary_trace;
        for (size_t a = 0; a < tr.size(); ++a) {
            Complex za = fi.Z[tr[a]] - p;
            Complex zb = fi.Z[tr[(a + 1) % tr.size()]] - p;
            angle += std::arg(zb / za);
        }
        int w = int(std::lround(angle / (2.0 * M_PI)));
        rep.windings.push_back(w);
        if (w != rep.jac_sign) rep.winding_ok = false;
    }
    rep.pass = rep.jacobian_ok && rep.winding_ok;
    return rep;
}

} // namespace bend
