#include "bend/surface.hpp"

#include <cmath>

namespace bend {

double ProfileTrigPoly::eval(double phi) const {
    double acc = 0;
    for (size_t k = 0; k < cos_c.size(); ++k) acc += cos_c[k] * std::cos(k * phi);
    for (size_t k = 1; k < sin_c.size(); ++k) acc += sin_c[k] * std::sin(k * phi);
    return acc;
}

double ProfileTrigPoly::d1(double phi) const {
    double acc = 0;
    for (size_t k = 1; k < cos_c.size(); ++k) acc -= cos_c[k] * k * std::sin(k * phi);
    for (size_t k = 1; k < sin_c.size(); ++k) acc += sin_c[k] * k * std::cos(k * phi);
    return acc;
}

double ProfileTrigPoly::d2(double phi) const {
    double acc = 0;
    for (size_t k = 1; k < cos_c.size(); ++k) acc -= cos_c[k] * k * k * std::cos(k * phi);
    for (size_t k = 1; k < sin_c.size(); ++k) acc -= sin_c[k] * k * k * std::sin(k * phi);
    return acc;
}

int ProfileTrigPoly::degree() const {
    int d = 0;
    for (size_t k = 1; k < cos_c.size(); ++k)
        if (cos_c[k] != 0) d = int(k);
    for (size_t k = 1; k < sin_c.size(); ++k)
        if (sin_c[k] != 0) d = std::max(d, int(k));
    return d;
}

SurfaceDefinition SurfaceDefinition::graph(std::string name, RegionSpec domain,
                                           std::function<double(double, double)> z,
                                           std::function<double(double, double)> zx,
                                           std::function<double(double, double)> zy,
                                           std::function<double(double, double)> zxx,
                                           std::function<double(double, double)> zxy,
                                           std::function<double(double, double)> zyy,
                                           std::vector<DeclaredPlanarPoint> declared) {
    SurfaceDefinition def;
    def.name = std::move(name);
    def.domain = domain;
    def.declared = std::move(declared);
    def.R = [z](double s, double t) { return Vec3(s, t, z(s, t)); };
    def.Rs = [zx](double s, double t) { return Vec3(1, 0, zx(s, t)); };
    def.Rt = [zy](double s, double t) { return Vec3(0, 1, zy(s, t)); };
    def.Rss = [zxx](double s, double t) { return Vec3(0, 0, zxx(s, t)); };
    def.Rst = [zxy](double s, double t) { return Vec3(0, 0, zxy(s, t)); };
    def.Rtt = [zyy](double s, double t) { return Vec3(0, 0, zyy(s, t)); };
    return def;
}

SurfaceDefinition SurfaceDefinition::from_expression(std::string name, RegionSpec domain,
                                                     const std::string& z_expr,
                                                     std::vector<DeclaredPlanarPoint> declared) {
    Expr z = Expr::parse(z_expr);
    Expr zx = z.derivative("s"), zy = z.derivative("t");
    Expr zxx = zx.derivative("s"), zxy = zx.derivative("t"), zyy = zy.derivative("t");
    auto wrap = [](Expr e) {
        return [e](double s, double t) { return e.eval({{"s", s}, {"t", t}}); };
    };
    return graph(std::move(name), domain, wrap(z), wrap(zx), wrap(zy), wrap(zxx), wrap(zxy),
                 wrap(zyy), std::move(declared));
}

std::vector<std::string> catalog_names() {
    return {"sphere-cap", "paraboloid", "quartic", "sextic", "perturbed-quartic"};
}

SurfaceDefinition catalog_surface(const std::string& name) {
    if (name == "sphere-cap") {
        // z = sqrt(1 - s^2 - t^2), K = 1
        auto w = [](double s, double t) { return std::sqrt(1.0 - s * s - t * t); };
        return SurfaceDefinition::graph(
            name, RegionSpec::disc(0.7), [w](double s, double t) { return w(s, t); },
            [w](double s, double t) { return -s / w(s, t); },
            [w](double s, double t) { return -t / w(s, t); },
            [w](double s, double t) { double u = w(s, t); return -(1.0 - t * t) / (u * u * u); },
            [w](double s, double t) { double u = w(s, t); return -s * t / (u * u * u); },
            [w](double s, double t) { double u = w(s, t); return -(1.0 - s * s) / (u * u * u); });
    }
    if (name == "paraboloid") {
        return SurfaceDefinition::graph(
            name, RegionSpec::disc(1.0),
            [](double s, double t) { return 0.5 * (s * s + t * t); },
            [](double s, double) { return s; }, [](double, double t) { return t; },
            [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
            [](double, double) { return 1.0; });
    }
    if (name == "quartic") {
        // z = (s^2 + t^2)^2, planar point of degree 4 at the origin, P = 1
        DeclaredPlanarPoint p;
        p.s = 0;
        p.t = 0;
        p.m = 4;
        p.profile.cos_c = {1.0};
        return SurfaceDefinition::graph(
            name, RegionSpec::disc(0.8),
            [](double s, double t) { double q = s * s + t * t; return q * q; },
            [](double s, double t) { return 4.0 * s * (s * s + t * t); },
            [](double s, double t) { return 4.0 * t * (s * s + t * t); },
            [](double s, double t) { return 4.0 * (s * s + t * t) + 8.0 * s * s; },
            [](double s, double t) { return 8.0 * s * t; },
            [](double s, double t) { return 4.0 * (s * s + t * t) + 8.0 * t * t; }, {p});
    }
    if (name == "sextic") {
        // z = (s^2 + t^2)^3, degree-6 planar point, P = 1
        DeclaredPlanarPoint p;
        p.s = 0;
        p.t = 0;
        p.m = 6;
        p.profile.cos_c = {1.0};
        return SurfaceDefinition::graph(
            name, RegionSpec::disc(0.8),
            [](double s, double t) { double q = s * s + t * t; return q * q * q; },
            [](double s, double t) { double q = s * s + t * t; return 6.0 * s * q * q; },
            [](double s, double t) { double q = s * s + t * t; return 6.0 * t * q * q; },
            [](double s, double t) { double q = s * s + t * t; return 6.0 * q * q + 24.0 * s * s * q; },
            [](double s, double t) { double q = s * s + t * t; return 24.0 * s * t * q; },
            [](double s, double t) { double q = s * s + t * t; return 6.0 * q * q + 24.0 * t * t * q; },
            {p});
    }
    if (name == "perturbed-quartic") {
        // z = (s^2+t^2)^2 + eps (s^2-t^2)^2 = r^4 (1 + eps cos^2 2phi):
        // nonconstant profile P = (1 + eps/2) + (eps/2) cos 4phi
        const double eps = 0.2;
        DeclaredPlanarPoint p;
        p.s = 0;
        p.t = 0;
        p.m = 4;
        p.profile.cos_c = {1.0 + eps / 2.0, 0, 0, 0, eps / 2.0};
        return SurfaceDefinition::graph(
            name, RegionSpec::disc(0.8),
            [eps](double s, double t) {
                double q = s * s + t * t, d = s * s - t * t;
                return q * q + eps * d * d;
            },
            [eps](double s, double t) {
                double q = s * s + t * t, d = s * s - t * t;
                return 4.0 * s * q + 4.0 * eps * s * d;
            },
            [eps](double s, double t) {
                double q = s * s + t * t, d = s * s - t * t;
                return 4.0 * t * q - 4.0 * eps * t * d;
            },
            [eps](double s, double t) {
                double q = s * s + t * t, d = s * s - t * t;
                return 4.0 * q + 8.0 * s * s + 4.0 * eps * d + 8.0 * eps * s * s;
            },
            [eps](double s, double t) { return 8.0 * s * t - 8.0 * eps * s * t; },
            [eps](double s, double t) {
                double q = s * s + t * t, d = s * s - t * t;
                return 4.0 * q + 8.0 * t * t - 4.0 * eps * d + 8.0 * eps * t * t;
            },
            {p});
    }
    throw BendError(ErrKind::ConfigError, "unknown catalog surface '" + name + "'");
}

SurfaceJet eval_jet(const SurfaceDefinition& def, const DomainGrid& g) {
    SurfaceJet jet{Vec3Field(g), Vec3Field(g), Vec3Field(g),
                   Vec3Field(g), Vec3Field(g), Vec3Field(g), Vec3Field(g)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double s = g.s(i), t = g.t(j);
            jet.R(i, j) = def.R(s, t);
            jet.Rs(i, j) = def.Rs(s, t);
            jet.Rt(i, j) = def.Rt(s, t);
            jet.Rss(i, j) = def.Rss(s, t);
            jet.Rst(i, j) = def.Rst(s, t);
            jet.Rtt(i, j) = def.Rtt(s, t);
            Vec3 cr = jet.Rs(i, j).cross(jet.Rt(i, j));
            double nrm = cr.norm();
            if (nrm < 1e-10)
                throw BendError(ErrKind::DegenerateImmersion,
                                "|Rs x Rt| < 1e-10 at node (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
            jet.N(i, j) = cr / nrm;
        }
    return jet;
}

FundamentalForms fundamental_forms(const SurfaceJet& jet, const DomainGrid& g) {
    FundamentalForms ff{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g),
                        ScalarField(g), ScalarField(g), ScalarField(g)};
    double max_abs_K = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const Vec3 &rs = jet.Rs(i, j), &rt = jet.Rt(i, j), &n = jet.N(i, j);
            ff.E(i, j) = rs.dot(rs);
            ff.F(i, j) = rs.dot(rt);
            ff.G(i, j) = rt.dot(rt);
            ff.e(i, j) = jet.Rss(i, j).dot(n);
            ff.f(i, j) = jet.Rst(i, j).dot(n);
            ff.g(i, j) = jet.Rtt(i, j).dot(n);
            double denom = ff.E(i, j) * ff.G(i, j) - ff.F(i, j) * ff.F(i, j);
            ff.K(i, j) = (ff.e(i, j) * ff.g(i, j) - ff.f(i, j) * ff.f(i, j)) / denom;
            max_abs_K = std::max(max_abs_K, std::abs(ff.K(i, j)));
        }

    // K < 0 on a cluster of nodes breaks the curvature hypothesis outright
    double kappa_tol = 1e-10 * max_abs_K;
    int neg = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j) && ff.K(i, j) < -kappa_tol - 1e-300) ++neg;
    if (neg >= std::max(4, g.inside_count / 100))
        throw BendError(ErrKind::OrientationUndecidable,
                        "K < 0 on an open set (" + std::to_string(neg) + " nodes)");

    // normalize orientation so g > 0 where K > 0; connectivity makes a single
    // anchor sufficient
    int ai = -1, aj = -1;
    double best = kappa_tol;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j) && ff.K(i, j) > best) {
                best = ff.K(i, j);
                ai = i;
                aj = j;
            }
    if (ai >= 0 && ff.g(ai, aj) < 0) {
        ff.orientation_flipped = true;
        for (size_t k = 0; k < ff.e.size(); ++k) {
            ff.e[k] = -ff.e[k];
            ff.f[k] = -ff.f[k];
            ff.g[k] = -ff.g[k];
        }
    }

    ff.max_K = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) ff.max_K = std::max(ff.max_K, ff.K(i, j));
    return ff;
}

std::vector<PlanarPoint> detect_planar_points(const FundamentalForms& forms,
                                              const DomainGrid& g,
                                              const SurfaceDefinition& def,
                                              double planar_tol) {
    if (!(forms.max_K > 0))
        throw BendError(ErrKind::CurvatureHypothesisViolated, "K is nowhere positive");
    const double tol = planar_tol * forms.max_K;

    std::vector<char> below(g.mask.size(), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j) && forms.K(i, j) < tol) {
                if (g.is_boundary(i, j))
                    throw BendError(ErrKind::CurvatureHypothesisViolated,
                                    "K vanishes at a boundary node");
                below[g.idx(i, j)] = 1;
            }

    // cluster the sub-tolerance set; each component must be point-like
    double bx0, by0, bx1, by1;
    g.region.bbox(bx0, by0, bx1, by1);
    const double domain_diam = std::hypot(bx1 - bx0, by1 - by0);
    std::vector<char> seen(g.mask.size(), 0);
    std::vector<PlanarPoint> points;
    for (int j0 = 0; j0 < g.ny; ++j0)
        for (int i0 = 0; i0 < g.nx; ++i0) {
            int k0 = g.idx(i0, j0);
            if (!below[k0] || seen[k0]) continue;
            std::vector<int> comp;
            std::vector<int> stack{k0};
            seen[k0] = 1;
            while (!stack.empty()) {
                int k = stack.back();
                stack.pop_back();
                comp.push_back(k);
                int i = k % g.nx, j = k / g.nx;
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int ni = i + di[d], nj = j + dj[d];
                    if (g.valid(ni, nj) && below[g.idx(ni, nj)] && !seen[g.idx(ni, nj)]) {
                        seen[g.idx(ni, nj)] = 1;
                        stack.push_back(g.idx(ni, nj));
                    }
                }
            }
            // representative: minimum-K node
            int rep = comp[0];
            for (int k : comp)
                if (forms.K[k] < forms.K[rep] || (forms.K[k] == forms.K[rep] && k < rep)) rep = k;
            int ri = rep % g.nx, rj = rep / g.nx;
            double max_d = 0;
            for (int k : comp) {
                double dx = g.s(k % g.nx) - g.s(ri), dy = g.t(k / g.nx) - g.t(rj);
                max_d = std::max(max_d, std::hypot(dx, dy));
            }
            if (max_d > 0.25 * domain_diam)
                throw BendError(ErrKind::CurvatureHypothesisViolated,
                                "zero set of K is not isolated (cluster extent " +
                                    std::to_string(max_d) + ")");
            PlanarPoint p;
            p.i = ri;
            p.j = rj;
            p.s = g.s(ri);
            p.t = g.t(rj);
            points.push_back(p);
        }

    for (size_t a = 0; a < points.size(); ++a)
        for (size_t b = a + 1; b < points.size(); ++b) {
            double d = std::hypot(points[a].s - points[b].s, points[a].t - points[b].t);
            if (d < 4.0 * g.h)
                throw BendError(ErrKind::CurvatureHypothesisViolated,
                                "planar points closer than 4h (unresolvable at this grid)");
        }

    // attach declared degree/profile where one matches
    for (auto& p : points)
        for (const auto& d : def.declared)
            if (std::hypot(p.s - d.s, p.t - d.t) <= 2.0 * g.h) {
                p.declared_m = d.m;
                p.declared_profile = d.profile;
            }
    return points;
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    SlopeFit out;
    out.count = int(x.size());
    if (x.size() < 2 || x.size() != y.size()) return out;
    double n = double(x.size());
    double mx = 0, my = 0;
    for (size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0) return out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return out;
}

double vanishing_order(const FundamentalForms& forms, const DomainGrid& g,
                       const PlanarPoint& p, SlopeFit* fit_out) {
    std::vector<double> lx, ly;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double r = std::hypot(g.s(i) - p.s, g.t(j) - p.t);
            if (r < 3.0 * g.h || r > 12.0 * g.h) continue;
            if (forms.K(i, j) <= 0) continue;
            lx.push_back(std::log(r));
            ly.push_back(std::log(forms.K(i, j)));
        }
    if (lx.size() < 8)
        throw BendError(ErrKind::FitUnstable,
                        "annulus 3h..12h around planar point has too few nodes");
    SlopeFit fit = fit_slope(lx, ly);
    if (fit_out) *fit_out = fit;
    if (fit.r2 < 0.99)
        throw BendError(ErrKind::FitUnstable,
                        "log K vs log r fit has R^2 = " + std::to_string(fit.r2));
    return fit.slope;
}

} // namespace bend
