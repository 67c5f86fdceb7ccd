#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bend/expr.hpp"
#include "bend/grid.hpp"

namespace bend {

// Positive trigonometric polynomial P(phi) = c0 + sum c_k cos(k phi) + s_k sin(k phi),
// with analytic first and second derivatives.
struct ProfileTrigPoly {
    std::vector<double> cos_c;  // cos_c[0] is the constant term
    std::vector<double> sin_c;  // sin_c[0] unused

    double eval(double phi) const;
    double d1(double phi) const;
    double d2(double phi) const;
    int degree() const;
};

struct DeclaredPlanarPoint {
    double s = 0, t = 0;
    int m = 0;                 // homogeneous degree of the graph function, > 2
    ProfileTrigPoly profile;   // P(phi) > 0
};

// Analytic surface patch: position jet supplied in closed form (graph surfaces
// derive it from z and its partials). No numerical differentiation of R.
struct SurfaceDefinition {
    std::string name;
    RegionSpec domain = RegionSpec::disc(1.0);
    std::function<Vec3(double, double)> R, Rs, Rt, Rss, Rst, Rtt;
    std::vector<DeclaredPlanarPoint> declared;

    static SurfaceDefinition graph(std::string name, RegionSpec domain,
                                   std::function<double(double, double)> z,
                                   std::function<double(double, double)> zx,
                                   std::function<double(double, double)> zy,
                                   std::function<double(double, double)> zxx,
                                   std::function<double(double, double)> zxy,
                                   std::function<double(double, double)> zyy,
                                   std::vector<DeclaredPlanarPoint> declared = {});

    // graph surface from the expression language; jet derived symbolically
    static SurfaceDefinition from_expression(std::string name, RegionSpec domain,
                                             const std::string& z_expr,
                                             std::vector<DeclaredPlanarPoint> declared = {});
};

// Built-in catalog: sphere-cap, paraboloid, quartic, sextic, perturbed-quartic.
std::vector<std::string> catalog_names();
SurfaceDefinition catalog_surface(const std::string& name);

struct SurfaceJet {
    Vec3Field R, Rs, Rt, Rss, Rst, Rtt;
    Vec3Field N;  // geometric unit normal (Rs x Rt)/|Rs x Rt|
};

struct PlanarPoint {
    double s = 0, t = 0;
    int i = 0, j = 0;
    double m_K = 0;                     // fitted vanishing order of K
    std::optional<int> declared_m;      // homogeneous degree if declared
    std::optional<ProfileTrigPoly> declared_profile;
};

struct FundamentalForms {
    ScalarField E, F, G, e, f, g, K;
    bool orientation_flipped = false;
    double max_K = 0;
    std::vector<PlanarPoint> planar;  // filled by detect_planar_points
};

SurfaceJet eval_jet(const SurfaceDefinition& def, const DomainGrid& grid);
FundamentalForms fundamental_forms(const SurfaceJet& jet, const DomainGrid& grid);

// planar_tol is relative to max K (default 1e-6); returned points are matched
// against declared planar points within 2h.
std::vector<PlanarPoint> detect_planar_points(const FundamentalForms& forms,
                                              const DomainGrid& grid,
                                              const SurfaceDefinition& def,
                                              double planar_tol = 1e-6);

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    int count = 0;
};

// least-squares slope of y against x
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// log K vs log r over the annulus 3h <= r <= 12h around p
double vanishing_order(const FundamentalForms& forms, const DomainGrid& grid,
                       const PlanarPoint& p, SlopeFit* fit_out = nullptr);

} // namespace bend
