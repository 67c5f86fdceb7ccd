#pragma once

#include <vector>

#include "bend/asymptotic.hpp"
#include "bend/grid.hpp"
#include "bend/surface.hpp"

namespace bend {

struct FirstIntegralOptions {
    Complex pin1_value = Complex(1, 0);  // gauge: Z(q0) = 0, Z(q1) = pin1_value
    double degenerate_weight = 1e-3;     // down-weight for cells touching planar collars
};

struct FirstIntegral {
    ComplexField Z, Zs, Zt;
    ScalarField jac;     // Im(conj(Zs) Zt)
    int jac_sign = 1;
    int pin0 = -1, pin1 = -1;  // node ids of the normalization pins
    double residual_rel = 0;   // ||LZ||_2 / || |Zs| + |Zt| ||_2 off excluded zones
    std::vector<Complex> planar_images;
};

// Global least-squares solve of LZ = 0 in Beltrami form (Z_zetabar = mu_B Z_zeta)
// over P1 triangles, pinned at two nodes. Throws SolverDiverged or
// InjectivityFailed.
FirstIntegral solve_first_integral(const AsymptoticField& field, const DomainGrid& grid,
                                   const std::vector<PlanarPoint>& planar = {},
                                   const FirstIntegralOptions& opts = {});

// Local planar-point model: degree m and profile P give
//   M = P'/(mP),  N = (1/m) sqrt((m^2 P^2 + m P P'' - (m-1) P'^2)/((m-1) P^2))
struct PlanarPointModel {
    int m = 0;
    ProfileTrigPoly P;

    double M_of(double phi) const;
    double N_of(double phi) const;
    // the curvature positivity expression m^2 P^2 + m P P'' - (m-1) P'^2
    double positivity(double phi) const;
};

struct MuResult {
    double mu = 0;
    double integral_M = 0;  // must vanish; asserted below 1e-10
};

// 1/mu = (1/2pi) int_0^2pi N(phi) dphi by the periodic rectangle rule
MuResult mu_exponent(const PlanarPointModel& model, int panels = 1024);

struct LocalModelFit {
    SlopeFit fit;
    double rel_dev = 0;  // |slope - mu| / mu
};

// log |Z - Z(p)| against log r over the annulus 3h <= r <= 12h
LocalModelFit validate_local_model(const FirstIntegral& fi, const DomainGrid& grid,
                                   const PlanarPoint& p, double mu);

struct InjectivityReport {
    int jac_sign = 1;
    int sign_flips = 0;
    std::vector<int> windings;
    bool jacobian_ok = false;
    bool winding_ok = false;
    bool pass = false;
};

// Jacobian sign census plus boundary-image winding numbers around 16 sampled
// interior image points. The census skips the 4h discs around planar points
// where the discrete Jacobian cannot certify a sign. Report only, never throws.
InjectivityReport check_injectivity(const FirstIntegral& fi, const DomainGrid& grid,
                                    const AsymptoticField& field,
                                    const std::vector<PlanarPoint>& planar = {});

} // namespace bend
