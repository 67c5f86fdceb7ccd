#pragma once

#include <vector>

#include "bend/grid.hpp"
#include "bend/surface.hpp"
#include "bend/vekua.hpp"

namespace bend {

// smallest M with u, v vanishing to order >= k+1 at every planar point:
// M = max_j ceil((k + mK_j + 1)/mu_j), at least 1 when planar points exist
int choose_M(int k, const std::vector<std::pair<double, double>>& planar_mu_mk);

// w(s,t) = W(Z(s,t)): nodewise composition over the shared sample set
ComplexField pullback_w(const VekuaSolution& sol, const VekuaProblem& problem,
                        const DomainGrid& grid);

struct ScalarBendingData {
    ComplexField w;
    ScalarField u, v;
    double boundary_jump = 0;  // max |u|,|v| just outside the zeroed planar discs,
                               // relative to the field sup
};

// v = (w - wbar)/(2i sqrt(eg - f^2)), u = (w + wbar + 2 f v)/(2 g); planar
// discs of radius 2h get u = v = 0
ScalarBendingData recover_uv(const ComplexField& w, const FundamentalForms& forms,
                             const DomainGrid& grid, const std::vector<PlanarPoint>& planar);

struct BendingField {
    Vec3Field U;
    ScalarField rho1, rho2, rho3;   // dR . dU residual components
    double residual_rel = 0;        // relative summary off planar discs
    double used_row_residual = 0;   // sup |rho1|
    double unused_row_residual = 0; // max(sup |rho2|, sup |rho3|)
    double vt_cross_check = 0;      // recovery with the v_t third row instead of u_s
    std::vector<SlopeFit> vanish_fits;  // |U| vs r at each planar point
    int smoothness_k = 0;
};

// Nodewise 3x3 solve of rows (Rs, Rt, Rss) . U = (u, v, u_s); U = 0 inside
// planar discs. Fills the residual fields and diagnostics.
BendingField recover_U(const SurfaceJet& jet, const ScalarBendingData& data,
                       const FundamentalForms& forms, const DomainGrid& grid,
                       const std::vector<PlanarPoint>& planar, int smoothness_k);

// the three defining identities of dR . dU = 0, with discrete U derivatives
void bending_residual(const SurfaceJet& jet, BendingField& bf, const DomainGrid& grid,
                      const std::vector<PlanarPoint>& planar);

struct RigidMotionFit {
    Vec3 A = Vec3::Zero(), B = Vec3::Zero();
    double relative_residual = 0;
    double normal_eq_residual = 0;
    bool nontrivial = false;  // relative residual >= 0.1
};

RigidMotionFit rigid_fit(const Vec3Field& R, const Vec3Field& U, const DomainGrid& grid);

struct DeformationFamily {
    std::vector<double> sigmas;
    std::vector<double> defects;        // sup-norm first-form discrepancy vs base
    std::vector<double> odd_defects;    // sup |forms(+sigma) - forms(-sigma)| / 2
    double slope = 0;                   // log defect vs log sigma
    std::vector<double> window_slopes;  // consecutive-pair slopes
    double pm_identity_err = 0;         // even-part identity, exact in exact arithmetic
};

DeformationFamily make_deformation(const SurfaceJet& jet, const Vec3Field& U,
                                   const std::vector<double>& sigmas, const DomainGrid& grid);

// deformed surface positions R + sigma U (for mesh export)
Vec3Field deformed_positions(const SurfaceJet& jet, const Vec3Field& U, double sigma,
                             const DomainGrid& grid);

} // namespace bend
