#pragma once

#include <vector>

#include "bend/asymptotic.hpp"
#include "bend/first_integral.hpp"
#include "bend/grid.hpp"
#include "bend/surface.hpp"

namespace bend {

// Coefficients of the equation C Lw = A w + B wbar built from triple products
// of LR, conj(LR) and L^2 R. C is real and <= 0, strictly negative off planar
// points.
struct VekuaCoefficients {
    ComplexField A, B, C;
    CVec3Field LR, L2R;
    double max_im_C_rel = 0;
};

VekuaCoefficients vekua_coefficients(const SurfaceJet& jet, const AsymptoticField& field,
                                     const DomainGrid& grid);

// The equation pushed forward to the Z-plane, in Wirtinger convention:
//   dW/dZbar = [a(Z) W + b(Z) Wbar] / prod_j (Z - Z_j)
// with the bounded coefficients a, b sampled at the grid images and the
// singular factor H = prod_j (Z - Z_j)^M.
struct VekuaProblem {
    std::vector<int> nodes;          // grid node ids of the samples
    std::vector<Complex> zeta;       // Z at the samples
    std::vector<double> area;        // Jacobian-weighted cell areas
    std::vector<Complex> a, b;       // bounded coefficients (zero on flagged nodes)
    std::vector<Complex> H;          // prod (Z - Z_j)^M
    std::vector<Complex> Hphase;     // conj(H)/H, unit modulus off the Z_j
    std::vector<char> flagged;       // degenerate collar (source dropped)
    std::vector<char> excluded;      // within 4h preimage of a planar point
    std::vector<Complex> Zj;
    int M = 0;
    double sup_a = 0, sup_b = 0;
};

VekuaProblem pushforward(const VekuaCoefficients& coeffs, const FirstIntegral& fi,
                         const AsymptoticField& field, const DomainGrid& grid,
                         const std::vector<PlanarPoint>& planar, int M);

// Cauchy-area (Pompeiu) transform T[f](z) = -(1/pi) sum f_s dA_s / (zeta_s - z),
// midpoint quadrature with the self cell dropped (the kernel integrates to zero
// over a cell centered at the target).
std::vector<Complex> pompeiu_transform(const std::vector<Complex>& zeta,
                                       const std::vector<double>& area,
                                       const std::vector<Complex>& f,
                                       const std::vector<Complex>& targets);

enum class PhiSeed { One, Z, Z2 };

struct VekuaSolveOptions {
    PhiSeed seed = PhiSeed::One;
    double tolerance = 1e-6;     // sup-norm residual of the integral equation
    int dense_max_unknowns = 4096;  // dense real-linear solve below this, iterative above
    int max_fixed_point = 60;
    int max_gmres = 400;
};

struct VekuaSolution {
    std::vector<Complex> W1, W;
    std::vector<Complex> phi;
    std::vector<double> alg_residual;      // |W1 - phi - T[src]| per sample
    double residual_modified = 0;          // sup of alg_residual
    double residual_original = 0;          // sup |H| * alg_residual off excluded discs
    std::vector<SlopeFit> vanish_fits;     // per singular point, slope of log|W| vs log|Z-Zj|
    std::string method;                    // "dense", "fixed-point" or "gmres"
    int iterations = 0;
};

// Solves W1 = phi + T[a W1 + b (conj H / H) conj(W1)] as a real-linear system;
// dense below the memory budget, damped fixed point with a GMRES fallback above.
VekuaSolution solve_modified(const VekuaProblem& problem, const VekuaSolveOptions& opts = {});

// W = H W1 plus vanishing-order fits and the assembled-equation residual.
// The annulus for the fits is 3h <= r <= 12h in preimage distance.
void assemble_solution(const VekuaProblem& problem, const DomainGrid& grid,
                       const std::vector<PlanarPoint>& planar, VekuaSolution& sol);

} // namespace bend
