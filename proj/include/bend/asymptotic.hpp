#pragma once

#include "bend/grid.hpp"
#include "bend/surface.hpp"

namespace bend {

// Complex field of asymptotic directions: L = g d/ds + lambda d/dt with
// lambda = -f + i sqrt(eg - f^2), plus the Beltrami coefficient of L written
// in d/dzeta, d/dzetabar coordinates.
struct AsymptoticField {
    ComplexField lambda;
    ScalarField g;                     // coefficient of d/ds
    ComplexField beltrami;             // mu_B = -(g + i lambda)/(g - i lambda)
    Field<unsigned char> degenerate;   // planar nodes and a 2h collar around them
    double max_abs_beltrami = 0;       // over non-degenerate nodes
};

ComplexField asymptotic_direction(const FundamentalForms& forms, const DomainGrid& grid);

// forms.planar must be filled (detect_planar_points) so degenerate nodes get flagged
AsymptoticField build_field(const FundamentalForms& forms, const ComplexField& lambda,
                            const DomainGrid& grid);

// L f = g df/ds + lambda df/dt with the grid's difference stencils
ComplexField apply_L(const AsymptoticField& field, const ComplexField& f, const DomainGrid& grid);

} // namespace bend
