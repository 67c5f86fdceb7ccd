#pragma once

#include "bend/asymptotic.hpp"
#include "bend/first_integral.hpp"

namespace bend::testutil {

// structure with constant coefficients g and lambda, nowhere degenerate
inline AsymptoticField constant_field(const DomainGrid& g, double gval, Complex lam) {
    AsymptoticField f{ComplexField(g), ScalarField(g), ComplexField(g),
                      Field<unsigned char>(g, (unsigned char)0), 0.0};
    const Complex I(0, 1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            f.g(i, j) = gval;
            f.lambda(i, j) = lam;
            f.beltrami(i, j) = -(gval + I * lam) / (gval - I * lam);
            f.max_abs_beltrami = std::abs(f.beltrami(i, j));
        }
    return f;
}

inline AsymptoticField field_for(const FundamentalForms& ff, const DomainGrid& g) {
    auto lambda = asymptotic_direction(ff, g);
    return build_field(ff, lambda, g);
}

} // namespace bend::testutil
