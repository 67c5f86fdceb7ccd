#include "bend/asymptotic.hpp"

#include <cmath>

namespace bend {

ComplexField asymptotic_direction(const FundamentalForms& forms, const DomainGrid& g) {
    ComplexField lambda(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double disc = forms.e(i, j) * forms.g(i, j) - forms.f(i, j) * forms.f(i, j);
            double scale = std::max(1.0, std::abs(forms.e(i, j) * forms.g(i, j)));
            if (disc < -1e-12 * scale)
                throw BendError(ErrKind::NegativeDiscriminant,
                                "eg - f^2 = " + std::to_string(disc) + " at node (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
            lambda(i, j) = Complex(-forms.f(i, j), std::sqrt(std::max(disc, 0.0)));
        }
    return lambda;
}

AsymptoticField build_field(const FundamentalForms& forms, const ComplexField& lambda,
                            const DomainGrid& g) {
    AsymptoticField out{ComplexField(g), ScalarField(g), ComplexField(g),
                        Field<unsigned char>(g, (unsigned char)0), 0.0};
    out.lambda = lambda;
    const Complex I(0, 1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out.g(i, j) = forms.g(i, j);
            Complex num = out.g(i, j) + I * lambda(i, j);
            Complex den = out.g(i, j) - I * lambda(i, j);
            if (std::abs(den) < 1e-14 * (1.0 + std::abs(num))) {
                out.beltrami(i, j) = Complex(-1, 0);  // degenerate limit value
                out.degenerate(i, j) = 1;
            } else {
                out.beltrami(i, j) = -num / den;
            }
        }
    // planar points flag a 2h collar: ellipticity is lost there and downstream
    // norms exclude it
    for (const auto& p : forms.planar)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.inside(i, j)) continue;
                if (std::hypot(g.s(i) - p.s, g.t(j) - p.t) <= 2.0 * g.h + 1e-12)
                    out.degenerate(i, j) = 1;
            }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j) && !out.degenerate(i, j))
                out.max_abs_beltrami = std::max(out.max_abs_beltrami, std::abs(out.beltrami(i, j)));
    return out;
}

ComplexField apply_L(const AsymptoticField& field, const ComplexField& f, const DomainGrid& g) {
    ComplexField ds = differentiate(g, f, Axis::S);
    ComplexField dt = differentiate(g, f, Axis::T);
    ComplexField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j))
                out(i, j) = field.g(i, j) * ds(i, j) + field.lambda(i, j) * dt(i, j);
    return out;
}

} // namespace bend
