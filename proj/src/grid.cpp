#include "bend/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace bend {

RegionSpec RegionSpec::disc(double r) {
    RegionSpec s;
    s.kind = Kind::Disc;
    s.radius = r;
    return s;
}

RegionSpec RegionSpec::rectangle(double x0, double y0, double x1, double y1) {
    RegionSpec s;
    s.kind = Kind::Rectangle;
    s.xmin = x0;
    s.ymin = y0;
    s.xmax = x1;
    s.ymax = y1;
    return s;
}

RegionSpec RegionSpec::polygon(std::vector<std::pair<double, double>> pts) {
    RegionSpec s;
    s.kind = Kind::Polygon;
    s.vertices = std::move(pts);
    return s;
}

RegionSpec RegionSpec::annulus(double r_in, double r_out) {
    RegionSpec s;
    s.kind = Kind::Annulus;
    s.inner_radius = r_in;
    s.radius = r_out;
    return s;
}

static std::vector<double> parse_numbers(const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

RegionSpec RegionSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "disc") {
        auto v = parse_numbers(args, ',');
        if (v.size() != 1 || v[0] <= 0) throw BendError(ErrKind::ConfigError, "disc needs a positive radius");
        return disc(v[0]);
    }
    if (kind == "rect") {
        auto v = parse_numbers(args, ',');
        if (v.size() != 4 || v[2] <= v[0] || v[3] <= v[1])
            throw BendError(ErrKind::ConfigError, "rect needs x0,y0,x1,y1 with positive extent");
        return rectangle(v[0], v[1], v[2], v[3]);
    }
    if (kind == "annulus") {
        auto v = parse_numbers(args, ',');
        if (v.size() != 2 || v[0] <= 0 || v[1] <= v[0])
            throw BendError(ErrKind::ConfigError, "annulus needs r_in,r_out with 0 < r_in < r_out");
        return annulus(v[0], v[1]);
    }
    if (kind == "poly") {
        std::vector<std::pair<double, double>> pts;
        std::stringstream ss(args);
        std::string pair_text;
        while (std::getline(ss, pair_text, ';')) {
            auto v = parse_numbers(pair_text, ',');
            if (v.size() != 2) throw BendError(ErrKind::ConfigError, "poly needs x,y;x,y;...");
            pts.emplace_back(v[0], v[1]);
        }
        if (pts.size() < 3) throw BendError(ErrKind::ConfigError, "poly needs at least 3 vertices");
        return polygon(std::move(pts));
    }
    throw BendError(ErrKind::ConfigError, "unknown region kind '" + kind + "'");
}

bool RegionSpec::contains(double x, double y) const {
    switch (kind) {
        case Kind::Disc:
            return x * x + y * y <= radius * radius;
        case Kind::Rectangle:
            return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
        case Kind::Annulus: {
            double r2 = x * x + y * y;
            return r2 >= inner_radius * inner_radius && r2 <= radius * radius;
        }
        case Kind::Polygon: {
            // even-odd crossing rule
            bool in = false;
            size_t n = vertices.size();
            for (size_t a = 0, b = n - 1; a < n; b = a++) {
                double xa = vertices[a].first, ya = vertices[a].second;
                double xb = vertices[b].first, yb = vertices[b].second;
                if ((ya > y) != (yb > y)) {
                    double xc = xa + (y - ya) / (yb - ya) * (xb - xa);
                    if (x < xc) in = !in;
                }
            }
            return in;
        }
    }
    return false;
}

void RegionSpec::bbox(double& bx0, double& by0, double& bx1, double& by1) const {
    switch (kind) {
        case Kind::Disc:
        case Kind::Annulus:
            bx0 = -radius;
            by0 = -radius;
            bx1 = radius;
            by1 = radius;
            return;
        case Kind::Rectangle:
            bx0 = xmin;
            by0 = ymin;
            bx1 = xmax;
            by1 = ymax;
            return;
        case Kind::Polygon: {
            bx0 = by0 = 1e300;
            bx1 = by1 = -1e300;
            for (auto& p : vertices) {
                bx0 = std::min(bx0, p.first);
                bx1 = std::max(bx1, p.first);
                by0 = std::min(by0, p.second);
                by1 = std::max(by1, p.second);
            }
            return;
        }
    }
}

std::string RegionSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::Disc: os << "disc:" << radius; break;
        case Kind::Annulus: os << "annulus:" << inner_radius << "," << radius; break;
        case Kind::Rectangle: os << "rect:" << xmin << "," << ymin << "," << xmax << "," << ymax; break;
        case Kind::Polygon: {
            os << "poly:";
            for (size_t i = 0; i < vertices.size(); ++i) {
                if (i) os << ";";
                os << vertices[i].first << "," << vertices[i].second;
            }
            break;
        }
    }
    return os.str();
}

namespace {

// Moore-neighbor contour trace of the inside-node set with backtracking
// (Jacob's stopping criterion). Visits the full outer contour.
std::vector<int> trace_boundary(const DomainGrid& g) {
    // start: inside node with smallest (j, i); its S neighbor is outside
    int si = -1, sj = -1;
    for (int j = 0; j < g.ny && si < 0; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                si = i;
                sj = j;
                break;
            }
    if (si < 0) throw BendError(ErrKind::ResolutionTooLow, "region contains no grid nodes");

    // neighbor ring, clockwise starting East
    static const int di[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static const int dj[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    auto dir_index = [&](int ddi, int ddj) {
        for (int d = 0; d < 8; ++d)
            if (di[d] == ddi && dj[d] == ddj) return d;
        return -1;
    };

    std::vector<int> loop{g.idx(si, sj)};
    int ci = si, cj = sj;
    int bdir = 2;  // backtrack pixel: South of start
    const int start_ci = ci, start_cj = cj, start_bdir = bdir;
    long guard = 8L * g.nx * g.ny + 16;
    for (;;) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            int d = (bdir + k) % 8;
            if (g.inside(ci + di[d], cj + dj[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) break;  // isolated single node
        // backtrack for the next step: the neighbor checked just before the hit
        int prev = (found + 7) % 8;
        int bpi = ci + di[prev], bpj = cj + dj[prev];
        ci += di[found];
        cj += dj[found];
        bdir = dir_index(bpi - ci, bpj - cj);
        if (ci == start_ci && cj == start_cj && bdir == start_bdir) break;
        loop.push_back(g.idx(ci, cj));
        if (--guard < 0)
            throw BendError(ErrKind::MultiplyConnectedDomain, "boundary trace did not close");
    }
    return loop;
}

} // namespace

DomainGrid build_domain(const RegionSpec& region, int n) {
    if (n < 3) throw BendError(ErrKind::ResolutionTooLow, "need resolution >= 3, got " + std::to_string(n));
    double bx0, by0, bx1, by1;
    region.bbox(bx0, by0, bx1, by1);
    double w = bx1 - bx0, hgt = by1 - by0;
    if (!(w > 0) || !(hgt > 0)) throw BendError(ErrKind::ConfigError, "region has empty bounding box");

    DomainGrid g;
    g.region = region;
    g.h = std::max(w, hgt) / n;
    g.nx = std::max(1, int(std::lround(w / g.h)));
    g.ny = std::max(1, int(std::lround(hgt / g.h)));
    g.x0 = bx0 + 0.5 * g.h;
    g.y0 = by0 + 0.5 * g.h;
    g.mask.assign(size_t(g.nx) * g.ny, NodeClass::Exterior);
    g.weight.assign(size_t(g.nx) * g.ny, 0.0);
    g.stencil_ok.assign(size_t(g.nx) * g.ny, 0);

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (region.contains(g.s(i), g.t(j))) g.mask[g.idx(i, j)] = NodeClass::Interior;

    // boundary flag: inside node with an exterior or off-lattice 4-neighbor
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            if (!g.inside(i - 1, j) || !g.inside(i + 1, j) || !g.inside(i, j - 1) ||
                !g.inside(i, j + 1))
                g.mask[g.idx(i, j)] = NodeClass::Boundary;
        }

    g.inside_count = 0;
    for (auto m : g.mask)
        if (m != NodeClass::Exterior) ++g.inside_count;
    if (g.inside_count == 0)
        throw BendError(ErrKind::ResolutionTooLow, "region contains no grid nodes at n=" + std::to_string(n));

    // single inside component
    {
        std::vector<char> seen(g.mask.size(), 0);
        std::queue<int> q;
        for (size_t k = 0; k < g.mask.size(); ++k)
            if (g.mask[k] != NodeClass::Exterior) {
                q.push(int(k));
                seen[k] = 1;
                break;
            }
        int reached = 0;
        while (!q.empty()) {
            int k = q.front();
            q.pop();
            ++reached;
            int i = k % g.nx, j = k / g.nx;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int ni = i + di[d], nj = j + dj[d];
                if (g.inside(ni, nj) && !seen[g.idx(ni, nj)]) {
                    seen[g.idx(ni, nj)] = 1;
                    q.push(g.idx(ni, nj));
                }
            }
        }
        if (reached != g.inside_count)
            throw BendError(ErrKind::MultiplyConnectedDomain,
                            "interior nodes split into multiple components");
    }

    // hole check: every exterior node must reach the lattice border
    {
        std::vector<char> seen(g.mask.size(), 0);
        std::queue<int> q;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                bool edge = (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1);
                if (edge && !g.inside(i, j) && !seen[g.idx(i, j)]) {
                    seen[g.idx(i, j)] = 1;
                    q.push(g.idx(i, j));
                }
            }
        while (!q.empty()) {
            int k = q.front();
            q.pop();
            int i = k % g.nx, j = k / g.nx;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int ni = i + di[d], nj = j + dj[d];
                if (g.valid(ni, nj) && !g.inside(ni, nj) && !seen[g.idx(ni, nj)]) {
                    seen[g.idx(ni, nj)] = 1;
                    q.push(g.idx(ni, nj));
                }
            }
        }
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (!g.inside(i, j) && !seen[g.idx(i, j)])
                    throw BendError(ErrKind::MultiplyConnectedDomain,
                                    "region has a hole (exterior pocket at node " +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
    }

    g.boundary_trace = trace_boundary(g);

    // the trace must cover every boundary-flagged node (single loop); trace
    // nodes reached only diagonally are promoted to boundary class
    {
        std::vector<char> on_trace(g.mask.size(), 0);
        for (int k : g.boundary_trace) on_trace[k] = 1;
        for (size_t k = 0; k < g.mask.size(); ++k)
            if (g.mask[k] == NodeClass::Boundary && !on_trace[k])
                throw BendError(ErrKind::MultiplyConnectedDomain,
                                "boundary splits into more than one loop");
        for (int k : g.boundary_trace) g.mask[k] = NodeClass::Boundary;
    }

    for (auto m : g.mask) {
        if (m == NodeClass::Interior) ++g.interior_count;
        if (m == NodeClass::Boundary) ++g.boundary_count;
    }

    // quadrature weights: full cells h^2, boundary cells cut by 4x4 subsampling
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            if (g.is_interior(i, j)) {
                g.weight[g.idx(i, j)] = g.h * g.h;
                continue;
            }
            int in = 0;
            for (int b = 0; b < 4; ++b)
                for (int a = 0; a < 4; ++a) {
                    double xs = g.s(i) + (-0.5 + (a + 0.5) / 4.0) * g.h;
                    double ys = g.t(j) + (-0.5 + (b + 0.5) / 4.0) * g.h;
                    if (region.contains(xs, ys)) ++in;
                }
            g.weight[g.idx(i, j)] = g.h * g.h * in / 16.0;
        }

    // stencil availability per axis
    auto axis_ok = [&](int i, int j, int di, int dj) {
        if (g.inside(i - di, j - dj) && g.inside(i + di, j + dj)) return true;
        if (g.inside(i + di, j + dj) && g.inside(i + 2 * di, j + 2 * dj)) return true;
        if (g.inside(i - di, j - dj) && g.inside(i - 2 * di, j - 2 * dj)) return true;
        return false;
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j))
                g.stencil_ok[g.idx(i, j)] = axis_ok(i, j, 1, 0) && axis_ok(i, j, 0, 1);

    // orient counterclockwise
    {
        double area2 = 0;
        const auto& tr = g.boundary_trace;
        for (size_t a = 0; a < tr.size(); ++a) {
            size_t b = (a + 1) % tr.size();
            double xa = g.s(tr[a] % g.nx), ya = g.t(tr[a] / g.nx);
            double xb = g.s(tr[b] % g.nx), yb = g.t(tr[b] / g.nx);
            area2 += xa * yb - xb * ya;
        }
        if (area2 < 0) std::reverse(g.boundary_trace.begin(), g.boundary_trace.end());
    }

    return g;
}

namespace {

template <typename T>
T stencil_derivative(const DomainGrid& g, const Field<T>& f, int i, int j, int di, int dj) {
    const double h = g.h;
    bool m1 = g.inside(i - di, j - dj), p1 = g.inside(i + di, j + dj);
    if (m1 && p1) return (f(i + di, j + dj) - f(i - di, j - dj)) / (2.0 * h);
    if (p1 && g.inside(i + 2 * di, j + 2 * dj))
        return (-3.0 * f(i, j) + 4.0 * f(i + di, j + dj) - f(i + 2 * di, j + 2 * dj)) / (2.0 * h);
    if (m1 && g.inside(i - 2 * di, j - 2 * dj))
        return (3.0 * f(i, j) - 4.0 * f(i - di, j - dj) + f(i - 2 * di, j - 2 * dj)) / (2.0 * h);
    if (p1) return (f(i + di, j + dj) - f(i, j)) / h;  // first-order fallback
    if (m1) return (f(i, j) - f(i - di, j - dj)) / h;
    return zero_value<T>();
}

} // namespace

template <typename T>
Field<T> differentiate(const DomainGrid& g, const Field<T>& f, Axis axis) {
    Field<T> out(g.nx, g.ny);
    const int di = axis == Axis::S ? 1 : 0;
    const int dj = axis == Axis::S ? 0 : 1;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) out(i, j) = stencil_derivative(g, f, i, j, di, dj);
    return out;
}

template Field<double> differentiate(const DomainGrid&, const Field<double>&, Axis);
template Field<Complex> differentiate(const DomainGrid&, const Field<Complex>&, Axis);
template Field<Vec3> differentiate(const DomainGrid&, const Field<Vec3>&, Axis);
template Field<CVec3> differentiate(const DomainGrid&, const Field<CVec3>&, Axis);

double integrate(const DomainGrid& g, const ScalarField& f) {
    double acc = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) acc += g.weight[g.idx(i, j)] * f(i, j);
    return acc;
}

Complex integrate(const DomainGrid& g, const ComplexField& f) {
    Complex acc = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) acc += g.weight[g.idx(i, j)] * f(i, j);
    return acc;
}

} // namespace bend
