#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bend/errors.hpp"

namespace bend {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

// Parameter-domain region. Domains must be simply connected; the annulus kind
// exists so that rejection can be exercised.
struct RegionSpec {
    enum class Kind { Disc, Rectangle, Polygon, Annulus };

    Kind kind = Kind::Disc;
    double radius = 1.0;                       // disc / annulus outer
    double inner_radius = 0.0;                 // annulus
    double xmin = 0, ymin = 0, xmax = 1, ymax = 1;
    std::vector<std::pair<double, double>> vertices;  // polygon

    static RegionSpec disc(double r);
    static RegionSpec rectangle(double x0, double y0, double x1, double y1);
    static RegionSpec polygon(std::vector<std::pair<double, double>> pts);
    static RegionSpec annulus(double r_in, double r_out);
    // "disc:0.8", "rect:0,0,1,1", "annulus:0.3,0.8", "poly:x0,y0;x1,y1;..."
    static RegionSpec parse(const std::string& text);

    bool contains(double x, double y) const;
    void bbox(double& x0, double& y0, double& x1, double& y1) const;
    std::string describe() const;
};

enum class NodeClass : unsigned char { Exterior = 0, Boundary = 1, Interior = 2 };

// Cell-centered lattice over the region's bounding box: node (i,j) sits at
// (x0 + i*h, y0 + j*h), the center of an h-by-h cell. Quadrature weights carry
// fractional inside-area for boundary cells.
struct DomainGrid {
    int nx = 0, ny = 0;
    double h = 0;
    double x0 = 0, y0 = 0;
    RegionSpec region;
    std::vector<NodeClass> mask;
    std::vector<double> weight;
    std::vector<unsigned char> stencil_ok;   // second-order stencil in both axes
    std::vector<int> boundary_trace;         // closed CCW loop of node ids
    int inside_count = 0, interior_count = 0, boundary_count = 0;

    int idx(int i, int j) const { return i + nx * j; }
    bool valid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    bool inside(int i, int j) const {
        return valid(i, j) && mask[idx(i, j)] != NodeClass::Exterior;
    }
    bool is_interior(int i, int j) const {
        return valid(i, j) && mask[idx(i, j)] == NodeClass::Interior;
    }
    bool is_boundary(int i, int j) const {
        return valid(i, j) && mask[idx(i, j)] == NodeClass::Boundary;
    }
    double s(int i) const { return x0 + i * h; }
    double t(int j) const { return y0 + j * h; }
};

DomainGrid build_domain(const RegionSpec& region, int n);

template <typename T>
T zero_value() {
    return T{};
}
template <>
inline Vec3 zero_value<Vec3>() {
    return Vec3::Zero();
}
template <>
inline CVec3 zero_value<CVec3>() {
    return CVec3::Zero();
}

template <typename T>
struct Field {
    int nx = 0, ny = 0;
    std::vector<T> v;

    Field() = default;
    Field(int nx_, int ny_, T init) : nx(nx_), ny(ny_), v(size_t(nx_) * ny_, init) {}
    Field(int nx_, int ny_) : Field(nx_, ny_, zero_value<T>()) {}
    explicit Field(const DomainGrid& g) : Field(g.nx, g.ny, zero_value<T>()) {}
    Field(const DomainGrid& g, T init) : Field(g.nx, g.ny, init) {}

    T& operator()(int i, int j) { return v[size_t(i) + size_t(nx) * j]; }
    const T& operator()(int i, int j) const { return v[size_t(i) + size_t(nx) * j]; }
    T& operator[](size_t k) { return v[k]; }
    const T& operator[](size_t k) const { return v[k]; }
    size_t size() const { return v.size(); }
};

using ScalarField = Field<double>;
using ComplexField = Field<Complex>;
using Vec3Field = Field<Vec3>;
using CVec3Field = Field<CVec3>;

enum class Axis { S, T };

// Second-order differences: centered at nodes with both axis neighbors inside,
// one-sided three-point otherwise. Exact on quadratics either way.
template <typename T>
Field<T> differentiate(const DomainGrid& g, const Field<T>& f, Axis axis);

double integrate(const DomainGrid& g, const ScalarField& f);
Complex integrate(const DomainGrid& g, const ComplexField& f);

} // namespace bend
