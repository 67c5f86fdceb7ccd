#include "bend/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bend {

namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void atomic_write_text(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw BendError(ErrKind::MissingInput, "cannot open " + tmp + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BendError(ErrKind::MissingInput, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_fields_csv(const std::string& path, const DomainGrid& g,
                      const std::vector<std::pair<std::string, const ScalarField*>>& columns) {
    std::ostringstream out;
    out << "i,j,s,t";
    for (const auto& [name, f] : columns) out << "," << name;
    out << "\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out << i << "," << j << "," << format_double(g.s(i)) << "," << format_double(g.t(j));
            for (const auto& [name, f] : columns) out << "," << format_double((*f)(i, j));
            out << "\n";
        }
    atomic_write_text(path, out.str());
}

std::map<std::string, ScalarField> read_fields_csv(const std::string& path, const DomainGrid& g) {
    std::ifstream in(path);
    if (!in) throw BendError(ErrKind::MissingInput, "cannot read " + path);
    std::string header;
    if (!std::getline(in, header))
        throw BendError(ErrKind::MissingInput, path + " is empty");
    std::vector<std::string> names;
    {
        std::stringstream ss(header);
        std::string item;
        while (std::getline(ss, item, ',')) names.push_back(item);
    }
    if (names.size() < 4 || names[0] != "i" || names[1] != "j")
        throw BendError(ErrKind::MissingInput, path + " has an unexpected header");
    std::map<std::string, ScalarField> fields;
    for (size_t c = 4; c < names.size(); ++c) fields[names[c]] = ScalarField(g);
    long rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::vector<std::string> vals;
        while (std::getline(ss, item, ',')) vals.push_back(item);
        if (vals.size() != names.size())
            throw BendError(ErrKind::MissingInput, path + " has a malformed row");
        int i = std::stoi(vals[0]), j = std::stoi(vals[1]);
        if (!g.inside(i, j))
            throw BendError(ErrKind::MissingInput,
                            path + " node (" + vals[0] + "," + vals[1] + ") is outside the grid");
        for (size_t c = 4; c < names.size(); ++c)
            fields[names[c]](i, j) = std::stod(vals[c]);
        ++rows;
    }
    if (rows != g.inside_count)
        throw BendError(ErrKind::MissingInput,
                        path + " row count does not match the grid (" + std::to_string(rows) +
                            " vs " + std::to_string(g.inside_count) + ")");
    return fields;
}

std::pair<ScalarField, ScalarField> split_complex(const ComplexField& f) {
    ScalarField re(f.nx, f.ny), im(f.nx, f.ny);
    for (size_t k = 0; k < f.size(); ++k) {
        re[k] = f[k].real();
        im[k] = f[k].imag();
    }
    return {re, im};
}

ComplexField join_complex(const ScalarField& re, const ScalarField& im) {
    ComplexField out(re.nx, re.ny);
    for (size_t k = 0; k < out.size(); ++k) out[k] = Complex(re[k], im[k]);
    return out;
}

void write_obj(const std::string& path, const DomainGrid& g, const Vec3Field& pos) {
    std::ostringstream out;
    std::vector<int> vid(g.mask.size(), 0);
    int next = 1;  // OBJ indices are 1-based
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            vid[g.idx(i, j)] = next++;
            const Vec3& p = pos(i, j);
            out << "v " << format_double(p.x()) << " " << format_double(p.y()) << " "
                << format_double(p.z()) << "\n";
        }
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            int a = g.idx(i, j), b = g.idx(i + 1, j), c = g.idx(i + 1, j + 1), d = g.idx(i, j + 1);
            bool ia = g.inside(i, j), ib = g.inside(i + 1, j), ic = g.inside(i + 1, j + 1),
                 id = g.inside(i, j + 1);
            int count = ia + ib + ic + id;
            auto face = [&](int v0, int v1, int v2) {
                out << "f " << vid[v0] << " " << vid[v1] << " " << vid[v2] << "\n";
            };
            if (count == 4) {
                face(a, b, c);
                face(a, c, d);
            } else if (count == 3) {
                if (!ia) face(b, c, d);
                if (!ib) face(a, c, d);
                if (!ic) face(a, b, d);
                if (!id) face(a, b, c);
            }
        }
    atomic_write_text(path, out.str());
}

void write_grid_json(const std::string& path, const DomainGrid& g, int n) {
    nlohmann::json j;
    j["region"] = g.region.describe();
    j["n"] = n;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    j["h"] = g.h;
    j["inside_count"] = g.inside_count;
    j["interior_count"] = g.interior_count;
    j["boundary_count"] = g.boundary_count;
    atomic_write_text(path, j.dump(2) + "\n");
}

DomainGrid read_grid_json(const std::string& path, int* n_out) {
    auto j = nlohmann::json::parse(read_text(path));
    auto region = RegionSpec::parse(j.at("region").get<std::string>());
    int n = j.at("n").get<int>();
    auto g = build_domain(region, n);
    if (g.nx != j.at("nx").get<int>() || g.ny != j.at("ny").get<int>() ||
        g.inside_count != j.at("inside_count").get<int>())
        throw BendError(ErrKind::MissingInput, path + " does not match the rebuilt grid");
    if (n_out) *n_out = n;
    return g;
}

} // namespace bend
