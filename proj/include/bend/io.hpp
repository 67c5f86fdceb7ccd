#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bend/grid.hpp"

namespace bend {

// CSV layout: header "i,j,s,t,<names...>", one row per inside node in row-major
// (j outer, i inner) order, %.17g so doubles round-trip exactly.
void write_fields_csv(const std::string& path, const DomainGrid& grid,
                      const std::vector<std::pair<std::string, const ScalarField*>>& columns);

// reads columns back; validates the (i,j) set matches the grid's inside nodes
std::map<std::string, ScalarField> read_fields_csv(const std::string& path,
                                                   const DomainGrid& grid);

// split/join helpers for complex fields
std::pair<ScalarField, ScalarField> split_complex(const ComplexField& f);
ComplexField join_complex(const ScalarField& re, const ScalarField& im);

// vertex grid with quad-split triangles; counterclockwise faces match the
// surface normal Rs x Rt
void write_obj(const std::string& path, const DomainGrid& grid, const Vec3Field& positions);

// grid descriptor (region + resolution + derived metadata) as JSON
void write_grid_json(const std::string& path, const DomainGrid& grid, int n);
// rebuilds the grid from the descriptor (bit-identical: same region, same n)
DomainGrid read_grid_json(const std::string& path, int* n_out = nullptr);

void atomic_write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);
bool file_exists(const std::string& path);
void ensure_parent_dir(const std::string& path);

} // namespace bend
