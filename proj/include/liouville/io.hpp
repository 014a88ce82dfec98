#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/sphere_mesh.hpp"

namespace liouville::io {

/// OFF text mesh ("OFF", "V F 0", V lines "x y z", F lines "3 i j k").
/// Vertices are projected onto the unit sphere and the mesh is validated.
TriangulatedSphere read_off(const std::filesystem::path& path);
void write_off(const std::filesystem::path& path, const TriangulatedSphere& mesh);

/// Field file: CSV with header "vertex,value", one row per vertex in order.
ScalarField read_field(const std::filesystem::path& path, int expected_size = -1);
void write_field(const std::filesystem::path& path, const ScalarField& field);

/// Round-trip formatting (%.17g), so reruns are byte-identical.
std::string format_number(double x);

/// Numeric CSV with a header line.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace liouville::io
