#include "liouville/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace liouville::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path, const char* where) {
  std::ifstream in(path);
  if (!in) throw DataError(where, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, const char* where) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(where, "cannot write " + path.string());
  return out;
}

/// Next line that is neither blank nor a '#' comment.
bool content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] != '#') return true;
  }
  return false;
}

}  // namespace

TriangulatedSphere read_off(const std::filesystem::path& path) {
  const char* where = "sphere_mesh::read_off";
  auto in = open_in(path, where);
  std::string line;
  if (!content_line(in, line) || line.rfind("OFF", 0) != 0) throw DataError(where, "missing OFF header");
  long nv = -1, nf = -1, ne = -1;
  if (!content_line(in, line) || !(std::istringstream(line) >> nv >> nf >> ne) || nv < 4 || nf < 4) {
    throw DataError(where, "bad count line");
  }
  TriangulatedSphere mesh;
  mesh.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    Eigen::Vector3d x;
    if (!content_line(in, line) || !(std::istringstream(line) >> x[0] >> x[1] >> x[2])) {
      throw DataError(where, "bad vertex line " + std::to_string(i));
    }
    if (!x.allFinite() || x.norm() == 0.0) throw DataError(where, "vertex " + std::to_string(i) + " not projectable");
    mesh.vertices.push_back(x.normalized());
  }
  mesh.faces.reserve(nf);
  for (long f = 0; f < nf; ++f) {
    int k = 0;
    std::array<int, 3> tri{};
    if (!content_line(in, line)) throw DataError(where, "missing face line " + std::to_string(f));
    std::istringstream row(line);
    if (!(row >> k >> tri[0] >> tri[1] >> tri[2]) || k != 3) {
      throw DataError(where, "face " + std::to_string(f) + " is not a triangle");
    }
    for (int v : tri) {
      if (v < 0 || v >= nv) throw DataError(where, "face " + std::to_string(f) + " has an out-of-range index");
    }
    mesh.faces.push_back(tri);
  }
  mesh.background_factor = ScalarField::Zero(nv);
  validate_mesh(mesh);
  return mesh;
}

void write_off(const std::filesystem::path& path, const TriangulatedSphere& mesh) {
  auto out = open_out(path, "sphere_mesh::write_off");
  out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
  for (const auto& x : mesh.vertices) {
    out << format_number(x[0]) << ' ' << format_number(x[1]) << ' ' << format_number(x[2]) << '\n';
  }
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

ScalarField read_field(const std::filesystem::path& path, int expected_size) {
  const char* where = "sphere_mesh::read_field";
  auto in = open_in(path, where);
  std::string line;
  if (!content_line(in, line) || line.rfind("vertex,value", 0) != 0) {
    throw DataError(where, "missing header vertex,value");
  }
  std::vector<double> values;
  while (content_line(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(where, "bad row: " + line);
    long index = -1;
    double value = 0.0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, index);
    std::istringstream vs(line.substr(comma + 1));
    if (r1.ec != std::errc() || !(vs >> value)) throw DataError(where, "bad row: " + line);
    if (index != static_cast<long>(values.size())) throw DataError(where, "rows out of vertex order");
    values.push_back(value);
  }
  if (expected_size >= 0 && static_cast<int>(values.size()) != expected_size) {
    throw DataError(where, "field has " + std::to_string(values.size()) + " rows, mesh has " +
                               std::to_string(expected_size) + " vertices");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  auto out = open_out(path, "sphere_mesh::write_field");
  out << "vertex,value\n";
  for (Eigen::Index i = 0; i < field.size(); ++i) out << i << ',' << format_number(field[i]) << '\n';
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path, "cli_harness::write_table");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
    out << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, "cli_harness::write_text");
  out << text;
}

}  // namespace liouville::io
