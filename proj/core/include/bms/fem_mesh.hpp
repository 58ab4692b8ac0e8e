#pragma once

#include "bms/linalg.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace bms::fem {

using Point = Eigen::Vector2d;

enum class VertexClass { free, dirichlet };

// Triangulation with free vertices numbered first (0..m-1) and Dirichlet
// vertices last (m..m_phi-1). Triangles are counter-clockwise, 0-based.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  int free_count = 0;

  int m_phi() const { return static_cast<int>(vertices.size()); }
  int m() const { return free_count; }
  int dirichlet_count() const { return m_phi() - free_count; }
  VertexClass vertex_class(int j) const { return j < free_count ? VertexClass::free : VertexClass::dirichlet; }
  double signed_area(int t) const;
  double total_area() const;
  void validate() const;  // throws MeshError
};

// Structured grid counts: cells across the left arm / right part, and cells
// up the bottom / top part. `boundary_splits` top-edge cells of the left arm
// get an extra midpoint vertex (3 triangles instead of 2).
struct MeshResolution {
  int nx_left = 1;
  int nx_right = 1;
  int ny_bottom = 1;
  int ny_top = 1;
  int boundary_splits = 0;

  static MeshResolution coarse();  // 97 vertices, 152 triangles
  static MeshResolution fine();    // 915 vertices, 1695 triangles
};

// L-shape: [0, 2a]^2 minus the bottom-right quadrant [a, 2a] x [0, a], with a
// chosen so the area is 7.44 m^2. Dirichlet boundary: the bottom edge of the
// left arm (eta = 0, 0 <= xi <= a).
double lshape_arm();
double lshape_area();
bool in_lshape(const Point& p, double tol = 1e-12);

TriMesh generate_lshape_mesh(const MeshResolution& res);
// Uniform counts of about arm / h cells per part. Throws MeshError when h is
// larger than the arm, which cannot resolve the re-entrant corner.
TriMesh generate_lshape_mesh(double h);

// Plain text: "vertices m_phi m", then m_phi lines "xi eta tag" (tag 1 for
// Dirichlet), then triangle lines "i j k" (1-based) until end of file.
void write_mesh(const TriMesh& mesh, std::ostream& out);
TriMesh read_mesh(std::istream& in);
void save_mesh(const TriMesh& mesh, const std::string& path);
TriMesh load_mesh(const std::string& path);

// Index of a triangle containing p, or -1.
int locate(const TriMesh& mesh, const Point& p, double tol = 1e-12);
Eigen::Vector3d barycentric(const TriMesh& mesh, int triangle, const Point& p);

// Point evaluation split into free (C, length m) and Dirichlet (D, length
// m_phi - m) columns.
struct SensorRow {
  Vector C;
  Vector D;
};
SensorRow sensor_row(const TriMesh& mesh, const Point& p);
std::vector<SensorRow> sensor_rows(const TriMesh& mesh, const std::vector<Point>& points);

}  // namespace bms::fem
