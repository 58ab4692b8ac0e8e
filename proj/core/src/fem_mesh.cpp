#include "bms/fem_mesh.hpp"

#include "bms/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bms::fem {

namespace {

constexpr double kArea = 7.44;

double cross(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

std::vector<double> graded(double a, int left, int right) {
  std::vector<double> v;
  for (int i = 0; i <= left; ++i) v.push_back(a * i / left);
  for (int i = 1; i <= right; ++i) v.push_back(a + a * i / right);
  return v;
}

}  // namespace

double lshape_area() { return kArea; }
double lshape_arm() { return std::sqrt(kArea / 3.0); }

bool in_lshape(const Point& p, double tol) {
  const double a = lshape_arm();
  if (p.x() < -tol || p.y() < -tol || p.x() > 2 * a + tol || p.y() > 2 * a + tol) return false;
  return p.x() <= a + tol || p.y() >= a - tol;
}

double TriMesh::signed_area(int t) const {
  const auto& tri = triangles[static_cast<std::size_t>(t)];
  return 0.5 * cross(vertices[static_cast<std::size_t>(tri[0])], vertices[static_cast<std::size_t>(tri[1])],
                     vertices[static_cast<std::size_t>(tri[2])]);
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += signed_area(t);
  return s;
}

void TriMesh::validate() const {
  if (free_count < 0 || free_count > m_phi()) throw MeshError("mesh: free vertex count out of range");
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int v : triangles[t])
      if (v < 0 || v >= m_phi()) throw MeshError("mesh: triangle " + std::to_string(t) + " has a bad vertex index");
    if (!(signed_area(static_cast<int>(t)) > 0.0))
      throw MeshError("mesh: triangle " + std::to_string(t) + " is degenerate or clockwise");
  }
}

MeshResolution MeshResolution::coarse() { return {7, 5, 4, 4, 0}; }
MeshResolution MeshResolution::fine() { return {18, 17, 14, 17, 1}; }

TriMesh generate_lshape_mesh(const MeshResolution& r) {
  if (r.nx_left < 1 || r.nx_right < 1 || r.ny_bottom < 1 || r.ny_top < 1)
    throw MeshError("mesh: every part needs at least one cell");
  if (r.boundary_splits < 0 || r.boundary_splits > r.nx_left) throw MeshError("mesh: too many boundary splits");
  const double a = lshape_arm();
  const std::vector<double> xs = graded(a, r.nx_left, r.nx_right);
  const std::vector<double> ys = graded(a, r.ny_bottom, r.ny_top);
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());

  auto exists = [&](int i, int j) { return i <= r.nx_left || j >= r.ny_bottom; };
  // provisional numbering in row-major order; Dirichlet = bottom row
  std::vector<int> id(static_cast<std::size_t>(nx * ny), -1);
  std::vector<Point> pts;
  std::vector<bool> dirichlet;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (exists(i, j)) {
        id[static_cast<std::size_t>(j * nx + i)] = static_cast<int>(pts.size());
        pts.emplace_back(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
        dirichlet.push_back(j == 0);
      }
  auto vid = [&](int i, int j) { return id[static_cast<std::size_t>(j * nx + i)]; };

  std::vector<std::array<int, 3>> tris;
  const int top = ny - 2;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      if (!(i < r.nx_left || j >= r.ny_bottom)) continue;
      const int va = vid(i, j), vb = vid(i + 1, j), vc = vid(i + 1, j + 1), vd = vid(i, j + 1);
      if (j == top && i < r.boundary_splits) {
        const int ve = static_cast<int>(pts.size());
        pts.emplace_back(0.5 * (xs[static_cast<std::size_t>(i)] + xs[static_cast<std::size_t>(i + 1)]),
                         ys[static_cast<std::size_t>(j + 1)]);
        dirichlet.push_back(false);
        tris.push_back({va, vb, ve});
        tris.push_back({vb, vc, ve});
        tris.push_back({va, ve, vd});
      } else {
        tris.push_back({va, vb, vc});
        tris.push_back({va, vc, vd});
      }
    }

  // free vertices first, Dirichlet last, each group in generation order
  std::vector<int> perm(pts.size());
  int next = 0;
  for (std::size_t v = 0; v < pts.size(); ++v)
    if (!dirichlet[v]) perm[v] = next++;
  const int free_count = next;
  for (std::size_t v = 0; v < pts.size(); ++v)
    if (dirichlet[v]) perm[v] = next++;

  TriMesh mesh;
  mesh.free_count = free_count;
  mesh.vertices.resize(pts.size());
  for (std::size_t v = 0; v < pts.size(); ++v) mesh.vertices[static_cast<std::size_t>(perm[v])] = pts[v];
  for (auto& t : tris) mesh.triangles.push_back({perm[static_cast<std::size_t>(t[0])], perm[static_cast<std::size_t>(t[1])],
                                                 perm[static_cast<std::size_t>(t[2])]});
  mesh.validate();
  return mesh;
}

TriMesh generate_lshape_mesh(double h) {
  require(h > 0.0 && std::isfinite(h), "mesh: target edge length must be positive");
  const double a = lshape_arm();
  if (h > a) throw MeshError("mesh: h = " + std::to_string(h) + " cannot resolve the re-entrant corner");
  const int n = static_cast<int>(std::ceil(a / h - 1e-12));
  return generate_lshape_mesh(MeshResolution{n, n, n, n, 0});
}

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  char buf[128];
  out << "vertices " << mesh.m_phi() << ' ' << mesh.m() << '\n';
  for (int v = 0; v < mesh.m_phi(); ++v) {
    const Point& p = mesh.vertices[static_cast<std::size_t>(v)];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", p.x(), p.y(), v < mesh.m() ? 0 : 1);
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw MeshError("mesh: write failed");
}

TriMesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MeshError("mesh: missing header");
  std::istringstream hs(line);
  std::string word;
  int m_phi = -1, m = -1;
  if (!(hs >> word)) throw MeshError("mesh: empty header");
  if (word == "vertices") {
    hs >> m_phi >> m;
  } else {
    m_phi = std::stoi(word);
    hs >> m;
  }
  if (!hs || m_phi < 0 || m < 0 || m > m_phi) throw MeshError("mesh: bad header '" + line + "'");

  TriMesh mesh;
  mesh.free_count = m;
  for (int v = 0; v < m_phi; ++v) {
    double x, y;
    int tag;
    if (!(in >> x >> y >> tag)) throw MeshError("mesh: truncated vertex list at vertex " + std::to_string(v + 1));
    if ((tag != 0) != (v >= m)) throw MeshError("mesh: vertex " + std::to_string(v + 1) + " breaks the ordering law");
    mesh.vertices.emplace_back(x, y);
  }
  int i, j, k;
  while (in >> i >> j >> k) mesh.triangles.push_back({i - 1, j - 1, k - 1});
  if (!in.eof()) throw MeshError("mesh: malformed triangle line");
  mesh.validate();
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw MeshError("mesh: cannot open " + path + " for writing");
  write_mesh(mesh, f);
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MeshError("mesh: cannot open " + path);
  return read_mesh(f);
}

Eigen::Vector3d barycentric(const TriMesh& mesh, int triangle, const Point& p) {
  const auto& t = mesh.triangles[static_cast<std::size_t>(triangle)];
  const Point& a = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Point& b = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Point& c = mesh.vertices[static_cast<std::size_t>(t[2])];
  const double area2 = cross(a, b, c);
  const double l0 = cross(p, b, c) / area2;
  const double l1 = cross(a, p, c) / area2;
  return {l0, l1, 1.0 - l0 - l1};
}

int locate(const TriMesh& mesh, const Point& p, double tol) {
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Eigen::Vector3d l = barycentric(mesh, t, p);
    if (l.minCoeff() >= -tol) return t;
  }
  return -1;
}

SensorRow sensor_row(const TriMesh& mesh, const Point& p) {
  const int t = locate(mesh, p);
  if (t < 0) throw LocationError("point is outside every triangle of the mesh", p.x(), p.y());
  const Eigen::Vector3d l = barycentric(mesh, t, p);
  SensorRow row{Vector::Zero(mesh.m()), Vector::Zero(mesh.dirichlet_count())};
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  for (int c = 0; c < 3; ++c) {
    const int v = tri[static_cast<std::size_t>(c)];
    if (v < mesh.m())
      row.C(v) += l(c);
    else
      row.D(v - mesh.m()) += l(c);
  }
  return row;
}

std::vector<SensorRow> sensor_rows(const TriMesh& mesh, const std::vector<Point>& points) {
  std::vector<SensorRow> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(sensor_row(mesh, p));
  return out;
}

}  // namespace bms::fem
