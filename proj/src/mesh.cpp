#include "eigenflow/mesh.hpp"

#include "eigenflow/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace eigenflow {

namespace {

Eigen::Vector3d vertex(const TriangleMesh& mesh, int i) {
  return mesh.vertices.row(i).transpose();
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

Eigen::VectorXd face_areas(const TriangleMesh& mesh) {
  Eigen::VectorXd areas(mesh.num_faces());
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d a = vertex(mesh, mesh.faces(f, 0));
    const Eigen::Vector3d b = vertex(mesh, mesh.faces(f, 1));
    const Eigen::Vector3d c = vertex(mesh, mesh.faces(f, 2));
    areas[f] = 0.5 * (b - a).cross(c - a).norm();
  }
  return areas;
}

double total_area(const TriangleMesh& mesh) { return face_areas(mesh).sum(); }

double signed_volume(const TriangleMesh& mesh) {
  double vol = 0.0;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d a = vertex(mesh, mesh.faces(f, 0));
    const Eigen::Vector3d b = vertex(mesh, mesh.faces(f, 1));
    const Eigen::Vector3d c = vertex(mesh, mesh.faces(f, 2));
    vol += a.dot(b.cross(c));
  }
  return vol / 6.0;
}

double mean_edge_length(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      sum += (vertex(mesh, mesh.faces(f, (k + 1) % 3)) - vertex(mesh, mesh.faces(f, k))).norm();
    }
  }
  // every edge is seen twice on a closed mesh; the mean is unaffected
  return sum / (3.0 * static_cast<double>(mesh.num_faces()));
}

double mean_radius(const TriangleMesh& mesh) {
  return mesh.vertices.rowwise().norm().mean();
}

void validate(const TriangleMesh& mesh) {
  const Eigen::Index nv = mesh.num_vertices();
  const Eigen::Index nf = mesh.num_faces();
  if (nv < 4) throw StructuralError("mesh has " + std::to_string(nv) + " vertices; need at least 4");
  if (nf == 0) throw StructuralError("mesh has no faces");
  if (!mesh.vertices.allFinite()) throw StructuralError("mesh has non-finite vertex coordinates");

  for (Eigen::Index f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int i = mesh.faces(f, k);
      if (i < 0 || i >= nv) {
        throw StructuralError("face " + std::to_string(f) + " references vertex " + std::to_string(i) +
                              " out of range");
      }
    }
    if (mesh.faces(f, 0) == mesh.faces(f, 1) || mesh.faces(f, 1) == mesh.faces(f, 2) ||
        mesh.faces(f, 0) == mesh.faces(f, 2)) {
      throw StructuralError("face " + std::to_string(f) + " repeats a vertex");
    }
  }

  // directed edge -> face; each directed edge may appear once, and its twin must exist
  std::map<std::pair<int, int>, Eigen::Index> directed;
  for (Eigen::Index f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const std::pair<int, int> e{mesh.faces(f, k), mesh.faces(f, (k + 1) % 3)};
      auto [it, inserted] = directed.emplace(e, f);
      if (!inserted) {
        throw StructuralError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                              ") is traversed in the same direction by faces " + std::to_string(it->second) +
                              " and " + std::to_string(f) + " (inconsistent orientation or non-manifold edge)");
      }
    }
  }
  for (const auto& [e, f] : directed) {
    if (!directed.contains({e.second, e.first})) {
      throw StructuralError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ") of face " +
                            std::to_string(f) + " is not shared by a second face (open mesh)");
    }
  }

  const Eigen::VectorXd areas = face_areas(mesh);
  const double floor = 1e-12 * areas.mean();
  for (Eigen::Index f = 0; f < nf; ++f) {
    if (!(areas[f] > floor)) throw StructuralError("face " + std::to_string(f) + " is degenerate");
  }

  std::vector<int> parent(static_cast<std::size_t>(nv));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> used(static_cast<std::size_t>(nv), false);
  for (Eigen::Index f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      used[mesh.faces(f, k)] = true;
      const int a = find_root(parent, mesh.faces(f, k));
      const int b = find_root(parent, mesh.faces(f, (k + 1) % 3));
      if (a != b) parent[a] = b;
    }
  }
  for (Eigen::Index i = 0; i < nv; ++i) {
    if (!used[i]) throw StructuralError("vertex " + std::to_string(i) + " is not referenced by any face");
  }
  const int root = find_root(parent, 0);
  for (Eigen::Index i = 1; i < nv; ++i) {
    if (find_root(parent, static_cast<int>(i)) != root) {
      throw StructuralError("mesh is not connected (vertex " + std::to_string(i) + " is in another component)");
    }
  }

  if (!(signed_volume(mesh) > 0.0)) throw StructuralError("faces are oriented inward (negative enclosed volume)");
}

TriangleMesh make_icosphere(double radius, int subdivisions) {
  if (!(radius > 0.0)) throw InvalidInput("icosphere radius must be positive");
  if (subdivisions < 0) throw InvalidInput("icosphere subdivisions must be non-negative");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<Eigen::Vector3i> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> refined;
    refined.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      refined.emplace_back(f[0], ab, ca);
      refined.emplace_back(f[1], bc, ab);
      refined.emplace_back(f[2], ca, bc);
      refined.emplace_back(ab, bc, ca);
    }
    faces = std::move(refined);
  }

  TriangleMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = radius * verts[i];
  mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) mesh.faces.row(static_cast<Eigen::Index>(f)) = faces[f];
  return mesh;
}

TriangleMesh make_ellipsoid(double a, double b, double c, int subdivisions) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw InvalidInput("ellipsoid semi-axes must be positive");
  TriangleMesh mesh = make_icosphere(1.0, subdivisions);
  mesh.vertices = mesh.vertices * Eigen::Vector3d(a, b, c).asDiagonal();
  return mesh;
}

TriangleMesh scaled(const TriangleMesh& mesh, double s) {
  TriangleMesh out = mesh;
  out.vertices *= s;
  return out;
}

}  // namespace eigenflow
