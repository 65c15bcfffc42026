#pragma once

#include <Eigen/Core>

#include <filesystem>

namespace eigenflow {

using RowMatrixX3d = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatrixX3i = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Closed, consistently oriented triangle surface in R^3. Face normals
/// (right-hand rule on the index triple) point outward.
struct TriangleMesh {
  RowMatrixX3d vertices;
  RowMatrixX3i faces;

  Eigen::Index num_vertices() const { return vertices.rows(); }
  Eigen::Index num_faces() const { return faces.rows(); }
};

/// Throws StructuralError naming the offending simplex if the mesh is not
/// closed, consistently and outward oriented, non-degenerate and connected.
void validate(const TriangleMesh& mesh);

Eigen::VectorXd face_areas(const TriangleMesh& mesh);
double total_area(const TriangleMesh& mesh);
/// Signed enclosed volume; positive for outward orientation.
double signed_volume(const TriangleMesh& mesh);
double mean_edge_length(const TriangleMesh& mesh);
/// Mean distance of the vertices from the origin.
double mean_radius(const TriangleMesh& mesh);

TriangleMesh make_icosphere(double radius, int subdivisions);
/// Icosphere of unit radius mapped through diag(a, b, c).
TriangleMesh make_ellipsoid(double a, double b, double c, int subdivisions);

/// Copies the mesh with vertices multiplied by s (s > 0).
TriangleMesh scaled(const TriangleMesh& mesh, double s);

/// ASCII OFF. The reader validates the mesh before returning it.
TriangleMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace eigenflow
