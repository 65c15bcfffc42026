#pragma once

#include "eigenflow/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

namespace eigenflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Positive semidefinite cotangent stiffness: u^T S u is the Dirichlet
/// energy of the piecewise-linear interpolant of u. Assembled symmetrically,
/// face by face in index order.
SparseMatrix cotangent_stiffness(const TriangleMesh& mesh);

/// Barycentric vertex areas (one third of each incident face).
Eigen::VectorXd barycentric_mass(const TriangleMesh& mesh);

/// Mixed Voronoi vertex areas (circumcentric on acute triangles, with the
/// usual half/quarter split on obtuse ones). Partitions the total area.
Eigen::VectorXd mixed_voronoi_area(const TriangleMesh& mesh);

/// Unit vertex normals with face weights sin(theta) / (|e1| |e2|); exact for
/// vertices sampled from a sphere.
RowMatrixX3d vertex_normals(const TriangleMesh& mesh);

/// Sparse (3F x V) operator mapping vertex values to per-face constant
/// gradients; rows 3f..3f+2 hold the gradient on face f in world coordinates.
SparseMatrix gradient_operator(const TriangleMesh& mesh);

/// Per-vertex and per-face curvature data for a closed triangle mesh.
struct GeometryCache {
  // per vertex
  Eigen::VectorXd mass;          ///< barycentric
  Eigen::VectorXd voronoi_area;  ///< normalizes the curvature normal
  RowMatrixX3d normal;           ///< unit, outward
  Eigen::VectorXd H;             ///< mean curvature, n/r on a round sphere
  Eigen::VectorXd A2;       ///< |A|^2, mass-weighted average of incident faces

  // per face
  Eigen::VectorXd face_area;
  RowMatrixX3d face_normal;
  RowMatrixX3d tangent1;    ///< orthonormal frame (tangent1, tangent2, face_normal)
  RowMatrixX3d tangent2;
  std::vector<Eigen::Matrix2d> shape;  ///< symmetric shape operator in the face frame
  Eigen::MatrixX2d principal;          ///< eigenvalues of `shape`, ascending
  Eigen::VectorXd face_A2;

  SparseMatrix stiffness;

  /// Mean curvature of face f as the trace of its shape operator.
  double face_H(Eigen::Index f) const { return principal(f, 0) + principal(f, 1); }
  /// Second fundamental form of face f applied to a world-space vector twice.
  double second_form(Eigen::Index f, const Eigen::Vector3d& v) const;
};

/// Builds curvature data. Validates the mesh; throws StructuralError on
/// open, inconsistently oriented or degenerate input.
GeometryCache build_cache(const TriangleMesh& mesh);
/// Same, without re-running the full topology validation (flow loop).
GeometryCache build_cache_unchecked(const TriangleMesh& mesh);

/// -H nu per vertex (points inward on convex surfaces).
RowMatrixX3d mean_curvature_vector(const TriangleMesh& mesh, const GeometryCache& cache);

struct PinchingReport {
  double max_dev = 0.0;             ///< max over faces and directions of |kappa_i / H - 1/2|
  Eigen::MatrixX2d per_face_alphas; ///< kappa_i / H per face
};

/// Umbilicity deviation per face. Throws ConvexityError if some face has H <= 0.
PinchingReport pinching_diagnostic(const TriangleMesh& mesh, const GeometryCache& cache);

/// Smallest face quality 4 sqrt(3) A / (l0^2 + l1^2 + l2^2); 1 for equilateral.
double min_face_quality(const TriangleMesh& mesh);

}  // namespace eigenflow
