#include "eigenflow/geometry.hpp"

#include "eigenflow/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace eigenflow {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::Vector3d position(const TriangleMesh& mesh, int i) { return mesh.vertices.row(i).transpose(); }

}  // namespace

SparseMatrix cotangent_stiffness(const TriangleMesh& mesh) {
  const Eigen::Index nv = mesh.num_vertices();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_faces()) * 9);
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int i = mesh.faces(f, k);
      const int j = mesh.faces(f, (k + 1) % 3);
      const int o = mesh.faces(f, (k + 2) % 3);
      const Eigen::Vector3d a = position(mesh, i) - position(mesh, o);
      const Eigen::Vector3d b = position(mesh, j) - position(mesh, o);
      const double w = 0.5 * a.dot(b) / a.cross(b).norm();  // half cotangent of the angle opposite (i, j)
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
    }
  }
  SparseMatrix S(nv, nv);
  S.setFromTriplets(triplets.begin(), triplets.end());
  return S;
}

Eigen::VectorXd barycentric_mass(const TriangleMesh& mesh) {
  const Eigen::VectorXd areas = face_areas(mesh);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) mass[mesh.faces(f, k)] += areas[f] / 3.0;
  }
  return mass;
}

Eigen::VectorXd mixed_voronoi_area(const TriangleMesh& mesh) {
  Eigen::VectorXd area = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const int idx[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
    const Eigen::Vector3d p[3] = {position(mesh, idx[0]), position(mesh, idx[1]), position(mesh, idx[2])};
    const double face_area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    int obtuse = -1;
    for (int k = 0; k < 3; ++k) {
      if ((p[(k + 1) % 3] - p[k]).dot(p[(k + 2) % 3] - p[k]) < 0.0) obtuse = k;
    }
    if (obtuse >= 0) {
      for (int k = 0; k < 3; ++k) area[idx[k]] += (k == obtuse ? 0.5 : 0.25) * face_area;
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3, j = (k + 2) % 3;  // edge (i, j) opposite corner k
      const Eigen::Vector3d a = p[i] - p[k], b = p[j] - p[k];
      const double cot = a.dot(b) / a.cross(b).norm();
      const double share = cot * (p[i] - p[j]).squaredNorm() / 8.0;
      area[idx[i]] += share;
      area[idx[j]] += share;
    }
  }
  return area;
}

RowMatrixX3d vertex_normals(const TriangleMesh& mesh) {
  RowMatrixX3d normal = RowMatrixX3d::Zero(mesh.num_vertices(), 3);
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int i = mesh.faces(f, k);
      const Eigen::Vector3d e1 = position(mesh, mesh.faces(f, (k + 1) % 3)) - position(mesh, i);
      const Eigen::Vector3d e2 = position(mesh, mesh.faces(f, (k + 2) % 3)) - position(mesh, i);
      normal.row(i) += e1.cross(e2).transpose() / (e1.squaredNorm() * e2.squaredNorm());
    }
  }
  return normal.rowwise().normalized();
}

SparseMatrix gradient_operator(const TriangleMesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_faces()) * 9);
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d p0 = position(mesh, mesh.faces(f, 0));
    const Eigen::Vector3d p1 = position(mesh, mesh.faces(f, 1));
    const Eigen::Vector3d p2 = position(mesh, mesh.faces(f, 2));
    const Eigen::Vector3d cross = (p1 - p0).cross(p2 - p0);
    const double twice_area = cross.norm();
    const Eigen::Vector3d n = cross / twice_area;
    const Eigen::Vector3d opposite[3] = {p2 - p1, p0 - p2, p1 - p0};
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d g = n.cross(opposite[k]) / twice_area;
      for (int d = 0; d < 3; ++d) triplets.emplace_back(3 * f + d, mesh.faces(f, k), g[d]);
    }
  }
  SparseMatrix G(3 * mesh.num_faces(), mesh.num_vertices());
  G.setFromTriplets(triplets.begin(), triplets.end());
  return G;
}

double GeometryCache::second_form(Eigen::Index f, const Eigen::Vector3d& v) const {
  const Eigen::Vector2d g(v.dot(tangent1.row(f)), v.dot(tangent2.row(f)));
  return g.dot(shape[static_cast<std::size_t>(f)] * g);
}

GeometryCache build_cache(const TriangleMesh& mesh) {
  validate(mesh);
  return build_cache_unchecked(mesh);
}

GeometryCache build_cache_unchecked(const TriangleMesh& mesh) {
  const Eigen::Index nv = mesh.num_vertices();
  const Eigen::Index nf = mesh.num_faces();
  GeometryCache c;

  c.face_area.resize(nf);
  c.face_normal.resize(nf, 3);
  c.tangent1.resize(nf, 3);
  c.tangent2.resize(nf, 3);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Eigen::Vector3d p0 = position(mesh, mesh.faces(f, 0));
    const Eigen::Vector3d p1 = position(mesh, mesh.faces(f, 1));
    const Eigen::Vector3d p2 = position(mesh, mesh.faces(f, 2));
    const Eigen::Vector3d cross = (p1 - p0).cross(p2 - p0);
    const double twice_area = cross.norm();
    if (!(twice_area > 0.0) || !std::isfinite(twice_area)) {
      throw StructuralError("face " + std::to_string(f) + " is degenerate");
    }
    const Eigen::Vector3d n = cross / twice_area;
    const Eigen::Vector3d t1 = (p1 - p0).normalized();
    c.face_area[f] = 0.5 * twice_area;
    c.face_normal.row(f) = n;
    c.tangent1.row(f) = t1;
    c.tangent2.row(f) = n.cross(t1);
  }

  c.mass = Eigen::VectorXd::Zero(nv);
  for (Eigen::Index f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) c.mass[mesh.faces(f, k)] += c.face_area[f] / 3.0;
  }
  c.voronoi_area = mixed_voronoi_area(mesh);
  c.normal = vertex_normals(mesh);

  c.stiffness = cotangent_stiffness(mesh);
  const RowMatrixX3d curvature_normal = c.stiffness * mesh.vertices;  // area * H * nu
  c.H.resize(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    const double magnitude = curvature_normal.row(i).norm() / c.voronoi_area[i];
    c.H[i] = curvature_normal.row(i).dot(c.normal.row(i)) >= 0.0 ? magnitude : -magnitude;
  }

  // Least-squares fit of dN = S dX over the three edges, in the face frame.
  c.shape.resize(static_cast<std::size_t>(nf));
  c.principal.resize(nf, 2);
  c.face_A2.resize(nf);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Eigen::Vector3d t1 = c.tangent1.row(f);
    const Eigen::Vector3d t2 = c.tangent2.row(f);
    Eigen::Matrix<double, 6, 3> A;
    Eigen::Matrix<double, 6, 1> b;
    for (int k = 0; k < 3; ++k) {
      const int i = mesh.faces(f, k);
      const int j = mesh.faces(f, (k + 1) % 3);
      const Eigen::Vector3d e = position(mesh, j) - position(mesh, i);
      const Eigen::Vector3d dn = (c.normal.row(j) - c.normal.row(i)).transpose();
      const double eu = e.dot(t1), ev = e.dot(t2);
      A.row(2 * k) << eu, ev, 0.0;
      A.row(2 * k + 1) << 0.0, eu, ev;
      b[2 * k] = dn.dot(t1);
      b[2 * k + 1] = dn.dot(t2);
    }
    const Eigen::Vector3d abc = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    Eigen::Matrix2d S;
    S << abc[0], abc[1], abc[1], abc[2];
    c.shape[static_cast<std::size_t>(f)] = S;
    const Eigen::Vector2d k = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(S, Eigen::EigenvaluesOnly).eigenvalues();
    c.principal.row(f) = k.transpose();
    c.face_A2[f] = k.squaredNorm();
  }

  c.A2 = Eigen::VectorXd::Zero(nv);
  for (Eigen::Index f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) c.A2[mesh.faces(f, k)] += c.face_area[f] / 3.0 * c.face_A2[f];
  }
  c.A2.array() /= c.mass.array();
  return c;
}

RowMatrixX3d mean_curvature_vector(const TriangleMesh& mesh, const GeometryCache& cache) {
  (void)mesh;
  return -(cache.normal.array().colwise() * cache.H.array()).matrix();
}

PinchingReport pinching_diagnostic(const TriangleMesh& mesh, const GeometryCache& cache) {
  (void)mesh;
  const Eigen::Index nf = cache.principal.rows();
  PinchingReport report;
  report.per_face_alphas.resize(nf, 2);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const double H = cache.face_H(f);
    if (!(H > 0.0)) {
      throw ConvexityError("face " + std::to_string(f) + " has non-positive mean curvature " + std::to_string(H));
    }
    report.per_face_alphas.row(f) = cache.principal.row(f) / H;
    report.max_dev = std::max(report.max_dev, (report.per_face_alphas.row(f).array() - 0.5).abs().maxCoeff());
  }
  return report;
}

double min_face_quality(const TriangleMesh& mesh) {
  double q = 1.0;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d p0 = position(mesh, mesh.faces(f, 0));
    const Eigen::Vector3d p1 = position(mesh, mesh.faces(f, 1));
    const Eigen::Vector3d p2 = position(mesh, mesh.faces(f, 2));
    const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    const double l2 = (p1 - p0).squaredNorm() + (p2 - p1).squaredNorm() + (p0 - p2).squaredNorm();
    q = std::min(q, 4.0 * std::sqrt(3.0) * area / l2);
  }
  return q;
}

}  // namespace eigenflow
