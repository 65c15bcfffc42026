#pragma once

#include "eigenflow/mesh.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <string>

namespace testing {

// Regular tetrahedron inscribed in the unit sphere, outward oriented.
inline eigenflow::TriangleMesh tetrahedron() {
  eigenflow::TriangleMesh m;
  m.vertices.resize(4, 3);
  const double s = 1.0 / std::sqrt(3.0);
  m.vertices << s, s, s, s, -s, -s, -s, s, -s, -s, -s, s;
  m.faces.resize(4, 3);
  m.faces << 0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2;
  return m;
}

inline eigenflow::TriangleMesh rigidly_moved(const eigenflow::TriangleMesh& mesh) {
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1.0, 2.0, -0.5).normalized()).toRotationMatrix();
  const Eigen::RowVector3d shift(0.3, -1.2, 2.5);
  eigenflow::TriangleMesh out = mesh;
  out.vertices = (mesh.vertices * R.transpose()).rowwise() + shift;
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("eigenflow_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
