#pragma once

#include "eigenflow/flow.hpp"
#include "eigenflow/sphere_exact.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eigenflow {

struct ShapeConfig {
  std::string kind = "icosphere";  ///< icosphere | ellipsoid | file
  double radius = 1.0;             ///< icosphere
  std::array<double, 3> axes{1.0, 1.0, 1.0};  ///< ellipsoid
  int subdivisions = 3;
  std::string path;                ///< file
};

struct SpectrumConfig {
  std::vector<double> p_values{2.0};
  double tol = 1e-10;   ///< p = 2 residual
  double p_tol = 1e-7;  ///< p != 2 stationarity
  int max_iter = 10000;
  std::uint64_t seed = 12345;
};

struct MonotoneConfig {
  std::optional<Direction> direction;  ///< unset: no monotone check
  double tol = 1e-3;
};

struct ChecksConfig {
  double bound_tol = 0.02;
  double derivative_tol = 0.05;
  MonotoneConfig monotone;
};

struct OutputConfig {
  std::string dir = "eigenflow_out";
  bool dump_meshes = false;
};

struct RunConfig {
  ShapeConfig shape;
  std::string forcing = "zero";
  FlowConfig flow;
  SpectrumConfig spectrum;
  ChecksConfig checks;
  OutputConfig output;
};

/// Parses JSON, filling defaults for absent keys. Unknown keys, wrong types
/// and out-of-range values throw InvalidInput.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
/// Fully resolved configuration (every key present); parse_config of the
/// result reproduces the same configuration.
std::string config_to_json(const RunConfig& config);
/// Stable 64-bit hash (hex) of the resolved configuration without its
/// output section.
std::string config_hash(const RunConfig& config);

std::string to_string(Direction direction);
Direction parse_direction(const std::string& text);

}  // namespace eigenflow
