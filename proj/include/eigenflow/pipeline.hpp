#pragma once

#include "eigenflow/flow.hpp"
#include "eigenflow/monotonicity.hpp"
#include "eigenflow/run_config.hpp"

#include <string>
#include <vector>

namespace eigenflow {

TriangleMesh make_shape(const ShapeConfig& shape);
std::string describe_shape(const ShapeConfig& shape);

struct RunResult {
  EigenTrace trace;
  FlowRun flow;                       ///< snapshots carry phi and t_tilde
  std::vector<std::string> warnings;  ///< convexity loss, pinching above 0.1
};

/// Flows the configured shape and records, at every snapshot, the Laplace
/// eigenvalue, the requested p-eigenvalues and the evolution right-hand
/// sides. The Laplace eigenfunction is aligned with the previous snapshot's;
/// p-eigenfunctions are warm-started from the previous snapshot. The p = 2
/// right-hand side column is evaluated on the Laplace eigenpair.
RunResult compute_trace(const RunConfig& config);

/// Checks selected by the configuration: bound, derivative, decay rate,
/// envelope monotonicity, and monotonicity of every eigenvalue column when a
/// direction is configured.
std::vector<CheckReport> configured_checks(const EigenTrace& trace, const ChecksConfig& checks);

}  // namespace eigenflow
