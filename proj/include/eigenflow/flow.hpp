#pragma once

#include "eigenflow/forcing.hpp"
#include "eigenflow/geometry.hpp"
#include "eigenflow/mesh.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace eigenflow {

struct FlowDiagnostics {
  double area = 0.0;
  double H_min = 0.0;
  double H_max = 0.0;
  double avg_H2 = 0.0;     ///< mass-weighted mean of H^2
  double max_A2 = 0.0;
  double pinch_dev = 0.0;  ///< over faces with positive H
  double min_face_quality = 0.0;
  bool convexity_lost = false;  ///< some face principal curvature or vertex H <= 0
};

struct FlowState {
  TriangleMesh mesh;
  GeometryCache cache;
  double t = 0.0;
  long step = 0;
  double dt = 0.0;      ///< length of the step that produced this state
  double K_accum = 0.0;
  FlowDiagnostics diag;
  double phi = 1.0;     ///< filled by rescale_series
  double t_tilde = 0.0;
};

FlowDiagnostics compute_diagnostics(const TriangleMesh& mesh, const GeometryCache& cache);

/// State at t = 0. Validates the mesh.
FlowState initial_state(const TriangleMesh& mesh);

/// One explicit Euler step X <- X + dt (-H nu + kappa(t) X). Throws
/// NumericalError on non-finite coordinates.
FlowState step_unnormalized(const FlowState& state, const Forcing& forcing, double dt);

/// cfl * min(1 / max|A|^2, 1 / (2 |kappa(t)| + 1e-12), mean_edge^2 / 4).
double adaptive_dt(const FlowState& state, const Forcing& forcing, double cfl);

struct FlowConfig {
  double cfl = 0.5;
  double t_end = 1.0;
  double H_cap = std::numeric_limits<double>::infinity();
  double min_area_fraction = 0.0;
  int snapshot_every = 1;
  long max_steps = 10'000'000;
};

enum class Termination { t_end, H_cap, min_area };
std::string to_string(Termination reason);

struct FlowRun {
  std::vector<FlowState> snapshots;  ///< step 0, every snapshot_every-th step, and the final state
  Termination reason = Termination::t_end;
  long steps = 0;
  bool convexity_lost = false;       ///< at any step, snapshot or not
};

/// Integrates until t_end (the last step is shortened to land on it), the
/// largest H reaches H_cap, or the area drops to min_area_fraction of its
/// initial value. Throws ConvexityError if the initial mesh is not strictly
/// convex. `on_snapshot` is called for each recorded state.
FlowRun run_flow(const TriangleMesh& mesh0, const Forcing& forcing, const FlowConfig& config,
                 const std::function<void(const FlowState&)>& on_snapshot = {});

/// phi = (A_0 / A)^{1/2} and t_tilde = int phi^2 dt (trapezoid) on every snapshot.
void rescale_series(std::vector<FlowState>& snapshots);
/// phi X for a rescaled snapshot.
TriangleMesh normalized_mesh(const FlowState& state);

struct ResidualReport {
  double median = 0.0;
  double p90 = 0.0;
  double worst = 0.0;
  double worst_time = 0.0;
  std::size_t samples = 0;
};

/// Compares d|e|^2/dt (central divided differences across snapshots) with
/// -2 H h(e, e) + 2 kappa |e|^2 for every face edge at interior snapshots.
ResidualReport verify_metric_evolution(const std::vector<FlowState>& snapshots, const Forcing& forcing);

/// Compares dH/dt at vertices with Delta H + |A|^2 H - kappa H.
ResidualReport verify_H_evolution(const std::vector<FlowState>& snapshots, const Forcing& forcing);

/// Predicted dH/dt per vertex: Delta H + |A|^2 H - kappa H, Delta = -M^{-1} S.
Eigen::VectorXd predicted_H_rate(const GeometryCache& cache, double kappa);

/// Derivative at the middle of three samples (nonuniform spacing).
double central_difference(double t0, double f0, double t1, double f1, double t2, double f2);

/// Writes snap_XXXXXXXX.off per snapshot and manifest.csv into dir.
void dump_snapshots(const std::vector<FlowState>& snapshots, const std::filesystem::path& dir);

}  // namespace eigenflow
