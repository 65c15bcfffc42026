#include "eigenflow/flow.hpp"

#include "eigenflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace eigenflow {

FlowDiagnostics compute_diagnostics(const TriangleMesh& mesh, const GeometryCache& cache) {
  FlowDiagnostics d;
  d.area = cache.face_area.sum();
  d.H_min = cache.H.minCoeff();
  d.H_max = cache.H.maxCoeff();
  d.avg_H2 = cache.mass.dot(cache.H.cwiseAbs2()) / cache.mass.sum();
  d.max_A2 = cache.A2.maxCoeff();
  d.min_face_quality = min_face_quality(mesh);
  // face shape operators come from smoothed normals and can miss a dent at a
  // single vertex; the vertex mean curvature does not
  d.convexity_lost = !(d.H_min > 0.0);
  for (Eigen::Index f = 0; f < cache.principal.rows(); ++f) {
    if (!(cache.principal(f, 0) > 0.0)) d.convexity_lost = true;
    const double H = cache.face_H(f);
    if (H > 0.0) d.pinch_dev = std::max(d.pinch_dev, (cache.principal.row(f).array() / H - 0.5).abs().maxCoeff());
  }
  return d;
}

FlowState initial_state(const TriangleMesh& mesh) {
  FlowState s;
  s.mesh = mesh;
  s.cache = build_cache(mesh);
  s.diag = compute_diagnostics(s.mesh, s.cache);
  return s;
}

FlowState step_unnormalized(const FlowState& state, const Forcing& forcing, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("time step must be positive and finite");
  const double kappa = forcing.kappa(state.t);
  FlowState next;
  next.mesh.faces = state.mesh.faces;
  next.mesh.vertices =
      state.mesh.vertices + dt * (mean_curvature_vector(state.mesh, state.cache) + kappa * state.mesh.vertices);
  if (!next.mesh.vertices.allFinite())
    throw NumericalError("non-finite coordinates after step " + std::to_string(state.step + 1));
  next.t = state.t + dt;
  next.step = state.step + 1;
  next.dt = dt;
  next.K_accum = forcing.K(next.t);
  next.cache = build_cache_unchecked(next.mesh);
  next.diag = compute_diagnostics(next.mesh, next.cache);
  if (!std::isfinite(next.diag.H_max) || !std::isfinite(next.diag.area))
    throw NumericalError("non-finite curvature after step " + std::to_string(next.step));
  return next;
}

double adaptive_dt(const FlowState& state, const Forcing& forcing, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidInput("cfl must lie in (0, 1]");
  const double edge = mean_edge_length(state.mesh);
  const double curvature_bound = state.diag.max_A2 > 0.0 ? 1.0 / state.diag.max_A2 : std::numeric_limits<double>::infinity();
  const double forcing_bound = 1.0 / (2.0 * std::abs(forcing.kappa(state.t)) + 1e-12);
  return cfl * std::min({curvature_bound, forcing_bound, edge * edge / 4.0});
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::t_end: return "t_end";
    case Termination::H_cap: return "H_cap";
    case Termination::min_area: return "min_area";
  }
  return {};
}

FlowRun run_flow(const TriangleMesh& mesh0, const Forcing& forcing, const FlowConfig& config,
                 const std::function<void(const FlowState&)>& on_snapshot) {
  if (!(config.t_end > 0.0)) throw InvalidInput("t_end must be positive");
  if (config.snapshot_every < 1) throw InvalidInput("snapshot_every must be at least 1");
  FlowRun run;
  FlowState state = initial_state(mesh0);
  if (state.diag.convexity_lost) throw ConvexityError("initial surface is not strictly convex");
  state.K_accum = forcing.K(0.0);
  const double area0 = state.diag.area;

  auto record = [&](const FlowState& s) {
    run.snapshots.push_back(s);
    if (on_snapshot) on_snapshot(s);
  };
  record(state);

  for (;;) {
    if (state.t >= config.t_end) {
      run.reason = Termination::t_end;
      break;
    }
    if (state.diag.H_max >= config.H_cap) {
      run.reason = Termination::H_cap;
      break;
    }
    if (state.diag.area <= config.min_area_fraction * area0) {
      run.reason = Termination::min_area;
      break;
    }
    if (state.step >= config.max_steps)
      throw NumericalError("flow exceeded " + std::to_string(config.max_steps) + " steps before stopping");
    double dt = adaptive_dt(state, forcing, config.cfl);
    const bool last = state.t + dt >= config.t_end;
    if (last) dt = config.t_end - state.t;
    state = step_unnormalized(state, forcing, dt);
    if (last) state.t = config.t_end;
    run.convexity_lost = run.convexity_lost || state.diag.convexity_lost;
    const bool stops = state.t >= config.t_end || state.diag.H_max >= config.H_cap ||
                       state.diag.area <= config.min_area_fraction * area0;
    if (state.step % config.snapshot_every == 0 || stops) record(state);
  }
  run.steps = state.step;
  return run;
}

void rescale_series(std::vector<FlowState>& snapshots) {
  if (snapshots.empty()) return;
  const double area0 = snapshots.front().diag.area;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    FlowState& s = snapshots[k];
    if (!(s.diag.area > 0.0)) throw InvalidInput("snapshot with non-positive area");
    s.phi = std::sqrt(area0 / s.diag.area);
    s.t_tilde = k == 0 ? 0.0
                       : snapshots[k - 1].t_tilde + 0.5 * (s.t - snapshots[k - 1].t) *
                                                        (s.phi * s.phi + snapshots[k - 1].phi * snapshots[k - 1].phi);
  }
}

TriangleMesh normalized_mesh(const FlowState& state) { return scaled(state.mesh, state.phi); }

double central_difference(double t0, double f0, double t1, double f1, double t2, double f2) {
  const double h1 = t1 - t0, h2 = t2 - t1;
  return -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
}

namespace {

struct Sample {
  double error;
  double t;
};

ResidualReport summarize(std::vector<Sample> samples) {
  ResidualReport r;
  r.samples = samples.size();
  if (samples.empty()) return r;
  std::vector<double> errors;
  errors.reserve(samples.size());
  for (const auto& s : samples) {
    errors.push_back(s.error);
    if (s.error >= r.worst) {
      r.worst = s.error;
      r.worst_time = s.t;
    }
  }
  auto quantile = [&](double q) {
    std::vector<double> e = errors;
    const std::size_t k = std::min(e.size() - 1, static_cast<std::size_t>(std::floor(q * static_cast<double>(e.size() - 1) + 0.5)));
    std::nth_element(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(k), e.end());
    return e[k];
  };
  r.median = quantile(0.5);
  r.p90 = quantile(0.9);
  return r;
}

// |fd - predicted| / |predicted|, with |predicted| floored at 1e-12 of the
// largest predicted magnitude; identical values count as zero error.
void append_relative(std::vector<Sample>& out, const std::vector<double>& fd, const std::vector<double>& pred,
                     const std::vector<double>& times) {
  double scale = 0.0;
  for (double p : pred) scale = std::max(scale, std::abs(p));
  const double floor = scale > 0.0 ? 1e-12 * scale : std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double diff = std::abs(fd[i] - pred[i]);
    out.push_back({diff == 0.0 ? 0.0 : diff / std::max(std::abs(pred[i]), floor), times[i]});
  }
}

void require_three(const std::vector<FlowState>& snapshots) {
  if (snapshots.size() < 3) throw InvalidInput("evolution checks need at least 3 snapshots");
}

}  // namespace

ResidualReport verify_metric_evolution(const std::vector<FlowState>& snapshots, const Forcing& forcing) {
  require_three(snapshots);
  std::vector<double> fd, pred, times;
  for (std::size_t k = 1; k + 1 < snapshots.size(); ++k) {
    const FlowState &a = snapshots[k - 1], &b = snapshots[k], &c = snapshots[k + 1];
    const double kappa = forcing.kappa(b.t);
    for (Eigen::Index f = 0; f < b.mesh.num_faces(); ++f) {
      for (int j = 0; j < 3; ++j) {
        const int i0 = b.mesh.faces(f, j), i1 = b.mesh.faces(f, (j + 1) % 3);
        auto len2 = [&](const FlowState& s) { return (s.mesh.vertices.row(i1) - s.mesh.vertices.row(i0)).squaredNorm(); };
        const Eigen::Vector3d e = (b.mesh.vertices.row(i1) - b.mesh.vertices.row(i0)).transpose();
        fd.push_back(central_difference(a.t, len2(a), b.t, len2(b), c.t, len2(c)));
        pred.push_back(-2.0 * b.cache.face_H(f) * b.cache.second_form(f, e) + 2.0 * kappa * e.squaredNorm());
        times.push_back(b.t);
      }
    }
  }
  std::vector<Sample> samples;
  append_relative(samples, fd, pred, times);
  return summarize(std::move(samples));
}

Eigen::VectorXd predicted_H_rate(const GeometryCache& cache, double kappa) {
  const Eigen::VectorXd laplacian = -(cache.stiffness * cache.H).cwiseQuotient(cache.mass);
  return laplacian + cache.A2.cwiseProduct(cache.H) - kappa * cache.H;
}

ResidualReport verify_H_evolution(const std::vector<FlowState>& snapshots, const Forcing& forcing) {
  require_three(snapshots);
  std::vector<double> fd, pred, times;
  for (std::size_t k = 1; k + 1 < snapshots.size(); ++k) {
    const FlowState &a = snapshots[k - 1], &b = snapshots[k], &c = snapshots[k + 1];
    const Eigen::VectorXd rate = predicted_H_rate(b.cache, forcing.kappa(b.t));
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      fd.push_back(central_difference(a.t, a.cache.H[i], b.t, b.cache.H[i], c.t, c.cache.H[i]));
      pred.push_back(rate[i]);
      times.push_back(b.t);
    }
  }
  std::vector<Sample> samples;
  append_relative(samples, fd, pred, times);
  return summarize(std::move(samples));
}

void dump_snapshots(const std::vector<FlowState>& snapshots, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw InvalidInput("cannot write " + (dir / "manifest.csv").string());
  manifest.precision(17);
  manifest << "step,t,dt,area,H_min,H_max,avg_H2,pinch_dev,phi,t_tilde,K_accum\n";
  for (const FlowState& s : snapshots) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%08ld.off", s.step);
    save_mesh(s.mesh, dir / name);
    manifest << s.step << ',' << s.t << ',' << s.dt << ',' << s.diag.area << ',' << s.diag.H_min << ','
             << s.diag.H_max << ',' << s.diag.avg_H2 << ',' << s.diag.pinch_dev << ',' << s.phi << ',' << s.t_tilde
             << ',' << s.K_accum << '\n';
  }
}

}  // namespace eigenflow
