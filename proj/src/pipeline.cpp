#include "eigenflow/pipeline.hpp"

#include "eigenflow/errors.hpp"

#include <cmath>
#include <sstream>

namespace eigenflow {

TriangleMesh make_shape(const ShapeConfig& shape) {
  if (shape.kind == "icosphere") return make_icosphere(shape.radius, shape.subdivisions);
  if (shape.kind == "ellipsoid") return make_ellipsoid(shape.axes[0], shape.axes[1], shape.axes[2], shape.subdivisions);
  if (shape.kind == "file") return load_mesh(shape.path);
  throw InvalidInput("unknown shape kind '" + shape.kind + "'");
}

std::string describe_shape(const ShapeConfig& shape) {
  std::ostringstream os;
  os.precision(17);
  if (shape.kind == "icosphere")
    os << "icosphere(radius=" << shape.radius << ", subdivisions=" << shape.subdivisions << ")";
  else if (shape.kind == "ellipsoid")
    os << "ellipsoid(" << shape.axes[0] << ", " << shape.axes[1] << ", " << shape.axes[2]
       << "; subdivisions=" << shape.subdivisions << ")";
  else
    os << "file(" << shape.path << ")";
  return os.str();
}

RunResult compute_trace(const RunConfig& config) {
  const Forcing forcing = Forcing::parse(config.forcing);
  const TriangleMesh mesh0 = make_shape(config.shape);

  RunResult out;
  out.flow = run_flow(mesh0, forcing, config.flow);
  rescale_series(out.flow.snapshots);

  EigenTrace& trace = out.trace;
  trace.p_values = config.spectrum.p_values;
  trace.metadata["mesh"] = describe_shape(config.shape);
  trace.metadata["forcing"] = forcing.to_string();
  trace.metadata["config_hash"] = config_hash(config);
  trace.metadata["termination"] = to_string(out.flow.reason);

  Eigen::VectorXd previous_u;
  std::vector<Eigen::VectorXd> previous_p(config.spectrum.p_values.size());
  bool warned_pinch = false;
  for (const FlowState& s : out.flow.snapshots) {
    const StiffnessMass ops{s.cache.stiffness, s.cache.mass};
    EigenResult laplace = first_eigenpair(ops, config.spectrum.tol, config.spectrum.max_iter);
    if (previous_u.size() == laplace.u.size()) align_eigenvector(laplace, previous_u, ops.mass);
    previous_u = laplace.u;

    TraceRecord r;
    r.t = s.t;
    r.dt = s.dt;
    r.area = s.diag.area;
    r.H_min = s.diag.H_min;
    r.H_max = s.diag.H_max;
    r.avg_H2 = s.diag.avg_H2;
    r.pinch_dev = s.diag.pinch_dev;
    r.kappa = forcing.kappa(s.t);
    r.K_accum = s.K_accum;
    r.phi = s.phi;
    r.t_tilde = s.t_tilde;
    r.lambda1 = laplace.lambda;
    r.lambda1_residual = laplace.residual;
    r.eq12_rhs = eq12_rhs(s.mesh, s.cache, laplace, r.kappa);

    for (std::size_t j = 0; j < config.spectrum.p_values.size(); ++j) {
      const double p = config.spectrum.p_values[j];
      PEigenOptions options;
      options.tol = config.spectrum.p_tol;
      options.max_iter = config.spectrum.max_iter;
      options.seed = config.spectrum.seed;
      EigenResult pe;
      bool solved = false;
      if (previous_p[j].size() == mesh0.num_vertices()) {
        options.init = PInit::supplied;
        options.start = previous_p[j];
        try {
          pe = first_p_eigenpair(s.mesh, p, options);
          solved = true;
        } catch (const NumericalError&) {
          // fall back to the full set of starts below
        }
      }
      if (!solved) {
        options.init = PInit::laplace;
        pe = first_p_eigenpair(s.mesh, p, options);
      }
      previous_p[j] = pe.u;
      r.lambda1p.push_back(pe.lambda);
      if (p == 2.0) {
        EigenResult same = laplace;
        same.p = 2.0;
        r.eq13_rhs.push_back(eq13_rhs(s.mesh, s.cache, same, r.kappa, 2.0));
      } else {
        r.eq13_rhs.push_back(eq13_rhs(s.mesh, s.cache, pe, r.kappa, p));
      }
    }

    if (s.diag.convexity_lost)
      out.warnings.push_back("convexity lost at t = " + std::to_string(s.t));
    if (s.diag.pinch_dev > 0.1 && !warned_pinch) {
      out.warnings.push_back("pinching deviation " + std::to_string(s.diag.pinch_dev) + " exceeds 0.1 at t = " +
                             std::to_string(s.t));
      warned_pinch = true;
    }
    trace.records.push_back(std::move(r));
  }
  if (out.flow.convexity_lost && out.warnings.empty())
    out.warnings.push_back("convexity lost between snapshots");
  finalize_trace(trace);
  return out;
}

std::vector<CheckReport> configured_checks(const EigenTrace& trace, const ChecksConfig& checks) {
  std::vector<CheckReport> reports;
  reports.push_back(check_bound(trace, checks.bound_tol));
  reports.push_back(check_envelope_monotone(trace, checks.monotone.tol));
  if (trace.records.size() >= 3) {  // difference quotients need an interior record
    reports.push_back(check_decay_rate(trace, checks.monotone.tol));
    reports.push_back(check_derivative(trace, checks.derivative_tol));
  }
  if (checks.monotone.direction) {
    reports.push_back(check_monotone(trace, *checks.monotone.direction, checks.monotone.tol, "lambda1"));
    for (double p : trace.p_values)
      reports.push_back(check_monotone(trace, *checks.monotone.direction, checks.monotone.tol, "lambda1p_" + p_label(p)));
  }
  return reports;
}

}  // namespace eigenflow
