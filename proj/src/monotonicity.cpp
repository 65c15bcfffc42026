#include "eigenflow/monotonicity.hpp"

#include "eigenflow/errors.hpp"
#include "eigenflow/flow.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace eigenflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t p_index(const EigenTrace& trace, const std::string& label) {
  for (std::size_t j = 0; j < trace.p_values.size(); ++j)
    if (p_label(trace.p_values[j]) == label) return j;
  throw InvalidInput("trace has no column for p = " + label);
}

std::vector<double> central_differences(const std::vector<double>& t, const std::vector<double>& v) {
  std::vector<double> fd(v.size(), kNaN);
  for (std::size_t k = 1; k + 1 < v.size(); ++k)
    fd[k] = central_difference(t[k - 1], v[k - 1], t[k], v[k], t[k + 1], v[k + 1]);
  return fd;
}

double quantile(std::vector<double> v, double q) {
  const std::size_t k =
      std::min(v.size() - 1, static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1) + 0.5)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

std::string p_label(double p) {
  std::ostringstream os;
  os.precision(17);
  os << p;
  return os.str();
}

std::vector<std::string> EigenTrace::column_names() const {
  std::vector<std::string> names = {"t",       "dt",     "area",        "H_min",      "H_max",
                                    "avg_H2",  "pinch_dev", "kappa",    "K_accum",    "phi",
                                    "t_tilde", "lambda1", "lambda1_residual", "envelope", "eq12_rhs",
                                    "fd_dlambda1"};
  for (double p : p_values) {
    names.push_back("lambda1p_" + p_label(p));
    names.push_back("eq13_rhs_" + p_label(p));
  }
  return names;
}

std::vector<double> EigenTrace::column(const std::string& name) const {
  std::vector<double> out;
  out.reserve(records.size());
  auto collect = [&](auto member) {
    for (const auto& r : records) out.push_back(r.*member);
    return out;
  };
  if (name == "t") return collect(&TraceRecord::t);
  if (name == "dt") return collect(&TraceRecord::dt);
  if (name == "area") return collect(&TraceRecord::area);
  if (name == "H_min") return collect(&TraceRecord::H_min);
  if (name == "H_max") return collect(&TraceRecord::H_max);
  if (name == "avg_H2") return collect(&TraceRecord::avg_H2);
  if (name == "pinch_dev") return collect(&TraceRecord::pinch_dev);
  if (name == "kappa") return collect(&TraceRecord::kappa);
  if (name == "K_accum") return collect(&TraceRecord::K_accum);
  if (name == "phi") return collect(&TraceRecord::phi);
  if (name == "t_tilde") return collect(&TraceRecord::t_tilde);
  if (name == "lambda1") return collect(&TraceRecord::lambda1);
  if (name == "lambda1_residual") return collect(&TraceRecord::lambda1_residual);
  if (name == "envelope") return collect(&TraceRecord::envelope);
  if (name == "eq12_rhs") return collect(&TraceRecord::eq12_rhs);
  if (name == "fd_dlambda1") return collect(&TraceRecord::fd_dlambda1);
  for (const char* prefix : {"lambda1p_", "eq13_rhs_"}) {
    const std::string pre = prefix;
    if (name.starts_with(pre)) {
      const std::size_t j = p_index(*this, name.substr(pre.size()));
      const bool lambda = pre == "lambda1p_";
      for (const auto& r : records) out.push_back(lambda ? r.lambda1p.at(j) : r.eq13_rhs.at(j));
      return out;
    }
  }
  throw InvalidInput("unknown trace column '" + name + "'");
}

void finalize_trace(EigenTrace& trace) {
  if (trace.records.empty()) return;
  const double lambda0 = trace.records.front().lambda1;
  for (auto& r : trace.records) r.envelope = std::exp(-2.0 * r.K_accum) * lambda0;
  const auto fd = central_differences(trace.column("t"), trace.column("lambda1"));
  for (std::size_t k = 0; k < fd.size(); ++k) trace.records[k].fd_dlambda1 = fd[k];
}

double eq13_rhs(const TriangleMesh& mesh, const GeometryCache& cache, const EigenResult& eigen, double kappa,
                double p) {
  if (!(p > 1.0)) throw InvalidInput("p must exceed 1");
  if (cache.shape.size() != static_cast<std::size_t>(mesh.num_faces()))
    throw InvalidInput("geometry cache has no shape operator for this mesh");
  if (eigen.u.size() != mesh.num_vertices()) throw InvalidInput("eigenfunction size does not match mesh");
  const SparseMatrix G = gradient_operator(mesh);
  const Eigen::VectorXd grad_u = G * eigen.u;
  const Eigen::VectorXd grad_H = G * cache.H;
  double curvature_term = 0.0, gradient_term = 0.0;
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d g = grad_u.segment<3>(3 * f);
    const double norm = g.norm();
    if (norm == 0.0) continue;
    const double B = std::pow(norm, p - 2.0);
    double u_bar = 0.0, H_bar = 0.0;
    for (int j = 0; j < 3; ++j) {
      u_bar += eigen.u[mesh.faces(f, j)] / 3.0;
      H_bar += cache.H[mesh.faces(f, j)] / 3.0;
    }
    const double A = cache.face_area[f];
    curvature_term += A * B * H_bar * cache.second_form(f, g);
    gradient_term += A * B * u_bar * H_bar * grad_H.segment<3>(3 * f).dot(g);
  }
  return -p * kappa * eigen.lambda + p * curvature_term + 2.0 * gradient_term;
}

double eq12_rhs(const TriangleMesh& mesh, const GeometryCache& cache, const EigenResult& eigen, double kappa) {
  return eq13_rhs(mesh, cache, eigen, kappa, 2.0);
}

double normalized_rhs(const TriangleMesh& mesh, const GeometryCache& cache, const EigenResult& eigen, double h_tilde,
                      double p, int n) {
  return eq13_rhs(mesh, cache, eigen, h_tilde / n, p);
}

CheckReport check_bound(const EigenTrace& trace, double tol) {
  CheckReport r{"bound", false, std::numeric_limits<double>::infinity(), 1.0 - tol, kNaN};
  for (const auto& rec : trace.records) {
    const double ratio = rec.lambda1 / rec.envelope;
    if (!(ratio >= r.statistic)) {
      r.statistic = ratio;
      r.worst_time = rec.t;
    }
  }
  r.pass = !trace.records.empty() && r.statistic >= r.threshold;
  return r;
}

CheckReport check_derivative(const EigenTrace& trace, double tol, const std::string& which) {
  if (trace.records.size() < 3) throw InvalidInput("derivative check needs at least 3 records");
  CheckReport r{"derivative_" + which, false, kNaN, tol, kNaN};
  const std::vector<double> t = trace.column("t");
  std::vector<double> lambda, fd, rhs;
  if (which == "lambda1") {
    lambda = trace.column("lambda1");
    fd = trace.column("fd_dlambda1");
    rhs = trace.column("eq12_rhs");
  } else if (which.starts_with("lambda1p_")) {
    lambda = trace.column(which);
    fd = central_differences(t, lambda);
    rhs = trace.column("eq13_rhs_" + which.substr(9));
  } else {
    throw InvalidInput("derivative check needs lambda1 or lambda1p_<p>, got '" + which + "'");
  }
  double scale = 0.0;
  for (double v : lambda) scale = std::max(scale, std::abs(v));
  const double floor = 1e-6 * scale;
  std::vector<double> errors;
  double worst = -1.0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double e = std::abs(fd[k] - rhs[k]) / std::max(std::abs(rhs[k]), floor);
    errors.push_back(e);
    if (!(e <= worst)) {
      worst = e;
      r.worst_time = t[k];
    }
  }
  r.statistic = quantile(errors, 0.5);
  r.p90 = quantile(errors, 0.9);
  r.pass = r.statistic <= tol;
  return r;
}

CheckReport check_decay_rate(const EigenTrace& trace, double tol) {
  if (trace.records.size() < 3) throw InvalidInput("decay-rate check needs at least 3 records");
  CheckReport r{"decay_rate", false, std::numeric_limits<double>::infinity(), -tol, kNaN};
  for (std::size_t k = 1; k + 1 < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    const double margin = (rec.fd_dlambda1 + 2.0 * rec.lambda1 * rec.kappa) / std::abs(rec.lambda1);
    if (!(margin >= r.statistic)) {
      r.statistic = margin;
      r.worst_time = rec.t;
    }
  }
  r.pass = r.statistic >= r.threshold;
  return r;
}

CheckReport check_monotone_series(const std::string& name, const std::vector<double>& t,
                                  const std::vector<double>& values, Direction direction, double tol) {
  CheckReport r{name, false, -std::numeric_limits<double>::infinity(), tol, kNaN};
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double step = (values[k + 1] - values[k]) / std::abs(values[k]);
    const double against = direction == Direction::nondecreasing ? -step : step;
    if (!(against <= r.statistic)) {
      r.statistic = against;
      r.worst_time = t[k + 1];
    }
  }
  if (values.size() < 2) r.statistic = 0.0;
  r.pass = r.statistic <= tol;
  return r;
}

CheckReport check_monotone(const EigenTrace& trace, Direction direction, double tol, const std::string& column) {
  const std::string name = std::string("monotone_") +
                           (direction == Direction::nondecreasing ? "nondecreasing_" : "nonincreasing_") + column;
  return check_monotone_series(name, trace.column("t"), trace.column(column), direction, tol);
}

CheckReport check_envelope_monotone(const EigenTrace& trace, double tol) {
  std::vector<double> t, v;
  for (const auto& rec : trace.records) {
    t.push_back(rec.t);
    v.push_back(rec.lambda1 * std::exp(2.0 * rec.K_accum));
  }
  return check_monotone_series("envelope_monotone", t, v, Direction::nondecreasing, tol);
}

std::string to_json(const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  for (const auto& r : reports) {
    out.push_back({{"check", r.check},
                   {"pass", r.pass},
                   {"statistic", number(r.statistic)},
                   {"threshold", number(r.threshold)},
                   {"worst_time", number(r.worst_time)}});
  }
  return out.dump(2);
}

}  // namespace eigenflow
