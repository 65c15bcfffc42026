// eigenflow: forced mean curvature flow of convex meshes with eigenvalue tracking.
//
//   eigenflow sphere   --n 2 --r0 1 --forcing inv_linear --samples 50 [--t-end T]
//   eigenflow run      config.json
//   eigenflow verify   trace.csv [--checks bound,derivative,...] [--config config.json]
//   eigenflow spectrum mesh.off [--p 2,3] [--dump DIR]
//
// Exit codes: 0 success, 1 check failure, 2 input or configuration error,
// 3 numerical failure.

#include "eigenflow/errors.hpp"
#include "eigenflow/pipeline.hpp"
#include "eigenflow/sphere_exact.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

using namespace eigenflow;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kInputError = 2, kNumericalError = 3 };

std::filesystem::path output_dir(const std::string& configured) {
  if (const char* env = std::getenv("EIGENFLOW_OUT"); env && *env) return env;
  return configured;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidInput("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_sphere(int n, double r0, const std::string& forcing_text, int samples, double t_end_arg) {
  SphereModel model{n, r0, Forcing::parse(forcing_text)};
  if (samples < 2) throw InvalidInput("--samples must be at least 2");
  const BlowUp tmax = t_max(model);
  double t_end = t_end_arg;
  if (!(t_end > 0.0)) {
    if (!std::isfinite(tmax.time)) throw InvalidInput("T_max is infinite; pass --t-end");
    t_end = 0.99 * tmax.time;
  }
  if (t_end >= tmax.time) throw InvalidInput("--t-end must lie below T_max = " + fmt(tmax.time));

  const double H0 = n / r0;
  const BarrierPair barriers{H0, H0, n, model.forcing};
  const double lambda0 = lambda1_exact(model, 0.0);
  std::cout.precision(17);
  std::cout << "t,r,lambda1,envelope,rho,sigma_scaled,sigma_ode,cond_dec,cond_inc,kappa,K\n";
  for (int k = 0; k < samples; ++k) {
    const double t = t_end * k / (samples - 1);
    auto guarded = [&](auto f) {
      try {
        return f();
      } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    const double rh = guarded([&] { return rho(barriers, t); });
    const double sp = guarded([&] { return sigma_scaled(barriers, t); });
    const double so = guarded([&] { return sigma_ode(barriers, t); });
    std::string dec = "nan", inc = "nan";
    try {
      dec = monotonicity_condition(barriers, t, Direction::nonincreasing).holds ? "1" : "0";
      inc = monotonicity_condition(barriers, t, Direction::nondecreasing).holds ? "1" : "0";
    } catch (const DomainError&) {
    }
    std::cout << fmt(t) << ',' << fmt(radius(model, t)) << ',' << fmt(lambda1_exact(model, t)) << ','
              << fmt(envelope(lambda0, model.forcing, t)) << ',' << fmt(rh) << ',' << fmt(sp) << ',' << fmt(so) << ','
              << dec << ',' << inc << ',' << fmt(model.forcing.kappa(t)) << ',' << fmt(model.forcing.K(t)) << '\n';
  }
  std::cerr << "T_max = ";
  if (tmax.inconclusive)
    std::cerr << "inconclusive(horizon)";
  else
    std::cerr << fmt(tmax.time);
  if (tmax.extrapolated) std::cerr << " (table extrapolated)";
  std::cerr << '\n';
  return kOk;
}

int cmd_run(const std::string& config_path) {
  const RunConfig config = load_config(config_path);
  const std::filesystem::path dir = output_dir(config.output.dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo(dir / "config.json");
    echo << config_to_json(config);
  }
  RunResult result = compute_trace(config);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  save_trace(result.trace, dir / "trace.csv");
  if (config.output.dump_meshes) {
    dump_snapshots(result.flow.snapshots, dir / "snapshots");
  }
  const auto reports = configured_checks(result.trace, config.checks);
  {
    std::ofstream report(dir / "report.json");
    report << to_json(reports) << '\n';
  }
  const auto& last = result.trace.records.back();
  std::cout << "records " << result.trace.records.size() << ", steps " << result.flow.steps << ", stopped by "
            << to_string(result.flow.reason) << " at t = " << fmt(last.t) << "\n"
            << "lambda1: " << fmt(result.trace.records.front().lambda1) << " -> " << fmt(last.lambda1) << "\n";
  for (const auto& r : reports)
    std::cout << (r.pass ? "  ok    " : "  FAIL  ") << r.check << " = " << fmt(r.statistic) << " (threshold "
              << fmt(r.threshold) << ")\n";
  std::cout << "wrote " << (dir / "trace.csv").string() << '\n';
  return kOk;
}

int cmd_verify(const std::string& trace_path, const std::string& checks_text, const ChecksConfig& checks,
               const std::string& column) {
  const EigenTrace trace = load_trace(trace_path);
  if (trace.records.empty()) throw InvalidInput("trace has no records");
  std::vector<CheckReport> reports;
  std::stringstream in(checks_text);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (name == "bound") {
      reports.push_back(check_bound(trace, checks.bound_tol));
    } else if (name == "derivative") {
      reports.push_back(check_derivative(trace, checks.derivative_tol, column));
    } else if (name == "decay_rate") {
      reports.push_back(check_decay_rate(trace, checks.monotone.tol));
    } else if (name == "envelope") {
      reports.push_back(check_envelope_monotone(trace, checks.monotone.tol));
    } else if (name == "monotone") {
      if (!checks.monotone.direction) throw InvalidInput("monotone check needs --direction or a configured direction");
      reports.push_back(check_monotone(trace, *checks.monotone.direction, checks.monotone.tol, column));
    } else {
      throw InvalidInput("unknown check '" + name + "' (bound, derivative, decay_rate, envelope, monotone)");
    }
  }
  std::cout << to_json(reports) << '\n';
  for (const auto& r : reports)
    if (!r.pass) {
      std::cerr << "check failed: " << r.check << '\n';
      return kCheckFailed;
    }
  return kOk;
}

int cmd_spectrum(const std::string& mesh_path, const std::string& p_text, const std::string& dump_dir, double tol,
                 double p_tol) {
  const TriangleMesh mesh = load_mesh(mesh_path);
  const std::vector<double> ps = split_doubles(p_text);
  std::cout.precision(17);
  auto dump = [&](const EigenResult& e, const std::string& label) {
    if (dump_dir.empty()) return;
    const std::filesystem::path dir = output_dir(dump_dir);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / ("eigenfunction_p" + label + ".csv"));
    out.precision(17);
    out << "vertex_index,u_value\n";
    for (Eigen::Index i = 0; i < e.u.size(); ++i) out << i << ',' << e.u[i] << '\n';
  };
  const EigenResult linear = first_eigenpair(assemble(mesh), tol);
  std::cout << "lambda1 " << fmt(linear.lambda) << " residual " << fmt(linear.residual) << " multiplicity "
            << linear.eigenspace.cols() << '\n';
  dump(linear, "laplace");
  for (double p : ps) {
    PEigenOptions options;
    options.tol = p_tol;
    const EigenResult e = first_p_eigenpair(mesh, p, options);
    std::cout << "lambda1p_" << p_label(p) << ' ' << fmt(e.lambda) << " stationarity " << fmt(e.residual)
              << " candidates";
    for (double c : e.candidates) std::cout << ' ' << fmt(c);
    std::cout << '\n';
    dump(e, p_label(p));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forced mean curvature flow with eigenvalue tracking"};
  app.require_subcommand(1);

  int n = 2, samples = 101;
  double r0 = 1.0, t_end = 0.0;
  std::string forcing = "zero";
  auto* sphere = app.add_subcommand("sphere", "Exact round-sphere solution, barriers and conditions as CSV");
  sphere->add_option("--n", n, "Hypersurface dimension")->check(CLI::Range(2, 64));
  sphere->add_option("--r0", r0, "Initial radius");
  sphere->add_option("--forcing", forcing, "zero | constant:c | inv_linear | neg_inv_linear | table:path");
  sphere->add_option("--samples", samples, "Number of sample times");
  sphere->add_option("--t-end", t_end, "Last sample time (default 0.99 T_max)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Flow a mesh and write the eigenvalue trace");
  run->add_option("config", config_path, "JSON configuration")->required();

  std::string trace_path, checks = "bound", verify_config, column = "lambda1", direction;
  double bound_tol = -1.0, derivative_tol = -1.0, monotone_tol = -1.0;
  auto* verify = app.add_subcommand("verify", "Run checks on a trace CSV");
  verify->add_option("trace", trace_path, "Trace CSV")->required();
  verify->add_option("--checks", checks, "Comma list: bound, derivative, decay_rate, envelope, monotone");
  verify->add_option("--config", verify_config, "Take tolerances from this run configuration");
  verify->add_option("--column", column, "Eigenvalue column for derivative and monotone checks");
  verify->add_option("--direction", direction, "nondecreasing | nonincreasing");
  verify->add_option("--bound-tol", bound_tol);
  verify->add_option("--derivative-tol", derivative_tol);
  verify->add_option("--monotone-tol", monotone_tol);

  std::string mesh_path, p_text = "2", dump_dir;
  double tol = 1e-10, p_tol = 1e-7;
  auto* spectrum = app.add_subcommand("spectrum", "First Laplace and p-Laplace eigenvalues of a mesh");
  spectrum->add_option("mesh", mesh_path, "OFF mesh")->required();
  spectrum->add_option("--p", p_text, "Comma list of exponents");
  spectrum->add_option("--dump", dump_dir, "Directory for eigenfunction CSVs");
  spectrum->add_option("--tol", tol, "Laplace residual tolerance");
  spectrum->add_option("--p-tol", p_tol, "p-Laplace stationarity tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sphere) return cmd_sphere(n, r0, forcing, samples, t_end);
    if (*run) return cmd_run(config_path);
    if (*verify) {
      ChecksConfig c = verify_config.empty() ? ChecksConfig{} : load_config(verify_config).checks;
      if (!direction.empty()) c.monotone.direction = parse_direction(direction);
      if (bound_tol > 0) c.bound_tol = bound_tol;
      if (derivative_tol > 0) c.derivative_tol = derivative_tol;
      if (monotone_tol > 0) c.monotone.tol = monotone_tol;
      return cmd_verify(trace_path, checks, c, column);
    }
    if (*spectrum) return cmd_spectrum(mesh_path, p_text, dump_dir, tol, p_tol);
  } catch (const StructuralError& e) {
    std::cerr << "structural error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvalidInput& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConvexityError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return kNumericalError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
