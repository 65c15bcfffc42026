#pragma once

#include "eigenflow/geometry.hpp"
#include "eigenflow/mesh.hpp"
#include "eigenflow/sphere_exact.hpp"
#include "eigenflow/spectrum.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace eigenflow {

struct TraceRecord {
  double t = 0.0;
  double dt = 0.0;
  double area = 0.0;
  double H_min = 0.0;
  double H_max = 0.0;
  double avg_H2 = 0.0;
  double pinch_dev = 0.0;
  double kappa = 0.0;
  double K_accum = 0.0;
  double phi = 1.0;
  double t_tilde = 0.0;
  double lambda1 = 0.0;
  double lambda1_residual = 0.0;
  double envelope = 0.0;
  double eq12_rhs = 0.0;
  double fd_dlambda1 = 0.0;           ///< NaN at the first and last record
  std::vector<double> lambda1p;       ///< one per p_values entry
  std::vector<double> eq13_rhs;
};

struct EigenTrace {
  std::vector<double> p_values;
  std::vector<TraceRecord> records;
  std::map<std::string, std::string> metadata;

  /// Column by its CSV name, e.g. "lambda1" or "lambda1p_3".
  std::vector<double> column(const std::string& name) const;
  std::vector<std::string> column_names() const;
};

/// Formats p the way it appears in column names ("2", "1.5").
std::string p_label(double p);

/// Fills envelope (from the first record's lambda1) and fd_dlambda1.
void finalize_trace(EigenTrace& trace);

/// -2 lambda kappa + 2 int H h(grad u, grad u) + 2 int u H <grad H, grad u>,
/// with u the M-normalized eigenfunction in `eigen`.
double eq12_rhs(const TriangleMesh& mesh, const GeometryCache& cache, const EigenResult& eigen, double kappa);

/// -p kappa lambda_p + p int B H h(grad u, grad u) + 2 int B u H <grad H, grad u>,
/// B = |grad u|^{p-2}. Throws InvalidInput for p <= 1.
double eq13_rhs(const TriangleMesh& mesh, const GeometryCache& cache, const EigenResult& eigen, double kappa,
                double p);

/// Same formulas on a normalized surface, with kappa replaced by h_tilde / n.
double normalized_rhs(const TriangleMesh& mesh, const GeometryCache& cache, const EigenResult& eigen, double h_tilde,
                      double p, int n = 2);

struct CheckReport {
  std::string check;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  double worst_time = 0.0;
  double p90 = 0.0;  ///< derivative checks only
};

/// min lambda1 / envelope >= 1 - tol.
CheckReport check_bound(const EigenTrace& trace, double tol);

/// Median of |fd - rhs| / max(|rhs|, 1e-6 max|lambda|) over interior
/// records, passing when <= tol. `which` selects "lambda1" (against eq12_rhs)
/// or "lambda1p_<p>" (against eq13_rhs_<p>). Both difference checks throw
/// InvalidInput on traces with fewer than 3 records.
CheckReport check_derivative(const EigenTrace& trace, double tol, const std::string& which = "lambda1");

/// fd_dlambda1 + 2 lambda1 kappa >= -tol |lambda1| at every interior record.
CheckReport check_decay_rate(const EigenTrace& trace, double tol);

/// Successive records satisfy v[k+1] >= v[k] (1 - tol) (nondecreasing) or
/// v[k+1] <= v[k] (1 + tol) (nonincreasing). Statistic is the largest
/// relative step against the direction.
CheckReport check_monotone(const EigenTrace& trace, Direction direction, double tol,
                           const std::string& column = "lambda1");
CheckReport check_monotone_series(const std::string& name, const std::vector<double>& t,
                                  const std::vector<double>& values, Direction direction, double tol);

/// lambda1 e^{2 K} nondecreasing within tol per step.
CheckReport check_envelope_monotone(const EigenTrace& trace, double tol);

std::string to_json(const std::vector<CheckReport>& reports);

void write_trace_csv(const EigenTrace& trace, std::ostream& out);
std::string trace_to_csv(const EigenTrace& trace);
void save_trace(const EigenTrace& trace, const std::filesystem::path& path);
/// Throws InvalidInput on missing columns or malformed numbers.
EigenTrace load_trace(const std::filesystem::path& path);
EigenTrace parse_trace(std::istream& in);

}  // namespace eigenflow
