#pragma once

#include "eigenflow/geometry.hpp"
#include "eigenflow/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace eigenflow {

/// Discrete Laplace-Beltrami pencil: S u = lambda M u.
struct StiffnessMass {
  SparseMatrix stiffness;  ///< cotangent, positive semidefinite, rows sum to zero
  Eigen::VectorXd mass;    ///< diagonal of the lumped (barycentric) mass matrix
};

StiffnessMass assemble(const TriangleMesh& mesh);

struct EigenResult {
  double lambda = 0.0;
  Eigen::VectorXd u;
  double residual = 0.0;
  int iterations = 0;
  double p = 2.0;

  /// p = 2: M-orthonormal basis of the numerically degenerate eigenspace of
  /// lambda (u is one of its columns).
  Eigen::MatrixXd eigenspace;
  /// p = 2: residual after each outer iteration.
  std::vector<double> residual_history;
  /// p != 2: stationary value reached from each initialization, in order
  /// (+Laplace, -Laplace, random) or the single supplied start.
  std::vector<double> candidates;
};

/// Smallest positive eigenvalue of S u = lambda M u by block inverse
/// iteration on S + shift M with constants deflated. Converged when
/// ||S u - lambda M u||_{M^-1} <= tol. Throws NumericalError on failure.
EigenResult first_eigenpair(const StiffnessMass& ops, double tol = 1e-10, int max_iter = 10000);

/// Smallest eigenvalue of the pencil restricted to the M-orthogonal
/// complement of the constants and of `deflate` (single-vector inverse
/// iteration). Used to confirm no smaller positive eigenvalue was skipped.
double deflated_eigenvalue(const StiffnessMass& ops, const Eigen::MatrixXd& deflate, double tol = 1e-12,
                           int max_iter = 10000);

/// Discrete p-Rayleigh quotient sum_f A_f |grad u|_f^p / sum_i m_i |u_i|^p.
/// Throws InvalidInput when the denominator vanishes or p <= 1.
double p_rayleigh(const TriangleMesh& mesh, const Eigen::VectorXd& u, double p);

enum class PInit { laplace, supplied };

struct PEigenOptions {
  double tol = 1e-7;
  int max_iter = 10000;
  PInit init = PInit::laplace;
  Eigen::VectorXd start;      ///< used when init == supplied
  std::uint64_t seed = 12345; ///< random third start for init == laplace
};

/// First nonzero p-Laplace eigenvalue as the minimum of the p-Rayleigh
/// quotient subject to sum m |u|^{p-2} u = 0 and sum m |u|^p = 1.
EigenResult first_p_eigenpair(const TriangleMesh& mesh, double p, const PEigenOptions& options = {});

/// Mass-weighted sums used by the normalization constraints.
double p_balance(const Eigen::VectorXd& mass, const Eigen::VectorXd& u, double p);  ///< sum m |u|^{p-2} u
double p_norm_p(const Eigen::VectorXd& mass, const Eigen::VectorXd& u, double p);   ///< sum m |u|^p

/// Shifts u by the unique constant that zeroes p_balance, then rescales so
/// p_norm_p = 1.
Eigen::VectorXd project_p_constraints(const Eigen::VectorXd& mass, const Eigen::VectorXd& u, double p);

/// Rotates/flips `result.u` within its eigenspace toward `previous`
/// (mass-weighted projection), keeping the M-normalization.
void align_eigenvector(EigenResult& result, const Eigen::VectorXd& previous, const Eigen::VectorXd& mass);

}  // namespace eigenflow
