#include "eigenflow/spectrum.hpp"

#include "eigenflow/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace eigenflow {

namespace {

using Solver = Eigen::SimplicialLDLT<SparseMatrix>;

void factor_shifted(const StiffnessMass& ops, Solver& solver) {
  const Eigen::Index n = ops.mass.size();
  const double shift = 1e-8 * ops.stiffness.diagonal().sum() / static_cast<double>(n);
  SparseMatrix shifted = ops.stiffness;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * ops.mass[i];
  solver.compute(shifted);
  if (solver.info() != Eigen::Success) throw NumericalError("factorization of S + shift M failed");
}

// Removes the M-weighted mean of each column.
void deflate_constants(Eigen::MatrixXd& X, const Eigen::VectorXd& mass) {
  const double total = mass.sum();
  const Eigen::RowVectorXd means = (mass.transpose() * X) / total;
  X.rowwise() -= means;
}

// Y <- Y L^{-T} with Y^T M Y = L L^T.
void m_orthonormalize(Eigen::MatrixXd& Y, const Eigen::VectorXd& mass) {
  const Eigen::MatrixXd B = Y.transpose() * mass.asDiagonal() * Y;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) throw NumericalError("iteration block lost rank");
  Y = llt.matrixU().solve<Eigen::OnTheRight>(Y);
}

double residual_norm(const StiffnessMass& ops, const Eigen::VectorXd& u, double lambda) {
  const Eigen::VectorXd r = ops.stiffness * u - lambda * ops.mass.cwiseProduct(u);
  return std::sqrt((r.array().square() / ops.mass.array()).sum());
}

}  // namespace

StiffnessMass assemble(const TriangleMesh& mesh) {
  validate(mesh);
  return {cotangent_stiffness(mesh), barycentric_mass(mesh)};
}

EigenResult first_eigenpair(const StiffnessMass& ops, double tol, int max_iter) {
  const Eigen::Index n = ops.mass.size();
  if (n < 3) throw InvalidInput("eigenproblem needs at least 3 vertices");
  Solver solver;
  factor_shifted(ops, solver);

  const Eigen::Index block = std::min<Eigen::Index>(6, n - 1);
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
  deflate_constants(X, ops.mass);

  EigenResult result;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd Y = solver.solve(ops.mass.asDiagonal() * X);
    deflate_constants(Y, ops.mass);
    m_orthonormalize(Y, ops.mass);
    const Eigen::MatrixXd A = Y.transpose() * (ops.stiffness * Y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (A + A.transpose()));
    X = Y * ritz.eigenvectors();
    theta = ritz.eigenvalues();

    const double res = residual_norm(ops, X.col(0), theta[0]);
    result.residual_history.push_back(res);
    best = std::min(best, res);
    result.iterations = it;
    if (!std::isfinite(res)) throw NumericalError("eigen iteration produced non-finite values", best);
    if (res <= tol) break;
    if (it == max_iter) {
      throw NumericalError("first_eigenpair did not converge in " + std::to_string(max_iter) +
                               " iterations (best residual " + std::to_string(best) + ")",
                           best);
    }
  }

  result.lambda = theta[0];
  result.u = X.col(0);
  result.residual = result.residual_history.back();
  if (!(result.lambda > 0.0)) throw NumericalError("first eigenvalue is not positive", result.residual);

  Eigen::Index cluster = 1;
  while (cluster < block && std::abs(theta[cluster] - theta[0]) <= 1e-8 * theta[0]) ++cluster;
  result.eigenspace = X.leftCols(cluster);

  // The block's next Ritz value already bounds the rest of the spectrum; the
  // independent deflated run guards against a start vector blind to a mode.
  const double next = deflated_eigenvalue(ops, result.eigenspace);
  if (next < result.lambda * (1.0 - 1e-8)) {
    throw NumericalError("deflated iteration found a smaller positive eigenvalue " + std::to_string(next),
                         result.residual);
  }
  return result;
}

double deflated_eigenvalue(const StiffnessMass& ops, const Eigen::MatrixXd& deflate, double tol, int max_iter) {
  const Eigen::Index n = ops.mass.size();
  Solver solver;
  factor_shifted(ops, solver);

  Eigen::MatrixXd D(n, deflate.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(deflate.cols()) = deflate;
  m_orthonormalize(D, ops.mass);
  auto project = [&](Eigen::MatrixXd& y) {
    for (int pass = 0; pass < 2; ++pass) y -= D * (D.transpose() * ops.mass.asDiagonal() * y);
  };

  std::mt19937_64 rng(977);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = normal(rng);
  project(x);

  double q_prev = std::numeric_limits<double>::infinity();
  double q = q_prev;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd y = solver.solve(ops.mass.asDiagonal() * x);
    project(y);
    const double mm = (y.col(0).array().square() * ops.mass.array()).sum();
    x = y / std::sqrt(mm);
    q = x.col(0).dot(ops.stiffness * x.col(0));
    if (std::abs(q - q_prev) <= tol * q) break;
    q_prev = q;
  }
  return q;
}

void align_eigenvector(EigenResult& result, const Eigen::VectorXd& previous, const Eigen::VectorXd& mass) {
  if (previous.size() != result.u.size()) return;
  const Eigen::VectorXd mp = mass.cwiseProduct(previous);
  if (result.eigenspace.cols() > 1) {
    const Eigen::VectorXd coeff = result.eigenspace.transpose() * mp;
    if (coeff.norm() > 1e-12) {
      result.u = result.eigenspace * coeff.normalized();
      return;
    }
  }
  if (result.u.dot(mp) < 0.0) result.u = -result.u;
}

}  // namespace eigenflow
