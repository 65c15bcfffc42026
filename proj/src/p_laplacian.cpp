#include "eigenflow/errors.hpp"
#include "eigenflow/spectrum.hpp"

#include <Eigen/SparseCholesky>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace eigenflow {

namespace {

// x^e for x >= 0, with multiplications and one sqrt when 2e is a small integer.
class Power {
public:
  explicit Power(double e) : e_(e) {
    const double twice = 2.0 * e;
    if (twice == std::round(twice) && std::abs(twice) <= 16.0) {
      half_ = static_cast<int>(twice);
      exact_ = true;
    }
  }

  double operator()(double x) const {
    if (!exact_) return std::pow(x, e_);
    const bool odd = half_ % 2 != 0;
    const int k = odd ? (half_ - 1) / 2 : half_ / 2;
    double r = 1.0;
    for (int i = 0; i < std::abs(k); ++i) r *= x;
    if (k < 0) r = 1.0 / r;
    return odd ? r * std::sqrt(x) : r;
  }

private:
  double e_;
  int half_ = 0;
  bool exact_ = false;
};

// Discrete p-Rayleigh quotient with its Euclidean gradient.
class PQuotient {
public:
  PQuotient(const TriangleMesh& mesh, double p)
      : G_(gradient_operator(mesh)), area_(face_areas(mesh)), mass_(barycentric_mass(mesh)), p_(p),
        pow_p_(p), pow_p1_(p - 1.0), pow_p2_(p - 2.0) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p must lie in (1, inf), got " + std::to_string(p));
    reference_ = cotangent_stiffness(mesh);
    const double s = 8.0 * std::numbers::pi / mass_.sum();
    for (Eigen::Index i = 0; i < reference_.rows(); ++i) reference_.coeffRef(i, i) += s * mass_[i];
    reference_solver_.compute(reference_);
    if (reference_solver_.info() != Eigen::Success) throw NumericalError("shifted stiffness factorization failed");
  }

  const Eigen::VectorXd& mass() const { return mass_; }
  double p() const { return p_; }

  // S + (8 pi / area) M, used for smoothing starts and for measuring stationarity
  const Eigen::SimplicialLDLT<SparseMatrix>& reference() const { return reference_solver_; }

  double value(const Eigen::VectorXd& u, Eigen::VectorXd* grad = nullptr) const {
    const Eigen::VectorXd g = G_ * u;
    const Eigen::Index nf = area_.size();
    Eigen::VectorXd flux;
    if (grad) flux.resize(3 * nf);
    double numer = 0.0;
    for (Eigen::Index f = 0; f < nf; ++f) {
      const auto gf = g.segment<3>(3 * f);
      const double n = gf.norm();
      numer += n > 0.0 ? area_[f] * pow_p_(n) : 0.0;
      if (grad) flux.segment<3>(3 * f) = n > 0.0 ? (p_ * area_[f] * pow_p2_(n)) * gf : Eigen::Vector3d::Zero().eval();
    }
    double denom = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) denom += mass_[i] * pow_p_(std::abs(u[i]));
    if (!(denom > 0.0)) throw InvalidInput("p-Rayleigh quotient of the zero function");
    const double R = numer / denom;
    if (grad) {
      Eigen::VectorXd dD(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i)
        dD[i] = u[i] == 0.0 ? 0.0 : std::copysign(p_ * mass_[i] * pow_p1_(std::abs(u[i])), u[i]);
      *grad = (G_.transpose() * flux - R * dD) / denom;
    }
    return R;
  }

  // G^T diag(A_f (|g_f|^2 + delta^2)^{(p-2)/2}) G + s M: the p-weighted
  // stiffness at u, shifted by a mass term of matching scale.
  SparseMatrix preconditioner(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd g = G_ * u;
    const Eigen::Index nf = area_.size();
    Eigen::VectorXd n2(nf);
    for (Eigen::Index f = 0; f < nf; ++f) n2[f] = g.segment<3>(3 * f).squaredNorm();
    const double delta2 = 1e-6 * (area_.dot(n2) / area_.sum());
    Eigen::VectorXd w(3 * nf);
    double wsum = 0.0;
    for (Eigen::Index f = 0; f < nf; ++f) {
      const double wf = area_[f] * pow_p2_(std::sqrt(n2[f] + delta2));
      w.segment<3>(3 * f).setConstant(wf);
      wsum += wf;
    }
    SparseMatrix P = G_.transpose() * w.asDiagonal() * G_;
    const double s = (wsum / area_.sum()) * 8.0 * std::numbers::pi / mass_.sum();
    for (Eigen::Index i = 0; i < P.rows(); ++i) P.coeffRef(i, i) += s * mass_[i];
    return P;
  }

  // Gradient projected off the balance-constraint normal, measured in the
  // dual norm of the reference operator P0 and made scale free:
  // ||g_proj||_{P0^-1} ||u||_{P0} / (p R).
  double stationarity(const Eigen::VectorXd& u, const Eigen::VectorXd& grad, double R) const {
    Eigen::VectorXd c(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
      c[i] = u[i] == 0.0 ? 0.0 : (p_ - 1.0) * mass_[i] * pow_p2_(std::abs(u[i]));
    const Eigen::VectorXd zg = reference_solver_.solve(grad);
    const Eigen::VectorXd zc = reference_solver_.solve(c);
    const double cc = c.dot(zc);
    double gg = grad.dot(zg);
    if (cc > 0.0 && std::isfinite(cc)) gg -= grad.dot(zc) * grad.dot(zc) / cc;
    const double unorm = std::sqrt(u.dot(reference_ * u));
    return std::sqrt(std::max(gg, 0.0)) * unorm / (p_ * R);
  }

private:
  SparseMatrix G_;
  Eigen::VectorXd area_;
  Eigen::VectorXd mass_;
  double p_;
  Power pow_p_, pow_p1_, pow_p2_;
  SparseMatrix reference_;
  Eigen::SimplicialLDLT<SparseMatrix> reference_solver_;
};

struct Descent {
  Eigen::VectorXd u;
  double lambda = 0.0;
  double stationarity = 0.0;
  int iterations = 0;
};

// Preconditioned nonlinear conjugate gradients (Polak-Ribiere+) on the
// quotient. The line search runs on the unconstrained quotient, whose first
// variation in the constant direction vanishes on the constraint set; the
// accepted point is then pushed back onto the constraints and kept only if
// the quotient went down. Otherwise the step is halved with projection.
Descent descend(const PQuotient& q, const Eigen::VectorXd& start, double tol, int max_iter) {
  const double p = q.p();
  Descent d;
  d.u = project_p_constraints(q.mass(), start, p);
  Eigen::VectorXd grad;
  d.lambda = q.value(d.u, &grad);
  d.stationarity = q.stationarity(d.u, grad, d.lambda);

  Eigen::SimplicialLDLT<SparseMatrix> precond;
  precond.analyzePattern(q.preconditioner(d.u));
  auto refactor = [&] {
    precond.factorize(q.preconditioner(d.u));
    if (precond.info() != Eigen::Success) throw NumericalError("p-eigen preconditioner factorization failed");
  };
  refactor();

  Eigen::VectorXd z = precond.solve(grad);
  Eigen::VectorXd dir = -z;
  double gz = grad.dot(z);
  double step = 1.0 / p;
  int quiet_steps = 0;
  bool restarted = false;
  for (int it = 1; it <= max_iter; ++it) {
    d.iterations = it;
    auto along = [&](double a) { return q.value(d.u + a * dir); };
    auto projected = [&](double a) { return project_p_constraints(q.mass(), d.u + a * dir, p); };

    double lo = 0.0, hi = step;
    double f_hi = along(hi);
    if (f_hi < d.lambda) {
      for (int grow = 0; grow < 40; ++grow) {
        const double f_next = along(2.0 * hi);
        if (!(f_next < f_hi)) break;
        lo = hi;
        hi *= 2.0;
        f_hi = f_next;
      }
      hi *= 2.0;
    }
    double alpha = boost::math::tools::brent_find_minima(along, lo, hi, 20).first;
    Eigen::VectorXd trial = projected(alpha);
    double value = q.value(trial);
    for (int halving = 0; halving < 60 && !(value < d.lambda); ++halving) {
      alpha *= 0.5;
      trial = projected(alpha);
      value = q.value(trial);
    }
    if (!(value < d.lambda)) {
      if (d.stationarity <= tol) return d;
      if (!restarted) {
        // the conjugate direction may have gone stale; retry steepest descent
        restarted = true;
        dir = -z;
        step = 1.0 / p;
        continue;
      }
      throw NumericalError("p-eigen line search found no decrease at stationarity " + std::to_string(d.stationarity),
                           d.stationarity);
    }
    restarted = false;

    const double rel_change = (d.lambda - value) / d.lambda;
    d.u = std::move(trial);
    d.lambda = q.value(d.u, &grad);
    d.stationarity = q.stationarity(d.u, grad, d.lambda);
    step = std::max(alpha, 1e-12);
    quiet_steps = rel_change < tol ? quiet_steps + 1 : 0;
    if (quiet_steps >= 10 && d.stationarity < tol) return d;

    if (it % 20 == 0) refactor();
    const Eigen::VectorXd z_new = precond.solve(grad);
    const double gz_new = grad.dot(z_new);
    const double beta = std::max(0.0, (gz_new - grad.dot(z)) / gz);
    z = z_new;
    gz = gz_new;
    dir = -z + beta * dir;
    if (dir.dot(grad) >= 0.0) dir = -z;
  }
  throw NumericalError("p-eigen descent did not converge in " + std::to_string(max_iter) + " iterations",
                       d.stationarity);
}

}  // namespace

double p_balance(const Eigen::VectorXd& mass, const Eigen::VectorXd& u, double p) {
  const Power power(p - 1.0);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) sum += std::copysign(mass[i] * power(std::abs(u[i])), u[i]);
  return sum;
}

double p_norm_p(const Eigen::VectorXd& mass, const Eigen::VectorXd& u, double p) {
  const Power power(p);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) sum += mass[i] * power(std::abs(u[i]));
  return sum;
}

Eigen::VectorXd project_p_constraints(const Eigen::VectorXd& mass, const Eigen::VectorXd& u, double p) {
  const double lo = -u.maxCoeff();
  const double hi = -u.minCoeff();
  if (!(hi > lo)) throw InvalidInput("cannot balance a constant function");
  auto balance = [&](double c) { return p_balance(mass, (u.array() + c).matrix(), p); };
  double c = 0.0;
  const double f_lo = balance(lo), f_hi = balance(hi);
  if (f_lo == 0.0) {
    c = lo;
  } else if (f_hi == 0.0) {
    c = hi;
  } else {
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(balance, lo, hi, f_lo, f_hi,
                                                          boost::math::tools::eps_tolerance<double>(52), max_iter);
    c = 0.5 * (a + b);
  }
  Eigen::VectorXd v = (u.array() + c).matrix();
  const double norm = p_norm_p(mass, v, p);
  if (!(norm > 0.0)) throw InvalidInput("balanced function vanishes");
  return v / std::pow(norm, 1.0 / p);
}

double p_rayleigh(const TriangleMesh& mesh, const Eigen::VectorXd& u, double p) {
  if (u.size() != mesh.num_vertices()) throw InvalidInput("function size does not match vertex count");
  return PQuotient(mesh, p).value(u);
}

EigenResult first_p_eigenpair(const TriangleMesh& mesh, double p, const PEigenOptions& options) {
  const PQuotient quotient(mesh, p);
  const Eigen::VectorXd& mass = quotient.mass();

  std::vector<Eigen::VectorXd> starts;
  if (options.init == PInit::supplied) {
    if (options.start.size() != mesh.num_vertices()) throw InvalidInput("supplied start has wrong size");
    starts.push_back(options.start);
  } else {
    const EigenResult laplace = first_eigenpair(assemble(mesh));
    starts.push_back(laplace.u);
    starts.push_back(-laplace.u);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd r(mesh.num_vertices());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = normal(rng);
    // one smoothing solve so the random start has finite energy scale
    starts.push_back(quotient.reference().solve(mass.cwiseProduct(r)));
  }

  EigenResult best;
  best.p = p;
  best.lambda = std::numeric_limits<double>::infinity();
  double best_failure = std::numeric_limits<double>::infinity();
  std::string failure;
  for (const auto& start : starts) {
    try {
      Descent d = descend(quotient, start, options.tol, options.max_iter);
      best.iterations += d.iterations;
      best.candidates.push_back(d.lambda);
      if (d.lambda < best.lambda) {
        best.lambda = d.lambda;
        best.u = std::move(d.u);
        best.residual = d.stationarity;
      }
    } catch (const NumericalError& e) {
      best.candidates.push_back(std::numeric_limits<double>::quiet_NaN());
      best_failure = std::min(best_failure, e.best_residual());
      failure = e.what();
    }
  }
  if (!std::isfinite(best.lambda)) throw NumericalError(failure, best_failure);
  return best;
}

}  // namespace eigenflow
