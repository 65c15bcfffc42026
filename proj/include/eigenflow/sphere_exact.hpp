#pragma once

#include "eigenflow/forcing.hpp"

namespace eigenflow {

/// Round n-sphere of initial radius r0 moving under the forced flow; its
/// radius obeys r' = -n / r + kappa r.
struct SphereModel {
  int n = 2;
  double r0 = 1.0;
  Forcing forcing;
};

/// First zero of a bracket function a - c I(t).
struct BlowUp {
  double time = 0.0;          ///< +inf when the bracket stays positive
  bool inconclusive = false;  ///< scan horizon reached without a sign change (tables only)
  bool extrapolated = false;  ///< the answer depends on the table's held end value
};

/// First zero of a - c I(t) for a, c > 0. Bisection to relative width 1e-13
/// after an exponential scan (horizon 1e6) whenever the limit of I does not
/// already settle it.
BlowUp first_zero(double a, double c, const Forcing& forcing);

/// r(t) = (r0^2 - 2n I(t))^{1/2} e^{K(t)}. Throws DomainError at or past t_max.
double radius(const SphereModel& model, double t);
/// Same, with I(t) from adaptive quadrature instead of the closed form.
double radius_quadrature(const SphereModel& model, double t);
BlowUp t_max(const SphereModel& model);
/// n / r(t)^2.
double lambda1_exact(const SphereModel& model, double t);
/// n / r(t).
double H_exact(const SphereModel& model, double t);

/// Initial mean-curvature extremes of a surface, 0 < H_min0 <= H_max0.
struct BarrierPair {
  double H_max0 = 1.0;
  double H_min0 = 1.0;
  int n = 2;
  Forcing forcing;
};

/// Upper barrier: solves rho' = rho^3 - kappa rho, rho(0) = H_max0.
double rho(const BarrierPair& b, double t);
/// Lower barrier in the scaled form
/// sqrt(n) e^{-K} (H_min0^{-2} - 2 I)^{-1/2}. Note sigma_scaled(0) = sqrt(n) H_min0.
double sigma_scaled(const BarrierPair& b, double t);
/// Lower barrier solving sigma' = sigma^3 / n - kappa sigma, sigma(0) = H_min0.
double sigma_ode(const BarrierPair& b, double t);
BlowUp rho_blowup(const BarrierPair& b);
BlowUp sigma_scaled_blowup(const BarrierPair& b);
BlowUp sigma_ode_blowup(const BarrierPair& b);

/// e^{-2 K(t)} lambda1_0.
double envelope(double lambda1_0, const Forcing& forcing, double t);

enum class Direction { nonincreasing, nondecreasing };

struct ConditionReport {
  bool holds = false;         ///< literal reading: lhs <= rhs (nonincreasing) or lhs >= rhs
  double lhs = 0.0;           ///< rho^2 (nonincreasing) or sigma_scaled^2 (nondecreasing)
  double rhs = 0.0;           ///< n kappa(t)
  double rho2 = 0.0;
  double sigma_scaled2 = 0.0;
  double sigma_ode2 = 0.0;
  bool sufficient = false;    ///< rho^2 <= n kappa, or sigma_ode^2 >= n kappa
};

/// Barrier values past their blow-up are NaN. Throws DomainError when the
/// barrier the direction relies on (rho, or sigma_ode) is undefined at t.
ConditionReport monotonicity_condition(const BarrierPair& b, double t, Direction direction);

}  // namespace eigenflow
