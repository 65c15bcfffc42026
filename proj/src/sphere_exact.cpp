#include "eigenflow/sphere_exact.hpp"

#include "eigenflow/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace eigenflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHorizon = 1e6;

void check_model(const SphereModel& m) {
  if (m.n < 2) throw InvalidInput("sphere dimension n must be at least 2");
  if (!(m.r0 > 0.0) || !std::isfinite(m.r0)) throw InvalidInput("sphere radius r0 must be positive");
}

void check_barriers(const BarrierPair& b) {
  if (b.n < 2) throw InvalidInput("dimension n must be at least 2");
  if (!(b.H_min0 > 0.0) || !(b.H_max0 >= b.H_min0) || !std::isfinite(b.H_max0))
    throw InvalidInput("barriers need 0 < H_min0 <= H_max0");
}

// e^{-K} (a - c I)^{-1/2}, or DomainError when the bracket has closed.
double bernoulli(double a, double c, const Forcing& f, double t, const char* what) {
  const double bracket = a - c * f.I(t);
  if (!(bracket > 0.0)) throw DomainError(std::string(what) + " is undefined at t = " + std::to_string(t));
  return std::exp(-f.K(t)) / std::sqrt(bracket);
}

}  // namespace

BlowUp first_zero(double a, double c, const Forcing& forcing) {
  BlowUp out;
  const double level = a / c;
  const double limit = forcing.I_limit();
  const bool table = forcing.kind() == ForcingKind::table;
  if (level >= limit) {
    out.time = kInf;
    out.extrapolated = table;
    return out;
  }
  auto g = [&](double t) { return a - c * forcing.I(t); };
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kHorizon) {
      out.time = kInf;
      out.inconclusive = true;
      out.extrapolated = table;
      return out;
    }
  }
  const auto [x0, x1] = boost::math::tools::bisect(
      g, lo, hi, [](double x, double y) { return std::abs(y - x) <= 1e-13 * std::max(std::abs(x), std::abs(y)); });
  out.time = 0.5 * (x0 + x1);
  out.extrapolated = table && out.time > forcing.table_end();
  return out;
}

double radius(const SphereModel& model, double t) {
  check_model(model);
  const double bracket = model.r0 * model.r0 - 2.0 * model.n * model.forcing.I(t);
  if (!(bracket > 0.0)) throw DomainError("sphere has collapsed by t = " + std::to_string(t));
  return std::sqrt(bracket) * std::exp(model.forcing.K(t));
}

double radius_quadrature(const SphereModel& model, double t) {
  check_model(model);
  const double bracket = model.r0 * model.r0 - 2.0 * model.n * model.forcing.I_quadrature(t);
  if (!(bracket > 0.0)) throw DomainError("sphere has collapsed by t = " + std::to_string(t));
  return std::sqrt(bracket) * std::exp(model.forcing.K(t));
}

BlowUp t_max(const SphereModel& model) {
  check_model(model);
  return first_zero(model.r0 * model.r0, 2.0 * model.n, model.forcing);
}

double lambda1_exact(const SphereModel& model, double t) {
  const double r = radius(model, t);
  return model.n / (r * r);
}

double H_exact(const SphereModel& model, double t) { return model.n / radius(model, t); }

double rho(const BarrierPair& b, double t) {
  check_barriers(b);
  return bernoulli(1.0 / (b.H_max0 * b.H_max0), 2.0, b.forcing, t, "rho");
}

double sigma_scaled(const BarrierPair& b, double t) {
  check_barriers(b);
  return std::sqrt(static_cast<double>(b.n)) * bernoulli(1.0 / (b.H_min0 * b.H_min0), 2.0, b.forcing, t, "sigma");
}

double sigma_ode(const BarrierPair& b, double t) {
  check_barriers(b);
  return bernoulli(1.0 / (b.H_min0 * b.H_min0), 2.0 / b.n, b.forcing, t, "sigma");
}

BlowUp rho_blowup(const BarrierPair& b) {
  check_barriers(b);
  return first_zero(1.0 / (b.H_max0 * b.H_max0), 2.0, b.forcing);
}

BlowUp sigma_scaled_blowup(const BarrierPair& b) {
  check_barriers(b);
  return first_zero(1.0 / (b.H_min0 * b.H_min0), 2.0, b.forcing);
}

BlowUp sigma_ode_blowup(const BarrierPair& b) {
  check_barriers(b);
  return first_zero(1.0 / (b.H_min0 * b.H_min0), 2.0 / b.n, b.forcing);
}

double envelope(double lambda1_0, const Forcing& forcing, double t) {
  if (!(lambda1_0 > 0.0)) throw InvalidInput("envelope needs a positive initial eigenvalue");
  return std::exp(-2.0 * forcing.K(t)) * lambda1_0;
}

ConditionReport monotonicity_condition(const BarrierPair& b, double t, Direction direction) {
  check_barriers(b);
  // barriers past their own blow-up are reported as NaN; only the one the
  // requested direction needs must exist
  auto squared = [&](auto barrier) {
    try {
      const double v = barrier(b, t);
      return v * v;
    } catch (const DomainError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  ConditionReport r;
  r.rho2 = squared(rho);
  r.sigma_scaled2 = squared(sigma_scaled);
  r.sigma_ode2 = squared(sigma_ode);
  r.rhs = b.n * b.forcing.kappa(t);
  if (direction == Direction::nonincreasing) {
    if (std::isnan(r.rho2)) throw DomainError("rho is undefined at t = " + std::to_string(t));
    r.lhs = r.rho2;
    r.holds = r.lhs <= r.rhs;
    r.sufficient = r.rho2 <= r.rhs;
  } else {
    if (std::isnan(r.sigma_ode2)) throw DomainError("sigma is undefined at t = " + std::to_string(t));
    r.lhs = r.sigma_scaled2;
    r.holds = r.lhs >= r.rhs;  // false when sigma_scaled has blown up (NaN)
    r.sufficient = r.sigma_ode2 >= r.rhs;
  }
  return r;
}

}  // namespace eigenflow
