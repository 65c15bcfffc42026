#include "eigenflow/errors.hpp"
#include "eigenflow/sphere_exact.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <functional>

using namespace eigenflow;
using testing::rel;

namespace {

std::vector<Forcing> analytic_forcings() {
  return {Forcing::zero(), Forcing::constant(0.5), Forcing::constant(-0.3), Forcing::inv_linear(),
          Forcing::neg_inv_linear()};
}

// Classical RK4 for a scalar ODE y' = f(t, y).
double rk4(const std::function<double(double, double)>& f, double y, double t_end, int steps) {
  const double h = t_end / steps;
  double t = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(t, y);
    const double k2 = f(t + h / 2, y + h / 2 * k1);
    const double k3 = f(t + h / 2, y + h / 2 * k2);
    const double k4 = f(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return y;
}

}  // namespace

TEST_CASE("forcing closed forms") {
  const double t = 0.7;
  CHECK(Forcing::zero().kappa(t) == 0.0);
  CHECK(Forcing::zero().I(t) == t);
  CHECK(Forcing::constant(0.5).K(t) == doctest::Approx(0.35));
  CHECK(Forcing::inv_linear().K(t) == doctest::Approx(std::log(1.7)));
  CHECK(Forcing::inv_linear().I(t) == doctest::Approx(0.7 / 1.7));
  CHECK(Forcing::neg_inv_linear().kappa(t) == doctest::Approx(-1.0 / 1.7));
  CHECK(Forcing::neg_inv_linear().I(t) == doctest::Approx((1.7 * 1.7 * 1.7 - 1.0) / 3.0));
  for (const auto& f : analytic_forcings()) {
    CHECK(f.K(0.0) == 0.0);
    CHECK(!std::signbit(f.K(0.0)));
    CHECK(f.I(0.0) == 0.0);
  }
  CHECK(Forcing::constant(0.0).I(t) == doctest::Approx(t).epsilon(1e-14));
  CHECK(Forcing::constant(1e-14).I(t) == doctest::Approx(t).epsilon(1e-12));
  CHECK_THROWS_AS(Forcing::zero().K(-1.0), InvalidInput);
}

TEST_CASE("closed-form I agrees with quadrature") {
  for (const auto& f : analytic_forcings()) {
    for (const double t : {0.01, 0.3, 1.0, 5.0}) {
      CAPTURE(f.to_string());
      CAPTURE(t);
      CHECK(rel(f.I(t), f.I_quadrature(t)) <= 1e-10);
    }
  }
}

TEST_CASE("I_limit") {
  CHECK(std::isinf(Forcing::zero().I_limit()));
  CHECK(Forcing::constant(0.25).I_limit() == 2.0);
  CHECK(std::isinf(Forcing::constant(-0.25).I_limit()));
  CHECK(Forcing::inv_linear().I_limit() == 1.0);
  CHECK(std::isinf(Forcing::neg_inv_linear().I_limit()));
  CHECK(rel(Forcing::constant(0.25).I(200.0), 2.0) <= 1e-12);
  CHECK(rel(Forcing::inv_linear().I(1e9), 1.0) <= 1e-8);
}

TEST_CASE("forcing parse and print") {
  for (const std::string s : {"zero", "inv_linear", "neg_inv_linear"}) CHECK(Forcing::parse(s).to_string() == s);
  const auto c = Forcing::parse("constant:0.25");
  CHECK(c.kind() == ForcingKind::constant);
  CHECK(c.constant_value() == 0.25);
  CHECK(Forcing::parse(c.to_string()).constant_value() == 0.25);
  CHECK_THROWS_AS(Forcing::parse("constant:"), InvalidInput);
  CHECK_THROWS_AS(Forcing::parse("constant:abc"), InvalidInput);
  CHECK_THROWS_AS(Forcing::parse("constant:inf"), InvalidInput);
  CHECK_THROWS_AS(Forcing::parse("quadratic"), InvalidInput);
  CHECK_THROWS_AS(Forcing::parse("table:/nonexistent/forcing.csv"), InvalidInput);
}

TEST_CASE("table forcing") {
  const auto dir = testing::scratch_dir("forcing_table");
  {
    std::ofstream out(dir / "k.csv");
    out << "# t, kappa\n0, 0.3\n1.0, 0.3\n\n2.0 0.3\n";
  }
  const auto table = Forcing::parse("table:" + (dir / "k.csv").string());
  const auto constant = Forcing::constant(0.3);
  CHECK(table.kind() == ForcingKind::table);
  CHECK(table.table_end() == 2.0);
  for (const double t : {0.0, 0.5, 1.5, 2.0, 7.0}) {
    CHECK(table.kappa(t) == doctest::Approx(0.3));
    CHECK(rel(table.K(t) + 1e-300, constant.K(t) + 1e-300) <= 1e-12);
    CHECK(std::abs(table.I(t) - constant.I(t)) <= 1e-12);
  }
  CHECK(rel(table.I_limit(), constant.I_limit()) <= 1e-12);
  CHECK(Forcing::parse(table.to_string()).kappa(1.0) == doctest::Approx(0.3));

  // linear interpolation and held ends
  const auto ramp = Forcing::table({0.5, 1.5}, {0.0, 1.0});
  CHECK(ramp.kappa(0.0) == 0.0);
  CHECK(ramp.kappa(1.0) == doctest::Approx(0.5));
  CHECK(ramp.kappa(9.0) == 1.0);
  CHECK(ramp.K(1.5) == doctest::Approx(0.5));
  CHECK(ramp.K(2.5) == doctest::Approx(1.5));
  CHECK(rel(ramp.I(2.5), ramp.I_quadrature(2.5)) <= 1e-10);

  // a table starting before t = 0 is cut at the origin
  const auto shifted = Forcing::table({-1.0, 1.0}, {0.0, 2.0});
  CHECK(shifted.kappa(0.0) == doctest::Approx(1.0));
  CHECK(shifted.K(1.0) == doctest::Approx(1.5));

  CHECK_THROWS_AS(Forcing::table({0.0, 0.0}, {1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(Forcing::table({0.0}, {}), InvalidInput);
  {
    std::ofstream out(dir / "bad.csv");
    out << "0 1 2\n";
  }
  CHECK_THROWS_AS(Forcing::load_table(dir / "bad.csv"), InvalidInput);
}

TEST_CASE("sphere radius examples") {
  SphereModel m{2, 1.0, Forcing::zero()};
  CHECK(radius(m, 0.1875) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lambda1_exact(m, 0.1875) == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(H_exact(m, 0.0) == 2.0);
  CHECK(t_max(m).time == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(radius(m, 0.25), DomainError);
  CHECK_THROWS_AS(radius(m, 0.3), DomainError);

  // constant forcing: r0^2 = 2n (1 - e^{-2ct}) / (2c)
  SphereModel c{2, 2.0, Forcing::constant(0.25)};
  CHECK(t_max(c).time == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  SphereModel big{2, 4.0, Forcing::constant(0.5)};
  CHECK(std::isinf(t_max(big).time));
  CHECK(!t_max(big).inconclusive);
  CHECK(radius(big, 10.0) > radius(big, 1.0));
  SphereModel border{2, 2.0, Forcing::constant(0.5)};
  CHECK(std::isinf(t_max(border).time));

  // inv_linear: r0^2 = 2n t / (t + 1)
  SphereModel inv{3, 1.0, Forcing::inv_linear()};
  CHECK(t_max(inv).time == doctest::Approx(0.2).epsilon(1e-12));
  SphereModel inv_big{2, 3.0, Forcing::inv_linear()};
  CHECK(std::isinf(t_max(inv_big).time));

  CHECK_THROWS_AS(radius(SphereModel{1, 1.0, Forcing::zero()}, 0.0), InvalidInput);
  CHECK_THROWS_AS(radius(SphereModel{2, -1.0, Forcing::zero()}, 0.0), InvalidInput);
}

TEST_CASE("sphere radius solves its ODE") {
  for (const int n : {2, 3}) {
    for (const double r0 : {0.5, 1.0, 2.0, 4.0}) {
      for (const auto& f : analytic_forcings()) {
        const SphereModel m{n, r0, f};
        const double horizon = std::min(t_max(m).time, 2.0);
        const double t = 0.4 * horizon;
        const double h = 1e-5 * horizon;
        const double r = radius(m, t);
        const double dr = (radius(m, t + h) - radius(m, t - h)) / (2 * h);
        CAPTURE(n);
        CAPTURE(r0);
        CAPTURE(f.to_string());
        CHECK(std::abs(dr - (-n / r + f.kappa(t) * r)) <= 1e-6 * (n / r + std::abs(f.kappa(t)) * r));
        const double ode = rk4([&](double s, double y) { return -n / y + f.kappa(s) * y; }, r0, t, 4000);
        CHECK(rel(r, ode) <= 1e-9);
        CHECK(rel(radius_quadrature(m, t), r) <= 1e-10);
      }
    }
  }
}

TEST_CASE("barrier examples") {
  const BarrierPair unit{1.0, 1.0, 2, Forcing::zero()};
  CHECK(rho(unit, 0.375) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rho(unit, 0.0) == 1.0);
  CHECK(rho_blowup(unit).time == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sigma_ode(unit, 0.0) == 1.0);
  CHECK(sigma_scaled(unit, 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sigma_ode_blowup(unit).time == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigma_scaled_blowup(unit).time == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(rho(unit, 0.5), DomainError);

  const BarrierPair inv{2.0, 1.0, 2, Forcing::inv_linear()};
  CHECK(rho_blowup(inv).time == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(std::isinf(sigma_ode_blowup(inv).time));

  CHECK_THROWS_AS(rho(BarrierPair{1.0, 2.0, 2, Forcing::zero()}, 0.0), InvalidInput);
  CHECK_THROWS_AS(rho(BarrierPair{1.0, 0.0, 2, Forcing::zero()}, 0.0), InvalidInput);
}

TEST_CASE("barriers solve their ODEs and stay ordered") {
  for (const auto& f : analytic_forcings()) {
    const BarrierPair b{2.5, 1.5, 2, f};
    const double t = 0.5 * std::min(rho_blowup(b).time, 1.0);
    const double r_ode = rk4([&](double s, double y) { return y * y * y - f.kappa(s) * y; }, b.H_max0, t, 20000);
    const double s_ode =
        rk4([&](double s, double y) { return y * y * y / b.n - f.kappa(s) * y; }, b.H_min0, t, 20000);
    CAPTURE(f.to_string());
    CHECK(rel(rho(b, t), r_ode) <= 1e-8);
    CHECK(rel(sigma_ode(b, t), s_ode) <= 1e-8);
    for (int i = 0; i <= 20; ++i) {
      const double s = t * i / 20.0;
      CHECK(sigma_ode(b, s) <= rho(b, s));
    }
  }
}

TEST_CASE("barriers are sharp on round spheres") {
  for (const auto& f : analytic_forcings()) {
    const SphereModel m{2, 1.5, f};
    const BarrierPair b{H_exact(m, 0.0), H_exact(m, 0.0), 2, f};
    const double t = 0.6 * std::min(t_max(m).time, 1.0);
    CHECK(rel(sigma_ode(b, t), H_exact(m, t)) <= 1e-12);
    // rho moves with H^3, faster than the sphere, so it stays above
    const double s = 0.6 * rho_blowup(b).time;
    CHECK(rho(b, s) >= H_exact(m, s));
  }
}

TEST_CASE("envelope") {
  CHECK(envelope(2.0, Forcing::zero(), 3.0) == 2.0);
  CHECK(envelope(2.0, Forcing::constant(0.5), 1.0) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(envelope(2.0, Forcing::inv_linear(), 1.0) == doctest::Approx(0.5));
  CHECK(envelope(2.0, Forcing::neg_inv_linear(), 1.0) == doctest::Approx(8.0));
  CHECK_THROWS_AS(envelope(0.0, Forcing::zero(), 1.0), InvalidInput);
}

TEST_CASE("first_zero edge cases") {
  // diverging bracket beyond the scan horizon
  const auto slow = first_zero(1e7, 1.0, Forcing::zero());
  CHECK(std::isinf(slow.time));
  CHECK(slow.inconclusive);
  CHECK(!slow.extrapolated);

  const auto table = Forcing::table({0.0, 1.0}, {0.0, 0.0});
  const auto held = first_zero(3.0, 1.0, table);
  CHECK(held.time == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(held.extrapolated);
  const auto inside = first_zero(0.5, 1.0, table);
  CHECK(inside.time == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(!inside.extrapolated);

  const auto decaying = Forcing::table({0.0, 1.0}, {1.0, 1.0});
  const auto never = first_zero(10.0, 1.0, decaying);
  CHECK(std::isinf(never.time));
  CHECK(!never.inconclusive);
  CHECK(never.extrapolated);
}

TEST_CASE("monotonicity condition") {
  const BarrierPair b{1.0, 1.0, 2, Forcing::constant(2.0)};
  const auto dec = monotonicity_condition(b, 0.0, Direction::nonincreasing);
  CHECK(dec.lhs == 1.0);
  CHECK(dec.rhs == 4.0);
  CHECK(dec.holds);
  CHECK(dec.sufficient);
  const auto inc = monotonicity_condition(b, 0.0, Direction::nondecreasing);
  CHECK(inc.lhs == doctest::Approx(2.0));
  CHECK(!inc.holds);
  CHECK(!inc.sufficient);

  const BarrierPair z{1.0, 1.0, 2, Forcing::zero()};
  const auto grow = monotonicity_condition(z, 0.1, Direction::nondecreasing);
  CHECK(grow.holds);
  CHECK(grow.sufficient);
  CHECK(!monotonicity_condition(z, 0.1, Direction::nonincreasing).holds);

  // past the scaled barrier's blow-up but before sigma_ode's
  const auto late = monotonicity_condition(z, 0.7, Direction::nondecreasing);
  CHECK(std::isnan(late.rho2));
  CHECK(std::isnan(late.sigma_scaled2));
  CHECK(!late.holds);
  CHECK(late.sufficient);
  CHECK_THROWS_AS(monotonicity_condition(z, 0.7, Direction::nonincreasing), DomainError);
  CHECK_THROWS_AS(monotonicity_condition(z, 1.5, Direction::nondecreasing), DomainError);
}
