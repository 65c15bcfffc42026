// Acceptance run: one line per criterion, exit status 1 if any fails.

#include "eigenflow/pipeline.hpp"
#include "eigenflow/sphere_exact.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace eigenflow;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

RunConfig sphere_config(double r0, const std::string& forcing, double t_end, std::vector<double> p_values = {2.0}) {
  RunConfig c;
  c.shape.kind = "icosphere";
  c.shape.radius = r0;
  c.shape.subdivisions = 3;
  c.forcing = forcing;
  c.flow.t_end = t_end;
  c.flow.snapshot_every = 4;
  c.spectrum.p_values = std::move(p_values);
  return c;
}

RunConfig ellipsoid_config(const std::string& forcing, double t_end) {
  RunConfig c = sphere_config(1.0, forcing, t_end);
  c.shape.kind = "ellipsoid";
  c.shape.axes = {1.0, 1.0, 1.05};
  return c;
}

// Runs are shared between criteria; each is computed once on first use.
struct Runs {
  std::map<std::string, RunResult> cache;
  std::map<std::string, double> seconds;

  const RunResult& get(const std::string& name, const RunConfig& config) {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    const auto start = Clock::now();
    RunResult r = compute_trace(config);
    seconds[name] = seconds_since(start);
    return cache.emplace(name, std::move(r)).first->second;
  }
};

Runs runs;

const RunResult& mcf() { return runs.get("sphere_zero", sphere_config(1.0, "zero", 0.15, {2.0, 3.0})); }
const RunResult& inv() { return runs.get("sphere_inv", sphere_config(1.0, "inv_linear", 0.25, {2.0, 3.0})); }
const RunResult& sphere_c() { return runs.get("sphere_const", sphere_config(1.0, "constant:0.25", 0.2)); }
const RunResult& ell_zero() { return runs.get("ellipsoid_zero", ellipsoid_config("zero", 0.15)); }
const RunResult& ell_inv() { return runs.get("ellipsoid_inv", ellipsoid_config("inv_linear", 0.25)); }
const RunResult& ell_c() { return runs.get("ellipsoid_const", ellipsoid_config("constant:0.25", 0.2)); }
const RunResult& grow_dec() { return runs.get("r2_const", sphere_config(2.0, "constant:0.25", 0.8, {3.0})); }
const RunResult& grow_inc() { return runs.get("r4_const", sphere_config(4.0, "constant:0.5", 0.8, {3.0})); }

std::vector<const RunResult*> convex_runs() {
  return {&mcf(), &inv(), &sphere_c(), &ell_zero(), &ell_inv(), &ell_c(), &grow_dec(), &grow_inc()};
}

Forcing forcing_of(const RunResult& r) { return Forcing::parse(r.trace.metadata.at("forcing")); }

Outcome criterion1() {
  const auto start = Clock::now();
  const EigenResult e = first_eigenpair(assemble(make_icosphere(1.0, 4)));
  const double s = seconds_since(start);
  return {e.lambda >= 1.96 && e.lambda <= 2.04 && s < 10.0,
          fmt("lambda1 = %.10f on 2562 vertices in %.2f s", e.lambda, s)};
}

Outcome criterion2() {
  const RunResult& r = mcf();
  const SphereModel model{2, 1.0, Forcing::zero()};
  double radius_err = 0.0, lambda_err = 0.0;
  for (const FlowState& s : r.flow.snapshots) {
    const double exact = std::sqrt(1.0 - 4.0 * s.t);
    radius_err = std::max(radius_err, std::abs(mean_radius(s.mesh) / exact - 1.0));
  }
  for (const auto& rec : r.trace.records) {
    const double exact = lambda1_exact(model, rec.t);
    lambda_err = std::max(lambda_err, std::abs(rec.lambda1 / exact - 1.0));
  }
  const double t_last = r.trace.records.back().t;
  return {radius_err <= 0.01 && lambda_err <= 0.03 && std::abs(t_last - 0.15) < 1e-12,
          fmt("max radius error %.2e, max lambda1 error %.2e, final t %.4f", radius_err, lambda_err, t_last)};
}

Outcome criterion3() {
  const auto timed = [](const SphereModel& m) {
    const auto start = Clock::now();
    const BlowUp b = t_max(m);
    return std::pair{b, seconds_since(start)};
  };
  const auto [a, ta] = timed({2, 1.0, Forcing::inv_linear()});
  const auto [b, tb] = timed({2, 2.0, Forcing::inv_linear()});
  const auto [c, tc] = timed({2, 2.0, Forcing::neg_inv_linear()});
  const double ea = std::abs(a.time - 1.0 / 3.0);
  const double ec = std::abs(c.time - (std::cbrt(4.0) - 1.0));
  const bool ok = ea <= 1e-9 && std::isinf(b.time) && !b.inconclusive && ec <= 1e-9 && std::max({ta, tb, tc}) < 1.0;
  return {ok, fmt("|T - 1/3| = %.1e, T(r0=2) = %s, |T - (4^(1/3) - 1)| = %.1e, slowest %.4f s", ea,
                  std::isinf(b.time) ? "inf" : "finite", ec, std::max({ta, tb, tc}))};
}

Outcome criterion4() {
  const CheckReport a = check_derivative(mcf().trace, 0.05);
  const CheckReport b = check_derivative(inv().trace, 0.05);
  return {a.pass && b.pass, fmt("median relative error: kappa=0 %.2e, kappa=1/(t+1) %.2e", a.statistic, b.statistic)};
}

Outcome criterion5() {
  double rhs_diff = 0.0, lambda_diff = 0.0;
  std::size_t records = 0;
  for (const RunResult* r : {&mcf(), &inv()}) {
    const std::size_t j = 0;  // p = 2 is the first requested exponent
    for (const auto& rec : r->trace.records) {
      rhs_diff = std::max(rhs_diff, std::abs(rec.eq13_rhs[j] - rec.eq12_rhs) / std::abs(rec.eq12_rhs));
      lambda_diff = std::max(lambda_diff, std::abs(rec.lambda1p[j] / rec.lambda1 - 1.0));
      ++records;
    }
  }
  return {rhs_diff <= 1e-10 && lambda_diff <= 1e-6,
          fmt("%zu records: max relative rhs gap %.1e, max lambda gap %.1e", records, rhs_diff, lambda_diff)};
}

Outcome criterion6() {
  double worst_ratio = 1e300, worst_step = -1e300;
  bool ok = true;
  for (const RunResult* r : {&mcf(), &inv(), &sphere_c(), &ell_zero(), &ell_inv(), &ell_c()}) {
    const double lambda0 = r->trace.records.front().lambda1;
    for (const auto& rec : r->trace.records)
      worst_ratio = std::min(worst_ratio, rec.lambda1 * std::exp(2.0 * rec.K_accum) / lambda0);
    const CheckReport m = check_envelope_monotone(r->trace, 1e-3);
    worst_step = std::max(worst_step, m.statistic);
    ok = ok && m.pass;
  }
  ok = ok && worst_ratio >= 0.98;
  return {ok, fmt("min lambda1 e^{2K} / lambda1(0) = %.6f, largest relative decrease per step %.2e", worst_ratio,
                  std::max(worst_step, 0.0))};
}

Outcome criterion7() {
  const RunResult& dec = grow_dec();
  const RunResult& inc = grow_inc();
  const BarrierPair b_dec{dec.trace.records.front().H_max, dec.trace.records.front().H_min, 2, forcing_of(dec)};
  const BarrierPair b_inc{inc.trace.records.front().H_max, inc.trace.records.front().H_min, 2, forcing_of(inc)};
  bool cond_dec = true, cond_inc = true;
  for (const auto& rec : dec.trace.records)
    cond_dec = cond_dec && monotonicity_condition(b_dec, rec.t, Direction::nondecreasing).sufficient;
  for (const auto& rec : inc.trace.records)
    cond_inc = cond_inc && monotonicity_condition(b_inc, rec.t, Direction::nonincreasing).sufficient;
  const CheckReport a = check_monotone(dec.trace, Direction::nondecreasing, 1e-3, "lambda1");
  const CheckReport b = check_monotone(dec.trace, Direction::nondecreasing, 1e-3, "lambda1p_3");
  const CheckReport c = check_monotone(inc.trace, Direction::nonincreasing, 1e-3, "lambda1");
  const CheckReport d = check_monotone(inc.trace, Direction::nonincreasing, 1e-3, "lambda1p_3");
  const double s_dec = runs.seconds["r2_const"], s_inc = runs.seconds["r4_const"];
  const bool ok = cond_dec && cond_inc && a.pass && b.pass && c.pass && d.pass && s_dec < 300 && s_inc < 300;
  return {ok, fmt("r0=2: condition %s, worst steps %.1e / %.1e (%.1f s); r0=4: condition %s, worst steps %.1e / %.1e "
                  "(%.1f s)",
                  cond_dec ? "holds" : "fails", a.statistic, b.statistic, s_dec, cond_inc ? "holds" : "fails",
                  c.statistic, d.statistic, s_inc)};
}

Outcome criterion8() {
  double worst_upper = 0.0, worst_lower = 1e300;
  int upper_samples = 0, lower_samples = 0, runs_used = 0;
  bool ok = true;
  for (const RunResult* r : convex_runs()) {
    if (r->flow.convexity_lost) continue;
    ++runs_used;
    const auto& first = r->trace.records.front();
    const BarrierPair b{first.H_max, first.H_min, 2, forcing_of(*r)};
    const double rho_end = rho_blowup(b).time, sigma_end = sigma_ode_blowup(b).time;
    for (const auto& rec : r->trace.records) {
      // past its blow-up a barrier is infinite and bounds nothing
      if (rec.t < rho_end) {
        worst_upper = std::max(worst_upper, rec.H_max / rho(b, rec.t));
        ++upper_samples;
      }
      if (rec.t < sigma_end) {
        worst_lower = std::min(worst_lower, rec.H_min / sigma_ode(b, rec.t));
        ++lower_samples;
      }
    }
  }
  ok = worst_upper <= 1.05 && worst_lower >= 0.95;

  // exact spheres: H(t) = n / r(t) is the lower barrier itself
  double exact_gap = 0.0;
  for (const char* f : {"zero", "inv_linear", "neg_inv_linear", "constant:0.25", "constant:-0.5"}) {
    for (double r0 : {0.5, 1.0, 2.0, 4.0}) {
      for (int n : {2, 3}) {
        const SphereModel m{n, r0, Forcing::parse(f)};
        const BarrierPair b{n / r0, n / r0, n, m.forcing};
        const double horizon = std::min(std::isfinite(t_max(m).time) ? 0.95 * t_max(m).time : 2.0, 2.0);
        for (int k = 0; k <= 50; ++k) {
          const double t = horizon * k / 50.0;
          exact_gap = std::max(exact_gap, std::abs(sigma_ode(b, t) / H_exact(m, t) - 1.0));
        }
      }
    }
  }
  ok = ok && exact_gap <= 1e-8;
  ok = ok && runs_used > 0;
  return {ok, fmt("%d runs: max H_max / rho = %.4f (%d records), min H_min / sigma_ode = %.4f (%d records), "
                  "exact-sphere gap %.1e",
                  runs_used, worst_upper, upper_samples, worst_lower, lower_samples, exact_gap)};
}

Outcome criterion9() {
  double area_err = 0.0, median = 0.0;
  bool ok = true;
  for (const RunResult* r : {&mcf(), &inv(), &sphere_c(), &ell_zero()}) {
    const auto& snaps = r->flow.snapshots;
    const double area0 = snaps.front().diag.area;
    for (const FlowState& s : snaps) area_err = std::max(area_err, std::abs(total_area(normalized_mesh(s)) / area0 - 1.0));
    const Forcing f = forcing_of(*r);
    std::vector<double> errors;
    for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
      const double fd = central_difference(snaps[k - 1].t, std::log(snaps[k - 1].phi), snaps[k].t,
                                           std::log(snaps[k].phi), snaps[k + 1].t, std::log(snaps[k + 1].phi));
      const double predicted = snaps[k].diag.avg_H2 / 2.0 - f.kappa(snaps[k].t);
      errors.push_back(std::abs(fd - predicted) / std::abs(predicted));
    }
    std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
    const double m = errors[errors.size() / 2];
    median = std::max(median, m);
    ok = ok && m <= 0.02;
  }
  ok = ok && area_err <= 1e-10;
  return {ok, fmt("max normalized-area error %.1e, worst median log-phi rate error %.2e", area_err, median)};
}

Outcome criterion10() {
  double worst_ratio = 0.0, worst_abs = 0.0, initial = 0.0;
  for (const RunResult* r : {&mcf(), &inv(), &sphere_c(), &grow_dec(), &grow_inc()}) {
    const double p0 = r->flow.snapshots.front().diag.pinch_dev;
    for (const FlowState& s : r->flow.snapshots) {
      if (s.diag.pinch_dev / p0 > worst_ratio) {
        worst_ratio = s.diag.pinch_dev / p0;
        worst_abs = s.diag.pinch_dev;
        initial = p0;
      }
    }
  }
  return {worst_ratio <= 2.0, fmt("max pinch_dev / initial = %.3g (%.2e against initial %.2e)", worst_ratio, worst_abs,
                                  initial)};
}

Outcome criterion11() {
  RunConfig c = sphere_config(1.0, "inv_linear", 0.1, {2.0, 3.0});
  const std::string a = trace_to_csv(compute_trace(c).trace);
  const std::string b = trace_to_csv(compute_trace(c).trace);
  return {a == b && !a.empty(), fmt("%zu-byte traces %s", a.size(), a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sphere spectrum", criterion1},          {"MCF reduction", criterion2},
      {"extinction times", criterion3},         {"eigenvalue evolution", criterion4},
      {"p = 2 collapse", criterion5},           {"exponential lower bound", criterion6},
      {"monotone regimes", criterion7},         {"curvature barriers", criterion8},
      {"normalization", criterion9},            {"pinching preservation", criterion10},
      {"determinism", criterion11},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %-24s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
