#include "eigenflow/forcing.hpp"

#include "eigenflow/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace eigenflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-12;

double integrate(const auto& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, kQuadTol);
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("forcing evaluated at invalid time " + std::to_string(t));
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw InvalidInput("not a finite number: '" + s + "'");
  return v;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Forcing Forcing::zero() { return {}; }

Forcing Forcing::constant(double c) {
  if (!std::isfinite(c)) throw InvalidInput("constant forcing must be finite");
  Forcing f;
  f.kind_ = ForcingKind::constant;
  f.c_ = c;
  return f;
}

Forcing Forcing::inv_linear() {
  Forcing f;
  f.kind_ = ForcingKind::inv_linear;
  return f;
}

Forcing Forcing::neg_inv_linear() {
  Forcing f;
  f.kind_ = ForcingKind::neg_inv_linear;
  return f;
}

Forcing Forcing::table(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size())
    throw InvalidInput("forcing table needs matching, non-empty time and value columns");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) throw InvalidInput("forcing table has non-finite entries");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidInput("forcing table times must increase strictly");
  }

  // re-anchor the knots at t = 0
  if (times.front() < 0.0) {
    auto first_pos = std::upper_bound(times.begin(), times.end(), 0.0);
    double v0 = values.back();
    if (first_pos != times.end()) {
      const std::size_t j = first_pos - times.begin();
      const double w = (0.0 - times[j - 1]) / (times[j] - times[j - 1]);
      v0 = (1.0 - w) * values[j - 1] + w * values[j];
    }
    const std::size_t drop = first_pos - times.begin();
    times.erase(times.begin(), times.begin() + drop);
    values.erase(values.begin(), values.begin() + drop);
    times.insert(times.begin(), 0.0);
    values.insert(values.begin(), v0);
  } else if (times.front() > 0.0) {
    times.insert(times.begin(), 0.0);
    values.insert(values.begin(), values.front());
  }

  Forcing f;
  f.kind_ = ForcingKind::table;
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  f.source_ = "<inline>";
  const std::size_t n = f.times_.size();
  f.K_knots_.assign(n, 0.0);
  f.I_knots_.assign(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const double h = f.times_[j] - f.times_[j - 1];
    f.K_knots_[j] = f.K_knots_[j - 1] + 0.5 * h * (f.values_[j - 1] + f.values_[j]);
    f.I_knots_[j] = f.I_knots_[j - 1] +
                    integrate([&](double t) { return std::exp(-2.0 * f.K(t)); }, f.times_[j - 1], f.times_[j]);
  }
  return f;
}

Forcing Forcing::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open forcing table " + path.string());
  std::vector<double> times, values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra))
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    times.push_back(parse_number(a));
    values.push_back(parse_number(b));
  }
  Forcing f = table(std::move(times), std::move(values));
  f.source_ = path.string();
  return f;
}

Forcing Forcing::parse(const std::string& text) {
  if (text == "zero") return zero();
  if (text == "inv_linear") return inv_linear();
  if (text == "neg_inv_linear") return neg_inv_linear();
  if (text.starts_with("constant:")) return constant(parse_number(text.substr(9)));
  if (text.starts_with("table:")) return load_table(text.substr(6));
  throw InvalidInput("unknown forcing '" + text +
                     "' (expected zero, constant:c, inv_linear, neg_inv_linear or table:path)");
}

std::string Forcing::to_string() const {
  switch (kind_) {
    case ForcingKind::zero: return "zero";
    case ForcingKind::constant: return "constant:" + format_number(c_);
    case ForcingKind::inv_linear: return "inv_linear";
    case ForcingKind::neg_inv_linear: return "neg_inv_linear";
    case ForcingKind::table: return "table:" + source_;
  }
  return {};
}

std::size_t Forcing::segment(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double Forcing::kappa(double t) const {
  require_time(t);
  switch (kind_) {
    case ForcingKind::zero: return 0.0;
    case ForcingKind::constant: return c_;
    case ForcingKind::inv_linear: return 1.0 / (t + 1.0);
    case ForcingKind::neg_inv_linear: return -1.0 / (t + 1.0);
    case ForcingKind::table: {
      const std::size_t j = segment(t);
      if (j + 1 >= times_.size()) return values_.back();
      const double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
      return (1.0 - w) * values_[j] + w * values_[j + 1];
    }
  }
  return 0.0;
}

double Forcing::K(double t) const {
  require_time(t);
  switch (kind_) {
    case ForcingKind::zero: return 0.0;
    case ForcingKind::constant: return c_ * t + 0.0;  // no -0 at t = 0
    case ForcingKind::inv_linear: return std::log1p(t);
    case ForcingKind::neg_inv_linear: return 0.0 - std::log1p(t);
    case ForcingKind::table: {
      const std::size_t j = segment(t);
      return K_knots_[j] + 0.5 * (t - times_[j]) * (values_[j] + kappa(t));
    }
  }
  return 0.0;
}

double Forcing::I(double t) const {
  require_time(t);
  switch (kind_) {
    case ForcingKind::zero: return t;
    case ForcingKind::constant: return c_ == 0.0 ? t : -std::expm1(-2.0 * c_ * t) / (2.0 * c_);
    case ForcingKind::inv_linear: return t / (t + 1.0);
    case ForcingKind::neg_inv_linear: return ((t + 1.0) * (t + 1.0) * (t + 1.0) - 1.0) / 3.0;
    case ForcingKind::table: {
      const std::size_t j = segment(t);
      if (j + 1 < times_.size())
        return I_knots_[j] + integrate([&](double s) { return std::exp(-2.0 * K(s)); }, times_[j], t);
      const double c = values_.back(), s = t - times_.back();
      const double tail = c == 0.0 ? s : -std::expm1(-2.0 * c * s) / (2.0 * c);
      return I_knots_.back() + std::exp(-2.0 * K_knots_.back()) * tail;
    }
  }
  return 0.0;
}

double Forcing::I_quadrature(double t) const {
  require_time(t);
  if (kind_ != ForcingKind::table) return integrate([&](double s) { return std::exp(-2.0 * K(s)); }, 0.0, t);
  // integrate piece by piece so every integrand is smooth
  double sum = 0.0, a = 0.0;
  for (std::size_t j = 1; j < times_.size() && times_[j] < t; ++j) {
    sum += integrate([&](double s) { return std::exp(-2.0 * K(s)); }, a, times_[j]);
    a = times_[j];
  }
  return sum + integrate([&](double s) { return std::exp(-2.0 * K(s)); }, a, t);
}

double Forcing::I_limit() const {
  switch (kind_) {
    case ForcingKind::zero: return kInf;
    case ForcingKind::constant: return c_ > 0.0 ? 1.0 / (2.0 * c_) : kInf;
    case ForcingKind::inv_linear: return 1.0;
    case ForcingKind::neg_inv_linear: return kInf;
    case ForcingKind::table: {
      const double c = values_.back();
      return c > 0.0 ? I_knots_.back() + std::exp(-2.0 * K_knots_.back()) / (2.0 * c) : kInf;
    }
  }
  return kInf;
}

double Forcing::table_end() const { return kind_ == ForcingKind::table ? times_.back() : kInf; }

}  // namespace eigenflow
