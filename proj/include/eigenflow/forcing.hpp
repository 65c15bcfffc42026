#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace eigenflow {

enum class ForcingKind { zero, constant, inv_linear, neg_inv_linear, table };

/// The forcing coefficient kappa(t) of dX/dt = -H nu + kappa X, together with
/// K(t) = int_0^t kappa and I(t) = int_0^t exp(-2 K). All are defined for t >= 0.
class Forcing {
public:
  Forcing() = default;

  static Forcing zero();
  static Forcing constant(double c);
  static Forcing inv_linear();      ///< kappa = 1 / (t + 1)
  static Forcing neg_inv_linear();  ///< kappa = -1 / (t + 1)
  /// Piecewise-linear kappa through (times, values); held at the end values
  /// outside the sampled range.
  static Forcing table(std::vector<double> times, std::vector<double> values);
  /// Two columns "t kappa" (comma or whitespace separated, '#' comments).
  static Forcing load_table(const std::filesystem::path& path);

  /// "zero", "constant:c", "inv_linear", "neg_inv_linear" or "table:path".
  static Forcing parse(const std::string& text);
  /// Inverse of parse. Tables loaded from a file print the file path,
  /// tables built in memory print "table:<inline>".
  std::string to_string() const;

  ForcingKind kind() const { return kind_; }
  double constant_value() const { return c_; }

  double kappa(double t) const;
  double K(double t) const;
  /// int_0^t exp(-2 K), closed form for the analytic kinds; tables integrate
  /// each linear piece with adaptive quadrature.
  double I(double t) const;
  /// int_0^t exp(-2 K) by adaptive quadrature regardless of kind.
  double I_quadrature(double t) const;
  /// lim_{t -> inf} I(t); +inf when the integral diverges.
  double I_limit() const;

  /// Last sampled time for tables, +inf otherwise.
  double table_end() const;

private:
  ForcingKind kind_ = ForcingKind::zero;
  double c_ = 0.0;
  std::vector<double> times_, values_;  // table knots, starting at t = 0
  std::vector<double> K_knots_, I_knots_;
  std::string source_;

  std::size_t segment(double t) const;
};

}  // namespace eigenflow
