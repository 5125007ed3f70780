#pragma once

#include <string>
#include <vector>

#include "agetrack/grid_function.hpp"

namespace agetrack {

/// A function of age given either as a named closed form or as a sampled
/// table. Closed forms carry exact derivatives; tables are differentiated
/// with fourth-order differences on their own grid.
class Profile {
 public:
  enum class Kind { Constant, QuadraticMotherhood, LinearExp, Table };

  Profile() = default;

  /// f(a) = c
  static Profile constant(double c);
  /// f(a) = k0 * a * (A - a)
  static Profile quadratic_motherhood(double k0, double age_max);
  /// f(a) = slope * a + exp(-rate * a)
  static Profile linear_exp(double slope, double rate);
  static Profile table(GridFunction samples);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] bool analytic() const noexcept { return kind_ != Kind::Table; }
  [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  [[nodiscard]] double value(double a) const;
  [[nodiscard]] double derivative(double a) const;

  [[nodiscard]] GridFunction sample(double age_max, std::size_t nodes) const;
  [[nodiscard]] GridFunction sample_derivative(double age_max, std::size_t nodes) const;

  [[nodiscard]] Profile scaled(double c) const;

  [[nodiscard]] std::string describe() const;

 private:
  Kind kind_ = Kind::Constant;
  std::vector<double> coeffs_{0.0};
  GridFunction table_;
  GridFunction table_slope_;
  double scale_ = 1.0;
};

}  // namespace agetrack
