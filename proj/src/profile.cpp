#include "agetrack/profile.hpp"

#include <cmath>
#include <sstream>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

Profile Profile::constant(double c) {
  Profile p;
  p.kind_ = Kind::Constant;
  p.coeffs_ = {c};
  return p;
}

Profile Profile::quadratic_motherhood(double k0, double age_max) {
  if (!(age_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "quadratic-motherhood needs a positive age span");
  }
  Profile p;
  p.kind_ = Kind::QuadraticMotherhood;
  p.coeffs_ = {k0, age_max};
  return p;
}

Profile Profile::linear_exp(double slope, double rate) {
  Profile p;
  p.kind_ = Kind::LinearExp;
  p.coeffs_ = {slope, rate};
  return p;
}

Profile Profile::table(GridFunction samples) {
  Profile p;
  p.kind_ = Kind::Table;
  p.coeffs_.clear();
  auto slope = numerics::differentiate(samples.values(), samples.spacing());
  p.table_slope_ = GridFunction(samples.length(), std::move(slope));
  p.table_ = std::move(samples);
  return p;
}

double Profile::value(double a) const {
  switch (kind_) {
    case Kind::Constant:
      return scale_ * coeffs_[0];
    case Kind::QuadraticMotherhood:
      return scale_ * coeffs_[0] * a * (coeffs_[1] - a);
    case Kind::LinearExp:
      return scale_ * (coeffs_[0] * a + std::exp(-coeffs_[1] * a));
    case Kind::Table:
      return scale_ * table_(a);
  }
  return 0.0;
}

double Profile::derivative(double a) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::QuadraticMotherhood:
      return scale_ * coeffs_[0] * (coeffs_[1] - 2.0 * a);
    case Kind::LinearExp:
      return scale_ * (coeffs_[0] - coeffs_[1] * std::exp(-coeffs_[1] * a));
    case Kind::Table:
      return scale_ * table_slope_(a);
  }
  return 0.0;
}

GridFunction Profile::sample(double age_max, std::size_t nodes) const {
  return GridFunction::sample(age_max, nodes, [this](double a) { return value(a); });
}

GridFunction Profile::sample_derivative(double age_max, std::size_t nodes) const {
  return GridFunction::sample(age_max, nodes, [this](double a) { return derivative(a); });
}

Profile Profile::scaled(double c) const {
  Profile p = *this;
  p.scale_ *= c;
  return p;
}

std::string Profile::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case Kind::Constant:
      os << "constant " << scale_ * coeffs_[0];
      break;
    case Kind::QuadraticMotherhood:
      os << "quadratic-motherhood " << scale_ * coeffs_[0];
      break;
    case Kind::LinearExp:
      os << "linear-exp " << coeffs_[0] << " " << coeffs_[1];
      if (scale_ != 1.0) os << " x" << scale_;
      break;
    case Kind::Table:
      os << "table[" << table_.size() << "]";
      if (scale_ != 1.0) os << " x" << scale_;
      break;
  }
  return os.str();
}

}  // namespace agetrack
