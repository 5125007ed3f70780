#include "agetrack/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

GridFunction::GridFunction(double length, std::vector<double> values, bool continuous)
    : length_(length), values_(std::move(values)), continuous_(continuous) {
  if (values_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "grid function needs at least two nodes");
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw Error(ErrorCode::InvalidArgument, "grid length must be positive and finite");
  }
  spacing_ = length_ / static_cast<double>(values_.size() - 1);
}

double GridFunction::operator()(double a) const {
  if (a <= 0.0) return values_.front();
  if (a >= length_) return values_.back();
  const double pos = a / spacing_;
  auto i = static_cast<std::size_t>(pos);
  if (i >= values_.size() - 1) i = values_.size() - 2;
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::same_grid(const GridFunction& other) const noexcept {
  return values_.size() == other.values_.size() && length_ == other.length_;
}

GridFunction& GridFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

GridFunction operator*(const GridFunction& f, double c) {
  GridFunction out = f;
  out *= c;
  return out;
}

GridFunction operator*(const GridFunction& f, const GridFunction& g) {
  if (!f.same_grid(g)) {
    throw Error(ErrorCode::GridMismatch, "pointwise product of functions on different grids");
  }
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * g[i];
  return GridFunction(f.length(), std::move(v), f.continuous() && g.continuous());
}

double integrate(const GridFunction& f) { return numerics::simpson(f.values(), f.spacing()); }

double inner(const GridFunction& f, const GridFunction& g) { return integrate(f * g); }

double l2_norm(const GridFunction& f) { return std::sqrt(inner(f, f)); }

}  // namespace agetrack
