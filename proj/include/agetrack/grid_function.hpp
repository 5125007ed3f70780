#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agetrack {

/// A real function on [0, A] sampled on a uniform grid. Evaluation between
/// nodes is piecewise-linear and exact at the nodes.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(double length, std::vector<double> values, bool continuous = true);

  template <class F>
  static GridFunction sample(double length, std::size_t nodes, F&& f) {
    std::vector<double> v(nodes);
    const double h = length / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
      v[i] = f(h * static_cast<double>(i));
    }
    return GridFunction(length, std::move(v));
  }

  [[nodiscard]] double length() const noexcept { return length_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double spacing() const noexcept { return spacing_; }
  [[nodiscard]] double node(std::size_t i) const noexcept {
    return spacing_ * static_cast<double>(i);
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
  [[nodiscard]] bool continuous() const noexcept { return continuous_; }

  /// Linear interpolation; arguments are clamped to [0, A].
  [[nodiscard]] double operator()(double a) const;

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool is_positive() const { return min() > 0.0; }
  [[nodiscard]] bool is_nonnegative() const { return min() >= 0.0; }

  [[nodiscard]] bool same_grid(const GridFunction& other) const noexcept;

  GridFunction& operator*=(double c);
  friend GridFunction operator*(const GridFunction& f, double c);
  friend GridFunction operator*(double c, const GridFunction& f) { return f * c; }
  /// Pointwise product; both operands must share a grid.
  friend GridFunction operator*(const GridFunction& f, const GridFunction& g);

 private:
  double length_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> values_;
  bool continuous_ = true;
};

/// Integral over [0, A] by the composite Simpson rule.
double integrate(const GridFunction& f);

/// L2 inner product <f, g> by the composite Simpson rule.
double inner(const GridFunction& f, const GridFunction& g);

/// L2 norm.
double l2_norm(const GridFunction& f);

}  // namespace agetrack
