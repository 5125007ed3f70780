#pragma once

#include <cstddef>

#include "agetrack/grid_function.hpp"
#include "agetrack/profile.hpp"

namespace agetrack {

/// Model data of the age-structured chemostat: mortality mu(a), birth
/// modulus k(a), output weight p(a) on [0, A], and the admissible dilution
/// interval [d_min, d_max]. Immutable once constructed.
class ModelParams {
 public:
  static constexpr std::size_t kDefaultNodes = 401;

  /// Validates: A > 0, mu >= 0 on the grid, <1,k> > 0 and <1,p> > 0 with
  /// k, p >= 0, 0 <= d_min < d_max. Throws Error(InvalidArgument) otherwise.
  ModelParams(double age_max, Profile mortality, Profile birth, Profile output_weight,
              double d_min, double d_max, std::size_t nodes = kDefaultNodes);

  [[nodiscard]] double age_max() const noexcept { return age_max_; }
  [[nodiscard]] std::size_t nodes() const noexcept { return nodes_; }
  [[nodiscard]] double spacing() const noexcept { return mu_.spacing(); }
  [[nodiscard]] double d_min() const noexcept { return d_min_; }
  [[nodiscard]] double d_max() const noexcept { return d_max_; }

  [[nodiscard]] const Profile& mortality_profile() const noexcept { return mortality_profile_; }
  [[nodiscard]] const Profile& birth_profile() const noexcept { return birth_profile_; }
  [[nodiscard]] const Profile& output_profile() const noexcept { return output_profile_; }

  [[nodiscard]] const GridFunction& mu() const noexcept { return mu_; }
  [[nodiscard]] const GridFunction& k() const noexcept { return k_; }
  [[nodiscard]] const GridFunction& p() const noexcept { return p_; }
  /// int_0^a mu, by the trapezoid rule on the age grid; shared by all modules.
  [[nodiscard]] const GridFunction& cumulative_mortality() const noexcept { return cum_mu_; }

  /// Samples a profile on this model's age grid.
  [[nodiscard]] GridFunction sample(const Profile& f) const { return f.sample(age_max_, nodes_); }

  /// Same model with a different birth modulus.
  [[nodiscard]] ModelParams with_birth(Profile birth) const;

 private:
  double age_max_;
  std::size_t nodes_;
  Profile mortality_profile_;
  Profile birth_profile_;
  Profile output_profile_;
  double d_min_;
  double d_max_;
  GridFunction mu_;
  GridFunction k_;
  GridFunction p_;
  GridFunction cum_mu_;
};

/// Steady-state data attached to the unique equilibrium dilution rate.
struct Equilibrium {
  double d_star = 0.0;
  /// <p, exp(-D* a - int_0^a mu)>, the normaliser of x*.
  double normalizer = 1.0;
  /// exp(-D* a - int_0^a mu)
  GridFunction survival;
  /// x*(a) = survival(a) / normalizer, so that <p, x*> = 1.
  GridFunction x_star;
  /// g(a) = x*(a) p(a)
  GridFunction g;
  /// k~(a) = k(a) survival(a); integrates to one.
  GridFunction k_tilde;
  GridFunction k_tilde_prime;
  GridFunction cumulative_mortality;

  [[nodiscard]] double survival_at(double a) const;
  [[nodiscard]] double x_star_at(double a) const { return survival_at(a) / normalizer; }
};

/// int_0^A k(a) exp(-d a - int_0^a mu) da - 1 (composite Simpson).
double lotka_sharpe_residual(double d, const ModelParams& params);

/// d/dd of the residual above.
double lotka_sharpe_slope(double d, const ModelParams& params);

/// Bracketed bisection to 1e-6 followed by a Newton polish. Throws
/// Error(NoRoot) when no sign change exists on [0, 1e4].
Equilibrium solve_equilibrium(const ModelParams& params);

/// Scale c such that c * shape satisfies the Lotka-Sharpe condition at
/// d_star_target. Throws Error(DegenerateShape) if the weighted integral is
/// not positive.
double calibrate_birth_modulus(const GridFunction& shape, double d_star_target,
                               const ModelParams& params);

/// x0(0) - <k, x0>
double compatibility_gap(const GridFunction& x0, const ModelParams& params);

/// True iff x0 > 0 at every node and |x0(0) - <k,x0>| <= 1e-6 max|x0|.
bool check_initial_condition(const GridFunction& x0, const ModelParams& params);

/// Slope s that makes x0(a) = s a + exp(-rate a) satisfy x0(0) = <k, x0>.
double compatible_linear_exp_slope(double rate, const ModelParams& params);

}  // namespace agetrack
