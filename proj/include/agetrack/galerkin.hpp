#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "agetrack/controller.hpp"
#include "agetrack/delay_oracle.hpp"
#include "agetrack/grid_function.hpp"
#include "agetrack/model.hpp"
#include "agetrack/profile.hpp"
#include "agetrack/trajectory.hpp"

namespace agetrack {

using Complex = std::complex<double>;

/// int_0^A k~(a) exp(-s a) da - 1. Roots s are the time exponents of the
/// linearised dynamics around x*: x(a, t) = exp(s (t - a)) x*(a).
Complex characteristic_residual(const Equilibrium& eq, Complex s);

/// The trivial root 0 followed by count/2 - 1 roots with positive imaginary
/// part (one per conjugate pair), ordered by decreasing real part. Found by
/// damped Newton from a grid of guesses; each satisfies |residual| < 1e-8.
/// Throws Error(RootSearchExhausted) if too few distinct roots turn up.
std::vector<Complex> characteristic_roots(const Equilibrium& eq, std::size_t count);

struct GalerkinBasis {
  std::vector<GridFunction> phi;
  std::vector<GridFunction> dphi;
  std::vector<Complex> roots;
  [[nodiscard]] std::size_t size() const noexcept { return phi.size(); }
};

/// phi_1 = x0, phi_2 = x*, then cos(w a) e^{-sigma a} x*(a) and
/// sin(w a) e^{-sigma a} x*(a) for each root sigma + j w. Derivatives are
/// analytic. Throws Error(DependentBasis) when the Gram matrix has condition
/// number above 1e12.
GalerkinBasis build_basis(const Profile& x0, const Equilibrium& eq, const ModelParams& params,
                          const std::vector<Complex>& roots, std::size_t n);

struct GalerkinSystem {
  Eigen::MatrixXd m;
  Eigen::MatrixXd n;
  /// M^{-1} N, factorised once.
  Eigen::MatrixXd k;
  Eigen::VectorXd p;
  Eigen::VectorXd lambda;
  double t = 0.0;
};

/// M = int phi phi^T, N = -int phi (phi' + mu phi)^T, p = int p phi, with
/// lambda(0) = e_1.
GalerkinSystem assemble(const GalerkinBasis& basis, const ModelParams& params);

/// Sampling matrices on the age grid used for profiles and residuals.
class GalerkinModel {
 public:
  GalerkinModel(GalerkinBasis basis, const ModelParams& params);

  [[nodiscard]] const GalerkinBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] const GalerkinSystem& system() const noexcept { return system_; }
  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }

  [[nodiscard]] double output(const Eigen::VectorXd& lambda) const { return system_.p.dot(lambda); }
  [[nodiscard]] GridFunction profile(const Eigen::VectorXd& lambda) const;
  [[nodiscard]] double min_profile(const Eigen::VectorXd& lambda) const;

  /// R(a) = phi'^T lambda + phi^T (M^{-1}N - D) lambda + (mu + D) phi^T lambda;
  /// D cancels. Returns the L2 norm of R and R itself.
  [[nodiscard]] std::pair<double, GridFunction> residual(const Eigen::VectorXd& lambda) const;

  /// lambda' = (M^{-1}N - D I) lambda
  [[nodiscard]] Eigen::VectorXd rhs(const Eigen::VectorXd& lambda, double d) const;

  /// RK4 step with a prescribed input.
  [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& lambda,
                                     const std::function<double(double)>& d, double t,
                                     double dt) const;

 private:
  GalerkinBasis basis_;
  ModelParams params_;
  GalerkinSystem system_;
  Eigen::MatrixXd phi_;
  Eigen::MatrixXd res_;
  Eigen::VectorXd weights_;
};

struct GalerkinRecord {
  double t;
  double y;
  double y_ref;
  double d;
  double z1;
  double z2;
  double r;
  double r_relative;
  double min_profile;
  bool saturated;
};

struct GalerkinTrace {
  std::vector<GalerkinRecord> records;
  std::vector<Snapshot> snapshots;
  /// Time average of r(t) / ||x(., t)||_L2 over the recorded samples.
  double mean_relative_residual = 0.0;
};

struct GalerkinOptions {
  double t_end = 20.0;
  double dt = 0.005;
  std::size_t record_every = 1;
  std::vector<double> snapshot_times;
};

/// Closed loop on the modal weights with the controller fed y = p^T lambda.
/// Throws Error(PositivityViolation) if the profile dips below zero on the
/// age grid after any step and Error(Instability) if lambda stops being
/// finite.
GalerkinTrace simulate_galerkin(const GalerkinModel& model, const Trajectory& traj,
                                const ControllerGains& gains, const InputBounds& bounds,
                                const GalerkinOptions& opts);

}  // namespace agetrack
