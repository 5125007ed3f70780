#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agetrack/controller.hpp"
#include "agetrack/delay_oracle.hpp"
#include "agetrack/grid_function.hpp"
#include "agetrack/model.hpp"
#include "agetrack/trajectory.hpp"

namespace agetrack {

/// int_0^A e^{sigma a} |k~(a) - lambda int_a^A k~ / int_0^A s k~(s) ds| da
double b3_integral(const Equilibrium& eq, double lambda, double sigma = 0.0);

struct B3Result {
  double lambda;
  double value;
};

/// Minimises b3_integral(., 0) over lambda > 0 with a log-grid scan followed
/// by golden-section refinement. Throws Error(B3Fail) if the minimum is not
/// below one.
B3Result b3_search(const Equilibrium& eq);

/// Largest sigma (bisection to 1e-6) with b3_integral(lambda, sigma) < 1.
double sigma_search(const Equilibrium& eq, double lambda);

struct ObserverQuadratic {
  double p1 = 0.0;
  double p2 = 0.0;
  /// Extreme eigenvalues of P = [[1, -p1/2], [-p1/2, p2]].
  double k1 = 0.0;
  double k2 = 0.0;
  /// Extreme eigenvalues of the dissipation matrix P~.
  double k1_tilde = 0.0;
  double k2_tilde = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

/// (2 + l1 p1 - 2 l2 p2)^2 < 8 l1 p1 - 4 l2 p1^2 and p1^2 < 4 p2, plus
/// positive definiteness of P and P~.
bool observer_pair_feasible(double l1, double l2, double p1, double p2);

/// Constants for a given pair; does not check feasibility.
ObserverQuadratic observer_constants(double l1, double l2, double p1, double p2);

/// Exhaustive search over a 200 x 200 log grid of (p1, p2) in [1e-3, 10]^2,
/// keeping the feasible pair with the largest beta1. Throws
/// Error(NoFeasiblePair).
ObserverQuadratic observer_quadratic(double l1, double l2);

struct Certificate {
  double sigma = 0.0;
  double lambda_b3 = 0.0;
  double b3_value = 0.0;
  ObserverQuadratic observer;
  double big_m = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 1.0;
  double beta = 0.0;
  double mu2 = 0.0;
  // Trajectory-dependent part, filled by rate_constants().
  double mu1 = 0.0;
  double l_rate = 0.0;
  double inf_rate = 0.0;
  double sup_rate = 0.0;
  bool has_rate = false;

  double gamma = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
  double d_star = 0.0;
  double age_max = 0.0;

  /// Names of violated invariants; empty when the certificate is consistent.
  [[nodiscard]] std::vector<std::string> check_invariants() const;
  /// Flat "key = value" block.
  [[nodiscard]] std::string dump() const;
  /// (8 (D_max - D_min)) (1 / (gamma sqrt K1) + sqrt(2) e^{sigma A} / sqrt M)
  [[nodiscard]] double gain_floor() const;
};

/// Trajectory-independent constants: B3 witness, sigma, (p1, p2), M, beta,
/// alpha1 (10% above its lower bound and with alpha1 min(sqrt K1,
/// sqrt(M/2)) >= 2), alpha2 = 1 and mu2.
Certificate build_certificate(const Equilibrium& eq, const ModelParams& params,
                              const ControllerGains& gains);

/// mu1 and L from the extrema of y_ref'/y_ref. Throws
/// Error(InvalidTrajectory) when mu1 <= 0.
void rate_constants(Certificate& cert, double inf_rate, double sup_rate);

/// rate_constants() with extrema probed on [t_from, t_from + horizon] plus
/// the t -> infinity limit.
void rate_constants(Certificate& cert, const Trajectory& traj, double t_from = 0.0,
                    double horizon = 50.0);

struct ClfValue {
  double v;
  double q;
};

/// V = eta^2 + alpha1 sqrt(Q) + alpha2 Q with
/// Q = e1^2 - p1 e1 e2 + p2 e2^2 + (M/2) (w / c)^2.
ClfValue clf_value(const Certificate& cert, double eta, const ObserverState& e, double w,
                   double c);

/// Delay-coordinate form: e = z - (eta, D*), w and c from the psi history.
ClfValue clf_value(const Certificate& cert, const DelayState& state);

/// Profile form on the age grid. Throws Error(LogDomain) on a non-positive
/// profile.
ClfValue clf_value(const Certificate& cert, const DelayModel& model, const GridFunction& x,
                   const ObserverState& z, const Trajectory& traj, double t);

/// V along an oracle trace recorded with OracleOptions::sigma = cert.sigma.
std::vector<double> clf_trace(const Certificate& cert, const OracleTrace& trace);

struct InequalityReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;
  double first_violation_t = 0.0;
};

/// Checks (x[i+1] - x[i]) / (t[i+1] - t[i]) <= bound[i] + slack[i] at every i.
InequalityReport check_forward_difference(const std::vector<double>& t,
                                          const std::vector<double>& x,
                                          const std::vector<double>& bound,
                                          const std::vector<double>& slack);

/// Per-interval slack c_i dt for forward-difference checks: twice the gap
/// between the difference quotient of a trace over [t_i, t_i + dt] and that
/// of the same run at half the step over [t_i, t_i + dt / 2]. The fine trace
/// must hold two samples per coarse interval.
std::vector<double> halving_slack(const std::vector<double>& t_coarse,
                                  const std::vector<double>& x_coarse,
                                  const std::vector<double>& t_fine,
                                  const std::vector<double>& x_fine);

/// Forward-difference noise of V from evaluating e = z - (eta, D*) and V in
/// double precision: 2 dV_i / dt with
/// dV_i = 4 eps (V_i + alpha1 sqrt(K2) (|eta| + |z1| + |z2| + D*)).
std::vector<double> rounding_slack(const Certificate& cert, const OracleTrace& trace,
                                   const std::vector<double>& v);

struct DecayReport {
  InequalityReport differential;
  /// Samples with V(t) > e^{-L t / 2} V0 e^{max(0, V0 - 1)}.
  std::size_t integrated_violations = 0;
  [[nodiscard]] bool passed() const {
    return differential.violations == 0 && integrated_violations == 0;
  }
};

/// dV/dt <= -L V / (1 + sqrt V) by forward differences, plus the integrated
/// bound, with l_rate in place of L.
DecayReport verify_decay(const std::vector<double>& t, const std::vector<double>& v,
                         double l_rate, const std::vector<double>& slack);

/// log of kappa(varsigma0 + |e0|) = kappa~(kappa_V(varsigma0 + |e0|)); -inf at zero.
double overshoot_log_bound(double varsigma0, double e0_norm, const Certificate& cert);
/// exp of the above; may be +inf.
double overshoot_bound(double varsigma0, double e0_norm, const Certificate& cert);

struct SaturationFactReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_margin = 0.0;
};

/// z sat_[-a, b](z) >= min(1, a, b) z^2 / (1 + |z|) on random (z, a, b).
SaturationFactReport saturation_fact_check(std::size_t samples = 1000000,
                                           std::uint64_t seed = 20240531);

}  // namespace agetrack
