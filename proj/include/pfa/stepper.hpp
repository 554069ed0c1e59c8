#pragma once

// Fully implicit Euler step for the coupled system, trajectory runner and the
// piecewise-constant / piecewise-linear interpolants of a discrete trajectory.

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pfa/model.hpp"

namespace pfa {

struct StepperConfig {
  double k = 1e-2;
  double fp_tol = 1e-11;
  int max_iter = 500;
  /// x <- x + relaxation (picard(x) - x); 1 means plain Picard.
  double relaxation = 1.0;
  /// When > 0, a step that fails with `relaxation` is retried once from the
  /// same warm start with this factor.
  double fallback_relaxation = 0.0;

  void validate() const;
};

struct StepReport {
  int iterations = 0;
  /// Final relative increment in the Y-norm.
  double residual = 0.0;
  /// Relaxation factor of the successful attempt.
  double relaxation = 1.0;
  /// Filled by a diagnostics hook; NaN when not computed.
  double energy_identity_residual = std::numeric_limits<double>::quiet_NaN();
  /// Converged chemical potential nu2 A_gamma phi + alpha f_gamma(phi).
  SpectralScalar mu;

  explicit StepReport(const GridSpec& g) : mu(g) {}
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double residual, double k);
  int iterations;
  double residual;
};

class Divergence : public std::runtime_error {
 public:
  explicit Divergence(int iteration);
  int iteration;
};

struct TrajectoryLog;

/// A step failure inside run(): the original message, the failing step index
/// and everything computed before it.
class StepError : public std::runtime_error {
 public:
  StepError(long step, bool diverged, const std::string& what, std::shared_ptr<TrajectoryLog> partial);
  long step;
  bool diverged;
  std::shared_ptr<TrajectoryLog> partial;
};

std::pair<State, StepReport> implicit_step(const State& prev, const ModelParams& params,
                                           const StepperConfig& cfg);

/// Y-norm residuals of the two scheme equations at (prev -> next), relative to
/// max(||next||_Y, ||prev||_Y, tiny). Evaluated with the model-level operators,
/// independently of the solver's fused kernel.
double scheme_residual(const State& prev, const State& next, const ModelParams& params, double k);

struct TrajectoryLog {
  std::vector<State> states;
  std::vector<StepReport> reports;
  ModelParams params;
  StepperConfig config;

  double k() const { return config.k; }
  long n_steps() const { return static_cast<long>(reports.size()); }
};

/// Called after each accepted step n (1-based) with the previous and new
/// state; may fill report fields.
using StepHook = std::function<void(long n, const State& prev, const State& next, StepReport& report)>;

TrajectoryLog run(const State& initial, long n_steps, const ModelParams& params, const StepperConfig& cfg,
                  const StepHook& hook = {});

/// Same iteration without storing the trajectory; returns the final state.
/// Step failures are rethrown as StepError with a null partial log.
State advance(const State& initial, long n_steps, const ModelParams& params, const StepperConfig& cfg,
              const StepHook& hook = {});

/// psi_k(t) = psi^n on [(n-1)k, nk).
State interp_pc(const TrajectoryLog& log, double t);
/// psi~_k(t) = psi^n + ((t - nk)/k)(psi^n - psi^{n-1}) on [(n-1)k, nk).
State interp_lin(const TrajectoryLog& log, double t);

struct ConsistencyInterval {
  long n;
  /// Values at the three Gauss nodes of [(n-1)k, nk).
  double g_dual[3];
  double h_dual[3];
};

struct ConsistencyResiduals {
  std::vector<ConsistencyInterval> intervals;
  double T_star;
  double int_g_sq;  ///< int_0^T* ||g_k||^2_{V'} dt
  double int_h_sq;  ///< int_0^T* ||h_k||^2_{D(A_gamma)'} dt
};

/// Residuals g_k, h_k obtained by inserting the interpolants into the
/// continuous equations. T_star defaults to the full log.
ConsistencyResiduals consistency_residuals(const TrajectoryLog& log, const ModelParams& params,
                                           std::optional<double> T_star = std::nullopt);

/// g_k and h_k at a single point of interval n with local coordinate
/// s = (t - nk)/k in [-1, 0).
std::pair<SolenoidalVector, SpectralScalar> consistency_terms(const State& prev, const State& next,
                                                              double s, const ModelParams& params);

}  // namespace pfa
