#pragma once

// Sampled attractors: ensemble burn-in, cloud sampling, Hausdorff
// semidistance in the Y-norm, absorbing-time estimation and the k -> 0
// convergence study against a fine-step reference.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfa/stepper.hpp"

namespace pfa {

struct CloudMeta {
  double k = 0.0;
  long burn_in_steps = 0;
  long sample_stride = 1;
  long n_samples = 0;
  std::vector<std::uint64_t> seeds;
};

struct StateCloud {
  std::vector<State> states;
  CloudMeta meta;
  /// Set when some ensemble members failed; failures holds their messages.
  bool partial = false;
  std::vector<std::string> failures;
};

/// sup_{a in A} inf_{b in B} ||a - b||_Y.
double hausdorff_semidistance(const std::vector<State>& A, const std::vector<State>& B, const ModelParams& p);
double hausdorff_semidistance(const StateCloud& A, const StateCloud& B, const ModelParams& p);

/// max ||x||_Y over the cloud.
double cloud_radius(const std::vector<State>& cloud, const ModelParams& p);

/// Smallest n with y[j] <= radius for all j >= n.
std::optional<long> absorbing_entry_time(const std::vector<double>& y_norms, double radius);
std::optional<long> absorbing_entry_time(const TrajectoryLog& log, const ModelParams& p, double radius);

struct EnsembleSpec {
  int n_init = 8;
  std::uint64_t seed = 1;
  /// Y-norm of each initial state.
  double level = 1.0;
  /// Initial states use modes with |k| <= kmax.
  double kmax = 4.0;

  std::vector<std::uint64_t> seeds() const;
};

std::vector<State> initial_ensemble(const ModelParams& p, const EnsembleSpec& e);

StateCloud sample_attractor(const ModelParams& p, const StepperConfig& cfg, const EnsembleSpec& e,
                            long burn_in_steps, long n_samples, long sample_stride);

/// max over starts x and n with nk <= T* of ||S_k^n x - S_ref(nk) x||_Y,
/// where k / k_ref is an integer.
double finite_time_error(const ModelParams& p, const std::vector<State>& starts, double k, double k_ref,
                         double T_star, const StepperConfig& base);

struct ConvergenceRow {
  double k;
  double dist_to_ref;
  double finite_time_err;
  double cloud_radius_Y;
};

struct StudyConfig {
  StepperConfig base;  ///< k is overridden per row
  EnsembleSpec ensemble;
  double burn_in_time = 10.0;
  long n_samples = 4;
  double stride_time = 1.0;
  /// Number of cloud points used as starts for the finite-time error (0 = all).
  int finite_time_starts = 0;
};

/// Requires k_ref < min(k_list) unless k_list == {k_ref}, and each k an integer
/// multiple of k_ref.
std::vector<ConvergenceRow> convergence_study(const ModelParams& p, const std::vector<double>& k_list,
                                              double k_ref, double T_star, const StudyConfig& cfg);

/// Integer ratio a / b, or throws if a is not a multiple of b.
long nested_ratio(double a, double b);

/// Cloud directory: cloud_NNNNNN.pfa snapshots plus manifest.json.
void write_cloud(const std::string& dir, const StateCloud& cloud, const ModelParams& p);

}  // namespace pfa
