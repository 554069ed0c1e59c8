#include "pfa/attractor.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "pfa/parallel.hpp"
#include "pfa/random_fields.hpp"
#include "pfa/snapshot.hpp"

namespace pfa {

double hausdorff_semidistance(const std::vector<State>& A, const std::vector<State>& B, const ModelParams& p) {
  if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff_semidistance: empty cloud");
  for (const auto& s : A) require_same_grid(p.grid(), s.grid(), "hausdorff_semidistance");
  for (const auto& s : B) require_same_grid(p.grid(), s.grid(), "hausdorff_semidistance");
  const auto w = p.weights();
  std::vector<double> row_min(A.size(), std::numeric_limits<double>::infinity());
  parallel_for(A.size(), [&](std::size_t i) {
    for (const auto& b : B) row_min[i] = std::min(row_min[i], norm_Y(A[i] - b, w));
  });
  double d = 0.0;
  for (double v : row_min) d = std::max(d, v);
  return d;
}

double hausdorff_semidistance(const StateCloud& A, const StateCloud& B, const ModelParams& p) {
  return hausdorff_semidistance(A.states, B.states, p);
}

double cloud_radius(const std::vector<State>& cloud, const ModelParams& p) {
  double r = 0.0;
  for (const auto& s : cloud) r = std::max(r, norm_Y(s, p));
  return r;
}

std::optional<long> absorbing_entry_time(const std::vector<double>& y, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("absorbing_entry_time: radius must be nonnegative");
  long n = static_cast<long>(y.size());
  while (n > 0 && y[n - 1] <= radius) --n;
  if (n == static_cast<long>(y.size())) return std::nullopt;
  return n;
}

std::optional<long> absorbing_entry_time(const TrajectoryLog& log, const ModelParams& p, double radius) {
  std::vector<double> y;
  y.reserve(log.states.size());
  for (const auto& s : log.states) y.push_back(norm_Y(s, p));
  return absorbing_entry_time(y, radius);
}

std::vector<std::uint64_t> EnsembleSpec::seeds() const {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < n_init; ++i) s.push_back(seed + static_cast<std::uint64_t>(i));
  return s;
}

std::vector<State> initial_ensemble(const ModelParams& p, const EnsembleSpec& e) {
  std::vector<State> out;
  for (auto s : e.seeds()) out.push_back(random_state(p.grid(), s, e.kmax, e.level, p.weights()));
  return out;
}

StateCloud sample_attractor(const ModelParams& p, const StepperConfig& cfg, const EnsembleSpec& e,
                            long burn_in_steps, long n_samples, long sample_stride) {
  if (burn_in_steps < 1) throw std::invalid_argument("sample_attractor: burn_in_steps must be >= 1");
  if (n_samples < 1 || sample_stride < 1) throw std::invalid_argument("sample_attractor: bad sampling schedule");
  if (e.n_init < 1) throw std::invalid_argument("sample_attractor: empty ensemble");
  const auto starts = initial_ensemble(p, e);
  std::vector<std::vector<State>> per(starts.size());
  std::vector<std::string> errors(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    try {
      State x = advance(starts[i], burn_in_steps, p, cfg);
      per[i].push_back(x);
      for (long s = 1; s < n_samples; ++s) {
        x = advance(x, sample_stride, p, cfg);
        per[i].push_back(x);
      }
    } catch (const StepError& err) {
      per[i].clear();
      errors[i] = "seed " + std::to_string(e.seeds()[i]) + ": " + err.what();
    }
  });
  StateCloud cloud;
  cloud.meta = {cfg.k, burn_in_steps, sample_stride, n_samples, e.seeds()};
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (!errors[i].empty()) {
      cloud.partial = true;
      cloud.failures.push_back(errors[i]);
    }
    for (auto& s : per[i]) cloud.states.push_back(std::move(s));
  }
  if (cloud.states.empty()) {
    throw std::runtime_error("sample_attractor: every ensemble trajectory failed; first: " + cloud.failures.front());
  }
  return cloud;
}

long nested_ratio(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("time steps must be positive");
  const double q = a / b;
  const long r = std::lround(q);
  if (r < 1 || std::abs(q - double(r)) > 1e-9 * q) {
    throw std::invalid_argument("time grids do not nest: " + std::to_string(a) + " is not an integer multiple of " +
                                std::to_string(b));
  }
  return r;
}

double finite_time_error(const ModelParams& p, const std::vector<State>& starts, double k, double k_ref,
                         double T_star, const StepperConfig& base) {
  const long r = nested_ratio(k, k_ref);
  if (!(T_star > 0.0)) throw std::invalid_argument("finite_time_error: T* must be positive");
  const long N = static_cast<long>(std::floor(T_star / k + 1e-9));
  StepperConfig ck = base, cr = base;
  ck.k = k;
  cr.k = k_ref;
  const auto w = p.weights();
  std::vector<double> worst(starts.size(), 0.0);
  parallel_for(starts.size(), [&](std::size_t i) {
    State xk = starts[i], xr = starts[i];
    for (long n = 1; n <= N; ++n) {
      xk = advance(xk, 1, p, ck);
      xr = advance(xr, r, p, cr);
      worst[i] = std::max(worst[i], norm_Y(xk - xr, w));
    }
  });
  double e = 0.0;
  for (double v : worst) e = std::max(e, v);
  return e;
}

std::vector<ConvergenceRow> convergence_study(const ModelParams& p, const std::vector<double>& k_list,
                                              double k_ref, double T_star, const StudyConfig& cfg) {
  if (k_list.empty()) throw std::invalid_argument("convergence_study: empty k list");
  for (double k : k_list) {
    nested_ratio(k, k_ref);
    if (k < k_ref) throw std::invalid_argument("convergence_study: k_ref must not exceed any k");
  }
  auto sample = [&](double k) {
    StepperConfig c = cfg.base;
    c.k = k;
    const long burn = std::max(1L, std::lround(cfg.burn_in_time / k));
    const long stride = std::max(1L, std::lround(cfg.stride_time / k));
    return sample_attractor(p, c, cfg.ensemble, burn, cfg.n_samples, stride);
  };
  const StateCloud ref = sample(k_ref);
  std::vector<ConvergenceRow> rows;
  for (double k : k_list) {
    const StateCloud A = sample(k);
    std::vector<State> starts = A.states;
    if (cfg.finite_time_starts > 0 && starts.size() > static_cast<std::size_t>(cfg.finite_time_starts)) {
      starts.erase(starts.begin() + cfg.finite_time_starts, starts.end());
    }
    rows.push_back({k, hausdorff_semidistance(A, ref, p), finite_time_error(p, starts, k, k_ref, T_star, cfg.base),
                    cloud_radius(A.states, p)});
  }
  return rows;
}

void write_cloud(const std::string& dir, const StateCloud& cloud, const ModelParams& p) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < cloud.states.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "cloud_%06zu.pfa", i);
    write_snapshot((fs::path(dir) / name).string(), cloud.states[i], SnapshotHeader::from(p, 0, 0.0, cloud.meta.k));
    files.emplace_back(name);
  }
  nlohmann::ordered_json m;
  m["k"] = cloud.meta.k;
  m["burn_in_steps"] = cloud.meta.burn_in_steps;
  m["sample_stride"] = cloud.meta.sample_stride;
  m["n_samples"] = cloud.meta.n_samples;
  m["seeds"] = cloud.meta.seeds;
  m["n_states"] = cloud.states.size();
  m["partial"] = cloud.partial;
  m["failures"] = cloud.failures;
  m["files"] = files;
  std::ofstream os(fs::path(dir) / "manifest.json");
  os << m.dump(2) << "\n";
  if (!os) throw std::runtime_error("write_cloud: cannot write manifest in " + dir);
}

}  // namespace pfa
