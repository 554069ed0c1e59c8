#pragma once

// Workflows behind the command-line front end.

#include <string>
#include <vector>

#include "pfa/config.hpp"

namespace pfa {

class AuditMismatch : public std::runtime_error {
 public:
  AuditMismatch(long step, const std::string& what) : std::runtime_error(what), step(step) {}
  long step;
};

struct SimulateResult {
  long steps = 0;
  std::string csv_path;
};

/// Runs the configured trajectory, streaming the diagnostics CSV and
/// snapshots into out_dir together with config.json and forcing.pfa.
SimulateResult cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

struct AuditSummary {
  long rows = 0;
  long rows_with_identity = 0;
  std::string audit_csv;
};

/// Re-reads a simulated trajectory and recomputes every CSV row from the
/// snapshots; throws AuditMismatch on the first differing field.
AuditSummary cmd_audit(const std::string& trajectory_dir);

std::vector<ConvergenceRow> cmd_converge(const RunConfig& cfg, const std::vector<double>& k_list, double k_ref,
                                         double T_star, const std::string& out_csv);

struct AttractorOptions {
  std::vector<double> k_list;
  int ensemble = 8;
  long burn_in = 1000;
  long samples = 4;
  long stride = 100;
  std::string out_dir = "attractor_out";
};

/// Samples one cloud per k, writes each as a cloud directory, and emits
/// attractor.csv with columns k, n_states, cloud_radius_Y, dist_to_finest, partial.
void cmd_attractor(const RunConfig& cfg, const AttractorOptions& opt);

/// One-line machine-readable error record.
std::string error_line(const std::string& kind, long step, const std::string& message);

std::vector<double> parse_k_list(const std::string& s);

}  // namespace pfa
