// pfa: simulate / audit / converge / attractor front end.

#include <iostream>

#include "CLI11.hpp"
#include "pfa/commands.hpp"
#include "pfa/snapshot.hpp"

namespace {

int fail(const std::string& kind, long step, const std::string& msg, int code) {
  std::cerr << pfa::error_line(kind, step, msg) << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit Euler solver for the coupled Navier-Stokes / Allen-Cahn system"};
  app.require_subcommand(1);

  std::string config, out, trajectory, k_list;
  double k_ref = 0.0, t_star = 0.0;
  pfa::AttractorOptions aopt;

  auto* sim = app.add_subcommand("simulate", "Run one trajectory, write diagnostics CSV and snapshots");
  sim->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Output directory")->default_val("run_out");

  auto* aud = app.add_subcommand("audit", "Recompute every diagnostics row from the stored snapshots");
  aud->add_option("--trajectory", trajectory, "Directory written by simulate")->required()->check(CLI::ExistingDirectory);

  auto* conv = app.add_subcommand("converge", "Convergence of sampled attractors and finite-time error as k -> 0");
  conv->add_option("--config", config)->required()->check(CLI::ExistingFile);
  conv->add_option("--k-list", k_list, "Comma-separated time steps")->required();
  conv->add_option("--k-ref", k_ref, "Reference time step")->required();
  conv->add_option("--t-star", t_star, "Finite-time horizon")->required();
  conv->add_option("--out", out, "Output CSV")->default_val("converge.csv");

  auto* att = app.add_subcommand("attractor", "Sample attractor clouds for several time steps");
  att->add_option("--config", config)->required()->check(CLI::ExistingFile);
  att->add_option("--k-list", k_list)->required();
  att->add_option("--ensemble", aopt.ensemble)->default_val(8);
  att->add_option("--burn-in", aopt.burn_in, "Burn-in steps")->default_val(1000);
  att->add_option("--samples", aopt.samples)->default_val(4);
  att->add_option("--stride", aopt.stride, "Steps between samples")->default_val(100);
  att->add_option("--out", aopt.out_dir, "Output directory")->default_val("attractor_out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", -1, e.what(), 64);
  }

  try {
    if (*sim) {
      const auto r = pfa::cmd_simulate(pfa::load_config(config), out);
      std::cout << "simulate: " << r.steps << " steps, diagnostics in " << r.csv_path << "\n";
    } else if (*aud) {
      const auto r = pfa::cmd_audit(trajectory);
      std::cout << "audit: " << r.rows << " rows match (" << r.rows_with_identity << " with identity), wrote "
                << r.audit_csv << "\n";
    } else if (*conv) {
      const auto rows = pfa::cmd_converge(pfa::load_config(config), pfa::parse_k_list(k_list), k_ref, t_star, out);
      std::cout << "converge: " << rows.size() << " rows in " << out << "\n";
    } else if (*att) {
      aopt.k_list = pfa::parse_k_list(k_list);
      pfa::cmd_attractor(pfa::load_config(config), aopt);
      std::cout << "attractor: clouds in " << aopt.out_dir << "\n";
    }
  } catch (const pfa::ConfigError& e) {
    return fail("config", -1, e.what(), 2);
  } catch (const pfa::ValidationError& e) {
    return fail("validation", -1, e.what(), 2);
  } catch (const pfa::StepError& e) {
    return fail(e.diverged ? "divergence" : "nonconvergence", e.step, e.what(), 3);
  } catch (const pfa::AuditMismatch& e) {
    return fail("audit_mismatch", e.step, e.what(), 4);
  } catch (const pfa::FormatError& e) {
    return fail("io", -1, e.what(), 5);
  } catch (const std::exception& e) {
    return fail("error", -1, e.what(), 1);
  }
  return 0;
}
