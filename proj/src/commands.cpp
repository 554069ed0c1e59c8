#include "pfa/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "pfa/diagnostics.hpp"
#include "pfa/snapshot.hpp"

namespace pfa {

namespace fs = std::filesystem;

namespace {

std::string step_file(long n) {
  char name[32];
  std::snprintf(name, sizeof name, "step_%06ld.pfa", n);
  return name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + p.string() + " for writing");
  return os;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

std::string error_line(const std::string& kind, long step, const std::string& message) {
  std::string s = "pfa-error kind=" + kind + " step=" + (step >= 0 ? std::to_string(step) : "-");
  return s + " message=" + nlohmann::json(message).dump();
}

std::vector<double> parse_k_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size() || !(v > 0.0)) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("k-list: cannot parse '" + part + "' as a positive number");
    }
  }
  if (out.empty()) throw ConfigError("k-list: empty");
  return out;
}

SimulateResult cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const ModelParams p = make_params(cfg);
  const State x0 = make_initial(cfg, p);
  const fs::path out(out_dir);
  const fs::path snap_dir = out / cfg.snapshot_dir;
  fs::create_directories(out);
  if (cfg.snapshot_stride > 0) fs::create_directories(snap_dir);
  {
    auto os = open_out(out / "config.json");
    os << to_json(cfg);
  }
  write_snapshot((out / "forcing.pfa").string(), State(p.forcing(), SpectralScalar(p.grid())),
                 SnapshotHeader::from(p, 0, 0.0, cfg.stepper.k));

  const double k = cfg.stepper.k;
  auto snap = [&](long n, const State& s) {
    if (cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0) {
      write_snapshot((snap_dir / step_file(n)).string(), s, SnapshotHeader::from(p, n, double(n) * k, k));
    }
  };
  const fs::path csv_path = out / cfg.csv;
  auto csv = open_out(csv_path);
  csv << DiagnosticsCsv::header() << '\n';
  csv << DiagnosticsCsv::row(audit_initial(x0, p)) << '\n';
  snap(0, x0);
  advance(x0, cfg.n_steps, p, cfg.stepper, [&](long n, const State& prev, const State& next, StepReport& rep) {
    const auto rec = audit_step(n, prev, next, rep.mu, p, k, rep.iterations);
    rep.energy_identity_residual = rec.identity_residual;
    csv << DiagnosticsCsv::row(rec) << '\n';
    csv.flush();
    snap(n, next);
  });
  if (!csv) throw FormatError("write failed: " + csv_path.string());
  return {cfg.n_steps, csv_path.string()};
}

AuditSummary cmd_audit(const std::string& trajectory_dir) {
  const fs::path dir(trajectory_dir);
  const RunConfig cfg = load_config((dir / "config.json").string());
  const Snapshot forcing = read_snapshot((dir / "forcing.pfa").string());
  const ModelParams base = make_params(cfg);
  const ModelParams p = base.with_forcing(forcing.state.u);
  const double k = cfg.stepper.k;
  const fs::path snap_dir = dir / cfg.snapshot_dir;

  std::ifstream is(dir / cfg.csv);
  if (!is) throw FormatError("cannot open " + (dir / cfg.csv).string());
  std::string line;
  if (!std::getline(is, line) || line != DiagnosticsCsv::header()) {
    throw FormatError("diagnostics CSV has an unexpected header");
  }
  const auto header = split(line, ',');

  AuditSummary sum;
  sum.audit_csv = (dir / "audit.csv").string();
  auto out = open_out(sum.audit_csv);
  out << DiagnosticsCsv::header() << '\n';

  std::map<long, State> cache;
  auto load = [&](long n) -> const State* {
    if (auto it = cache.find(n); it != cache.end()) return &it->second;
    const fs::path f = snap_dir / step_file(n);
    if (!fs::exists(f)) return nullptr;
    if (cache.size() > 2) cache.erase(cache.begin());
    return &cache.emplace(n, read_snapshot(f.string()).state).first->second;
  };

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) throw FormatError("diagnostics CSV: ragged row");
    const long n = std::stol(fields[0]);
    const State* cur = load(n);
    if (!cur) continue;
    const State* prev = n > 0 ? load(n - 1) : nullptr;
    AuditRecord rec;
    std::size_t ncompare = fields.size();
    if (n == 0) {
      rec = audit_initial(*cur, p);
    } else if (prev) {
      rec = audit_step(n, *prev, *cur, chemical_potential(cur->phi, p), p, k, std::stoi(fields.back()));
      ++sum.rows_with_identity;
    } else {
      // Only the state columns are recomputable without the previous state.
      rec = audit_initial(*cur, p);
      rec.n = n;
      rec.t = double(n) * k;
      ncompare = 11;
    }
    const auto row = DiagnosticsCsv::row(rec);
    out << row << '\n';
    const auto mine = split(row, ',');
    for (std::size_t c = 0; c < ncompare; ++c) {
      if (mine[c] != fields[c]) {
        throw AuditMismatch(n, "audit mismatch at step " + std::to_string(n) + " column " + header[c] + ": csv " +
                                   fields[c] + " vs recomputed " + mine[c]);
      }
    }
    ++sum.rows;
  }
  return sum;
}

std::vector<ConvergenceRow> cmd_converge(const RunConfig& cfg, const std::vector<double>& k_list, double k_ref,
                                         double T_star, const std::string& out_csv) {
  const ModelParams p = make_params(cfg);
  const auto rows = convergence_study(p, k_list, k_ref, T_star, make_study(cfg));
  if (const auto parent = fs::path(out_csv).parent_path(); !parent.empty()) fs::create_directories(parent);
  auto os = open_out(out_csv);
  os << "k,dist_to_ref,finite_time_err,cloud_radius_Y\n";
  for (const auto& r : rows) {
    os << format_double(r.k) << ',' << format_double(r.dist_to_ref) << ',' << format_double(r.finite_time_err) << ','
       << format_double(r.cloud_radius_Y) << '\n';
  }
  return rows;
}

void cmd_attractor(const RunConfig& cfg, const AttractorOptions& opt) {
  if (opt.k_list.empty()) throw ConfigError("k-list: empty");
  const ModelParams p = make_params(cfg);
  const EnsembleSpec e{opt.ensemble, cfg.seed, cfg.ensemble_level, cfg.initial.kmax};
  std::vector<StateCloud> clouds;
  for (std::size_t i = 0; i < opt.k_list.size(); ++i) {
    StepperConfig sc = cfg.stepper;
    sc.k = opt.k_list[i];
    clouds.push_back(sample_attractor(p, sc, e, opt.burn_in, opt.samples, opt.stride));
    char name[32];
    std::snprintf(name, sizeof name, "cloud_%02zu", i);
    write_cloud((fs::path(opt.out_dir) / name).string(), clouds.back(), p);
  }
  const auto finest = std::min_element(opt.k_list.begin(), opt.k_list.end()) - opt.k_list.begin();
  auto os = open_out(fs::path(opt.out_dir) / "attractor.csv");
  os << "k,n_states,cloud_radius_Y,dist_to_finest,partial\n";
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    os << format_double(opt.k_list[i]) << ',' << clouds[i].states.size() << ','
       << format_double(cloud_radius(clouds[i].states, p)) << ','
       << format_double(hausdorff_semidistance(clouds[i], clouds[finest], p)) << ','
       << (clouds[i].partial ? 1 : 0) << '\n';
  }
}

}  // namespace pfa
