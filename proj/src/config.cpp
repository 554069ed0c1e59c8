#include "pfa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pfa/random_fields.hpp"

namespace pfa {

namespace {

using json = nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

template <class T>
void get(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  only_keys(j, "", {"grid", "model", "stepper", "initial", "run", "ensemble", "seed"});
  get(j, "seed", c.seed, "");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    only_keys(g, "grid", {"nx", "ny", "pad_factor"});
    get(g, "nx", c.nx, "grid");
    get(g, "ny", c.ny, "grid");
    get(g, "pad_factor", c.pad_factor, "grid");
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    only_keys(m, "model", {"nu1", "nu2", "alpha", "capK", "gamma", "potential", "c_F_gamma", "forcing"});
    get(m, "nu1", c.constants.nu1, "model");
    get(m, "nu2", c.constants.nu2, "model");
    get(m, "alpha", c.constants.alpha, "model");
    get(m, "capK", c.constants.capK, "model");
    get(m, "gamma", c.constants.gamma, "model");
    if (m.contains("c_F_gamma") && !m["c_F_gamma"].is_null()) {
      double v = 0.0;
      get(m, "c_F_gamma", v, "model");
      c.c_F_gamma = v;
    }
    if (m.contains("potential")) {
      const auto& p = m["potential"];
      only_keys(p, "model.potential", {"coefficients", "F0"});
      get(p, "coefficients", c.potential, "model.potential");
      get(p, "F0", c.F0, "model.potential");
    }
    if (m.contains("forcing")) {
      const auto& f = m["forcing"];
      only_keys(f, "model.forcing", {"type", "amplitude", "kmax", "seed", "modes"});
      get(f, "type", c.forcing.type, "model.forcing");
      get(f, "amplitude", c.forcing.amplitude, "model.forcing");
      get(f, "kmax", c.forcing.kmax, "model.forcing");
      if (f.contains("seed")) {
        std::uint64_t s = 0;
        get(f, "seed", s, "model.forcing");
        c.forcing.seed = s;
      }
      if (f.contains("modes")) {
        if (!f["modes"].is_array()) throw ConfigError("model.forcing.modes: expected an array");
        for (const auto& md : f["modes"]) {
          only_keys(md, "model.forcing.modes[]", {"k1", "k2", "re", "im"});
          Mode mode{0, 0, {0.0, 0.0}};
          double re = 0.0, im = 0.0;
          get(md, "k1", mode.k1, "model.forcing.modes[]");
          get(md, "k2", mode.k2, "model.forcing.modes[]");
          get(md, "re", re, "model.forcing.modes[]");
          get(md, "im", im, "model.forcing.modes[]");
          mode.c = {re, im};
          c.forcing.modes.push_back(mode);
        }
      }
      static const std::set<std::string> types = {"zero", "random", "taylor_green", "modes"};
      if (!types.count(c.forcing.type)) throw ConfigError("model.forcing.type: unknown type '" + c.forcing.type + "'");
    }
  }
  if (j.contains("stepper")) {
    const auto& s = j["stepper"];
    only_keys(s, "stepper", {"k", "fp_tol", "max_iter", "relaxation", "fallback_relaxation"});
    get(s, "k", c.stepper.k, "stepper");
    get(s, "fp_tol", c.stepper.fp_tol, "stepper");
    get(s, "max_iter", c.stepper.max_iter, "stepper");
    get(s, "relaxation", c.stepper.relaxation, "stepper");
    get(s, "fallback_relaxation", c.stepper.fallback_relaxation, "stepper");
  }
  if (j.contains("initial")) {
    const auto& s = j["initial"];
    only_keys(s, "initial", {"type", "level", "kmax", "amplitude", "phi"});
    get(s, "type", c.initial.type, "initial");
    get(s, "level", c.initial.level, "initial");
    get(s, "kmax", c.initial.kmax, "initial");
    get(s, "amplitude", c.initial.amplitude, "initial");
    get(s, "phi", c.initial.phi, "initial");
    static const std::set<std::string> types = {"zero", "random", "taylor_green"};
    if (!types.count(c.initial.type)) throw ConfigError("initial.type: unknown type '" + c.initial.type + "'");
  }
  if (j.contains("run")) {
    const auto& s = j["run"];
    only_keys(s, "run", {"n_steps", "snapshot_stride", "csv", "snapshot_dir"});
    get(s, "n_steps", c.n_steps, "run");
    get(s, "snapshot_stride", c.snapshot_stride, "run");
    get(s, "csv", c.csv, "run");
    get(s, "snapshot_dir", c.snapshot_dir, "run");
  }
  if (j.contains("ensemble")) {
    const auto& s = j["ensemble"];
    only_keys(s, "ensemble", {"size", "level", "burn_in_time", "samples", "stride_time", "finite_time_starts"});
    get(s, "size", c.ensemble, "ensemble");
    get(s, "level", c.ensemble_level, "ensemble");
    get(s, "burn_in_time", c.burn_in_time, "ensemble");
    get(s, "samples", c.samples, "ensemble");
    get(s, "stride_time", c.stride_time, "ensemble");
    get(s, "finite_time_starts", c.finite_time_starts, "ensemble");
  }

  if (c.nx < 4 || c.ny < 4 || c.nx % 2 || c.ny % 2) throw ConfigError("grid: nx, ny must be even and >= 4");
  if (c.n_steps < 1) throw ConfigError("run.n_steps must be >= 1");
  if (c.snapshot_stride < 0) throw ConfigError("run.snapshot_stride must be >= 0 (0 disables snapshots)");
  if (c.ensemble < 1 || c.samples < 1) throw ConfigError("ensemble: size and samples must be >= 1");
  c.stepper.validate();
  make_params(c);  // runs every model-level check
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["grid"] = {{"nx", c.nx}, {"ny", c.ny}, {"pad_factor", c.pad_factor}};
  nlohmann::ordered_json f;
  f["type"] = c.forcing.type;
  f["amplitude"] = c.forcing.amplitude;
  f["kmax"] = c.forcing.kmax;
  if (c.forcing.seed) f["seed"] = *c.forcing.seed;
  f["modes"] = nlohmann::ordered_json::array();
  for (const auto& m : c.forcing.modes) {
    f["modes"].push_back({{"k1", m.k1}, {"k2", m.k2}, {"re", m.c.real()}, {"im", m.c.imag()}});
  }
  j["model"] = {{"nu1", c.constants.nu1},
                {"nu2", c.constants.nu2},
                {"alpha", c.constants.alpha},
                {"capK", c.constants.capK},
                {"gamma", c.constants.gamma},
                {"potential", {{"coefficients", c.potential}, {"F0", c.F0}}},
                {"c_F_gamma", c.c_F_gamma ? nlohmann::ordered_json(*c.c_F_gamma) : nlohmann::ordered_json()},
                {"forcing", f}};
  j["stepper"] = {{"k", c.stepper.k},
                  {"fp_tol", c.stepper.fp_tol},
                  {"max_iter", c.stepper.max_iter},
                  {"relaxation", c.stepper.relaxation},
                  {"fallback_relaxation", c.stepper.fallback_relaxation}};
  j["initial"] = {{"type", c.initial.type},
                  {"level", c.initial.level},
                  {"kmax", c.initial.kmax},
                  {"amplitude", c.initial.amplitude},
                  {"phi", c.initial.phi}};
  j["run"] = {{"n_steps", c.n_steps},
              {"snapshot_stride", c.snapshot_stride},
              {"csv", c.csv},
              {"snapshot_dir", c.snapshot_dir}};
  j["ensemble"] = {{"size", c.ensemble},
                   {"level", c.ensemble_level},
                   {"burn_in_time", c.burn_in_time},
                   {"samples", c.samples},
                   {"stride_time", c.stride_time},
                   {"finite_time_starts", c.finite_time_starts}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

GridSpec make_grid(const RunConfig& c) {
  try {
    return GridSpec(c.nx, c.ny, c.pad_factor);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

SolenoidalVector make_forcing(const RunConfig& c, const GridSpec& g) {
  const auto& f = c.forcing;
  if (f.type == "zero") return SolenoidalVector(g);
  if (f.type == "taylor_green") return taylor_green(g, f.amplitude);
  if (f.type == "random") {
    std::mt19937_64 rng(f.seed ? *f.seed : c.seed ^ 0x9e3779b97f4a7c15ULL);
    auto u = random_solenoidal(g, rng, f.kmax);
    const double n = norm_L2(u);
    if (n > 0.0) u *= f.amplitude / n;
    return u;
  }
  // Streamfunction modes: u = (d_y psi, -d_x psi).
  for (const auto& m : f.modes) {
    if (!g.contains_mode(m.k1, m.k2)) throw ConfigError("model.forcing.modes: mode outside the grid");
  }
  const auto psi = from_modes(g, f.modes);
  const auto d = gradient(psi);
  return leray_project(VectorField{d.y, -d.x});
}

ModelParams make_params(const RunConfig& c) {
  const GridSpec g = make_grid(c);
  return ModelParams(c.constants, PotentialSpec(c.potential, c.F0), make_forcing(c, g), c.c_F_gamma);
}

State make_initial(const RunConfig& c, const ModelParams& p) {
  const auto& g = p.grid();
  const auto& s = c.initial;
  if (s.type == "zero") return State(g);
  if (s.type == "taylor_green") {
    const Mode mean[] = {{0, 0, {s.phi, 0.0}}};
    return State(taylor_green(g, s.amplitude), from_modes(g, mean));
  }
  return random_state(g, c.seed, s.kmax, s.level, p.weights());
}

StudyConfig make_study(const RunConfig& c) {
  StudyConfig s;
  s.base = c.stepper;
  s.ensemble = {c.ensemble, c.seed, c.ensemble_level, c.initial.kmax};
  s.burn_in_time = c.burn_in_time;
  s.n_samples = c.samples;
  s.stride_time = c.stride_time;
  s.finite_time_starts = c.finite_time_starts;
  return s;
}

}  // namespace pfa
