#include "pfa/random_fields.hpp"

#include <vector>

namespace pfa {

namespace {
// Half-plane modes with |k| <= kmax in a fixed order.
std::vector<std::pair<int, int>> half_plane_modes(const GridSpec& g, double kmax, bool with_mean) {
  std::vector<std::pair<int, int>> out;
  if (with_mean) out.emplace_back(0, 0);
  const int m = static_cast<int>(kmax);
  for (int k2 = -m; k2 <= m; ++k2) {
    for (int k1 = 0; k1 <= m; ++k1) {
      if (k1 == 0 && k2 <= 0) continue;
      if (double(k1 * k1 + k2 * k2) > kmax * kmax) continue;
      if (!g.contains_mode(k1, k2) || !g.contains_mode(-k1, -k2)) continue;
      out.emplace_back(k1, k2);
    }
  }
  return out;
}
}  // namespace

SpectralScalar random_scalar(const GridSpec& g, std::mt19937_64& rng, double kmax, bool with_mean) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<Mode> modes;
  for (auto [k1, k2] : half_plane_modes(g, kmax, with_mean)) {
    const double re = n01(rng);
    const double im = (k1 == 0 && k2 == 0) ? 0.0 : n01(rng);
    modes.push_back({k1, k2, {re, im}});
  }
  return from_modes(g, modes);
}

SolenoidalVector random_solenoidal(const GridSpec& g, std::mt19937_64& rng, double kmax) {
  const auto psi = random_scalar(g, rng, kmax);
  const auto d = gradient(psi);
  return leray_project(VectorField{d.y, -d.x});
}

State random_state(const GridSpec& g, std::uint64_t seed, double kmax, double level, const NormWeights& w) {
  std::mt19937_64 rng(seed);
  auto u = random_solenoidal(g, rng, kmax);
  auto phi = random_scalar(g, rng, kmax, true);
  State s(std::move(u), std::move(phi));
  const double n = norm_Y(s, w);
  if (n > 0.0) s *= level / n;
  return s;
}

SolenoidalVector taylor_green(const GridSpec& g, double a) {
  const Complex q(0.0, a / 4.0);
  const Mode mx[] = {{1, 1, -q}, {1, -1, -q}};
  const Mode my[] = {{1, 1, q}, {1, -1, -q}};
  return leray_project(VectorField{from_modes(g, mx), from_modes(g, my)});
}

}  // namespace pfa
