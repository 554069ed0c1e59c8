#pragma once

// Seeded low-mode random fields and a few closed-form test fields.

#include <cstdint>
#include <random>

#include "pfa/model.hpp"

namespace pfa {

/// Gaussian coefficients on 0 < |k| <= kmax (and on k = 0 when with_mean).
SpectralScalar random_scalar(const GridSpec& g, std::mt19937_64& rng, double kmax, bool with_mean = false);
/// Velocity from a random streamfunction psi: u = (d_y psi, -d_x psi).
SolenoidalVector random_solenoidal(const GridSpec& g, std::mt19937_64& rng, double kmax);
/// Random (u, phi) rescaled to ||.||_Y = level.
State random_state(const GridSpec& g, std::uint64_t seed, double kmax, double level, const NormWeights& w);

/// u = a (sin x cos y, -cos x sin y).
SolenoidalVector taylor_green(const GridSpec& g, double a);

}  // namespace pfa
