#pragma once

// Small constructors shared by the test files.

#include <random>

#include "oracles.hpp"
#include "pfa/model.hpp"
#include "pfa/random_fields.hpp"

namespace fixture {

inline pfa::ModelParams params(const pfa::GridSpec& g, pfa::PhysicalConstants c = {}) {
  return pfa::ModelParams(c, pfa::PotentialSpec::double_well(), pfa::SolenoidalVector(g));
}

inline pfa::ModelParams params(const pfa::SolenoidalVector& forcing, pfa::PhysicalConstants c = {}) {
  return pfa::ModelParams(c, pfa::PotentialSpec::double_well(), forcing);
}

/// Random solenoidal field with modes |k_i| <= kmax.
inline pfa::SolenoidalVector velocity(const pfa::GridSpec& g, std::mt19937_64& rng, int kmax) {
  return pfa::leray_project(
      pfa::VectorField{oracle::random_field(g, rng, kmax), oracle::random_field(g, rng, kmax)});
}

inline pfa::SpectralScalar constant(const pfa::GridSpec& g, double c) {
  const pfa::Mode m[] = {{0, 0, {c, 0.0}}};
  return pfa::from_modes(g, m);
}

}  // namespace fixture
