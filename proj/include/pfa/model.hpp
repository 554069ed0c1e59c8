#pragma once

// Nonlinear ingredients of the coupled Navier-Stokes / Allen-Cahn model:
// advection forms, the capillary coupling, the polynomial potential and the
// free-energy functionals built on it.

#include <optional>
#include <vector>

#include "pfa/spectral.hpp"

namespace pfa {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Polynomial potential f(r) = sum_i c_i r^i with primitive
/// F(r) = F0 + int_0^r f. Leading coefficient must be positive and the degree
/// odd, so f' tends to +infinity and F is bounded below.
class PotentialSpec {
 public:
  explicit PotentialSpec(std::vector<double> coefficients, double F0 = 0.0);

  /// f(r) = r^3 - r, F(r) = (r^2 - 1)^2 / 4.
  static PotentialSpec double_well();

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double F0() const { return F0_; }

  double f(double r) const;
  double fprime(double r) const;
  double F(double r) const;
  /// Exact infimum of f' over the real line.
  double min_fprime() const { return min_fprime_; }

 private:
  std::vector<double> coeffs_;
  double F0_;
  double min_fprime_;
};

/// Ascending-coefficient polynomial helpers shared with the diagnostics.
double poly_eval(const std::vector<double>& c, double r);
/// Minimum over the real line of an even-degree polynomial with positive
/// leading coefficient (or of a constant).
double poly_min_over_reals(const std::vector<double>& c);

struct PhysicalConstants {
  double nu1 = 0.1;
  double nu2 = 0.1;
  double alpha = 0.5;
  double capK = 1.0;
  double gamma = 1.0;
};

/// Validated model parameters. Construction enforces nu2 <= alpha, the
/// potential lower bound f' >= -1/(2 alpha), and F_gamma + C_F_gamma >= 0.
class ModelParams {
 public:
  ModelParams(PhysicalConstants constants, PotentialSpec potential, SolenoidalVector forcing,
              std::optional<double> c_F_gamma_override = std::nullopt);

  double nu1() const { return c_.nu1; }
  double nu2() const { return c_.nu2; }
  double alpha() const { return c_.alpha; }
  double capK() const { return c_.capK; }
  double gamma() const { return c_.gamma; }
  const PhysicalConstants& constants() const { return c_; }
  const PotentialSpec& potential() const { return potential_; }
  const SolenoidalVector& forcing() const { return forcing_; }
  const GridSpec& grid() const { return forcing_.grid(); }
  double c_F_gamma() const { return c_F_gamma_; }
  /// min over the reals of F_gamma.
  double min_F_gamma() const { return min_F_gamma_; }
  NormWeights weights() const { return {c_.capK, c_.nu2, c_.gamma}; }

  /// f_gamma(r) = f(r) - nu2 gamma r / alpha, as ascending coefficients.
  const std::vector<double>& f_gamma_coefficients() const { return f_gamma_; }
  double f_gamma(double r) const;
  double F_gamma(double r) const;

  /// Same model with a different forcing (grid must match).
  ModelParams with_forcing(SolenoidalVector forcing) const;

 private:
  PhysicalConstants c_;
  PotentialSpec potential_;
  SolenoidalVector forcing_;
  std::vector<double> f_gamma_;
  double min_F_gamma_;
  double c_F_gamma_;
};

double norm_Y(const State& s, const ModelParams& p);
double norm_V(const State& s, const ModelParams& p);

// ---------------------------------------------------------------------------
// Advection and coupling.

/// Galerkin truncation of (u . grad) v, not projected.
VectorField advect(const SolenoidalVector& u, const SolenoidalVector& v);
/// b0(u, v, w) = int [(u . grad) v] . w
double b0(const SolenoidalVector& u, const SolenoidalVector& v, const SolenoidalVector& w);
/// B0(u, v) = P[(u . grad) v]
SolenoidalVector B0(const SolenoidalVector& u, const SolenoidalVector& v);

/// b1(u, phi, psi) = int [(u . grad) phi] psi
double b1(const SolenoidalVector& u, const SpectralScalar& phi, const SpectralScalar& psi);
/// B1(u, phi) = (u . grad) phi, truncated.
SpectralScalar B1(const SolenoidalVector& u, const SpectralScalar& phi);

/// R0(mu, phi) = P(mu grad phi).
SolenoidalVector R0(const SpectralScalar& mu, const SpectralScalar& phi);

// ---------------------------------------------------------------------------
// Potential terms. Pointwise evaluations use a grid on which the polynomial
// is alias-free, then truncate.

SpectralScalar eval_f(const SpectralScalar& phi, const PotentialSpec& potential);
SpectralScalar eval_f_gamma(const SpectralScalar& phi, const ModelParams& p);
/// int_Omega F_gamma(phi(x)) dx, exact for polynomial potentials.
double F_gamma_integral(const SpectralScalar& phi, const ModelParams& p);
/// int_Omega (nu2/2 |grad phi|^2 + alpha F(phi)) dx.
double free_energy(const SpectralScalar& phi, const ModelParams& p);
/// mu = nu2 A_gamma phi + alpha f_gamma(phi).
SpectralScalar chemical_potential(const SpectralScalar& phi, const ModelParams& p);

}  // namespace pfa
