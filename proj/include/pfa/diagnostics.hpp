#pragma once

// Discrete energy, per-step energy identity audit, potential remainder bound,
// stability-constant evaluators and dissipation sums.

#include <iosfwd>
#include <string>
#include <vector>

#include "pfa/stepper.hpp"

namespace pfa {

struct EnergyBreakdown {
  double kinetic;         ///< |u|^2 / K
  double gamma_seminorm;  ///< nu2 ||phi||_gamma^2
  double potential;       ///< 2 alpha F_gamma-integral
  double l2_phi;          ///< |phi|^2
  double floor;           ///< 2 alpha C_F_gamma |Omega|
  double total;
};

EnergyBreakdown energy_E(const State& s, const ModelParams& p);

/// Individual terms of the per-step energy balance, left side in order.
struct IdentityTerms {
  double kinetic_block;
  double gamma_block;
  double l2_block;
  double potential_diff;
  double dissipation;  ///< (2 nu1/K) k ||u||^2 + 2 k nu2 ||phi||_gamma^2 + 2 k |mu|^2
  double f_phi;        ///< 2 alpha k (f_gamma(phi), phi)
  double remainder;    ///< 2 alpha R_gamma
  double rhs;          ///< (2/K) k (g, u)
  double lhs() const {
    return kinetic_block + gamma_block + l2_block + potential_diff + dissipation + f_phi + remainder;
  }
};

IdentityTerms energy_identity_terms(const State& prev, const State& next, const SpectralScalar& mu,
                                    const ModelParams& p, double k);
/// |LHS - RHS| of the per-step energy balance.
double energy_identity_residual(const State& prev, const State& next, const SpectralScalar& mu,
                                const ModelParams& p, double k);

/// R_gamma = (phi - phi_prev, f_gamma(phi)) - F_gamma(phi) + F_gamma(phi_prev), evaluated as written.
double remainder_closed_form(const SpectralScalar& phi_prev, const SpectralScalar& phi, const ModelParams& p);

/// Pointwise remainder density (b-a) f_gamma(b) - int_a^b f_gamma, in a
/// factored form free of cancellation.
double remainder_density(double a, double b, const ModelParams& p);

struct RemainderCheck {
  double R_gamma;
  /// 2 alpha R + |dphi|^2 / 2 + nu2 gamma |dphi|^2; nonnegative up to round-off.
  double margin;
  /// Magnitude of the quantities the margin is built from.
  double scale;
};

RemainderCheck remainder_bound_check(const State& prev, const State& next, const ModelParams& p);

/// min{nu1 / (2 c_Omega), nu2 gamma / (1 + nu2 gamma + 2 c'_f (alpha + nu2))}.
double kappa_candidate(double nu1, double c_Omega, double nu2, double gamma, double alpha, double c_f_prime);
/// rho0 with rho0^2 = (c_Omega |g|_inf^2 / (nu1 K) + c2) / kappa.
double rho0_candidate(double kappa, double c_Omega, double nu1, double capK, double g_inf, double c2);

struct AuditRecord {
  long n = 0;
  double t = 0.0;
  double norm_u_L2 = 0.0;
  double norm_u_H1 = 0.0;
  double norm_phi_gamma = 0.0;
  double norm_V = 0.0;
  EnergyBreakdown energy{};
  double identity_residual = 0.0;
  double R_gamma = 0.0;
  double remainder_margin = 0.0;
  /// (nu1 / 2K) k ||u||^2 + 2 k |mu|^2
  double dissipation_M1 = 0.0;
  /// k |A_gamma phi|^2
  double dissipation_M2 = 0.0;
  /// ||u - u_prev||^2 + |A_gamma(phi - phi_prev)|^2
  double increment = 0.0;
  int iterations = 0;
};

/// Record for the initial state (no step taken).
AuditRecord audit_initial(const State& s, const ModelParams& p);
AuditRecord audit_step(long n, const State& prev, const State& next, const SpectralScalar& mu,
                       const ModelParams& p, double k, int iterations);

struct DissipationSums {
  double M1;
  double M2;
};
/// k sum_{j=i}^n [(nu1/2K) ||u^j||^2 + 2 |mu^j|^2] and k sum_{j=i}^n |A_gamma phi^j|^2.
DissipationSums dissipation_sums(const TrajectoryLog& log, long i, long n);
/// sum_{j=i}^m (||u^j - u^{j-1}||^2 + |A_gamma(phi^j - phi^{j-1})|^2).
double increment_sums(const TrajectoryLog& log, long i, long m);

/// Time-series writer; one row per record, shortest round-trip decimal form.
class DiagnosticsCsv {
 public:
  static const char* header();
  static std::string row(const AuditRecord& r);
};

/// Shortest decimal representation that reads back to the same double.
std::string format_double(double v);

}  // namespace pfa
