#pragma once

// Discrete Gronwall bounds. Pure sequence algebra.

#include <cstddef>
#include <vector>

namespace pfa {

/// Recursion data xi_{n+1} <= xi_n + k eta_n xi_n + k zeta_{n+1}.
/// eta is indexed from 0, zeta from 1 (zeta[0] is unused but must exist).
struct GronwallInput {
  double k;
  double xi0;
  std::vector<double> eta;
  std::vector<double> zeta;

  void validate() const;
};

/// (xi0 + sum_{i=1}^n k zeta_i) exp(sum_{i=0}^{n-1} k eta_i).
double gronwall_bound(const GronwallInput& in, std::size_t n);

/// (a3 / (N k) + a2) exp(a1).
double uniform_gronwall_bound(double a1, double a2, double a3, int N, double k);

/// Closed form of E^n <= (E^{n-1} + k zeta^n) / (1 + kappa k) with zeta^n <= zeta_sup:
/// (1 + kappa k)^{-n} E0 + zeta_sup (1 - (1 + kappa k)^{-n}) / kappa.
double geometric_recursion_bound(double E0, double kappa, double k, long n, double zeta_sup);

}  // namespace pfa
