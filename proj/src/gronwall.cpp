#include "pfa/gronwall.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pfa {

void GronwallInput::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("gronwall: k must be positive");
  if (!(xi0 >= 0.0)) throw std::invalid_argument("gronwall: xi0 must be nonnegative");
  if (eta.size() != zeta.size()) throw std::invalid_argument("gronwall: eta and zeta lengths differ");
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] >= 0.0) || !(zeta[i] >= 0.0)) {
      throw std::invalid_argument("gronwall: negative entry at index " + std::to_string(i));
    }
  }
}

double gronwall_bound(const GronwallInput& in, std::size_t n) {
  in.validate();
  if (n < 2) throw std::out_of_range("gronwall_bound: n must be >= 2");
  if (n >= in.zeta.size()) {
    throw std::out_of_range("gronwall_bound: sequences have length " + std::to_string(in.zeta.size()) +
                            ", need more than n = " + std::to_string(n));
  }
  double zsum = 0.0, esum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) zsum += in.zeta[i];
  for (std::size_t i = 0; i < n; ++i) esum += in.eta[i];
  return (in.xi0 + in.k * zsum) * std::exp(in.k * esum);
}

double uniform_gronwall_bound(double a1, double a2, double a3, int N, double k) {
  if (N <= 0) throw std::invalid_argument("uniform_gronwall_bound: N must be positive");
  if (!(k > 0.0)) throw std::invalid_argument("uniform_gronwall_bound: k must be positive");
  if (!(a1 >= 0.0 && a2 >= 0.0 && a3 >= 0.0)) {
    throw std::invalid_argument("uniform_gronwall_bound: a1, a2, a3 must be nonnegative");
  }
  return (a3 / (double(N) * k) + a2) * std::exp(a1);
}

double geometric_recursion_bound(double E0, double kappa, double k, long n, double zeta_sup) {
  if (!(kappa > 0.0)) throw std::invalid_argument("geometric_recursion_bound: kappa must be positive");
  if (!(k > 0.0)) throw std::invalid_argument("geometric_recursion_bound: k must be positive");
  if (n < 0) throw std::invalid_argument("geometric_recursion_bound: n must be nonnegative");
  if (!(E0 >= 0.0 && zeta_sup >= 0.0)) {
    throw std::invalid_argument("geometric_recursion_bound: E0 and zeta_sup must be nonnegative");
  }
  const double decay = std::pow(1.0 + kappa * k, -double(n));
  // 1 - decay without cancellation for small kappa k.
  const double gap = -std::expm1(-double(n) * std::log1p(kappa * k));
  return decay * E0 + zeta_sup * gap / kappa;
}

}  // namespace pfa
