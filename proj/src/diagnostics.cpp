#include "pfa/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace pfa {

EnergyBreakdown energy_E(const State& s, const ModelParams& p) {
  EnergyBreakdown e{};
  const double u2 = norm_L2(s.u);
  const double pg = norm_gamma(s.phi, p.gamma());
  const double pl = norm_L2(s.phi);
  e.kinetic = u2 * u2 / p.capK();
  e.gamma_seminorm = p.nu2() * pg * pg;
  e.potential = 2.0 * p.alpha() * F_gamma_integral(s.phi, p);
  e.l2_phi = pl * pl;
  e.floor = 2.0 * p.alpha() * p.c_F_gamma() * kDomainArea;
  e.total = e.kinetic + e.gamma_seminorm + e.potential + e.l2_phi + e.floor;
  return e;
}

double remainder_closed_form(const SpectralScalar& phi_prev, const SpectralScalar& phi, const ModelParams& p) {
  return inner_L2(phi - phi_prev, eval_f_gamma(phi, p)) - F_gamma_integral(phi, p) + F_gamma_integral(phi_prev, p);
}

IdentityTerms energy_identity_terms(const State& prev, const State& next, const SpectralScalar& mu,
                                    const ModelParams& p, double k) {
  auto sq = [](double v) { return v * v; };
  const double K = p.capK(), gm = p.gamma(), a = p.alpha();
  const SolenoidalVector du = next.u - prev.u;
  const SpectralScalar dphi = next.phi - prev.phi;
  IdentityTerms t{};
  t.kinetic_block = (sq(norm_L2(next.u)) - sq(norm_L2(prev.u)) + sq(norm_L2(du))) / K;
  t.gamma_block = p.nu2() * (sq(norm_gamma(next.phi, gm)) - sq(norm_gamma(prev.phi, gm)) + sq(norm_gamma(dphi, gm)));
  t.l2_block = sq(norm_L2(next.phi)) - sq(norm_L2(prev.phi)) + sq(norm_L2(dphi));
  t.potential_diff = 2.0 * a * F_gamma_integral(next.phi, p) - 2.0 * a * F_gamma_integral(prev.phi, p);
  t.dissipation = (2.0 * p.nu1() / K) * k * sq(norm_H1(next.u)) + 2.0 * k * p.nu2() * sq(norm_gamma(next.phi, gm)) +
                  2.0 * k * sq(norm_L2(mu));
  t.f_phi = 2.0 * a * k * inner_L2(eval_f_gamma(next.phi, p), next.phi);
  t.remainder = 2.0 * a * remainder_closed_form(prev.phi, next.phi, p);
  t.rhs = (2.0 / K) * k * inner_L2(p.forcing(), next.u);
  return t;
}

double energy_identity_residual(const State& prev, const State& next, const SpectralScalar& mu,
                                const ModelParams& p, double k) {
  const auto t = energy_identity_terms(prev, next, mu, p, k);
  return std::abs(t.lhs() - t.rhs);
}

namespace {

// Gauss-Legendre rule on [0, 1] with m nodes (Golub-Welsch).
struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre01(int m) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule r;
  for (int i = 0; i < m; ++i) {
    r.x.push_back(0.5 * (es.eigenvalues()(i) + 1.0));
    const double v = es.eigenvectors()(0, i);
    r.w.push_back(v * v);  // weights on [-1,1] are 2 v^2; halved for [0,1]
  }
  return r;
}

}  // namespace

double remainder_density(double a, double b, const ModelParams& p) {
  // (b-a)^2 int_0^1 (1-t) Q(b, a + t(b-a)) dt with
  // f_gamma(b) - f_gamma(x) = (b - x) Q(b, x), Q = sum_i c_i sum_j b^j x^{i-1-j}.
  const auto& c = p.f_gamma_coefficients();
  const int d = static_cast<int>(c.size()) - 1;
  thread_local int cached_m = -1;
  thread_local GaussRule rule;
  const int m = d / 2 + 1;
  if (m != cached_m) {
    rule = gauss_legendre01(m);
    cached_m = m;
  }
  const double delta = b - a;
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const double x = a + rule.x[q] * delta;
    double Q = 0.0;
    for (int i = 1; i <= d; ++i) {
      double s = 0.0, bj = 1.0;
      for (int j = 0; j < i; ++j) {
        s += bj * std::pow(x, i - 1 - j);
        bj *= b;
      }
      Q += c[i] * s;
    }
    acc += rule.w[q] * (1.0 - rule.x[q]) * Q;
  }
  return delta * delta * acc;
}

RemainderCheck remainder_bound_check(const State& prev, const State& next, const ModelParams& p) {
  const SpectralScalar* in[] = {&prev.phi, &next.phi};
  const double R = integrate_pointwise(in, p.potential().degree() + 1,
                                       [&p](std::span<const double> v) { return remainder_density(v[0], v[1], p); });
  const double d = norm_L2(next.phi - prev.phi);
  RemainderCheck out{};
  out.R_gamma = R;
  out.margin = 2.0 * p.alpha() * R + (0.5 + p.nu2() * p.gamma()) * d * d;
  out.scale = std::max(1.0, 2.0 * p.alpha() * std::abs(R) + (0.5 + p.nu2() * p.gamma()) * d * d);
  return out;
}

double kappa_candidate(double nu1, double c_Omega, double nu2, double gamma, double alpha, double c_f_prime) {
  if (!(nu1 > 0 && c_Omega > 0 && nu2 > 0 && gamma > 0 && alpha > 0) || !(c_f_prime >= 0)) {
    throw std::invalid_argument("kappa_candidate: inputs must be positive (c'_f nonnegative)");
  }
  const double ng = nu2 * gamma;
  return std::min(nu1 / (2.0 * c_Omega), ng / (1.0 + ng + 2.0 * c_f_prime * (alpha + nu2)));
}

double rho0_candidate(double kappa, double c_Omega, double nu1, double capK, double g_inf, double c2) {
  if (!(kappa > 0 && c_Omega > 0 && nu1 > 0 && capK > 0) || !(g_inf >= 0) || !(c2 >= 0)) {
    throw std::invalid_argument("rho0_candidate: kappa, c_Omega, nu1, capK must be positive; |g|, c2 nonnegative");
  }
  return std::sqrt((c_Omega / (nu1 * capK) * g_inf * g_inf + c2) / kappa);
}

namespace {
void fill_norms(AuditRecord& r, const State& s, const ModelParams& p) {
  r.norm_u_L2 = norm_L2(s.u);
  r.norm_u_H1 = norm_H1(s.u);
  r.norm_phi_gamma = norm_gamma(s.phi, p.gamma());
  r.norm_V = norm_V(s, p);
  r.energy = energy_E(s, p);
}
}  // namespace

AuditRecord audit_initial(const State& s, const ModelParams& p) {
  AuditRecord r;
  fill_norms(r, s, p);
  return r;
}

AuditRecord audit_step(long n, const State& prev, const State& next, const SpectralScalar& mu,
                       const ModelParams& p, double k, int iterations) {
  auto sq = [](double v) { return v * v; };
  AuditRecord r;
  r.n = n;
  r.t = double(n) * k;
  fill_norms(r, next, p);
  r.identity_residual = energy_identity_residual(prev, next, mu, p, k);
  const auto rc = remainder_bound_check(prev, next, p);
  r.R_gamma = rc.R_gamma;
  r.remainder_margin = rc.margin;
  r.dissipation_M1 = k * (p.nu1() / (2.0 * p.capK()) * sq(r.norm_u_H1) + 2.0 * sq(norm_L2(mu)));
  r.dissipation_M2 = k * sq(norm_L2(apply_A_gamma(next.phi, p.gamma())));
  r.increment = sq(norm_H1(next.u - prev.u)) + sq(norm_L2(apply_A_gamma(next.phi - prev.phi, p.gamma())));
  r.iterations = iterations;
  return r;
}

DissipationSums dissipation_sums(const TrajectoryLog& log, long i, long n) {
  if (i < 1 || n < i || n > log.n_steps()) throw std::out_of_range("dissipation_sums: need 1 <= i <= n <= steps");
  const auto& p = log.params;
  const double k = log.k();
  DissipationSums s{0.0, 0.0};
  for (long j = i; j <= n; ++j) {
    const double uh = norm_H1(log.states[j].u);
    const double mu = norm_L2(log.reports[j - 1].mu);
    const double ap = norm_L2(apply_A_gamma(log.states[j].phi, p.gamma()));
    s.M1 += k * (p.nu1() / (2.0 * p.capK()) * uh * uh + 2.0 * mu * mu);
    s.M2 += k * ap * ap;
  }
  return s;
}

double increment_sums(const TrajectoryLog& log, long i, long m) {
  if (i < 1 || m < i || m > log.n_steps()) throw std::out_of_range("increment_sums: need 1 <= i <= m <= steps");
  const double gm = log.params.gamma();
  double s = 0.0;
  for (long j = i; j <= m; ++j) {
    const double a = norm_H1(log.states[j].u - log.states[j - 1].u);
    const double b = norm_L2(apply_A_gamma(log.states[j].phi - log.states[j - 1].phi, gm));
    s += a * a + b * b;
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const char* DiagnosticsCsv::header() {
  return "n,t,|u|_L2,norm_H1_u,norm_gamma_phi,norm_V,E_total,E_kinetic,E_gamma,E_potential,E_l2,"
         "identity_residual,remainder_margin,iterations";
}

std::string DiagnosticsCsv::row(const AuditRecord& r) {
  std::string s = std::to_string(r.n);
  for (double v : {r.t, r.norm_u_L2, r.norm_u_H1, r.norm_phi_gamma, r.norm_V, r.energy.total, r.energy.kinetic,
                   r.energy.gamma_seminorm, r.energy.potential, r.energy.l2_phi, r.identity_residual,
                   r.remainder_margin}) {
    s += ',';
    s += format_double(v);
  }
  s += ',';
  s += std::to_string(r.iterations);
  return s;
}

}  // namespace pfa
