#include "doctest.h"

#include <charconv>
#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pfa/diagnostics.hpp"

using namespace pfa;
using std::numbers::pi;

namespace {

State random_start(const GridSpec& g, std::uint64_t seed, double level) {
  return random_state(g, seed, 4, level, fixture::params(g).weights());
}

ModelParams forced_params(const GridSpec& g, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  const auto f = random_solenoidal(g, rng, 3);
  return fixture::params(f * (amplitude / norm_L2(f)));
}

// Physical energy |u|^2/K + 2 (nu2/2 |grad phi|^2 + alpha int F(phi)).
double physical_energy(const State& s, const ModelParams& p) {
  const double u = norm_L2(s.u);
  return u * u / p.capK() + 2 * free_energy(s.phi, p);
}

}  // namespace

TEST_CASE("energy of simple states") {
  GridSpec g(16, 16);
  const auto p = fixture::params(g);
  const double floor = 2 * p.alpha() * p.c_F_gamma() * kDomainArea;

  const auto zero = energy_E(State(g), p);
  CHECK(zero.kinetic == 0.0);
  CHECK(zero.gamma_seminorm == 0.0);
  CHECK(zero.l2_phi == 0.0);
  CHECK(zero.potential == doctest::Approx(pi * pi).epsilon(1e-14));
  CHECK(zero.floor == doctest::Approx(floor).epsilon(1e-15));
  CHECK(zero.total == doctest::Approx(pi * pi + floor).epsilon(1e-14));

  // phi = 1: F(1) = 0 so F_gamma(1) = -nu2 gamma / (2 alpha).
  const State one(SolenoidalVector(g), fixture::constant(g, 1.0));
  const auto e1 = energy_E(one, p);
  const double Fg1 = -p.nu2() * p.gamma() / (2 * p.alpha());
  CHECK(e1.potential == doctest::Approx(2 * p.alpha() * Fg1 * kDomainArea).epsilon(1e-13));
  CHECK(e1.potential == doctest::Approx(-0.4 * pi * pi).epsilon(1e-13));
  CHECK(e1.l2_phi == doctest::Approx(kDomainArea).epsilon(1e-14));
  CHECK(e1.gamma_seminorm == doctest::Approx(p.nu2() * p.gamma() * kDomainArea).epsilon(1e-14));
  CHECK(e1.total >= 0.0);
}

TEST_CASE("energy components match a term-wise recomputation") {
  GridSpec g(16, 16);
  const auto p = fixture::params(g);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = random_start(g, seed, 0.5 + seed);
    const auto e = energy_E(s, p);
    const double u = norm_L2(s.u), pg = norm_gamma(s.phi, p.gamma()), l2 = norm_L2(s.phi);
    CHECK(oracle::rel(e.kinetic, u * u / p.capK()) <= 1e-13);
    CHECK(oracle::rel(e.gamma_seminorm, p.nu2() * pg * pg) <= 1e-13);
    CHECK(oracle::rel(e.l2_phi, l2 * l2) <= 1e-13);

    const oracle::Values v = oracle::values(s.phi, 64);
    const oracle::Values Fg = v.unaryExpr([&p](double r) { return p.F_gamma(r); });
    CHECK(std::abs(e.potential - 2 * p.alpha() * oracle::integral(Fg)) <= 1e-12 * std::max(1.0, std::abs(e.potential)));

    const double sum = e.kinetic + e.gamma_seminorm + e.potential + e.l2_phi + e.floor;
    CHECK(std::abs(e.total - sum) <= 1e-12 * e.total);
    CHECK(e.total >= 0.0);
    const double y = norm_Y(s, p);
    CHECK(y * y <= e.total);
  }
}

TEST_CASE("energy identity on converged steps") {
  GridSpec g(16, 16);
  StepperConfig cfg;
  cfg.k = 0.02;

  SUBCASE("equilibrium") {
    const auto p = fixture::params(g);
    const State eq(SolenoidalVector(g), fixture::constant(g, 1.0));
    CHECK(energy_identity_residual(eq, eq, chemical_potential(eq.phi, p), p, cfg.k) <= 1e-14);
    CHECK(energy_identity_residual(State(g), State(g), SpectralScalar(g), p, cfg.k) == 0.0);
  }
  SUBCASE("Taylor-Green step") {
    const auto p = fixture::params(g);
    const State s0(taylor_green(g, 1.0), SpectralScalar(g));
    const auto [s1, rep] = implicit_step(s0, p, cfg);
    const double E = energy_E(s1, p).total;
    CHECK(energy_identity_residual(s0, s1, rep.mu, p, cfg.k) <= 10 * cfg.fp_tol * std::max(1.0, E));
  }
  SUBCASE("constant phase step") {
    const auto p = fixture::params(g);
    StepperConfig c = cfg;
    c.k = 0.1;
    const State s0(SolenoidalVector(g), fixture::constant(g, 2.0));
    const auto [s1, rep] = implicit_step(s0, p, c);
    const double E = energy_E(s1, p).total;
    CHECK(energy_identity_residual(s0, s1, rep.mu, p, c.k) <= 10 * c.fp_tol * std::max(1.0, E));
  }
  SUBCASE("forced random trajectories") {
    const auto p = forced_params(g, 51, 1.0);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      const auto log = run(random_start(g, seed, 3.0), 25, p, cfg);
      for (long n = 1; n <= log.n_steps(); ++n) {
        const auto& prev = log.states[n - 1];
        const auto& next = log.states[n];
        const auto terms = energy_identity_terms(prev, next, log.reports[n - 1].mu, p, cfg.k);
        const double E = energy_E(next, p).total;
        // On a coarse grid f_gamma(phi) grad phi is a gradient only up to
        // truncation; that Galerkin term is the whole of the imbalance.
        const double galerkin = 2 * p.alpha() * cfg.k * b1(next.u, next.phi, eval_f_gamma(next.phi, p));
        CHECK(std::abs(terms.lhs() - terms.rhs + galerkin) <= 10 * cfg.fp_tol * std::max(1.0, E));
        CHECK(terms.dissipation >= 0.0);
        // The three telescoping blocks are differences plus squared increments.
        const double du = norm_L2(next.u - prev.u);
        const double dphi = norm_L2(next.phi - prev.phi);
        const double ea = energy_E(next, p).kinetic - energy_E(prev, p).kinetic;
        CHECK(oracle::rel(terms.kinetic_block, ea + du * du / p.capK()) <= 1e-10);
        const double el = energy_E(next, p).l2_phi - energy_E(prev, p).l2_phi;
        CHECK(std::abs(terms.l2_block - (el + dphi * dphi)) <= 1e-12 * std::max(1.0, std::abs(terms.l2_block)));
      }
    }
  }
}

TEST_CASE("energy balance without forcing") {
  // The balance reads E^n - E^{n-1} + increments + dissipation + 2 alpha k (f_gamma(phi), phi)
  // + 2 alpha R = 0. The physical energy |u|^2/K + 2 free energy is nonincreasing.
  GridSpec g(16, 16);
  const auto p = fixture::params(g);
  StepperConfig cfg;
  cfg.k = 0.02;
  const auto log = run(random_start(g, 17, 4.0), 100, p, cfg);
  for (long n = 1; n <= log.n_steps(); ++n) {
    const auto& prev = log.states[n - 1];
    const auto& next = log.states[n];
    CHECK(physical_energy(next, p) <= physical_energy(prev, p) + 1e-12 * std::abs(physical_energy(prev, p)));
    const auto t = energy_identity_terms(prev, next, log.reports[n - 1].mu, p, cfg.k);
    const double dE = energy_E(next, p).total - energy_E(prev, p).total;
    const double increments = t.kinetic_block + t.gamma_block + t.l2_block + t.potential_diff - dE;
    CHECK(increments >= -1e-10 * std::max(1.0, energy_E(prev, p).total));
    CHECK(t.rhs == 0.0);
  }
}

TEST_CASE("remainder density and closed form") {
  GridSpec g(16, 16);
  const auto p = fixture::params(g);
  auto integral_form = [&p](double a, double b) {
    const double d = b - a;
    return d * oracle::simpson([&](double t) { return p.f_gamma(b) - p.f_gamma(a + t * d); }, 0.0, 1.0, 200);
  };
  // f_gamma(r) = r^3 - 1.2 r: (b - a) f_gamma(b) - int_a^b f_gamma at a = 0, b = 1 is 0.15.
  CHECK(remainder_density(0.0, 1.0, p) == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(std::abs(remainder_density(0.0, 1.0, p) - integral_form(0.0, 1.0)) <= 1e-14);
  CHECK(remainder_density(0.7, 0.7, p) == 0.0);
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(remainder_density(a, b, p) - integral_form(a, b)) <= 1e-13 * std::max(1.0, std::abs(b - a)));
  }
  // Constant fields: R = |Omega| times the density.
  const double R = remainder_closed_form(fixture::constant(g, 0.3), fixture::constant(g, -0.4), p);
  CHECK(R == doctest::Approx(kDomainArea * remainder_density(0.3, -0.4, p)).epsilon(1e-12));
}

TEST_CASE("remainder lower bound") {
  GridSpec g(16, 16);
  const auto p = fixture::params(g);
  const State s = random_start(g, 5, 2.0);
  const auto same = remainder_bound_check(s, s, p);
  CHECK(same.R_gamma == 0.0);
  CHECK(same.margin == 0.0);

  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const State a = random_start(g, 1000 + trial, 3.0 * u01(rng));
    const State d = random_start(g, 5000 + trial, 0.5 * u01(rng));
    const auto c = remainder_bound_check(a, a + d, p);
    worst = std::min(worst, c.margin / c.scale);
    CHECK(std::abs(c.R_gamma - remainder_closed_form(a.phi, (a + d).phi, p)) <= 1e-10 * c.scale);
  }
  CHECK(worst >= -1e-12);
}

TEST_CASE("stability constants") {
  const double kappa = kappa_candidate(1.0, 1.0, 0.1, 1.0, 0.5, 1.0);
  CHECK(kappa == doctest::Approx(0.1 / 2.3).epsilon(1e-15));
  CHECK(kappa == doctest::Approx(0.043478).epsilon(1e-5));
  const double rho0 = rho0_candidate(kappa, 1.0, 1.0, 1.0, 1.0, 0.0);
  CHECK(rho0 * rho0 == doctest::Approx(23.0).epsilon(1e-14));
  CHECK(rho0_candidate(0.043478, 1.0, 1.0, 1.0, 1.0, 0.0) == doctest::Approx(std::sqrt(23.0)).epsilon(1e-5));
  CHECK(kappa_candidate(1.0, 1.0, 0.1, 1.0, 0.5, 0.0) == doctest::Approx(0.1 / 1.1).epsilon(1e-15));
  CHECK(kappa_candidate(0.1, 1.0, 0.1, 1.0, 0.5, 0.0) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS(kappa_candidate(0.0, 1.0, 0.1, 1.0, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(kappa_candidate(1.0, 1.0, 0.1, 1.0, 0.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(rho0_candidate(0.0, 1.0, 1.0, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rho0_candidate(1.0, 1.0, 1.0, 1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("dissipation and increment sums") {
  GridSpec g(16, 16);
  const auto p = fixture::params(g);
  StepperConfig cfg;
  cfg.k = 0.05;

  const auto zero = run(State(g), 3, p, cfg);
  CHECK(dissipation_sums(zero, 1, 3).M1 == 0.0);
  CHECK(dissipation_sums(zero, 1, 3).M2 == 0.0);
  CHECK(increment_sums(zero, 1, 3) == 0.0);
  CHECK_THROWS_AS(dissipation_sums(zero, 0, 2), std::out_of_range);
  CHECK_THROWS_AS(dissipation_sums(zero, 2, 4), std::out_of_range);
  CHECK_THROWS_AS(increment_sums(zero, 3, 2), std::out_of_range);

  const double a0 = 1.3;
  const auto tg = run(State(taylor_green(g, a0), SpectralScalar(g)), 1, p, cfg);
  const double a1 = a0 / (1 + 2 * p.nu1() * cfg.k);
  const double H1sq = 4 * pi * pi * a1 * a1;
  CHECK(oracle::rel(dissipation_sums(tg, 1, 1).M1, cfg.k * p.nu1() / (2 * p.capK()) * H1sq) <= 1e-10);
  CHECK(dissipation_sums(tg, 1, 1).M2 == 0.0);
  CHECK(oracle::rel(increment_sums(tg, 1, 1), 4 * pi * pi * (a1 - a0) * (a1 - a0)) <= 1e-8);

  const auto log = run(random_start(g, 21, 2.0), 10, p, cfg);
  double prev1 = 0, prev2 = 0, prev_inc = 0;
  for (long n = 2; n <= 10; ++n) {
    const auto s = dissipation_sums(log, 2, n);
    const double inc = increment_sums(log, 2, n);
    CHECK(s.M1 >= prev1);
    CHECK(s.M2 >= prev2);
    CHECK(inc >= prev_inc);
    prev1 = s.M1;
    prev2 = s.M2;
    prev_inc = inc;
  }
}

TEST_CASE("audit records agree with the individual diagnostics") {
  GridSpec g(16, 16);
  const auto p = forced_params(g, 54, 0.5);
  StepperConfig cfg;
  const auto log = run(random_start(g, 22, 2.0), 3, p, cfg);
  const auto r0 = audit_initial(log.states[0], p);
  CHECK(r0.n == 0);
  CHECK(r0.energy.total == energy_E(log.states[0], p).total);
  for (long n = 1; n <= 3; ++n) {
    const auto& rep = log.reports[n - 1];
    const auto r = audit_step(n, log.states[n - 1], log.states[n], rep.mu, p, cfg.k, rep.iterations);
    CHECK(r.t == doctest::Approx(n * cfg.k));
    CHECK(r.identity_residual == energy_identity_residual(log.states[n - 1], log.states[n], rep.mu, p, cfg.k));
    CHECK(r.norm_V == norm_V(log.states[n], p));
    CHECK(r.dissipation_M1 >= 0.0);
    CHECK(r.dissipation_M2 >= 0.0);
    CHECK(r.increment >= 0.0);
    CHECK(r.dissipation_M1 == doctest::Approx(dissipation_sums(log, n, n).M1).epsilon(1e-13));
    CHECK(r.increment == doctest::Approx(increment_sums(log, n, n)).epsilon(1e-13));
    CHECK(r.iterations == rep.iterations);
  }
}

TEST_CASE("CSV rows") {
  CHECK(std::string(DiagnosticsCsv::header()) ==
        "n,t,|u|_L2,norm_H1_u,norm_gamma_phi,norm_V,E_total,E_kinetic,E_gamma,E_potential,E_l2,"
        "identity_residual,remainder_margin,iterations");
  AuditRecord r;
  r.n = 4;
  r.t = 0.1 + 0.2;
  r.energy.total = 1e-300;
  r.iterations = 7;
  const auto row = DiagnosticsCsv::row(r);
  CHECK(std::count(row.begin(), row.end(), ',') == 13);
  CHECK(row.find('\n') == std::string::npos);
  CHECK(row.rfind("4,0.30000000000000004,", 0) == 0);
  CHECK(row.substr(row.size() - 2) == ",7");

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = std::pow(10.0, u(rng)) * (trial % 2 ? -1 : 1);
    const auto s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
    CHECK(s.find(',') == std::string::npos);
  }
}
