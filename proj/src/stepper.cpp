#include "pfa/stepper.hpp"

#include <cmath>
#include <sstream>

namespace pfa {

void StepperConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("stepper.k must be positive");
  if (!(fp_tol > 0.0)) throw ValidationError("stepper.fp_tol must be positive");
  if (max_iter < 1) throw ValidationError("stepper.max_iter must be >= 1");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ValidationError("stepper.relaxation must lie in (0, 1]");
  if (!(fallback_relaxation >= 0.0 && fallback_relaxation <= 1.0)) {
    throw ValidationError("stepper.fallback_relaxation must lie in [0, 1]");
  }
}

namespace {

std::string nonconv_message(int iterations, double residual, double k) {
  std::ostringstream os;
  os << "fixed-point iteration did not converge after " << iterations << " iterations (relative increment "
     << residual << ", k = " << k
     << "); uniqueness and contractivity of the implicit step hold only for small k, try a smaller k";
  return os.str();
}

// Multiplies every coefficient by w(|k|^2).
template <class W>
CoeffArray diag_scaled(const GridSpec& g, const CoeffArray& in, W&& w) {
  CoeffArray out(in.rows(), in.cols());
  for (int r = 0; r < in.rows(); ++r) {
    const double k2 = g.wavenumber_y(r);
    for (int c = 0; c < in.cols(); ++c) {
      const double k1 = g.wavenumber_x(c);
      out(r, c) = in(r, c) * w(k1 * k1 + k2 * k2);
    }
  }
  return out;
}

// All nonlinear terms of the scheme at one iterate, from a single set of
// transforms: the unprojected velocity forcing -(u.grad)u + K (nu2 A_g phi) grad phi
// and the phase forcing -alpha f_gamma(phi) - u.grad phi.
class FusedNonlinearity {
 public:
  explicit FusedNonlinearity(const ModelParams& p) : p_(p) {
    const auto [my, mx] = p.grid().grid_for_arity(std::max(2, p.potential().degree()));
    my_ = my;
    mx_ = mx;
  }

  void evaluate(const State& x, SolenoidalVector& nu, SpectralScalar& nphi) const {
    const auto& g = p_.grid();
    auto syn = [&](const SpectralScalar& f) { return detail::synthesize(g, f.coeffs(), my_, mx_); };
    const auto gu1 = gradient(x.u.ux());
    const auto gu2 = gradient(x.u.uy());
    const auto gph = gradient(x.phi);
    const GridValues u1 = syn(x.u.ux()), u2 = syn(x.u.uy());
    const GridValues phx = syn(gph.x), phy = syn(gph.y);
    const GridValues m = syn(p_.nu2() * apply_A_gamma(x.phi, p_.gamma()));
    const GridValues ph = syn(x.phi);
    const double K = p_.capK();
    const GridValues wx = K * m * phx - (u1 * syn(gu1.x) + u2 * syn(gu1.y));
    const GridValues wy = K * m * phy - (u1 * syn(gu2.x) + u2 * syn(gu2.y));
    const auto& fc = p_.f_gamma_coefficients();
    const GridValues np =
        -p_.alpha() * ph.unaryExpr([&fc](double r) { return poly_eval(fc, r); }) - (u1 * phx + u2 * phy);
    nu = leray_project(VectorField{SpectralScalar(SpectralScalar::Trusted{}, g, detail::analyze(g, wx)),
                                   SpectralScalar(SpectralScalar::Trusted{}, g, detail::analyze(g, wy))});
    nphi = SpectralScalar(SpectralScalar::Trusted{}, g, detail::analyze(g, np));
  }

 private:
  const ModelParams& p_;
  int my_, mx_;
};

}  // namespace

NonConvergence::NonConvergence(int it, double res, double k)
    : std::runtime_error(nonconv_message(it, res, k)), iterations(it), residual(res) {}

Divergence::Divergence(int it)
    : std::runtime_error("fixed-point iteration produced non-finite values at iteration " + std::to_string(it) +
                         "; try a smaller k or a relaxation factor < 1"),
      iteration(it) {}

StepError::StepError(long s, bool div, const std::string& what, std::shared_ptr<TrajectoryLog> p)
    : std::runtime_error("step " + std::to_string(s) + ": " + what), step(s), diverged(div), partial(std::move(p)) {}

namespace {

std::pair<State, StepReport> picard(const State& prev, const ModelParams& params, const StepperConfig& cfg,
                                    double omega) {
  const auto& g = params.grid();
  const double k = cfg.k;
  const auto w = params.weights();

  const CoeffArray lin_u_inv = diag_scaled(g, CoeffArray::Ones(g.ny(), g.nx()),
                                           [&](double q) { return 1.0 / (1.0 + k * params.nu1() * q); });
  const CoeffArray lin_phi_inv =
      diag_scaled(g, CoeffArray::Ones(g.ny(), g.nx()),
                  [&](double q) { return 1.0 / (1.0 + k * params.nu2() * (q + params.gamma())); });
  const SolenoidalVector u_rhs0 = prev.u + k * params.forcing();

  FusedNonlinearity nl(params);
  State x = prev;
  SolenoidalVector nu(g);
  SpectralScalar nphi(g);
  StepReport report(g);
  report.relaxation = omega;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    nl.evaluate(x, nu, nphi);
    const SolenoidalVector ru = u_rhs0 + k * nu;
    const SpectralScalar rphi = prev.phi + k * nphi;
    State y(SolenoidalVector(SolenoidalVector::Trusted{},
                             SpectralScalar(SpectralScalar::Trusted{}, g, ru.ux().coeffs() * lin_u_inv),
                             SpectralScalar(SpectralScalar::Trusted{}, g, ru.uy().coeffs() * lin_u_inv)),
            SpectralScalar(SpectralScalar::Trusted{}, g, rphi.coeffs() * lin_phi_inv));
    if (omega != 1.0) y = x + omega * (y - x);
    const double inc = norm_Y(y - x, w);
    const double den = norm_Y(y, w);
    if (!std::isfinite(inc) || !std::isfinite(den)) throw Divergence(it);
    const double rel = inc == 0.0 ? 0.0 : (den > 0.0 ? inc / den : std::numeric_limits<double>::infinity());
    x = std::move(y);
    report.iterations = it;
    report.residual = rel;
    if (rel <= cfg.fp_tol) {
      report.mu = chemical_potential(x.phi, params);
      return {std::move(x), std::move(report)};
    }
  }
  throw NonConvergence(cfg.max_iter, report.residual, k);
}

}  // namespace

std::pair<State, StepReport> implicit_step(const State& prev, const ModelParams& params, const StepperConfig& cfg) {
  cfg.validate();
  require_same_grid(params.grid(), prev.grid(), "implicit_step");
  if (cfg.fallback_relaxation <= 0.0 || cfg.fallback_relaxation == cfg.relaxation) {
    return picard(prev, params, cfg, cfg.relaxation);
  }
  try {
    return picard(prev, params, cfg, cfg.relaxation);
  } catch (const NonConvergence&) {
  } catch (const Divergence&) {
  }
  return picard(prev, params, cfg, cfg.fallback_relaxation);
}

double scheme_residual(const State& prev, const State& next, const ModelParams& p, double k) {
  const auto& u = next.u;
  const auto& phi = next.phi;
  const SolenoidalVector ru = u + k * p.nu1() * apply_A(u) + k * B0(u, u) -
                              (p.capK() * k) * R0(p.nu2() * apply_A_gamma(phi, p.gamma()), phi) - prev.u -
                              k * p.forcing();
  const SpectralScalar mu = chemical_potential(phi, p);
  const SpectralScalar rphi = phi + k * mu + k * B1(u, phi) - prev.phi;
  const double scale = std::max({norm_Y(next, p), norm_Y(prev, p), 1e-300});
  return norm_Y(State(ru, rphi), p) / scale;
}

TrajectoryLog run(const State& initial, long n_steps, const ModelParams& params, const StepperConfig& cfg,
                  const StepHook& hook) {
  if (n_steps < 1) throw std::invalid_argument("run: n_steps must be >= 1");
  cfg.validate();
  TrajectoryLog log{{initial}, {}, params, cfg};
  log.states.reserve(n_steps + 1);
  log.reports.reserve(n_steps);
  for (long n = 1; n <= n_steps; ++n) {
    try {
      auto [next, rep] = implicit_step(log.states.back(), params, cfg);
      if (hook) hook(n, log.states.back(), next, rep);
      log.states.push_back(std::move(next));
      log.reports.push_back(std::move(rep));
    } catch (const NonConvergence& e) {
      throw StepError(n, false, e.what(), std::make_shared<TrajectoryLog>(std::move(log)));
    } catch (const Divergence& e) {
      throw StepError(n, true, e.what(), std::make_shared<TrajectoryLog>(std::move(log)));
    }
  }
  return log;
}

State advance(const State& initial, long n_steps, const ModelParams& params, const StepperConfig& cfg,
              const StepHook& hook) {
  if (n_steps < 0) throw std::invalid_argument("advance: n_steps must be >= 0");
  State x = initial;
  for (long n = 1; n <= n_steps; ++n) {
    try {
      auto [next, rep] = implicit_step(x, params, cfg);
      if (hook) hook(n, x, next, rep);
      x = std::move(next);
    } catch (const NonConvergence& e) {
      throw StepError(n, false, e.what(), nullptr);
    } catch (const Divergence& e) {
      throw StepError(n, true, e.what(), nullptr);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------

namespace {
// Interval index n (1-based) containing t, with t = (n-1)k snapped exactly.
long interval_of(const TrajectoryLog& log, double t) {
  const double k = log.k();
  const long N = log.n_steps();
  if (!(t >= 0.0) || t >= double(N) * k) {
    throw std::out_of_range("interpolant: t = " + std::to_string(t) + " outside [0, " +
                            std::to_string(double(N) * k) + ")");
  }
  const double q = t / k;
  const double r = std::round(q);
  long m = std::abs(q - r) <= 1e-9 * std::max(1.0, r) ? static_cast<long>(r) : static_cast<long>(std::floor(q));
  return std::min(std::max(m + 1, 1L), N);
}
}  // namespace

State interp_pc(const TrajectoryLog& log, double t) { return log.states[interval_of(log, t)]; }

State interp_lin(const TrajectoryLog& log, double t) {
  const long n = interval_of(log, t);
  const double s = t / log.k() - double(n);
  const State& a = log.states[n - 1];
  const State& b = log.states[n];
  // interval_of snaps t ~ (n-1)k onto this interval's left end.
  if (std::abs(s + 1.0) <= 1e-9 * std::max(1.0, double(n))) return a;
  return b + s * (b - a);
}

std::pair<SolenoidalVector, SpectralScalar> consistency_terms(const State& prev, const State& next, double s,
                                                              const ModelParams& p) {
  const SolenoidalVector du = s * (next.u - prev.u);
  const SpectralScalar dphi = s * (next.phi - prev.phi);
  const SolenoidalVector ut = next.u + du;
  const SpectralScalar pt = next.phi + dphi;
  const double gm = p.gamma();
  SolenoidalVector gk = p.nu1() * apply_A(du) + B0(du, ut) + B0(next.u, du) -
                        p.capK() * (R0(p.nu2() * apply_A_gamma(dphi, gm), pt) +
                                    R0(p.nu2() * apply_A_gamma(next.phi, gm), dphi));
  SpectralScalar hk = B1(du, pt) + B1(next.u, dphi) + p.nu2() * apply_A_gamma(dphi, gm) +
                      p.alpha() * (eval_f_gamma(pt, p) - eval_f_gamma(next.phi, p));
  return {std::move(gk), std::move(hk)};
}

ConsistencyResiduals consistency_residuals(const TrajectoryLog& log, const ModelParams& p,
                                           std::optional<double> T_star) {
  const double k = log.k();
  const long N = log.n_steps();
  if (N < 1) throw std::invalid_argument("consistency_residuals: empty log");
  long n_end = N;
  if (T_star) {
    const double q = *T_star / k;
    n_end = std::lround(q);
    if (std::abs(q - double(n_end)) > 1e-9 * std::max(1.0, q) || n_end < 1 || n_end > N) {
      throw std::out_of_range("consistency_residuals: T* must be a positive multiple of k within the log");
    }
  }
  // Three-point Gauss-Legendre on s in [-1, 0].
  const double h = 0.5 * std::sqrt(0.6);
  const double nodes[3] = {-0.5 - h, -0.5, -0.5 + h};
  const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  ConsistencyResiduals out{{}, double(n_end) * k, 0.0, 0.0};
  out.intervals.reserve(n_end);
  for (long n = 1; n <= n_end; ++n) {
    ConsistencyInterval iv{n, {}, {}};
    for (int q = 0; q < 3; ++q) {
      const auto [gk, hk] = consistency_terms(log.states[n - 1], log.states[n], nodes[q], p);
      iv.g_dual[q] = dual_norm_Vprime(gk);
      iv.h_dual[q] = dual_norm_DAgamma_prime(hk, p.gamma());
      out.int_g_sq += k * weights[q] * iv.g_dual[q] * iv.g_dual[q];
      out.int_h_sq += k * weights[q] * iv.h_dual[q] * iv.h_dual[q];
    }
    out.intervals.push_back(iv);
  }
  return out;
}

}  // namespace pfa
