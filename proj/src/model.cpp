#include "pfa/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace pfa {

namespace {

std::vector<double> derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
  return d;
}

std::vector<double> trimmed(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

// Real roots of an ascending-coefficient polynomial via the companion matrix,
// polished with a few Newton steps.
std::vector<double> real_roots(const std::vector<double>& c) {
  const auto p = trimmed(c);
  const int n = static_cast<int>(p.size()) - 1;
  if (n < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p[i] / p[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  const auto dp = derivative(p);
  std::vector<double> roots;
  for (int i = 0; i < n; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) continue;
    double r = z.real();
    for (int it = 0; it < 4; ++it) {
      const double d = poly_eval(dp, r);
      if (d == 0.0) break;
      r -= poly_eval(p, r) / d;
    }
    roots.push_back(r);
  }
  return roots;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double poly_eval(const std::vector<double>& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
  return acc;
}

double poly_min_over_reals(const std::vector<double>& c) {
  const auto p = trimmed(c);
  if (p.size() == 1) return p[0];
  const auto crit = real_roots(derivative(p));
  double best = std::numeric_limits<double>::infinity();
  for (double r : crit) best = std::min(best, poly_eval(p, r));
  return best;
}

// ---------------------------------------------------------------------------

PotentialSpec::PotentialSpec(std::vector<double> coefficients, double F0)
    : coeffs_(trimmed(std::move(coefficients))), F0_(F0) {
  if (coeffs_.empty()) throw ValidationError("potential: no coefficients");
  for (double v : coeffs_) {
    if (!std::isfinite(v)) throw ValidationError("potential: non-finite coefficient");
  }
  if (!std::isfinite(F0_)) throw ValidationError("potential: non-finite F0");
  if (degree() % 2 == 0) {
    throw ValidationError("potential: degree of f must be odd (got " + std::to_string(degree()) +
                          ") so that f' -> +inf as |r| -> inf");
  }
  if (coeffs_.back() <= 0.0) {
    throw ValidationError("potential: leading coefficient of f must be positive");
  }
  min_fprime_ = poly_min_over_reals(derivative(coeffs_));
}

PotentialSpec PotentialSpec::double_well() { return PotentialSpec({0.0, -1.0, 0.0, 1.0}, 0.25); }

double PotentialSpec::f(double r) const { return poly_eval(coeffs_, r); }
double PotentialSpec::fprime(double r) const { return poly_eval(derivative(coeffs_), r); }

double PotentialSpec::F(double r) const {
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * r + coeffs_[i] / double(i + 1);
  return F0_ + acc * r;
}

// ---------------------------------------------------------------------------

ModelParams::ModelParams(PhysicalConstants constants, PotentialSpec potential,
                         SolenoidalVector forcing, std::optional<double> c_F_gamma_override)
    : c_(constants), potential_(std::move(potential)), forcing_(std::move(forcing)) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("model.") + name + " must be a finite positive number (got " +
                            fmt(v) + ")");
    }
  };
  positive(c_.nu1, "nu1");
  positive(c_.nu2, "nu2");
  positive(c_.alpha, "alpha");
  positive(c_.capK, "capK");
  positive(c_.gamma, "gamma");
  if (c_.nu2 > c_.alpha) {
    throw ValidationError("model.nu2: standing assumption nu2 <= alpha violated (nu2 = " +
                          fmt(c_.nu2) + " > alpha = " + fmt(c_.alpha) + ")");
  }
  const double bound = -1.0 / (2.0 * c_.alpha);
  if (potential_.min_fprime() < bound) {
    throw ValidationError("model.potential: lower-bound condition f'(r) >= -1/(2 alpha) violated: min f' = " +
                          fmt(potential_.min_fprime()) + " < -1/(2 alpha) = " + fmt(bound));
  }
  if (forcing_.ux().mean() != 0.0 || forcing_.uy().mean() != 0.0) {
    throw ValidationError("model.forcing: must have zero mean");
  }

  f_gamma_ = potential_.coefficients();
  if (f_gamma_.size() < 2) f_gamma_.resize(2, 0.0);
  f_gamma_[1] -= c_.nu2 * c_.gamma / c_.alpha;

  // F_gamma(r) = F0 + sum c_i r^{i+1} / (i+1) with the shifted coefficients.
  std::vector<double> Fg(f_gamma_.size() + 1, 0.0);
  Fg[0] = potential_.F0();
  for (std::size_t i = 0; i < f_gamma_.size(); ++i) Fg[i + 1] = f_gamma_[i] / double(i + 1);
  min_F_gamma_ = poly_min_over_reals(Fg);

  if (c_F_gamma_override) {
    if (!(*c_F_gamma_override >= -min_F_gamma_)) {
      throw ValidationError("model.c_F_gamma: F_gamma + C_F_gamma >= 0 requires C_F_gamma >= " +
                            fmt(-min_F_gamma_) + " (got " + fmt(*c_F_gamma_override) + ")");
    }
    c_F_gamma_ = *c_F_gamma_override;
  } else {
    c_F_gamma_ = std::max(0.0, -min_F_gamma_) + 1e-12;
  }
}

double ModelParams::f_gamma(double r) const { return poly_eval(f_gamma_, r); }

double ModelParams::F_gamma(double r) const {
  return potential_.F(r) - c_.nu2 * c_.gamma * r * r / (2.0 * c_.alpha);
}

ModelParams ModelParams::with_forcing(SolenoidalVector forcing) const {
  require_same_grid(grid(), forcing.grid(), "ModelParams::with_forcing");
  return ModelParams(c_, potential_, std::move(forcing), c_F_gamma_);
}

double norm_Y(const State& s, const ModelParams& p) { return norm_Y(s, p.weights()); }
double norm_V(const State& s, const ModelParams& p) { return norm_V(s, p.weights()); }

// ---------------------------------------------------------------------------

namespace {
// Sum of pointwise products a_i * b_i on the padded grid, truncated.
SpectralScalar dot_on_padded(const GridSpec& g, std::span<const SpectralScalar* const> a,
                             std::span<const SpectralScalar* const> b) {
  const int my = g.padded_ny(), mx = g.padded_nx();
  GridValues acc = GridValues::Zero(my, mx);
  for (std::size_t i = 0; i < a.size(); ++i) {
    require_same_grid(g, a[i]->grid(), "dealiased product");
    require_same_grid(g, b[i]->grid(), "dealiased product");
    acc += detail::synthesize(g, a[i]->coeffs(), my, mx) * detail::synthesize(g, b[i]->coeffs(), my, mx);
  }
  return SpectralScalar(SpectralScalar::Trusted{}, g, detail::analyze(g, acc));
}
}  // namespace

VectorField advect(const SolenoidalVector& u, const SolenoidalVector& v) {
  const auto& g = u.grid();
  require_same_grid(g, v.grid(), "advect");
  const auto gx = gradient(v.ux());
  const auto gy = gradient(v.uy());
  const SpectralScalar* uu[] = {&u.ux(), &u.uy()};
  const SpectralScalar* dvx[] = {&gx.x, &gx.y};
  const SpectralScalar* dvy[] = {&gy.x, &gy.y};
  return {dot_on_padded(g, uu, dvx), dot_on_padded(g, uu, dvy)};
}

double b0(const SolenoidalVector& u, const SolenoidalVector& v, const SolenoidalVector& w) {
  require_same_grid(u.grid(), w.grid(), "b0");
  return inner_L2(advect(u, v), w);
}

SolenoidalVector B0(const SolenoidalVector& u, const SolenoidalVector& v) {
  return leray_project(advect(u, v));
}

SpectralScalar B1(const SolenoidalVector& u, const SpectralScalar& phi) {
  const auto& g = u.grid();
  require_same_grid(g, phi.grid(), "B1");
  const auto dphi = gradient(phi);
  const SpectralScalar* uu[] = {&u.ux(), &u.uy()};
  const SpectralScalar* dp[] = {&dphi.x, &dphi.y};
  return dot_on_padded(g, uu, dp);
}

double b1(const SolenoidalVector& u, const SpectralScalar& phi, const SpectralScalar& psi) {
  require_same_grid(u.grid(), psi.grid(), "b1");
  return inner_L2(B1(u, phi), psi);
}

SolenoidalVector R0(const SpectralScalar& mu, const SpectralScalar& phi) {
  require_same_grid(mu.grid(), phi.grid(), "R0");
  const auto dphi = gradient(phi);
  return leray_project(VectorField{dealiased_product(mu, dphi.x), dealiased_product(mu, dphi.y)});
}

// ---------------------------------------------------------------------------

SpectralScalar eval_f(const SpectralScalar& phi, const PotentialSpec& potential) {
  const SpectralScalar* in[] = {&phi};
  const auto& c = potential.coefficients();
  return apply_pointwise(in, potential.degree(), [&c](std::span<const double> v) { return poly_eval(c, v[0]); });
}

SpectralScalar eval_f_gamma(const SpectralScalar& phi, const ModelParams& p) {
  require_same_grid(phi.grid(), p.grid(), "eval_f_gamma");
  const SpectralScalar* in[] = {&phi};
  const auto& c = p.f_gamma_coefficients();
  return apply_pointwise(in, p.potential().degree(),
                         [&c](std::span<const double> v) { return poly_eval(c, v[0]); });
}

double F_gamma_integral(const SpectralScalar& phi, const ModelParams& p) {
  require_same_grid(phi.grid(), p.grid(), "F_gamma_integral");
  const SpectralScalar* in[] = {&phi};
  return integrate_pointwise(in, p.potential().degree() + 1,
                             [&p](std::span<const double> v) { return p.F_gamma(v[0]); });
}

double free_energy(const SpectralScalar& phi, const ModelParams& p) {
  require_same_grid(phi.grid(), p.grid(), "free_energy");
  const SpectralScalar* in[] = {&phi};
  const auto& pot = p.potential();
  const double bulk =
      integrate_pointwise(in, pot.degree() + 1, [&pot](std::span<const double> v) { return pot.F(v[0]); });
  const double grad = norm_H1(phi);
  return 0.5 * p.nu2() * grad * grad + p.alpha() * bulk;
}

SpectralScalar chemical_potential(const SpectralScalar& phi, const ModelParams& p) {
  return p.nu2() * apply_A_gamma(phi, p.gamma()) + p.alpha() * eval_f_gamma(phi, p);
}

}  // namespace pfa
