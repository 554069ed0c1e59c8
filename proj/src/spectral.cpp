#include "pfa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace pfa {

namespace {

int smallest_even_above(int bound) {
  int m = bound + 1;
  return m % 2 == 0 ? m : m + 1;
}

// Smallest even size on which a product with the given total polynomial
// degree (counting the truncation back onto the grid) is alias-free.
int min_size_for(int n, int degree_plus_truncation) {
  return smallest_even_above(degree_plus_truncation * (n / 2 - 1));
}

class PlanCache {
 public:
  struct Plans {
    fftw_plan c2r;
    fftw_plan r2c;
  };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  Plans get(int my, int mx) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({my, mx});
    if (it != plans_.end()) return it->second;
    std::vector<double> real(static_cast<std::size_t>(my) * mx);
    std::vector<Complex> half(static_cast<std::size_t>(my) * (mx / 2 + 1));
    auto* h = reinterpret_cast<fftw_complex*>(half.data());
    Plans p;
    p.c2r = fftw_plan_dft_c2r_2d(my, mx, h, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.r2c = fftw_plan_dft_r2c_2d(my, mx, real.data(), h, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::make_pair(my, mx), p);
    return p;
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.c2r);
      fftw_destroy_plan(p.r2c);
    }
  }
  std::mutex mutex_;
  std::map<std::pair<int, int>, Plans> plans_;
};

std::vector<Complex>& half_scratch(std::size_t size) {
  thread_local std::vector<Complex> buf;
  if (buf.size() < size) buf.resize(size);
  return buf;
}

template <typename F>
void for_each_mode(const GridSpec& g, F&& f) {
  for (int r = 0; r < g.ny(); ++r) {
    const int k2 = g.wavenumber_y(r);
    for (int c = 0; c < g.nx(); ++c) {
      f(r, c, g.wavenumber_x(c), k2);
    }
  }
}

// Multiplies every coefficient by a real weight w(k1, k2) that is even in k.
template <typename W>
CoeffArray weighted(const GridSpec& g, const CoeffArray& in, W&& weight) {
  CoeffArray out(in.rows(), in.cols());
  for_each_mode(g, [&](int r, int c, int k1, int k2) { out(r, c) = in(r, c) * weight(k1, k2); });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

GridSpec::GridSpec(int nx, int ny, double pad_factor) : nx_(nx), ny_(ny), pad_factor_(pad_factor) {
  if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0) {
    throw DomainError("GridSpec: mode counts must be even and >= 4 (got " + std::to_string(nx) +
                      "x" + std::to_string(ny) + ")");
  }
  if (!(pad_factor >= 1.0)) throw DomainError("GridSpec: pad_factor must be >= 1");
  padded_nx_ = std::max(nx, static_cast<int>(std::ceil(pad_factor * nx - 1e-9)));
  padded_ny_ = std::max(ny, static_cast<int>(std::ceil(pad_factor * ny - 1e-9)));
  padded_nx_ += padded_nx_ % 2;
  padded_ny_ += padded_ny_ % 2;
  if (max_exact_arity() < 3) {
    throw DomainError("GridSpec: pad_factor " + std::to_string(pad_factor) +
                      " cannot represent cubic products exactly (need >= 2)");
  }
}

int GridSpec::max_exact_arity() const {
  auto arity = [](int padded, int n) { return (padded - 1) / (n / 2 - 1) - 1; };
  return std::min(arity(padded_nx_, nx_), arity(padded_ny_, ny_));
}

std::pair<int, int> GridSpec::grid_for_arity(int arity) const {
  return {std::max(padded_ny_, min_size_for(ny_, arity + 1)),
          std::max(padded_nx_, min_size_for(nx_, arity + 1))};
}

bool GridSpec::contains_mode(int k1, int k2) const {
  return std::abs(k1) < nx_ / 2 && std::abs(k2) < ny_ / 2;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) throw ShapeError(std::string(where) + ": grid mismatch");
}

// ---------------------------------------------------------------------------

namespace detail {

GridValues synthesize(const GridSpec& g, const CoeffArray& coeffs, int my, int mx) {
  if (my < g.ny() || mx < g.nx() || my % 2 != 0 || mx % 2 != 0) {
    throw ShapeError("synthesize: output grid smaller than the mode set");
  }
  const int hx = mx / 2 + 1;
  auto& half = half_scratch(static_cast<std::size_t>(my) * hx);
  std::fill(half.begin(), half.begin() + static_cast<std::ptrdiff_t>(my) * hx, Complex{});
  for (int r = 0; r < g.ny(); ++r) {
    if (r == g.ny() / 2) continue;
    const int k2 = g.wavenumber_y(r);
    Complex* dst = half.data() + static_cast<std::ptrdiff_t>((k2 + my) % my) * hx;
    for (int c = 0; c < g.nx() / 2; ++c) dst[c] = coeffs(r, c);
  }
  GridValues out(my, mx);
  auto plans = PlanCache::instance().get(my, mx);
  fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(half.data()), out.data());
  return out;
}

CoeffArray analyze(const GridSpec& g, const GridValues& values) {
  const int my = static_cast<int>(values.rows());
  const int mx = static_cast<int>(values.cols());
  if (my < g.ny() || mx < g.nx() || my % 2 != 0 || mx % 2 != 0) {
    throw ShapeError("analyze: input grid smaller than the mode set");
  }
  const int hx = mx / 2 + 1;
  auto& half = half_scratch(static_cast<std::size_t>(my) * hx);
  auto plans = PlanCache::instance().get(my, mx);
  // r2c with FFTW_UNALIGNED does not modify its input.
  fftw_execute_dft_r2c(plans.r2c, const_cast<double*>(values.data()),
                       reinterpret_cast<fftw_complex*>(half.data()));
  const double scale = 1.0 / (static_cast<double>(my) * mx);

  CoeffArray out = CoeffArray::Zero(g.ny(), g.nx());
  const int kmax2 = g.ny() / 2 - 1;
  const int kmax1 = g.nx() / 2 - 1;
  for (int k2 = -kmax2; k2 <= kmax2; ++k2) {
    const Complex* src = half.data() + static_cast<std::ptrdiff_t>((k2 + my) % my) * hx;
    const int r = g.row_of(k2);
    const int rm = g.row_of(-k2);
    for (int k1 = 1; k1 <= kmax1; ++k1) {
      const Complex v = src[k1] * scale;
      out(r, k1) = v;
      out(rm, g.col_of(-k1)) = std::conj(v);
    }
  }
  // k1 = 0 column: keep exact symmetry between k2 and -k2.
  out(0, 0) = Complex(half[0].real() * scale, 0.0);
  for (int k2 = 1; k2 <= kmax2; ++k2) {
    const Complex v = half[static_cast<std::size_t>(k2) * hx] * scale;
    out(g.row_of(k2), 0) = v;
    out(g.row_of(-k2), 0) = std::conj(v);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

SpectralScalar::SpectralScalar(const GridSpec& grid)
    : grid_(grid), coeffs_(CoeffArray::Zero(grid.ny(), grid.nx())) {}

SpectralScalar::SpectralScalar(const GridSpec& grid, CoeffArray coeffs) : grid_(grid) {
  if (coeffs.rows() != grid.ny() || coeffs.cols() != grid.nx()) {
    throw ShapeError("SpectralScalar: coefficient array is " + std::to_string(coeffs.rows()) +
                     "x" + std::to_string(coeffs.cols()) + ", grid expects " +
                     std::to_string(grid.ny()) + "x" + std::to_string(grid.nx()));
  }
  coeffs_ = CoeffArray::Zero(grid.ny(), grid.nx());
  for_each_mode(grid, [&](int r, int c, int k1, int k2) {
    if (grid.is_nyquist(r, c)) return;
    const Complex partner = coeffs(grid.row_of(-k2), grid.col_of(-k1));
    coeffs_(r, c) = 0.5 * (coeffs(r, c) + std::conj(partner));
  });
}

SpectralScalar SpectralScalar::from_grid(const GridValues& values, const GridSpec& grid) {
  if (values.rows() != grid.ny() || values.cols() != grid.nx()) {
    throw ShapeError("from_grid: values are " + std::to_string(values.rows()) + "x" +
                     std::to_string(values.cols()) + ", grid expects " +
                     std::to_string(grid.ny()) + "x" + std::to_string(grid.nx()));
  }
  return SpectralScalar(Trusted{}, grid, detail::analyze(grid, values));
}

GridValues SpectralScalar::to_grid() const { return to_grid(grid_.ny(), grid_.nx()); }

GridValues SpectralScalar::to_grid(int ny_out, int nx_out) const {
  return detail::synthesize(grid_, coeffs_, ny_out, nx_out);
}

Complex SpectralScalar::coeff(int k1, int k2) const {
  if (std::abs(k1) > grid_.nx() / 2 || std::abs(k2) > grid_.ny() / 2 || k1 == -grid_.nx() / 2 ||
      k2 == -grid_.ny() / 2) {
    throw ShapeError("coeff: wavevector outside the stored range");
  }
  return coeffs_(grid_.row_of(k2), grid_.col_of(k1));
}

double SpectralScalar::hermitian_defect() const {
  double worst = 0.0;
  for_each_mode(grid_, [&](int r, int c, int k1, int k2) {
    if (grid_.is_nyquist(r, c)) return;
    const Complex partner = coeffs_(grid_.row_of(-k2), grid_.col_of(-k1));
    worst = std::max(worst, std::abs(partner - std::conj(coeffs_(r, c))));
  });
  return worst;
}

bool SpectralScalar::nyquist_is_zero() const {
  return (coeffs_.row(grid_.ny() / 2) == Complex{}).all() &&
         (coeffs_.col(grid_.nx() / 2) == Complex{}).all();
}

SpectralScalar& SpectralScalar::operator+=(const SpectralScalar& other) {
  require_same_grid(grid_, other.grid_, "SpectralScalar +=");
  coeffs_ += other.coeffs_;
  return *this;
}

SpectralScalar& SpectralScalar::operator-=(const SpectralScalar& other) {
  require_same_grid(grid_, other.grid_, "SpectralScalar -=");
  coeffs_ -= other.coeffs_;
  return *this;
}

SpectralScalar& SpectralScalar::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

SpectralScalar from_modes(const GridSpec& grid, std::span<const Mode> modes) {
  CoeffArray c = CoeffArray::Zero(grid.ny(), grid.nx());
  for (const auto& m : modes) {
    if (!grid.contains_mode(m.k1, m.k2)) throw ShapeError("from_modes: mode outside grid");
    if (m.k1 == 0 && m.k2 == 0) {
      c(0, 0) += Complex(m.c.real(), 0.0);
      continue;
    }
    c(grid.row_of(m.k2), grid.col_of(m.k1)) += m.c;
    c(grid.row_of(-m.k2), grid.col_of(-m.k1)) += std::conj(m.c);
  }
  return SpectralScalar(SpectralScalar::Trusted{}, grid, std::move(c));
}

// ---------------------------------------------------------------------------

double SolenoidalVector::divergence_defect() const {
  const auto& g = grid();
  double worst = 0.0;
  for_each_mode(g, [&](int r, int c, int k1, int k2) {
    worst = std::max(worst, std::abs(double(k1) * ux_.coeffs()(r, c) +
                                     double(k2) * uy_.coeffs()(r, c)));
  });
  return worst;
}

SolenoidalVector& SolenoidalVector::operator+=(const SolenoidalVector& o) {
  ux_ += o.ux_;
  uy_ += o.uy_;
  return *this;
}
SolenoidalVector& SolenoidalVector::operator-=(const SolenoidalVector& o) {
  ux_ -= o.ux_;
  uy_ -= o.uy_;
  return *this;
}
SolenoidalVector& SolenoidalVector::operator*=(double s) {
  ux_ *= s;
  uy_ *= s;
  return *this;
}

State::State(SolenoidalVector u_, SpectralScalar phi_) : u(std::move(u_)), phi(std::move(phi_)) {
  require_same_grid(u.grid(), phi.grid(), "State");
}

State& State::operator+=(const State& o) {
  u += o.u;
  phi += o.phi;
  return *this;
}
State& State::operator-=(const State& o) {
  u -= o.u;
  phi -= o.phi;
  return *this;
}
State& State::operator*=(double s) {
  u *= s;
  phi *= s;
  return *this;
}

// ---------------------------------------------------------------------------

SpectralScalar apply_A_gamma(const SpectralScalar& phi, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("apply_A_gamma: gamma must be > 0");
  const auto& g = phi.grid();
  return SpectralScalar(SpectralScalar::Trusted{}, g,
                        weighted(g, phi.coeffs(), [gamma](int k1, int k2) {
                          return double(k1 * k1 + k2 * k2) + gamma;
                        }));
}

SpectralScalar apply_A_gamma_pow(const SpectralScalar& phi, double gamma, double s) {
  if (!(gamma > 0.0)) throw DomainError("apply_A_gamma_pow: gamma must be > 0");
  const auto& g = phi.grid();
  return SpectralScalar(SpectralScalar::Trusted{}, g,
                        weighted(g, phi.coeffs(), [gamma, s](int k1, int k2) {
                          return std::pow(double(k1 * k1 + k2 * k2) + gamma, s);
                        }));
}

SpectralScalar laplacian(const SpectralScalar& phi) {
  const auto& g = phi.grid();
  return SpectralScalar(SpectralScalar::Trusted{}, g,
                        weighted(g, phi.coeffs(),
                                 [](int k1, int k2) { return -double(k1 * k1 + k2 * k2); }));
}

SolenoidalVector apply_A(const SolenoidalVector& u) { return apply_A_pow(u, 1.0); }

SolenoidalVector apply_A_pow(const SolenoidalVector& u, double s) {
  const auto& g = u.grid();
  auto w = [s](int k1, int k2) {
    const int k2sum = k1 * k1 + k2 * k2;
    if (k2sum == 0) return 0.0;
    return s == 1.0 ? double(k2sum) : std::pow(double(k2sum), s);
  };
  return SolenoidalVector(SolenoidalVector::Trusted{},
                          SpectralScalar(SpectralScalar::Trusted{}, g, weighted(g, u.ux().coeffs(), w)),
                          SpectralScalar(SpectralScalar::Trusted{}, g, weighted(g, u.uy().coeffs(), w)));
}

VectorField gradient(const SpectralScalar& phi) {
  const auto& g = phi.grid();
  CoeffArray dx(g.ny(), g.nx()), dy(g.ny(), g.nx());
  const auto& c = phi.coeffs();
  for_each_mode(g, [&](int r, int col, int k1, int k2) {
    const Complex v = c(r, col);
    dx(r, col) = Complex(-double(k1) * v.imag(), double(k1) * v.real());
    dy(r, col) = Complex(-double(k2) * v.imag(), double(k2) * v.real());
  });
  return {SpectralScalar(SpectralScalar::Trusted{}, g, std::move(dx)),
          SpectralScalar(SpectralScalar::Trusted{}, g, std::move(dy))};
}

SpectralScalar divergence(const VectorField& v) {
  const auto& g = v.x.grid();
  require_same_grid(g, v.y.grid(), "divergence");
  CoeffArray out(g.ny(), g.nx());
  for_each_mode(g, [&](int r, int c, int k1, int k2) {
    const Complex s = double(k1) * v.x.coeffs()(r, c) + double(k2) * v.y.coeffs()(r, c);
    out(r, c) = Complex(-s.imag(), s.real());
  });
  return SpectralScalar(SpectralScalar::Trusted{}, g, std::move(out));
}

SpectralScalar divergence(const SolenoidalVector& u) { return divergence(VectorField{u.ux(), u.uy()}); }

SolenoidalVector leray_project(const VectorField& v) {
  const auto& g = v.x.grid();
  require_same_grid(g, v.y.grid(), "leray_project");
  CoeffArray ox(g.ny(), g.nx()), oy(g.ny(), g.nx());
  const auto& vx = v.x.coeffs();
  const auto& vy = v.y.coeffs();
  for_each_mode(g, [&](int r, int c, int k1, int k2) {
    const int kk = k1 * k1 + k2 * k2;
    if (kk == 0) {
      ox(r, c) = oy(r, c) = Complex{};
      return;
    }
    const Complex d = (double(k1) * vx(r, c) + double(k2) * vy(r, c)) / double(kk);
    ox(r, c) = vx(r, c) - double(k1) * d;
    oy(r, c) = vy(r, c) - double(k2) * d;
  });
  return SolenoidalVector(SolenoidalVector::Trusted{},
                          SpectralScalar(SpectralScalar::Trusted{}, g, std::move(ox)),
                          SpectralScalar(SpectralScalar::Trusted{}, g, std::move(oy)));
}

// ---------------------------------------------------------------------------

namespace {
double coeff_dot(const CoeffArray& a, const CoeffArray& b) {
  return kDomainArea * (a.real() * b.real() + a.imag() * b.imag()).sum();
}

template <typename W>
double weighted_sq(const GridSpec& g, const CoeffArray& a, W&& w) {
  double acc = 0.0;
  for_each_mode(g, [&](int r, int c, int k1, int k2) { acc += w(k1, k2) * std::norm(a(r, c)); });
  return kDomainArea * acc;
}
}  // namespace

double inner_L2(const SpectralScalar& a, const SpectralScalar& b) {
  require_same_grid(a.grid(), b.grid(), "inner_L2");
  return coeff_dot(a.coeffs(), b.coeffs());
}

double inner_L2(const SolenoidalVector& a, const SolenoidalVector& b) {
  return inner_L2(a.ux(), b.ux()) + inner_L2(a.uy(), b.uy());
}

double inner_L2(const VectorField& a, const SolenoidalVector& b) {
  return inner_L2(a.x, b.ux()) + inner_L2(a.y, b.uy());
}

double norm_L2(const SpectralScalar& a) { return std::sqrt(inner_L2(a, a)); }
double norm_L2(const SolenoidalVector& u) { return std::sqrt(inner_L2(u, u)); }

double norm_H1(const SpectralScalar& a) {
  return std::sqrt(weighted_sq(a.grid(), a.coeffs(),
                               [](int k1, int k2) { return double(k1 * k1 + k2 * k2); }));
}

double norm_H1(const SolenoidalVector& u) {
  return std::sqrt(norm_H1(u.ux()) * norm_H1(u.ux()) + norm_H1(u.uy()) * norm_H1(u.uy()));
}

double norm_gamma(const SpectralScalar& phi, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("norm_gamma: gamma must be > 0");
  return std::sqrt(weighted_sq(phi.grid(), phi.coeffs(),
                               [gamma](int k1, int k2) { return double(k1 * k1 + k2 * k2) + gamma; }));
}

double dual_norm_Vprime(const SolenoidalVector& v) {
  auto w = [](int k1, int k2) {
    const int kk = k1 * k1 + k2 * k2;
    return kk == 0 ? 0.0 : 1.0 / double(kk);
  };
  return std::sqrt(weighted_sq(v.grid(), v.ux().coeffs(), w) +
                   weighted_sq(v.grid(), v.uy().coeffs(), w));
}

double dual_norm_DAgamma_prime(const SpectralScalar& h, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("dual_norm_DAgamma_prime: gamma must be > 0");
  return std::sqrt(weighted_sq(h.grid(), h.coeffs(), [gamma](int k1, int k2) {
    const double l = double(k1 * k1 + k2 * k2) + gamma;
    return 1.0 / (l * l);
  }));
}

void NormWeights::validate() const {
  if (!(capK > 0.0)) throw DomainError("norm weights: capillarity K must be > 0");
  if (!(nu2 > 0.0)) throw DomainError("norm weights: nu2 must be > 0");
  if (!(gamma > 0.0)) throw DomainError("norm weights: gamma must be > 0");
}

double norm_Y(const State& s, const NormWeights& w) {
  w.validate();
  const double u = norm_L2(s.u);
  const double p = norm_gamma(s.phi, w.gamma);
  return std::sqrt(u * u / w.capK + w.nu2 * p * p);
}

double norm_V(const State& s, const NormWeights& w) {
  w.validate();
  const double u = norm_H1(s.u);
  const double a = norm_L2(apply_A_gamma(s.phi, w.gamma));
  return std::sqrt(u * u + a * a);
}

// ---------------------------------------------------------------------------

namespace {
SpectralScalar product_on_padded(std::span<const SpectralScalar* const> fields) {
  const auto& g = fields[0]->grid();
  for (const auto* f : fields) require_same_grid(g, f->grid(), "dealiased_product");
  if (static_cast<int>(fields.size()) > g.max_exact_arity()) {
    throw DomainError("dealiased_product: pad_factor " + std::to_string(g.pad_factor()) +
                      " is insufficient for a product of " + std::to_string(fields.size()) +
                      " fields");
  }
  GridValues acc = detail::synthesize(g, fields[0]->coeffs(), g.padded_ny(), g.padded_nx());
  for (std::size_t i = 1; i < fields.size(); ++i) {
    acc *= detail::synthesize(g, fields[i]->coeffs(), g.padded_ny(), g.padded_nx());
  }
  return SpectralScalar(SpectralScalar::Trusted{}, g, detail::analyze(g, acc));
}
}  // namespace

SpectralScalar dealiased_product(const SpectralScalar& a, const SpectralScalar& b) {
  const SpectralScalar* f[] = {&a, &b};
  return product_on_padded(f);
}

SpectralScalar dealiased_product(const SpectralScalar& a, const SpectralScalar& b,
                                 const SpectralScalar& c) {
  const SpectralScalar* f[] = {&a, &b, &c};
  return product_on_padded(f);
}

namespace {
std::vector<GridValues> synthesize_all(std::span<const SpectralScalar* const> inputs, int my, int mx) {
  std::vector<GridValues> grids;
  grids.reserve(inputs.size());
  for (const auto* f : inputs) {
    require_same_grid(inputs[0]->grid(), f->grid(), "pointwise evaluation");
    grids.push_back(detail::synthesize(f->grid(), f->coeffs(), my, mx));
  }
  return grids;
}
}  // namespace

SpectralScalar apply_pointwise(std::span<const SpectralScalar* const> inputs, int degree,
                               const std::function<double(std::span<const double>)>& fn) {
  if (inputs.empty()) throw ShapeError("apply_pointwise: no inputs");
  const auto& g = inputs[0]->grid();
  const auto [my, mx] = g.grid_for_arity(std::max(degree, 1));
  auto grids = synthesize_all(inputs, my, mx);
  GridValues out(my, mx);
  std::vector<double> vals(inputs.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < grids.size(); ++j) vals[j] = grids[j].data()[i];
    out.data()[i] = fn(vals);
  }
  return SpectralScalar(SpectralScalar::Trusted{}, g, detail::analyze(g, out));
}

double integrate_pointwise(std::span<const SpectralScalar* const> inputs, int degree,
                           const std::function<double(std::span<const double>)>& fn) {
  if (inputs.empty()) throw ShapeError("integrate_pointwise: no inputs");
  const auto& g = inputs[0]->grid();
  // An integral needs one less order of padding than a truncated product.
  const auto [my, mx] = g.grid_for_arity(std::max(degree - 1, 1));
  auto grids = synthesize_all(inputs, my, mx);
  std::vector<double> vals(inputs.size());
  double acc = 0.0;
  const Eigen::Index n = grids[0].size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < grids.size(); ++j) vals[j] = grids[j].data()[i];
    acc += fn(vals);
  }
  return acc * kDomainArea / static_cast<double>(n);
}

}  // namespace pfa
