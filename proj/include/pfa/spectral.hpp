#pragma once

// Fourier-Galerkin representation of real fields on the periodic box [0,2pi)^2.
//
// A field is stored as the full complex coefficient array c(k) of
//   f(x) = sum_k c(k) exp(i k.x),
// with k = (k1, k2), k_i in {-n/2+1, ..., n/2}. Nyquist modes are always zero
// and c(-k) == conj(c(k)) holds exactly.

#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pfa {

using Complex = std::complex<double>;
using CoeffArray = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
// Row index is the y node, column index the x node.
using GridValues = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDomainArea = kTwoPi * kTwoPi;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridSpec {
 public:
  GridSpec(int nx, int ny, double pad_factor = 2.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double pad_factor() const { return pad_factor_; }
  int padded_nx() const { return padded_nx_; }
  int padded_ny() const { return padded_ny_; }

  /// Largest p such that a product of p truncated fields, evaluated on the
  /// padded grid and truncated back, equals the exact Galerkin product.
  int max_exact_arity() const;

  /// Smallest even grid sizes on which a p-fold product is alias-free after
  /// truncation (never smaller than the padded grid).
  std::pair<int, int> grid_for_arity(int arity) const;

  // Array index <-> wavenumber, FFT ordering.
  int wavenumber_x(int col) const { return col <= nx_ / 2 ? col : col - nx_; }
  int wavenumber_y(int row) const { return row <= ny_ / 2 ? row : row - ny_; }
  int col_of(int k1) const { return k1 >= 0 ? k1 : k1 + nx_; }
  int row_of(int k2) const { return k2 >= 0 ? k2 : k2 + ny_; }
  bool is_nyquist(int row, int col) const { return row == ny_ / 2 || col == nx_ / 2; }
  bool contains_mode(int k1, int k2) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.padded_nx_ == b.padded_nx_ &&
           a.padded_ny_ == b.padded_ny_;
  }

 private:
  int nx_;
  int ny_;
  double pad_factor_;
  int padded_nx_;
  int padded_ny_;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

class SpectralScalar {
 public:
  explicit SpectralScalar(const GridSpec& grid);
  /// Takes raw coefficients; zeroes Nyquist modes and symmetrizes so the
  /// Hermitian invariant holds exactly. Already-Hermitian input is unchanged.
  SpectralScalar(const GridSpec& grid, CoeffArray coeffs);

  static SpectralScalar from_grid(const GridValues& values, const GridSpec& grid);
  /// Values at the n x n nodes (2 pi i / n).
  GridValues to_grid() const;
  /// Band-limited evaluation on an arbitrary (ny_out x nx_out) uniform grid.
  GridValues to_grid(int ny_out, int nx_out) const;

  const GridSpec& grid() const { return grid_; }
  const CoeffArray& coeffs() const { return coeffs_; }
  Complex coeff(int k1, int k2) const;
  /// Mean value over the box (the k = 0 coefficient).
  double mean() const { return coeffs_(0, 0).real(); }

  /// Largest |c(-k) - conj(c(k))|; exactly 0 for every value this library builds.
  double hermitian_defect() const;
  bool nyquist_is_zero() const;

  SpectralScalar& operator+=(const SpectralScalar& other);
  SpectralScalar& operator-=(const SpectralScalar& other);
  SpectralScalar& operator*=(double s);

  friend SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b) { return a += b; }
  friend SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b) { return a -= b; }
  friend SpectralScalar operator*(SpectralScalar a, double s) { return a *= s; }
  friend SpectralScalar operator*(double s, SpectralScalar a) { return a *= s; }
  friend SpectralScalar operator-(SpectralScalar a) { return a *= -1.0; }

  struct Trusted {};
  // Internal: caller guarantees the invariants already hold.
  SpectralScalar(Trusted, const GridSpec& grid, CoeffArray coeffs)
      : grid_(grid), coeffs_(std::move(coeffs)) {}

 private:
  GridSpec grid_;
  CoeffArray coeffs_;
};

/// A real scalar field built from explicit modes; (k1,k2) and (-k1,-k2) are
/// filled consistently. Mode lists are (k1, k2, coefficient).
struct Mode {
  int k1;
  int k2;
  Complex c;
};
SpectralScalar from_modes(const GridSpec& grid, std::span<const Mode> modes);

/// Two-component field with no structural constraint (e.g. a gradient).
struct VectorField {
  SpectralScalar x;
  SpectralScalar y;
};

/// Divergence-free, zero-mean velocity field. The only ways to obtain one are
/// projection or linear combinations of existing ones.
class SolenoidalVector {
 public:
  explicit SolenoidalVector(const GridSpec& grid) : ux_(grid), uy_(grid) {}

  const SpectralScalar& ux() const { return ux_; }
  const SpectralScalar& uy() const { return uy_; }
  const GridSpec& grid() const { return ux_.grid(); }

  /// max_k |k . u(k)|, absolute.
  double divergence_defect() const;

  SolenoidalVector& operator+=(const SolenoidalVector& o);
  SolenoidalVector& operator-=(const SolenoidalVector& o);
  SolenoidalVector& operator*=(double s);
  friend SolenoidalVector operator+(SolenoidalVector a, const SolenoidalVector& b) { return a += b; }
  friend SolenoidalVector operator-(SolenoidalVector a, const SolenoidalVector& b) { return a -= b; }
  friend SolenoidalVector operator*(SolenoidalVector a, double s) { return a *= s; }
  friend SolenoidalVector operator*(double s, SolenoidalVector a) { return a *= s; }

  struct Trusted {};
  SolenoidalVector(Trusted, SpectralScalar ux, SpectralScalar uy)
      : ux_(std::move(ux)), uy_(std::move(uy)) {}

 private:
  SpectralScalar ux_;
  SpectralScalar uy_;
};

/// A point (u, phi) of the phase space.
struct State {
  SolenoidalVector u;
  SpectralScalar phi;

  explicit State(const GridSpec& grid) : u(grid), phi(grid) {}
  State(SolenoidalVector u_, SpectralScalar phi_);

  const GridSpec& grid() const { return phi.grid(); }

  State& operator+=(const State& o);
  State& operator-=(const State& o);
  State& operator*=(double s);
  friend State operator+(State a, const State& b) { return a += b; }
  friend State operator-(State a, const State& b) { return a -= b; }
  friend State operator*(State a, double s) { return a *= s; }
  friend State operator*(double s, State a) { return a *= s; }
};

// ---------------------------------------------------------------------------
// Linear operators (diagonal in Fourier space).

/// (-Laplacian + gamma) phi.
SpectralScalar apply_A_gamma(const SpectralScalar& phi, double gamma);
/// (-Laplacian + gamma)^s phi, any real s.
SpectralScalar apply_A_gamma_pow(const SpectralScalar& phi, double gamma, double s);
/// Stokes operator; on the periodic box A = -Laplacian on solenoidal fields.
SolenoidalVector apply_A(const SolenoidalVector& u);
/// A^s u, any real s (the k = 0 mode is already zero).
SolenoidalVector apply_A_pow(const SolenoidalVector& u, double s);
SpectralScalar laplacian(const SpectralScalar& phi);
VectorField gradient(const SpectralScalar& phi);
SpectralScalar divergence(const VectorField& v);
SpectralScalar divergence(const SolenoidalVector& u);

/// Leray projection: removes the component parallel to k and the mean.
SolenoidalVector leray_project(const VectorField& v);

// ---------------------------------------------------------------------------
// Inner products and norms (Parseval; |Omega| = 4 pi^2).

double inner_L2(const SpectralScalar& a, const SpectralScalar& b);
double inner_L2(const SolenoidalVector& a, const SolenoidalVector& b);
double inner_L2(const VectorField& a, const SolenoidalVector& b);
double norm_L2(const SpectralScalar& a);
double norm_L2(const SolenoidalVector& u);
/// |grad f|_{L2}; for velocities the V-norm ||u||.
double norm_H1(const SpectralScalar& a);
double norm_H1(const SolenoidalVector& u);
/// ||phi||_gamma^2 = |grad phi|^2 + gamma |phi|^2.
double norm_gamma(const SpectralScalar& phi, double gamma);
/// |A^{-1/2} v|_{L2}.
double dual_norm_Vprime(const SolenoidalVector& v);
/// |A_gamma^{-1} h|_{L2}.
double dual_norm_DAgamma_prime(const SpectralScalar& h, double gamma);

/// Constants entering the phase-space norms.
struct NormWeights {
  double capK;
  double nu2;
  double gamma;
  void validate() const;
};

/// ||(u,phi)||_Y^2 = |u|^2 / K + nu2 ||phi||_gamma^2.
double norm_Y(const State& s, const NormWeights& w);
/// ||(u,phi)||_V^2 = ||u||^2 + |A_gamma phi|^2.
double norm_V(const State& s, const NormWeights& w);

// ---------------------------------------------------------------------------
// Products.

/// Pointwise product on the padded grid, truncated back. Throws DomainError
/// if the grid's padding cannot represent the product exactly.
SpectralScalar dealiased_product(const SpectralScalar& a, const SpectralScalar& b);
SpectralScalar dealiased_product(const SpectralScalar& a, const SpectralScalar& b,
                                 const SpectralScalar& c);

/// Evaluates fn pointwise on a grid large enough for a polynomial of the given
/// degree in the inputs and truncates the result back to the input grid.
/// fn receives one value per input field.
SpectralScalar apply_pointwise(std::span<const SpectralScalar* const> inputs, int degree,
                               const std::function<double(std::span<const double>)>& fn);

/// Exact integral over the box of a pointwise polynomial of the given degree.
double integrate_pointwise(std::span<const SpectralScalar* const> inputs, int degree,
                           const std::function<double(std::span<const double>)>& fn);

namespace detail {
// Band-limited synthesis / analysis on an (my x mx) grid.
GridValues synthesize(const GridSpec& grid, const CoeffArray& coeffs, int my, int mx);
CoeffArray analyze(const GridSpec& grid, const GridValues& values);
}  // namespace detail

}  // namespace pfa
