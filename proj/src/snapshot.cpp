#include "pfa/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace pfa {

SnapshotHeader SnapshotHeader::from(const ModelParams& p, long step, double time, double k) {
  SnapshotHeader h;
  h.pad_factor = p.grid().pad_factor();
  h.step = step;
  h.time = time;
  h.k = k;
  h.constants = p.constants();
  h.c_F_gamma = p.c_F_gamma();
  h.F0 = p.potential().F0();
  h.potential = p.potential().coefficients();
  return h;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("snapshot: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("snapshot: truncated data");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

void put_field(std::ostream& os, const SpectralScalar& f) {
  const auto& g = f.grid();
  for (int k2 = -g.ny() / 2 + 1; k2 <= g.ny() / 2; ++k2) {
    for (int k1 = -g.nx() / 2 + 1; k1 <= g.nx() / 2; ++k1) {
      const Complex c = f.coeffs()(g.row_of(k2), g.col_of(k1));
      put_f64(os, c.real());
      put_f64(os, c.imag());
    }
  }
}

CoeffArray get_field(std::istream& is, const GridSpec& g) {
  CoeffArray c(g.ny(), g.nx());
  for (int k2 = -g.ny() / 2 + 1; k2 <= g.ny() / 2; ++k2) {
    for (int k1 = -g.nx() / 2 + 1; k1 <= g.nx() / 2; ++k1) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      c(g.row_of(k2), g.col_of(k1)) = Complex(re, im);
    }
  }
  return c;
}

}  // namespace

void write_snapshot(std::ostream& os, const State& s, const SnapshotHeader& h) {
  const auto& g = s.grid();
  os.write("PFA1", 4);
  put_u32(os, static_cast<std::uint32_t>(g.nx()));
  put_u32(os, static_cast<std::uint32_t>(g.ny()));
  std::vector<double> block = {h.pad_factor,         double(h.step),  h.time,
                               h.k,                  h.constants.nu1, h.constants.nu2,
                               h.constants.alpha,    h.constants.capK, h.constants.gamma,
                               h.c_F_gamma,          h.F0,            double(h.potential.size())};
  block.insert(block.end(), h.potential.begin(), h.potential.end());
  put_f64(os, double(block.size()));
  for (double v : block) put_f64(os, v);
  put_field(os, s.u.ux());
  put_field(os, s.u.uy());
  put_field(os, s.phi);
  if (!os) throw FormatError("snapshot: write failed");
}

void write_snapshot(const std::string& path, const State& s, const SnapshotHeader& h) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("snapshot: cannot open " + path + " for writing");
  write_snapshot(os, s, h);
}

Snapshot read_snapshot(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PFA1", 4) != 0) throw FormatError("snapshot: bad magic");
  const auto nx = get_u32(is), ny = get_u32(is);
  if (nx < 4 || ny < 4 || nx % 2 || ny % 2 || nx > 65536 || ny > 65536) {
    throw FormatError("snapshot: bad grid dimensions");
  }
  const double Ld = get_f64(is);
  if (!(Ld >= 12 && Ld <= 1e6) || Ld != std::floor(Ld)) throw FormatError("snapshot: bad parameter block length");
  std::vector<double> block(static_cast<std::size_t>(Ld));
  for (auto& v : block) v = get_f64(is);
  SnapshotHeader h;
  h.pad_factor = block[0];
  h.step = static_cast<long>(block[1]);
  h.time = block[2];
  h.k = block[3];
  h.constants = {block[4], block[5], block[6], block[7], block[8]};
  h.c_F_gamma = block[9];
  h.F0 = block[10];
  const auto m = static_cast<std::size_t>(block[11]);
  if (block.size() != 12 + m) throw FormatError("snapshot: parameter block length mismatch");
  h.potential.assign(block.begin() + 12, block.end());

  const GridSpec g(static_cast<int>(nx), static_cast<int>(ny), h.pad_factor);
  // Stored bits are kept as written so that a rewrite reproduces the file.
  auto field = [&](const char* name) {
    SpectralScalar f(SpectralScalar::Trusted{}, g, get_field(is, g));
    const double scale = std::max(1.0, f.coeffs().abs().maxCoeff());
    if (!f.nyquist_is_zero() || !(f.hermitian_defect() <= 1e-12 * scale)) {
      throw FormatError(std::string("snapshot: field ") + name + " is not a real field");
    }
    return f;
  };
  SpectralScalar ux = field("ux");
  SpectralScalar uy = field("uy");
  SpectralScalar phi = field("phi");
  SolenoidalVector u(SolenoidalVector::Trusted{}, std::move(ux), std::move(uy));
  const double scale = std::max(1.0, norm_H1(u));
  if (u.divergence_defect() > 1e-10 * scale || u.ux().mean() != 0.0 || u.uy().mean() != 0.0) {
    throw FormatError("snapshot: velocity is not divergence-free with zero mean");
  }
  return {State(std::move(u), std::move(phi)), std::move(h)};
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("snapshot: cannot open " + path);
  return read_snapshot(is);
}

}  // namespace pfa
