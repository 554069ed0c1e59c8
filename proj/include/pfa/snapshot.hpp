#pragma once

// Binary state snapshots.
//
// Layout (little-endian): "PFA1", u32 nx, u32 ny, f64 L, L f64 parameter
// values, then ux, uy, phi coefficients as interleaved (re, im) f64, rows
// k2 = -ny/2+1 .. ny/2 outer, k1 = -nx/2+1 .. nx/2 inner.
//
// Parameter values: pad_factor, step, time, k, nu1, nu2, alpha, capK, gamma,
// c_F_gamma, F0, m, then the m potential coefficients.

#include <iosfwd>
#include <string>
#include <vector>

#include "pfa/model.hpp"

namespace pfa {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotHeader {
  double pad_factor = 2.0;
  long step = 0;
  double time = 0.0;
  double k = 0.0;
  PhysicalConstants constants{};
  double c_F_gamma = 0.0;
  double F0 = 0.0;
  std::vector<double> potential;

  static SnapshotHeader from(const ModelParams& p, long step, double time, double k);
};

void write_snapshot(std::ostream& os, const State& s, const SnapshotHeader& h);
void write_snapshot(const std::string& path, const State& s, const SnapshotHeader& h);

struct Snapshot {
  State state;
  SnapshotHeader header;
};

Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::string& path);

}  // namespace pfa
