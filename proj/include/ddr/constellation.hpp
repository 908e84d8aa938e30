#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ddr {

using cplx = std::complex<double>;

/// Transmit symbols as complex values. Length is n/2 in the two-fold
/// oversampled receiver convention (one entry per symbol period).
using SymbolString = std::vector<cplx>;

/// One magnitude ring: point indices ordered by increasing phase angle.
/// Singleton rings (including a zero-magnitude point) carry a trivial cycle.
struct Ring {
  double magnitude = 0.0;
  std::vector<int> point_indices;
};

/// Modulation alphabet with the ring/phase decomposition needed for
/// differential phase encoding. Built-ins: Q-PAM, Q-ASK (Q = 2,4,8),
/// QPSK (alias 4-QAM) and 8-SQAM.
class Constellation {
 public:
  static Constellation named(std::string_view name);
  static Constellation custom(std::string name, std::vector<cplx> points);
  /// Loads a custom alphabet from a text file, one "re im" pair per line.
  static Constellation from_file(const std::string& path);

  const std::string& name() const { return name_; }
  int q() const { return static_cast<int>(points_.size()); }
  const std::vector<cplx>& points() const { return points_; }
  cplx point(int i) const { return points_[static_cast<size_t>(i)]; }
  const std::vector<Ring>& rings() const { return rings_; }

  /// Common phase-cycle length of the non-singleton rings (1 if all rings
  /// are singletons, as for PAM).
  int phase_cycle() const { return phase_cycle_; }
  int ring_of(int point) const { return point_ring_[static_cast<size_t>(point)]; }
  int phase_of(int point) const { return point_phase_[static_cast<size_t>(point)]; }
  bool ring_is_singleton(int ring) const { return rings_[static_cast<size_t>(ring)].point_indices.size() == 1; }
  /// Point index at (ring, phase index mod ring cycle).
  int point_at(int ring, int phase) const;

  /// Index of the nearest point within tol, else invalid-input.
  int index_of(cplx value, double tol = 1e-9) const;

  double mean_power() const;                  // E|X|^2 over the uniform PMF
  std::vector<double> intensity_levels() const;  // distinct |x|^2, ascending

  std::vector<int> sample_iid_indices(size_t count, uint64_t seed) const;
  SymbolString sample_iid(size_t count, uint64_t seed) const;

  /// Differential phase encoding: ring passes through, phase index is the
  /// running sum of info phase indices mod the common cycle, reference 0.
  /// Singleton-ring symbols leave the accumulator untouched.
  std::vector<int> differential_encode(const std::vector<int>& info) const;
  std::vector<int> differential_decode(const std::vector<int>& tx) const;
  SymbolString differential_encode(const SymbolString& info) const;
  SymbolString differential_decode(const SymbolString& tx) const;

 private:
  Constellation() = default;
  void build_rings();

  std::string name_;
  std::vector<cplx> points_;
  std::vector<Ring> rings_;
  std::vector<int> point_ring_;
  std::vector<int> point_phase_;
  int phase_cycle_ = 1;
};

}  // namespace ddr
