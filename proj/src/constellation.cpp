#include "ddr/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ddr {

namespace {

constexpr double kMagTol = 1e-9;
constexpr double kAngTol = 1e-9;

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < -kAngTol) a += two_pi;
  if (a < 0) a = 0;
  return a;
}

std::vector<cplx> ask_points(int q) {
  std::vector<cplx> p;
  for (int i = 0; i < q; ++i) p.emplace_back(static_cast<double>(2 * i - q + 1), 0.0);
  return p;
}

std::vector<cplx> pam_points(int q) {
  std::vector<cplx> p;
  for (int i = 0; i < q; ++i) p.emplace_back(static_cast<double>(i), 0.0);
  return p;
}

}  // namespace

Constellation Constellation::named(std::string_view name) {
  std::string n(name);
  if (n == "2-PAM") return custom(n, pam_points(2));
  if (n == "4-PAM") return custom(n, pam_points(4));
  if (n == "8-PAM") return custom(n, pam_points(8));
  if (n == "2-ASK") return custom(n, ask_points(2));
  if (n == "4-ASK") return custom(n, ask_points(4));
  if (n == "8-ASK") return custom(n, ask_points(8));
  if (n == "QPSK" || n == "4-QAM")
    return custom("QPSK", {{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
  if (n == "8-SQAM")
    return custom(n, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {2, 0}, {0, 2}, {-2, 0}, {0, -2}});
  throw std::invalid_argument("unknown constellation: " + n);
}

Constellation Constellation::custom(std::string name, std::vector<cplx> points) {
  if (points.empty()) throw std::invalid_argument("constellation must not be empty");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) < kMagTol)
        throw std::invalid_argument("constellation has duplicate points");
  Constellation c;
  c.name_ = std::move(name);
  c.points_ = std::move(points);
  c.build_rings();
  return c;
}

Constellation Constellation::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constellation file: " + path);
  std::vector<cplx> pts;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double re, im;
    if (ss >> re >> im) pts.emplace_back(re, im);
  }
  return custom("custom:" + path, std::move(pts));
}

void Constellation::build_rings() {
  const int q = static_cast<int>(points_.size());
  point_ring_.assign(points_.size(), -1);
  point_phase_.assign(points_.size(), 0);
  rings_.clear();

  std::vector<int> order(points_.size());
  for (int i = 0; i < q; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(points_[static_cast<size_t>(a)]) < std::abs(points_[static_cast<size_t>(b)]);
  });

  for (int idx : order) {
    double mag = std::abs(points_[static_cast<size_t>(idx)]);
    if (!rings_.empty() && std::abs(rings_.back().magnitude - mag) < kMagTol) {
      rings_.back().point_indices.push_back(idx);
    } else {
      rings_.push_back(Ring{mag, {idx}});
    }
  }

  phase_cycle_ = 1;
  for (size_t r = 0; r < rings_.size(); ++r) {
    Ring& ring = rings_[r];
    std::sort(ring.point_indices.begin(), ring.point_indices.end(), [&](int a, int b) {
      return wrap_angle(std::arg(points_[static_cast<size_t>(a)])) <
             wrap_angle(std::arg(points_[static_cast<size_t>(b)]));
    });
    const int cycle = static_cast<int>(ring.point_indices.size());
    if (cycle > 1) {
      // Phases must form a uniform cycle and all non-singleton rings must
      // share one cycle length; differential encoding needs this structure.
      const double step = 2.0 * std::numbers::pi / cycle;
      const double base = wrap_angle(std::arg(points_[static_cast<size_t>(ring.point_indices[0])]));
      for (int k = 0; k < cycle; ++k) {
        double a = wrap_angle(std::arg(points_[static_cast<size_t>(ring.point_indices[static_cast<size_t>(k)])]));
        double expect = wrap_angle(base + k * step);
        if (std::abs(a - expect) > 1e-7 && std::abs(std::abs(a - expect) - 2.0 * std::numbers::pi) > 1e-7)
          throw std::invalid_argument("constellation ring phases are not a uniform cycle");
      }
      if (phase_cycle_ == 1)
        phase_cycle_ = cycle;
      else if (phase_cycle_ != cycle)
        throw std::invalid_argument("constellation rings have mismatched phase cycles");
    }
    for (int k = 0; k < cycle; ++k) {
      int p = ring.point_indices[static_cast<size_t>(k)];
      point_ring_[static_cast<size_t>(p)] = static_cast<int>(r);
      point_phase_[static_cast<size_t>(p)] = k;
    }
  }
}

int Constellation::point_at(int ring, int phase) const {
  const Ring& r = rings_[static_cast<size_t>(ring)];
  int c = static_cast<int>(r.point_indices.size());
  int k = ((phase % c) + c) % c;
  return r.point_indices[static_cast<size_t>(k)];
}

int Constellation::index_of(cplx value, double tol) const {
  for (size_t i = 0; i < points_.size(); ++i)
    if (std::abs(points_[i] - value) <= tol) return static_cast<int>(i);
  throw std::invalid_argument("symbol is not a constellation point");
}

double Constellation::mean_power() const {
  double s = 0;
  for (const cplx& p : points_) s += std::norm(p);
  return s / static_cast<double>(points_.size());
}

std::vector<double> Constellation::intensity_levels() const {
  std::vector<double> v;
  for (const cplx& p : points_) v.push_back(std::norm(p));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) < kMagTol; }),
          v.end());
  return v;
}

std::vector<int> Constellation::sample_iid_indices(size_t count, uint64_t seed) const {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, q() - 1);
  std::vector<int> out(count);
  for (auto& s : out) s = dist(rng);
  return out;
}

SymbolString Constellation::sample_iid(size_t count, uint64_t seed) const {
  auto idx = sample_iid_indices(count, seed);
  SymbolString s(count);
  for (size_t i = 0; i < count; ++i) s[i] = points_[static_cast<size_t>(idx[i])];
  return s;
}

std::vector<int> Constellation::differential_encode(const std::vector<int>& info) const {
  std::vector<int> out(info.size());
  int acc = 0;  // phase reference index 0, known to the receiver
  for (size_t i = 0; i < info.size(); ++i) {
    int u = info[i];
    if (u < 0 || u >= q()) throw std::invalid_argument("info symbol out of range");
    int r = ring_of(u);
    if (ring_is_singleton(r)) {
      out[i] = u;
    } else {
      acc = (acc + phase_of(u)) % phase_cycle_;
      out[i] = point_at(r, acc);
    }
  }
  return out;
}

std::vector<int> Constellation::differential_decode(const std::vector<int>& tx) const {
  std::vector<int> out(tx.size());
  int prev = 0;
  for (size_t i = 0; i < tx.size(); ++i) {
    int x = tx[i];
    if (x < 0 || x >= q()) throw std::invalid_argument("tx symbol out of range");
    int r = ring_of(x);
    if (ring_is_singleton(r)) {
      out[i] = x;
    } else {
      int p = phase_of(x);
      int inc = ((p - prev) % phase_cycle_ + phase_cycle_) % phase_cycle_;
      out[i] = point_at(r, inc);
      prev = p;
    }
  }
  return out;
}

SymbolString Constellation::differential_encode(const SymbolString& info) const {
  std::vector<int> idx(info.size());
  for (size_t i = 0; i < info.size(); ++i) idx[i] = index_of(info[i]);
  auto enc = differential_encode(idx);
  SymbolString out(enc.size());
  for (size_t i = 0; i < enc.size(); ++i) out[i] = points_[static_cast<size_t>(enc[i])];
  return out;
}

SymbolString Constellation::differential_decode(const SymbolString& tx) const {
  std::vector<int> idx(tx.size());
  for (size_t i = 0; i < tx.size(); ++i) idx[i] = index_of(tx[i]);
  auto dec = differential_decode(idx);
  SymbolString out(dec.size());
  for (size_t i = 0; i < dec.size(); ++i) out[i] = points_[static_cast<size_t>(dec[i])];
  return out;
}

}  // namespace ddr
