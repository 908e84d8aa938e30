#include "ddr/pulse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace ddr {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Raised-cosine impulse response with h(0) = 1; removable singularities at
// t = +-T/(2 alpha) handled by the analytic limit (alpha/2) sin(pi/(2 alpha)).
double rc_impulse(double t_over_T, double alpha) {
  if (alpha <= 0.0) return sinc(t_over_T);
  double u = 2.0 * alpha * t_over_T;
  double denom = 1.0 - u * u;
  if (std::abs(denom) < 1e-8) return (alpha / 2.0) * std::sin(std::numbers::pi / (2.0 * alpha));
  return sinc(t_over_T) * std::cos(std::numbers::pi * alpha * t_over_T) / denom;
}

double td_rc_value(double t, double alpha, double B) {
  double at = std::abs(t);
  double inner = (1.0 - alpha) / (2.0 * B);
  double outer = (1.0 + alpha) / (2.0 * B);
  if (at <= inner) return 1.0;
  if (alpha > 0.0 && at <= outer)
    return 0.5 * (1.0 + std::cos(std::numbers::pi * B / alpha * (at - inner)));
  return 0.0;
}

// Smallest half-width >= k whose two-fold-grid tap count gives odd symbol
// memory; the trellis step structure needs the center tap at a symbol time.
int round_half_width_odd_memory(int k, int rate_factor) {
  if (rate_factor % 2 != 0) throw std::invalid_argument("rate factor must be even");
  int half_grid = rate_factor / 2;
  int m = (k + half_grid - 1) / half_grid;  // taps per side at the 2B grid
  if (m % 2 == 0) ++m;
  return m * half_grid;
}

}  // namespace

const char* pulse_kind_name(PulseKind k) {
  switch (k) {
    case PulseKind::Sinc: return "sinc";
    case PulseKind::FdRc: return "fdrc";
    case PulseKind::TdRc: return "tdrc";
  }
  return "?";
}

PulseKind pulse_kind_from_name(const std::string& s) {
  if (s == "sinc") return PulseKind::Sinc;
  if (s == "fdrc") return PulseKind::FdRc;
  if (s == "tdrc") return PulseKind::TdRc;
  throw std::invalid_argument("unknown pulse kind: " + s);
}

double PulseSpec::one_sided_bandwidth() const {
  switch (kind) {
    case PulseKind::Sinc: return 0.5 * rate();
    case PulseKind::FdRc: return (1.0 + alpha) * 0.5 * rate();
    case PulseKind::TdRc: return -1.0;
  }
  return -1.0;
}

cplx SampledFilter::response(double f) const {
  const double dt = sample_interval();
  cplx acc = 0;
  for (size_t i = 0; i < taps.size(); ++i) {
    double t = (static_cast<int>(i) - center_index) * dt;
    double ph = -2.0 * std::numbers::pi * f * t;
    acc += taps[i] * cplx(std::cos(ph), std::sin(ph));
  }
  return acc * dt;
}

double SampledFilter::energy() const {
  double e = 0;
  for (const cplx& t : taps) e += std::norm(t);
  return e * sample_interval();
}

cplx SampledFilter::symbol_autocorrelation(int lag_symbols) const {
  int shift = lag_symbols * rate_factor;
  cplx acc = 0;
  for (int i = 0; i < static_cast<int>(taps.size()); ++i) {
    int j = i - shift;
    if (j < 0 || j >= static_cast<int>(taps.size())) continue;
    acc += taps[static_cast<size_t>(i)] * std::conj(taps[static_cast<size_t>(j)]);
  }
  return acc * sample_interval();
}

SampledFilter fd_rc_taps(const PulseSpec& spec, int rate_factor, int span_symbols) {
  if (spec.alpha < 0.0 || spec.alpha > 1.0) throw std::invalid_argument("roll-off must be in [0,1]");
  if (span_symbols < 2) throw std::invalid_argument("span must be at least 2 symbols");
  const double T = spec.symbol_period;
  const int k = round_half_width_odd_memory(span_symbols * rate_factor + rate_factor / 2, rate_factor);

  SampledFilter out;
  out.rate_factor = rate_factor;
  out.center_index = k;
  out.symbol_period = T;
  out.taps.resize(static_cast<size_t>(2 * k + 1));
  for (int i = -k; i <= k; ++i) {
    double t_over_T = static_cast<double>(i) / rate_factor;
    out.taps[static_cast<size_t>(i + k)] = rc_impulse(t_over_T, spec.alpha) / T;
  }

  // Estimate of discarded tail energy from an 8x longer evaluation horizon.
  double kept = 0, total = 0;
  for (int i = 0; i <= 8 * k; ++i) {
    double v = rc_impulse(static_cast<double>(i) / rate_factor, spec.alpha);
    double e = (i == 0 ? 1.0 : 2.0) * v * v;
    total += e;
    if (i <= k) kept += e;
  }
  out.tail_energy_rel = total > 0 ? (total - kept) / total : 0.0;
  return out;
}

SampledFilter td_rc_taps(const PulseSpec& spec, int rate_factor) {
  if (spec.alpha < 0.0 || spec.alpha > 1.0) throw std::invalid_argument("roll-off must be in [0,1]");
  const double T = spec.symbol_period;
  const double B = 1.0 / T;
  const double support = (1.0 + spec.alpha) / (2.0 * B);
  int k_min = static_cast<int>(std::ceil(support / (T / rate_factor) - 1e-12));
  const int k = round_half_width_odd_memory(k_min, rate_factor);

  SampledFilter out;
  out.rate_factor = rate_factor;
  out.center_index = k;
  out.symbol_period = T;
  out.degenerate_rect = (spec.alpha == 0.0);
  out.taps.resize(static_cast<size_t>(2 * k + 1));
  for (int i = -k; i <= k; ++i) {
    double t = static_cast<double>(i) * (T / rate_factor);
    out.taps[static_cast<size_t>(i + k)] = td_rc_value(t, spec.alpha, B);
  }
  out.tail_energy_rel = 0.0;  // exact compact support
  return out;
}

SampledFilter brickwall_taps(double bandwidth, int rate_factor, int span_symbols,
                             double symbol_period) {
  if (!(bandwidth > 0) || !(symbol_period > 0))
    throw std::invalid_argument("bandwidth and symbol period must be positive");
  const int k = span_symbols * rate_factor;
  SampledFilter out;
  out.rate_factor = rate_factor;
  out.center_index = k;
  out.symbol_period = symbol_period;
  out.taps.resize(static_cast<size_t>(2 * k + 1));
  for (int i = -k; i <= k; ++i) {
    double t = static_cast<double>(i) * (symbol_period / rate_factor);
    out.taps[static_cast<size_t>(i + k)] = bandwidth * sinc(bandwidth * t);
  }
  double kept = 0;
  for (const cplx& t : out.taps) kept += std::norm(t);
  // Ideal low-pass has total discrete-tap energy bandwidth * rate / T.
  double total = bandwidth * rate_factor / symbol_period;
  out.tail_energy_rel = std::max(0.0, 1.0 - kept / total);
  return out;
}

SampledFilter rx_filter_taps(double bandwidth, int rate_factor, int span_symbols,
                             double symbol_period) {
  return brickwall_taps(bandwidth, rate_factor, span_symbols, symbol_period);
}

SampledFilter transmit_pulse_taps(const PulseSpec& spec, int rate_factor, int span_symbols) {
  switch (spec.kind) {
    case PulseKind::Sinc: {
      PulseSpec s = spec;
      s.alpha = 0.0;
      return fd_rc_taps(s, rate_factor, span_symbols);
    }
    case PulseKind::FdRc: return fd_rc_taps(spec, rate_factor, span_symbols);
    case PulseKind::TdRc: return td_rc_taps(spec, rate_factor);
  }
  throw std::invalid_argument("bad pulse kind");
}

double measure_bandwidth_95(const SampledFilter& filter) {
  double e = 0;
  for (const cplx& t : filter.taps) e += std::norm(t);
  if (e <= 0) throw std::invalid_argument("cannot measure bandwidth of an all-zero filter");

  size_t n = detail::next_pow2(std::max<size_t>(filter.taps.size() * 16, 1 << 14));
  std::vector<cplx> buf(n, cplx(0, 0));
  for (size_t i = 0; i < filter.taps.size(); ++i) buf[i] = filter.taps[i];
  detail::fft_forward(buf);

  std::vector<double> power(n);
  double total = 0;
  for (size_t i = 0; i < n; ++i) {
    power[i] = std::norm(buf[i]);
    total += power[i];
  }
  const double df = 1.0 / (static_cast<double>(n) * filter.sample_interval());
  double cum = power[0];
  size_t m = 0;
  while (cum < 0.95 * total && m + 1 <= n / 2) {
    ++m;
    cum += power[m];
    if (n - m > n / 2) cum += power[n - m];  // the mirrored negative-f bin
  }
  return 2.0 * static_cast<double>(m) * df;
}

}  // namespace ddr
