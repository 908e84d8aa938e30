#pragma once

#include <complex>
#include <vector>

#include "ddr/constellation.hpp"

namespace ddr {

enum class PulseKind { Sinc, FdRc, TdRc };

const char* pulse_kind_name(PulseKind k);
PulseKind pulse_kind_from_name(const std::string& s);

/// Analytic transmit pulse: sinc, frequency-domain raised cosine with
/// roll-off alpha, or the compact-support time-domain raised cosine.
struct PulseSpec {
  PulseKind kind = PulseKind::Sinc;
  double alpha = 0.0;          // roll-off in [0,1]
  double symbol_period = 1.0;  // T_s = 1/B, seconds

  double rate() const { return 1.0 / symbol_period; }
  /// One-sided spectral support; infinite (returns -1) for TD-RC.
  double one_sided_bandwidth() const;
};

/// Uniformly sampled, symmetrically truncated filter. taps[i] is the value
/// at t = (i - center_index) * symbol_period / rate_factor.
struct SampledFilter {
  std::vector<cplx> taps;
  int rate_factor = 4;  // samples per symbol period
  int center_index = 0;
  double symbol_period = 1.0;
  double tail_energy_rel = 0.0;  // estimated energy discarded by truncation
  bool degenerate_rect = false;  // td_rc with alpha = 0 collapses to a rect

  double sample_interval() const { return symbol_period / rate_factor; }
  int half_width() const { return center_index; }
  /// Continuous-spectrum value at frequency f (Hz): sum of taps * exp * dt.
  cplx response(double f) const;
  /// Tap energy as an integral approximation: sum |tap|^2 * dt.
  double energy() const;
  /// Autocorrelation integral r(m T_s) = sum psi(t) conj(psi(t - m T_s)) dt.
  cplx symbol_autocorrelation(int lag_symbols) const;
};

/// FD-RC taps from the closed-form impulse response (amplitude 1/T_s at t=0),
/// truncated to |t| <= (span_symbols + 1/2) T_s so the symbol memory at the
/// two-fold grid is odd. alpha = 0 gives the sinc pulse exactly.
SampledFilter fd_rc_taps(const PulseSpec& spec, int rate_factor, int span_symbols);

/// TD-RC taps; exact compact support |t| <= (1+alpha)/(2B), unit peak.
SampledFilter td_rc_taps(const PulseSpec& spec, int rate_factor);

/// Brick-wall low-pass taps W * sinc(W t) with total passband width W
/// (cutoffs at +-W/2). Used for the receive filter (W = 2B) and the WDM
/// channel-select filter (W = B_c).
SampledFilter brickwall_taps(double bandwidth, int rate_factor, int span_symbols,
                             double symbol_period);

/// Receive anti-aliasing filter of Eq-style bandwidth 2B.
SampledFilter rx_filter_taps(double bandwidth, int rate_factor, int span_symbols,
                             double symbol_period);

/// Dispatch on spec.kind with the module defaults.
SampledFilter transmit_pulse_taps(const PulseSpec& spec, int rate_factor, int span_symbols);

/// Smallest symmetric two-sided frequency width holding 95% of the tap
/// spectral power, from a zero-padded discrete spectrum.
double measure_bandwidth_95(const SampledFilter& filter);

}  // namespace ddr
