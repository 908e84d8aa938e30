#pragma once

#include <vector>

#include "ddr/pulse.hpp"

namespace ddr {

/// Standard single-mode fiber parameters (SI units).
struct FiberParams {
  double beta2 = -2.168e-26;  // s^2/m; paper value -2.168e-23 s^2/km
  double length_m = 0.0;
  double attenuation_db_per_km = 0.2;
};

/// All-pass chromatic dispersion response exp(j (beta2/2) w^2 L).
cplx cd_frequency_response(const FiberParams& params, double f_hz);

/// Shifts the SNR axis by the link loss; with unit noise variance loss and
/// transmit power trade one-to-one.
double apply_attenuation(double snr_db, const FiberParams& params);

/// End-to-end discrete channel: combined transmit-pulse + fiber taps psi at
/// the simulation grid, the downsampled two-fold-grid taps used by the
/// trellis, and the receive filter.
struct DiscreteChannel {
  SampledFilter psi;        // g_tx * h_L at T_s / N_sim
  SampledFilter rx;         // g_rx at T_s / N_sim
  PulseSpec pulse;
  FiberParams fiber;
  std::vector<cplx> psi2;   // psi at T_s / 2; center index = memory_symbols
  int memory_symbols = 0;   // odd by construction
  double loss_linear = 1.0;
  bool rx_transparent = false;  // |X_L|^2 band-limited to B, filter is a no-op
  bool memory_capped = false;
  double tail_energy_rel = 0.0;  // discarded by the channel truncation

  double symbol_period() const { return psi.symbol_period; }
  double baud() const { return 1.0 / psi.symbol_period; }
  cplx psi2_tap(int offset) const {  // offset in half-symbol samples from t=0
    return psi2[static_cast<size_t>(offset + memory_symbols)];
  }
};

struct ChannelBuildOptions {
  double truncation_threshold = 1e-6;  // relative in-array tail energy
  int max_memory_symbols = 301;        // cap; exceeding it sets memory_capped
  int rx_span_symbols = 64;
};

DiscreteChannel build_discrete_channel(const SampledFilter& pulse, const PulseSpec& spec,
                                       const FiberParams& params,
                                       const ChannelBuildOptions& opts = {});

/// Two-fold-grid taps of psi after an ideal brick-wall of total width
/// `bandwidth` (the WDM channel-select filter), half-width `half_taps` each
/// side of t = 0. Used to derive auxiliary-channel taps for WDM scenarios.
std::vector<cplx> bandlimited_psi2(const DiscreteChannel& ch, double bandwidth, int half_taps);

}  // namespace ddr
