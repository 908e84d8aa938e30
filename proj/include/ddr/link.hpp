#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddr/constellation.hpp"
#include "ddr/fiber.hpp"

namespace ddr {

/// WDM scenario of two neighbours at +-B_c around the channel of interest.
/// With ICI enabled the neighbours carry independent data; without it the
/// transmit filter becomes g_tx * g_c and no neighbours are added. In both
/// modes a brick-wall g_c of width B_c selects the center channel before the
/// square-law detector.
struct WdmConfig {
  double channel_spacing = 0.0;     // B_c in Hz
  bool enable_ici = true;
  double select_bandwidth = 0.0;    // 0 -> B_c
  double neighbor_gain = 1.0;       // amplitude scale on both neighbours
  double center_gain = 1.0;
  int select_span_symbols = 64;

  double select_bw() const { return select_bandwidth > 0 ? select_bandwidth : channel_spacing; }
};

struct LinkConfig {
  const DiscreteChannel* channel = nullptr;
  const Constellation* constellation = nullptr;
  double snr_db = 0.0;      // transmit SNR; sigma_N^2 = 1 so SNR = P_tx
  size_t n_symbols = 20000; // n/2
  uint64_t seed = 1;
  std::optional<WdmConfig> wdm;
  int guard_symbols = 0;    // 0 -> channel memory; raise to >= aux memory
};

/// One simulated frame. Samples live on the absolute half-symbol grid where
/// data symbol j is centered at position 2j; diamond samples sit at even
/// positions (symbol times) and spade samples at odd positions.
struct LinkRealization {
  std::vector<int> info_indices;  // n/2 information symbols
  std::vector<int> tx_indices;    // guard + encoded data + guard
  int guard = 0;                  // known symbols on each side
  int channel_memory = 0;         // true-channel memory the frame was built for
  size_t n_data = 0;
  double gain = 1.0;              // amplitude on symbols, includes link loss
  std::vector<double> z;          // noiseless samples
  std::vector<double> y;          // z + N(0,1)
  int origin = 0;                 // absolute position of z[0]
  std::vector<std::string> warnings;

  double z_at(int pos) const { return z[static_cast<size_t>(pos - origin)]; }
  double y_at(int pos) const { return y[static_cast<size_t>(pos - origin)]; }
  int tx_at(int j) const {  // global symbol index: data are j = 1..n_data
    return tx_indices[static_cast<size_t>(j + guard - 1)];
  }
  /// Data-window samples (length 2 * n_data), the paper's y_1^n.
  std::vector<double> data_samples(bool noisy) const;
};

/// Per-step observations grouped for a trellis of the given memory: step k
/// observes the diamond sample emitted by its state and the spade sample
/// that adds input x_k. context[i] holds the transmitted symbol with global
/// index i + 1 - mem, so each step's state window is a contiguous slice.
struct StepSequence {
  int mem = 0;
  size_t n_rate_steps = 0;        // steps that enter rate sums (data steps)
  std::vector<double> diamond;
  std::vector<double> spade;
  std::vector<int> context;       // tx indices from j = 1 - mem onwards
  std::vector<uint8_t> known;     // 1 where the input symbol is receiver-known

  size_t steps() const { return diamond.size(); }
  int input_at(size_t step) const { return context[step - 1 + static_cast<size_t>(mem)]; }
};

/// Amplitude gain so the average transmit power matches
/// P_tx = 10^(snr_db/10) * sigma_N^2; link loss is folded in on top.
double calibrate_gain(const Constellation& c, const DiscreteChannel& ch, double snr_db);

/// Noiseless receiver samples for a caller-supplied transmit string of
/// guard + data + guard symbols (guard inferred from the length). Runs the
/// full chain: upsample, psi, optional WDM mixing and channel select,
/// square-law, receive filter, downsample.
struct ChainResult {
  std::vector<double> z;
  int origin = 0;
  std::vector<std::string> warnings;
  double z_at(int pos) const { return z[static_cast<size_t>(pos - origin)]; }
};
ChainResult noiseless_intensity(const LinkConfig& config, const std::vector<int>& tx_full,
                                size_t n_data, double gain);

LinkRealization simulate(const LinkConfig& config);

StepSequence make_steps(const LinkRealization& real, int mem, bool noisy, bool include_tail);

uint64_t mix_seed(uint64_t seed, uint64_t salt);

}  // namespace ddr
