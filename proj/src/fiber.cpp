#include "ddr/fiber.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace ddr {

namespace {

// Spectrum of `taps` on a padded grid, taps recentered to the middle so CD
// spreading cannot wrap. Returns the padded signal and its new center.
struct PaddedSpectrum {
  std::vector<cplx> data;
  int center;
};

PaddedSpectrum padded_fft(const SampledFilter& taps) {
  size_t n = detail::next_pow2(taps.taps.size() * 8);
  PaddedSpectrum out;
  out.data.assign(n, cplx(0, 0));
  size_t offset = (n - taps.taps.size()) / 2;
  for (size_t i = 0; i < taps.taps.size(); ++i) out.data[offset + i] = taps.taps[i];
  out.center = static_cast<int>(offset) + taps.center_index;
  detail::fft_forward(out.data);
  return out;
}

double bin_frequency(size_t k, size_t n, double dt) {
  auto sk = static_cast<long long>(k);
  auto sn = static_cast<long long>(n);
  long long idx = (sk <= sn / 2) ? sk : sk - sn;
  return static_cast<double>(idx) / (static_cast<double>(n) * dt);
}

}  // namespace

cplx cd_frequency_response(const FiberParams& params, double f_hz) {
  double w = 2.0 * std::numbers::pi * f_hz;
  double phase = 0.5 * params.beta2 * w * w * params.length_m;
  return {std::cos(phase), std::sin(phase)};
}

double apply_attenuation(double snr_db, const FiberParams& params) {
  return snr_db - params.attenuation_db_per_km * params.length_m / 1000.0;
}

DiscreteChannel build_discrete_channel(const SampledFilter& pulse, const PulseSpec& spec,
                                       const FiberParams& params, const ChannelBuildOptions& opts) {
  double pulse_energy = 0;
  for (const cplx& t : pulse.taps) pulse_energy += std::norm(t);
  if (pulse_energy <= 0) throw std::invalid_argument("pulse taps must not be all zero");

  DiscreteChannel ch;
  ch.pulse = spec;
  ch.fiber = params;
  ch.rx = rx_filter_taps(2.0 / spec.symbol_period, pulse.rate_factor, opts.rx_span_symbols,
                         spec.symbol_period);
  ch.loss_linear = std::pow(10.0, -params.attenuation_db_per_km * (params.length_m / 1000.0) / 10.0);
  double bw1s = spec.one_sided_bandwidth();
  ch.rx_transparent = bw1s >= 0 && 2.0 * bw1s <= (1.0 / spec.symbol_period) * (1.0 + 1e-12);

  const int rate = pulse.rate_factor;
  const int half_grid = rate / 2;

  if (params.length_m == 0.0) {
    ch.psi = pulse;  // identity channel: taps pass through bit-identical
  } else {
    PaddedSpectrum spec_fft = padded_fft(pulse);
    const double dt = pulse.sample_interval();
    const size_t n = spec_fft.data.size();
    for (size_t k = 0; k < n; ++k)
      spec_fft.data[k] *= cd_frequency_response(params, bin_frequency(k, n, dt));
    detail::fft_inverse(spec_fft.data);

    double total = 0;
    for (const cplx& v : spec_fft.data) total += std::norm(v);

    // Smallest symmetric window (odd symbol memory) whose in-array tail
    // energy is below the threshold.
    int max_half = std::min(spec_fft.center, static_cast<int>(n) - 1 - spec_fft.center);
    int max_m = max_half / half_grid;
    if (max_m % 2 == 0) --max_m;
    int chosen_m = -1;
    for (int m = 1; m <= max_m; m += 2) {
      int k_half = m * half_grid;
      double kept = 0;
      for (int i = -k_half; i <= k_half; ++i)
        kept += std::norm(spec_fft.data[static_cast<size_t>(spec_fft.center + i)]);
      if (total - kept <= opts.truncation_threshold * total) {
        chosen_m = m;
        ch.tail_energy_rel = (total - kept) / total;
        break;
      }
    }
    if (chosen_m < 0)
      throw std::runtime_error(
          "channel truncation threshold unreachable within FFT padding; "
          "increase the pulse span or relax --trunc-energy");
    if (chosen_m > opts.max_memory_symbols) {
      chosen_m = opts.max_memory_symbols;
      if (chosen_m % 2 == 0) --chosen_m;
      ch.memory_capped = true;  // truncation biases the simulated true channel
      double kept = 0;
      int k_half = chosen_m * half_grid;
      for (int i = -k_half; i <= k_half; ++i)
        kept += std::norm(spec_fft.data[static_cast<size_t>(spec_fft.center + i)]);
      ch.tail_energy_rel = (total - kept) / total;
    }

    int k_half = chosen_m * half_grid;
    ch.psi.rate_factor = rate;
    ch.psi.center_index = k_half;
    ch.psi.symbol_period = spec.symbol_period;
    ch.psi.tail_energy_rel = ch.tail_energy_rel;
    ch.psi.taps.assign(spec_fft.data.begin() + (spec_fft.center - k_half),
                       spec_fft.data.begin() + (spec_fft.center + k_half + 1));
  }

  ch.memory_symbols = ch.psi.center_index / half_grid;
  if (ch.memory_symbols % 2 != 1) throw std::logic_error("channel memory must be odd");
  ch.psi2.resize(static_cast<size_t>(2 * ch.memory_symbols + 1));
  for (int j = -ch.memory_symbols; j <= ch.memory_symbols; ++j)
    ch.psi2[static_cast<size_t>(j + ch.memory_symbols)] =
        ch.psi.taps[static_cast<size_t>(ch.psi.center_index + j * half_grid)];
  return ch;
}

std::vector<cplx> bandlimited_psi2(const DiscreteChannel& ch, double bandwidth, int half_taps) {
  PaddedSpectrum spec_fft = padded_fft(ch.psi);
  const double dt = ch.psi.sample_interval();
  const size_t n = spec_fft.data.size();
  for (size_t k = 0; k < n; ++k)
    if (std::abs(bin_frequency(k, n, dt)) > bandwidth / 2.0) spec_fft.data[k] = 0;
  detail::fft_inverse(spec_fft.data);

  const int half_grid = ch.psi.rate_factor / 2;
  std::vector<cplx> out(static_cast<size_t>(2 * half_taps + 1));
  for (int j = -half_taps; j <= half_taps; ++j) {
    int idx = spec_fft.center + j * half_grid;
    out[static_cast<size_t>(j + half_taps)] =
        (idx >= 0 && idx < static_cast<int>(n)) ? spec_fft.data[static_cast<size_t>(idx)] : 0;
  }
  return out;
}

}  // namespace ddr
