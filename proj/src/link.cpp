#include "ddr/link.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ddr {

namespace {

// Autocorrelation-based average transmit power per symbol period for unit
// amplitude gain: E|X|^2 * e_0 + |E X|^2 * sum_{m != 0} e_m, all over T_s.
double unit_gain_power(const Constellation& c, const std::vector<cplx>& taps, double dt,
                       int rate_per_symbol, double symbol_period) {
  cplx mean = 0;
  for (const cplx& p : c.points()) mean += p;
  mean /= static_cast<double>(c.q());

  auto autocorr = [&](int lag_samples) {
    cplx acc = 0;
    for (int i = 0; i < static_cast<int>(taps.size()); ++i) {
      int j = i - lag_samples;
      if (j < 0 || j >= static_cast<int>(taps.size())) continue;
      acc += taps[static_cast<size_t>(i)] * std::conj(taps[static_cast<size_t>(j)]);
    }
    return acc * dt;
  };

  double e0 = autocorr(0).real();
  double cross = 0;
  int max_lag = static_cast<int>(taps.size()) / rate_per_symbol;
  for (int m = 1; m <= max_lag; ++m) cross += 2.0 * autocorr(m * rate_per_symbol).real();
  return (c.mean_power() * e0 + std::norm(mean) * cross) / symbol_period;
}

// Dense field synthesis: symbols placed every `rate` samples, convolved with
// centered taps. out[i] corresponds to tap offset i - center relative to the
// first symbol.
std::vector<cplx> synthesize_field(const std::vector<int>& tx, const Constellation& c, double gain,
                                   const SampledFilter& psi) {
  const int rate = psi.rate_factor;
  const int len = static_cast<int>(psi.taps.size());
  std::vector<cplx> field(static_cast<size_t>((static_cast<int>(tx.size()) - 1) * rate + len),
                          cplx(0, 0));
  for (size_t k = 0; k < tx.size(); ++k) {
    cplx s = gain * c.point(tx[k]);
    if (s == cplx(0, 0)) continue;
    cplx* out = field.data() + k * static_cast<size_t>(rate);
    for (int t = 0; t < len; ++t) out[t] += s * psi.taps[static_cast<size_t>(t)];
  }
  return field;
}

// Full linear convolution with a centered filter whose taps are scaled by dt
// (discrete approximation of the continuous convolution).
std::vector<double> fir_real(const std::vector<double>& v, const SampledFilter& f) {
  const double dt = f.sample_interval();
  const int len = static_cast<int>(f.taps.size());
  std::vector<double> out(v.size() + static_cast<size_t>(len) - 1, 0.0);
  for (size_t i = 0; i < v.size(); ++i) {
    double x = v[i];
    if (x == 0.0) continue;
    double* o = out.data() + i;
    for (int t = 0; t < len; ++t) o[t] += x * f.taps[static_cast<size_t>(t)].real() * dt;
  }
  return out;
}

std::vector<cplx> fir_complex(const std::vector<cplx>& v, const SampledFilter& f) {
  const double dt = f.sample_interval();
  const int len = static_cast<int>(f.taps.size());
  std::vector<cplx> out(v.size() + static_cast<size_t>(len) - 1, cplx(0, 0));
  for (size_t i = 0; i < v.size(); ++i) {
    cplx x = v[i];
    if (x == cplx(0, 0)) continue;
    cplx* o = out.data() + i;
    for (int t = 0; t < len; ++t) o[t] += x * f.taps[static_cast<size_t>(t)] * dt;
  }
  return out;
}

std::vector<int> draw_uniform(std::mt19937_64& rng, const Constellation& c, size_t count) {
  std::uniform_int_distribution<int> dist(0, c.q() - 1);
  std::vector<int> out(count);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double calibrate_gain(const Constellation& c, const DiscreteChannel& ch, double snr_db) {
  if (c.mean_power() <= 0) throw std::invalid_argument("constellation has zero energy");
  const double p_tx = std::pow(10.0, snr_db / 10.0);  // sigma_N^2 = 1
  double denom = unit_gain_power(c, ch.psi.taps, ch.psi.sample_interval(), ch.psi.rate_factor,
                                 ch.symbol_period());
  if (denom <= 0) throw std::invalid_argument("channel has zero energy");
  return std::sqrt(p_tx / denom);
}

ChainResult noiseless_intensity(const LinkConfig& config, const std::vector<int>& tx_full,
                                size_t n_data, double gain) {
  const DiscreteChannel& ch = *config.channel;
  const Constellation& cons = *config.constellation;
  if ((tx_full.size() - n_data) % 2 != 0)
    throw std::invalid_argument("transmit string must have equal guards on both sides");
  const int guard = static_cast<int>((tx_full.size() - n_data) / 2);

  ChainResult out;
  SampledFilter select;
  if (config.wdm) {
    select = brickwall_taps(config.wdm->select_bw(), ch.psi.rate_factor,
                            config.wdm->select_span_symbols, ch.symbol_period());
    double bw1s = ch.pulse.one_sided_bandwidth();
    if (bw1s < 0) bw1s = 0.5 * measure_bandwidth_95(ch.psi);
    if (ch.psi.rate_factor * ch.baud() < 2.0 * (config.wdm->channel_spacing + bw1s))
      throw std::invalid_argument("WDM shift aliases at the simulation rate; raise N_sim");
    if (config.wdm->select_bw() < ch.baud())
      out.warnings.push_back("channel-select bandwidth below the pulse mainlobe");
  }

  const int rate = ch.psi.rate_factor;
  const int k_psi = ch.psi.center_index;
  std::vector<cplx> field = synthesize_field(tx_full, cons, gain, ch.psi);
  // field[i] sits at absolute simulation-grid position A(i) = i - k_psi + rate*(1 - guard).
  int a0 = -k_psi + rate * (1 - guard);

  if (config.wdm) {
    const WdmConfig& w = *config.wdm;
    if (w.enable_ici) {
      std::mt19937_64 rng_l(mix_seed(config.seed, 0xa11ceULL));
      std::mt19937_64 rng_r(mix_seed(config.seed, 0xb0bULL));
      auto left = synthesize_field(draw_uniform(rng_l, cons, tx_full.size()), cons,
                                   gain * w.neighbor_gain, ch.psi);
      auto right = synthesize_field(draw_uniform(rng_r, cons, tx_full.size()), cons,
                                    gain * w.neighbor_gain, ch.psi);
      const double dt = ch.psi.sample_interval();
      for (size_t i = 0; i < field.size(); ++i) {
        double theta = 2.0 * std::numbers::pi * w.channel_spacing *
                       (static_cast<double>(a0 + static_cast<int>(i)) * dt);
        cplx rot(std::cos(theta), std::sin(theta));
        field[i] = w.center_gain * field[i] + left[i] * std::conj(rot) + right[i] * rot;
      }
    } else {
      field = fir_complex(field, select);  // transmit filter g_tx * g_c
      a0 -= select.center_index;
    }
    field = fir_complex(field, select);  // channel selection before the SLD
    a0 -= select.center_index;
  }

  std::vector<double> intensity(field.size());
  for (size_t i = 0; i < field.size(); ++i) intensity[i] = std::norm(field[i]);

  if (!(ch.rx_transparent && !config.wdm)) {
    intensity = fir_real(intensity, ch.rx);
    a0 -= ch.rx.center_index;
  }

  const int half_grid = rate / 2;
  const int p_min = 1 - guard;
  const int p_max = 2 * static_cast<int>(n_data) + guard;
  out.origin = p_min;
  out.z.resize(static_cast<size_t>(p_max - p_min + 1));
  for (int p = p_min; p <= p_max; ++p) {
    int i = p * half_grid - a0;
    out.z[static_cast<size_t>(p - p_min)] =
        (i >= 0 && i < static_cast<int>(intensity.size())) ? intensity[static_cast<size_t>(i)] : 0.0;
  }
  return out;
}

LinkRealization simulate(const LinkConfig& config) {
  if (config.channel == nullptr || config.constellation == nullptr)
    throw std::invalid_argument("link config is missing channel or constellation");
  if (config.n_symbols < 1) throw std::invalid_argument("need at least one symbol");
  const DiscreteChannel& ch = *config.channel;
  const Constellation& cons = *config.constellation;

  LinkRealization out;
  out.guard = std::max(ch.memory_symbols, config.guard_symbols);
  out.channel_memory = ch.memory_symbols;
  out.n_data = config.n_symbols;

  double gain_tx = calibrate_gain(cons, ch, config.snr_db);
  if (config.wdm && !config.wdm->enable_ici) {
    // Transmit filter g_tx * g_c changes the radiated power; recalibrate on
    // the band-limited response.
    int half = ch.memory_symbols + 2 * config.wdm->select_span_symbols;
    auto taps2 = bandlimited_psi2(ch, config.wdm->select_bw(), half);
    double denom = unit_gain_power(cons, taps2, ch.symbol_period() / 2.0, 2, ch.symbol_period());
    gain_tx = std::sqrt(std::pow(10.0, config.snr_db / 10.0) / denom);
  }
  out.gain = gain_tx * std::sqrt(ch.loss_linear);

  std::mt19937_64 rng(config.seed);
  const size_t g = static_cast<size_t>(out.guard);
  std::vector<int> preamble = draw_uniform(rng, cons, g);
  out.info_indices = draw_uniform(rng, cons, out.n_data);
  std::vector<int> tail = draw_uniform(rng, cons, g);
  std::vector<int> data_tx = cons.differential_encode(out.info_indices);

  out.tx_indices = preamble;
  out.tx_indices.insert(out.tx_indices.end(), data_tx.begin(), data_tx.end());
  out.tx_indices.insert(out.tx_indices.end(), tail.begin(), tail.end());

  ChainResult chain = noiseless_intensity(config, out.tx_indices, out.n_data, out.gain);
  out.z = std::move(chain.z);
  out.origin = chain.origin;
  out.warnings = std::move(chain.warnings);

  std::normal_distribution<double> noise(0.0, 1.0);
  out.y.resize(out.z.size());
  for (size_t i = 0; i < out.z.size(); ++i) out.y[i] = out.z[i] + noise(rng);
  return out;
}

std::vector<double> LinkRealization::data_samples(bool noisy) const {
  // Samples of the data steps under the true-channel step alignment,
  // positions [1 - mem, 2 n_data - mem].
  int mem = channel_memory;
  std::vector<double> out(2 * n_data);
  for (size_t k = 1; k <= n_data; ++k) {
    int pd = 2 * static_cast<int>(k) - mem - 1;
    out[2 * (k - 1)] = noisy ? y_at(pd) : z_at(pd);
    out[2 * (k - 1) + 1] = noisy ? y_at(pd + 1) : z_at(pd + 1);
  }
  return out;
}

StepSequence make_steps(const LinkRealization& real, int mem, bool noisy, bool include_tail) {
  if (mem < 1 || mem % 2 != 1) throw std::invalid_argument("step memory must be odd and positive");
  if (mem > real.guard) throw std::invalid_argument("step memory exceeds simulated guard symbols");

  StepSequence seq;
  seq.mem = mem;
  seq.n_rate_steps = real.n_data;
  size_t steps = real.n_data + (include_tail ? static_cast<size_t>(mem) : 0);
  seq.diamond.resize(steps);
  seq.spade.resize(steps);
  seq.known.resize(steps);
  for (size_t k = 1; k <= steps; ++k) {
    int pd = 2 * static_cast<int>(k) - mem - 1;
    seq.diamond[k - 1] = noisy ? real.y_at(pd) : real.z_at(pd);
    seq.spade[k - 1] = noisy ? real.y_at(pd + 1) : real.z_at(pd + 1);
    seq.known[k - 1] = k > real.n_data ? 1 : 0;
  }
  seq.context.resize(steps + static_cast<size_t>(mem));
  for (size_t i = 0; i < seq.context.size(); ++i)
    seq.context[i] = real.tx_at(static_cast<int>(i) + 1 - mem);
  return seq;
}

}  // namespace ddr
