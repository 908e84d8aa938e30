#include "ddr/detector.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddr {

namespace {

// Backward metrics for every step boundary, normalized per step.
// betas[k][s] = scaled p(y_{k+1}^K | s_k); betas[K] is the terminal metric.
std::vector<std::vector<double>> backward_pass(const Trellis& t, const AuxiliaryChannel& aux,
                                               const StepSequence& steps) {
  const size_t n_states = t.n_states();
  const int q = t.q();
  const size_t n_steps = steps.steps();
  const double inv_q = 1.0 / static_cast<double>(q);
  const double c1 = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var1);
  const double c2 = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var2);
  const double k1 = 1.0 / (2.0 * aux.var1);
  const double k2 = 1.0 / (2.0 * aux.var2);

  std::vector<std::vector<double>> betas(n_steps + 1);
  betas[n_steps].assign(n_states, 1.0 / static_cast<double>(n_states));
  for (size_t k = n_steps; k-- > 0;) {
    const double yd = steps.diamond[k];
    const double ys = steps.spade[k];
    const bool known = steps.known[k] != 0;
    const int fixed = known ? steps.input_at(k + 1) : -1;
    const std::vector<double>& nxt = betas[k + 1];
    std::vector<double>& cur = betas[k];
    cur.assign(n_states, 0.0);
    double sum = 0;
    for (size_t s = 0; s < n_states; ++s) {
      double dd = yd - t.z_diamond(s) - aux.mu1;
      double gd = c1 * std::exp(-dd * dd * k1);
      double acc = 0;
      if (known) {
        double ds = ys - t.z_spade(s, fixed) - aux.mu2;
        acc = c2 * std::exp(-ds * ds * k2) * nxt[t.next_state(s, fixed)];
      } else {
        const double* zs = t.z_spade_row(s);
        size_t ns0 = t.next_state(s, 0);
        for (int a = 0; a < q; ++a) {
          double ds = ys - zs[a] - aux.mu2;
          acc += c2 * std::exp(-ds * ds * k2) * nxt[ns0 + static_cast<size_t>(a)];
        }
        acc *= inv_q;
      }
      cur[s] = gd * acc;
      sum += cur[s];
    }
    if (!(sum > 0))
      throw std::runtime_error("backward recursion underflow at step " + std::to_string(k + 1));
    double inv = 1.0 / sum;
    for (double& v : cur) v *= inv;
  }
  return betas;
}

}  // namespace

AppTable forward_backward(const Trellis& t, const AuxiliaryChannel& aux, const StepSequence& steps,
                          TerminalMode mode) {
  if (mode == TerminalMode::KnownTail) {
    bool has_tail = steps.steps() > steps.n_rate_steps;
    if (!has_tail)
      throw std::invalid_argument("known-tail detection needs a step sequence with tail steps");
  }
  const size_t n_states = t.n_states();
  const int q = t.q();
  const size_t n_data = steps.n_rate_steps;
  const double inv_q = 1.0 / static_cast<double>(q);
  const double c1 = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var1);
  const double c2 = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var2);
  const double k1 = 1.0 / (2.0 * aux.var1);
  const double k2 = 1.0 / (2.0 * aux.var2);

  std::vector<std::vector<double>> alphas;
  ForwardOptions opts;
  ForwardResult fw = forward_log_output_density(t, aux, steps, opts, &alphas);
  std::vector<std::vector<double>> betas = backward_pass(t, aux, steps);

  AppTable out;
  out.n_steps = n_data;
  out.q = q;
  out.log2_py = fw.log2_py;
  out.posteriors.assign(n_data * static_cast<size_t>(q), 0.0);
  out.pair_posteriors.assign(n_data * static_cast<size_t>(q) * static_cast<size_t>(q), 0.0);

  std::vector<double> sigma(static_cast<size_t>(q));
  for (size_t k = 0; k < n_data; ++k) {
    const double yd = steps.diamond[k];
    const double ys = steps.spade[k];
    const std::vector<double>& alpha = alphas[k];
    const std::vector<double>& beta = betas[k + 1];
    double* post = out.posteriors.data() + k * static_cast<size_t>(q);
    double* pairs = out.pair_posteriors.data() + k * static_cast<size_t>(q) * static_cast<size_t>(q);
    double total = 0;
    for (size_t s = 0; s < n_states; ++s) {
      double a0 = alpha[s];
      if (a0 == 0.0) continue;
      double dd = yd - t.z_diamond(s) - aux.mu1;
      double base = a0 * c1 * std::exp(-dd * dd * k1) * inv_q;
      if (base == 0.0) continue;
      const double* zs = t.z_spade_row(s);
      size_t ns0 = t.next_state(s, 0);
      int prev = t.newest_symbol(s);
      for (int a = 0; a < q; ++a) {
        double ds = ys - zs[a] - aux.mu2;
        double v = base * c2 * std::exp(-ds * ds * k2) * beta[ns0 + static_cast<size_t>(a)];
        post[a] += v;
        pairs[prev * q + a] += v;
        total += v;
      }
    }
    if (!(total > 0))
      throw std::runtime_error("posterior underflow at step " + std::to_string(k + 1));
    double inv = 1.0 / total;
    for (int a = 0; a < q; ++a) post[a] *= inv;
    for (int i = 0; i < q * q; ++i) pairs[i] *= inv;
  }
  return out;
}

std::vector<int> map_decide(const AppTable& apps) {
  std::vector<int> out(apps.n_steps);
  for (size_t k = 0; k < apps.n_steps; ++k) {
    int best = 0;
    double best_p = apps.app(k, 0);
    for (int a = 1; a < apps.q; ++a) {
      double p = apps.app(k, a);
      if (p > best_p) {
        best_p = p;
        best = a;
      }
    }
    out[k] = best;
  }
  return out;
}

std::vector<int> decide_info(const AppTable& apps, const Constellation& c, DecisionMode mode) {
  const int q = apps.q;
  if (mode == DecisionMode::Hard) return c.differential_decode(map_decide(apps));

  // Joint mode marginalizes the pair posteriors through the differential map.
  // Needs either an all-singleton alphabet (PAM) or none (ASK/QAM rings).
  bool any_singleton = false, all_singleton = true;
  for (int a = 0; a < q; ++a) {
    bool s = c.ring_is_singleton(c.ring_of(a));
    any_singleton |= s;
    all_singleton &= s;
  }
  if (any_singleton && !all_singleton)
    throw std::invalid_argument(
        "joint differential decision needs uniform ring structure; use the hard decision mode");

  const int cycle = c.phase_cycle();
  // decode_pair[prev][a] = info index implied by consecutive transmit symbols
  std::vector<int> decode_pair(static_cast<size_t>(q) * static_cast<size_t>(q));
  std::vector<int> decode_first(static_cast<size_t>(q));
  for (int a = 0; a < q; ++a) {
    int r = c.ring_of(a);
    if (c.ring_is_singleton(r)) {
      decode_first[static_cast<size_t>(a)] = a;
      for (int b = 0; b < q; ++b) decode_pair[static_cast<size_t>(b * q + a)] = a;
    } else {
      decode_first[static_cast<size_t>(a)] = c.point_at(r, c.phase_of(a));  // reference index 0
      for (int b = 0; b < q; ++b) {
        int inc = ((c.phase_of(a) - c.phase_of(b)) % cycle + cycle) % cycle;
        decode_pair[static_cast<size_t>(b * q + a)] = c.point_at(r, inc);
      }
    }
  }

  std::vector<int> out(apps.n_steps);
  std::vector<double> mass(static_cast<size_t>(q));
  for (size_t k = 0; k < apps.n_steps; ++k) {
    std::fill(mass.begin(), mass.end(), 0.0);
    if (k == 0) {
      for (int a = 0; a < q; ++a) mass[static_cast<size_t>(decode_first[static_cast<size_t>(a)])] += apps.app(0, a);
    } else {
      for (int b = 0; b < q; ++b)
        for (int a = 0; a < q; ++a)
          mass[static_cast<size_t>(decode_pair[static_cast<size_t>(b * q + a)])] += apps.pair(k, b, a);
    }
    int best = 0;
    for (int u = 1; u < q; ++u)
      if (mass[static_cast<size_t>(u)] > mass[static_cast<size_t>(best)]) best = u;
    out[k] = best;
  }
  return out;
}

DetectionReport measure_ser(const LinkConfig& cfg, const Trellis& t, const AuxiliaryChannel& aux,
                            size_t n_trials, DecisionMode mode, TerminalMode terminal) {
  DetectionReport rep;
  rep.snr_db = cfg.snr_db;
  rep.aux_memory = aux.mem;
  for (size_t trial = 0; trial < n_trials; ++trial) {
    LinkConfig c = cfg;
    c.seed = n_trials == 1 ? cfg.seed : mix_seed(cfg.seed, trial);
    c.guard_symbols = std::max(c.guard_symbols, aux.mem);
    LinkRealization real = simulate(c);
    StepSequence steps =
        make_steps(real, aux.mem, /*noisy=*/true, /*include_tail=*/terminal == TerminalMode::KnownTail);
    AppTable apps = forward_backward(t, aux, steps, terminal);
    std::vector<int> info_hat = decide_info(apps, *cfg.constellation, mode);
    for (size_t k = 0; k < real.n_data; ++k)
      if (info_hat[k] != real.info_indices[k]) ++rep.errors;
    rep.n_symbols += real.n_data;
  }
  rep.ser = rep.n_symbols ? static_cast<double>(rep.errors) / static_cast<double>(rep.n_symbols) : 0.0;
  return rep;
}

}  // namespace ddr
