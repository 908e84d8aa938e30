#include "ddr/trellis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ddr {

namespace {

constexpr double kLog2e = std::numbers::log2e;

double log2_gauss(double x, double mu, double var) {
  double d = x - mu;
  return -0.5 * std::log2(2.0 * std::numbers::pi * var) - kLog2e * d * d / (2.0 * var);
}

// Block bootstrap over per-step rate increments; 1.96-sigma half width.
double bootstrap_half_width(const std::vector<double>& r, uint64_t seed) {
  size_t n = r.size();
  if (n < 8) return 0.0;
  size_t block = std::min<size_t>(1000, std::max<size_t>(1, n / 8));
  size_t n_blocks = n / block;
  std::vector<double> means(n_blocks);
  for (size_t b = 0; b < n_blocks; ++b) {
    double s = 0;
    for (size_t i = 0; i < block; ++i) s += r[b * block + i];
    means[b] = s / static_cast<double>(block);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, n_blocks - 1);
  const int resamples = 200;
  double acc = 0, acc2 = 0;
  for (int it = 0; it < resamples; ++it) {
    double m = 0;
    for (size_t b = 0; b < n_blocks; ++b) m += means[pick(rng)];
    m /= static_cast<double>(n_blocks);
    acc += m;
    acc2 += m * m;
  }
  double var = acc2 / resamples - (acc / resamples) * (acc / resamples);
  return 1.96 * std::sqrt(std::max(0.0, var));
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

std::vector<cplx> aux_taps(const DiscreteChannel& ch, int mem,
                           std::optional<double> select_bandwidth) {
  if (mem < 1 || mem % 2 != 1) throw std::invalid_argument("auxiliary memory must be odd");
  if (select_bandwidth) return bandlimited_psi2(ch, *select_bandwidth, mem);
  std::vector<cplx> out(static_cast<size_t>(2 * mem + 1), cplx(0, 0));
  for (int j = -mem; j <= mem; ++j)
    if (std::abs(j) <= ch.memory_symbols) out[static_cast<size_t>(j + mem)] = ch.psi2_tap(j);
  return out;
}

AuxOutputs aux_noiseless_outputs(const std::vector<cplx>& taps, int mem, const Constellation& c,
                                 double gain, const StepSequence& steps) {
  if (static_cast<int>(taps.size()) != 2 * mem + 1)
    throw std::invalid_argument("tap count does not match memory");
  if (steps.mem != mem) throw std::invalid_argument("step grouping does not match memory");
  AuxOutputs out;
  size_t n = steps.steps();
  out.z_diamond.resize(n);
  out.z_spade.resize(n);
  auto tap = [&](int off) { return taps[static_cast<size_t>(off + mem)]; };
  for (size_t k = 0; k < n; ++k) {
    const int* win = steps.context.data() + k;  // x_{kappa-mem} .. x_{kappa}
    cplx d = 0, s = 0;
    for (int j = 0; j < mem; ++j) {
      cplx x = gain * c.point(win[j]);
      d += x * tap(mem - 1 - 2 * j);
      s += x * tap(mem - 2 * j);
    }
    s += gain * c.point(win[mem]) * tap(-mem);
    out.z_diamond[k] = std::norm(d);
    out.z_spade[k] = std::norm(s);
  }
  return out;
}

AuxiliaryChannel estimate_from_steps(std::vector<cplx> taps, int mem, const Constellation& c,
                                     double gain, const StepSequence& steps) {
  AuxiliaryChannel aux;
  aux.mem = mem;
  aux.psi_prime = std::move(taps);
  AuxOutputs zs = aux_noiseless_outputs(aux.psi_prime, mem, c, gain, steps);
  double m1 = 0, m2 = 0, v1 = 0, v2 = 0;
  size_t n = steps.steps();
  for (size_t k = 0; k < n; ++k) {
    m1 += steps.diamond[k] - zs.z_diamond[k];
    m2 += steps.spade[k] - zs.z_spade[k];
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  for (size_t k = 0; k < n; ++k) {
    double d1 = steps.diamond[k] - zs.z_diamond[k] - m1;
    double d2 = steps.spade[k] - zs.z_spade[k] - m2;
    v1 += d1 * d1;
    v2 += d2 * d2;
  }
  v1 /= static_cast<double>(n);
  v2 /= static_cast<double>(n);
  aux.mu1 = m1;
  aux.mu2 = m2;
  constexpr double kVarFloor = 1e-12;
  aux.variance_clamped = v1 < kVarFloor || v2 < kVarFloor;
  aux.var1 = std::max(v1, kVarFloor);
  aux.var2 = std::max(v2, kVarFloor);
  return aux;
}

AuxiliaryChannel estimate_aux_params(const LinkConfig& cfg, int aux_mem, size_t n_train,
                                     uint64_t train_seed) {
  if (n_train < 1000) throw std::invalid_argument("training needs at least 1000 symbols");
  LinkConfig train = cfg;
  train.n_symbols = n_train;
  train.seed = train_seed;
  train.guard_symbols = std::max(train.guard_symbols, aux_mem);
  LinkRealization real = simulate(train);
  StepSequence steps = make_steps(real, aux_mem, /*noisy=*/true, /*include_tail=*/false);

  std::optional<double> select;
  if (cfg.wdm) select = cfg.wdm->select_bw();
  return estimate_from_steps(aux_taps(*cfg.channel, aux_mem, select), aux_mem, *cfg.constellation,
                             real.gain, steps);
}

double aux_objective(const std::vector<cplx>& taps, int mem, const Constellation& c, double gain,
                     const StepSequence& steps, double mu1, double mu2, double var1, double var2) {
  AuxOutputs zs = aux_noiseless_outputs(taps, mem, c, gain, steps);
  double acc = 0;
  size_t n = steps.steps();
  for (size_t k = 0; k < n; ++k) {
    acc -= log2_gauss(steps.diamond[k], zs.z_diamond[k] + mu1, var1);
    acc -= log2_gauss(steps.spade[k], zs.z_spade[k] + mu2, var2);
  }
  return acc / static_cast<double>(2 * n);
}

Trellis::Trellis(const AuxiliaryChannel& aux, const Constellation& c, double gain, bool force)
    : q_(c.q()), mem_(aux.mem), gain_(gain), cons_(&c) {
  if (mem_ < 1) throw std::invalid_argument("trellis memory must be positive");
  double states_est = std::pow(static_cast<double>(q_), mem_);
  double transitions = states_est * q_;
  if (transitions > 16777216.0 && !force)
    throw std::runtime_error(
        "trellis has " + std::to_string(static_cast<unsigned long long>(transitions)) +
        " transitions per step (> 2^24); expect roughly " +
        std::to_string(static_cast<unsigned long long>(transitions / 4e6)) +
        " ms per 1000 steps -- pass force to proceed");
  n_states_ = 1;
  for (int i = 0; i < mem_; ++i) n_states_ *= static_cast<size_t>(q_);
  mod_ = n_states_ / static_cast<size_t>(q_);

  z_diamond_.resize(n_states_);
  z_spade_.resize(n_states_ * static_cast<size_t>(q_));
  std::vector<int> digits(static_cast<size_t>(mem_));
  auto tap = [&](int off) { return aux.psi_prime[static_cast<size_t>(off + mem_)]; };
  for (size_t s = 0; s < n_states_; ++s) {
    size_t rem = s;
    for (int j = mem_ - 1; j >= 0; --j) {  // newest symbol is the least digit
      digits[static_cast<size_t>(j)] = static_cast<int>(rem % static_cast<size_t>(q_));
      rem /= static_cast<size_t>(q_);
    }
    cplx d = 0, w = 0;
    for (int j = 0; j < mem_; ++j) {
      cplx x = gain_ * c.point(digits[static_cast<size_t>(j)]);
      d += x * tap(mem_ - 1 - 2 * j);
      w += x * tap(mem_ - 2 * j);
    }
    z_diamond_[s] = std::norm(d);
    for (int a = 0; a < q_; ++a)
      z_spade_[s * static_cast<size_t>(q_) + static_cast<size_t>(a)] =
          std::norm(w + gain_ * c.point(a) * tap(-mem_));
  }
}

size_t Trellis::state_of(const int* window) const {
  size_t s = 0;
  for (int j = 0; j < mem_; ++j) s = s * static_cast<size_t>(q_) + static_cast<size_t>(window[j]);
  return s;
}

double Trellis::branch_metric(const AuxiliaryChannel& aux, size_t s, int input, double yd,
                              double ys) const {
  double gd = std::exp2(log2_gauss(yd, z_diamond(s) + aux.mu1, aux.var1));
  double gs = std::exp2(log2_gauss(ys, z_spade(s, input) + aux.mu2, aux.var2));
  return gd * gs / static_cast<double>(q_);
}

ForwardResult forward_log_output_density(const Trellis& t, const AuxiliaryChannel& aux,
                                         const StepSequence& steps, const ForwardOptions& opts,
                                         std::vector<std::vector<double>>* alphas) {
  const size_t n_states = t.n_states();
  const int q = t.q();
  const size_t n_steps = opts.step_limit ? std::min(opts.step_limit, steps.steps()) : steps.steps();
  const double inv_q = 1.0 / static_cast<double>(q);
  const double c1 = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var1);
  const double c2 = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var2);
  const double k1 = 1.0 / (2.0 * aux.var1);
  const double k2 = 1.0 / (2.0 * aux.var2);

  ForwardResult res;
  res.step_log2.resize(n_steps);

  if (!opts.log_domain) {
    std::vector<double> alpha(n_states, 0.0), next(n_states, 0.0);
    alpha[t.state_of(steps.context.data())] = 1.0;
    if (alphas) {
      alphas->clear();
      alphas->reserve(n_steps + 1);
      alphas->push_back(alpha);
    }
    for (size_t k = 0; k < n_steps; ++k) {
      const double yd = steps.diamond[k];
      const double ys = steps.spade[k];
      const bool known = steps.known[k] != 0;
      const int fixed = known ? steps.input_at(k + 1) : -1;
      std::fill(next.begin(), next.end(), 0.0);
      for (size_t s = 0; s < n_states; ++s) {
        double a0 = alpha[s];
        if (a0 == 0.0) continue;
        double dd = yd - t.z_diamond(s) - aux.mu1;
        double base = a0 * c1 * std::exp(-dd * dd * k1);
        if (base == 0.0) continue;
        if (opts.diamond_only) {
          if (known) {
            next[t.next_state(s, fixed)] += base;
          } else {
            double w = base * inv_q;
            for (int a = 0; a < q; ++a) next[t.next_state(s, a)] += w;
          }
        } else if (known) {
          double ds = ys - t.z_spade(s, fixed) - aux.mu2;
          next[t.next_state(s, fixed)] += base * c2 * std::exp(-ds * ds * k2);
        } else {
          double w = base * inv_q;
          size_t ns0 = t.next_state(s, 0);
          const double* zs = t.z_spade_row(s);
          for (int a = 0; a < q; ++a) {
            double ds = ys - zs[a] - aux.mu2;
            next[ns0 + static_cast<size_t>(a)] += w * c2 * std::exp(-ds * ds * k2);
          }
        }
      }
      double sum = 0;
      for (double v : next) sum += v;
      if (!(sum > 0))
        throw std::runtime_error("forward recursion underflow at step " + std::to_string(k + 1) +
                                 "; retry with the log-domain recursion");
      double inv = 1.0 / sum;
      for (size_t s = 0; s < n_states; ++s) alpha[s] = next[s] * inv;
      res.step_log2[k] = std::log2(sum);
      res.log2_py += res.step_log2[k];
      if (alphas) alphas->push_back(alpha);
    }
    return res;
  }

  // Log-domain variant for extreme SNR.
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double lc1 = std::log(c1), lc2 = std::log(c2), lq = std::log(inv_q);
  std::vector<double> alpha(n_states, neg_inf), next(n_states, neg_inf);
  alpha[t.state_of(steps.context.data())] = 0.0;
  for (size_t k = 0; k < n_steps; ++k) {
    const double yd = steps.diamond[k];
    const double ys = steps.spade[k];
    const bool known = steps.known[k] != 0;
    const int fixed = known ? steps.input_at(k + 1) : -1;
    std::fill(next.begin(), next.end(), neg_inf);
    for (size_t s = 0; s < n_states; ++s) {
      if (alpha[s] == neg_inf) continue;
      double dd = yd - t.z_diamond(s) - aux.mu1;
      double base = alpha[s] + lc1 - dd * dd * k1;
      if (opts.diamond_only) {
        if (known) {
          size_t ns = t.next_state(s, fixed);
          next[ns] = log_add(next[ns], base);
        } else {
          for (int a = 0; a < q; ++a) {
            size_t ns = t.next_state(s, a);
            next[ns] = log_add(next[ns], base + lq);
          }
        }
      } else if (known) {
        double ds = ys - t.z_spade(s, fixed) - aux.mu2;
        size_t ns = t.next_state(s, fixed);
        next[ns] = log_add(next[ns], base + lc2 - ds * ds * k2);
      } else {
        for (int a = 0; a < q; ++a) {
          double ds = ys - t.z_spade(s, a) - aux.mu2;
          size_t ns = t.next_state(s, a);
          next[ns] = log_add(next[ns], base + lq + lc2 - ds * ds * k2);
        }
      }
    }
    double lse = neg_inf;
    for (double v : next) lse = log_add(lse, v);
    if (lse == neg_inf)
      throw std::runtime_error("log-domain forward recursion reached an empty state set");
    for (size_t s = 0; s < n_states; ++s) alpha[s] = next[s] - lse;
    res.step_log2[k] = lse * kLog2e;
    res.log2_py += res.step_log2[k];
  }
  return res;
}

ForwardResult forward_log_conditional_density(const Trellis& t, const AuxiliaryChannel& aux,
                                              const StepSequence& steps,
                                              const ForwardOptions& opts) {
  const size_t n_steps = opts.step_limit ? std::min(opts.step_limit, steps.steps()) : steps.steps();
  ForwardResult res;
  res.step_log2.resize(n_steps);
  size_t s = t.state_of(steps.context.data());
  for (size_t k = 0; k < n_steps; ++k) {
    int a = steps.input_at(k + 1);
    double v = log2_gauss(steps.diamond[k], t.z_diamond(s) + aux.mu1, aux.var1);
    if (!opts.diamond_only) v += log2_gauss(steps.spade[k], t.z_spade(s, a) + aux.mu2, aux.var2);
    res.step_log2[k] = v;
    res.log2_py += v;
    s = t.next_state(s, a);
  }
  return res;
}

RateEstimate forward_rate(const Trellis& t, const AuxiliaryChannel& aux, const StepSequence& steps,
                          bool decompose, bool log_domain, uint64_t bootstrap_seed) {
  ForwardOptions opts;
  opts.log_domain = log_domain;
  opts.step_limit = steps.n_rate_steps;

  ForwardResult cond = forward_log_conditional_density(t, aux, steps, opts);
  ForwardResult out = forward_log_output_density(t, aux, steps, opts);

  const size_t n = cond.step_log2.size();
  RateEstimate r;
  r.log2_py = out.log2_py;
  std::vector<double> per_step(n);
  for (size_t k = 0; k < n; ++k) per_step[k] = cond.step_log2[k] - out.step_log2[k];
  r.rate_total = (cond.log2_py - out.log2_py) / static_cast<double>(n);
  r.half_width_total = bootstrap_half_width(per_step, bootstrap_seed);

  if (decompose) {
    opts.diamond_only = true;
    ForwardResult cond_d = forward_log_conditional_density(t, aux, steps, opts);
    ForwardResult out_d = forward_log_output_density(t, aux, steps, opts);
    for (size_t k = 0; k < n; ++k) per_step[k] = cond_d.step_log2[k] - out_d.step_log2[k];
    r.rate_diamond = (cond_d.log2_py - out_d.log2_py) / static_cast<double>(n);
    r.half_width_diamond = bootstrap_half_width(per_step, bootstrap_seed + 1);
    r.rate_spade_cond = r.rate_total - r.rate_diamond;  // chain rule, exact
  }
  return r;
}

double awgn_entropy_rate(double sigma2) {
  if (!(sigma2 > 0)) throw std::invalid_argument("noise variance must be positive");
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * sigma2);
}

}  // namespace ddr
