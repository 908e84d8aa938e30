#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ddr/oracle.hpp"
#include "ddr/trellis.hpp"

using namespace ddr;

namespace {
constexpr double kBaud = 35e9;
constexpr double kT = 1.0 / kBaud;

DiscreteChannel small_channel(int span = 3) {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  return build_discrete_channel(transmit_pulse_taps(spec, 4, span), spec, FiberParams{});
}

AuxiliaryChannel toy_aux() {
  AuxiliaryChannel aux;
  aux.mem = 2;
  aux.psi_prime = {cplx(0.15, 0.05), cplx(-0.4, 0.1), cplx(1.0, 0.0), cplx(0.35, -0.2),
                   cplx(0.1, 0.0)};
  aux.mu1 = 0.02;
  aux.mu2 = -0.05;
  aux.var1 = 1.0;
  aux.var2 = 1.3;
  return aux;
}
}  // namespace

TEST_CASE("aux taps are the centered slice of psi2, zero-extended") {
  DiscreteChannel ch = small_channel();
  int mem = ch.memory_symbols;
  auto full = aux_taps(ch, mem);
  for (int j = -mem; j <= mem; ++j)
    CHECK(full[static_cast<size_t>(j + mem)] == ch.psi2_tap(j));
  auto slim = aux_taps(ch, 3);
  for (int j = -3; j <= 3; ++j) CHECK(slim[static_cast<size_t>(j + 3)] == ch.psi2_tap(j));
  auto wide = aux_taps(ch, mem + 2);
  CHECK(wide.front() == cplx(0, 0));
  CHECK(wide.back() == cplx(0, 0));
  CHECK_THROWS_AS(aux_taps(ch, 4), std::invalid_argument);
}

TEST_CASE("matched-memory residuals estimate to zero mean, unit variance") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("2-PAM");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  cfg.snr_db = 6;
  AuxiliaryChannel aux = estimate_aux_params(cfg, ch.memory_symbols, 40000, 99);
  double se_mean = 1.0 / std::sqrt(40000.0);
  double se_var = std::sqrt(2.0 / 40000.0);
  CHECK(std::abs(aux.mu1) < 4 * se_mean);
  CHECK(std::abs(aux.mu2) < 4 * se_mean);
  CHECK(std::abs(aux.var1 - 1.0) < 4 * se_var);
  CHECK(std::abs(aux.var2 - 1.0) < 4 * se_var);
  CHECK_FALSE(aux.variance_clamped);

  // noiseless residuals clamp to the variance floor
  LinkRealization real = simulate(cfg);
  StepSequence steps = make_steps(real, ch.memory_symbols, /*noisy=*/false, false);
  AuxiliaryChannel clamped = estimate_from_steps(aux_taps(ch, ch.memory_symbols),
                                                 ch.memory_symbols, cons, real.gain, steps);
  CHECK(clamped.variance_clamped);
  CHECK(clamped.var1 == 1e-12);
  CHECK(std::abs(clamped.mu1) < 1e-9);

  CHECK_THROWS_AS(estimate_aux_params(cfg, ch.memory_symbols, 100, 1), std::invalid_argument);
}

TEST_CASE("truncated memory inflates the spade residual variance") {
  DiscreteChannel ch = small_channel(6);
  Constellation cons = Constellation::named("8-PAM");
  FiberParams fiber;
  fiber.length_m = 30000;
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  DiscreteChannel ch30 = build_discrete_channel(transmit_pulse_taps(spec, 4, 6), spec, fiber);
  LinkConfig cfg;
  cfg.channel = &ch30;
  cfg.constellation = &cons;
  cfg.snr_db = 12;
  AuxiliaryChannel aux = estimate_aux_params(cfg, 3, 20000, 5);
  CHECK(aux.var2 > 1.0);
}

TEST_CASE("branch metric at the gaussian peak") {
  AuxiliaryChannel aux = toy_aux();
  Constellation cons = Constellation::named("2-PAM");
  Trellis t(aux, cons, 2.0);
  size_t s = 1;
  int a = 1;
  double yd = t.z_diamond(s) + aux.mu1;
  double ys = t.z_spade(s, a) + aux.mu2;
  double expect = 1.0 / std::sqrt(2.0 * std::numbers::pi * aux.var1) /
                  std::sqrt(2.0 * std::numbers::pi * aux.var2) / 2.0;
  CHECK(t.branch_metric(aux, s, a, yd, ys) == doctest::Approx(expect).epsilon(1e-12));

  // metric sums over inputs to the state mixture q(yd, ys | s)
  double yd2 = yd + 0.7, ys2 = ys - 0.4;
  double sum = 0;
  for (int x = 0; x < 2; ++x) sum += t.branch_metric(aux, s, x, yd2, ys2);
  double mix = 0;
  for (int x = 0; x < 2; ++x) {
    double g1 = std::exp(-std::pow(yd2 - t.z_diamond(s) - aux.mu1, 2) / (2 * aux.var1)) /
                std::sqrt(2 * std::numbers::pi * aux.var1);
    double g2 = std::exp(-std::pow(ys2 - t.z_spade(s, x) - aux.mu2, 2) / (2 * aux.var2)) /
                std::sqrt(2 * std::numbers::pi * aux.var2);
    mix += 0.5 * g1 * g2;
  }
  CHECK(sum == doctest::Approx(mix).epsilon(1e-12));

  // scaling both variances by c^2 is an affine correction of the log metric
  double c2 = 1.44;
  AuxiliaryChannel scaled = aux;
  scaled.var1 *= c2;
  scaled.var2 *= c2;
  Trellis t2(scaled, cons, 2.0);
  double m = t.branch_metric(aux, s, a, yd2, ys2);
  double ms = t2.branch_metric(scaled, s, a, yd2, ys2);
  double prefactor = std::log(1.0 / (2.0 * std::numbers::pi * std::sqrt(aux.var1 * aux.var2)) / 2.0);
  double expect_log = -std::log(c2) + prefactor + (std::log(m) - prefactor) / c2;
  CHECK(std::log(ms) == doctest::Approx(expect_log).epsilon(1e-9));
}

TEST_CASE("forward recursion equals exhaustive marginalization") {
  AuxiliaryChannel aux = toy_aux();
  Constellation cons = Constellation::named("2-PAM");
  Trellis t(aux, cons, 2.0);
  for (uint64_t trial = 0; trial < 5; ++trial) {
    StepSequence steps = oracle::sample_model_sequence(aux, cons, 2.0, 8, 400 + trial);
    ForwardResult fw = forward_log_output_density(t, aux, steps);
    double exact = oracle::exhaustive_log2_py(aux, cons, 2.0, steps, false);
    CHECK(fw.log2_py == doctest::Approx(exact).epsilon(1e-10));

    ForwardOptions d;
    d.diamond_only = true;
    ForwardResult fwd = forward_log_output_density(t, aux, steps, d);
    double exact_d = oracle::exhaustive_log2_py(aux, cons, 2.0, steps, true);
    CHECK(fwd.log2_py == doctest::Approx(exact_d).epsilon(1e-10));

    // log-domain variant agrees with the linear recursion
    ForwardOptions ld;
    ld.log_domain = true;
    ForwardResult fwl = forward_log_output_density(t, aux, steps, ld);
    CHECK(fwl.log2_py == doctest::Approx(fw.log2_py).epsilon(1e-9));
  }
}

TEST_CASE("noise-free invertible channel reaches 1 bpcu") {
  AuxiliaryChannel aux;
  aux.mem = 1;
  aux.psi_prime = {cplx(0.3, 0), cplx(1.0, 0), cplx(0.5, 0)};
  aux.var1 = 1e-6;
  aux.var2 = 1e-6;
  Constellation cons = Constellation::named("2-PAM");
  Trellis t(aux, cons, 1.0);
  StepSequence steps = oracle::sample_model_sequence(aux, cons, 1.0, 4000, 12, 1e-4);
  RateEstimate r = forward_rate(t, aux, steps, true);
  CHECK(r.rate_total == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.rate_total == doctest::Approx(r.rate_diamond + r.rate_spade_cond).epsilon(1e-12));
}

TEST_CASE("conditional density path matches the trellis tables") {
  AuxiliaryChannel aux = toy_aux();
  Constellation cons = Constellation::named("2-PAM");
  Trellis t(aux, cons, 2.0);
  StepSequence steps = oracle::sample_model_sequence(aux, cons, 2.0, 64, 9);
  AuxOutputs zs = aux_noiseless_outputs(aux.psi_prime, aux.mem, cons, 2.0, steps);
  ForwardResult cond = forward_log_conditional_density(t, aux, steps);
  double direct = 0;
  for (size_t k = 0; k < steps.steps(); ++k) {
    double d1 = steps.diamond[k] - zs.z_diamond[k] - aux.mu1;
    double d2 = steps.spade[k] - zs.z_spade[k] - aux.mu2;
    direct += -0.5 * std::log2(2 * std::numbers::pi * aux.var1) -
              std::numbers::log2e * d1 * d1 / (2 * aux.var1);
    direct += -0.5 * std::log2(2 * std::numbers::pi * aux.var2) -
              std::numbers::log2e * d2 * d2 / (2 * aux.var2);
  }
  CHECK(cond.log2_py == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("rates do not degrade as the aux memory grows") {
  DiscreteChannel ch = small_channel(2);  // memory 5
  Constellation cons = Constellation::named("2-ASK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  cfg.snr_db = 4;
  cfg.n_symbols = 20000;
  cfg.seed = 31;
  cfg.guard_symbols = ch.memory_symbols;
  LinkRealization real = simulate(cfg);

  double prev = -1e9, prev_hw = 0;
  for (int mem : {1, 3, 5}) {
    AuxiliaryChannel aux = estimate_aux_params(cfg, mem, 20000, 77);
    Trellis t(aux, cons, real.gain);
    StepSequence steps = make_steps(real, mem, true, false);
    RateEstimate r = forward_rate(t, aux, steps, false);
    CHECK(r.rate_total > prev - (prev_hw + r.half_width_total + 0.01));
    prev = r.rate_total;
    prev_hw = r.half_width_total;
  }
}

TEST_CASE("state-space guard") {
  AuxiliaryChannel aux;
  aux.mem = 9;
  aux.psi_prime.assign(19, cplx(0, 0));
  Constellation cons = Constellation::named("8-PAM");
  CHECK_THROWS_AS(Trellis(aux, cons, 1.0), std::runtime_error);
}

TEST_CASE("awgn entropy rate") {
  double h = awgn_entropy_rate(1.0);
  CHECK(h == doctest::Approx(2.0471).epsilon(1e-4));
  CHECK(awgn_entropy_rate(2.0) - h == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(awgn_entropy_rate(0.0), std::invalid_argument);
  CHECK_THROWS_AS(awgn_entropy_rate(-1.0), std::invalid_argument);

  // Monte-Carlo estimate within 3 standard errors
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  size_t n = 200000;
  double acc = 0, acc2 = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = noise(rng);
    double l = 0.5 * std::log2(2 * std::numbers::pi) + std::numbers::log2e * x * x / 2;
    acc += l;
    acc2 += l * l;
  }
  double mean = acc / static_cast<double>(n);
  double se = std::sqrt((acc2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
  CHECK(std::abs(mean - h) < 3 * se);
}

TEST_CASE("underflow raises a diagnostic") {
  AuxiliaryChannel aux = toy_aux();
  aux.var1 = 1e-12;
  aux.var2 = 1e-12;
  Constellation cons = Constellation::named("2-PAM");
  Trellis t(aux, cons, 2.0);
  StepSequence steps = oracle::sample_model_sequence(aux, cons, 2.0, 4, 77, 10.0);
  steps.diamond[0] += 1e6;  // impossible observation under every state
  CHECK_THROWS_AS(forward_log_output_density(t, aux, steps), std::runtime_error);
}
