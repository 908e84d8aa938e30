#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ddr/fiber.hpp"

using namespace ddr;

namespace {
constexpr double kBaud = 35e9;
constexpr double kT = 1.0 / kBaud;

DiscreteChannel make_channel(double length_km, int span = 8) {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  SampledFilter pulse = transmit_pulse_taps(spec, 4, span);
  FiberParams fiber;
  fiber.length_m = length_km * 1000.0;
  return build_discrete_channel(pulse, spec, fiber);
}
}  // namespace

TEST_CASE("cd response is all-pass") {
  FiberParams p;
  p.length_m = 0;
  CHECK(cd_frequency_response(p, 12.3e9) == cplx(1, 0));
  p.length_m = 30000;
  for (double f : {-25e9, -1e9, 0.0, 5e9, 17.5e9}) {
    CHECK(std::abs(std::abs(cd_frequency_response(p, f)) - 1.0) < 1e-12);
  }
}

TEST_CASE("cd phase regression at 17.5 GHz over 30 km") {
  // independent high-precision evaluation of (beta2/2) (2 pi f)^2 L
  long double w = 2.0L * 3.14159265358979323846264338327950288L * 17.5e9L;
  long double phase = 0.5L * (-2.168e-26L) * w * w * 30000.0L;
  FiberParams p;
  p.length_m = 30000;
  cplx h = cd_frequency_response(p, 17.5e9);
  CHECK(std::abs(h.real() - std::cos(static_cast<double>(phase))) < 1e-12);
  CHECK(std::abs(h.imag() - std::sin(static_cast<double>(phase))) < 1e-12);
  // locked regression value
  CHECK(static_cast<double>(phase) == doctest::Approx(-3.9318).epsilon(1e-4));
}

TEST_CASE("identity channel keeps the pulse taps bit-identical") {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  SampledFilter pulse = transmit_pulse_taps(spec, 4, 8);
  DiscreteChannel ch = make_channel(0.0);
  REQUIRE(ch.psi.taps.size() == pulse.taps.size());
  for (size_t i = 0; i < pulse.taps.size(); ++i) CHECK(ch.psi.taps[i] == pulse.taps[i]);
  CHECK(ch.memory_symbols == 2 * 8 + 1);
  CHECK(ch.memory_symbols % 2 == 1);
  CHECK(ch.rx_transparent);
  CHECK(ch.loss_linear == 1.0);
}

TEST_CASE("dispersion conserves energy and spreads memory") {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  SampledFilter pulse = transmit_pulse_taps(spec, 4, 8);
  DiscreteChannel ch30 = make_channel(30.0);
  double e_pulse = 0, e_psi = 0;
  for (auto& t : pulse.taps) e_pulse += std::norm(t);
  for (auto& t : ch30.psi.taps) e_psi += std::norm(t);
  CHECK(std::abs(e_psi - e_pulse) / e_pulse < 2e-6);

  DiscreteChannel ch1 = make_channel(1.0);
  CHECK(ch30.memory_symbols > ch1.memory_symbols);
  CHECK(ch30.memory_symbols % 2 == 1);
  CHECK(ch30.psi2.size() == static_cast<size_t>(2 * ch30.memory_symbols + 1));
}

TEST_CASE("beta2 sign flip conjugates the taps") {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  SampledFilter pulse = transmit_pulse_taps(spec, 4, 8);
  FiberParams plus, minus;
  plus.length_m = minus.length_m = 20000;
  minus.beta2 = -plus.beta2;
  DiscreteChannel a = build_discrete_channel(pulse, spec, plus);
  DiscreteChannel b = build_discrete_channel(pulse, spec, minus);
  REQUIRE(a.psi.taps.size() == b.psi.taps.size());
  for (size_t i = 0; i < a.psi.taps.size(); ++i)
    CHECK(std::abs(a.psi.taps[i] - std::conj(b.psi.taps[i])) < 1e-12 * std::abs(a.psi.taps[i] + 1e-30));
}

TEST_CASE("attenuation is a pure snr shift") {
  FiberParams p;
  p.length_m = 0;
  CHECK(apply_attenuation(7.5, p) == 7.5);
  p.length_m = 30000;
  CHECK(apply_attenuation(10.0, p) == doctest::Approx(4.0));
  p.length_m = 10000;
  CHECK(apply_attenuation(0.0, p) == doctest::Approx(-2.0));
  DiscreteChannel ch = make_channel(30.0);
  CHECK(ch.loss_linear == doctest::Approx(std::pow(10.0, -0.6)));
}

TEST_CASE("memory cap and invalid input") {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  SampledFilter pulse = transmit_pulse_taps(spec, 4, 8);
  FiberParams fiber;
  fiber.length_m = 30000;
  ChannelBuildOptions opts;
  opts.max_memory_symbols = 9;
  DiscreteChannel ch = build_discrete_channel(pulse, spec, fiber, opts);
  CHECK(ch.memory_capped);
  CHECK(ch.memory_symbols <= 9);
  CHECK(ch.tail_energy_rel > opts.truncation_threshold);

  SampledFilter zero = pulse;
  for (auto& t : zero.taps) t = 0;
  CHECK_THROWS_AS(build_discrete_channel(zero, spec, fiber), std::invalid_argument);
}

TEST_CASE("bandlimited taps reduce to psi2 when the band is wide") {
  DiscreteChannel ch = make_channel(0.0);
  auto wide = bandlimited_psi2(ch, 10 * kBaud, ch.memory_symbols);
  for (int j = -ch.memory_symbols; j <= ch.memory_symbols; ++j)
    CHECK(std::abs(wide[static_cast<size_t>(j + ch.memory_symbols)] - ch.psi2_tap(j)) <
          1e-9 / kT);
}
