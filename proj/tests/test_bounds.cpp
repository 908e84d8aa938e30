#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ddr/bounds.hpp"
#include "ddr/trellis.hpp"

using namespace ddr;

namespace {
constexpr double kBaud = 35e9;
constexpr double kT = 1.0 / kBaud;

DiscreteChannel small_channel(int span = 4) {
  PulseSpec spec{PulseKind::Sinc, 0.0, kT};
  return build_discrete_channel(transmit_pulse_taps(spec, 4, span), spec, FiberParams{});
}
}  // namespace

TEST_CASE("single-intensity input pins the diamond samples") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("QPSK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  cfg.snr_db = 6;
  OutputCovariance cov = estimate_czz(cfg, 32, 1200, 21);
  // window starts on a diamond sample; |x|^2 = 1 makes them deterministic
  double diag_spade = 0, diag_diamond = 0;
  for (int i = 0; i < 32; i += 2) diag_diamond = std::max(diag_diamond, cov.c_zz(i, i));
  for (int i = 1; i < 32; i += 2) diag_spade = std::max(diag_spade, cov.c_zz(i, i));
  CHECK(diag_diamond < 1e-4 * diag_spade);

  // symmetry is exact after the symmetrization step
  CHECK((cov.c_zz - cov.c_zz.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  // cyclostationarity with period 2: the covariance is block-Toeplitz up to
  // estimation noise
  double scale = cov.c_zz.cwiseAbs().maxCoeff();
  double worst = 0;
  for (int i = 0; i + 2 < 16; ++i)
    for (int j = 0; j + 2 < 16; ++j)
      worst = std::max(worst, std::abs(cov.c_zz(i, j) - cov.c_zz(i + 2, j + 2)));
  CHECK(worst < 0.25 * scale);
}

TEST_CASE("zero signal gives a zero covariance") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("QPSK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  cfg.snr_db = 6;
  WdmConfig w;
  w.channel_spacing = kBaud;
  w.center_gain = 0.0;
  w.neighbor_gain = 0.0;
  cfg.wdm = w;
  OutputCovariance cov = estimate_czz(cfg, 16, 50, 3);
  CHECK(cov.c_zz.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(upper_bound_logdet(cov, 1.0) == doctest::Approx(0.0));
  CHECK(upper_bound_scalar(cov, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("hand-evaluated two-sample window") {
  OutputCovariance cov;
  cov.n_window = 2;
  cov.mean_z = Eigen::VectorXd::Zero(2);
  cov.c_zz = Eigen::MatrixXd::Zero(2, 2);
  cov.c_zz(0, 0) = 1.0;
  cov.c_zz(1, 1) = 3.0;
  CHECK(upper_bound_logdet(cov, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(upper_bound_scalar(cov, 1.0) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
}

TEST_CASE("isotropic covariance saturates both bounds at 1 bpcu") {
  OutputCovariance cov;
  cov.n_window = 8;
  cov.mean_z = Eigen::VectorXd::Zero(8);
  cov.c_zz = Eigen::MatrixXd::Identity(8, 8);
  CHECK(upper_bound_logdet(cov, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(upper_bound_scalar(cov, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hadamard-jensen ordering on random covariances") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 8;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    OutputCovariance cov;
    cov.n_window = n;
    cov.mean_z = Eigen::VectorXd::Zero(n);
    cov.c_zz = a * a.transpose();
    CHECK(upper_bound_logdet(cov, 0.7) <= upper_bound_scalar(cov, 0.7) + 1e-12);
  }
}

TEST_CASE("bounds dominate the measured rate") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("4-ASK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  cfg.n_symbols = 20000;
  for (double snr : {-4.0, 1.0, 6.0}) {
    cfg.snr_db = snr;
    cfg.seed = 100 + static_cast<uint64_t>(snr + 10);
    AuxiliaryChannel aux = estimate_aux_params(cfg, 5, 20000, 7);
    LinkRealization real = simulate(cfg);
    cfg.guard_symbols = 5;
    Trellis t(aux, cons, real.gain);
    StepSequence steps = make_steps(real, 5, true, false);
    RateEstimate r = forward_rate(t, aux, steps, false);
    OutputCovariance cov = estimate_czz(cfg, 128, 3000, 55);
    double lb = upper_bound_logdet(cov, 1.0);
    double ub = upper_bound_scalar(cov, 1.0);
    CHECK(r.rate_total - r.half_width_total <= lb + 1e-9);
    CHECK(lb <= ub + 1e-12);
  }
}

TEST_CASE("bounds are nondecreasing in snr") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("4-ASK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  double prev_ld = -1, prev_sc = -1;
  for (double snr : {-5.0, 0.0, 5.0, 10.0}) {
    cfg.snr_db = snr;
    OutputCovariance cov = estimate_czz(cfg, 64, 1500, 77);
    double ld = upper_bound_logdet(cov, 1.0);
    double sc = upper_bound_scalar(cov, 1.0);
    CHECK(ld >= prev_ld);
    CHECK(sc >= prev_sc);
    prev_ld = ld;
    prev_sc = sc;
  }
}

TEST_CASE("bounds converge in the window length") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("4-ASK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  cfg.snr_db = 3;
  OutputCovariance small = estimate_czz(cfg, 96, 3000, 5);
  OutputCovariance large = estimate_czz(cfg, 192, 3000, 6);
  double a = upper_bound_logdet(small, 1.0);
  double b = upper_bound_logdet(large, 1.0);
  CHECK(std::abs(a - b) < 0.05 * std::max(a, b));
}

TEST_CASE("input validation") {
  DiscreteChannel ch = small_channel();
  Constellation cons = Constellation::named("QPSK");
  LinkConfig cfg;
  cfg.channel = &ch;
  cfg.constellation = &cons;
  CHECK_THROWS_AS(estimate_czz(cfg, 15, 100, 1), std::invalid_argument);  // odd window
  CHECK_THROWS_AS(estimate_czz(cfg, 16, 1, 1), std::invalid_argument);

  OutputCovariance cov;
  cov.n_window = 2;
  cov.mean_z = Eigen::VectorXd::Zero(2);
  cov.c_zz = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(upper_bound_logdet(cov, 0.0), std::invalid_argument);
  cov.c_zz(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(upper_bound_logdet(cov, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(upper_bound_scalar(cov, 1.0), std::invalid_argument);
}
