#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "ddr/constellation.hpp"

using namespace ddr;
using namespace std::complex_literals;

TEST_CASE("built-in alphabets match the reference definitions") {
  auto pam4 = Constellation::named("4-PAM");
  REQUIRE(pam4.q() == 4);
  for (int i = 0; i < 4; ++i) CHECK(pam4.point(i) == cplx(i, 0));

  auto ask4 = Constellation::named("4-ASK");
  CHECK(ask4.point(0) == cplx(-3, 0));
  CHECK(ask4.point(3) == cplx(3, 0));

  auto qpsk = Constellation::named("QPSK");
  CHECK(qpsk.q() == 4);
  CHECK(qpsk.point(1) == cplx(0, 1));

  auto sqam = Constellation::named("8-SQAM");
  CHECK(sqam.q() == 8);

  // Induced intensity alphabets after the square-law detector.
  CHECK(pam4.intensity_levels() == std::vector<double>{0, 1, 4, 9});
  CHECK(ask4.intensity_levels() == std::vector<double>{1, 9});
  CHECK(qpsk.intensity_levels() == std::vector<double>{1});
  CHECK(sqam.intensity_levels() == std::vector<double>{1, 4});
}

TEST_CASE("ring structure") {
  auto sqam = Constellation::named("8-SQAM");
  CHECK(sqam.rings().size() == 2);
  CHECK(sqam.phase_cycle() == 4);
  auto ask4 = Constellation::named("4-ASK");
  CHECK(ask4.rings().size() == 2);
  CHECK(ask4.phase_cycle() == 2);
  auto pam8 = Constellation::named("8-PAM");
  CHECK(pam8.rings().size() == 8);
  CHECK(pam8.phase_cycle() == 1);
}

TEST_CASE("iid sampling is deterministic and uniform") {
  auto pam2 = Constellation::named("2-PAM");
  auto a = pam2.sample_iid_indices(64, 42);
  auto b = pam2.sample_iid_indices(64, 42);
  CHECK(a == b);

  // chi-square on symbol frequencies, 3 dof at Q=4
  auto qpsk = Constellation::named("QPSK");
  auto s = qpsk.sample_iid_indices(100000, 7);
  double counts[4] = {0, 0, 0, 0};
  for (int v : s) counts[v] += 1;
  double chi2 = 0, expect = 25000;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 16.3);  // 0.1% tail of chi-square(3)

  CHECK(qpsk.mean_power() == doctest::Approx(1.0));

  // E|X|^2 = 5 for 4-ASK; sample mean within 3 standard errors
  auto ask = Constellation::named("4-ASK");
  auto t = ask.sample_iid(1000000, 3);
  double p = 0;
  for (auto& v : t) p += std::norm(v);
  p /= static_cast<double>(t.size());
  CHECK(std::abs(p - 5.0) < 3 * 0.004);

  CHECK_THROWS_AS(pam2.sample_iid(0, 1), std::invalid_argument);
}

TEST_CASE("differential encoding follows the cumulative phase rule") {
  auto qpsk = Constellation::named("QPSK");
  // info phases (1,1,1) -> transmitted phase indices (1,2,3)
  std::vector<int> info{1, 1, 1};
  auto tx = qpsk.differential_encode(info);
  CHECK(tx == std::vector<int>{1, 2, 3});

  auto ask4 = Constellation::named("4-ASK");
  int p1 = ask4.index_of(1.0 + 0i), m1 = ask4.index_of(-1.0 + 0i);
  auto tx2 = ask4.differential_encode(std::vector<int>{p1, m1, m1});
  CHECK(tx2 == std::vector<int>{p1, m1, p1});

  auto sqam = Constellation::named("8-SQAM");
  auto tx3 = sqam.differential_encode(
      std::vector<int>{sqam.index_of(2i), sqam.index_of(1.0 + 0i), sqam.index_of(2.0 + 0i)});
  CHECK(tx3 == std::vector<int>{sqam.index_of(2i), sqam.index_of(1i), sqam.index_of(2i)});

  // magnitudes pass through unencoded
  CHECK(std::abs(sqam.point(tx3[0])) == doctest::Approx(2.0));
  CHECK(std::abs(sqam.point(tx3[1])) == doctest::Approx(1.0));
  CHECK(std::abs(sqam.point(tx3[2])) == doctest::Approx(2.0));
}

TEST_CASE("decode inverts encode") {
  auto qpsk = Constellation::named("QPSK");
  // exhaustive over all length-5 strings
  for (int code = 0; code < 4 * 4 * 4 * 4 * 4; ++code) {
    std::vector<int> info(5);
    int c = code;
    for (auto& v : info) {
      v = c % 4;
      c /= 4;
    }
    CHECK(qpsk.differential_decode(qpsk.differential_encode(info)) == info);
  }

  // constant-phase tx string decodes to zero increments past the first
  std::vector<int> constant(6, 2);
  auto dec = qpsk.differential_decode(constant);
  CHECK(dec[0] == 2);  // first increment measured against reference index 0
  for (size_t i = 1; i < dec.size(); ++i) CHECK(qpsk.phase_of(dec[i]) == 0);

  auto sqam = Constellation::named("8-SQAM");
  for (uint64_t trial = 0; trial < 1000; ++trial) {
    auto info = sqam.sample_iid_indices(24, 9000 + trial);
    CHECK(sqam.differential_decode(sqam.differential_encode(info)) == info);
  }

  auto pam = Constellation::named("8-PAM");
  auto info = pam.sample_iid_indices(50, 5);
  CHECK(pam.differential_encode(info) == info);  // singleton rings pass through
}

TEST_CASE("phase rotation leaves decoded increments unchanged") {
  // The property that defeats square-law phase ambiguity: a common rotation
  // of the transmit string shifts only the first decoded symbol.
  auto sqam = Constellation::named("8-SQAM");
  auto info = sqam.sample_iid_indices(40, 17);
  auto tx = sqam.differential_encode(info);
  std::vector<int> rotated(tx.size());
  for (size_t i = 0; i < tx.size(); ++i)
    rotated[i] = sqam.point_at(sqam.ring_of(tx[i]), sqam.phase_of(tx[i]) + 1);
  auto dec = sqam.differential_decode(tx);
  auto dec_rot = sqam.differential_decode(rotated);
  for (size_t i = 1; i < dec.size(); ++i) CHECK(dec_rot[i] == dec[i]);
}

TEST_CASE("custom constellations") {
  auto c = Constellation::custom(
      "tri", {{1, 0}, {-0.5, 0.8660254037844386}, {-0.5, -0.8660254037844386}});
  CHECK(c.phase_cycle() == 3);

  CHECK_THROWS_AS(Constellation::custom("empty", {}), std::invalid_argument);
  CHECK_THROWS_AS(Constellation::custom("dup", {{1, 0}, {1, 0}}), std::invalid_argument);
  // non-uniform phase cycle on a ring
  CHECK_THROWS_AS(Constellation::custom("bad", {{1, 0}, std::polar(1.0, 0.1), {-1, 0}}),
                  std::invalid_argument);
  // mismatched cycles across rings
  CHECK_THROWS_AS(
      Constellation::custom("mix", {{1, 0}, {-1, 0}, {2, 0}, {0, 2}, {-2, 0}, {0, -2}}),
      std::invalid_argument);

  CHECK_THROWS_AS(Constellation::named("3-FOO"), std::invalid_argument);

  // file loader: one "re im" pair per line
  {
    std::ofstream out("/tmp/ddr_points.txt");
    out << "1 0\n0 1\n-1 0\n0 -1\n";
  }
  auto fromfile = Constellation::from_file("/tmp/ddr_points.txt");
  CHECK(fromfile.q() == 4);
  CHECK(fromfile.phase_cycle() == 4);
  std::remove("/tmp/ddr_points.txt");
  CHECK_THROWS_AS(Constellation::from_file("/tmp/ddr_missing.txt"), std::runtime_error);
  auto qpsk = Constellation::named("QPSK");
  CHECK_THROWS_AS(qpsk.index_of(cplx(0.5, 0.5)), std::invalid_argument);
}
