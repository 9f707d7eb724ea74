#include <random>
#include <sstream>

#include "doctest.h"
#include "nplab/errors.hpp"
#include "nplab/series.hpp"

using namespace nplab::series;
using nplab::ValidationError;

namespace {

CoeffSeq rationals(std::initializer_list<Rational> xs) { return CoeffSeq::exact(std::vector<Rational>(xs)); }

CoeffSeq ones(std::size_t N) { return CoeffSeq::exact(std::vector<Rational>(N + 1, Rational(1))); }

}  // namespace

TEST_CASE("reciprocal of the geometric series is x") {
  const auto b = reciprocal_coeffs(ones(6));
  CHECK(b == rationals({0, 1, 0, 0, 0, 0, 0}));
}

TEST_CASE("reciprocal of the harmonic weights") {
  const auto b = reciprocal_coeffs(rationals({1, Rational(1, 2), Rational(1, 3), Rational(1, 4)}));
  CHECK(b == rationals({0, Rational(1, 2), Rational(1, 12), Rational(1, 24)}));
}

TEST_CASE("reciprocal of n+1 has b_2 = -1") {
  const auto b = reciprocal_coeffs(rationals({1, 2, 3, 4}));
  CHECK(b == rationals({0, 2, -1, 0}));
}

TEST_CASE("reciprocal rejects unnormalized kernels") {
  CHECK_THROWS_AS(reciprocal_coeffs(rationals({2, 1})), ValidationError);
  CHECK_THROWS_AS(reciprocal_coeffs(CoeffSeq::floating({0.5, 1.0})), ValidationError);
}

TEST_CASE("forward recursion for b_n = 2^-n") {
  std::vector<Rational> b{0};
  for (int n = 1; n <= 10; ++n) b.emplace_back(1, 1 << n);
  const auto a = forward_coeffs(CoeffSeq::exact(b), 10);
  CHECK(a.rational()[0] == 1);
  for (std::size_t n = 1; n <= 10; ++n) CHECK(a.rational()[n] == Rational(1, 2));
}

TEST_CASE("forward recursion treats b beyond its degree as zero") {
  const auto a = forward_coeffs(rationals({0, 1}), 5);
  CHECK(a == ones(5));
  CHECK_THROWS_AS(forward_coeffs(rationals({1, 1}), 3), ValidationError);
}

TEST_CASE("roundtrip for harmonic weights through degree 50") {
  const auto a = power_law_exact(1, 50);
  CHECK(forward_coeffs(reciprocal_coeffs(a), 50) == a);
}

TEST_CASE("convolution identity") {
  const auto a = power_law_exact(2, 40);
  const auto b = reciprocal_coeffs(a);
  for (std::size_t n = 0; n <= 40; ++n) {
    Rational s = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      const Rational delta = (n - k == 0) ? 1 : 0;
      s += a.rational()[k] * (delta - b.rational()[n - k]);
    }
    CHECK(s == (n == 0 ? 1 : 0));
  }
}

TEST_CASE("floating reciprocal agrees with exact") {
  const auto a = power_law_exact(1, 60);
  const auto be = reciprocal_coeffs(a);
  const auto bf = reciprocal_coeffs(a.as_floating());
  CHECK_FALSE(bf.is_exact());
  for (std::size_t n = 0; n <= 60; ++n) CHECK(bf.value(n) == doctest::Approx(be.value(n)).epsilon(1e-12));
}

TEST_CASE("hardy criterion") {
  SUBCASE("inverse square root weights") {
    const auto a = power_law_float(0.5, 200);
    const auto c = hardy_check(a);
    CHECK(c.status == CertStatus::certified);
    CHECK(c.method == CertMethod::hardy_criterion);
  }
  SUBCASE("constant ratio") { CHECK(hardy_check(ones(20)).status == CertStatus::certified); }
  SUBCASE("non-monotone ratios are inconclusive") {
    CHECK(hardy_check(rationals({1, 2, 1, 1})).status == CertStatus::inconclusive);
  }
  SUBCASE("never refutes") { CHECK(hardy_check(rationals({1, 2, 3, 4})).status != CertStatus::refuted); }
  SUBCASE("rejects nonpositive coefficients") {
    CHECK_THROWS_AS(hardy_check(rationals({1, 0, 1})), ValidationError);
  }
}

TEST_CASE("np_certify examples") {
  SUBCASE("harmonic weights, exact, N = 200") {
    const auto c = np_certify(power_law_exact(1, 200), 200);
    CHECK(c.status == CertStatus::certified);
    CHECK(c.mode == Mode::exact);
    CHECK(c.min_coefficient >= 0.0);
    CHECK_FALSE(c.first_negative_index.has_value());
  }
  SUBCASE("n+1 refuted at index 2") {
    const auto c = np_certify(rationals({1, 2, 3, 4, 5, 6}), 5);
    CHECK(c.status == CertStatus::refuted);
    REQUIRE(c.first_negative_index.has_value());
    CHECK(*c.first_negative_index == 2);
    CHECK(c.min_coefficient == -1.0);
  }
  SUBCASE("degree 0 is vacuous") { CHECK(np_certify(rationals({1}), 0).status == CertStatus::certified); }
  SUBCASE("degree beyond the sequence") { CHECK_THROWS_AS(np_certify(ones(3), 4), ValidationError); }
}

TEST_CASE("np_certify on enclosures of (n+1)^(-1/2)") {
  const auto enc = power_law_enclosure(1, 2, 200);
  const auto c = np_certify(enc, 200);
  CHECK(c.status == CertStatus::certified);
  CHECK_FALSE(c.first_undecided_index.has_value());
  const auto b = reciprocal_enclosure(enc, 200);
  const auto bf = reciprocal_coeffs(power_law_float(0.5, 200));
  for (std::size_t n = 1; n <= 200; ++n) {
    CHECK(b[n].lo <= b[n].hi);
    CHECK(bf.value(n) == doctest::Approx(b[n].lo.get_d()).epsilon(1e-9));
  }
}

TEST_CASE("enclosures of perfect powers are points") {
  const auto enc = power_law_enclosure(1, 2, 10);
  CHECK(enc.terms[3].lo == Rational(1, 2));
  CHECK(enc.terms[3].hi == Rational(1, 2));
  CHECK(enc.terms[8].lo == Rational(1, 3));
}

TEST_CASE("ratio tail") {
  SUBCASE("b_n = 2^-n") {
    std::vector<Rational> b{0};
    for (int n = 1; n <= 12; ++n) b.emplace_back(1, 1 << n);
    const auto rt = ratio_tail(forward_coeffs(CoeffSeq::exact(b), 12));
    REQUIRE(rt.ratios.size() == 12);
    CHECK(rt.ratios[0] == 2.0);
    for (std::size_t n = 1; n < 12; ++n) CHECK(rt.ratios[n] == 1.0);
    CHECK(rt.tail_estimate == 1.0);
  }
  SUBCASE("inverse squares") {
    const auto rt = ratio_tail(power_law_exact(2, 100));
    for (std::size_t n = 0; n < 100; ++n) {
      const double e = double((n + 2) * (n + 2)) / double((n + 1) * (n + 1));
      CHECK(rt.ratios[n] == doctest::Approx(e).epsilon(1e-15));
    }
    CHECK(bn_mass(reciprocal_coeffs(power_law_exact(2, 100))) < 1.0);
  }
  SUBCASE("two terms") {
    const auto rt = ratio_tail(ones(1));
    CHECK(rt.ratios == std::vector<double>{1.0});
  }
  SUBCASE("rejects zeros") { CHECK_THROWS_AS(ratio_tail(rationals({1, 0})), ValidationError); }
}

TEST_CASE("b mass") {
  CHECK(bn_mass_exact(reciprocal_coeffs(ones(30))) == 1);
  double prev = 0.0;
  for (std::size_t N : {25, 50, 100, 200}) {
    const double m = bn_mass(reciprocal_coeffs(power_law_exact(1, N)));
    CHECK(m < 1.0);
    CHECK(m > prev);
    prev = m;
  }
  const Rational m2 = bn_mass_exact(reciprocal_coeffs(power_law_exact(2, 200)));
  CHECK(m2 < 1);
  CHECK(m2.get_d() < 0.4);
  CHECK_THROWS_AS(bn_mass(rationals({0, 1, -1})), ValidationError);
}

TEST_CASE("random finitely supported b of unit mass: ratios tend to 1") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> b(6, 0.0);
    double total = 0.0;
    for (std::size_t n = 1; n < b.size(); ++n) {
      b[n] = 0.1 + static_cast<double>(rng() % 1000) / 1000.0;
      total += b[n];
    }
    for (auto& x : b) x /= total;
    const auto probe = conjecture_probe(CoeffSeq::floating(b), 500);
    CHECK(probe.mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probe.deviation < 1e-3);
  }
}

TEST_CASE("hardy certification never contradicted by exact test") {
  for (unsigned alpha : {0u, 1u, 2u, 3u}) {
    const auto a = power_law_exact(alpha, 60);
    if (hardy_check(a).status == CertStatus::certified) CHECK(np_certify(a, 60).status != CertStatus::refuted);
  }
}

TEST_CASE("csv roundtrip") {
  SUBCASE("exact") {
    const auto a = power_law_exact(1, 8);
    std::stringstream ss;
    write_csv(ss, a);
    CHECK(ss.str().rfind("0,1,1\n1,1,2\n", 0) == 0);
    CHECK(read_csv(ss) == a);
  }
  SUBCASE("floating") {
    const auto a = power_law_float(0.5, 8);
    std::stringstream ss;
    write_csv(ss, a);
    const auto back = read_csv(ss);
    for (std::size_t n = 0; n <= 8; ++n) CHECK(back.value(n) == a.value(n));
  }
  SUBCASE("comments and blank lines") {
    std::stringstream ss("# kernel\n\n0,1\n1,0.5\n");
    CHECK(read_csv(ss).value(1) == 0.5);
  }
  SUBCASE("index gap") {
    std::stringstream ss("0,1\n2,0.5\n");
    CHECK_THROWS_AS(read_csv(ss), ValidationError);
  }
}
