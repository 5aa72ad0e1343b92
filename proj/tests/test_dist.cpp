#include <doctest.h>

#include <cmath>

#include "ptune/dist.hpp"
#include "ptune/rng.hpp"

using namespace ptune;

TEST_CASE("normal cdf reference points") {
  CHECK(dist::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dist::normal_cdf(1.0) == doctest::Approx(0.841344746068543).epsilon(1e-12));
  CHECK(dist::normal_cdf(-2.5) == doctest::Approx(0.006209665325776).epsilon(1e-10));
  // symmetry
  for (double x : {0.3, 1.7, 4.2})
    CHECK(dist::normal_cdf(x) + dist::normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normal quantile reference points") {
  CHECK(dist::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dist::normal_quantile(0.25) == doctest::Approx(-0.674489750196082).epsilon(1e-12));
  CHECK(dist::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(dist::normal_quantile(1e-9) == doctest::Approx(-5.997807015007687).epsilon(1e-10));
  // round trip through the cdf
  for (double p : {0.001, 0.1, 0.42, 0.77, 0.9999})
    CHECK(dist::normal_cdf(dist::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK_THROWS_AS(dist::normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("student t cdf") {
  CHECK(dist::t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dist::t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(dist::t_cdf(1.0, 2.0) == doctest::Approx(0.788675134594813).epsilon(1e-11));
  CHECK(dist::t_cdf(2.5, 7.0) == doctest::Approx(0.979503890707124).epsilon(1e-11));
  CHECK(dist::t_cdf(-1.3, 22.0) == doctest::Approx(0.103528522021765).epsilon(1e-11));
  // exact closed forms: dof 1 is Cauchy, dof 2 has an elementary cdf
  for (double x : {-2.0, -0.5, 0.7, 3.3}) {
    CHECK(dist::t_cdf(x, 1.0) ==
          doctest::Approx(0.5 + std::atan(x) / M_PI).epsilon(1e-11));
    CHECK(dist::t_cdf(x, 2.0) ==
          doctest::Approx(0.5 + x / (2.0 * std::sqrt(x * x + 2.0))).epsilon(1e-11));
  }
}

TEST_CASE("t quantile inverts the cdf") {
  CHECK(dist::t_quantile(0.975, 22.0) == doctest::Approx(2.073873067904015).epsilon(1e-10));
  CHECK(dist::t_quantile(0.975, 4.0) == doctest::Approx(2.776445105197799).epsilon(1e-10));
  for (double dof : {1.0, 3.5, 42.333, 120.0})
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.9999})
      CHECK(dist::t_cdf(dist::t_quantile(p, dof), dof) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("fisher f cdf") {
  CHECK(dist::f_cdf(1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(dist::f_cdf(7.5594, 4.0, 22.0) == doctest::Approx(0.999455317091699).epsilon(1e-11));
  CHECK(dist::f_cdf(21.8773, 1.0, 123.0) == doctest::Approx(0.999992474869810).epsilon(1e-11));
  CHECK(dist::f_cdf(0.0, 3.0, 9.0) == 0.0);
}

TEST_CASE("f(1,dof) equals squared t(dof)") {
  for (double dof : {1.0, 2.0, 5.0, 10.0, 30.0, 123.0}) {
    for (double t = 0.2; t < 3.2; t += 0.3) {
      const double lhs = dist::f_cdf(t * t, 1.0, dof);
      const double rhs = 2.0 * dist::t_cdf(t, dof) - 1.0;
      CHECK(std::fabs(lhs - rhs) <= 1e-9);
    }
  }
}

TEST_CASE("generic cdf entry point") {
  CHECK(dist::cdf(dist::Kind::normal, {}, 0.0) == doctest::Approx(0.5));
  CHECK(dist::cdf(dist::Kind::student_t, {5.0, 0.0}, 0.0) == doctest::Approx(0.5));
  CHECK(dist::cdf(dist::Kind::fisher_f, {1.0, 1.0}, 1.0) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK_THROWS_AS(dist::cdf(dist::Kind::student_t, {-1.0, 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::cdf(dist::Kind::fisher_f, {1.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("counter rng is a pure function of seed, stream, counter") {
  const rng::CounterRng a(42), b(42), c(43);
  CHECK(a.bits(3, 17) == b.bits(3, 17));
  CHECK(a.bits(3, 17) != c.bits(3, 17));
  CHECK(a.bits(3, 17) != a.bits(4, 17));
  CHECK(a.bits(3, 17) != a.bits(3, 18));
  for (uint64_t k = 0; k < 1000; ++k) {
    const double u = a.uniform(1, k);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("counter rng normals have sane moments") {
  const rng::CounterRng g(7);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = g.normal(0, k);
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.03));
}
