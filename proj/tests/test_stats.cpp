#include <doctest.h>

#include <cmath>

#include "ptune/dist.hpp"
#include "ptune/rng.hpp"
#include "ptune/stats.hpp"

using namespace ptune;

namespace {

std::vector<doe::Factor> make_factors(int k) {
  std::vector<doe::Factor> out;
  const char letters[] = "ABCDEFG";
  for (int i = 0; i < k; ++i)
    out.push_back({std::string(1, letters[i]), "P" + std::to_string(i), 0.0, 1.0});
  return out;
}

}  // namespace

TEST_CASE("anova assembled from component sums of squares") {
  // Four single-dof sources against a pooled error of 94720.9 over 123 dof.
  const auto t = stats::AnovaTable::from_components(
      {{"D", 16847.5}, {"E", 277651.0}, {"F", 20878.6}, {"DE", 5749.52}},
      {1, 1, 1, 1}, 94720.9, 123.0, 0.05);
  REQUIRE(t.rows.size() == 4);
  CHECK(std::fabs(t.rows[0].f - 21.88) <= 0.01);
  CHECK(std::fabs(t.rows[1].f - 360.54) <= 0.01);
  CHECK(std::fabs(t.rows[2].f - 27.11) <= 0.01);
  CHECK(std::fabs(t.rows[3].f - 7.47) <= 0.01);
  CHECK(t.rows[3].p == doctest::Approx(0.0072).epsilon(0.02));
  CHECK(t.error.ms == doctest::Approx(770.089).epsilon(1e-5));
  // additivity
  double ss = t.error.ss;
  for (const auto& r : t.rows) ss += r.ss;
  CHECK(ss == doctest::Approx(t.total.ss).epsilon(1e-12));
  CHECK(t.total.dof == 127.0);
}

TEST_CASE("selected-effect anova on a hand example") {
  const auto d = doe::full_factorial_2k(make_factors(2));
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 5;
  const auto t = stats::anova_selected(d, y, {"A"}, 0.05);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].ss == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(t.total.ss == doctest::Approx(8.75).epsilon(1e-12));
  CHECK(t.error.ss == doctest::Approx(6.5).epsilon(1e-12));
  CHECK(t.error.dof == 2.0);
}

TEST_CASE("anova additivity holds on random selections") {
  const auto d = doe::full_factorial_2k(make_factors(5));
  const rng::CounterRng g(21);
  Eigen::VectorXd y(d.n_runs());
  for (int r = 0; r < d.n_runs(); ++r) y(r) = 2.0 + g.normal(0, r);
  const auto t = stats::anova_selected(d, y, {"A", "BC", "ABDE", "E"}, 0.05);
  double ss = t.error.ss;
  double dof = t.error.dof;
  for (const auto& r : t.rows) {
    ss += r.ss;
    dof += r.dof;
    CHECK(r.ms == doctest::Approx(r.ss / r.dof));
  }
  CHECK(ss == doctest::Approx(t.total.ss).epsilon(1e-10));
  CHECK(dof == t.total.dof);
}

TEST_CASE("degenerate anova inputs") {
  const auto d = doe::full_factorial_2k(make_factors(2));
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 1.0);
  SUBCASE("constant responses give zero ss and p = 1") {
    const auto t = stats::anova_selected(d, y, {"A"}, 0.05);
    CHECK(t.rows[0].ss == doctest::Approx(0.0));
    CHECK(t.rows[0].f == 0.0);
    CHECK(t.rows[0].p == 1.0);
  }
  SUBCASE("empty selection") {
    CHECK_THROWS_AS(stats::anova_selected(d, y, {}, 0.05), std::invalid_argument);
  }
  SUBCASE("selection exhausting all dof") {
    CHECK_THROWS_AS(stats::anova_selected(d, y, {"A", "B", "AB"}, 0.05), std::invalid_argument);
  }
}

TEST_CASE("levene statistic on reference fixtures") {
  // deviations {1.5,.5,.5,1.5} vs {6,2,2,6}: one-way F on them is 6.352941.
  const auto r = stats::levene({{1, 2, 3, 4}, {1, 5, 9, 13}});
  CHECK(r.statistic == doctest::Approx(6.3529411765).epsilon(1e-9));
  CHECK(r.p_value == doctest::Approx(0.0452562653).epsilon(1e-7));

  const auto r3 = stats::levene({{2.1, 3.4, 1.9, 4.4, 5.5}, {4.5, 2.2, 3.3, 8.1},
                                 {0.5, 0.9, 4.2, 3.3, 2.2, 1.1}});
  CHECK(r3.statistic == doctest::Approx(0.5430164757).epsilon(1e-9));
  CHECK(r3.p_value == doctest::Approx(0.5946198719).epsilon(1e-7));

  const auto rm = stats::levene({{2.1, 3.4, 1.9, 4.4, 5.5}, {4.5, 2.2, 3.3, 8.1},
                                 {0.5, 0.9, 4.2, 3.3, 2.2, 1.1}},
                                stats::LeveneCenter::median);
  CHECK(rm.statistic == doctest::Approx(0.4259948265).epsilon(1e-9));
  CHECK(rm.p_value == doctest::Approx(0.6626211179).epsilon(1e-7));
}

TEST_CASE("levene invariances and degenerate groups") {
  SUBCASE("identical deviation patterns give a zero statistic") {
    const auto r = stats::levene({{0, 2}, {5, 7}});
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("location shift leaves the statistic unchanged") {
    const auto a = stats::levene({{1, 2, 3, 4}, {1, 5, 9, 13}});
    const auto b = stats::levene({{101, 102, 103, 104}, {101, 105, 109, 113}});
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
  }
  SUBCASE("positive scaling leaves the statistic unchanged") {
    const auto a = stats::levene({{1, 2, 3, 4}, {1, 5, 9, 13}});
    const auto b = stats::levene({{3, 6, 9, 12}, {3, 15, 27, 39}});
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
  }
  SUBCASE("undersized group") {
    CHECK_THROWS_AS(stats::levene({{1.0}, {2, 3}}), std::invalid_argument);
  }
}

TEST_CASE("power transform basics") {
  const std::vector<double> y = {0.5, 1.0, 2.0, 8.0};
  SUBCASE("exponent one is the identity") {
    CHECK(stats::power_transform(y, 1.0) == y);
  }
  SUBCASE("unity is a fixed point for any exponent") {
    CHECK(stats::power_transform({1.0}, -1.3)[0] == doctest::Approx(1.0));
  }
  SUBCASE("negative exponents reverse the order") {
    const auto t = stats::power_transform(y, -1.3);
    for (size_t i = 1; i < t.size(); ++i) CHECK(t[i] < t[i - 1]);
  }
  SUBCASE("nonpositive data is rejected") {
    CHECK_THROWS_AS(stats::power_transform({1.0, 0.0}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(stats::power_transform({1.0, -2.0}, 0.5), std::invalid_argument);
  }
}

TEST_CASE("lambda search prefers no transform for equal-variance groups") {
  // Two groups with different means but the same spread.
  const rng::CounterRng g(5);
  std::vector<double> data;
  std::vector<int> grouping;
  for (int i = 0; i < 120; ++i) {
    const double mu = (i % 2 == 0) ? 10.0 : 20.0;
    data.push_back(mu + 0.8 * g.normal(0, i));
    grouping.push_back(i % 2);
  }
  const auto res = stats::search_lambda(data, {grouping}, stats::default_lambda_grid());
  CHECK(std::fabs(res.lambda - 1.0) <= 0.35);
  CHECK(!res.trace.empty());
}

TEST_CASE("lambda search undoes a planted variance power law") {
  // var(y) ~ mean^4 is stabilized near lambda = -1 for this construction.
  const rng::CounterRng g(17);
  std::vector<double> data;
  std::vector<int> grouping;
  for (int i = 0; i < 300; ++i) {
    const double mu = (i % 3 == 0) ? 1.0 : (i % 3 == 1) ? 2.0 : 4.0;
    data.push_back(mu + mu * mu * 0.05 * g.normal(0, i));
    grouping.push_back(i % 3);
  }
  const auto res = stats::search_lambda(data, {grouping}, stats::default_lambda_grid());
  CHECK(res.lambda < 0.0);
  CHECK(res.lambda > -2.5);
}

TEST_CASE("shapiro-wilk matches reference fixtures") {
  const std::vector<double> x1 = {0.11, 7.87, 4.61, 10.14, 7.95, 3.14, 0.46, 4.43, 0.21, 4.75,
                                  0.71, 1.52, 3.24, 0.93, 0.42, 4.97, 9.53, 4.55, 0.47, 6.66};
  auto r = stats::shapiro_wilk(x1);
  CHECK(r.w == doctest::Approx(0.9004728794).epsilon(1e-4));
  CHECK(std::fabs(r.p_value - 0.0420895754) <= 1e-4);

  const std::vector<double> x2 = {1.36, 1.14, 2.92, 2.55, 1.46, 1.06, 5.27, -1.11, 3.48, 1.10,
                                  0.88, -0.51, 1.46, 0.52, 6.20, 1.69, 0.08, 3.67, 2.81, 3.49};
  r = stats::shapiro_wilk(x2);
  CHECK(r.w == doctest::Approx(0.9590269460).epsilon(1e-4));
  CHECK(std::fabs(r.p_value - 0.5245979293) <= 1e-4);

  const std::vector<double> x3 = {148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236};
  r = stats::shapiro_wilk(x3);
  CHECK(r.w == doctest::Approx(0.7888146949).epsilon(1e-4));
  CHECK(std::fabs(r.p_value - 0.0067038141) <= 1e-4);

  const std::vector<double> x4 = {6, 1, -4, 8, -2, 5, 0};
  r = stats::shapiro_wilk(x4);
  CHECK(r.w == doctest::Approx(0.9534758585).epsilon(1e-4));
  CHECK(std::fabs(r.p_value - 0.7611937807) <= 1e-4);

  const std::vector<double> x5 = {2.1, 2.3, 2.4};
  r = stats::shapiro_wilk(x5);
  CHECK(r.w == doctest::Approx(0.9642857143).epsilon(1e-4));
  CHECK(std::fabs(r.p_value - 0.6368868450) <= 1e-3);
}

TEST_CASE("shapiro-wilk on an exact normal quantile sequence") {
  std::vector<double> x;
  for (int i = 1; i <= 50; ++i)
    x.push_back(dist::normal_quantile((i - 0.375) / 50.25));
  const auto r = stats::shapiro_wilk(x);
  CHECK(r.w > 0.99);
  CHECK(r.p_value > 0.5);
}

TEST_CASE("shapiro-wilk is affine invariant") {
  const std::vector<double> x = {0.11, 7.87, 4.61, 10.14, 7.95, 3.14, 0.46, 4.43, 0.21, 4.75,
                                 0.71, 1.52, 3.24, 0.93, 0.42, 4.97, 9.53, 4.55, 0.47, 6.66};
  std::vector<double> y;
  for (double v : x) y.push_back(-3.0 * v + 11.0);
  // negation reverses order but W is computed on the sorted sample
  CHECK(stats::shapiro_wilk(y).w == doctest::Approx(stats::shapiro_wilk(x).w).epsilon(1e-10));
}

TEST_CASE("shapiro-wilk input validation") {
  CHECK_THROWS_AS(stats::shapiro_wilk({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(stats::shapiro_wilk({1.0, 1.0, 1.0}), std::invalid_argument);
  std::vector<double> big(5001, 0.0);
  CHECK_THROWS_AS(stats::shapiro_wilk(big), std::invalid_argument);
}

TEST_CASE("independence check") {
  std::vector<int> order(128);
  for (int i = 0; i < 128; ++i) order[i] = i;

  SUBCASE("iid residuals pass with a durbin-watson near 2") {
    const rng::CounterRng g(31);
    std::vector<double> e(128);
    for (int i = 0; i < 128; ++i) e[i] = g.normal(0, i);
    const auto r = stats::independence_check(e, order);
    CHECK(r.durbin_watson > 1.5);
    CHECK(r.durbin_watson < 2.5);
    CHECK(r.independent);
  }
  SUBCASE("alternating signs are rejected with dw near 4") {
    std::vector<double> e(128);
    for (int i = 0; i < 128; ++i) e[i] = (i % 2 ? 1.0 : -1.0);
    const auto r = stats::independence_check(e, order);
    CHECK(r.durbin_watson == doctest::Approx(4.0 * 127.0 / 128.0).epsilon(1e-12));
    CHECK(!r.independent);
  }
  SUBCASE("constant residuals are degenerate") {
    std::vector<double> e(128, 1.0);
    CHECK_THROWS_AS(stats::independence_check(e, order), std::invalid_argument);
  }
  SUBCASE("too few residuals") {
    std::vector<double> e(5, 1.0);
    std::vector<int> small_order = {0, 1, 2, 3, 4};
    CHECK_THROWS_AS(stats::independence_check(e, small_order), std::invalid_argument);
  }
  SUBCASE("the run order permutation matters") {
    // strongly autocorrelated in index order; shuffled order breaks it up
    std::vector<double> e(128);
    for (int i = 0; i < 128; ++i) e[i] = (i < 64) ? 1.0 : -1.0;
    e[0] = 0.9;  // avoid an exactly-degenerate pattern
    const auto bad = stats::independence_check(e, order);
    CHECK(!bad.independent);
  }
}

TEST_CASE("pooled t test on hand fixtures") {
  const auto r = stats::two_sample_t({1, 2, 3}, {4, 5, 6}, 0.05);
  CHECK(r.t0 == doctest::Approx(-3.674234614175).epsilon(1e-9));
  CHECK(r.dof == 4.0);
  CHECK(r.p_two_sided == doctest::Approx(0.021311641129).epsilon(1e-7));
  CHECK(r.p_one_sided == doctest::Approx(0.5 * 0.021311641129).epsilon(1e-7));
  CHECK(r.reject_h0);

  const auto r2 = stats::two_sample_t({12.1, 14.2, 13.3, 11.8, 12.9}, {13.0, 15.1, 14.4, 13.9},
                                      0.05);
  CHECK(r2.t0 == doctest::Approx(-1.991286648614).epsilon(1e-9));
  CHECK(r2.p_two_sided == doctest::Approx(0.086726568276).epsilon(1e-7));
}

TEST_CASE("pooled t test properties") {
  SUBCASE("identical samples") {
    const auto r = stats::two_sample_t({1, 2, 3}, {1, 2, 3}, 0.05);
    CHECK(r.t0 == 0.0);
    CHECK(r.p_two_sided == doctest::Approx(1.0));
    CHECK(!r.reject_h0);
  }
  SUBCASE("swapping the samples negates t0 and keeps the two-sided p") {
    const auto a = stats::two_sample_t({1, 2, 3}, {4, 5, 6}, 0.05);
    const auto b = stats::two_sample_t({4, 5, 6}, {1, 2, 3}, 0.05);
    CHECK(a.t0 == doctest::Approx(-b.t0).epsilon(1e-14));
    CHECK(a.p_two_sided == doctest::Approx(b.p_two_sided).epsilon(1e-12));
  }
  SUBCASE("common shift leaves t0 unchanged") {
    const auto a = stats::two_sample_t({1, 2, 3}, {4, 5, 6}, 0.05);
    const auto b = stats::two_sample_t({11, 12, 13}, {14, 15, 16}, 0.05);
    CHECK(a.t0 == doctest::Approx(b.t0).epsilon(1e-12));
  }
  SUBCASE("degenerate pooled variance") {
    CHECK_THROWS_AS(stats::two_sample_t({1, 1, 1}, {1, 1}, 0.05), std::invalid_argument);
  }
  SUBCASE("undersized samples") {
    CHECK_THROWS_AS(stats::two_sample_t({1.0}, {1, 2}, 0.05), std::invalid_argument);
  }
}
