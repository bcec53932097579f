#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ordmlm/error.hpp"
#include "ordmlm/inference.hpp"
#include "ordmlm/random.hpp"
#include "ordmlm/report.hpp"
#include "test_support.hpp"

using namespace ordmlm;

namespace {

FitResult model3_fit() {
  FitResult f;
  f.spec = ModelSpec{"Model 3", 4, {"age_at_marriage", "children_ever_born", "age_of_child"}};
  f.estimates = ParamVector{{-2.35, -0.48, -0.19}, {0.12, 0.09, -0.08}, 0.2015};
  f.standard_errors = ParamVector{{0.19, 0.19, 0.19}, {0.04, 0.03, 0.04}, 0.10};
  f.covariance = Eigen::MatrixXd::Identity(7, 7) * 0.01;
  f.converged = true;
  f.information_positive_definite = true;
  f.clusters = 8;
  f.minus2ll = 22224.12;
  return f;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("deviance tests") {
    const auto a = lrt(23063.22, 22228.13, 2);
    CHECK(a.chi2 == doctest::Approx(835.09));
    CHECK(a.p_value < 1e-4);
    const auto b = lrt(22228.13, 22224.12, 1);
    CHECK(b.chi2 == doctest::Approx(4.01));
    CHECK(std::abs(b.p_value - 0.0452) < 5e-4);
    const auto c = lrt(100.0, 100.0, 3);
    CHECK(c.chi2 == 0.0);
    CHECK(c.p_value == 1.0);
    CHECK_THROWS_AS(lrt(10.0, 11.0, 1), DomainError);
    CHECK_THROWS_AS(lrt(11.0, 10.0, 0), DomainError);
  }

  TEST_CASE("deviance differences telescope") {
    RandomStream rng(2);
    for (int rep = 0; rep < 100; ++rep) {
      const double c = 1000.0 * rng.uniform();
      const double b = c + 10.0 * rng.uniform();
      const double a = b + 10.0 * rng.uniform();
      CHECK(lrt(a, b, 1).chi2 + lrt(b, c, 2).chi2 == doctest::Approx(lrt(a, c, 3).chi2).epsilon(1e-12));
    }
  }

  TEST_CASE("intraclass correlation") {
    CHECK(std::abs(icc(0.2015) - 0.0577) <= 1e-4);
    CHECK(icc(0.0) == 0.0);
    CHECK(icc(std::numbers::pi * std::numbers::pi / 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(kLogisticVariance == doctest::Approx(std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(icc(-0.1), DomainError);
    double prev = -1.0;
    for (double t = 0.0; t < 100.0; t += 0.7) {
      const double v = icc(t);
      CHECK(v > prev);
      CHECK(v < 1.0);
      prev = v;
    }
  }

  TEST_CASE("odds ratios") {
    const auto a = odds_ratio(0.12, 0.04);
    CHECK(a.odds_ratio == doctest::Approx(1.1275).epsilon(1e-4));
    CHECK(std::abs(a.ci_low - 1.04) < 0.01);
    CHECK(std::abs(a.ci_high - 1.22) < 0.01);
    const auto z = odds_ratio(0.0, 0.3);
    CHECK(z.odds_ratio == 1.0);
    CHECK(std::log(z.ci_low) == doctest::Approx(-std::log(z.ci_high)));
    const auto n = odds_ratio(-0.08, 0.04);
    CHECK(std::abs(n.odds_ratio - 0.92) < 0.005);
    CHECK(std::abs(n.ci_low - 0.85) < 0.01);
    CHECK(std::abs(n.ci_high - 1.00) < 0.01);
    RandomStream rng(4);
    for (int rep = 0; rep < 100; ++rep) {
      const double beta = rng.uniform() - 0.5, se = 0.01 + rng.uniform();
      const auto r = odds_ratio(beta, se);
      CHECK(r.ci_low <= r.odds_ratio);
      CHECK(r.odds_ratio <= r.ci_high);
      CHECK(std::log(r.ci_high) - std::log(r.ci_low) == doctest::Approx(2.0 * 1.959963984540054 * se).epsilon(1e-12));
    }
    CHECK_THROWS_AS(odds_ratio(0.1, 0.0), DomainError);
  }

  TEST_CASE("predicted probability anchors") {
    CHECK(std::abs(cumulative_pp(-1.95) - 0.1247) < 5e-4);
    CHECK(cumulative_pp(0.0) == 0.5);
    CHECK(std::abs(cumulative_pp(0.21) - 0.5523) < 5e-4);
    CHECK(cumulative_pp(700.0) == 1.0);
    CHECK(cumulative_pp(-700.0) > 0.0);
    RandomStream rng(6);
    for (int rep = 0; rep < 1000; ++rep) {
      const double eta = 40.0 * (rng.uniform() - 0.5);
      CHECK(std::abs(cumulative_pp(eta) + cumulative_pp(-eta) - 1.0) <= 1e-15);
    }
  }

  TEST_CASE("probability profiles") {
    const auto f = model3_fit();
    const auto a = profile_probabilities(f, std::vector<double>{0, 1, 0});
    CHECK(std::abs(a.categories[0] - 0.0945) < 5e-4);
    CHECK(std::abs(a.categories[1] - 0.3092) < 5e-4);
    CHECK(std::abs(a.categories[2] - 0.0713) < 5e-4);
    CHECK(std::abs(a.categories[3] - 0.5250) < 5e-4);
    const auto b = profile_probabilities(f, std::vector<double>{0, 0, 1});
    CHECK(std::abs(b.categories[0] - 0.0809) < 5e-4);
    CHECK(std::abs(b.categories[3] - 0.5671) < 5e-4);
    CHECK_THROWS_AS(profile_probabilities(f, std::vector<double>{0, 1}), DomainError);

    RandomStream rng(8);
    for (int rep = 0; rep < 200; ++rep) {
      const auto p = testing::random_params(rng, 5, 3, 0.0);
      const std::vector<double> x{rng.uniform() * 3, rng.uniform() * 3, rng.uniform() * 3};
      const auto prof = profile_probabilities(p, x, rng.uniform() - 0.5);
      double s = 0.0;
      for (double v : prof.categories) s += v;
      CHECK(std::abs(s - 1.0) <= 1e-12);
      for (std::size_t k = 1; k < prof.cumulative.size(); ++k) CHECK(prof.cumulative[k] > prof.cumulative[k - 1]);
    }
  }

  TEST_CASE("threshold t-tests") {
    const auto a = wald_t_test(-1.9478, 0.1628, 7);
    CHECK(std::abs(a.t - (-11.96)) < 0.01);
    CHECK(a.p_value < 1e-4);
    CHECK(std::abs(a.ci_low - (-2.3328)) < 5e-4);
    CHECK(std::abs(a.ci_high - (-1.5629)) < 5e-4);
    const auto b = wald_t_test(0.2102, 0.1612, 7);
    CHECK(std::abs(b.t - 1.30) < 0.01);
    CHECK(std::abs(b.p_value - 0.2335) < 5e-4);
    CHECK(std::abs(b.ci_low - (-0.1710)) < 5e-4);
    CHECK(std::abs(b.ci_high - 0.5915) < 5e-4);
    const auto z = wald_t_test(0.0, 0.3, 5);
    CHECK(z.t == 0.0);
    CHECK(z.p_value == doctest::Approx(1.0));
    CHECK_THROWS_AS(wald_t_test(1.0, 0.1, 0), DomainError);

    const auto tests = wald_t_tests(model3_fit());
    CHECK(tests.size() == 3);
    CHECK(tests[0].name == "threshold_1");
  }

  TEST_CASE("variance z-test") {
    const auto a = variance_z_test(0.2015, 0.1039);
    CHECK(std::abs(a.z - 1.94) < 0.01);
    CHECK(std::abs(a.p_one_sided - 0.0263) < 5e-4);
    const auto b = variance_z_test(0.2015, 0.10);
    CHECK(a.z < b.z);
    CHECK(b.z == doctest::Approx(2.015));
    CHECK(std::abs(b.p_one_sided - 0.0220) < 5e-4);
    CHECK_THROWS_AS(variance_z_test(0.0, 0.1), DomainError);
  }

  TEST_CASE("report tables declare their schema") {
    const auto f = model3_fit();
    CHECK(testing::check_schema(fit_csv(f)).empty());
    CHECK(testing::check_schema(models_csv({f})).empty());
    CHECK(testing::check_schema(odds_ratio_csv(f)).empty());
    CHECK(testing::check_schema(wald_csv("Model 3", wald_t_tests(f, 7), 7)).empty());
    CHECK(testing::check_schema(lrt_csv({"a", "b"}, {10.0, 5.0}, {1})).empty());
    const auto table = profile_table(f, 0, {"Below 18 Years", "18 To 26 Years", "Above 26 Years"});
    CHECK(testing::check_schema(profile_csv(table)).empty());
    const auto text = profile_text(table);
    CHECK(text.find("0.0971") != std::string::npos);
    CHECK(text.find("0.4875") != std::string::npos);
    const auto lt = lrt_text({"Model 1", "Model 2", "Model 3", "Model 4", "Model 5"},
                             {23063.22, 22228.13, 22224.12, 22222.03, 22218.83}, {2, 1, 2, 3});
    CHECK(lt.find("<.0001") != std::string::npos);
    CHECK(lt.find("0.0452") != std::string::npos);
    CHECK(lt.find("0.3517") != std::string::npos);
    CHECK(lt.find("0.3618") != std::string::npos);
  }
}
