#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ordmlm/error.hpp"
#include "ordmlm/glmm.hpp"
#include "ordmlm/random.hpp"
#include "test_support.hpp"

using namespace ordmlm;

namespace {

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(std::abs(analytic), 1e-3);
}

ModelData random_model(RandomStream& rng, int clusters, int max_rows, std::size_t q) {
  std::vector<ClusterRows> cs;
  for (int j = 0; j < clusters; ++j) {
    auto c = testing::random_cluster(rng, 4, q, max_rows);
    c.cluster = j;
    cs.push_back(std::move(c));
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < q; ++k) names.push_back("x" + std::to_string(k));
  return ModelData(4, names, cs);
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("cumulative logit examples") {
    ParamVector m1{{-1.95, -0.07, 0.21}, {}, 0.0};
    CHECK(cumulative_eta(m1, {}, 0.0, 1) == doctest::Approx(-1.95));
    ParamVector m3{{-2.35, -0.48, -0.19}, {0.12, 0.09, -0.08}, 0.2};
    const std::vector<double> x0{0, 0, 0};
    CHECK(cumulative_eta(m3, x0, 0.0, 2) == doctest::Approx(-0.48));
    const std::vector<double> x{1, 2, 1};
    const double u = -(0.12 + 0.18 - 0.08) - (-0.48);
    CHECK(cumulative_eta(m3, x, u, 2) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(cumulative_eta(m3, x0, 0.0, 0), DomainError);
    CHECK_THROWS_AS(cumulative_eta(m3, x0, 0.0, 4), DomainError);
  }

  TEST_CASE("category probabilities") {
    ParamVector m1{{-1.95, -0.07, 0.21}, {}, 0.0};
    const auto p = category_probs(m1, {}, 0.0);
    CHECK(p[0] == doctest::Approx(0.1247).epsilon(0.004));
    CHECK(std::abs(p[1] - 0.3578) < 5e-4);
    CHECK(std::abs(p[2] - 0.0698) < 5e-4);
    CHECK(std::abs(p[3] - 0.4477) < 5e-4);

    ParamVector simple{{0.0, 1.0, 2.0}, {}, 0.0};
    const auto q = category_probs(simple, {}, 0.0);
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[1] == doctest::Approx(0.731059 - 0.5).epsilon(1e-5));
    CHECK(q[2] == doctest::Approx(0.880797 - 0.731059).epsilon(1e-5));
    CHECK(q[3] == doctest::Approx(1.0 - 0.880797).epsilon(1e-5));

    ParamVector m3{{-2.35, -0.48, -0.19}, {0.12, 0.09, -0.08}, 0.2};
    const auto b = category_probs(m3, std::vector<double>{0, 0, 0}, 0.0);
    CHECK(std::abs(b[0] - 0.0871) < 5e-4);
    CHECK(std::abs(b[1] - 0.2952) < 5e-4);
    CHECK(std::abs(b[2] - 0.0703) < 5e-4);
    CHECK(std::abs(b[3] - 0.5474) < 5e-4);

    ParamVector bad{{0.0, 0.0, 1.0}, {}, 0.0};
    CHECK_THROWS_AS(category_probs(bad, {}, 0.0), DomainError);
  }

  TEST_CASE("probabilities sum to one and stay in (0, 1)") {
    RandomStream rng(5);
    for (int rep = 0; rep < 2000; ++rep) {
      const int levels = 2 + static_cast<int>(rng.uniform() * 6);
      const auto params = testing::random_params(rng, levels, 2, 0.3);
      const std::vector<double> x{std::floor(rng.uniform() * 4), std::floor(rng.uniform() * 4)};
      const double u = 12.0 * (rng.uniform() - 0.5);
      const auto p = category_probs(params, x, u);
      double s = 0.0;
      for (double v : p) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("threshold shift matches an intercept-like covariate shift") {
    RandomStream rng(17);
    for (int rep = 0; rep < 100; ++rep) {
      auto params = testing::random_params(rng, 4, 2, 0.5);
      const std::vector<double> x{1.0, std::floor(rng.uniform() * 3)};
      const double shift = rng.uniform() - 0.5;
      auto moved = params;
      for (double& t : moved.thresholds) t += shift;
      moved.slopes[0] -= shift;
      const auto a = category_probs(params, x, 0.3);
      const auto b = category_probs(moved, x, 0.3);
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("empty cluster integrand is the prior") {
    ParamVector p{{-1.0, 0.0, 1.0}, {}, 0.7};
    ClusterRows empty;
    for (double u : {-1.0, 0.0, 0.4}) {
      const auto g = cluster_log_integrand(p, empty, 0, u);
      CHECK(g.value == doctest::Approx(-u * u / 1.4 - 0.5 * std::log(2 * std::numbers::pi * 0.7)));
    }
    const auto s = find_cluster_mode(p, empty, 0);
    CHECK(s.mode == 0.0);
  }

  TEST_CASE("single observation hand value") {
    ParamVector p{{0.4}, {}, 0.25};
    ClusterRows c;
    c.responses = {1};
    c.weights = {1.0};
    const auto g = cluster_log_integrand(p, c, 0, 0.0);
    const double F = 1.0 / (1.0 + std::exp(-0.4));
    CHECK(g.value == doctest::Approx(std::log(F) - 0.5 * std::log(2 * std::numbers::pi * 0.25)).epsilon(1e-14));
    ParamVector zero{{0.0}, {}, 0.0};
    CHECK_THROWS_AS(cluster_log_integrand(zero, c, 0, 0.0), DomainError);
  }

  TEST_CASE("analytic integrand derivatives match central differences") {
    RandomStream rng(23);
    const double h = 1e-5;
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const int levels = 2 + static_cast<int>(rng.uniform() * 4);
      const std::size_t q = static_cast<std::size_t>(rng.uniform() * 3);
      auto params = testing::random_params(rng, levels, q, 0.05 + rng.uniform());
      const auto c = testing::random_cluster(rng, levels, q, 12);
      const double u = 4.0 * (rng.uniform() - 0.5);
      const auto g = cluster_log_integrand(params, c, q, u);
      const auto gp = cluster_log_integrand(params, c, q, u + h);
      const auto gm = cluster_log_integrand(params, c, q, u - h);
      CHECK(g.value == doctest::Approx(static_cast<double>(testing::direct_log_integrand(params, c, q, u))).epsilon(1e-12));
      worst = std::max({worst, rel_err(g.d1, (gp.value - gm.value) / (2 * h)),
                        rel_err(g.d2, (gp.d1 - gm.d1) / (2 * h)), rel_err(g.d3, (gp.d2 - gm.d2) / (2 * h))});
    }
    CHECK(worst <= 1e-5);
  }

  TEST_CASE("mode search reaches the gradient tolerance") {
    RandomStream rng(31);
    for (int rep = 0; rep < 300; ++rep) {
      auto params = testing::random_params(rng, 4, 1, 0.05 + 2.0 * rng.uniform());
      const auto c = testing::random_cluster(rng, 4, 1, 40);
      const auto s = find_cluster_mode(params, c, 1);
      const auto g = cluster_log_integrand(params, c, 1, s.mode);
      CHECK(std::abs(g.d1) <= 1e-8);
      CHECK(s.curvature < 0.0);
    }
  }

  TEST_CASE("balanced cluster has its mode at zero") {
    ParamVector p{{-1.0, 1.0}, {}, 0.5};
    ClusterRows c;
    c.responses = {1, 3};
    c.weights = {1.0, 1.0};
    const auto s = find_cluster_mode(p, c, 0);
    CHECK(std::abs(s.mode) < 1e-10);
  }

  TEST_CASE("one-node quadrature is the Laplace value") {
    RandomStream rng(37);
    for (int rep = 0; rep < 100; ++rep) {
      auto params = testing::random_params(rng, 4, 2, 0.05 + rng.uniform());
      const auto c = testing::random_cluster(rng, 4, 2, 10);
      CHECK(ghq_cluster_loglik(params, c, 2, 1) == find_cluster_mode(params, c, 2).loglik);
    }
    ParamVector p{{0.0}, {}, 0.5};
    ClusterRows c;
    CHECK_THROWS_AS(ghq_cluster_loglik(p, c, 0, 4), DomainError);
    CHECK_THROWS_AS(ghq_cluster_loglik(p, c, 0, 201), DomainError);
  }

  TEST_CASE("Gauss-Hermite rules integrate polynomials") {
    for (int n : {1, 3, 21, 61, 199}) {
      const auto& rule = gauss_hermite_rule(n);
      double w0 = 0.0, w2 = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        w0 += rule.weights[i];
        w2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
        CHECK(rule.log_scaled_weights[i] ==
              doctest::Approx(std::log(rule.weights[i]) + rule.nodes[i] * rule.nodes[i]).epsilon(1e-10));
      }
      CHECK(w0 == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
      if (n > 1) CHECK(w2 == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-12));
    }
  }

  TEST_CASE("Laplace, quadrature and trapezoid agree on small clusters") {
    RandomStream rng(41);
    double worst_laplace = 0.0, worst_ghq = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      auto params = testing::random_params(rng, 4, 2, 0.05 + 0.95 * rng.uniform());
      const auto c = testing::random_cluster(rng, 4, 2, 10);
      const auto s = find_cluster_mode(params, c, 2);
      const double ghq = ghq_cluster_loglik(params, c, 2, 61);
      const double sigma = 1.0 / std::sqrt(-s.curvature);
      const double trap = testing::trapezoid_loglik(params, c, 2, s.mode - 8 * sigma, s.mode + 8 * sigma, 20001);
      const double gap = std::abs(s.loglik - ghq);
      worst_laplace = std::max(worst_laplace, gap);
      worst_ghq = std::max(worst_ghq, std::abs(ghq - trap));
    }
    // Laplace carries an intrinsic error of order 1e-2 on tiny clusters
    CHECK(worst_laplace <= 2e-2);
    CHECK(worst_ghq <= 1e-8);
  }

  TEST_CASE("Laplace error of one binary observation at unit variance") {
    // reference from an adaptive quadrature in scipy: Laplace - log(1/2)
    ParamVector p{{0.0}, {}, 1.0};
    ClusterRows c;
    c.responses = {1};
    c.weights = {1.0};
    CHECK(find_cluster_mode(p, c, 0).loglik - std::log(0.5) == doctest::Approx(-0.007507942329836).epsilon(1e-6));
    CHECK(std::abs(ghq_cluster_loglik(p, c, 0, 61) - std::log(0.5)) <= 1e-9);
  }

  TEST_CASE("quadrature converges in the number of nodes") {
    RandomStream rng(43);
    for (int rep = 0; rep < 20; ++rep) {
      auto params = testing::random_params(rng, 4, 1, 0.5 + rng.uniform());
      const auto c = testing::random_cluster(rng, 4, 1, 6);
      const double ref = ghq_cluster_loglik(params, c, 1, 199);
      double prev = std::abs(ghq_cluster_loglik(params, c, 1, 1) - ref);
      for (int n : {5, 11, 21}) {
        const double err = std::abs(ghq_cluster_loglik(params, c, 1, n) - ref);
        CHECK(err <= prev + 1e-12);
        prev = err;
      }
    }
  }

  TEST_CASE("single binary observation against numeric integration") {
    ParamVector p{{0.0}, {}, 0.25};
    ClusterRows c;
    c.responses = {1};
    c.weights = {1.0};
    // F(u) averaged over a symmetric normal is exactly 1/2
    const double exact = std::log(0.5);
    const double trap = testing::trapezoid_loglik(p, c, 0, -6.0, 6.0, 20001);
    CHECK(std::abs(trap - exact) <= 1e-9);
    CHECK(std::abs(ghq_cluster_loglik(p, c, 0, 61) - trap) <= 1e-6);
    CHECK(std::abs(find_cluster_mode(p, c, 0).loglik - trap) <= 1e-3);
  }

  TEST_CASE("vanishing variance approaches the fixed-effects value") {
    RandomStream rng(47);
    auto params = testing::random_params(rng, 4, 2, 1e-8);
    const auto c = testing::random_cluster(rng, 4, 2, 10);
    auto fixed = params;
    fixed.tau00 = 1.0;
    double at_zero = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i) {
      at_zero += std::log(category_probs(params, c.row(i, 2), 0.0)[static_cast<std::size_t>(c.responses[i] - 1)]);
    }
    CHECK(ghq_cluster_loglik(params, c, 2, 21) == doctest::Approx(at_zero).epsilon(1e-6));
    CHECK(find_cluster_mode(params, c, 2).loglik == doctest::Approx(at_zero).epsilon(1e-6));

    double prev = INFINITY;
    for (double tau : {1.0, 0.3, 0.1, 0.01}) {
      params.tau00 = tau;
      const double gap = std::abs(find_cluster_mode(params, c, 2).loglik - ghq_cluster_loglik(params, c, 2, 61));
      CHECK(gap <= prev + 1e-12);
      prev = gap;
    }
  }

  TEST_CASE("boundary deviance is the independent ordinal deviance") {
    std::vector<ClusterRows> cs(2);
    cs[0].responses = {1, 2, 2};
    cs[0].weights = {1.0, 2.0, 1.0};
    cs[1].responses = {1};
    cs[1].weights = {2.0};
    cs[1].cluster = 1;
    ModelData data(2, {}, cs);
    ParamVector p{{0.0}, {}, 0.0};
    CHECK(total_minus2ll(p, data) == doctest::Approx(-2.0 * 6 * std::log(0.5)));
  }

  TEST_CASE("Laplace gradient matches differences of the deviance") {
    RandomStream rng(53);
    for (int rep = 0; rep < 10; ++rep) {
      const auto data = random_model(rng, 6, 15, 2);
      auto params = testing::random_params(rng, 4, 2, 0.1 + rng.uniform());
      const auto lg = laplace_loglik_gradient(params, data);
      CHECK(lg.loglik == doctest::Approx(-0.5 * total_minus2ll(params, data)).epsilon(1e-12));
      const double h = 1e-5;
      for (Eigen::Index k = 0; k < lg.gradient.size(); ++k) {
        auto up = params, dn = params;
        const auto idx = static_cast<std::size_t>(k);
        if (idx < params.thresholds.size()) {
          up.thresholds[idx] += h;
          dn.thresholds[idx] -= h;
        } else if (idx < params.thresholds.size() + params.slopes.size()) {
          up.slopes[idx - params.thresholds.size()] += h;
          dn.slopes[idx - params.thresholds.size()] -= h;
        } else {
          up.tau00 *= std::exp(h);
          dn.tau00 *= std::exp(-h);
        }
        const double fd = -0.25 * (total_minus2ll(up, data) - total_minus2ll(dn, data)) / h;
        CHECK(std::abs(lg.gradient[k] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("fixed-effects gradient matches differences") {
    RandomStream rng(59);
    const auto data = random_model(rng, 5, 20, 1);
    auto params = testing::random_params(rng, 4, 1, 0.0);
    const auto lg = fixed_effects_loglik_gradient(params, data);
    CHECK(lg.gradient.size() == 4);
    const double h = 1e-6;
    for (std::size_t k = 0; k < 4; ++k) {
      auto up = params, dn = params;
      double& a = k < 3 ? up.thresholds[k] : up.slopes[0];
      double& b = k < 3 ? dn.thresholds[k] : dn.slopes[0];
      a += h;
      b -= h;
      const double fd = -0.25 * (total_minus2ll(up, data) - total_minus2ll(dn, data)) / h;
      CHECK(lg.gradient[static_cast<Eigen::Index>(k)] == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("evaluation is reproducible across worker counts") {
    RandomStream rng(61);
    const auto data = random_model(rng, 40, 25, 2);
    auto params = testing::random_params(rng, 4, 2, 0.4);
    const double one = total_minus2ll(params, data, 1);
    CHECK(total_minus2ll(params, data, 4) == one);
    CHECK(total_minus2ll(params, data, 7) == one);
    CHECK(laplace_loglik_gradient(params, data, 3).gradient == laplace_loglik_gradient(params, data, 1).gradient);
  }
}
