#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ordmlm/crosstab.hpp"
#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/random.hpp"
#include "test_support.hpp"

using namespace ordmlm;

namespace {

using Counts = std::vector<std::vector<std::int64_t>>;

ContingencyTable table_of(const Counts& counts) {
  std::vector<std::string> rows, cols;
  for (std::size_t i = 0; i < counts.size(); ++i) rows.push_back("r" + std::to_string(i));
  for (std::size_t k = 0; k < counts[0].size(); ++k) cols.push_back("c" + std::to_string(k));
  return ContingencyTable(rows, cols, counts);
}

// state-by-level counts in Severe, Moderate, Mild, None order
const Counts kStates{{159, 301, 42, 206},  {317, 724, 261, 1611}, {33, 180, 35, 277},  {241, 526, 118, 1198},
                     {51, 258, 57, 296},   {67, 181, 20, 93},     {22, 55, 17, 105},   {334, 1189, 136, 1026}};

double brute_force_statistic(const Counts& c) {
  double n = 0.0;
  std::vector<double> r(c.size(), 0.0), k(c[0].size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      r[i] += static_cast<double>(c[i][j]);
      k[j] += static_cast<double>(c[i][j]);
      n += static_cast<double>(c[i][j]);
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      const double e = r[i] * k[j] / n;
      s += (static_cast<double>(c[i][j]) - e) * (static_cast<double>(c[i][j]) - e) / e;
    }
  }
  return s;
}

Counts random_counts(RandomStream& rng, std::size_t r, std::size_t c) {
  Counts out(r, std::vector<std::int64_t>(c));
  for (auto& row : out) {
    for (auto& v : row) v = 1 + static_cast<std::int64_t>(rng.uniform() * 60);
  }
  return out;
}

}  // namespace

TEST_SUITE("crosstab") {
  TEST_CASE("margins and percentages") {
    const auto t = table_of(kStates);
    CHECK(t.rows() == 8);
    CHECK(t.cols() == 4);
    CHECK(t.row_total(0) == 708);
    CHECK(t.grand_total() == 10136);
    CHECK(t.count(0, 0) == 159);
    CHECK(round_half_away(t.row_percent(0, 0), 2) == doctest::Approx(22.46));
    CHECK(round_half_away(t.col_percent(0, 0), 2) == doctest::Approx(12.99));
    std::int64_t col_sum = 0;
    for (std::size_t k = 0; k < t.cols(); ++k) col_sum += t.col_total(k);
    CHECK(col_sum == t.grand_total());
  }

  TEST_CASE("invalid tables are rejected") {
    CHECK_THROWS_AS(table_of(Counts{{1, 2, 3}}), DomainError);
    CHECK_THROWS_AS(table_of(Counts{{1}, {2}}), DomainError);
    CHECK_THROWS_AS(table_of(Counts{{1, -2}, {3, 4}}), DomainError);
  }

  TEST_CASE("state table statistic") {
    const auto r = chi_square_independence(table_of(kStates));
    CHECK(r.df == 21);
    CHECK(r.statistic == doctest::Approx(622.8437).epsilon(1e-6));
    CHECK(r.p_value < 1e-4);
    CHECK_FALSE(r.small_expected_warning);
  }

  TEST_CASE("place of residence table") {
    const auto r = chi_square_independence(table_of({{1035, 2705, 516, 3818}, {189, 709, 170, 994}}));
    CHECK(r.df == 3);
    CHECK(r.statistic == doctest::Approx(27.1599).epsilon(1e-5));
    CHECK(r.p_value < 1e-4);
  }

  TEST_CASE("independent table has zero statistic") {
    const auto r = chi_square_independence(table_of({{2, 4, 6}, {3, 6, 9}, {5, 10, 15}}));
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(1.0));
  }

  TEST_CASE("zero expected cell names the cell") {
    try {
      chi_square_independence(table_of({{0, 4}, {0, 6}}));
      FAIL("expected a domain error");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("c0") != std::string::npos);
    }
  }

  TEST_CASE("small expected counts warn") {
    const auto r = chi_square_independence(table_of({{1, 9}, {8, 2}}));
    CHECK(r.small_expected_warning);
    CHECK(r.min_expected_cell == doctest::Approx(4.5));
  }

  TEST_CASE("properties on random tables") {
    RandomStream rng(21);
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t r = 2 + static_cast<std::size_t>(rng.uniform() * 4);
      const std::size_t c = 2 + static_cast<std::size_t>(rng.uniform() * 4);
      auto counts = random_counts(rng, r, c);
      const double base = chi_square_independence(table_of(counts)).statistic;

      auto permuted = counts;
      std::reverse(permuted.begin(), permuted.end());
      for (auto& row : permuted) std::rotate(row.begin(), row.begin() + 1, row.end());
      CHECK(chi_square_independence(table_of(permuted)).statistic == doctest::Approx(base).epsilon(1e-12));

      auto doubled = counts;
      for (auto& row : doubled) {
        for (auto& v : row) v *= 2;
      }
      CHECK(chi_square_independence(table_of(doubled)).statistic == doctest::Approx(2.0 * base).epsilon(1e-12));
    }
    for (int rep = 0; rep < 100; ++rep) {
      const auto counts = random_counts(rng, 5, 5);
      const double s = chi_square_independence(table_of(counts)).statistic;
      CHECK(std::abs(s - brute_force_statistic(counts)) <= 1e-9 * std::max(1.0, std::abs(s)));
    }
  }

  TEST_CASE("building from an encoded dataset") {
    std::vector<CovariateScheme> schemes{{"sex", {"Male", "Female", "Other"}}};
    // Other is never observed and is left out of the rows
    EncodedDataset data({1, 2, 4, 4, 3, 1}, {0, 0, 1, 1, 1, 0}, {0, 0, 1, 1, 2, 2}, {"A", "B", "C"}, schemes, 4);
    const auto t = build_crosstab(data, "sex");
    CHECK(t.rows() == 2);
    CHECK(t.row_labels() == std::vector<std::string>{"Male", "Female"});
    CHECK(t.col_labels().size() == 4);
    CHECK(t.count(0, 0) == 2);
    CHECK(t.count(1, 3) == 2);
    const auto byc = build_crosstab(data, kClusterFactor);
    CHECK(byc.rows() == 3);
    CHECK(byc.row_labels()[2] == "C");
    CHECK_THROWS_AS(build_crosstab(data, "religion"), EncodingError);
  }

  TEST_CASE("degenerate response concentrates in one column") {
    std::vector<CovariateScheme> schemes{{"sex", {"Male", "Female"}}};
    EncodedDataset data({4, 4, 4, 4}, {0, 1, 0, 1}, {0, 0, 0, 0}, {"A"}, schemes, 4);
    const auto t = build_crosstab(data, "sex");
    CHECK(t.col_total(3) == 4);
    CHECK(t.col_total(0) == 0);
    CHECK(std::isnan(t.col_percent(0, 0)));
    CHECK_THROWS_AS(chi_square_independence(t), DomainError);
    CHECK_THROWS_AS(build_crosstab(data, kClusterFactor), DomainError);
  }

  TEST_CASE("renderings") {
    const auto t = table_of({{1035, 2705, 516, 3818}, {189, 709, 170, 994}});
    const auto csv = crosstab_csv(t);
    CHECK(testing::check_schema(csv).empty());
    const auto r = chi_square_independence(t);
    const auto text = crosstab_text(t, "place", &r);
    CHECK(text.find("27.16") != std::string::npos);
    CHECK(text.find("12.82") != std::string::npos);
    CHECK(round_half_away(2.5, 0) == 3.0);
    CHECK(round_half_away(-2.5, 0) == -3.0);
    CHECK(round_half_away(-0.125, 2) == doctest::Approx(-0.13));
    CHECK(round_half_away(0.125, 2) == doctest::Approx(0.13));
  }
}
