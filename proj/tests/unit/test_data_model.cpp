#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ordmlm/csv_io.hpp"
#include "ordmlm/data_model.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/random.hpp"

using namespace ordmlm;

namespace {

ObservationRecord rec(std::optional<double> hb, std::string cluster,
                      std::map<std::string, std::string> covs) {
  return ObservationRecord{hb, std::nullopt, std::move(cluster), std::move(covs)};
}

CovariateScheme scheme(const std::string& name) {
  for (const auto& s : default_covariate_schemes()) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("no scheme " + name);
}

}  // namespace

TEST_SUITE("data_model") {
  TEST_CASE("hemoglobin classification examples") {
    CHECK(classify_hemoglobin(6.9) == AnemiaLevel::Severe);
    CHECK(classify_hemoglobin(11.0) == AnemiaLevel::None);
    CHECK(classify_hemoglobin(10.5) == AnemiaLevel::Mild);
    CHECK(classify_hemoglobin(0.0) == AnemiaLevel::Severe);
    CHECK(classify_hemoglobin(7.0) == AnemiaLevel::Moderate);
    CHECK(classify_hemoglobin(9.99) == AnemiaLevel::Moderate);
    CHECK(classify_hemoglobin(10.0) == AnemiaLevel::Mild);
    CHECK(classify_hemoglobin(10.999) == AnemiaLevel::Mild);
  }

  TEST_CASE("classification rejects invalid input") {
    CHECK_THROWS_AS(classify_hemoglobin(-0.1), ClassificationError);
    CHECK_THROWS_AS(classify_hemoglobin(std::numeric_limits<double>::quiet_NaN()), ClassificationError);
    CHECK_THROWS_AS(classify_hemoglobin(std::numeric_limits<double>::infinity()), ClassificationError);
  }

  TEST_CASE("classification partitions [0, inf) monotonically") {
    RandomStream rng(11);
    double prev_hb = 0.0;
    int prev = 1;
    for (int i = 0; i < 20000; ++i) {
      const double hb = prev_hb + rng.uniform() * 0.01;
      const int level = static_cast<int>(classify_hemoglobin(hb));
      CHECK(level >= prev);
      const int expect = hb < 7.0 ? 1 : hb < 10.0 ? 2 : hb < 11.0 ? 3 : 4;
      REQUIRE(level == expect);
      prev = level;
      prev_hb = hb;
    }
    CHECK(prev_hb > 11.0);
  }

  TEST_CASE("labels") {
    CHECK(anemia_label(AnemiaLevel::Severe) == "Severe");
    CHECK(anemia_label(4) == "None");
    CHECK_THROWS(anemia_label(5));
  }

  TEST_CASE("score convention follows category order") {
    CHECK(scheme("age_at_marriage").score_of("18 To 26 Years") == 1);
    CHECK(scheme("age_at_marriage").score_of("Below 18 Years") == 0);
    CHECK(scheme("age_at_marriage").score_of("Above 26 Years") == 2);
    CHECK(scheme("age_of_child").score_of("<48 months") == 0);
    CHECK_FALSE(scheme("age_of_child").score_of("unknown").has_value());
  }

  TEST_CASE("encoding indexes clusters by first appearance") {
    EncodingSpec spec{{scheme("age_at_marriage")}};
    std::vector<ObservationRecord> records;
    const std::vector<std::string> states{"Sikkim", "Assam", "Tripura", "Manipur",
                                          "Meghalaya", "Mizoram", "Nagaland", "Arunachal"};
    for (int i = 0; i < 40; ++i) {
      records.push_back(rec(6.0 + 0.15 * i, states[static_cast<std::size_t>(i * 3 % 8)],
                            {{"age_at_marriage", "18 To 26 Years"}}));
    }
    const auto data = encode_dataset(records, spec);
    CHECK(data.cluster_count() == 8);
    CHECK(data.cluster_labels()[0] == "Sikkim");
    CHECK(data.cluster_labels()[1] == states[3]);
    CHECK(data.covariate_count() == 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(data.score(i, 0) == 1.0);
      CHECK(data.decode(i, 0) == "18 To 26 Years");
    }
    CHECK(data.responses()[0] == 1);
    CHECK(data.levels() == 4);
  }

  TEST_CASE("encoding is deterministic and round trips labels") {
    const auto schemes = default_covariate_schemes();
    EncodingSpec spec{schemes};
    RandomStream rng(3);
    std::vector<ObservationRecord> records;
    for (int i = 0; i < 500; ++i) {
      std::map<std::string, std::string> covs;
      for (const auto& s : schemes) {
        covs[s.name] = s.categories[static_cast<std::size_t>(rng.uniform() * s.categories.size())];
      }
      records.push_back(rec(5.0 + 8.0 * rng.uniform(), "S" + std::to_string(static_cast<int>(rng.uniform() * 9)),
                            covs));
    }
    const auto a = encode_dataset(records, spec);
    const auto b = encode_dataset(records, spec);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t c = 0; c < schemes.size(); ++c) {
        CHECK(a.decode(i, c) == records[i].covariates.at(schemes[c].name));
      }
      CHECK(a.responses()[i] == static_cast<int>(classify_hemoglobin(*records[i].hemoglobin)));
    }
  }

  TEST_CASE("listwise deletion counts each reason") {
    EncodingSpec spec{{scheme("sex_of_child")}};
    std::vector<ObservationRecord> records{
        rec(9.0, "A", {{"sex_of_child", "Male"}}),
        rec(std::nullopt, "A", {{"sex_of_child", "Male"}}),
        rec(-2.0, "A", {{"sex_of_child", "Male"}}),
        rec(9.0, "", {{"sex_of_child", "Male"}}),
        rec(9.0, "B", {}),
        rec(12.0, "B", {{"sex_of_child", "Female"}}),
    };
    ExclusionReport report;
    const auto data = encode_dataset(records, spec, report);
    CHECK(data.size() == 2);
    CHECK(report.total_records == 6);
    CHECK(report.retained == 2);
    CHECK(report.excluded() == 4);
    CHECK(report.by_reason.at("missing hemoglobin") == 1);
    CHECK(report.by_reason.at("invalid hemoglobin") == 1);
    CHECK(report.by_reason.at("missing cluster") == 1);
    CHECK(report.by_reason.at("missing sex_of_child") == 1);
    CHECK(report.to_text().find("missing sex_of_child") != std::string::npos);
  }

  TEST_CASE("encoding errors") {
    EncodingSpec spec{{scheme("sex_of_child")}};
    CHECK_THROWS_AS(encode_dataset(std::vector<ObservationRecord>{}, spec), EncodingError);
    std::vector<ObservationRecord> bad{rec(9.0, "A", {{"sex_of_child", "Boy"}})};
    try {
      encode_dataset(bad, spec);
      FAIL("expected an encoding error");
    } catch (const EncodingError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("record 1") != std::string::npos);
      CHECK(msg.find("sex_of_child") != std::string::npos);
    }
    std::vector<ObservationRecord> none{rec(std::nullopt, "A", {{"sex_of_child", "Male"}})};
    CHECK_THROWS_AS(encode_dataset(none, spec), EncodingError);
    EncodingSpec dup{{scheme("sex_of_child"), scheme("sex_of_child")}};
    CHECK_THROWS_AS(encode_dataset(bad, dup), EncodingError);
  }

  TEST_CASE("pre-coded responses with other level counts") {
    EncodingSpec spec{{}, 2};
    std::vector<ObservationRecord> records{
        {std::nullopt, 1, "A", {}}, {std::nullopt, 2, "A", {}}, {std::nullopt, 3, "B", {}}};
    ExclusionReport report;
    const auto data = encode_dataset(records, spec, report);
    CHECK(data.levels() == 2);
    CHECK(data.size() == 2);
    CHECK(report.by_reason.at("invalid response") == 1);
    std::vector<ObservationRecord> hb{rec(9.0, "A", {})};
    CHECK_THROWS_AS(encode_dataset(hb, spec), EncodingError);
  }

  TEST_CASE("dataset invariants are enforced") {
    CHECK_THROWS_AS(EncodedDataset({1, 5}, {}, {0, 0}, {"A"}, {}, 4), EncodingError);
    CHECK_THROWS_AS(EncodedDataset({1, 2}, {}, {0, 1}, {"A"}, {}, 4), EncodingError);
    CHECK_THROWS_AS(EncodedDataset({1, 2}, {0.0}, {0, 0}, {"A"}, {scheme("sex_of_child")}, 4), EncodingError);
    CHECK_THROWS_AS(EncodedDataset({1}, {}, {0}, {"A"}, {}, 1), EncodingError);
  }

  TEST_CASE("csv ingestion with quotes, BOM and missing markers") {
    std::istringstream in(
        "\xEF\xBB\xBF# comment\n"
        "state,hb,marriage\n"
        "\"Sikkim\",6.5,\"18 To 26 Years\"\n"
        "Assam,NA,Below 18 Years\n"
        "Assam,abc,Below 18 Years\n"
        "\"Tri, pura\",11.2,\n");
    const auto doc = read_csv(in);
    CHECK(doc.header == std::vector<std::string>{"state", "hb", "marriage"});
    CHECK(doc.rows.size() == 4);
    ColumnMapping mapping;
    mapping.hemoglobin = "hb";
    mapping.cluster = "state";
    mapping.covariates["age_at_marriage"] = "marriage";
    const auto records = records_from_csv(doc, mapping);
    REQUIRE(records.size() == 4);
    CHECK(records[0].cluster_id == "Sikkim");
    CHECK(*records[0].hemoglobin == 6.5);
    CHECK_FALSE(records[1].hemoglobin.has_value());
    CHECK(std::isnan(*records[2].hemoglobin));
    CHECK(records[3].cluster_id == "Tri, pura");
    CHECK(records[3].covariates.count("age_at_marriage") == 0);

    ExclusionReport report;
    const auto data = encode_dataset(records, EncodingSpec{{scheme("age_at_marriage")}}, report);
    CHECK(data.size() == 1);
    CHECK(report.by_reason.at("missing hemoglobin") == 1);
    CHECK(report.by_reason.at("invalid hemoglobin") == 1);
    CHECK(report.by_reason.at("missing age_at_marriage") == 1);

    mapping.covariates["religion"] = "faith";
    CHECK_THROWS_AS(records_from_csv(doc, mapping), ConfigError);
  }

  TEST_CASE("csv ragged rows are data errors") {
    std::istringstream in("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv(in), DataError);
  }

  TEST_CASE("dataset csv round trip through ingestion") {
    const auto schemes = default_covariate_schemes();
    RandomStream rng(8);
    std::vector<ObservationRecord> records;
    for (int i = 0; i < 200; ++i) {
      std::map<std::string, std::string> covs;
      for (const auto& s : schemes) {
        covs[s.name] = s.categories[static_cast<std::size_t>(rng.uniform() * s.categories.size())];
      }
      records.push_back(rec(4.0 + 9.0 * rng.uniform(), "C" + std::to_string(i % 7), covs));
    }
    const auto data = encode_dataset(records, EncodingSpec{schemes});
    std::istringstream in(dataset_to_csv(data));
    const auto again = encode_dataset(records_from_csv(read_csv(in), ColumnMapping::identity(schemes)),
                                      EncodingSpec{schemes});
    CHECK(again == data);
  }
}
