#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "replicheck/report.hpp"

using namespace replicheck;

namespace {

Json three_site_summaries() {
  return Json::parse(R"({"n": 438, "terms": [
    {"name": "Site", "df": 2, "ss": 2399368},
    {"name": "Treatment", "df": 1, "ss": 533121},
    {"name": "S×T", "df": 2, "ss": 425825},
    {"name": "Error", "df": 432, "ss": 24434637}]})");
}

Dataset two_by_three(std::uint64_t seed) {
  SimParams p;
  p.seed = seed;
  p.treatment_effects = {-0.4, 0.4};
  p.interaction_sd = 0.5;
  return generate_grbd(p);
}

}  // namespace

TEST(Display, Rules) {
  EXPECT_EQ(display::quantity(2399368), "2,399,368");
  EXPECT_EQ(display::quantity(999.94), "999.9");
  EXPECT_EQ(display::quantity(0.012345), "0.01235");
  EXPECT_EQ(display::quantity(-12345.4), "-12,345");
  EXPECT_EQ(display::quantity(212912.5), "212,912");
  EXPECT_EQ(display::f_stat(9.4255), "9.4");
  EXPECT_EQ(display::p_value(0.00049), "<0.001");
  EXPECT_EQ(display::p_value(0.0005), "0.001");
  EXPECT_EQ(display::p_value(0.25438), "0.254");
  EXPECT_EQ(display::estimate(-0.005), "-0.01");
}

TEST(Summaries, RolesFromNamesTermFieldOrPosition) {
  int n = 0;
  auto terms = parse_summaries(three_site_summaries(), n);
  EXPECT_EQ(n, 438);
  EXPECT_EQ(terms[0].term, AnovaTerm::batch);
  EXPECT_EQ(terms[2].term, AnovaTerm::interaction);

  auto j = three_site_summaries();
  j["terms"][0]["name"] = "Lab";
  j["terms"][2]["name"] = "Lab x Drug";
  terms = parse_summaries(j, n);
  EXPECT_EQ(terms[0].term, AnovaTerm::batch);
  EXPECT_EQ(terms[2].term, AnovaTerm::interaction);

  // Explicit roles allow any order.
  auto k = Json::parse(R"({"n": 438, "terms": [
    {"name": "Residual", "df": 432, "ss": 24434637},
    {"name": "Drug", "term": "treatment", "df": 1, "ss": 533121},
    {"name": "Site:Drug", "df": 2, "ss": 425825},
    {"name": "Lab", "term": "batch", "df": 2, "ss": 2399368}]})");
  const auto t = analyze_summaries(k, {}).anova;
  EXPECT_EQ(t.row(AnovaTerm::treatment).label, "Drug");
  EXPECT_EQ(t.row(AnovaTerm::batch).ss, 2399368);

  k["terms"][1]["term"] = "dose";
  EXPECT_THROW(parse_summaries(k, n), ParseError);
  EXPECT_THROW(parse_summaries(Json::parse(R"({"terms": []})"), n), ParseError);
  EXPECT_THROW(parse_summaries(Json::parse(R"({"n": "x", "terms": []})"), n), ParseError);
}

TEST(Summaries, ThreeSiteReportText) {
  const auto r = analyze_summaries(three_site_summaries(), {}, "table.json");
  const auto text = render_text(r);
  EXPECT_NE(text.find("2,399,368"), std::string::npos);
  EXPECT_NE(text.find("212,912"), std::string::npos);
  EXPECT_NE(text.find("56,562"), std::string::npos);
  EXPECT_NE(text.find("<0.001"), std::string::npos);
  EXPECT_NE(text.find("0.254"), std::string::npos);
  EXPECT_FALSE(r.effects);
  EXPECT_EQ(r.provenance.mode, "summaries");
}

TEST(Analyze, RawDataPipeline) {
  AnalysisOptions o;
  o.replication = classify_replication(Independence::full, Timing::parallel);
  const auto r = analyze(two_by_three(4), o);
  ASSERT_TRUE(r.effects);
  ASSERT_TRUE(r.heterogeneity);
  EXPECT_EQ(r.effects->per_batch.size(), 3u);
  EXPECT_EQ(r.provenance.rows_analysed, 60);
  const auto text = render_text(r);
  for (const char* s : {"Design:", "Validation: pass", "ANOVA", "Per-batch effects", "Verdict",
                        "independent parallel (panel C)"})
    EXPECT_NE(text.find(s), std::string::npos) << s;
}

TEST(Analyze, ValidationFailureCarriesReport) {
  auto rows = two_by_three(1).observations();
  for (auto& o : rows)
    if (o.batch == "B2" && o.treatment == "T2") o.excluded = true;
  try {
    analyze(Dataset("x", rows), {});
    FAIL();
  } catch (const ValidationFailure& e) {
    EXPECT_FALSE(e.report().overall);
    EXPECT_FALSE(e.report().find(check_name::crossed)->passed());
    EXPECT_EQ(exit_code_for(e), exit_code::design);
  }
}

TEST(Analyze, MoreThanTwoTreatmentsSkipsEffects) {
  std::mt19937_64 gen(2);
  const auto r = analyze(oracle::random_dataset(gen, 3, 3, 3, 5), {});
  EXPECT_FALSE(r.effects);
  EXPECT_FALSE(r.effects_unavailable_reason.empty());
  const auto j = to_json(r);
  EXPECT_TRUE(j["effects"].is_null());
  EXPECT_TRUE(j.contains("effects_unavailable_reason"));
}

TEST(Json, TopLevelKeyOrderAndNulls) {
  const auto j = to_json(analyze_summaries(three_site_summaries(), {}));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  const std::vector<std::string> want = {"schema",       "provenance",
                                         "settings",     "design",
                                         "validation",   "anova",
                                         "effects",      "effects_unavailable_reason",
                                         "heterogeneity", "verdict",
                                         "replication",  "data"};
  EXPECT_EQ(keys, want);
  EXPECT_EQ(j["schema"], "replicheck/1");
  const auto& rows = j["anova"]["rows"];
  EXPECT_FALSE(rows[0].contains("vs_interaction"));
  EXPECT_FALSE(rows[3].contains("vs_error"));
  EXPECT_TRUE(rows[1].contains("vs_interaction"));
}

TEST(Json, RoundTripIsLossless) {
  AnalysisOptions o;
  o.replication = classify_replication(Independence::partial, Timing::staggered);
  o.confidence = 0.9;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = analyze(two_by_three(s), o);
    const auto text = render_json(r);
    const auto back = report_from_json(Json::parse(text));
    EXPECT_EQ(back, r);
    EXPECT_EQ(render_json(back), text);
  }
  const auto r = analyze_summaries(three_site_summaries(), {});
  EXPECT_EQ(report_from_json(to_json(r)), r);
}

TEST(Json, UnavailableTestsAreNullWithReason) {
  auto rows = two_by_three(2).observations();
  int dropped = 0;
  for (auto& o : rows)
    if (o.batch == "B1" && o.treatment == "T1" && dropped++ < 9) o.excluded = true;
  const auto table = grbd_anova(Dataset("x", rows));
  const auto j = to_json(table);
  const auto& t = j["rows"][2]["vs_error"];
  EXPECT_TRUE(t["f"].is_null());
  EXPECT_TRUE(t["p"].is_null());
  EXPECT_FALSE(t["unavailable_reason"].get<std::string>().empty());
}

TEST(Json, DeterministicBytes) {
  const auto a = render_json(analyze(two_by_three(9), {}));
  const auto b = render_json(analyze(two_by_three(9), {}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.back(), '\n');
}

TEST(Report, TextAgreesWithJsonUnderDisplayRules) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = analyze(two_by_three(s), {});
    const auto text = render_text(r);
    const auto j = to_json(r);
    for (const auto& row : j["anova"]["rows"]) {
      EXPECT_NE(text.find(display::quantity(row["ss"].get<double>())), std::string::npos);
      EXPECT_NE(text.find(display::quantity(row["ms"].get<double>())), std::string::npos);
      for (const char* key : {"vs_error", "vs_interaction"}) {
        if (!row.contains(key) || row[key]["f"].is_null()) continue;
        EXPECT_NE(text.find(display::f_stat(row[key]["f"].get<double>())), std::string::npos);
        EXPECT_NE(text.find(display::p_value(row[key]["p"].get<double>())), std::string::npos);
      }
    }
    for (const auto& b : j["effects"]["per_batch"])
      for (const char* key : {"diff", "se", "ci_low", "ci_high"})
        EXPECT_NE(text.find(display::estimate(b[key].get<double>())), std::string::npos);
  }
}

TEST(Errors, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(DesignError("x")), 2);
  EXPECT_EQ(exit_code_for(DegenerateDataError("x")), 2);
  EXPECT_EQ(exit_code_for(ParseError("x")), 3);
  EXPECT_EQ(exit_code_for(ConsistencyError("x")), 3);
  EXPECT_EQ(exit_code_for(NumericError("x")), 4);
  EXPECT_EQ(exit_code_for(DomainError("x")), 4);
  EXPECT_EQ(exit_code_for(ConfigError("x")), 1);
  EXPECT_EQ(exit_code_for(IoError("x")), 1);
  EXPECT_EQ(exit_code_for(UnsupportedError("x")), 2);
}

TEST(Summaries, MultiplicationSignMarksInteraction) {
  EXPECT_EQ(detail::term_from_role("Lab × Drug"), AnovaTerm::interaction);
  EXPECT_EQ(detail::term_from_role("Lab:Drug"), AnovaTerm::interaction);
  EXPECT_EQ(detail::term_from_role("Residuals"), AnovaTerm::error);
  EXPECT_FALSE(detail::term_from_role("Drug"));
}
