#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "replicheck/anova.hpp"
#include "replicheck/domain.hpp"

using namespace replicheck;

namespace {

Dataset uniform_design(int t, int b, int r) {
  std::vector<Observation> rows;
  double y = 0;
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < b; ++j)
      for (int k = 0; k < r; ++k)
        rows.push_back({y += 1.5, "T" + std::to_string(i), "B" + std::to_string(j), false});
  return Dataset("uniform", rows);
}

}  // namespace

TEST(Dataset, TrimsLabelsAndRejectsBadRows) {
  Dataset d("x", {{1.0, "  ctrl ", "\tsite1", false}});
  EXPECT_EQ(d.observations()[0].treatment, "ctrl");
  EXPECT_EQ(d.observations()[0].batch, "site1");
  EXPECT_THROW(Dataset("x", {{NAN, "a", "b", false}}), DesignError);
  EXPECT_THROW(Dataset("x", {{1.0, "  ", "b", false}}), DesignError);
}

TEST(Dataset, LabelsAreCaseSensitive) {
  Dataset d("x", {{1, "A", "b1", false}, {2, "a", "b1", false}, {3, "A", "b2", false},
                  {4, "a", "b2", false}});
  EXPECT_EQ(summarize_design(d).t, 2);
}

TEST(SummarizeDesign, UniformCounts) {
  const auto s = summarize_design(uniform_design(2, 3, 73));
  EXPECT_EQ(s.t, 2);
  EXPECT_EQ(s.b, 3);
  EXPECT_EQ(s.n, 438);
  EXPECT_TRUE(s.balanced);
  EXPECT_TRUE(s.fully_crossed);
  EXPECT_TRUE(s.genuine_replication);
}

TEST(SummarizeDesign, UnequalSiteSizes) {
  // 438 units over three sites of unequal size
  // (Error df 432 = N - t*b).
  const int counts[2][3] = {{80, 61, 78}, {79, 62, 78}};
  std::vector<Observation> rows;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < counts[i][j]; ++k)
        rows.push_back({800.0 + k, i ? "drug" : "control", "site" + std::to_string(j), false});
  const auto s = summarize_design(Dataset("three-site", rows));
  EXPECT_EQ(s.n, 438);
  EXPECT_FALSE(s.balanced);
  EXPECT_TRUE(s.genuine_replication);
  EXPECT_EQ(s.n - s.t * s.b, 432);
}

TEST(SummarizeDesign, EmptyCellIsNotCrossed) {
  Dataset d("x", {{1, "A", "b1", false}, {2, "A", "b1", false}, {3, "B", "b1", false},
                  {4, "B", "b1", false}, {5, "A", "b2", false}, {6, "A", "b2", false}});
  const auto s = summarize_design(d);
  EXPECT_FALSE(s.fully_crossed);
  EXPECT_FALSE(s.balanced);
  EXPECT_EQ(s.cell_counts[1][1], 0);
}

TEST(SummarizeDesign, TooFewLevels) {
  EXPECT_THROW(summarize_design(Dataset("x", {{1, "A", "b1", false}, {2, "B", "b1", false}})),
               DesignError);
  EXPECT_THROW(summarize_design(Dataset("x", {{1, "A", "b1", false}, {2, "A", "b2", false}})),
               DesignError);
  EXPECT_THROW(summarize_design(Dataset("x", {{1, "A", "b1", true}})), DesignError);
}

TEST(SummarizeDesign, ExcludedRowsAreIgnored) {
  auto rows = uniform_design(2, 2, 3).observations();
  rows[4].excluded = true;
  const auto s = summarize_design(Dataset("x", rows));
  EXPECT_EQ(s.n, 11);
  EXPECT_EQ(s.n_excluded, 1);
  EXPECT_EQ(s.cell_counts[0][1], 2);
}

TEST(SummarizeDesign, PropertyRowPermutationAndExclusion) {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = oracle::random_dataset(gen, 2 + rep % 3, 2 + rep % 4, 1, 6);
    const auto base = summarize_design(d);
    auto rows = d.observations();
    std::shuffle(rows.begin(), rows.end(), gen);
    EXPECT_EQ(summarize_design(Dataset("p", rows)), base);

    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    const auto k = pick(gen);
    rows[k].excluded = true;
    Dataset dropped("p", rows);
    // Excluding a row may remove a level entirely; only compare when not.
    try {
      const auto s = summarize_design(dropped);
      if (s.t != base.t || s.b != base.b) continue;
      EXPECT_EQ(s.n, base.n - 1);
      int changed = 0;
      for (int i = 0; i < s.t; ++i)
        for (int j = 0; j < s.b; ++j) {
          const int delta = base.cell_counts[i][j] - s.cell_counts[i][j];
          EXPECT_TRUE(delta == 0 || delta == 1);
          changed += delta;
        }
      EXPECT_EQ(changed, 1);
    } catch (const DesignError&) {
    }
  }
}

TEST(ValidateGrbd, AllCellsFivePasses) {
  const auto v = validate_grbd(summarize_design(uniform_design(3, 4, 5)));
  EXPECT_TRUE(v.overall);
  for (const auto& c : v.checks) EXPECT_EQ(c.severity, Severity::ok) << c.name;
}

TEST(ValidateGrbd, SingleReplicateFailsGenuineReplication) {
  auto rows = uniform_design(2, 2, 2).observations();
  rows[0].excluded = true;
  const auto v = validate_grbd(summarize_design(Dataset("x", rows)));
  EXPECT_FALSE(v.overall);
  const auto* c = v.find(check_name::genuine_replication);
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->passed());
  EXPECT_NE(c->message.find("interaction is untestable"), std::string::npos);
  EXPECT_TRUE(v.find(check_name::crossed)->passed());
}

TEST(ValidateGrbd, UnbalancedButCrossedWarnsOnly) {
  // Thin a balanced 2x3 design with 80 per cell down to 70-80 per cell.
  std::mt19937_64 gen(5);
  auto rows = uniform_design(2, 3, 80).observations();
  std::uniform_int_distribution<int> drop(0, 10);
  std::map<std::pair<std::string, std::string>, int> to_drop;
  for (const auto& o : rows) to_drop.emplace(std::make_pair(o.treatment, o.batch), drop(gen));
  for (auto& o : rows) {
    auto& left = to_drop[{o.treatment, o.batch}];
    if (left > 0) {
      o.excluded = true;
      --left;
    }
  }
  const auto s = summarize_design(Dataset("thinned", rows));
  ASSERT_FALSE(s.balanced);
  EXPECT_GE(s.min_cell_count(), 70);
  const auto v = validate_grbd(s);
  EXPECT_TRUE(v.overall);
  EXPECT_EQ(v.find(check_name::balance)->severity, Severity::warning);
}

TEST(ValidateGrbd, OverallIsConjunction) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = oracle::random_dataset(gen, 2, 3, 0, 3);
    DesignSummary s;
    try {
      s = summarize_design(d);
    } catch (const DesignError&) {
      continue;
    }
    const auto v = validate_grbd(s);
    bool all = true;
    for (const auto& c : v.checks) all = all && c.passed();
    EXPECT_EQ(v.overall, all);
    if (v.overall) {
      EXPECT_NO_THROW({
        try {
          grbd_anova(d);
        } catch (const DegenerateDataError&) {
        }
      });
    }
  }
}

TEST(ClassifyReplication, PaperExamples) {
  const auto a = classify_replication(Independence::full, Timing::sequential);
  EXPECT_EQ(a.figure_panel, 'A');
  EXPECT_EQ(a.label, "independent sequential");
  const auto c = classify_replication(Independence::full, Timing::parallel);
  EXPECT_EQ(c.figure_panel, 'C');
  EXPECT_EQ(c.label, "independent parallel");
  const auto d = classify_replication(Independence::partial, Timing::parallel);
  EXPECT_EQ(d.figure_panel, 'D');
  EXPECT_EQ(d.label, "partially independent parallel");
}

TEST(ClassifyReplication, BijectionOverSixClasses) {
  std::set<char> panels;
  std::set<std::string> labels;
  for (auto i : {Independence::full, Independence::partial})
    for (auto t : {Timing::sequential, Timing::staggered, Timing::parallel}) {
      const auto c = classify_replication(i, t);
      panels.insert(c.figure_panel);
      labels.insert(c.label);
      EXPECT_EQ(c.independence, i);
      EXPECT_EQ(c.timing, t);
    }
  EXPECT_EQ(panels, (std::set<char>{'A', 'B', 'C', 'D', 'E', 'F'}));
  EXPECT_EQ(labels.size(), 6u);
}

TEST(ClassifyReplication, ParsesNames) {
  EXPECT_EQ(parse_independence("partial"), Independence::partial);
  EXPECT_EQ(parse_timing("staggered"), Timing::staggered);
  EXPECT_THROW(parse_timing("weekly"), ConfigError);
  EXPECT_THROW(parse_independence("none"), ConfigError);
}
