#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "coriolis/study.hpp"

using namespace coriolis;
using namespace coriolis::study;

namespace {

std::vector<StudentRecord> roster_from(const std::vector<double>& gpas) {
  std::vector<StudentRecord> r;
  for (std::size_t i = 0; i < gpas.size(); ++i) r.push_back({"s" + std::to_string(i + 10), gpas[i], std::nullopt});
  return r;
}

std::vector<double> sorted_gpas(const std::vector<StudentRecord>& g) {
  std::vector<double> v;
  for (const auto& s : g) v.push_back(s.gpa);
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// Brute force over every labelling with equal group sizes.
double brute_force_optimum(const std::vector<double>& gpas, int k) {
  const std::size_t n = gpas.size();
  const std::size_t m = n / static_cast<std::size_t>(k);
  const GroupStats all = population_stats(gpas);
  std::vector<int> labels(n, 0);
  double best = 1e300;
  for (;;) {
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>(labels[i])].push_back(gpas[i]);
    if (std::all_of(groups.begin(), groups.end(), [&](const auto& g) { return g.size() == m; })) {
      double j = 0;
      for (const auto& g : groups) {
        const GroupStats s = population_stats(g);
        j += (s.mean - all.mean) * (s.mean - all.mean) + (s.variance - all.variance) * (s.variance - all.variance);
      }
      best = std::min(best, j);
    }
    std::size_t i = 0;
    while (i < n && ++labels[i] == k) labels[i++] = 0;
    if (i == n) break;
  }
  return best;
}

}  // namespace

TEST(Stats, PopulationVariance) {
  const std::vector<double> v{4.0, 3.4, 3.0, 2.8};
  const GroupStats s = population_stats(v);
  EXPECT_NEAR(s.mean, 3.3, 1e-15);
  EXPECT_NEAR(s.variance, 0.21, 1e-15);
}

TEST(PartitionCount, SmallCases) {
  EXPECT_EQ(partition_count(8, 2), 35.0);
  EXPECT_EQ(partition_count(12, 3), 5775.0);
  EXPECT_EQ(partition_count(6, 3), 15.0);
  EXPECT_GT(partition_count(24, 4), 1e6);
}

TEST(BalanceGroups, WorkedEightStudentInstance) {
  const auto roster = roster_from({4.0, 3.8, 3.6, 3.4, 3.2, 3.0, 2.8, 2.6});
  const GroupAssignment a = balance_groups(roster, 2);
  EXPECT_EQ(a.method, SearchMethod::exact);
  EXPECT_LT(a.objective, 1e-20);
  ASSERT_EQ(a.groups.size(), 2u);
  EXPECT_EQ(sorted_gpas(a.groups[0]), (std::vector<double>{4.0, 3.4, 3.0, 2.8}));
  EXPECT_EQ(sorted_gpas(a.groups[1]), (std::vector<double>{3.8, 3.6, 3.2, 2.6}));
  for (const auto& s : a.stats) {
    EXPECT_NEAR(s.mean, 3.3, 1e-12);
    EXPECT_NEAR(s.variance, 0.21, 1e-12);
  }
}

TEST(BalanceGroups, AllEqualGpas) {
  const GroupAssignment a = balance_groups(roster_from(std::vector<double>(9, 3.1)), 3);
  EXPECT_LT(a.objective, 1e-20);
  for (const auto& g : a.groups) EXPECT_EQ(g.size(), 3u);
}

TEST(BalanceGroups, ClassSizedRosterUsesHeuristic) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(2.0, 4.0);
  std::vector<double> gpas(24);
  for (double& g : gpas) g = std::round(u(rng) * 100) / 100;
  const auto roster = roster_from(gpas);
  const GroupAssignment a = balance_groups(roster, 4);
  EXPECT_EQ(a.method, SearchMethod::heuristic);
  ASSERT_EQ(a.groups.size(), 4u);
  std::set<std::string> ids;
  for (const auto& g : a.groups) {
    EXPECT_EQ(g.size(), 6u);
    for (const auto& s : g) ids.insert(s.id);
  }
  EXPECT_EQ(ids.size(), 24u);
  EXPECT_LT(a.objective, 1e-4);
  // Deterministic.
  const GroupAssignment b = balance_groups(roster, 4);
  EXPECT_EQ(a.objective, b.objective);
  for (std::size_t g = 0; g < 4; ++g) EXPECT_EQ(a.groups[g], b.groups[g]);
}

TEST(BalanceGroups, StoredStatsMatchRecompute) {
  const auto roster = roster_from({3.9, 2.1, 3.3, 2.7, 3.0, 3.6, 2.4, 3.1, 2.9});
  const GroupAssignment a = balance_groups(roster, 3);
  double j = 0;
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    std::vector<double> v;
    for (const auto& s : a.groups[g]) v.push_back(s.gpa);
    const GroupStats st = population_stats(v);
    EXPECT_NEAR(st.mean, a.stats[g].mean, 1e-12);
    EXPECT_NEAR(st.variance, a.stats[g].variance, 1e-12);
    j += std::pow(st.mean - a.overall.mean, 2) + std::pow(st.variance - a.overall.variance, 2);
  }
  EXPECT_NEAR(j, a.objective, 1e-12);
}

TEST(BalanceGroups, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 4.3);
  for (int trial = 0; trial < 10; ++trial) {
    for (int k : {2, 3}) {
      const std::size_t n = static_cast<std::size_t>(k) * (2 + rng() % 3);
      if (n > 12) continue;
      std::vector<double> gpas(n);
      for (double& g : gpas) g = u(rng);
      const GroupAssignment a = balance_groups(roster_from(gpas), k);
      EXPECT_NEAR(a.objective, brute_force_optimum(gpas, k), 1e-12) << "n=" << n << " k=" << k;
    }
  }
}

TEST(BalanceGroups, InvariantUnderOrderAndShift) {
  const std::vector<double> gpas{3.9, 2.1, 3.3, 2.7, 3.0, 3.6, 2.4, 3.1, 2.9, 3.4};
  const GroupAssignment base = balance_groups(roster_from(gpas), 2);

  auto reversed = roster_from(gpas);
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_NEAR(balance_groups(reversed, 2).objective, base.objective, 1e-14);

  auto shifted = roster_from(gpas);
  for (auto& s : shifted) s.gpa -= 0.5;
  const GroupAssignment sh = balance_groups(shifted, 2);
  EXPECT_NEAR(sh.objective, base.objective, 1e-12);
  std::set<std::string> a0, b0;
  for (const auto& s : base.groups[0]) a0.insert(s.id);
  for (const auto& s : sh.groups[0]) b0.insert(s.id);
  EXPECT_EQ(a0, b0);
}

TEST(BalanceGroups, HeuristicMatchesExactOnSmallRosters) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(1.5, 4.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> gpas(12);
    for (double& g : gpas) g = u(rng);
    BalanceOptions forced;
    forced.exact_limit = 0;
    const GroupAssignment h = balance_groups(roster_from(gpas), 3, forced);
    const GroupAssignment e = balance_groups(roster_from(gpas), 3);
    EXPECT_EQ(h.method, SearchMethod::heuristic);
    EXPECT_GE(h.objective, e.objective - 1e-15);
    EXPECT_NEAR(h.objective, e.objective, 1e-12);
  }
}

TEST(BalanceGroups, Errors) {
  try {
    balance_groups(roster_from({3, 3, 3}), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size);
  }
  try {
    balance_groups(roster_from({3, 3}), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
  }
  EXPECT_THROW(balance_groups(roster_from({3, 5.0}), 2), Error);
  std::vector<StudentRecord> dup{{"a", 3.0, {}}, {"a", 2.0, {}}};
  EXPECT_THROW(balance_groups(dup, 2), Error);
}

TEST(Scores, CombinedScore) {
  std::vector<StudentRecord> g{{"a", 3, 10.0}, {"b", 3, 10.0}, {"c", 3, 10.0}};
  EXPECT_EQ(combined_score(g), 30.0);
  EXPECT_EQ(mean_score(g), 10.0);
  std::vector<StudentRecord> six;
  for (double s : {70, 80, 90, 60, 75, 85}) six.push_back({"x" + std::to_string(six.size()), 3, s});
  EXPECT_EQ(combined_score(six), 460.0);
  try {
    combined_score(std::vector<StudentRecord>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incomplete_data);
  }
  std::vector<StudentRecord> missing{{"a", 3, 1.0}, {"who", 3, std::nullopt}};
  try {
    combined_score(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("who"), std::string::npos);
  }
}

TEST(Scores, PairDelta) {
  EXPECT_EQ(pair_delta(240, 276), 15.0);
  EXPECT_EQ(pair_delta(300, 300), 0.0);
  EXPECT_EQ(pair_delta(200, 220), 10.0);
  try {
    pair_delta(0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_delta);
  }
}

TEST(Scores, ScalingLeavesDeltaUnchanged) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<StudentRecord> a, b;
    for (int j = 0; j < 4; ++j) {
      a.push_back({"a" + std::to_string(j), 3, u(rng)});
      b.push_back({"b" + std::to_string(j), 3, u(rng)});
    }
    const double lambda = u(rng) / 10.0;
    auto scaled = [&](std::vector<StudentRecord> g) {
      for (auto& s : g) *s.quiz_score *= lambda;
      return g;
    };
    EXPECT_NEAR(combined_score(scaled(a)), lambda * combined_score(a), 1e-9 * lambda * combined_score(a));
    EXPECT_NEAR(pair_delta(combined_score(scaled(a)), combined_score(scaled(b))),
                pair_delta(combined_score(a), combined_score(b)), 1e-9);
    EXPECT_EQ(pair_delta(combined_score(a), combined_score(a)), 0.0);
  }
}

TEST(Report, ClassroomPairsInTableOrder) {
  GroupAssignment a;
  for (int g = 0; g < 4; ++g) {
    a.groups.push_back({{"g" + std::to_string(g), 3.0, 50.0 + g}});
    a.stats.push_back({3.0, 0.0});
  }
  const auto pairs = classroom_pairs();
  const Report r = report(a, pairs);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[0].pair_id, "G1-G4");
  EXPECT_EQ(r.rows[1].pair_id, "G2-G3");
  EXPECT_EQ(r.rows[2].pair_id, "G3-G4");
  EXPECT_EQ(r.rows[3].pair_id, "G1-G3");
  EXPECT_EQ(r.rows[1].independent_variable, "Haptic component");

  const Report empty = report(a, std::vector<PairSpec>{});
  EXPECT_TRUE(empty.rows.empty());
  EXPECT_EQ(to_csv(empty), "pair_id,control,experimental,independent_variable,dependent_variable,delta_percent\n");
}

TEST(Report, DanglingReference) {
  GroupAssignment a;
  a.groups.push_back({{"x", 3.0, 1.0}});
  a.groups.push_back({{"y", 3.0, 1.0}});
  a.stats.assign(2, {});
  const std::vector<PairSpec> pairs{{"P", 1, 5, "nothing"}};
  try {
    report(a, pairs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::reference);
  }
}

TEST(Report, TextTableLayout) {
  GroupAssignment a;
  a.groups = {{{"a", 3.0, 200.0}}, {{"b", 3.0, 230.0}}};
  a.stats.assign(2, {3.0, 0.0});
  const std::vector<PairSpec> pairs{{"G1-G2", 1, 2, "Haptics"}};
  const std::string text = to_text(report(a, pairs));
  EXPECT_NE(text.find("Pair ID  Control group  Experimental group"), std::string::npos);
  EXPECT_NE(text.find("+15.0"), std::string::npos);
  EXPECT_NE(to_csv(report(a, pairs)).find("G1-G2,Group 1,Group 2,Haptics,Quiz Score,15\n"), std::string::npos);
}

TEST(Parsing, RosterAndPairs) {
  std::istringstream roster("id,gpa,quiz_score\nann,3.5,80\nbob, 2.9 ,\ncy,3.1,70.5\n");
  const auto r = parse_roster(roster);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].id, "bob");
  EXPECT_EQ(r[1].gpa, 2.9);
  EXPECT_FALSE(r[1].quiz_score);
  EXPECT_EQ(*r[2].quiz_score, 70.5);

  std::istringstream bad("ann,three\n");
  EXPECT_THROW(parse_roster(bad), Error);

  std::istringstream pairs("G1-G4,Group 1,Group 4,Trials and visuo-haptic simulation\nG2-G3,G2,3,Haptic component\n");
  const auto p = parse_pairs(pairs);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].experimental, 4);
  EXPECT_EQ(p[1].control, 2);
  EXPECT_EQ(p[1].experimental, 3);

  std::istringstream same("X,1,1,none\n");
  EXPECT_THROW(parse_pairs(same), Error);
}
