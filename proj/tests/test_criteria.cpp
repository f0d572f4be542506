#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <set>

#include "hgb/criteria.hpp"
#include "json.hpp"

using namespace hgb;

namespace {

std::vector<Rat> rats(const char* text) { return parse_rat_list(text); }

ExponentData sys(const char* a, const char* b) { return ExponentData(rats(a), rats(b)); }

/// Multisets of size k drawn from vals, in nondecreasing order.
void multisets(const std::vector<Rat>& vals, std::size_t k, std::size_t start, std::vector<Rat>& cur,
               const std::function<void(const std::vector<Rat>&)>& emit) {
  if (cur.size() == k) {
    emit(cur);
    return;
  }
  for (std::size_t i = start; i < vals.size(); ++i) {
    cur.push_back(vals[i]);
    multisets(vals, k, i, cur, emit);
    cur.pop_back();
  }
}

/// Every system with conductor at most max_c and n + m at most max_total.
std::vector<ExponentData> enumerate(long max_c, std::size_t max_total) {
  std::vector<ExponentData> out;
  for (long c = 1; c <= max_c; ++c) {
    std::vector<Rat> vals;
    for (long k = 0; k < c; ++k) vals.push_back(make_rat(k, c));
    for (std::size_t n = 0; n <= max_total; ++n)
      for (std::size_t m = 0; n + m <= max_total; ++m) {
        if (n + m == 0) continue;
        std::vector<Rat> a, b;
        multisets(vals, n, 0, a, [&](const std::vector<Rat>& aa) {
          multisets(vals, m, 0, b, [&](const std::vector<Rat>& bb) {
            ExponentData e(aa, bb);
            if (e.conductor() == c) out.push_back(e);
          });
        });
      }
  }
  return out;
}

/// Independent stabilizer: counts every value's multiplicity before and after g.
std::vector<long> brute_stabilizer(const ExponentData& e) {
  const long c = e.conductor();
  auto counts = [&](const std::vector<Rat>& xs, long g) {
    std::map<long, int> h;
    for (const auto& x : xs) {
      const long k = to_long(Rat(x * Rat(c)).get_num());
      h[((g * k) % c + c) % c]++;
    }
    return h;
  };
  std::vector<long> out;
  for (long g = 1; g <= std::max(c, 1L); ++g) {
    if (c > 2 && std::gcd(g, c) != 1) continue;
    if (c <= 2 && g != 1) continue;
    if (counts(e.alpha(), g) == counts(e.alpha(), 1) && counts(e.beta(), g) == counts(e.beta(), 1)) out.push_back(g);
  }
  return out;
}

}  // namespace

TEST(Goodness, DocumentedSubgroups) {
  EXPECT_TRUE(is_g_good(sys("1/5,2/5,3/5,4/5", "0"), GaloisSubgroup::full(5)));
  EXPECT_TRUE(max_good_subgroup(sys("1/3,2/3", "0,1/2")).is_full());
  EXPECT_EQ(max_good_subgroup(sys("1/5", "0")).order(), 1u);
  EXPECT_EQ(max_good_subgroup(sys("1/7,2/7,4/7", "0,0,0")).elements(), (std::vector<long>{1, 2, 4}));
  EXPECT_THROW(is_g_good(sys("1/5", "0"), GaloisSubgroup::full(3)), Error);
}

TEST(Goodness, MaxGoodSubgroupMatchesBruteForce) {
  const auto systems = enumerate(6, 4);
  EXPECT_GT(systems.size(), 2000u);
  for (const auto& e : systems) {
    const auto G = max_good_subgroup(e);
    ASSERT_EQ(G.elements(), brute_stabilizer(e)) << to_string(e.alpha()) << to_string(e.beta());
    for (long g : G.elements())
      for (long h : G.elements()) EXPECT_TRUE(G.contains(mul_mod(g, h, G.conductor())));
  }
}

TEST(Goodness, LargeConductorsMatchBruteForce) {
  const char* cases[][2] = {{"1/60,7/60,11/60", "1/2"}, {"1/12,5/12,7/12,11/12", "1/5,2/5,3/5,4/5"},
                            {"1/9,4/9,7/9", "0,1/3"},     {"1/59", ""}};
  for (auto& c : cases) {
    ExponentData e = sys(c[0], c[1]);
    EXPECT_EQ(max_good_subgroup(e).elements(), brute_stabilizer(e)) << c[0];
  }
}

TEST(RealStructure, EquivalentToConjugationInMaxGoodSubgroup) {
  std::size_t checked = 0;
  for (const auto& e : enumerate(8, 3)) {
    if (!is_irreducible(e)) {
      EXPECT_THROW(real_structure_test(e), Error);
      continue;
    }
    const long c = e.conductor();
    const bool expected = c <= 2 || max_good_subgroup(e).contains(c - 1);
    ASSERT_EQ(real_structure_test(e), expected) << to_string(e.alpha()) << to_string(e.beta());
    ++checked;
  }
  EXPECT_GT(checked, 1000u);
}

TEST(RealStructure, DocumentedCases) {
  EXPECT_TRUE(real_structure_test(sys("0,1/3,2/3", "1/2")));
  EXPECT_TRUE(real_structure_test(sys("0,1/2", "")));
  EXPECT_TRUE(real_structure_test(sys("1/5,4/5", "0,1/2")));
  EXPECT_FALSE(real_structure_test(sys("1/5", "0")));
}

TEST(RationalStructure, OrbitDecomposition) {
  auto [ok, phi] = rational_structure_test(sys("1/5,2/5,3/5,4/5,1/2", "0,1/3,2/3"));
  ASSERT_TRUE(ok);
  EXPECT_EQ(phi->r_list, (std::vector<long>{2, 5}));
  EXPECT_EQ(phi->s_list, (std::vector<long>{3}));
  auto [no, none] = rational_structure_test(sys("1/5,4/5", "0"));
  EXPECT_FALSE(no);
  EXPECT_FALSE(none.has_value());
}

TEST(RationalStructure, DegreeSumsMatchNonzeroCounts) {
  for (const auto& e : enumerate(8, 3)) {
    auto [ok, phi] = rational_structure_test(e);
    if (!ok) continue;
    long sa = 0, sb = 0;
    for (long r : phi->r_list) sa += euler_phi(r);
    for (long s : phi->s_list) sb += euler_phi(s);
    EXPECT_EQ(sa, static_cast<long>(e.n() - e.s()));
    EXPECT_EQ(sb, static_cast<long>(e.m() - e.r()));
  }
}

TEST(WeightedProjective, DocumentedDecompositions) {
  EXPECT_EQ(weighted_projective_decomposition(sys("1/2,1/3,2/3", ""))->w, (std::vector<long>{3, 2}));
  EXPECT_EQ(weighted_projective_decomposition(sys("1/2,1/2", ""))->w, (std::vector<long>{2, 2}));
  EXPECT_EQ(weighted_projective_decomposition(sys("0,1/4,1/2,3/4", "0"))->w, (std::vector<long>{4}));
  EXPECT_FALSE(weighted_projective_decomposition(sys("1/4,3/4", "")).has_value());
}

TEST(WeightedProjective, GreedyMatchesExhaustiveSearch) {
  std::size_t checked = 0;
  std::function<void(std::vector<long>&, long, long)> rec = [&](std::vector<long>& ws, long max_w, long budget) {
    if (!ws.empty()) {
      std::vector<Rat> xs;
      for (long w : ws)
        for (long d = 1; d < w; ++d) xs.push_back(make_rat(d, w));
      auto got = weighted_projective_decomposition(ExponentData(xs, {}));
      ASSERT_TRUE(got.has_value());
      std::vector<long> want = ws;
      std::sort(want.rbegin(), want.rend());
      EXPECT_EQ(got->w, want);
      EXPECT_EQ(static_cast<long>(xs.size()), [&] {
        long s = 0;
        for (long w : got->w) s += w - 1;
        return s;
      }());
      ++checked;
    }
    for (long w = 2; w <= max_w && w - 1 <= budget; ++w) {
      ws.push_back(w);
      rec(ws, w, budget - (w - 1));
      ws.pop_back();
    }
  };
  std::vector<long> ws;
  rec(ws, 12, 14);
  EXPECT_GT(checked, 100u);
}

TEST(Laurent, ModelShapeAndInvariance) {
  ExponentData e = sys("1/3,2/3", "0,1/2");
  LaurentModel lm = laurent_model(e);
  EXPECT_EQ(lm.block_beta, 1u);
  EXPECT_EQ(lm.block_alpha, 2u);
  EXPECT_EQ(lm.exponents.size(), 4u);
  EXPECT_TRUE(laurent_invariance_check(e, max_good_subgroup(e)));
  EXPECT_THROW(laurent_invariance_check(sys("1/5", "0"), GaloisSubgroup::full(5)), Error);
}

TEST(Laurent, InvariantUnderEveryGoodSubgroup) {
  for (const auto& e : enumerate(6, 4)) EXPECT_TRUE(laurent_invariance_check(e, max_good_subgroup(e)));
}

TEST(Report, FixedFieldDegreeAndOrbitSum) {
  ExponentData e = sys("1/7,2/7,4/7", "0,0,0");
  CriteriaReport r = criteria_report(e);
  EXPECT_EQ(r.fixed_field_degree, 2);
  EXPECT_FALSE(r.real_structure);
  EXPECT_FALSE(r.rational_structure);
  EXPECT_TRUE(is_fixed_by(r.orbit_sum_element, r.g_max));
  EXPECT_FALSE(r.orbit_sum_element.is_rational());
}

TEST(Report, ReducibleSystemsAreFlagged) {
  CriteriaReport r = criteria_report(sys("1/2", "1/2"));
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("reducible"), std::string::npos);
}

TEST(Fixtures, RationalFixturesSatisfyCriterion) {
  std::ifstream in(std::string(HGB_TEST_DATA) + "/rational_fixtures.ndjson");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ExponentData e(parse_rat_list(j["alpha"].get<std::string>()), parse_rat_list(j["beta"].get<std::string>()));
    CriteriaReport r = criteria_report(e);
    EXPECT_TRUE(r.rational_structure) << line;
    EXPECT_EQ(r.fixed_field_degree, 1) << line;
    if (j["weights"].is_null()) {
      EXPECT_FALSE(r.weights.has_value()) << line;
    } else {
      ASSERT_TRUE(r.weights.has_value()) << line;
      EXPECT_EQ(r.weights->w, j["weights"][0].get<std::vector<long>>()) << line;
      EXPECT_EQ(r.weights->v, j["weights"][1].get<std::vector<long>>()) << line;
    }
    ++count;
  }
  EXPECT_EQ(count, 20u);
}
