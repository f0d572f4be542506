#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "hgb/criteria.hpp"
#include "hgb/monodromy.hpp"
#include "json.hpp"

using namespace hgb;

namespace {

ExponentData sys(const char* a, const char* b) { return ExponentData(parse_rat_list(a), parse_rat_list(b)); }

CycMatrix identity(const MonodromyRep& rep) { return CycMatrix::identity(rep.rank, CycNum::one(rep.conductor)); }

/// prod (t - exp(2 pi i x)) over Q(zeta_c), ascending, computed from scratch.
std::vector<CycNum> expected_charpoly(const std::vector<Rat>& xs, long c, bool inverse_roots) {
  std::vector<CycNum> p{CycNum::one(c)};
  for (const auto& x : xs) {
    long k = to_long(Rat(x * Rat(c)).get_num());
    if (inverse_roots) k = (c - k) % c;
    std::vector<CycNum> next(p.size() + 1, CycNum::zero(c));
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i + 1] += p[i];
      next[i] -= CycNum::zeta(c, k) * p[i];
    }
    p = next;
  }
  return p;
}

bool all_rational(const MonodromyRep& rep) {
  for (const auto* m : rep.matrices())
    for (const auto& x : m->data())
      if (!x.is_rational()) return false;
  return true;
}

}  // namespace

TEST(Levelt, RankOneHandComputed) {
  MonodromyRep rep = levelt_build(sys("1/2", "0"));
  ASSERT_EQ(rep.rank, 1u);
  EXPECT_EQ(rep.Minf(0, 0), CycNum::rational(2, Rat(-1)));
  EXPECT_EQ(rep.M0(0, 0), CycNum::one(2));
  EXPECT_EQ(rep.M1(0, 0), CycNum::rational(2, Rat(-1)));
}

TEST(Levelt, RequiresRegularIrreducibleSystem) {
  EXPECT_THROW(levelt_build(sys("0,1/2", "")), Error);
  EXPECT_THROW(levelt_build(sys("1/2", "1/2")), Error);
}

TEST(Levelt, LocalMonodromiesAndProductRelation) {
  const char* cases[][2] = {{"1/5,4/5", "0,1/2"}, {"1/7,2/7,4/7", "0,0,0"}, {"1/3,2/3", "1/4,3/4"},
                            {"1/12,5/12,7/12", "0,1/3,1/2"}};
  for (auto& cs : cases) {
    ExponentData e = sys(cs[0], cs[1]);
    MonodromyRep rep = levelt_build(e);
    const CycNum one = CycNum::one(rep.conductor);
    EXPECT_EQ(rep.M0 * rep.M1 * rep.Minf, identity(rep)) << cs[0];
    EXPECT_EQ(charpoly(rep.Minf, one), expected_charpoly(e.alpha(), e.conductor(), false)) << cs[0];
    EXPECT_EQ(charpoly(rep.M0, one), expected_charpoly(e.beta(), e.conductor(), true)) << cs[0];
    EXPECT_EQ(rank(rep.M1 - identity(rep)), 1u) << cs[0];
    EXPECT_TRUE(is_irreducible_rep(rep)) << cs[0];
  }
}

TEST(Levelt, GaloisConjugateIsLeveltOfActedExponents) {
  ExponentData e = sys("1/5,2/5", "0,1/2");
  for (long g : unit_residues(e.conductor())) {
    MonodromyRep conj = conjugate_rep(levelt_build(e), g);
    ExponentData acted(act(g, e.alpha()), act(g, e.beta()));
    EXPECT_EQ(conj.Minf, levelt_build(acted).Minf) << "g=" << g;
    EXPECT_EQ(conj.M0, levelt_build(acted).M0) << "g=" << g;
  }
}

TEST(Levelt, RationalCriterionGivesRationalMatrices) {
  std::ifstream in(std::string(HGB_TEST_DATA) + "/rational_fixtures.ndjson");
  ASSERT_TRUE(in);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ExponentData e(parse_rat_list(j["alpha"].get<std::string>()), parse_rat_list(j["beta"].get<std::string>()));
    ASSERT_TRUE(rational_structure_test(e).first) << line;
    EXPECT_TRUE(all_rational(levelt_build(e))) << line;
  }
}

TEST(Levelt, NonRationalSystemHasIrrationalEntries) {
  EXPECT_FALSE(all_rational(levelt_build(sys("1/5,2/5", "0,1/2"))));
}

TEST(Intertwiner, ExistsExactlyForGoodElements) {
  ExponentData e = sys("1/5,4/5", "0,1/2");
  MonodromyRep rep = levelt_build(e);
  const GaloisSubgroup G = max_good_subgroup(e);
  for (long g : unit_residues(e.conductor())) {
    if (G.contains(g)) {
      CycMatrix t = find_intertwiner(rep, g);
      EXPECT_EQ(t * galois_apply(g, rep.M0), rep.M0 * t);
      EXPECT_EQ(t * galois_apply(g, rep.Minf), rep.Minf * t);
      EXPECT_EQ(t * galois_apply(g, rep.M1), rep.M1 * t);
    } else {
      EXPECT_THROW(find_intertwiner(rep, g), Error) << "g=" << g;
    }
  }
}

TEST(Descent, LeveltModelDescendsToFixedField) {
  const char* cases[][2] = {{"1/5,4/5", "0,1/2"}, {"1/7,2/7,4/7", "0,0,0"}, {"1/8,3/8", "0,1/2"}};
  for (auto& cs : cases) {
    ExponentData e = sys(cs[0], cs[1]);
    MonodromyRep rep = levelt_build(e);
    DescentCertificate cert = descend(rep, max_good_subgroup(e));
    EXPECT_TRUE(verify_K_model(cert, rep)) << cs[0];
    for (const auto* m : cert.model.matrices()) EXPECT_TRUE(is_fixed_by(*m, cert.G)) << cs[0];
  }
}

TEST(Descent, RecoversScrambledModels) {
  std::mt19937_64 rng(2024);
  const char* cases[][2] = {{"1/5,4/5", "0,1/2"}, {"1/3,2/3", "1/4,3/4"}, {"1/7,2/7,4/7", "0,0,0"}};
  for (auto& cs : cases) {
    ExponentData e = sys(cs[0], cs[1]);
    MonodromyRep base = levelt_build(e);
    const GaloisSubgroup G = max_good_subgroup(e);
    for (int trial = 0; trial < 3; ++trial) {
      MonodromyRep scrambled = change_basis(base, random_invertible(base.rank, base.conductor, rng));
      DescentCertificate cert = descend(scrambled, G);
      ASSERT_TRUE(verify_K_model(cert, scrambled)) << cs[0] << " trial " << trial;
      EXPECT_EQ(cert.fixed_field_degree * static_cast<long>(G.order()), euler_phi(e.conductor()));
      const CycNum one = CycNum::one(base.conductor);
      EXPECT_EQ(charpoly(cert.model.Minf, one), charpoly(base.Minf, one));
    }
  }
}

TEST(Descent, TrivialSubgroupReturnsIdentity) {
  MonodromyRep rep = levelt_build(sys("1/5", "0"));
  DescentCertificate cert = descend(rep, GaloisSubgroup::trivial(5));
  EXPECT_EQ(cert.method, "trivial subgroup");
  EXPECT_EQ(cert.S, identity(rep));
}

TEST(Descent, BadSubgroupIsRejected) {
  MonodromyRep rep = levelt_build(sys("1/5", "0"));
  EXPECT_THROW(descend(rep, GaloisSubgroup::full(5)), Error);
  try {
    descend(rep, GaloisSubgroup::full(5));
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NoIsomorphism);
  }
}

TEST(Descent, ReducibleRepresentationIsRejected) {
  MonodromyRep rep;
  rep.rank = 2;
  rep.conductor = 1;
  rep.M0 = CycMatrix::identity(2, CycNum::one(1));
  rep.M1 = rep.M0;
  rep.Minf = rep.M0;
  EXPECT_FALSE(is_irreducible_rep(rep));
  EXPECT_THROW(descend(rep, GaloisSubgroup::trivial(1)), Error);
}
