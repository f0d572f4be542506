#include <gtest/gtest.h>

#include "hgb/criteria.hpp"
#include "hgb/monodromy.hpp"
#include "hgb/perverse.hpp"

using namespace hgb;

namespace {

ExponentData sys(const char* a, const char* b) { return ExponentData(parse_rat_list(a), parse_rat_list(b)); }

CycMatrix id(std::size_t n, long c) { return CycMatrix::identity(n, CycNum::one(c)); }

const ExtensionKind kKinds[] = {ExtensionKind::Shriek, ExtensionKind::Star, ExtensionKind::Middle};

}  // namespace

TEST(Diagram, ExtensionsSatisfyAxiomsAndRecoverMonodromy) {
  const char* cases[][2] = {{"1/5,4/5", "0,1/2"}, {"1/7,2/7,4/7", "0,0,0"}, {"1/3,2/3", "1/4,3/4"}};
  for (auto& cs : cases) {
    MonodromyRep rep = levelt_build(sys(cs[0], cs[1]));
    for (const auto* t : rep.matrices())
      for (auto kind : kKinds) {
        GlueDiagram d = from_monodromy(*t, {kind, 0});
        ASSERT_TRUE(satisfies_axioms(d)) << cs[0] << " " << to_string(kind);
        EXPECT_EQ(monodromy_of(d).first, *t) << cs[0] << " " << to_string(kind);
      }
  }
}

TEST(Diagram, MiddleExtensionDimensionIsRankOfTMinusOne) {
  MonodromyRep rep = levelt_build(sys("1/7,2/7,4/7", "0,0,0"));
  for (const auto* t : rep.matrices()) {
    GlueDiagram d = from_monodromy(*t, {ExtensionKind::Middle, 0});
    EXPECT_EQ(d.dim_F, rank(*t - id(rep.rank, rep.conductor)));
  }
  GlueDiagram m1 = from_monodromy(rep.M1, {ExtensionKind::Middle, 0});
  EXPECT_EQ(m1.dim_F, 1u);
  EXPECT_EQ(from_monodromy(id(3, 7), {ExtensionKind::Middle, 0}).dim_F, 0u);
}

TEST(Diagram, ShriekToStarIsAMorphism) {
  MonodromyRep rep = levelt_build(sys("1/5,4/5", "0,1/2"));
  const CycMatrix one = id(2, rep.conductor);
  GlueDiagram shriek = from_monodromy(rep.Minf, {ExtensionKind::Shriek, 0});
  GlueDiagram star = from_monodromy(rep.Minf, {ExtensionKind::Star, 0});
  EXPECT_TRUE(is_morphism({one, rep.Minf - one}, shriek, star));
  EXPECT_TRUE(is_morphism({one, one}, shriek, shriek));
  EXPECT_FALSE(is_morphism({one, one}, shriek, star));
}

TEST(Diagram, SkyscraperAndDirectSum) {
  GlueDiagram sky = skyscraper(2, 5);
  EXPECT_TRUE(satisfies_axioms(sky));
  EXPECT_EQ(sky.dim_E, 0u);
  MonodromyRep rep = levelt_build(sys("1/5,4/5", "0,1/2"));
  GlueDiagram sum = direct_sum(from_monodromy(rep.M0, {ExtensionKind::Middle, 0}), skyscraper(2, rep.conductor));
  EXPECT_TRUE(satisfies_axioms(sum));
  EXPECT_EQ(sum.dim_F, rank(rep.M0 - id(2, rep.conductor)) + 2);
  EXPECT_THROW(direct_sum(sky, skyscraper(1, 7)), Error);
}

TEST(Diagram, SingularMonodromyIsRejected) {
  CycMatrix t(2, 2, CycNum::zero(3));
  t(0, 0) = CycNum::one(3);
  EXPECT_THROW(from_monodromy(t, {ExtensionKind::Middle, 0}), Error);
  GlueDiagram bad{3, 1, 1, CycMatrix(1, 1, CycNum::one(3)), CycMatrix(1, 1, CycNum::rational(3, Rat(-1)))};
  EXPECT_FALSE(satisfies_axioms(bad));
}

TEST(Frobenius, FormIsSimilarAndInvariantFactorsDivide) {
  MonodromyRep rep = levelt_build(sys("1/7,2/7,4/7", "0,0,0"));
  const CycNum one = CycNum::one(rep.conductor);
  for (const auto* t : rep.matrices()) {
    FrobeniusForm f = frobenius_form(*t);
    EXPECT_EQ(inverse(f.transform, one) * *t * f.transform, f.form);
    EXPECT_EQ(charpoly(f.form, one), charpoly(*t, one));
  }
  FrobeniusForm scalar = frobenius_form(id(3, 1));
  EXPECT_EQ(scalar.invariant_factors.size(), 3u);
  FrobeniusForm m0 = frobenius_form(rep.M0);
  EXPECT_EQ(m0.invariant_factors.size(), 1u);
}

TEST(Frobenius, FormIsACompleteSimilarityInvariant) {
  std::mt19937_64 rng(17);
  MonodromyRep rep = levelt_build(sys("1/5,4/5", "0,1/2"));
  for (const auto* t : rep.matrices()) {
    CycMatrix p = random_invertible(2, rep.conductor, rng);
    CycMatrix conj = inverse(p, CycNum::one(rep.conductor)) * *t * p;
    EXPECT_EQ(frobenius_form(conj).form, frobenius_form(*t).form);
  }
}

TEST(KStructure, GoodSubgroupGivesFixedBases) {
  const char* cases[][2] = {{"1/5,4/5", "0,1/2"}, {"1/7,2/7,4/7", "0,0,0"}, {"1/3,2/3", "1/4,3/4"}};
  for (auto& cs : cases) {
    ExponentData e = sys(cs[0], cs[1]);
    MonodromyRep rep = levelt_build(e);
    const GaloisSubgroup G = max_good_subgroup(e);
    for (const auto* t : rep.matrices())
      for (auto kind : kKinds) {
        GlueDiagram d = from_monodromy(*t, {kind, 0});
        KStructureResult r = has_K_structure(d, G);
        ASSERT_TRUE(r.exists) << cs[0] << " " << to_string(kind) << " " << r.method;
        GlueDiagram moved = change_bases(d, *r.basis_E, *r.basis_F);
        EXPECT_TRUE(is_fixed_by(moved.can, G)) << cs[0] << " " << to_string(kind);
        EXPECT_TRUE(is_fixed_by(moved.var, G)) << cs[0] << " " << to_string(kind);
      }
  }
}

TEST(KStructure, NonGoodSubgroupHasNoStructure) {
  MonodromyRep rep = levelt_build(sys("1/5", "0"));
  GlueDiagram d = from_monodromy(rep.Minf, {ExtensionKind::Shriek, 0});
  EXPECT_FALSE(has_K_structure(d, GaloisSubgroup::full(5)).exists);
  EXPECT_TRUE(has_K_structure(d, GaloisSubgroup::trivial(5)).exists);
}

TEST(KStructure, SkyscraperAlwaysDescends) {
  KStructureResult r = has_K_structure(skyscraper(3, 5), GaloisSubgroup::full(5));
  EXPECT_TRUE(r.exists);
  EXPECT_EQ(r.method, "skyscraper");
}

TEST(KStructure, UnsupportedShapeIsObstructed) {
  const long c = 5;
  GlueDiagram d{c, 2, 2, CycMatrix(2, 2, CycNum::zero(c)), CycMatrix(2, 2, CycNum::zero(c))};
  d.can(0, 0) = CycNum::zeta(c);
  d.var(1, 1) = CycNum::one(c);
  ASSERT_TRUE(satisfies_axioms(d));
  try {
    has_K_structure(d, GaloisSubgroup::full(c));
    FAIL() << "expected Obstructed";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::Obstructed);
  }
}
