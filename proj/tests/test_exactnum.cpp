#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "hgb/cyclotomic.hpp"
#include "hgb/linalg.hpp"
#include "hgb/rational.hpp"

using namespace hgb;

namespace {

CycNum random_cyc(long c, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  std::vector<Rat> coeffs(static_cast<std::size_t>(c));
  for (auto& x : coeffs) x = make_rat(num(rng), den(rng));
  return CycNum::from_coeffs(c, coeffs);
}

std::complex<double> embed(const CycNum& x) { return to_std(embed_complex(x, 64)); }

}  // namespace

TEST(Rational, ParsesFractionsAndRejectsFloats) {
  EXPECT_EQ(parse_rat("3/4"), make_rat(3, 4));
  EXPECT_EQ(parse_rat(" -2/6 "), make_rat(-1, 3));
  EXPECT_EQ(parse_rat("5"), Rat(5));
  EXPECT_THROW(parse_rat("0.5"), Error);
  EXPECT_THROW(parse_rat("1/0"), Error);
  EXPECT_THROW(parse_rat("a/b"), Error);
  EXPECT_EQ(parse_rat("07/08"), make_rat(7, 8));
  EXPECT_EQ(parse_decimal("0.25"), make_rat(1, 4));
  EXPECT_EQ(parse_decimal("-1.0625"), make_rat(-17, 16));
  const auto xs = parse_rat_list("1/3, 2/3,0");
  ASSERT_EQ(xs.size(), 3u);
  EXPECT_EQ(xs[1], make_rat(2, 3));
  EXPECT_TRUE(parse_rat_list("").empty());
}

TEST(Rational, FractionalPartLandsInUnitInterval) {
  EXPECT_EQ(frac(make_rat(7, 3)), make_rat(1, 3));
  EXPECT_EQ(frac(make_rat(-1, 4)), make_rat(3, 4));
  EXPECT_EQ(frac(Rat(-2)), Rat(0));
  EXPECT_EQ(euler_phi(1), 1);
  EXPECT_EQ(euler_phi(12), 4);
  EXPECT_EQ(euler_phi(105), 48);
}

TEST(Cyclotomic, KnownPolynomials) {
  auto as_long = [](const IntPoly& p) {
    std::vector<long> out;
    for (const auto& x : p) out.push_back(to_long(x));
    return out;
  };
  EXPECT_EQ(as_long(cyclotomic_poly(1)), (std::vector<long>{-1, 1}));
  EXPECT_EQ(as_long(cyclotomic_poly(2)), (std::vector<long>{1, 1}));
  EXPECT_EQ(as_long(cyclotomic_poly(12)), (std::vector<long>{1, 0, -1, 0, 1}));
  const auto p105 = as_long(cyclotomic_poly(105));
  ASSERT_EQ(p105.size(), 49u);
  EXPECT_EQ(p105[7], -2);
  EXPECT_EQ(p105[41], -2);
}

TEST(Cyclotomic, PolynomialMatchesNumericProduct) {
  PrecisionGuard guard(128);
  for (long c = 1; c <= 60; ++c) {
    const auto phi = cyclotomic_poly(c);
    std::vector<Complex> prod{Complex(Real(1))};
    for (long k : unit_residues(c)) {
      const Complex z = unit_root(make_rat(k, c));
      std::vector<Complex> next(prod.size() + 1);
      for (std::size_t i = 0; i < prod.size(); ++i) {
        next[i + 1] += prod[i];
        next[i] -= z * prod[i];
      }
      prod = next;
    }
    ASSERT_EQ(prod.size(), phi.size()) << "c=" << c;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      EXPECT_NEAR(to_double(prod[i].re), static_cast<double>(to_long(phi[i])), 1e-9) << "c=" << c << " i=" << i;
      EXPECT_NEAR(to_double(prod[i].im), 0.0, 1e-9) << "c=" << c << " i=" << i;
    }
  }
}

TEST(Cyclotomic, ZetaHasOrderC) {
  for (long c : {3L, 5L, 8L, 12L, 15L}) {
    CycNum z = CycNum::zeta(c);
    CycNum p = CycNum::one(c);
    for (long k = 1; k < c; ++k) {
      p *= z;
      EXPECT_NE(p, CycNum::one(c));
    }
    EXPECT_EQ(p * z, CycNum::one(c));
  }
}

TEST(Cyclotomic, FieldAxiomsOnRandomElements) {
  std::mt19937_64 rng(11);
  for (long c : {4L, 7L, 9L, 12L, 20L}) {
    for (int t = 0; t < 10; ++t) {
      CycNum a = random_cyc(c, rng), b = random_cyc(c, rng), d = random_cyc(c, rng);
      EXPECT_EQ(a * (b + d), a * b + a * d);
      EXPECT_EQ(a * b, b * a);
      if (!a.is_zero()) {
        EXPECT_EQ(a * a.inv(), CycNum::one(c));
      }
      EXPECT_NEAR(std::abs(embed(a * b) - embed(a) * embed(b)), 0.0, 1e-9);
    }
  }
  EXPECT_THROW(CycNum::zero(5).inv(), Error);
  EXPECT_THROW(CycNum::one(5) + CycNum::one(7), Error);
}

TEST(Cyclotomic, GaloisActionIsRingHomomorphism) {
  std::mt19937_64 rng(5);
  for (long c : {5L, 8L, 12L, 21L}) {
    for (long g : unit_residues(c)) {
      CycNum a = random_cyc(c, rng), b = random_cyc(c, rng);
      EXPECT_EQ(galois_apply(g, a * b), galois_apply(g, a) * galois_apply(g, b));
      EXPECT_EQ(galois_apply(g, a + b), galois_apply(g, a) + galois_apply(g, b));
      EXPECT_EQ(galois_apply(g, CycNum::zeta(c)), CycNum::zeta(c, g));
    }
  }
}

TEST(Cyclotomic, ComplexConjugationFixesRealSubfield) {
  CycNum z = CycNum::zeta(7);
  CycNum r = z + galois_apply(6, z);
  EXPECT_TRUE(is_fixed_by(r, GaloisSubgroup::generated_by(7, {6})));
  EXPECT_NEAR(embed(r).imag(), 0.0, 1e-12);
  EXPECT_NEAR(embed(r).real(), 2 * std::cos(2 * M_PI / 7), 1e-12);
}

TEST(Cyclotomic, OrbitSumOfFullGroupIsRational) {
  EXPECT_EQ(orbit_sum(GaloisSubgroup::full(12)), CycNum::rational(12, Rat(0)));
  EXPECT_EQ(orbit_sum(GaloisSubgroup::full(7)), CycNum::rational(7, Rat(-1)));
  EXPECT_EQ(orbit_sum(GaloisSubgroup::full(9)), CycNum::rational(9, Rat(0)));
}

TEST(Cyclotomic, ConductorChangeRoundTrips) {
  CycNum x = CycNum::zeta(3) + CycNum::rational(3, make_rat(1, 2));
  CycNum up = rebase_conductor(x, 12);
  EXPECT_EQ(up.conductor(), 12);
  EXPECT_EQ(up, CycNum::zeta(12, 4) + CycNum::rational(12, make_rat(1, 2)));
  EXPECT_EQ(restrict_conductor(up, 3), x);
}

TEST(Galois, SubgroupLattice) {
  auto subs = all_subgroups(8);
  EXPECT_EQ(subs.size(), 5u);
  auto g = GaloisSubgroup::generated_by(15, {2});
  EXPECT_EQ(g.order(), 4u);
  EXPECT_TRUE(g.contains(8));
  EXPECT_FALSE(g.contains(7));
  EXPECT_THROW(GaloisSubgroup::generated_by(12, {2}), Error);
}

TEST(Galois, FixedFieldDimension) {
  for (long c : {5L, 7L, 12L, 15L}) {
    for (const auto& G : all_subgroups(c)) {
      const auto basis = fixed_field_basis(G);
      EXPECT_EQ(static_cast<long>(basis.cols()) * static_cast<long>(G.order()), euler_phi(c)) << "c=" << c;
    }
  }
}

TEST(Linalg, RationalSolveAndInverse) {
  Matrix<Rat> a(3, 3, Rat(0));
  const long vals[] = {2, 1, 0, 1, 3, 1, 0, 1, 4};
  for (std::size_t i = 0; i < 9; ++i) a(i / 3, i % 3) = Rat(vals[i]);
  const auto inv = inverse(a, Rat(0));
  EXPECT_EQ(a * inv, Matrix<Rat>::identity(3, Rat(1)));
  EXPECT_EQ(det(a, Rat(0)), Rat(18));
  const auto cp = charpoly(a, Rat(0));
  EXPECT_EQ(cp, (std::vector<Rat>{Rat(-18), Rat(24), Rat(-9), Rat(1)}));
}

TEST(Linalg, NullspaceOfSingularMatrix) {
  Matrix<Rat> a(2, 3, Rat(0));
  a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
  a(1, 0) = 2; a(1, 1) = 4; a(1, 2) = 6;
  EXPECT_EQ(rank(a), 1u);
  const auto ns = nullspace(a, Rat(0));
  EXPECT_EQ(ns.cols(), 2u);
  const auto prod = a * ns;
  for (const auto& x : prod.data()) EXPECT_EQ(x, Rat(0));
  Matrix<Rat> b(2, 1, Rat(0));
  b(0, 0) = 1;
  EXPECT_FALSE(solve(a, b, Rat(0)).has_value());
}

TEST(Linalg, CyclotomicMatrixInverse) {
  std::mt19937_64 rng(3);
  const long c = 12;
  CycMatrix m(3, 3, CycNum::zero(c));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = random_cyc(c, rng);
  ASSERT_EQ(rank(m), 3u);
  EXPECT_EQ(m * inverse(m, CycNum::zero(c)), CycMatrix::identity(3, CycNum::one(c)));
}

TEST(Modp, ReductionIsHomomorphism) {
  ModpReduction red(12);
  EXPECT_EQ(red.prime() % 12, 1u);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    CycNum a = random_cyc(12, rng), b = random_cyc(12, rng);
    auto ra = red.reduce(a), rb = red.reduce(b), rab = red.reduce(a * b);
    ASSERT_TRUE(ra && rb && rab);
    EXPECT_EQ(*rab, red.mul(*ra, *rb));
  }
}
