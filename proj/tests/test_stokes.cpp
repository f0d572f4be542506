#include <gtest/gtest.h>

#include <cmath>

#include "hgb/criteria.hpp"
#include "hgb/stokes.hpp"

using namespace hgb;

namespace {

ExponentData sys(const char* a, const char* b) { return ExponentData(parse_rat_list(a), parse_rat_list(b)); }

std::complex<double> at(const CMatrix& m, std::size_t i, std::size_t j) { return to_std(m(i, j)); }

/// Distance from theta to the nearest Stokes direction, modulo 2 pi.
double distance_to_directions(double theta, const std::vector<double>& dirs) {
  double best = 1e9;
  for (double s : dirs) {
    double d = std::fmod(std::abs(theta - s), 2 * M_PI);
    best = std::min(best, std::min(d, 2 * M_PI - d));
  }
  return best;
}

StokesConfig with_bits(unsigned bits) {
  StokesConfig cfg;
  cfg.precision_bits = bits;
  return cfg;
}

double off_diagonal_product(const StokesData& sd) {
  return std::abs(at(sd.S_plus, 0, 1) * at(sd.S_minus, 1, 0) + at(sd.S_plus, 1, 0) * at(sd.S_minus, 0, 1));
}

}  // namespace

TEST(Formal, FactorsAreScaledRootsOfUnityPlusZero) {
  FormalData fd = formal_data(sys("0,1/3,2/3", "0"));
  EXPECT_EQ(fd.d, 2u);
  ASSERT_EQ(fd.factors.size(), 3u);
  EXPECT_TRUE(fd.factors[0].is_zero());
  EXPECT_EQ(fd.factors[0].multiplicity, 1u);
  EXPECT_NEAR(std::abs(factor_value(fd.factors[1]) - std::complex<double>(2, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(factor_value(fd.factors[2]) - std::complex<double>(-2, 0)), 0.0, 1e-12);
  EXPECT_FALSE(fd.katz_closed_form);
  FormalData katz = formal_data(sys("1/5,2/7,1/2", ""));
  EXPECT_EQ(katz.d, 3u);
  EXPECT_TRUE(katz.katz_closed_form);
  EXPECT_THROW(formal_data(sys("1/2", "0")), Error);
}

TEST(Geometry, StokesDirectionsOfOppositeFactors) {
  auto dirs = stokes_directions({{2, 0}, {-2, 0}});
  ASSERT_EQ(dirs.size(), 2u);
  EXPECT_NEAR(dirs[0], M_PI / 2, 1e-12);
  EXPECT_NEAR(dirs[1], 3 * M_PI / 2, 1e-12);
  EXPECT_TRUE(stokes_directions({{1, 0}}).empty());
}

TEST(Geometry, PrecedesIsAntisymmetricOffStokesDirections) {
  const std::complex<double> a{2, 0}, b{-1, 1.7};
  for (double t = 0.05; t < 2 * M_PI; t += 0.3) {
    if (distance_to_directions(t, stokes_directions({a, b})) < 1e-6) continue;
    EXPECT_NE(precedes(a, b, t), precedes(b, a, t)) << t;
  }
}

TEST(Geometry, SectorsCoverCircleAndOverlapsAvoidStokesDirections) {
  const char* cases[][2] = {{"0,1/2", ""}, {"0,1/3,2/3", "0"}, {"1/5,2/7,1/2", ""}, {"1/5,1/3,1/2,2/3", ""}};
  for (auto& cs : cases) {
    StokesGeometry g = stokes_geometry(formal_data(sys(cs[0], cs[1])));
    EXPECT_NEAR(g.S_plus.width(), M_PI + 2 * g.epsilon, 1e-12);
    EXPECT_NEAR(g.S_minus.width(), M_PI + 2 * g.epsilon, 1e-12);
    EXPECT_NEAR(g.S_minus.lo - g.S_plus.lo, M_PI, 1e-12);
    for (const Arc* a : {&g.sigma_plus, &g.sigma_minus}) {
      EXPECT_GT(distance_to_directions(a->center(), g.stokes_directions), g.epsilon) << cs[0];
      for (double s : g.stokes_directions)
        for (int k = -2; k <= 2; ++k) EXPECT_FALSE(a->contains(s + 2 * M_PI * k)) << cs[0];
    }
    EXPECT_LE(std::abs(g.S_plus.center()), M_PI / 2 + 1e-9);
  }
}

TEST(Geometry, EpsilonMustStayBelowHalfTheGap) {
  const std::vector<double> dirs{0.0, 1.0, M_PI};
  EXPECT_NO_THROW(build_sectors(dirs, 0.4));
  try {
    build_sectors(dirs, 0.6);
    FAIL() << "expected EpsilonTooLarge";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::EpsilonTooLarge);
  }
  EXPECT_THROW(build_sectors(dirs, 0.0), Error);
}

TEST(FormalSeries, RecursionAnnihilatesToRequestedOrder) {
  ExponentData e = sys("1/5,2/7,1/2", "");
  for (long k = 0; k < 3; ++k) {
    FormalSolution sol = formal_solution_exp(e, k, 12);
    EXPECT_LE(formal_defect(e, sol), -13) << "k=" << k;
  }
  ExponentData z = sys("0,1/3,2/3", "1/4");
  FormalSolution sol = formal_solution_zero(z, make_rat(1, 4), 12);
  EXPECT_LE(formal_defect(z, sol), -12);
}

TEST(FormalSeries, RepeatedExponentsAreResonant) {
  try {
    frobenius_frame(sys("0,0", ""), 2, {Real(0), Real(0)}, 64);
    FAIL() << "expected ResonantExponents";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ResonantExponents);
  }
}

TEST(Frames, MonodromyAtZeroHasLocalExponents) {
  ExponentData e = sys("1/5,2/7,1/2", "1/3");
  CMatrix m = frame_monodromy(e, 0.5, 0.3, 128);
  std::vector<Complex> want;
  for (const auto& a : e.alpha()) want.push_back(unit_root(a));
  std::vector<Complex> want_inv;
  for (const auto& a : e.alpha()) want_inv.push_back(unit_root(-a));
  const double d = std::min(to_double(multiset_distance(eigenvalues(m), want)),
                            to_double(multiset_distance(eigenvalues(m), want_inv)));
  EXPECT_LT(d, 1e-20);
}

TEST(Stokes, ClosedFormCoshSinhHasTrivialStokesMatrices) {
  StokesData sd = stokes_matrices(sys("0,1/2", ""));
  const CMatrix id = CMatrix::identity(2, Complex(Real(1)));
  EXPECT_LT(to_double(max_abs(sd.S_plus - id)), sd.precision.error_bound);
  EXPECT_LT(to_double(max_abs(sd.S_minus - id)), sd.precision.error_bound);
  EXPECT_LT(sd.eigenvalue_distance, 1e-6);
  EXPECT_TRUE(sd.q_level);
}

TEST(Stokes, BesselMultiplierMatchesClassicalFormula) {
  const char* cases[] = {"1/5,2/7", "1/3,1/2", "1/8,5/8", "2/9,4/5"};
  for (const char* cs : cases) {
    ExponentData e = sys(cs, "");
    StokesData sd = stokes_matrices(e);
    const double nu = to_double(to_real(e.alpha()[0] - e.alpha()[1]));
    const double want = 4 * std::cos(M_PI * nu) * std::cos(M_PI * nu);
    EXPECT_NEAR(off_diagonal_product(sd), want, 1e-9) << cs;
  }
}

TEST(Stokes, CatalogueSystemsMeetTolerances) {
  for (auto [a, b] : {std::pair{"0,1/2", ""}, std::pair{"0,1/3,2/3", "0"}}) {
    ExponentData e = sys(a, b);
    StokesData sd = stokes_matrices(e);
    EXPECT_LT(sd.eigenvalue_distance, 1e-6) << a;
    EXPECT_LT(sd.forbidden_max, std::max(sd.precision.error_bound, 1e-300)) << a;
    FieldVerification fv = verify_field_of_stokes(sd, criteria_report(e), 1e-6);
    EXPECT_TRUE(fv.real_checked) << a;
    EXPECT_TRUE(fv.ok) << a;
  }
}

TEST(Stokes, UnipotentTriangularShape) {
  StokesData sd = stokes_matrices(sys("0,1/3,2/3", "0"));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::abs(at(sd.S_plus, i, i) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(at(sd.S_minus, i, i) - 1.0), 0.0, 1e-12);
  }
  const CMatrix prod = sd.S_plus * sd.S_minus;
  EXPECT_EQ(sd.S_plus.rows(), 3u);
  EXPECT_NEAR(std::abs(to_std(det(prod, Complex())) - 1.0), 0.0, 1e-12);
}

TEST(Stokes, RankThreeMultiplierIsRootOfTwelvePi) {
  StokesData sd = stokes_matrices(sys("0,1/3,2/3", "0"), with_bits(256));
  double biggest = 0;
  for (const auto* S : {&sd.S_plus, &sd.S_minus})
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) biggest = std::max(biggest, std::abs(to_std((*S)(i, j))));
  EXPECT_NEAR(biggest, std::sqrt(12 * M_PI), 1e-12);
}

TEST(Stokes, DoublingPrecisionShrinksErrorBound) {
  for (auto [a, b] : {std::pair{"0,1/2", ""}, std::pair{"0,1/3,2/3", "0"}}) {
    StokesData lo = stokes_matrices(sys(a, b), with_bits(128));
    StokesData hi = stokes_matrices(sys(a, b), with_bits(256));
    EXPECT_LE(hi.precision.error_bound * 2, lo.precision.error_bound) << a;
  }
}

TEST(Stokes, DegreeThreeChecksAtCoverLevel) {
  StokesData sd = stokes_matrices(sys("1/5,2/7,1/2", ""));
  EXPECT_FALSE(sd.q_level);
  EXPECT_LT(sd.u_level_distance, 1e-6);
  EXPECT_FALSE(sd.warnings.empty());
}

TEST(Stokes, RegularSystemIsNotConfluent) {
  try {
    stokes_matrices(sys("1/2", "0"));
    FAIL() << "expected NotConfluent";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotConfluent);
  }
}

TEST(Field, RationalApproximation) {
  EXPECT_EQ(detail::nearby_rational(0.75, 100, 1e-9), make_rat(3, 4));
  EXPECT_EQ(detail::nearby_rational(-1.0 / 3.0, 100, 1e-9), make_rat(-1, 3));
  EXPECT_FALSE(detail::nearby_rational(M_PI, 100, 1e-9).has_value());
}
