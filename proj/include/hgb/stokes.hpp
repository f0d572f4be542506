#pragma once

// Formal and numerical Stokes data at the irregular point q = infinity of a
// confluent system (n > m), after the ramification q = u^d with d = n - m.
//
// Formal solutions: m of moderate growth q^{beta_j} sum a_k q^{-k}, and for
// every c = d zeta_d^k one solution e^{cu} u^{rho_c} sum a_k u^{-k}. The
// coefficients come from exact recursions over Q(zeta_d).
//
// Analytic solutions: the Frobenius basis q^{alpha_i} sum f_k q^k at 0, whose
// series are entire and are summed directly at |u| = R.
//
// Matching: on a sector S, Phi = Y X with Y the sectorial basis asymptotic to
// the formal one; row c of X is read off at the direction of S where e^{cu}
// dominates the most. With S+ = (b - pi - eps, b + eps) and
// S- = (b - eps, b + pi + eps),
//   S_plus  = X- X+^-1                (coordinates on S+ -> S-, overlap at b)
//   S_minus = X+(2 pi) X-^-1          (coordinates on S- -> S+ + 2 pi)
// and formal_monodromy S_minus S_plus is the counterclockwise monodromy of the
// ramified system in the basis Y+ (eigenvalues exp(2 pi i d alpha_j)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgb/criteria.hpp"
#include "hgb/cyclotomic.hpp"
#include "hgb/errors.hpp"
#include "hgb/hypersys.hpp"
#include "hgb/linalg.hpp"
#include "hgb/numeric.hpp"

namespace hgb {

struct ExponentialFactor {
  /// d zeta_d^k in Q(zeta_d), or zero.
  CycNum coefficient;
  std::size_t multiplicity = 1;
  /// k for d zeta_d^k, -1 for the zero factor.
  long root_index = -1;

  bool is_zero() const { return root_index < 0; }
};

struct FormalData {
  std::size_t d = 0;
  std::vector<ExponentialFactor> factors;
  /// The Katz conditions (d alpha_j not integral, not Kummer induced) hold.
  bool katz_closed_form = false;
  std::string method;
};

namespace detail {

/// H(alpha; beta) is a pullback under q -> q^k when both multisets are
/// stable under x -> x + 1/k.
inline bool kummer_induced(const ExponentData& e, long k) {
  auto stable = [&](const std::vector<Rat>& xs) {
    std::vector<Rat> moved;
    for (const auto& x : xs) moved.push_back(frac(x + make_rat(1, k)));
    std::sort(moved.begin(), moved.end());
    return moved == xs;
  };
  return stable(e.alpha()) && stable(e.beta());
}

}  // namespace detail

/// Exponential factors from the characteristic equation of the ramified
/// operator A(theta_u / d) - u^d B(theta_u / d): with theta_u ~ t u its
/// leading part is u^n ((t/d)^n - (t/d)^m), with roots 0 (multiplicity m) and
/// t = d zeta_d^k.
inline FormalData formal_data(const ExponentData& e) {
  if (e.n() <= e.m()) throw Error(ErrorKind::NotConfluent, "formal data at infinity needs n > m");
  FormalData fd;
  fd.d = e.n() - e.m();
  const long d = static_cast<long>(fd.d);
  bool integral = false;
  for (const auto& a : e.alpha()) integral = integral || Rat(a * Rat(d)).get_den() == 1;
  bool induced = false;
  for (long k = 2; k <= d; ++k)
    if (d % k == 0 && static_cast<long>(e.n()) % k == 0 && static_cast<long>(e.m()) % k == 0)
      induced = induced || detail::kummer_induced(e, k);
  fd.katz_closed_form = !integral && !induced;
  fd.method = fd.katz_closed_form ? "closed form d * mu_d" : "characteristic equation of the ramified operator";
  if (e.m() > 0) fd.factors.push_back({CycNum::zero(d), e.m(), -1});
  for (long k = 0; k < d; ++k) fd.factors.push_back({CycNum::zeta(d, k) * Rat(d), 1, k});
  return fd;
}

inline std::complex<double> factor_value(const ExponentialFactor& f) {
  if (f.is_zero()) return {0.0, 0.0};
  const double d = static_cast<double>(f.coefficient.conductor());
  const double t = 2.0 * M_PI * static_cast<double>(f.root_index) / d;
  return {d * std::cos(t), d * std::sin(t)};
}

// ---------------------------------------------------------------------------
// Geometry

namespace detail {

inline double wrap_2pi(double x) {
  x = std::fmod(x, 2.0 * M_PI);
  if (x < 0) x += 2.0 * M_PI;
  if (x >= 2.0 * M_PI - 1e-12) x = 0.0;
  return x;
}

inline double wrap_pi(double x) {
  x = wrap_2pi(x);
  return x > M_PI ? x - 2.0 * M_PI : x;
}

}  // namespace detail

/// Angles theta in [0, 2 pi) with Re((c - c') e^{i theta}) = 0 for a pair of
/// distinct factors.
inline std::vector<double> stokes_directions(const std::vector<std::complex<double>>& factors) {
  std::vector<double> out;
  for (std::size_t i = 0; i < factors.size(); ++i)
    for (std::size_t j = i + 1; j < factors.size(); ++j) {
      const auto diff = factors[i] - factors[j];
      if (std::abs(diff) < 1e-12) continue;
      const double phi = std::arg(diff);
      out.push_back(detail::wrap_2pi(M_PI / 2 - phi));
      out.push_back(detail::wrap_2pi(3 * M_PI / 2 - phi));
    }
  std::sort(out.begin(), out.end());
  std::vector<double> uniq;
  for (double x : out)
    if (uniq.empty() || x - uniq.back() > 1e-9) uniq.push_back(x);
  if (uniq.size() > 1 && uniq.front() + 2 * M_PI - uniq.back() < 1e-9) uniq.pop_back();
  return uniq;
}

/// [c] precedes [c'] at theta: e^{cu} is bounded by e^{c'u} along theta.
inline bool precedes(std::complex<double> c, std::complex<double> c2, double theta) {
  return std::real((c - c2) * std::polar(1.0, theta)) <= 0;
}

struct Arc {
  double lo = 0;
  double hi = 0;
  double center() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return x > lo && x < hi; }
};

struct StokesGeometry {
  std::size_t d = 0;
  std::vector<double> stokes_directions;
  double epsilon = 0;
  /// Centre of sigma_plus; S_plus is centred at b_plus - pi / 2.
  double b_plus = 0;
  Arc S_plus, S_minus, sigma_plus, sigma_minus;
  std::string rule;
};

inline double default_epsilon(const std::vector<double>& dirs) {
  if (dirs.size() < 2) return 0.1;
  double gap = 2 * M_PI;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double next = i + 1 < dirs.size() ? dirs[i + 1] : dirs[0] + 2 * M_PI;
    gap = std::min(gap, next - dirs[i]);
  }
  return std::min(0.1, gap / 4);
}

/// Canonical cover: the overlaps sit at the bisectors b and b + pi of a longest
/// Stokes-free arc, chosen so that the centre of S_plus is closest to 0
/// (ties go to the positive centre).
inline StokesGeometry build_sectors(const std::vector<double>& dirs, double epsilon, std::size_t d = 0) {
  if (!(epsilon > 0)) throw Error(ErrorKind::PreconditionViolated, "epsilon must be positive");
  StokesGeometry g;
  g.d = d;
  g.stokes_directions = dirs;
  g.epsilon = epsilon;
  double centre = 0;
  if (dirs.empty()) {
    if (epsilon >= M_PI / 2) throw Error(ErrorKind::EpsilonTooLarge, "epsilon must stay below pi / 2");
    g.rule = "no Stokes directions: S_plus centred at 0";
  } else {
    double gap = 2 * M_PI, longest = 0;
    std::vector<std::pair<double, double>> arcs;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const double next = i + 1 < dirs.size() ? dirs[i + 1] : dirs[0] + 2 * M_PI;
      arcs.push_back({dirs[i], next});
      gap = std::min(gap, next - dirs[i]);
      longest = std::max(longest, next - dirs[i]);
    }
    if (epsilon >= gap / 2)
      throw Error(ErrorKind::EpsilonTooLarge, "epsilon must be below half the minimal gap between Stokes directions");
    bool have = false;
    for (const auto& [lo, hi] : arcs) {
      if (hi - lo < longest - 1e-9) continue;
      const double c = detail::wrap_pi(0.5 * (lo + hi) - M_PI / 2);
      const bool better = !have || std::abs(c) < std::abs(centre) - 1e-9 ||
                          (std::abs(std::abs(c) - std::abs(centre)) <= 1e-9 && c > centre);
      if (better) centre = c;
      have = true;
    }
    g.rule = "overlaps at bisectors of a longest Stokes-free arc, S_plus centre nearest 0";
  }
  g.b_plus = centre + M_PI / 2;
  g.S_plus = {g.b_plus - M_PI - epsilon, g.b_plus + epsilon};
  g.S_minus = {g.b_plus - epsilon, g.b_plus + M_PI + epsilon};
  g.sigma_plus = {g.b_plus - epsilon, g.b_plus + epsilon};
  g.sigma_minus = {g.b_plus + M_PI - epsilon, g.b_plus + M_PI + epsilon};
  return g;
}

inline StokesGeometry stokes_geometry(const FormalData& fd, std::optional<double> epsilon = std::nullopt) {
  std::vector<std::complex<double>> vals;
  for (const auto& f : fd.factors) vals.push_back(factor_value(f));
  auto dirs = stokes_directions(vals);
  return build_sectors(dirs, epsilon.value_or(default_epsilon(dirs)), fd.d);
}

// ---------------------------------------------------------------------------
// Formal solutions

/// One column of the formal basis.
struct FormalSolution {
  bool zero_factor = false;
  long root_index = -1;
  /// Exponential coefficient c (zero for the moderate solutions).
  CycNum c;
  /// Exponent of u: rho_c, or d beta_j for the moderate solutions.
  CycNum rho;
  /// beta_j for the moderate solutions.
  Rat beta;
  /// a_0 = 1, a_1, ...: coefficients of u^{-k} (c != 0) or of q^{-k} (c = 0).
  std::vector<CycNum> coeffs;
};

namespace detail {

using SPoly = std::vector<CycNum>;

inline SPoly spoly_add(SPoly a, const SPoly& b, long d) {
  if (a.size() < b.size()) a.resize(b.size(), CycNum::zero(d));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

inline SPoly spoly_scale(SPoly a, const CycNum& s) {
  for (auto& x : a) x *= s;
  return a;
}

/// (s + shift) p(s).
inline SPoly spoly_times_linear(const SPoly& p, const Rat& shift, long d) {
  SPoly out(p.size() + 1, CycNum::zero(d));
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i + 1] += p[i];
    out[i] += p[i] * shift;
  }
  return out;
}

inline CycNum spoly_eval(const SPoly& p, const CycNum& s) {
  CycNum acc = CycNum::zero(s.conductor());
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * s + p[i];
  return acc;
}

/// Operator as a map offset j -> polynomial L_j(s): O u^s = sum_j L_j(s) u^{s+j}.
using ShiftOperator = std::map<long, SPoly>;

/// Applies (theta + c u) / d - x to the operator image.
inline ShiftOperator apply_factor(const ShiftOperator& op, const CycNum& c, long d, const Rat& x) {
  ShiftOperator out;
  const Rat inv_d = make_rat(1, d);
  for (const auto& [j, p] : op) {
    // theta (p(s) u^{s+j}) = (s + j) p(s) u^{s+j}
    SPoly t = spoly_scale(spoly_times_linear(p, Rat(j), d), CycNum::rational(d, inv_d));
    t = spoly_add(t, spoly_scale(p, CycNum::rational(d, -x)), d);
    out[j] = spoly_add(out.count(j) ? out[j] : SPoly{}, t, d);
    if (!c.is_zero()) out[j + 1] = spoly_add(out.count(j + 1) ? out[j + 1] : SPoly{}, spoly_scale(p, c * inv_d), d);
  }
  return out;
}

/// L_c = A((theta + c u) / d) - u^d B((theta + c u) / d) as coefficients L_0..L_n.
inline std::vector<SPoly> conjugated_operator(const ExponentData& e, const CycNum& c, long d) {
  ShiftOperator a{{0, SPoly{CycNum::one(d)}}}, b{{0, SPoly{CycNum::one(d)}}};
  for (const auto& x : e.alpha()) a = apply_factor(a, c, d, x);
  for (const auto& x : e.beta()) b = apply_factor(b, c, d, x);
  std::vector<SPoly> out(e.n() + 1);
  for (const auto& [j, p] : a) out[static_cast<std::size_t>(j)] = spoly_add(out[static_cast<std::size_t>(j)], p, d);
  for (const auto& [j, p] : b) {
    auto& slot = out[static_cast<std::size_t>(j + d)];
    slot = spoly_add(slot, spoly_scale(p, -CycNum::one(d)), d);
  }
  for (auto& p : out) {
    while (!p.empty() && p.back().is_zero()) p.pop_back();
  }
  return out;
}

inline CycNum eval_rat_poly_at(const RatPoly& p, const Rat& x) {
  Rat acc(0);
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return CycNum::rational(1, acc);
}

}  // namespace detail

/// Formal solution for the factor d zeta_d^k, coefficients a_0..a_order.
inline FormalSolution formal_solution_exp(const ExponentData& e, long k, std::size_t order) {
  const long d = static_cast<long>(e.n() - e.m());
  const CycNum c = CycNum::zeta(d, k) * Rat(d);
  const auto L = detail::conjugated_operator(e, c, d);
  const std::size_t n = e.n();
  if (!L[n].empty()) throw Error(ErrorKind::PreconditionViolated, "leading coefficient of the conjugated operator");
  const auto& l1 = L[n - 1];
  if (l1.size() != 2) throw Error(ErrorKind::ResonantExponents, "indicial polynomial at c is not linear");
  FormalSolution sol;
  sol.root_index = k;
  sol.c = c;
  sol.rho = -l1[0] / l1[1];
  sol.coeffs.push_back(CycNum::one(d));
  for (std::size_t K = 1; K <= order; ++K) {
    CycNum acc = CycNum::zero(d);
    for (std::size_t j = 0; j + 2 <= n; ++j) {
      const std::size_t back = n - 1 - j;
      if (back > K) continue;
      const std::size_t kk = K - back;
      if (L[j].empty() || sol.coeffs[kk].is_zero()) continue;
      acc += detail::spoly_eval(L[j], sol.rho - CycNum::rational(d, Rat(static_cast<long>(kk)))) * sol.coeffs[kk];
    }
    const CycNum den = detail::spoly_eval(l1, sol.rho - CycNum::rational(d, Rat(static_cast<long>(K))));
    if (den.is_zero()) throw Error(ErrorKind::ResonantExponents, "formal recursion hits a zero denominator");
    sol.coeffs.push_back(-acc / den);
  }
  return sol;
}

/// Moderate formal solution q^beta sum a_k q^{-k}, from
/// a_k B(beta - k) = a_{k-1} A(beta - k + 1).
inline FormalSolution formal_solution_zero(const ExponentData& e, const Rat& beta, std::size_t order) {
  const long d = static_cast<long>(e.n() - e.m());
  const RatPoly A = theta_poly(e.alpha());
  const RatPoly B = theta_poly(e.beta());
  FormalSolution sol;
  sol.zero_factor = true;
  sol.c = CycNum::zero(d);
  sol.beta = beta;
  sol.rho = CycNum::rational(d, beta * Rat(d));
  sol.coeffs.push_back(CycNum::one(d));
  for (std::size_t k = 1; k <= order; ++k) {
    const Rat kk(static_cast<long>(k));
    const Rat den = detail::eval_rat_poly_at(B, beta - kk).rational_part();
    if (sgn(den) == 0) throw Error(ErrorKind::ResonantExponents, "repeated beta exponents");
    const Rat num = detail::eval_rat_poly_at(A, beta - kk + Rat(1)).rational_part();
    sol.coeffs.push_back(sol.coeffs.back() * (num / den));
  }
  return sol;
}

/// Lowest offset j with a nonzero coefficient of u^{rho + j} after applying
/// L_c to the truncated series, relative to the leading power rho + n - 1.
/// For a correct recursion the result is at most -order - 1.
inline long formal_defect(const ExponentData& e, const FormalSolution& sol) {
  const long d = static_cast<long>(e.n() - e.m());
  const long n = static_cast<long>(e.n());
  std::map<long, CycNum> image;
  if (sol.zero_factor) {
    // work in q: P q^s = A(s) q^s - B(s) q^{s+1}
    const RatPoly A = theta_poly(e.alpha());
    const RatPoly B = theta_poly(e.beta());
    for (std::size_t k = 0; k < sol.coeffs.size(); ++k) {
      const Rat s = sol.beta - Rat(static_cast<long>(k));
      const Rat a = detail::eval_rat_poly_at(A, s).rational_part();
      const Rat b = detail::eval_rat_poly_at(B, s).rational_part();
      const long off = -static_cast<long>(k);
      image.try_emplace(off, CycNum::zero(d));
      image.try_emplace(off + 1, CycNum::zero(d));
      image[off] += sol.coeffs[k] * a;
      image[off + 1] -= sol.coeffs[k] * b;
    }
    long top = 1;
    for (auto it = image.rbegin(); it != image.rend(); ++it)
      if (!it->second.is_zero()) top = std::min(top, it->first);
    for (auto it = image.rbegin(); it != image.rend(); ++it)
      if (!it->second.is_zero()) return it->first - 1;
    return std::numeric_limits<long>::min();
  }
  const auto L = detail::conjugated_operator(e, sol.c, d);
  for (std::size_t k = 0; k < sol.coeffs.size(); ++k)
    for (std::size_t j = 0; j < L.size(); ++j) {
      if (L[j].empty()) continue;
      const long off = static_cast<long>(j) - static_cast<long>(k) - (n - 1);
      image.try_emplace(off, CycNum::zero(d));
      image[off] += detail::spoly_eval(L[j], sol.rho - CycNum::rational(d, Rat(static_cast<long>(k)))) * sol.coeffs[k];
    }
  for (auto it = image.rbegin(); it != image.rend(); ++it)
    if (!it->second.is_zero()) return it->first;
  return std::numeric_limits<long>::min();
}

// ---------------------------------------------------------------------------
// Numerical frames

/// A point u = R e^{i theta} on the universal cover of the punctured plane.
struct CoverPoint {
  Real log_r;
  Real theta;
};

struct FrameAtZero {
  /// Rows theta_q^j y for j < n, columns the Frobenius solutions.
  CMatrix values;
  /// Largest series term, the scale of cancellation.
  Real max_term;
  /// Bound on the neglected tail.
  Real tail;
  std::size_t terms = 0;
};

namespace detail {

inline Complex cplx(double re, double im = 0) { return Complex(Real(re), Real(im)); }

inline Complex to_complex(const CycNum& x) {
  const Complex z = embed_complex(x, static_cast<unsigned>(Real::default_precision() * 3.33));
  return Complex(Real(z.re), Real(z.im));
}

inline void require_distinct(const std::vector<Rat>& xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] == xs[i - 1]) throw Error(ErrorKind::ResonantExponents, std::string("repeated ") + what + " exponent");
}

inline Real two_pow(long e) { return pow(Real(2), Real(e)); }

}  // namespace detail

/// Frobenius frame at q = u^d for u given on the cover; with d = 1 the point
/// is q itself. Columns sum_k f_k q^{alpha_i + k}, f_k A(alpha_i + k) =
/// f_{k-1} B(alpha_i + k - 1).
inline FrameAtZero frobenius_frame(const ExponentData& e, std::size_t d, const CoverPoint& u, unsigned bits) {
  detail::require_distinct(e.alpha(), "alpha");
  const std::size_t n = e.n();
  const RatPoly A = theta_poly(e.alpha());
  const RatPoly B = theta_poly(e.beta());
  const Real dd(static_cast<long>(d));
  const Real log_q = u.log_r * dd;
  const Real arg_q = u.theta * dd;
  const Complex q = cexp(Complex(log_q, arg_q));
  const Real cutoff = detail::two_pow(-static_cast<long>(bits) - 16);
  FrameAtZero out;
  out.values = CMatrix(n, n, Complex());
  out.max_term = 0;
  out.tail = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Rat& a = e.alpha()[i];
    const Complex qa = polar_pow(log_q, arg_q, Complex(to_real(a)));
    Complex term(Real(1));
    std::vector<Complex> col(n);
    Real col_max = 0;
    const double qabs = to_double(exp(log_q));
    for (std::size_t k = 0;; ++k) {
      const Real s = to_real(a + Rat(static_cast<long>(k)));
      Real sj = 1;
      for (std::size_t j = 0; j < n; ++j) {
        col[j] += term * sj;
        sj *= s;
      }
      const Real mag = abs(term) * std::max(Real(1), pow(abs(s), Real(static_cast<long>(n) - 1)));
      col_max = std::max(col_max, mag);
      const Rat next = a + Rat(static_cast<long>(k) + 1);
      const Rat ratio = detail::eval_rat_poly_at(B, next - Rat(1)).rational_part() /
                        detail::eval_rat_poly_at(A, next).rational_part();
      term = term * q * to_real(ratio);
      const double kd = static_cast<double>(k);
      if (kd > 2.0 * std::pow(qabs, 1.0 / static_cast<double>(std::max<std::size_t>(d, 1))) + 4 &&
          (is_zero(term) || abs(term) < cutoff * col_max)) {
        out.tail = std::max(out.tail, abs(term) * 2 * pow(Real(kd + 2), Real(static_cast<long>(n))));
        out.terms = std::max(out.terms, k + 1);
        break;
      }
      if (k > 200000) throw Error(ErrorKind::PrecisionUnreachable, "Frobenius series did not converge");
    }
    out.max_term = std::max(out.max_term, col_max);
    for (std::size_t j = 0; j < n; ++j) out.values(j, i) = col[j] * qa;
  }
  return out;
}

/// Frame at a point q0 = |q0| e^{i arg} of the regular singular point 0 for
/// the unramified system (d = 1 coordinates).
inline FrameAtZero fundamental_frame_at_zero(const ExponentData& e, double q_abs, double q_arg, unsigned bits) {
  PrecisionGuard guard(bits);
  return frobenius_frame(e, 1, {log(Real(q_abs)), Real(q_arg)}, bits);
}

/// Monodromy of the Frobenius frame along the counterclockwise loop through
/// q0: Phi(q0)^-1 Phi(q0 e^{2 pi i}).
inline CMatrix frame_monodromy(const ExponentData& e, double q_abs, double q_arg, unsigned bits) {
  PrecisionGuard guard(bits);
  const Real lr = log(Real(q_abs));
  const auto f0 = frobenius_frame(e, 1, {lr, Real(q_arg)}, bits);
  const auto f1 = frobenius_frame(e, 1, {lr, Real(q_arg) + 2 * real_pi()}, bits);
  return inverse(f0.values, Complex(Real(1))) * f1.values;
}

namespace detail {

struct NumericColumn {
  const FormalSolution* sol = nullptr;
  Complex c;
  Complex rho;
  std::vector<Complex> coeffs;
  std::size_t used = 0;
  /// First omitted term relative to a_0 at the matching radius.
  Real truncation = 0;
};

/// theta_q^j applied to the truncated formal solution, with the exponential
/// factor removed: entries V_{j,col} = e^{-cu} theta_q^j psi_col.
inline CMatrix asymptotic_matrix(const std::vector<NumericColumn>& cols, std::size_t n, std::size_t d,
                                 const CoverPoint& u) {
  CMatrix V(n, cols.size(), Complex());
  const Real dd(static_cast<long>(d));
  const Complex uval = cexp(Complex(u.log_r, u.theta));
  const Complex uinv = Complex(Real(1)) / uval;
  for (std::size_t col = 0; col < cols.size(); ++col) {
    const auto& nc = cols[col];
    if (nc.sol->zero_factor) {
      const Real log_q = u.log_r * dd;
      const Real arg_q = u.theta * dd;
      const Complex qinv = Complex(Real(1)) / cexp(Complex(log_q, arg_q));
      const Complex qb = polar_pow(log_q, arg_q, Complex(to_real(nc.sol->beta)));
      for (std::size_t j = 0; j < n; ++j) {
        Complex acc;
        Complex qk(Real(1));
        for (std::size_t k = 0; k < nc.used; ++k) {
          const Real s = to_real(nc.sol->beta - Rat(static_cast<long>(k)));
          acc += nc.coeffs[k] * qk * pow(s, Real(static_cast<long>(j)));
          qk = qk * qinv;
        }
        V(j, col) = acc * qb;
      }
      continue;
    }
    // coefficients of u^{rho + e}, e from -K .. j
    const long K = static_cast<long>(nc.used) - 1;
    std::vector<Complex> g(static_cast<std::size_t>(K + 1 + static_cast<long>(n)), Complex());
    auto at = [&](long e) -> Complex& { return g[static_cast<std::size_t>(e + K)]; };
    for (long k = 0; k <= K; ++k) at(-k) = nc.coeffs[static_cast<std::size_t>(k)];
    const Complex urho = polar_pow(u.log_r, u.theta, nc.rho);
    long top = 0;
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc;
      Complex p(Real(1));
      for (long e = 0; e <= top; ++e) {
        acc += at(e) * p;
        p = p * uval;
      }
      p = uinv;
      for (long e = -1; e >= -K; --e) {
        acc += at(e) * p;
        p = p * uinv;
      }
      V(j, col) = acc * urho;
      // apply (theta + c u) / d
      std::vector<Complex> next(g.size(), Complex());
      for (long e = -K; e <= top; ++e) {
        const Complex& x = at(e);
        if (is_zero(x)) continue;
        next[static_cast<std::size_t>(e + K)] += x * (nc.rho + Complex(Real(e))) / dd;
        next[static_cast<std::size_t>(e + 1 + K)] += x * nc.c / dd;
      }
      g = std::move(next);
      ++top;
    }
  }
  return V;
}

inline Real max_norm(const CMatrix& m) { return max_abs(m) * Real(static_cast<long>(std::max<std::size_t>(m.rows(), 1))); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Stokes matrices

struct StokesConfig {
  unsigned precision_bits = 128;
  double tolerance = 1e-6;
  std::optional<double> epsilon;
  /// Matching radius |u|; derived from the precision when absent.
  std::optional<double> radius;
  /// Truncation order of the formal series; optimal truncation when absent.
  std::optional<std::size_t> order;
  /// Denominator bound of the rationality report.
  long rational_denominator_bound = 1000;
  /// Compare against a rerun at 0.8 R.
  bool gauge_check = true;
};

struct Frames {
  CMatrix X_plus;
  CMatrix X_minus;
  /// X_plus continued once around u = 0.
  CMatrix X_plus_turn;
  Real error;
  Real condition;
  Real radius;
  std::size_t order = 0;
  std::vector<double> row_directions_plus;
  std::vector<double> row_directions_minus;
};

struct PrecisionReport {
  unsigned precision_bits = 0;
  double radius = 0;
  std::size_t truncation_order = 0;
  double error_bound = 0;
  double match_condition = 0;
  double gauge_difference = 0;
};

struct StokesData {
  FormalData formal;
  StokesGeometry geometry;
  std::vector<FormalSolution> columns;
  std::vector<std::string> column_labels;
  std::vector<std::complex<double>> column_factors;
  Frames frames;
  CMatrix S_plus;
  CMatrix S_minus;
  /// diag(exp(2 pi i rho_c)) on the exponential columns, exp(2 pi i d beta_j) on the moderate ones.
  CMatrix formal_monodromy;
  /// formal_monodromy S_minus S_plus.
  CMatrix monodromy_u;
  /// Monodromy of the q-loop in the basis Y+, when d <= 2.
  std::optional<CMatrix> monodromy_q;
  std::vector<Complex> reconstructed_eigenvalues;
  std::vector<Complex> expected_eigenvalues;
  double eigenvalue_distance = 0;
  double u_level_distance = 0;
  bool q_level = false;
  /// Largest forbidden entry of S_plus, S_minus before it was zeroed.
  double forbidden_max = 0;
  double diagonal_deviation = 0;
  PrecisionReport precision;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<FormalSolution> formal_columns(const ExponentData& e, const FormalData& fd, std::size_t exp_order,
                                                  std::size_t zero_order) {
  std::vector<FormalSolution> cols;
  require_distinct(e.beta(), "beta");
  for (const auto& b : e.beta()) cols.push_back(formal_solution_zero(e, b, zero_order));
  for (long k = 0; k < static_cast<long>(fd.d); ++k) cols.push_back(formal_solution_exp(e, k, exp_order));
  return cols;
}

inline double min_factor_distance(const std::vector<std::complex<double>>& vals) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      const double dist = std::abs(vals[i] - vals[j]);
      if (dist > 1e-12) best = std::min(best, dist);
    }
  return best;
}

/// max_{c' != c} Re((c' - c) e^{i theta}); zero when every factor equals c.
inline double growth_score(std::complex<double> c, const std::vector<std::complex<double>>& all, double t) {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& c2 : all)
    if (std::abs(c2 - c) > 1e-12) s = std::max(s, std::real((c2 - c) * std::polar(1.0, t)));
  return s == -std::numeric_limits<double>::infinity() ? 0.0 : s;
}

inline std::vector<double> arc_grid(const Arc& arc, double margin) {
  const int steps = 720;
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) out.push_back(arc.lo + margin + (arc.width() - 2 * margin) * i / steps);
  return out;
}

/// Grid direction where e^{a u} is least dominated, among directions where
/// e^{a u} dominates e^{b u} by at least a quarter of the best margin on the
/// arc. Equal factors impose no dominance constraint.
inline std::optional<double> reading_direction(const std::vector<double>& grid, std::complex<double> a,
                                               std::optional<std::complex<double>> b,
                                               const std::vector<std::complex<double>>& all) {
  double best_dom = 0;
  const bool constrained = b && std::abs(*b - a) > 1e-12;
  if (constrained) {
    best_dom = -std::numeric_limits<double>::infinity();
    for (double t : grid) best_dom = std::max(best_dom, std::real((a - *b) * std::polar(1.0, t)));
    if (best_dom <= 0) return std::nullopt;
  }
  std::optional<double> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    if (constrained && std::real((a - *b) * std::polar(1.0, t)) < 0.25 * best_dom) continue;
    const double s = growth_score(a, all, t);
    if (s < best_score - 1e-12) {
      best_score = s;
      best = t;
    }
  }
  return best;
}

struct MatchResult {
  CMatrix X;
  Real error;
  Real condition;
  /// Normalization direction of each column of X^-1.
  std::vector<double> directions;
};

/// Local reading Z(theta) = E^-1 V^-1 Phi: row c is the coordinate of Phi
/// along the solution asymptotic to psi_c near theta. It agrees with the
/// sectorial X up to multiples of rows whose factors dominate c at theta, so
/// Z_{c''}(theta) w_c = 0 holds exactly for the columns w_c of X^-1 whenever
/// e^{c'' u} dominates e^{c u} at theta, and Z_c(theta) w_c = 1 everywhere.
/// Each column of X^-1 is solved from one such equation per factor.
inline MatchResult match_on_arc(const ExponentData& e, std::size_t d, const std::vector<NumericColumn>& cols,
                                const std::vector<std::complex<double>>& vals, const Arc& arc, double margin,
                                const Real& log_r, double turn, unsigned bits) {
  const std::size_t n = e.n();
  MatchResult res;
  res.error = 0;
  res.condition = 0;
  const Real R = exp(log_r);
  Real trunc = 0;
  for (const auto& nc : cols) trunc = std::max(trunc, nc.truncation);
  const auto grid = arc_grid(arc, margin);

  struct Reading {
    CMatrix Z;
    std::vector<Real> noise;
  };
  std::map<double, Reading> cache;
  auto reading = [&](double theta) -> const Reading& {
    auto it = cache.find(theta);
    if (it != cache.end()) return it->second;
    const CoverPoint pt{log_r, Real(theta) + Real(turn)};
    const FrameAtZero phi = frobenius_frame(e, d, pt, bits);
    const CMatrix V = asymptotic_matrix(cols, n, d, pt);
    const CMatrix Vinv = inverse(V, Complex(Real(1)));
    const Real cond = max_norm(V) * max_norm(Vinv);
    if (cond > two_pow(static_cast<long>(bits) / 2))
      throw Error(ErrorKind::MatchIllConditioned, "asymptotic frame is ill-conditioned at the matching radius");
    res.condition = std::max(res.condition, cond);
    Reading rd{Vinv * phi.values, {}};
    // cancellation in the entire series, then the neglected formal tail
    const Real round = (phi.max_term + phi.tail) * two_pow(-static_cast<long>(bits)) * Real(static_cast<long>(phi.terms + 1)) * cond;
    const Complex u = cexp(Complex(pt.log_r, pt.theta));
    for (std::size_t r = 0; r < n; ++r) {
      const Complex scale = cexp(-(cols[r].c * u));
      for (std::size_t j = 0; j < n; ++j) rd.Z(r, j) = rd.Z(r, j) * scale;
      const double score = std::max(growth_score(vals[r], vals, theta), 0.0);
      rd.noise.push_back(round * abs(scale) + trunc * exp(R * Real(score)) * cond);
    }
    return cache.emplace(theta, std::move(rd)).first->second;
  };

  CMatrix W(n, n, Complex());
  Real noise = 0;
  Real solve_amp = 0;
  for (std::size_t c = 0; c < n; ++c) {
    CMatrix A(n, n, Complex());
    CMatrix rhs(n, 1, Complex());
    for (std::size_t r = 0; r < n; ++r) {
      const auto t = reading_direction(grid, vals[r], r == c ? std::nullopt : std::optional(vals[c]), vals);
      if (!t) throw Error(ErrorKind::PreconditionViolated, "sector too narrow to separate the exponential factors");
      if (r == c) res.directions.push_back(*t);
      const Reading& rd = reading(*t);
      for (std::size_t j = 0; j < n; ++j) A(r, j) = rd.Z(r, j);
      noise = std::max(noise, rd.noise[r]);
    }
    rhs(c, 0) = Complex(Real(1));
    const CMatrix Ainv = inverse(A, Complex(Real(1)));
    solve_amp = std::max(solve_amp, max_norm(Ainv));
    const CMatrix w = Ainv * rhs;
    for (std::size_t j = 0; j < n; ++j) W(j, c) = w(j, 0);
  }
  res.X = inverse(W, Complex(Real(1)));
  const Real xn = max_norm(res.X);
  res.error = noise * solve_amp * max_norm(W) * xn * xn;
  return res;
}

}  // namespace detail

/// Frames psi_+, psi_- as the connection matrices X_+, X_- between the
/// Frobenius basis and the sectorial bases, at matching radius R.
inline Frames asymptotic_frames(const ExponentData& e, const StokesGeometry& geo, std::vector<FormalSolution>& sols,
                                const std::vector<std::complex<double>>& vals, double radius,
                                std::optional<std::size_t> order, unsigned bits) {
  const std::size_t n = e.n();
  const std::size_t d = geo.d;
  std::vector<detail::NumericColumn> cols;
  const Real R(radius);
  const Real log_r = log(R);
  std::size_t used_order = 0;
  for (auto& s : sols) {
    detail::NumericColumn nc;
    nc.sol = &s;
    nc.c = detail::to_complex(s.c);
    nc.rho = detail::to_complex(s.rho);
    for (const auto& a : s.coeffs) nc.coeffs.push_back(detail::to_complex(a));
    // powers of 1/R per coefficient index
    const Real step = s.zero_factor ? pow(R, Real(static_cast<long>(d))) : R;
    std::size_t upto = nc.coeffs.size() - 1;
    if (order) {
      upto = std::min(*order + 1, nc.coeffs.size() - 1);
    } else {
      Real best = -1;
      Real scale = 1;
      for (std::size_t k = 1; k < nc.coeffs.size(); ++k) {
        scale = scale / step;
        const Real t = abs(nc.coeffs[k]) * scale;
        if (best < 0 || t < best) {
          best = t;
          upto = k;
        }
        if (is_zero(nc.coeffs[k])) break;
      }
    }
    nc.used = upto;
    if (nc.coeffs.size() == 1) nc.used = 1;
    Real omitted = 0;
    if (nc.used < nc.coeffs.size()) omitted = abs(nc.coeffs[nc.used]) * pow(step, -Real(static_cast<long>(nc.used)));
    bool terminated = true;
    for (std::size_t k = nc.used; k < nc.coeffs.size(); ++k) terminated = terminated && is_zero(nc.coeffs[k]);
    nc.truncation = terminated ? Real(0) : omitted;
    used_order = std::max(used_order, nc.used == 0 ? 0 : nc.used - 1);
    cols.push_back(std::move(nc));
  }
  const double margin = std::min(geo.epsilon / 2, 0.05);
  Frames fr;
  fr.radius = R;
  fr.order = used_order;
  auto plus = detail::match_on_arc(e, d, cols, vals, geo.S_plus, margin, log_r, 0.0, bits);
  auto minus = detail::match_on_arc(e, d, cols, vals, geo.S_minus, margin, log_r, 0.0, bits);
  auto turn = detail::match_on_arc(e, d, cols, vals, geo.S_plus, margin, log_r, 2 * M_PI, bits);
  fr.X_plus = plus.X;
  fr.X_minus = minus.X;
  fr.X_plus_turn = turn.X;
  fr.error = std::max({plus.error, minus.error, turn.error});
  fr.condition = std::max({plus.condition, minus.condition, turn.condition});
  fr.row_directions_plus = plus.directions;
  fr.row_directions_minus = minus.directions;
  (void)n;
  return fr;
}

namespace detail {

inline bool allowed_entry(std::complex<double> ca, std::complex<double> cb, double theta) {
  if (std::abs(ca - cb) < 1e-12) return false;
  return std::real((ca - cb) * std::polar(1.0, theta)) < 0;
}

struct CoreResult {
  CMatrix S_plus, S_minus;
  Real error;
  Frames frames;
};

inline CoreResult stokes_core(const ExponentData& e, const StokesGeometry& geo, std::vector<FormalSolution>& sols,
                              const std::vector<std::complex<double>>& vals, double radius,
                              std::optional<std::size_t> order, unsigned bits) {
  CoreResult out;
  out.frames = asymptotic_frames(e, geo, sols, vals, radius, order, bits);
  const Complex one(Real(1));
  const CMatrix xp_inv = inverse(out.frames.X_plus, one);
  const CMatrix xm_inv = inverse(out.frames.X_minus, one);
  out.S_plus = out.frames.X_minus * xp_inv;
  out.S_minus = out.frames.X_plus_turn * xm_inv;
  const Real amp = max_norm(xp_inv) * (Real(1) + max_norm(out.frames.X_minus) * max_norm(xp_inv)) +
                   max_norm(xm_inv) * (Real(1) + max_norm(out.frames.X_plus_turn) * max_norm(xm_inv));
  out.error = out.frames.error * amp;
  return out;
}

}  // namespace detail

/// Full pipeline: formal data, geometry, frames, Stokes matrices, shape check
/// and monodromy reconstruction.
inline StokesData stokes_matrices(const ExponentData& e, const StokesConfig& cfg = {}) {
  if (cfg.precision_bits < 53) throw Error(ErrorKind::PreconditionViolated, "precision below 53 bits");
  PrecisionGuard guard(cfg.precision_bits);
  StokesData sd;
  sd.formal = formal_data(e);
  sd.geometry = stokes_geometry(sd.formal, cfg.epsilon);
  const std::size_t d = sd.formal.d;
  const std::size_t n = e.n();

  std::vector<std::complex<double>> vals;
  for (const auto& b : e.beta()) {
    vals.push_back({0.0, 0.0});
    sd.column_labels.push_back("0:beta=" + b.get_str());
  }
  for (const auto& f : sd.formal.factors)
    if (!f.is_zero()) {
      vals.push_back(factor_value(f));
      sd.column_labels.push_back(std::to_string(d) + "*zeta_" + std::to_string(d) + "^" + std::to_string(f.root_index));
    }
  sd.column_factors = vals;

  const double delta = detail::min_factor_distance(vals);
  const double p = static_cast<double>(cfg.precision_bits);
  double radius = cfg.radius.value_or(std::isfinite(delta) ? p * std::log(2.0) / (delta + static_cast<double>(d)) : 4.0);
  if (!(radius > 0)) throw Error(ErrorKind::PreconditionViolated, "matching radius must be positive");
  const double delta_eff = std::isfinite(delta) ? delta : 1.0;
  const std::size_t exp_order = cfg.order ? *cfg.order + 2 : static_cast<std::size_t>(std::ceil(delta_eff * radius)) + 5;
  const std::size_t zero_order =
      cfg.order ? *cfg.order + 2 : static_cast<std::size_t>(std::ceil(delta_eff * radius / static_cast<double>(d))) + 5;
  sd.columns = detail::formal_columns(e, sd.formal, exp_order, zero_order);

  auto core = detail::stokes_core(e, sd.geometry, sd.columns, vals, radius, cfg.order, cfg.precision_bits);
  sd.frames = core.frames;
  const double bound = std::max(to_double(core.error), std::numeric_limits<double>::min());

  // shape: unipotent with respect to the order on each overlap
  auto shape = [&](CMatrix& S, double theta) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) {
          sd.diagonal_deviation = std::max(sd.diagonal_deviation, to_double(abs(S(a, b) - Complex(Real(1)))));
          continue;
        }
        if (detail::allowed_entry(vals[a], vals[b], theta)) continue;
        sd.forbidden_max = std::max(sd.forbidden_max, to_double(abs(S(a, b))));
      }
  };
  sd.S_plus = core.S_plus;
  sd.S_minus = core.S_minus;
  shape(sd.S_plus, sd.geometry.sigma_plus.center());
  shape(sd.S_minus, sd.geometry.sigma_minus.center());
  if (sd.forbidden_max > 10 * bound || sd.diagonal_deviation > 10 * bound)
    throw Error(ErrorKind::ShapeViolation, "Stokes matrix entry outside the unipotent pattern exceeds the error bound");
  auto clean = [&](CMatrix& S, double theta) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) S(a, b) = Complex(Real(1));
        else if (!detail::allowed_entry(vals[a], vals[b], theta)) S(a, b) = Complex();
      }
  };
  clean(sd.S_plus, sd.geometry.sigma_plus.center());
  clean(sd.S_minus, sd.geometry.sigma_minus.center());

  // formal monodromy and reconstruction
  sd.formal_monodromy = CMatrix(n, n, Complex());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = sd.columns[i];
    const Complex rho = detail::to_complex(s.rho);
    sd.formal_monodromy(i, i) = cexp(Complex(Real(0), 2 * real_pi()) * rho);
  }
  sd.monodromy_u = sd.formal_monodromy * sd.S_minus * sd.S_plus;
  std::vector<Complex> expected_u, expected_q;
  for (const auto& a : e.alpha()) {
    expected_u.push_back(unit_root(a * Rat(static_cast<long>(d))));
    expected_q.push_back(unit_root(-a));
  }
  sd.u_level_distance = to_double(multiset_distance(eigenvalues(sd.monodromy_u), expected_u));

  if (d == 1) {
    sd.monodromy_q = sd.monodromy_u;
  } else if (d == 2) {
    // half turn u -> -u: psi_c(-u) = e^{-i pi rho_c} psi_{-c}(u), moderate
    // columns pick up e^{-2 pi i beta_j}
    CMatrix Pi(n, n, Complex());
    const std::size_t zero_cols = e.m();
    for (std::size_t i = 0; i < zero_cols; ++i) Pi(i, i) = unit_root(sd.columns[i].beta);
    for (std::size_t i = zero_cols; i < n; ++i) {
      const std::size_t partner = zero_cols + (i - zero_cols + 1) % 2;
      const auto& a = sd.columns[i];
      const auto& b = sd.columns[partner];
      if (a.rho != b.rho) throw Error(ErrorKind::PreconditionViolated, "formal exponents of c and -c differ");
      for (std::size_t k = 0; k < std::min(a.coeffs.size(), b.coeffs.size()); ++k)
        if (b.coeffs[k] != (k % 2 ? -a.coeffs[k] : a.coeffs[k]))
          throw Error(ErrorKind::PreconditionViolated, "formal series of c and -c are not related by u -> -u");
      const Complex rho = detail::to_complex(a.rho);
      Pi(partner, i) = cexp(Complex(Real(0), real_pi()) * rho);
    }
    sd.monodromy_q = Pi * sd.S_plus;
  } else {
    sd.warnings.push_back("q-level reconstruction needs d <= 2; only the u-level monodromy is checked");
  }
  if (sd.monodromy_q) {
    sd.q_level = true;
    sd.reconstructed_eigenvalues = eigenvalues(inverse(*sd.monodromy_q, Complex(Real(1))));
    sd.expected_eigenvalues = expected_q;
  } else {
    sd.reconstructed_eigenvalues = eigenvalues(inverse(sd.monodromy_u, Complex(Real(1))));
    for (const auto& a : e.alpha()) sd.expected_eigenvalues.push_back(unit_root(-a * Rat(static_cast<long>(d))));
  }
  sd.eigenvalue_distance =
      to_double(multiset_distance(sd.reconstructed_eigenvalues, sd.expected_eigenvalues));

  sd.precision.precision_bits = cfg.precision_bits;
  sd.precision.radius = radius;
  sd.precision.truncation_order = sd.frames.order;
  sd.precision.error_bound = bound;
  sd.precision.match_condition = to_double(sd.frames.condition);

  if (cfg.gauge_check && std::isfinite(delta)) {
    auto cols2 = sd.columns;
    auto core2 = detail::stokes_core(e, sd.geometry, cols2, vals, 0.8 * radius, cfg.order, cfg.precision_bits);
    CMatrix a = sd.S_plus, b = sd.S_minus, a2 = core2.S_plus, b2 = core2.S_minus;
    clean(a2, sd.geometry.sigma_plus.center());
    clean(b2, sd.geometry.sigma_minus.center());
    sd.precision.gauge_difference = to_double(std::max(max_abs(a - a2), max_abs(b - b2)));
  }
  if (!sd.formal.katz_closed_form)
    sd.warnings.push_back("Katz conditions fail; factors taken from the characteristic equation");
  return sd;
}

// ---------------------------------------------------------------------------
// Field of definition

struct EntryCheck {
  std::string matrix;
  std::size_t row = 0;
  std::size_t col = 0;
  std::complex<double> value;
  bool real = true;
  std::optional<Rat> rational;
};

struct FieldVerification {
  bool ok = true;
  bool real_checked = false;
  bool rational_checked = false;
  double tolerance = 0;
  CMatrix S_plus_normalized;
  CMatrix S_minus_normalized;
  std::vector<EntryCheck> entries;
};

namespace detail {

/// Best rational approximation with denominator at most bound, by continued
/// fractions, when it lies within tol.
inline std::optional<Rat> nearby_rational(double x, long bound, double tol) {
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double y = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(y);
    if (std::abs(a) > 1e15) break;
    const long ai = static_cast<long>(a);
    const long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > bound) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) return make_rat(h1, k1);
    const double f = y - a;
    if (f < 1e-300) break;
    y = 1.0 / f;
  }
  return std::nullopt;
}

/// Diagonal gauge D^-1 S D setting the entries of a spanning forest of the
/// graph of nonzero off-diagonal entries to 1. Entries of modulus at most
/// noise count as zero and are cleared in the result.
inline std::pair<CMatrix, CMatrix> graded_normalization(const CMatrix& sp, const CMatrix& sm, double noise = 0) {
  const std::size_t n = sp.rows();
  std::vector<std::optional<Complex>> g(n);
  struct Edge {
    std::size_t a, b;
    Complex v;
  };
  std::vector<Edge> edges;
  for (const auto* S : {&sp, &sm})
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b && to_double(abs((*S)(a, b))) > noise) edges.push_back({a, b, (*S)(a, b)});
  for (std::size_t root = 0; root < n; ++root) {
    if (g[root]) continue;
    g[root] = Complex(Real(1));
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& ed : edges) {
        // entry (a, b) becomes v g_b / g_a
        if (g[ed.a] && !g[ed.b]) {
          g[ed.b] = *g[ed.a] / ed.v;
          grew = true;
        } else if (g[ed.b] && !g[ed.a]) {
          g[ed.a] = *g[ed.b] * ed.v;
          grew = true;
        }
      }
    }
  }
  auto apply = [&](const CMatrix& S) {
    CMatrix out = S;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        out(a, b) = a != b && to_double(abs(S(a, b))) <= noise ? Complex() : S(a, b) * *g[b] / *g[a];
    return out;
  };
  return {apply(sp), apply(sm)};
}

}  // namespace detail

/// Checks the Stokes matrices against the field predicted by the criteria:
/// real entries when the real structure test holds, and entries close to
/// rationals of bounded denominator when the rational test holds (reported).
inline FieldVerification verify_field_of_stokes(const StokesData& sd, const CriteriaReport& report, double tol,
                                                long denominator_bound = 1000) {
  FieldVerification fv;
  fv.tolerance = std::max(tol, 10 * sd.precision.error_bound);
  auto [np, nm] = detail::graded_normalization(sd.S_plus, sd.S_minus, 10 * sd.precision.error_bound);
  fv.S_plus_normalized = np;
  fv.S_minus_normalized = nm;
  fv.real_checked = report.real_structure;
  fv.rational_checked = report.rational_structure;
  const std::pair<const char*, const CMatrix*> mats[] = {{"S_plus", &np}, {"S_minus", &nm}};
  for (const auto& [name, M] : mats)
    for (std::size_t a = 0; a < M->rows(); ++a)
      for (std::size_t b = 0; b < M->cols(); ++b) {
        EntryCheck ec;
        ec.matrix = name;
        ec.row = a;
        ec.col = b;
        ec.value = to_std((*M)(a, b));
        ec.real = std::abs(ec.value.imag()) < fv.tolerance;
        if (ec.real) ec.rational = detail::nearby_rational(ec.value.real(), denominator_bound, fv.tolerance);
        if (fv.real_checked && !ec.real) fv.ok = false;
        if (fv.rational_checked && !(ec.real && ec.rational)) fv.ok = false;
        fv.entries.push_back(ec);
      }
  return fv;
}

}  // namespace hgb
