#pragma once

// Cyclotomic fields Q(zeta_c) in the power basis modulo Phi_c, the unit group
// (Z/cZ)^* acting by zeta -> zeta^g, and subgroups with their fixed fields.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hgb/errors.hpp"
#include "hgb/linalg.hpp"
#include "hgb/numeric.hpp"
#include "hgb/rational.hpp"

namespace hgb {

/// Integer polynomial, ascending coefficients.
using IntPoly = std::vector<BigInt>;
/// Rational polynomial, ascending coefficients.
using RatPoly = std::vector<Rat>;

namespace detail {

inline void trim_poly(RatPoly& p) {
  while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

inline RatPoly poly_mul(const RatPoly& a, const RatPoly& b) {
  if (a.empty() || b.empty()) return {};
  RatPoly out(a.size() + b.size() - 1, Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  trim_poly(out);
  return out;
}

inline RatPoly poly_sub(RatPoly a, const RatPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rat(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  trim_poly(a);
  return a;
}

/// Quotient and remainder of a by a nonzero b.
inline std::pair<RatPoly, RatPoly> poly_divmod(RatPoly a, const RatPoly& b) {
  trim_poly(a);
  if (a.size() < b.size()) return {{}, a};
  RatPoly q(a.size() - b.size() + 1, Rat(0));
  const Rat lead = b.back();
  const long shift = static_cast<long>(b.size()) - 1;
  for (long i = static_cast<long>(a.size()) - 1; i >= shift; --i) {
    Rat t = a[static_cast<std::size_t>(i)] / lead;
    q[static_cast<std::size_t>(i - shift)] = t;
    if (sgn(t) != 0)
      for (std::size_t j = 0; j < b.size(); ++j) a[static_cast<std::size_t>(i - shift) + j] -= t * b[j];
  }
  trim_poly(a);
  trim_poly(q);
  return {q, a};
}

/// Integer numerators of xs over their least common denominator den.
inline IntPoly scaled_numerators(const std::vector<Rat>& xs, BigInt& den) {
  den = 1;
  for (const auto& x : xs)
    if (sgn(x) != 0) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
  IntPoly out(xs.size(), BigInt(0));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (sgn(xs[i]) == 0) continue;
    mpz_divexact(out[i].get_mpz_t(), den.get_mpz_t(), xs[i].get_den_mpz_t());
    out[i] *= xs[i].get_num();
  }
  return out;
}

inline IntPoly int_poly_exact_div(IntPoly a, const IntPoly& b) {
  IntPoly q(a.size() - b.size() + 1, BigInt(0));
  const long shift = static_cast<long>(b.size()) - 1;
  for (long i = static_cast<long>(a.size()) - 1; i >= shift; --i) {
    BigInt t = a[static_cast<std::size_t>(i)] / b.back();
    q[static_cast<std::size_t>(i - shift)] = t;
    for (std::size_t j = 0; j < b.size(); ++j) a[static_cast<std::size_t>(i - shift) + j] -= t * b[j];
  }
  return q;
}

}  // namespace detail

/// The c-th cyclotomic polynomial, computed as (x^c - 1) / prod_{d | c, d < c} Phi_d.
inline IntPoly cyclotomic_poly(long c) {
  if (c < 1) throw Error(ErrorKind::PreconditionViolated, "conductor must be positive");
  static std::mutex mu;
  static std::map<long, IntPoly> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
  }
  IntPoly p(static_cast<std::size_t>(c) + 1, BigInt(0));
  p[0] = -1;
  p[static_cast<std::size_t>(c)] = 1;
  for (long d = 1; d < c; ++d)
    if (c % d == 0) p = detail::int_poly_exact_div(p, cyclotomic_poly(d));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(c, p);
  return p;
}

/// Shared description of Q(zeta_c): Phi_c and the reductions of zeta^k, k < c.
struct CycField {
  long conductor = 1;
  std::size_t degree = 1;
  RatPoly modulus;
  IntPoly int_modulus;
  std::vector<std::vector<Rat>> powers;
};

inline std::shared_ptr<const CycField> cyc_field(long c) {
  if (c < 1) throw Error(ErrorKind::PreconditionViolated, "conductor must be positive");
  static std::mutex mu;
  static std::map<long, std::shared_ptr<const CycField>> registry;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = registry.find(c);
    if (it != registry.end()) return it->second;
  }
  auto f = std::make_shared<CycField>();
  f->conductor = c;
  IntPoly phi = cyclotomic_poly(c);
  f->degree = phi.size() - 1;
  for (const auto& z : phi) f->modulus.push_back(Rat(z));
  f->int_modulus = phi;
  const std::size_t deg = f->degree;
  std::vector<Rat> cur(deg, Rat(0));
  cur[0] = 1;
  for (long k = 0; k < c; ++k) {
    f->powers.push_back(cur);
    // multiply by x and reduce with the monic modulus
    Rat top = cur[deg - 1];
    for (std::size_t i = deg - 1; i > 0; --i) cur[i] = cur[i - 1];
    cur[0] = 0;
    if (sgn(top) != 0)
      for (std::size_t i = 0; i < deg; ++i) cur[i] -= top * f->modulus[i];
  }
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = registry.emplace(c, f);
  return it->second;
}

class CycNum {
 public:
  CycNum() : CycNum(1) {}
  explicit CycNum(long conductor) : field_(cyc_field(conductor)), coeffs_(field_->degree, Rat(0)) {}

  static CycNum zero(long c) { return CycNum(c); }
  static CycNum one(long c) { return rational(c, Rat(1)); }
  static CycNum rational(long c, const Rat& value) {
    CycNum x(c);
    x.coeffs_[0] = value;
    return x;
  }
  static CycNum zeta(long c, long k = 1) {
    CycNum x(c);
    x.coeffs_ = x.field_->powers[static_cast<std::size_t>(mod_pos(k, c))];
    return x;
  }
  /// Reduces an arbitrary-length coefficient vector modulo Phi_c.
  static CycNum from_coeffs(long c, const std::vector<Rat>& coeffs) {
    CycNum x(c);
    const auto& f = *x.field_;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (sgn(coeffs[k]) == 0) continue;
      const auto& pw = f.powers[k % static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < f.degree; ++i) x.coeffs_[i] += coeffs[k] * pw[i];
    }
    return x;
  }

  long conductor() const { return field_->conductor; }
  std::size_t degree() const { return field_->degree; }
  const std::vector<Rat>& coeffs() const { return coeffs_; }
  const CycField& field() const { return *field_; }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Rat& r) { return sgn(r) == 0; });
  }
  bool is_rational() const {
    for (std::size_t i = 1; i < coeffs_.size(); ++i)
      if (sgn(coeffs_[i]) != 0) return false;
    return true;
  }
  const Rat& rational_part() const { return coeffs_[0]; }
  std::size_t nonzero_terms() const {
    return static_cast<std::size_t>(
        std::count_if(coeffs_.begin(), coeffs_.end(), [](const Rat& r) { return sgn(r) != 0; }));
  }

  friend CycNum operator+(const CycNum& a, const CycNum& b) {
    a.check_same(b);
    CycNum out = a;
    for (std::size_t i = 0; i < out.coeffs_.size(); ++i) out.coeffs_[i] += b.coeffs_[i];
    return out;
  }
  friend CycNum operator-(const CycNum& a, const CycNum& b) {
    a.check_same(b);
    CycNum out = a;
    for (std::size_t i = 0; i < out.coeffs_.size(); ++i) out.coeffs_[i] -= b.coeffs_[i];
    return out;
  }
  friend CycNum operator-(const CycNum& a) {
    CycNum out = a;
    for (auto& x : out.coeffs_) x = -x;
    return out;
  }
  friend CycNum operator*(const CycNum& a, const CycNum& b) {
    a.check_same(b);
    if (a.is_rational()) return b * a.coeffs_[0];
    if (b.is_rational()) return a * b.coeffs_[0];
    // integer product over the common denominator, reduced by the monic Phi_c
    BigInt da, db;
    const IntPoly ia = detail::scaled_numerators(a.coeffs_, da);
    const IntPoly ib = detail::scaled_numerators(b.coeffs_, db);
    IntPoly p(ia.size() + ib.size() - 1, BigInt(0));
    for (std::size_t i = 0; i < ia.size(); ++i) {
      if (sgn(ia[i]) == 0) continue;
      for (std::size_t j = 0; j < ib.size(); ++j)
        if (sgn(ib[j]) != 0) mpz_addmul(p[i + j].get_mpz_t(), ia[i].get_mpz_t(), ib[j].get_mpz_t());
    }
    const IntPoly& mod = a.field_->int_modulus;
    const std::size_t deg = a.degree();
    for (std::size_t i = p.size(); i-- > deg;) {
      if (sgn(p[i]) == 0) continue;
      const BigInt t = p[i];
      for (std::size_t j = 0; j <= deg; ++j)
        if (sgn(mod[j]) != 0) mpz_submul(p[i - deg + j].get_mpz_t(), t.get_mpz_t(), mod[j].get_mpz_t());
    }
    const BigInt den = da * db;
    CycNum out(a.conductor());
    for (std::size_t i = 0; i < deg && i < p.size(); ++i)
      if (sgn(p[i]) != 0) out.coeffs_[i] = make_rat(p[i], den);
    return out;
  }
  friend CycNum operator*(const CycNum& a, const Rat& s) {
    CycNum out = a;
    for (auto& x : out.coeffs_) x *= s;
    return out;
  }
  friend CycNum operator/(const CycNum& a, const CycNum& b) { return a * b.inv(); }

  CycNum& operator+=(const CycNum& b) { return *this = *this + b; }
  CycNum& operator-=(const CycNum& b) { return *this = *this - b; }
  CycNum& operator*=(const CycNum& b) { return *this = *this * b; }

  /// Multiplicative inverse through the extended Euclidean algorithm in Q[x].
  CycNum inv() const {
    if (is_zero()) throw Error(ErrorKind::DivisionByZero, "inverse of zero in Q(zeta_" + std::to_string(conductor()) + ")");
    if (is_rational()) return rational(conductor(), Rat(1) / coeffs_[0]);
    RatPoly r0 = field_->modulus, r1 = coeffs_;
    detail::trim_poly(r1);
    RatPoly t0, t1{Rat(1)};
    while (!(r1.size() == 1)) {
      auto [q, r] = detail::poly_divmod(r0, r1);
      RatPoly t2 = detail::poly_sub(t0, detail::poly_mul(q, t1));
      r0 = std::move(r1);
      r1 = std::move(r);
      t0 = std::move(t1);
      t1 = std::move(t2);
    }
    Rat scale = Rat(1) / r1[0];
    for (auto& x : t1) x *= scale;
    return reduce(conductor(), std::move(t1));
  }

  friend bool operator==(const CycNum& a, const CycNum& b) {
    return a.conductor() == b.conductor() && a.coeffs_ == b.coeffs_;
  }
  friend bool operator!=(const CycNum& a, const CycNum& b) { return !(a == b); }

 private:
  static CycNum reduce(long c, RatPoly p) {
    CycNum out(c);
    const auto& mod = out.field_->modulus;
    const std::size_t deg = out.field_->degree;
    for (std::size_t i = p.size(); i-- > deg;) {
      Rat t = p[i];
      if (sgn(t) == 0) continue;
      for (std::size_t j = 0; j <= deg; ++j) p[i - deg + j] -= t * mod[j];
    }
    for (std::size_t i = 0; i < deg && i < p.size(); ++i) out.coeffs_[i] = p[i];
    return out;
  }

  void check_same(const CycNum& b) const {
    if (conductor() != b.conductor())
      throw Error(ErrorKind::ConductorMismatch,
                  std::to_string(conductor()) + " vs " + std::to_string(b.conductor()));
  }

  std::shared_ptr<const CycField> field_;
  std::vector<Rat> coeffs_;
};

inline bool is_zero(const CycNum& x) { return x.is_zero(); }
inline CycNum zero_like(const CycNum& x) { return CycNum::zero(x.conductor()); }
inline CycNum one_like(const CycNum& x) { return CycNum::one(x.conductor()); }
/// Prefers pivots with few nonzero coordinates to limit coefficient growth.
inline double pivot_score(const CycNum& x) {
  std::size_t nz = x.nonzero_terms();
  return nz == 0 ? 0.0 : 1.0 / static_cast<double>(nz);
}

using CycMatrix = Matrix<CycNum>;

/// Term list "a/b·ζ^k" for every nonzero coordinate.
inline std::vector<std::string> term_list(const CycNum& x) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < x.coeffs().size(); ++k)
    if (sgn(x.coeffs()[k]) != 0) out.push_back(x.coeffs()[k].get_str() + "·ζ^" + std::to_string(k));
  return out;
}

inline std::string to_string(const CycNum& x) {
  if (x.is_rational()) return x.rational_part().get_str();
  std::string s;
  for (std::size_t k = 0; k < x.coeffs().size(); ++k) {
    const Rat& a = x.coeffs()[k];
    if (sgn(a) == 0) continue;
    std::string term = k == 0 ? a.get_str()
                              : (a == 1 ? "" : (a == -1 ? "-" : a.get_str() + "*")) + "z" +
                                    std::to_string(x.conductor()) + (k == 1 ? "" : "^" + std::to_string(k));
    if (!s.empty() && term[0] != '-') s += "+";
    s += term;
  }
  return s;
}

/// Image under zeta_c -> zeta_{c'}^{c'/c}.
inline CycNum rebase_conductor(const CycNum& a, long target) {
  const long c = a.conductor();
  if (target < 1 || target % c != 0)
    throw Error(ErrorKind::NotAMultiple, std::to_string(c) + " does not divide " + std::to_string(target));
  if (target == c) return a;
  const long m = target / c;
  CycNum out(target);
  std::vector<Rat> coeffs(static_cast<std::size_t>(target), Rat(0));
  for (std::size_t k = 0; k < a.coeffs().size(); ++k) coeffs[(static_cast<long>(k) * m) % target] += a.coeffs()[k];
  return CycNum::from_coeffs(target, coeffs);
}

/// Inverse of rebase_conductor: expresses an element of Q(zeta_c') lying in
/// the subfield Q(zeta_c) in the power basis of Q(zeta_c).
inline CycNum restrict_conductor(const CycNum& a, long target) {
  const long big = a.conductor();
  if (target < 1 || big % target != 0)
    throw Error(ErrorKind::NotAMultiple, std::to_string(target) + " does not divide " + std::to_string(big));
  const auto small = cyc_field(target);
  Matrix<Rat> r(a.degree(), small->degree, Rat(0));
  for (std::size_t k = 0; k < small->degree; ++k) {
    CycNum img = rebase_conductor(CycNum::zeta(target, static_cast<long>(k)), big);
    for (std::size_t i = 0; i < a.degree(); ++i) r(i, k) = img.coeffs()[i];
  }
  Matrix<Rat> rhs(a.degree(), 1, Rat(0));
  for (std::size_t i = 0; i < a.degree(); ++i) rhs(i, 0) = a.coeffs()[i];
  auto x = solve(r, rhs, Rat(0));
  if (!x) throw Error(ErrorKind::PreconditionViolated, "element does not lie in Q(zeta_" + std::to_string(target) + ")");
  std::vector<Rat> coeffs(small->degree);
  for (std::size_t k = 0; k < small->degree; ++k) coeffs[k] = (*x)(k, 0);
  return CycNum::from_coeffs(target, coeffs);
}

inline long gcd_long(long a, long b) { return std::gcd(a, b); }
inline long lcm_long(long a, long b) { return a / std::gcd(a, b) * b; }

/// Residues 1 <= g < c coprime to c; the group is {1} for c <= 2.
inline std::vector<long> unit_residues(long c) {
  if (c <= 2) return {1};
  std::vector<long> out;
  for (long g = 1; g < c; ++g)
    if (std::gcd(g, c) == 1) out.push_back(g);
  return out;
}

inline long mul_mod(long a, long b, long c) { return c <= 2 ? 1 : (a * b) % c; }

struct UnitMod {
  long conductor = 1;
  long value = 1;

  UnitMod() = default;
  UnitMod(long c, long g) : conductor(c), value(c <= 2 ? 1 : mod_pos(g, c)) {
    if (c < 1) throw Error(ErrorKind::PreconditionViolated, "conductor must be positive");
    if (c > 2 && std::gcd(value, c) != 1)
      throw Error(ErrorKind::PreconditionViolated, std::to_string(g) + " is not a unit mod " + std::to_string(c));
  }

  friend UnitMod operator*(const UnitMod& a, const UnitMod& b) {
    if (a.conductor != b.conductor) throw Error(ErrorKind::ConductorMismatch, "unit conductors differ");
    return UnitMod(a.conductor, mul_mod(a.value, b.value, a.conductor));
  }
  friend bool operator==(const UnitMod& a, const UnitMod& b) {
    return a.conductor == b.conductor && a.value == b.value;
  }

  UnitMod inverse() const {
    for (long h : unit_residues(conductor))
      if (mul_mod(value, h, conductor) == 1) return UnitMod(conductor, h);
    return *this;
  }
};

class GaloisSubgroup {
 public:
  GaloisSubgroup() = default;

  static GaloisSubgroup trivial(long c) { return GaloisSubgroup(c, {1}); }
  static GaloisSubgroup full(long c) { return GaloisSubgroup(c, unit_residues(c)); }
  static GaloisSubgroup generated_by(long c, const std::vector<long>& gens) {
    std::set<long> elems{1};
    std::vector<long> frontier{1};
    std::vector<long> norm;
    for (long g : gens) norm.push_back(UnitMod(c, g).value);
    while (!frontier.empty()) {
      std::vector<long> next;
      for (long x : frontier)
        for (long g : norm) {
          long y = mul_mod(x, g, c);
          if (elems.insert(y).second) next.push_back(y);
        }
      frontier = std::move(next);
    }
    return GaloisSubgroup(c, std::vector<long>(elems.begin(), elems.end()));
  }
  /// Validates closure; throws PreconditionViolated otherwise.
  static GaloisSubgroup from_elements(long c, std::vector<long> elems) {
    for (auto& g : elems) g = UnitMod(c, g).value;
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    if (elems.empty() || elems.front() != 1)
      throw Error(ErrorKind::PreconditionViolated, "subgroup must contain 1");
    for (long a : elems)
      for (long b : elems)
        if (!std::binary_search(elems.begin(), elems.end(), mul_mod(a, b, c)))
          throw Error(ErrorKind::PreconditionViolated, "set is not closed under multiplication");
    return GaloisSubgroup(c, std::move(elems));
  }

  long conductor() const { return conductor_; }
  const std::vector<long>& elements() const { return elements_; }
  std::size_t order() const { return elements_.size(); }
  bool contains(long g) const {
    if (conductor_ <= 2) return true;
    return std::binary_search(elements_.begin(), elements_.end(), mod_pos(g, conductor_));
  }
  bool is_full() const { return elements_.size() == unit_residues(conductor_).size(); }

  /// Greedy generating set: scan elements in increasing order and keep those
  /// not already generated.
  std::vector<long> generators() const {
    std::vector<long> gens;
    GaloisSubgroup span = trivial(conductor_);
    for (long g : elements_) {
      if (span.contains(g)) continue;
      gens.push_back(g);
      span = generated_by(conductor_, gens);
    }
    return gens;
  }

  friend bool operator==(const GaloisSubgroup& a, const GaloisSubgroup& b) {
    return a.conductor_ == b.conductor_ && a.elements_ == b.elements_;
  }

 private:
  GaloisSubgroup(long c, std::vector<long> elems) : conductor_(c), elements_(std::move(elems)) {}

  long conductor_ = 1;
  std::vector<long> elements_{1};
};

/// Every subgroup of (Z/cZ)^*, ordered by size then elements.
inline std::vector<GaloisSubgroup> all_subgroups(long c) {
  std::set<std::vector<long>> seen;
  std::vector<GaloisSubgroup> out;
  std::vector<GaloisSubgroup> frontier{GaloisSubgroup::trivial(c)};
  seen.insert(frontier[0].elements());
  out.push_back(frontier[0]);
  const auto units = unit_residues(c);
  while (!frontier.empty()) {
    std::vector<GaloisSubgroup> next;
    for (const auto& h : frontier)
      for (long g : units) {
        if (h.contains(g)) continue;
        auto gens = h.generators();
        gens.push_back(g);
        auto bigger = GaloisSubgroup::generated_by(c, gens);
        if (seen.insert(bigger.elements()).second) {
          out.push_back(bigger);
          next.push_back(bigger);
        }
      }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end(), [](const GaloisSubgroup& a, const GaloisSubgroup& b) {
    return a.order() != b.order() ? a.order() < b.order() : a.elements() < b.elements();
  });
  return out;
}

/// sigma_g : zeta_c -> zeta_c^g.
inline CycNum galois_apply(const UnitMod& g, const CycNum& a) {
  const long c = a.conductor();
  if (g.conductor != c && !(c <= 2 && g.conductor <= 2))
    throw Error(ErrorKind::ConductorMismatch, "automorphism and element have different conductors");
  if (g.value == 1 || a.is_rational()) return a;
  std::vector<Rat> coeffs(static_cast<std::size_t>(c), Rat(0));
  for (std::size_t k = 0; k < a.coeffs().size(); ++k)
    coeffs[static_cast<std::size_t>((static_cast<long>(k) * g.value) % c)] += a.coeffs()[k];
  return CycNum::from_coeffs(c, coeffs);
}

inline CycNum galois_apply(long g, const CycNum& a) { return galois_apply(UnitMod(a.conductor(), g), a); }

inline bool is_fixed_by(const CycNum& a, const GaloisSubgroup& G) {
  if (G.conductor() != a.conductor())
    throw Error(ErrorKind::ConductorMismatch, "subgroup and element have different conductors");
  for (long g : G.elements())
    if (galois_apply(g, a) != a) return false;
  return true;
}

inline CycMatrix galois_apply(long g, const CycMatrix& m) {
  return m.map([g](const CycNum& x) { return galois_apply(g, x); });
}

inline bool is_fixed_by(const CycMatrix& m, const GaloisSubgroup& G) {
  for (const auto& x : m.data())
    if (!is_fixed_by(x, G)) return false;
  return true;
}

/// Q-linear matrix of sigma_g on the power basis of Q(zeta_c).
inline Matrix<Rat> galois_matrix(long g, long c) {
  const auto f = cyc_field(c);
  Matrix<Rat> m(f->degree, f->degree, Rat(0));
  for (std::size_t k = 0; k < f->degree; ++k) {
    CycNum img = galois_apply(g, CycNum::zeta(c, static_cast<long>(k)));
    for (std::size_t i = 0; i < f->degree; ++i) m(i, k) = img.coeffs()[i];
  }
  return m;
}

/// Q-linear matrix of multiplication by a on the power basis.
inline Matrix<Rat> mul_matrix(const CycNum& a) {
  const long c = a.conductor();
  Matrix<Rat> m(a.degree(), a.degree(), Rat(0));
  for (std::size_t k = 0; k < a.degree(); ++k) {
    CycNum img = a * CycNum::zeta(c, static_cast<long>(k));
    for (std::size_t i = 0; i < a.degree(); ++i) m(i, k) = img.coeffs()[i];
  }
  return m;
}

/// Q-basis of the fixed field L^G, as coordinate columns.
inline Matrix<Rat> fixed_field_basis(const GaloisSubgroup& G) {
  const long c = G.conductor();
  const auto f = cyc_field(c);
  // fixed vectors are the kernel of (sigma_g - I) for every generator
  std::vector<std::vector<Rat>> rows;
  for (long g : G.generators()) {
    Matrix<Rat> d = galois_matrix(g, c) - Matrix<Rat>::identity(f->degree, Rat(0));
    for (std::size_t i = 0; i < d.rows(); ++i) {
      std::vector<Rat> row(f->degree);
      for (std::size_t j = 0; j < f->degree; ++j) row[j] = d(i, j);
      rows.push_back(row);
    }
  }
  Matrix<Rat> sys(rows.size(), f->degree, Rat(0));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < f->degree; ++j) sys(i, j) = rows[i][j];
  return nullspace(sys, Rat(0));
}

/// Sum of zeta^g over g in G: a convenient element of the fixed field.
inline CycNum orbit_sum(const GaloisSubgroup& G) {
  const long c = G.conductor();
  CycNum s(c);
  for (long g : G.elements()) s += CycNum::zeta(c, g);
  return s;
}

/// Value of the element under zeta_c -> exp(2 pi i / c) at the given precision.
inline Complex embed_complex(const CycNum& a, unsigned precision_bits) {
  PrecisionGuard guard(precision_bits + 16);
  Complex z;
  for (std::size_t k = 0; k < a.coeffs().size(); ++k) {
    if (sgn(a.coeffs()[k]) == 0) continue;
    z += unit_root(make_rat(static_cast<long>(k), a.conductor())) * to_real(a.coeffs()[k]);
  }
  return z;
}

/// Ring homomorphism from the p-integral elements of Q(zeta_c) onto F_p for a
/// prime p = 1 mod c, sending zeta_c to a primitive c-th root of unity omega.
/// Ranks can only drop under reduction, so a full rank modulo p certifies
/// full rank over Q(zeta_c).
class ModpReduction {
 public:
  explicit ModpReduction(long c, std::uint64_t start = (1ULL << 31)) {
    std::uint64_t k = start / static_cast<std::uint64_t>(c) + 1;
    for (;; ++k) {
      p_ = k * static_cast<std::uint64_t>(c) + 1;
      if (is_prime(p_)) break;
    }
    std::vector<long> primes;
    for (long q = 2, rest = c; rest > 1; ++q)
      if (rest % q == 0) {
        primes.push_back(q);
        while (rest % q == 0) rest /= q;
      }
    for (std::uint64_t a = 2;; ++a) {
      omega_ = pow_mod(a, (p_ - 1) / static_cast<std::uint64_t>(c));
      bool primitive = true;
      for (long q : primes) primitive = primitive && pow_mod(omega_, static_cast<std::uint64_t>(c / q)) != 1;
      if (primitive) break;
    }
  }

  std::uint64_t prime() const { return p_; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p_);
  }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return (a + b) % p_; }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return (a + p_ - b) % p_; }
  std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e) const {
    std::uint64_t r = 1;
    a %= p_;
    for (; e; e >>= 1, a = mul(a, a))
      if (e & 1) r = mul(r, a);
    return r;
  }
  std::uint64_t inv(std::uint64_t a) const { return pow_mod(a, p_ - 2); }

  /// Image of x, or nothing when a denominator is divisible by p.
  std::optional<std::uint64_t> reduce(const CycNum& x) const {
    std::uint64_t out = 0, w = 1;
    for (const auto& q : x.coeffs()) {
      if (sgn(q) != 0) {
        auto num = reduce_int(q.get_num());
        auto den = reduce_int(q.get_den());
        if (den == 0) return std::nullopt;
        out = add(out, mul(w, mul(num, inv(den))));
      }
      w = mul(w, omega_);
    }
    return out;
  }

  /// Rank of a matrix over F_p given as rows.
  std::size_t rank(std::vector<std::vector<std::uint64_t>> rows) const {
    std::size_t r = 0;
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t col = 0; col < cols && r < rows.size(); ++col) {
      std::size_t piv = r;
      while (piv < rows.size() && rows[piv][col] == 0) ++piv;
      if (piv == rows.size()) continue;
      std::swap(rows[piv], rows[r]);
      const std::uint64_t iv = inv(rows[r][col]);
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][col] == 0) continue;
        const std::uint64_t f = mul(rows[i][col], iv);
        for (std::size_t j = col; j < cols; ++j) rows[i][j] = sub(rows[i][j], mul(f, rows[r][j]));
      }
      ++r;
    }
    return r;
  }

 private:
  static bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  }
  std::uint64_t reduce_int(const BigInt& z) const {
    BigInt r = z % BigInt(std::to_string(p_));
    if (sgn(r) < 0) r += BigInt(std::to_string(p_));
    return std::stoull(r.get_str());
  }

  std::uint64_t p_ = 0;
  std::uint64_t omega_ = 1;
};

}  // namespace hgb
