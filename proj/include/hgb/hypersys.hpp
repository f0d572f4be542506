#pragma once

// Hypergeometric systems H(alpha; beta): exponent data, the operator
// prod(theta - alpha_i) - q prod(theta - beta_j), normalization, irreducibility
// and the exchange of the two exponent lists when n < m.

#include <algorithm>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hgb/cyclotomic.hpp"
#include "hgb/errors.hpp"
#include "hgb/rational.hpp"

namespace hgb {

class ExponentData {
 public:
  ExponentData() = default;

  /// Exponents must already lie in [0, 1); they are stored sorted.
  ExponentData(std::vector<Rat> alpha, std::vector<Rat> beta) : alpha_(std::move(alpha)), beta_(std::move(beta)) {
    for (const auto* list : {&alpha_, &beta_})
      for (const auto& x : *list)
        if (x < 0 || x >= 1)
          throw Error(ErrorKind::InvalidExponent, "exponent " + x.get_str() + " outside [0, 1)");
    if (alpha_.empty() && beta_.empty()) throw Error(ErrorKind::InvalidExponent, "no exponents given");
    std::sort(alpha_.begin(), alpha_.end());
    std::sort(beta_.begin(), beta_.end());
    conductor_ = 1;
    for (const auto* list : {&alpha_, &beta_})
      for (const auto& x : *list) conductor_ = lcm_long(conductor_, to_long(x.get_den()));
  }

  const std::vector<Rat>& alpha() const { return alpha_; }
  const std::vector<Rat>& beta() const { return beta_; }
  std::size_t n() const { return alpha_.size(); }
  std::size_t m() const { return beta_.size(); }
  std::size_t N() const { return n() + m(); }
  std::size_t r() const { return static_cast<std::size_t>(std::count(beta_.begin(), beta_.end(), Rat(0))); }
  std::size_t s() const { return static_cast<std::size_t>(std::count(alpha_.begin(), alpha_.end(), Rat(0))); }
  long conductor() const { return conductor_; }

  friend bool operator==(const ExponentData& a, const ExponentData& b) {
    return a.alpha_ == b.alpha_ && a.beta_ == b.beta_;
  }

 private:
  std::vector<Rat> alpha_;
  std::vector<Rat> beta_;
  long conductor_ = 1;
};

inline std::string to_string(const std::vector<Rat>& xs) {
  std::string s = "(";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i].get_str();
  return s + ")";
}

/// Replaces every exponent by its fractional part.
inline ExponentData normalize(const std::vector<Rat>& raw_alpha, const std::vector<Rat>& raw_beta) {
  std::vector<Rat> a, b;
  for (const auto& x : raw_alpha) a.push_back(frac(x));
  for (const auto& x : raw_beta) b.push_back(frac(x));
  return ExponentData(std::move(a), std::move(b));
}

/// Monic polynomial prod (t - x_i) with rational coefficients, ascending.
inline RatPoly theta_poly(const std::vector<Rat>& roots) {
  RatPoly p{Rat(1)};
  for (const auto& x : roots) p = detail::poly_mul(p, RatPoly{-x, Rat(1)});
  return p;
}

struct OperatorTerm {
  int q_power;
  int theta_power;
  Rat coeff;
  friend bool operator==(const OperatorTerm& a, const OperatorTerm& b) {
    return a.q_power == b.q_power && a.theta_power == b.theta_power && a.coeff == b.coeff;
  }
};

struct HyperOperator {
  RatPoly theta_poly_a;
  RatPoly theta_poly_b;
  /// Nonzero terms q^i theta^j, sorted by (q power, theta power descending).
  std::vector<OperatorTerm> normal_form;
};

inline HyperOperator build_operator(const ExponentData& e) {
  HyperOperator op{theta_poly(e.alpha()), theta_poly(e.beta()), {}};
  for (std::size_t j = op.theta_poly_a.size(); j-- > 0;)
    if (sgn(op.theta_poly_a[j]) != 0) op.normal_form.push_back({0, static_cast<int>(j), op.theta_poly_a[j]});
  for (std::size_t j = op.theta_poly_b.size(); j-- > 0;)
    if (sgn(op.theta_poly_b[j]) != 0) op.normal_form.push_back({1, static_cast<int>(j), -op.theta_poly_b[j]});
  return op;
}

/// Recovers the two theta polynomials from the normal form.
inline std::pair<RatPoly, RatPoly> split_normal_form(const std::vector<OperatorTerm>& terms) {
  RatPoly a, b;
  for (const auto& t : terms) {
    RatPoly& p = t.q_power == 0 ? a : b;
    if (p.size() <= static_cast<std::size_t>(t.theta_power)) p.resize(static_cast<std::size_t>(t.theta_power) + 1, Rat(0));
    p[static_cast<std::size_t>(t.theta_power)] = t.q_power == 0 ? t.coeff : Rat(-t.coeff);
  }
  return {a, b};
}

inline std::string to_string(const HyperOperator& op) {
  auto poly = [](const RatPoly& p) {
    std::string s;
    for (std::size_t j = p.size(); j-- > 0;) {
      if (sgn(p[j]) == 0) continue;
      Rat c = p[j];
      std::string sign = sgn(c) < 0 ? " - " : (s.empty() ? "" : " + ");
      if (s.empty() && sgn(c) < 0) sign = "-";
      Rat a = abs(c);
      std::string mon = j == 0 ? "" : (j == 1 ? "θ" : "θ^" + std::to_string(j));
      std::string coef = (a == 1 && j > 0) ? "" : a.get_str();
      s += sign + coef + mon;
    }
    return s.empty() ? std::string("0") : s;
  };
  return "[" + poly(op.theta_poly_a) + "] - q[" + poly(op.theta_poly_b) + "]";
}

/// No alpha_i equals a beta_j (values already reduced modulo 1).
inline bool is_irreducible(const ExponentData& e) {
  for (const auto& a : e.alpha())
    if (std::binary_search(e.beta().begin(), e.beta().end(), a)) return false;
  return true;
}

struct TransformRecord {
  bool applied = false;
  /// Degree of the Kummer pullback composed with the inversion q -> 1/q.
  std::size_t kummer_degree = 0;
  std::string description;
};

/// For n < m, replaces H(alpha; beta) by H(-beta; -alpha).
inline std::pair<ExponentData, TransformRecord> swap_if_needed(const ExponentData& e) {
  if (e.n() >= e.m()) return {e, {}};
  std::vector<Rat> na, nb;
  for (const auto& b : e.beta()) na.push_back(-b);
  for (const auto& a : e.alpha()) nb.push_back(-a);
  ExponentData swapped = normalize(na, nb);
  TransformRecord rec;
  rec.applied = true;
  rec.kummer_degree = swapped.n() - swapped.m() + 1;
  rec.description = "inversion q -> 1/q followed by Kummer pullback of degree " + std::to_string(rec.kummer_degree);
  return {swapped, rec};
}

enum class SystemKind { Regular, ConfluentAtInfinity, ConfluentSwapped };

inline std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::Regular: return "regular";
    case SystemKind::ConfluentAtInfinity: return "confluent-at-infinity";
    case SystemKind::ConfluentSwapped: return "confluent-swapped";
  }
  return "unknown";
}

struct SystemClass {
  SystemKind kind;
  bool irreducible;
};

inline SystemClass classify(const ExponentData& e) {
  SystemKind k = e.n() == e.m() ? SystemKind::Regular
                 : e.n() > e.m() ? SystemKind::ConfluentAtInfinity
                                 : SystemKind::ConfluentSwapped;
  return {k, is_irreducible(e)};
}

}  // namespace hgb
