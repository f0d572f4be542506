#pragma once

// Galois-stability criteria for exponent data: the action delta -> frac(g delta)
// of (Z/cZ)^* on the exponent multisets, the largest subgroup stabilizing both,
// the real and rational structure tests, the weighted projective
// decomposition and the permutation invariance of the Laurent polynomial
//   f = x_{r+1} + ... + x_m + 1/x_{m+1} + ... + 1/x_N + q x_{r+1} ... x_N.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hgb/cyclotomic.hpp"
#include "hgb/errors.hpp"
#include "hgb/hypersys.hpp"

namespace hgb {

/// delta -> frac(g delta).
inline Rat act(long g, const Rat& delta) { return frac(Rat(g) * delta); }

inline std::vector<Rat> act(long g, std::vector<Rat> xs) {
  for (auto& x : xs) x = act(g, x);
  std::sort(xs.begin(), xs.end());
  return xs;
}

/// (M, N) = (beta multiset, alpha multiset), zeros included.
inline std::pair<std::vector<Rat>, std::vector<Rat>> orbit_sets(const ExponentData& e) {
  return {e.beta(), e.alpha()};
}

namespace detail {

inline bool stabilizes(long g, const ExponentData& e) {
  return act(g, e.alpha()) == e.alpha() && act(g, e.beta()) == e.beta();
}

inline void check_conductor(const ExponentData& e, const GaloisSubgroup& G) {
  if (G.conductor() % e.conductor() != 0)
    throw Error(ErrorKind::ConductorMismatch, "subgroup conductor " + std::to_string(G.conductor()) +
                                                  " is not a multiple of " + std::to_string(e.conductor()));
}

}  // namespace detail

inline bool is_g_good(const ExponentData& e, const GaloisSubgroup& G) {
  detail::check_conductor(e, G);
  for (long g : G.elements())
    if (!detail::stabilizes(g, e)) return false;
  return true;
}

/// All g in (Z/cZ)^* stabilizing both multisets. Closure is verified.
inline GaloisSubgroup max_good_subgroup(const ExponentData& e) {
  const long c = e.conductor();
  std::vector<long> keep;
  for (long g : unit_residues(c))
    if (detail::stabilizes(g, e)) keep.push_back(g);
  return GaloisSubgroup::from_elements(c, keep);
}

namespace detail {

inline bool closed_under_reflection(const std::vector<Rat>& xs) {
  std::vector<Rat> nz, refl;
  for (const auto& x : xs)
    if (sgn(x) != 0) {
      nz.push_back(x);
      refl.push_back(Rat(1) - x);
    }
  std::sort(nz.begin(), nz.end());
  std::sort(refl.begin(), refl.end());
  return nz == refl;
}

}  // namespace detail

/// Nonzero alphas and nonzero betas are each stable under delta -> 1 - delta.
inline bool real_structure_test(const ExponentData& e) {
  if (!is_irreducible(e)) throw Error(ErrorKind::NotIrreducible, "real structure criterion needs an irreducible system");
  return detail::closed_under_reflection(e.alpha()) && detail::closed_under_reflection(e.beta());
}

struct PhiDecomposition {
  std::vector<long> r_list;
  std::vector<long> s_list;
};

namespace detail {

/// Splits the nonzero values into complete primitive orbits {d/r : gcd(d,r)=1};
/// denominators in ascending order, each repeated by its orbit multiplicity.
inline std::optional<std::vector<long>> primitive_orbits(const std::vector<Rat>& xs) {
  std::map<long, std::map<long, long>> buckets;
  for (const auto& x : xs)
    if (sgn(x) != 0) buckets[to_long(x.get_den())][to_long(x.get_num())]++;
  std::vector<long> out;
  for (const auto& [r, counts] : buckets) {
    long mult = -1;
    for (long d = 1; d < r; ++d) {
      if (std::gcd(d, r) != 1) continue;
      auto it = counts.find(d);
      long k = it == counts.end() ? 0 : it->second;
      if (mult < 0) mult = k;
      if (k != mult || k == 0) return std::nullopt;
    }
    for (long i = 0; i < mult; ++i) out.push_back(r);
  }
  return out;
}

}  // namespace detail

/// True iff the maximal good subgroup is all of (Z/cZ)^*, with the orbit
/// decomposition as witness.
inline std::pair<bool, std::optional<PhiDecomposition>> rational_structure_test(const ExponentData& e) {
  if (!max_good_subgroup(e).is_full()) return {false, std::nullopt};
  auto r = detail::primitive_orbits(e.alpha());
  auto s = detail::primitive_orbits(e.beta());
  if (!r || !s) throw Error(ErrorKind::PreconditionViolated, "full stabilizer without orbit decomposition");
  return {true, PhiDecomposition{*r, *s}};
}

struct WeightDecomposition {
  std::vector<long> w;
  std::vector<long> v;
};

namespace detail {

/// Greedy extraction of {d/w : 1 <= d < w} for the largest remaining
/// denominator; weights returned in descending order.
inline std::optional<std::vector<long>> weights_of(const std::vector<Rat>& xs) {
  std::multiset<Rat> rest;
  for (const auto& x : xs)
    if (sgn(x) != 0) rest.insert(x);
  std::vector<long> out;
  while (!rest.empty()) {
    long w = 1;
    for (const auto& x : rest) w = std::max(w, to_long(x.get_den()));
    for (long d = 1; d < w; ++d) {
      auto it = rest.find(make_rat(d, w));
      if (it == rest.end()) return std::nullopt;
      rest.erase(it);
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace detail

inline std::optional<WeightDecomposition> weighted_projective_decomposition(const ExponentData& e) {
  auto w = detail::weights_of(e.alpha());
  auto v = detail::weights_of(e.beta());
  if (!w || !v) return std::nullopt;
  return WeightDecomposition{*w, *v};
}

/// Exponent vectors of the monomials of f in the coordinates
/// (x_{r+1}, ..., x_N, q): one row per monomial, last row the q-term.
struct LaurentModel {
  std::size_t block_beta = 0;
  std::size_t block_alpha = 0;
  std::vector<std::vector<int>> exponents;

  std::size_t variables() const { return block_beta + block_alpha + 1; }
};

inline LaurentModel laurent_model(const ExponentData& e) {
  LaurentModel lm;
  lm.block_beta = e.m() - e.r();
  lm.block_alpha = e.n();
  const std::size_t k = lm.block_beta + lm.block_alpha;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<int> row(k + 1, 0);
    row[i] = i < lm.block_beta ? 1 : -1;
    lm.exponents.push_back(row);
  }
  std::vector<int> last(k + 1, 1);
  lm.exponents.push_back(last);
  return lm;
}

/// f is invariant under the coordinate permutation perm (perm[i] is the image
/// of coordinate i, the last coordinate being q) iff the set of monomial
/// exponent vectors is mapped to itself.
inline bool is_invariant(const LaurentModel& lm, const std::vector<std::size_t>& perm) {
  if (perm.size() != lm.variables()) throw Error(ErrorKind::PreconditionViolated, "permutation size mismatch");
  auto rows = lm.exponents;
  std::vector<std::vector<int>> image;
  for (const auto& row : rows) {
    std::vector<int> out(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) out[perm[i]] = row[i];
    image.push_back(out);
  }
  std::sort(rows.begin(), rows.end());
  std::sort(image.begin(), image.end());
  return rows == image;
}

/// Coordinate permutation induced by g on gamma = (nonzero betas, alphas).
/// Equal values are matched in order, so the permutation is deterministic.
inline std::vector<std::size_t> induced_permutation(const ExponentData& e, long g) {
  std::vector<Rat> gamma;
  for (const auto& b : e.beta())
    if (sgn(b) != 0) gamma.push_back(b);
  const std::size_t nb = gamma.size();
  for (const auto& a : e.alpha()) gamma.push_back(a);
  std::vector<std::size_t> perm(gamma.size() + 1, 0);
  std::vector<bool> used(gamma.size(), false);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    Rat target = act(g, gamma[i]);
    const std::size_t lo = i < nb ? 0 : nb, hi = i < nb ? nb : gamma.size();
    bool found = false;
    for (std::size_t j = lo; j < hi; ++j)
      if (!used[j] && gamma[j] == target) {
        perm[i] = j;
        used[j] = true;
        found = true;
        break;
      }
    if (!found) throw Error(ErrorKind::PreconditionViolated, "g does not permute the exponent blocks");
  }
  perm[gamma.size()] = gamma.size();
  return perm;
}

inline bool laurent_invariance_check(const ExponentData& e, const GaloisSubgroup& G) {
  if (!is_g_good(e, G)) throw Error(ErrorKind::PreconditionViolated, "subgroup is not good for these exponents");
  const LaurentModel lm = laurent_model(e);
  for (long g : G.elements())
    if (!is_invariant(lm, induced_permutation(e, g))) return false;
  return true;
}

struct CriteriaReport {
  GaloisSubgroup g_max;
  bool real_structure = false;
  bool rational_structure = false;
  long fixed_field_degree = 1;
  std::optional<PhiDecomposition> phi_decomposition;
  std::optional<WeightDecomposition> weights;
  bool laurent_invariant = false;
  /// Sum of zeta_c^g over g in G_max, an element of the fixed field.
  CycNum orbit_sum_element;
  std::vector<std::string> warnings;
};

inline CriteriaReport criteria_report(const ExponentData& e) {
  CriteriaReport rep;
  rep.g_max = max_good_subgroup(e);
  const long c = e.conductor();
  const bool irreducible = is_irreducible(e);
  if (irreducible) {
    rep.real_structure = real_structure_test(e);
  } else {
    rep.real_structure = c <= 2 || rep.g_max.contains(c - 1);
    rep.warnings.push_back("system is reducible; the structure criteria are stated for irreducible systems");
  }
  auto [rational, phi] = rational_structure_test(e);
  rep.rational_structure = rational;
  rep.phi_decomposition = phi;
  rep.fixed_field_degree = euler_phi(c) / static_cast<long>(rep.g_max.order());
  rep.weights = weighted_projective_decomposition(e);
  rep.laurent_invariant = laurent_invariance_check(e, rep.g_max);
  rep.orbit_sum_element = orbit_sum(rep.g_max);
  if (e.n() == e.m())
    rep.warnings.push_back("irreducibility criterion applied verbatim to the case n = m");
  rep.warnings.push_back("only coordinate permutation actions are considered");
  return rep;
}

}  // namespace hgb
