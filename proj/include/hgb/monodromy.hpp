#pragma once

// Exact monodromy of the regular hypergeometric system in Levelt companion
// form, Galois conjugation of representations, intertwiners between a
// representation and its conjugates, and descent of the representation to a
// fixed field L^G through the fixed vectors of the semilinear operators
//   u_g(v) = T_g sigma_g(v).
//
// Convention: M0 M1 Minf = I, Minf is the companion matrix of prod(t - a_i)
// and M0 the inverse of the companion matrix of prod(t - b_j), with
// a_i = exp(2 pi i alpha_i), b_j = exp(2 pi i beta_j).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hgb/criteria.hpp"
#include "hgb/cyclotomic.hpp"
#include "hgb/errors.hpp"
#include "hgb/hypersys.hpp"
#include "hgb/linalg.hpp"

namespace hgb {

struct MonodromyRep {
  std::size_t rank = 0;
  long conductor = 1;
  CycMatrix M0, M1, Minf;

  std::vector<const CycMatrix*> matrices() const { return {&M0, &M1, &Minf}; }
};

/// Monic polynomial prod (t - x_i) over Q(zeta_c), ascending.
inline std::vector<CycNum> root_poly(const std::vector<CycNum>& roots, long c) {
  std::vector<CycNum> p{CycNum::one(c)};
  for (const auto& x : roots) {
    std::vector<CycNum> next(p.size() + 1, CycNum::zero(c));
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i + 1] += p[i];
      next[i] -= x * p[i];
    }
    p = std::move(next);
  }
  return p;
}

/// Companion matrix with ones below the diagonal and last column -p_i.
inline CycMatrix companion(const std::vector<CycNum>& monic) {
  const std::size_t n = monic.size() - 1;
  const CycNum& proto = monic[0];
  CycMatrix m(n, n, zero_like(proto));
  for (std::size_t i = 0; i + 1 < n; ++i) m(i + 1, i) = one_like(proto);
  for (std::size_t i = 0; i < n; ++i) m(i, n - 1) = -monic[i];
  return m;
}

inline std::vector<CycNum> exp_roots(const std::vector<Rat>& xs, long c) {
  std::vector<CycNum> out;
  for (const auto& x : xs) out.push_back(CycNum::zeta(c, to_long(Rat(x * Rat(c)).get_num())));
  return out;
}

inline MonodromyRep levelt_build(const ExponentData& e) {
  if (e.n() != e.m()) throw Error(ErrorKind::NotRegular, "Levelt model needs n = m");
  if (!is_irreducible(e)) throw Error(ErrorKind::NotIrreducible, "exponent lists share a value");
  const long c = e.conductor();
  const CycNum one = CycNum::one(c);
  CycMatrix ca = companion(root_poly(exp_roots(e.alpha(), c), c));
  CycMatrix cb = companion(root_poly(exp_roots(e.beta(), c), c));
  MonodromyRep rep;
  rep.rank = e.n();
  rep.conductor = c;
  rep.Minf = ca;
  rep.M0 = inverse(cb, one);
  rep.M1 = cb * inverse(ca, one);
  return rep;
}

inline MonodromyRep conjugate_rep(const MonodromyRep& rep, long g) {
  UnitMod(rep.conductor, g);
  MonodromyRep out = rep;
  out.M0 = galois_apply(g, rep.M0);
  out.M1 = galois_apply(g, rep.M1);
  out.Minf = galois_apply(g, rep.Minf);
  return out;
}

inline MonodromyRep change_basis(const MonodromyRep& rep, const CycMatrix& p) {
  const CycNum one = CycNum::one(rep.conductor);
  CycMatrix pinv = inverse(p, one);
  MonodromyRep out = rep;
  out.M0 = pinv * rep.M0 * p;
  out.M1 = pinv * rep.M1 * p;
  out.Minf = pinv * rep.Minf * p;
  return out;
}

namespace detail {

/// Dimension of the algebra generated by the given matrices.
inline std::size_t algebra_dimension(const std::vector<CycMatrix>& gens, const CycNum& proto) {
  const std::size_t n = gens.front().rows();
  std::vector<CycMatrix> basis{CycMatrix::identity(n, one_like(proto))};
  auto independent = [&](const CycMatrix& cand) {
    CycMatrix stacked(basis.size() + 1, n * n, zero_like(proto));
    for (std::size_t b = 0; b < basis.size(); ++b)
      for (std::size_t k = 0; k < n * n; ++k) stacked(b, k) = basis[b].data()[k];
    for (std::size_t k = 0; k < n * n; ++k) stacked(basis.size(), k) = cand.data()[k];
    return rank(stacked) == basis.size() + 1;
  };
  std::size_t frontier_start = 0;
  while (frontier_start < basis.size() && basis.size() < n * n) {
    const std::size_t end = basis.size();
    for (std::size_t i = frontier_start; i < end && basis.size() < n * n; ++i)
      for (const auto& g : gens) {
        CycMatrix w = basis[i] * g;
        if (independent(w)) basis.push_back(w);
        if (basis.size() == n * n) break;
      }
    frontier_start = end;
  }
  return basis.size();
}

/// Same dimension computed after reduction modulo a prime; a lower bound for
/// the true dimension, or nothing when some entry is not p-integral.
inline std::optional<std::size_t> algebra_dimension_modp(const std::vector<CycMatrix>& gens, long c) {
  const ModpReduction red(c);
  const std::size_t n = gens.front().rows();
  using Flat = std::vector<std::uint64_t>;
  std::vector<Flat> g;
  for (const auto& m : gens) {
    Flat f;
    for (const auto& x : m.data()) {
      auto v = red.reduce(x);
      if (!v) return std::nullopt;
      f.push_back(*v);
    }
    g.push_back(f);
  }
  auto times = [&](const Flat& a, const Flat& b) {
    Flat out(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        if (a[i * n + k] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = red.add(out[i * n + j], red.mul(a[i * n + k], b[k * n + j]));
      }
    return out;
  };
  Flat id(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) id[i * n + i] = 1;
  std::vector<Flat> basis{id};
  std::size_t frontier_start = 0;
  while (frontier_start < basis.size() && basis.size() < n * n) {
    const std::size_t end = basis.size();
    for (std::size_t i = frontier_start; i < end && basis.size() < n * n; ++i)
      for (const auto& gen : g) {
        auto cand = basis;
        cand.push_back(times(basis[i], gen));
        if (red.rank(cand) == cand.size()) basis = std::move(cand);
        if (basis.size() == n * n) break;
      }
    frontier_start = end;
  }
  return basis.size();
}

}  // namespace detail

/// The algebra generated by M0 and Minf is the full matrix algebra.
inline bool is_irreducible_rep(const MonodromyRep& rep) {
  if (rep.rank <= 1) return true;
  const std::vector<CycMatrix> gens{rep.M0, rep.Minf};
  if (auto d = detail::algebra_dimension_modp(gens, rep.conductor); d && *d == rep.rank * rep.rank) return true;
  return detail::algebra_dimension(gens, CycNum::zero(rep.conductor)) == rep.rank * rep.rank;
}

/// All T with T sigma_g(M) = M T for M in {M0, Minf}, as a basis of columns
/// of vec(T) (row-major).
inline CycMatrix intertwiner_space(const MonodromyRep& rep, long g) {
  const std::size_t n = rep.rank;
  const CycNum zero = CycNum::zero(rep.conductor);
  std::vector<std::pair<CycMatrix, CycMatrix>> pairs = {{galois_apply(g, rep.M0), rep.M0},
                                                        {galois_apply(g, rep.Minf), rep.Minf}};
  CycMatrix sys(2 * n * n, n * n, zero);
  std::size_t row = 0;
  for (const auto& [sm, m] : pairs)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j, ++row) {
        // (T sm)_{ij} - (m T)_{ij}
        for (std::size_t k = 0; k < n; ++k) {
          sys(row, i * n + k) += sm(k, j);
          sys(row, k * n + j) -= m(i, k);
        }
      }
  return nullspace(sys, zero);
}

namespace detail {

/// Words W_1 = I, W_2, ... in M0 and Minf such that the vectors W_k e_1 form a
/// basis, or nothing if e_1 is not cyclic.
inline std::optional<std::vector<CycMatrix>> cyclic_words(const MonodromyRep& rep) {
  const std::size_t n = rep.rank;
  const CycNum zero = CycNum::zero(rep.conductor);
  std::vector<CycMatrix> words;
  CycMatrix u(n, 0, zero);
  auto try_add = [&](const CycMatrix& w) {
    CycMatrix cand = hconcat(u, select_cols(w, {0}, zero));
    if (rank(cand) != cand.cols()) return false;
    u = cand;
    words.push_back(w);
    return true;
  };
  try_add(CycMatrix::identity(n, CycNum::one(rep.conductor)));
  for (std::size_t i = 0; i < words.size() && words.size() < n; ++i)
    for (const auto* gen : {&rep.M0, &rep.Minf}) {
      if (words.size() == n) break;
      try_add(*gen * words[i]);
    }
  if (words.size() < n) return std::nullopt;
  return words;
}

/// Intertwiners through a cyclic vector: T is fixed by x = T e_1 through
/// T sigma_g(U) = [W_1 x, ..., W_n x] with U = [W_1 e_1, ..., W_n e_1], and
/// T sigma_g(M) = M T becomes X(x) sigma_g(U^-1 M U) = M X(x), a system in the
/// n coordinates of x.
inline std::optional<std::vector<CycMatrix>> intertwiners_cyclic(const MonodromyRep& rep, long g) {
  auto words = cyclic_words(rep);
  if (!words) return std::nullopt;
  const std::size_t n = rep.rank;
  const CycNum zero = CycNum::zero(rep.conductor);
  const CycNum one = CycNum::one(rep.conductor);
  CycMatrix u(n, n, zero);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) u(i, k) = (*words)[k](i, 0);
  const CycMatrix uinv = inverse(u, one);
  CycMatrix sys(2 * n * n, n, zero);
  std::size_t row = 0;
  for (const auto* m : {&rep.M0, &rep.Minf}) {
    const CycMatrix cm = galois_apply(g, uinv * (*m) * u);
    std::vector<CycMatrix> mw;
    for (const auto& w : *words) mw.push_back(*m * w);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j, ++row)
        for (std::size_t l = 0; l < n; ++l) {
          CycNum coef = -mw[j](i, l);
          for (std::size_t k = 0; k < n; ++k)
            if (!cm(k, j).is_zero()) coef += (*words)[k](i, l) * cm(k, j);
          sys(row, l) = coef;
        }
  }
  const CycMatrix xs = nullspace(sys, zero);
  const CycMatrix su_inv = galois_apply(g, uinv);
  std::vector<CycMatrix> out;
  for (std::size_t col = 0; col < xs.cols(); ++col) {
    CycMatrix x = select_cols(xs, {col}, zero);
    CycMatrix big(n, n, zero);
    for (std::size_t k = 0; k < n; ++k) {
      CycMatrix wx = (*words)[k] * x;
      for (std::size_t i = 0; i < n; ++i) big(i, k) = wx(i, 0);
    }
    out.push_back(big * su_inv);
  }
  return out;
}

inline CycMatrix normalize_first_entry(const CycMatrix& t) {
  for (const auto& x : t.data())
    if (!x.is_zero()) {
      const CycNum inv = x.inv();
      return t.map([&](const CycNum& y) { return y * inv; });
    }
  return t;
}

/// find_intertwiner without the irreducibility check.
inline CycMatrix intertwiner_unchecked(const MonodromyRep& rep, long g) {
  const std::size_t n = rep.rank;
  std::vector<CycMatrix> sols;
  if (auto fast = intertwiners_cyclic(rep, g)) {
    sols = *fast;
  } else {
    CycMatrix space = intertwiner_space(rep, g);
    for (std::size_t col = 0; col < space.cols(); ++col) {
      CycMatrix t(n, n, CycNum::zero(rep.conductor));
      for (std::size_t k = 0; k < n * n; ++k) t(k / n, k % n) = space(k, col);
      sols.push_back(t);
    }
  }
  if (sols.empty()) throw Error(ErrorKind::NoIsomorphism, "conjugate by " + std::to_string(g) + " is not isomorphic");
  if (sols.size() > 1) throw Error(ErrorKind::Reducible, "intertwiner space has dimension > 1");
  return normalize_first_entry(sols.front());
}

}  // namespace detail

inline CycMatrix find_intertwiner(const MonodromyRep& rep, long g) {
  if (!is_irreducible_rep(rep)) throw Error(ErrorKind::Reducible, "representation is reducible");
  return detail::intertwiner_unchecked(rep, g);
}

struct DescentCertificate {
  GaloisSubgroup G;
  std::vector<long> generators;
  std::vector<CycMatrix> intertwiners;
  CycMatrix S;
  MonodromyRep model;
  long fixed_field_degree = 1;
  std::string method;
};

namespace detail {

/// Q-matrix of v -> T sigma_g(v) on L^n with the power-basis coordinates.
inline Matrix<Rat> semilinear_matrix(const CycMatrix& t, long g) {
  const long c = t(0, 0).conductor();
  const std::size_t n = t.rows();
  const std::size_t deg = t(0, 0).degree();
  Matrix<Rat> sg = galois_matrix(g, c);
  Matrix<Rat> out(n * deg, n * deg, Rat(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (t(i, k).is_zero()) continue;
      Matrix<Rat> block = mul_matrix(t(i, k)) * sg;
      for (std::size_t a = 0; a < deg; ++a)
        for (std::size_t b = 0; b < deg; ++b) out(i * deg + a, k * deg + b) = block(a, b);
    }
  return out;
}

/// Common fixed space of the semilinear operators, returned as L-vectors.
inline std::vector<std::vector<CycNum>> common_fixed_vectors(const std::vector<CycMatrix>& ts,
                                                              const std::vector<long>& gens, std::size_t n, long c) {
  const std::size_t deg = static_cast<std::size_t>(euler_phi(c));
  const std::size_t dim = n * deg;
  Matrix<Rat> sys(0, dim, Rat(0));
  std::vector<Matrix<Rat>> parts;
  for (std::size_t i = 0; i < gens.size(); ++i)
    parts.push_back(semilinear_matrix(ts[i], gens[i]) - Matrix<Rat>::identity(dim, Rat(0)));
  Matrix<Rat> stacked(parts.size() * dim, dim, Rat(0));
  for (std::size_t p = 0; p < parts.size(); ++p)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) stacked(p * dim + i, j) = parts[p](i, j);
  Matrix<Rat> basis = nullspace(stacked, Rat(0));
  std::vector<std::vector<CycNum>> out;
  for (std::size_t col = 0; col < basis.cols(); ++col) {
    std::vector<CycNum> v;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Rat> coeffs(deg);
      for (std::size_t a = 0; a < deg; ++a) coeffs[a] = basis(i * deg + a, col);
      v.push_back(CycNum::from_coeffs(c, coeffs));
    }
    out.push_back(v);
  }
  return out;
}

/// Picks L-independent vectors greedily; returns them as columns if n are found.
inline std::optional<CycMatrix> assemble_basis(const std::vector<std::vector<CycNum>>& vecs, std::size_t n, long c) {
  std::vector<std::vector<CycNum>> chosen;
  for (const auto& v : vecs) {
    CycMatrix m(n, chosen.size() + 1, CycNum::zero(c));
    for (std::size_t j = 0; j < chosen.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) m(i, j) = chosen[j][i];
    for (std::size_t i = 0; i < n; ++i) m(i, chosen.size()) = v[i];
    if (rank(m) == chosen.size() + 1) chosen.push_back(v);
    if (chosen.size() == n) break;
  }
  if (chosen.size() < n) return std::nullopt;
  CycMatrix s(n, n, CycNum::zero(c));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) s(i, j) = chosen[j][i];
  return s;
}

/// Roots of unity contained in Q(zeta_c).
inline std::vector<CycNum> roots_of_unity_in(long c) {
  std::vector<CycNum> out;
  for (long k = 0; k < std::max(c, 1L); ++k) out.push_back(CycNum::zeta(c, k));
  if (c % 2 == 1)
    for (long k = 0; k < c; ++k) out.push_back(-CycNum::zeta(c, k));
  return out;
}

/// A vector spanning the image of a rank one element of the K-algebra
/// generated by the monodromy: M1 - I when it has rank one, otherwise a
/// spectral projector q(W) for a simple G-fixed root-of-unity eigenvalue of
/// a short word W.
inline std::optional<std::vector<CycNum>> rank_one_anchor(const MonodromyRep& rep, const GaloisSubgroup& G) {
  const long c = rep.conductor;
  const std::size_t n = rep.rank;
  const CycNum one = CycNum::one(c);
  auto first_nonzero_column = [&](const CycMatrix& e) -> std::optional<std::vector<CycNum>> {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<CycNum> v;
      bool nz = false;
      for (std::size_t i = 0; i < n; ++i) {
        v.push_back(e(i, j));
        nz = nz || !e(i, j).is_zero();
      }
      if (nz) return v;
    }
    return std::nullopt;
  };
  CycMatrix id = CycMatrix::identity(n, one);
  CycMatrix p = rep.M1 - id;
  if (rank(p) == 1) return first_nonzero_column(p);
  std::vector<CycMatrix> words = {rep.M0, rep.Minf, rep.M1, rep.M0 * rep.Minf, rep.Minf * rep.M0,
                                  rep.M0 * rep.M0 * rep.Minf};
  for (const auto& w : words) {
    auto cp = charpoly(w, one);
    bool fixed = true;
    for (const auto& x : cp) fixed = fixed && is_fixed_by(x, G);
    if (!fixed) continue;
    for (const auto& lambda : roots_of_unity_in(c)) {
      if (!is_fixed_by(lambda, G)) continue;
      CycNum val = CycNum::zero(c);
      for (std::size_t k = cp.size(); k-- > 0;) val = val * lambda + cp[k];
      if (!val.is_zero()) continue;
      // quotient charpoly / (t - lambda) by synthetic division
      std::vector<CycNum> qpoly(cp.size() - 1, CycNum::zero(c));
      CycNum carry = CycNum::zero(c);
      for (std::size_t k = cp.size() - 1; k-- > 0;) {
        carry = carry * lambda + cp[k + 1];
        qpoly[k] = carry;
      }
      CycNum qval = CycNum::zero(c);
      for (std::size_t k = qpoly.size(); k-- > 0;) qval = qval * lambda + qpoly[k];
      if (qval.is_zero()) continue;
      CycMatrix e(n, n, CycNum::zero(c));
      for (std::size_t k = qpoly.size(); k-- > 0;) e = e * w + CycMatrix::identity(n, one).map([&](const CycNum& x) { return x * qpoly[k]; });
      if (rank(e) == 1) return first_nonzero_column(e);
    }
  }
  return std::nullopt;
}

inline CycMatrix apply_semilinear(const CycMatrix& t, long g, const std::vector<CycNum>& v) {
  CycMatrix col(v.size(), 1, CycNum::zero(t(0, 0).conductor()));
  for (std::size_t i = 0; i < v.size(); ++i) col(i, 0) = galois_apply(g, v[i]);
  return t * col;
}

}  // namespace detail

inline bool verify_K_model(const DescentCertificate& cert, const MonodromyRep& rep) {
  const CycNum one = CycNum::one(rep.conductor);
  if (cert.S.rows() != rep.rank || cert.S.cols() != rep.rank) return false;
  if (rank(cert.S) != rep.rank) return false;
  MonodromyRep model = change_basis(rep, cert.S);
  for (const auto* m : model.matrices())
    if (!is_fixed_by(*m, cert.G)) return false;
  const auto orig = rep.matrices();
  const auto mod = model.matrices();
  for (std::size_t i = 0; i < orig.size(); ++i)
    if (charpoly(*orig[i], one) != charpoly(*mod[i], one)) return false;
  return true;
}

/// Bound on the number of scalar tuples tried when no rank one anchor exists.
inline constexpr std::size_t kScalarSearchBound = 4096;

inline DescentCertificate descend(const MonodromyRep& rep, const GaloisSubgroup& G) {
  if (G.conductor() != rep.conductor) throw Error(ErrorKind::ConductorMismatch, "subgroup conductor differs");
  if (!is_irreducible_rep(rep)) throw Error(ErrorKind::Reducible, "representation is reducible");
  const long c = rep.conductor;
  const std::size_t n = rep.rank;
  DescentCertificate cert;
  cert.G = G;
  cert.generators = G.generators();
  cert.fixed_field_degree = euler_phi(c) / static_cast<long>(G.order());
  for (long g : cert.generators) cert.intertwiners.push_back(detail::intertwiner_unchecked(rep, g));

  auto try_finish = [&](const std::vector<CycMatrix>& ts) -> bool {
    auto vecs = detail::common_fixed_vectors(ts, cert.generators, n, c);
    if (vecs.size() * static_cast<std::size_t>(G.order()) != n * static_cast<std::size_t>(euler_phi(c))) return false;
    auto s = detail::assemble_basis(vecs, n, c);
    if (!s) return false;
    cert.S = *s;
    cert.intertwiners = ts;
    cert.model = change_basis(rep, cert.S);
    return verify_K_model(cert, rep);
  };

  if (cert.generators.empty()) {
    cert.S = CycMatrix::identity(n, CycNum::one(c));
    cert.model = rep;
    cert.method = "trivial subgroup";
    return cert;
  }

  if (auto anchor = detail::rank_one_anchor(rep, G)) {
    std::vector<CycMatrix> ts;
    for (std::size_t i = 0; i < cert.generators.size(); ++i) {
      CycMatrix img = detail::apply_semilinear(cert.intertwiners[i], cert.generators[i], *anchor);
      CycNum kappa;
      for (std::size_t k = 0; k < n; ++k)
        if (!(*anchor)[k].is_zero()) {
          kappa = img(k, 0) / (*anchor)[k];
          break;
        }
      CycNum inv = kappa.inv();
      ts.push_back(cert.intertwiners[i].map([&](const CycNum& x) { return x * inv; }));
    }
    if (try_finish(ts)) {
      cert.method = "rank-one anchor normalization";
      return cert;
    }
  }

  const auto mu = detail::roots_of_unity_in(c);
  const std::size_t k = cert.generators.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < k && total <= kScalarSearchBound; ++i) total *= mu.size();
  total = std::min(total, kScalarSearchBound);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<CycMatrix> ts;
    std::size_t rest = idx;
    for (std::size_t i = 0; i < k; ++i) {
      const CycNum& s = mu[rest % mu.size()];
      rest /= mu.size();
      ts.push_back(cert.intertwiners[i].map([&](const CycNum& x) { return x * s; }));
    }
    if (try_finish(ts)) {
      cert.method = "root-of-unity rescaling";
      return cert;
    }
  }
  throw Error(ErrorKind::Obstructed, "no splitting of the descent cocycle found within the search bound");
}

/// Random invertible matrix with small integer coordinates in the power basis.
inline CycMatrix random_invertible(std::size_t n, long c, std::mt19937_64& rng, int spread = 2) {
  std::uniform_int_distribution<int> dist(-spread, spread);
  const std::size_t deg = static_cast<std::size_t>(euler_phi(c));
  while (true) {
    CycMatrix p(n, n, CycNum::zero(c));
    for (auto i = std::size_t{0}; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<Rat> coeffs(deg);
        for (auto& x : coeffs) x = dist(rng);
        p(i, j) = CycNum::from_coeffs(c, coeffs);
      }
    if (rank(p) == n) return p;
  }
}

}  // namespace hgb
