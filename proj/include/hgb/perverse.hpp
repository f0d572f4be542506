#pragma once

// Glueing diagrams (E, F, can, var) for germs of perverse sheaves on a disc,
// built from a monodromy matrix T, and their descent to a fixed field L^G.
//
// Convention: can : E -> F and var : F -> E, so that var can + id_E is the
// monodromy on E and can var + id_F the monodromy on F. A change of bases
// (P_E, P_F) replaces can by P_F^-1 can P_E and var by P_E^-1 var P_F.

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hgb/cyclotomic.hpp"
#include "hgb/errors.hpp"
#include "hgb/linalg.hpp"

namespace hgb {

struct GlueDiagram {
  long conductor = 1;
  std::size_t dim_E = 0;
  std::size_t dim_F = 0;
  /// dim_F x dim_E.
  CycMatrix can;
  /// dim_E x dim_F.
  CycMatrix var;
};

enum class ExtensionKind { Shriek, Star, Middle, Skyscraper };

inline std::string to_string(ExtensionKind k) {
  switch (k) {
    case ExtensionKind::Shriek: return "shriek";
    case ExtensionKind::Star: return "star";
    case ExtensionKind::Middle: return "middle";
    case ExtensionKind::Skyscraper: return "skyscraper";
  }
  return "unknown";
}

struct Extension {
  ExtensionKind kind = ExtensionKind::Middle;
  /// Dimension of F for the skyscraper diagram.
  std::size_t skyscraper_dim = 0;
};

namespace detail {

inline CycMatrix zero_matrix(std::size_t r, std::size_t c, long conductor) {
  return CycMatrix(r, c, CycNum::zero(conductor));
}

inline CycMatrix id_matrix(std::size_t n, long conductor) { return CycMatrix::identity(n, CycNum::one(conductor)); }

/// Columns of a forming a basis of its column space (pivot columns).
inline CycMatrix column_basis(const CycMatrix& a, long conductor) {
  CycMatrix r = a;
  auto pivots = rref(r);
  return select_cols(a, pivots, CycNum::zero(conductor));
}

inline bool invertible(const CycMatrix& a) { return a.rows() == a.cols() && rank(a) == a.rows(); }

}  // namespace detail

inline GlueDiagram skyscraper(std::size_t d, long conductor) {
  return {conductor, 0, d, detail::zero_matrix(d, 0, conductor), detail::zero_matrix(0, d, conductor)};
}

inline GlueDiagram from_monodromy(const CycMatrix& T, Extension ext) {
  const long c = T.empty() ? 1 : T(0, 0).conductor();
  if (ext.kind == ExtensionKind::Skyscraper) return skyscraper(ext.skyscraper_dim, c);
  if (!detail::invertible(T)) throw Error(ErrorKind::NotInvertible, "monodromy matrix is singular");
  const std::size_t n = T.rows();
  const CycMatrix id = detail::id_matrix(n, c);
  const CycMatrix tm = T - id;
  switch (ext.kind) {
    case ExtensionKind::Shriek: return {c, n, n, id, tm};
    case ExtensionKind::Star: return {c, n, n, tm, id};
    default: break;
  }
  const CycMatrix b = detail::column_basis(tm, c);
  const std::size_t k = b.cols();
  CycMatrix can = detail::zero_matrix(k, n, c);
  if (k > 0) can = *solve(b, tm, CycNum::zero(c));
  return {c, n, k, can, b};
}

/// (var can + id_E, can var + id_F).
inline std::pair<CycMatrix, CycMatrix> monodromy_of(const GlueDiagram& d) {
  CycMatrix te = detail::id_matrix(d.dim_E, d.conductor);
  CycMatrix tf = detail::id_matrix(d.dim_F, d.conductor);
  if (d.dim_E > 0 && d.dim_F > 0) {
    te = d.var * d.can + te;
    tf = d.can * d.var + tf;
  }
  if (!detail::invertible(te) || !detail::invertible(tf))
    throw Error(ErrorKind::NotInvertible, "glueing diagram violates the invertibility axioms");
  return {te, tf};
}

/// Both var can + id_E and can var + id_F are invertible.
inline bool satisfies_axioms(const GlueDiagram& d) {
  try {
    monodromy_of(d);
    return true;
  } catch (const Error&) {
    return false;
  }
}

inline GlueDiagram direct_sum(const GlueDiagram& a, const GlueDiagram& b) {
  if (a.conductor != b.conductor) throw Error(ErrorKind::ConductorMismatch, "diagrams over different fields");
  const long c = a.conductor;
  GlueDiagram out{c, a.dim_E + b.dim_E, a.dim_F + b.dim_F, detail::zero_matrix(a.dim_F + b.dim_F, a.dim_E + b.dim_E, c),
                  detail::zero_matrix(a.dim_E + b.dim_E, a.dim_F + b.dim_F, c)};
  for (std::size_t i = 0; i < a.dim_F; ++i)
    for (std::size_t j = 0; j < a.dim_E; ++j) out.can(i, j) = a.can(i, j);
  for (std::size_t i = 0; i < b.dim_F; ++i)
    for (std::size_t j = 0; j < b.dim_E; ++j) out.can(a.dim_F + i, a.dim_E + j) = b.can(i, j);
  for (std::size_t i = 0; i < a.dim_E; ++i)
    for (std::size_t j = 0; j < a.dim_F; ++j) out.var(i, j) = a.var(i, j);
  for (std::size_t i = 0; i < b.dim_E; ++i)
    for (std::size_t j = 0; j < b.dim_F; ++j) out.var(a.dim_E + i, a.dim_F + j) = b.var(i, j);
  return out;
}

inline GlueDiagram change_bases(const GlueDiagram& d, const CycMatrix& pe, const CycMatrix& pf) {
  GlueDiagram out = d;
  if (d.dim_E == 0 || d.dim_F == 0) return out;
  const CycNum one = CycNum::one(d.conductor);
  out.can = inverse(pf, one) * d.can * pe;
  out.var = inverse(pe, one) * d.var * pf;
  return out;
}

/// A morphism (e, f) : d1 -> d2 of diagrams, with e : E1 -> E2 and f : F1 -> F2.
struct DiagramMorphism {
  CycMatrix e;
  CycMatrix f;
};

/// f can1 = can2 e and e var1 = var2 f; e = 0 is allowed.
inline bool is_morphism(const DiagramMorphism& m, const GlueDiagram& d1, const GlueDiagram& d2) {
  if (m.e.rows() != d2.dim_E || m.e.cols() != d1.dim_E || m.f.rows() != d2.dim_F || m.f.cols() != d1.dim_F)
    return false;
  const long c = d1.conductor;
  auto mul = [&](const CycMatrix& a, const CycMatrix& b) {
    if (a.cols() == 0) return detail::zero_matrix(a.rows(), b.cols(), c);
    return a * b;
  };
  return mul(m.f, d1.can) == mul(d2.can, m.e) && mul(m.e, d1.var) == mul(d2.var, m.f);
}

/// Rational canonical form P^-1 T P = diag(C(p_1), ..., C(p_k)) with
/// p_{i+1} | p_i; blocks are companion matrices with ones below the diagonal.
struct FrobeniusForm {
  std::vector<std::vector<CycNum>> invariant_factors;
  CycMatrix form;
  CycMatrix transform;
};

namespace detail {

/// Monic minimal polynomial of v under T together with the Krylov basis.
inline std::pair<std::vector<CycNum>, CycMatrix> krylov(const CycMatrix& t, const CycMatrix& v, long c) {
  const CycNum zero = CycNum::zero(c);
  CycMatrix basis(t.rows(), 0, zero);
  CycMatrix w = v;
  while (true) {
    CycMatrix cand = hconcat(basis, w);
    if (rank(cand) == basis.cols()) break;
    basis = cand;
    w = t * w;
  }
  const std::size_t k = basis.cols();
  auto coeffs = *solve(basis, w, zero);
  std::vector<CycNum> p;
  for (std::size_t i = 0; i < k; ++i) p.push_back(-coeffs(i, 0));
  p.push_back(CycNum::one(c));
  return {p, basis};
}

inline CycMatrix poly_eval(const std::vector<CycNum>& p, const CycMatrix& t, long c) {
  CycMatrix acc = zero_matrix(t.rows(), t.cols(), c);
  const CycMatrix id = id_matrix(t.rows(), c);
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * t + id.map([&](const CycNum& x) { return x * p[k]; });
  return acc;
}

inline bool is_zero_matrix(const CycMatrix& m) {
  for (const auto& x : m.data())
    if (!x.is_zero()) return false;
  return true;
}

}  // namespace detail

/// Cyclic decomposition: a vector v whose local minimal polynomial kills T
/// spans a cyclic subspace W with T-invariant complement
///   {x : phi(T^i x) = 0, i < k},
/// where phi vanishes on T^i v for i < k - 1 and is 1 on T^{k-1} v.
inline FrobeniusForm frobenius_form(const CycMatrix& t, std::uint64_t seed = 1) {
  const std::size_t n = t.rows();
  const long c = n == 0 ? 1 : t(0, 0).conductor();
  const CycNum zero = CycNum::zero(c);
  const CycNum one = CycNum::one(c);
  FrobeniusForm out;
  out.form = detail::zero_matrix(n, n, c);
  out.transform = detail::zero_matrix(n, 0, c);
  if (n == 0) return out;
  // The restricted operator acts on the column span of `space` (n x r).
  CycMatrix space = detail::id_matrix(n, c);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-3, 3);
  std::size_t offset = 0;
  while (space.cols() > 0) {
    const std::size_t r = space.cols();
    // operator in the coordinates of `space`
    const CycMatrix tr = *solve(space, t * space, zero);
    std::optional<std::pair<std::vector<CycNum>, CycMatrix>> best;
    for (std::size_t attempt = 0; attempt < r + 64; ++attempt) {
      CycMatrix v = detail::zero_matrix(r, 1, c);
      if (attempt < r) {
        v(attempt, 0) = one;
      } else {
        for (std::size_t i = 0; i < r; ++i) v(i, 0) = CycNum::rational(c, Rat(dist(rng)));
        if (detail::is_zero_matrix(v)) continue;
      }
      auto kr = detail::krylov(tr, v, c);
      if (detail::is_zero_matrix(detail::poly_eval(kr.first, tr, c))) {
        best = kr;
        break;
      }
    }
    if (!best) throw Error(ErrorKind::PreconditionViolated, "no vector with full minimal polynomial found");
    const auto& [p, kb] = *best;
    const std::size_t k = kb.cols();
    // functional phi as a row vector in restricted coordinates
    CycMatrix rhs = detail::zero_matrix(k, 1, c);
    rhs(k - 1, 0) = one;
    CycMatrix kbt(k, r, zero);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < k; ++j) kbt(j, i) = kb(i, j);
    CycMatrix phi = *solve(kbt, rhs, zero);
    CycMatrix conds(k, r, zero);
    CycMatrix row(1, r, zero);
    for (std::size_t i = 0; i < r; ++i) row(0, i) = phi(i, 0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < r; ++j) conds(i, j) = row(0, j);
      row = row * tr;
    }
    CycMatrix complement = nullspace(conds, zero);
    out.transform = hconcat(out.transform, space * kb);
    for (std::size_t i = 0; i + 1 < k; ++i) out.form(offset + i + 1, offset + i) = one;
    for (std::size_t i = 0; i < k; ++i) out.form(offset + i, offset + k - 1) = -p[i];
    out.invariant_factors.push_back(p);
    offset += k;
    space = complement.cols() == 0 ? detail::zero_matrix(n, 0, c) : space * complement;
  }
  return out;
}

struct KStructureResult {
  bool exists = false;
  std::optional<CycMatrix> basis_E;
  std::optional<CycMatrix> basis_F;
  std::string method;
};

namespace detail {

inline bool fixed_diagram(const GlueDiagram& d, const GaloisSubgroup& G) {
  return is_fixed_by(d.can, G) && is_fixed_by(d.var, G);
}

inline bool fixed_form(const FrobeniusForm& f, const GaloisSubgroup& G) { return is_fixed_by(f.form, G); }

/// Bases for the case where can : E -> F is surjective and var is injective:
/// P_E brings T_E to its Frobenius form R, and F gets the basis var^-1(P_E B)
/// with B the pivot columns of R - I.
inline std::optional<std::pair<CycMatrix, CycMatrix>> middle_bases(const GlueDiagram& d, const GaloisSubgroup& G) {
  const long c = d.conductor;
  const CycMatrix te = d.var * d.can + id_matrix(d.dim_E, c);
  const FrobeniusForm ff = frobenius_form(te);
  if (!fixed_form(ff, G)) return std::nullopt;
  const CycMatrix b = column_basis(ff.form - id_matrix(d.dim_E, c), c);
  const CycMatrix pf = *solve(d.var, ff.transform * b, CycNum::zero(c));
  return std::make_pair(ff.transform, pf);
}

}  // namespace detail

/// Decides whether bases of E and F exist in which can and var have entries in
/// L^G. The decision uses the similarity invariants of the monodromy, which
/// are complete for the supported shapes:
///   E = 0, can invertible, var invertible, can onto with var injective, and
///   the last one plus a summand of F inside ker(var) complementary to im(can).
/// Other shapes raise Obstructed.
inline KStructureResult has_K_structure(const GlueDiagram& d, const GaloisSubgroup& G) {
  const long c = d.conductor;
  if (G.conductor() != c) throw Error(ErrorKind::ConductorMismatch, "subgroup conductor differs from the diagram");
  KStructureResult res;
  if (d.dim_E == 0 || d.dim_F == 0 || detail::fixed_diagram(d, G)) {
    res.exists = true;
    res.basis_E = detail::id_matrix(d.dim_E, c);
    res.basis_F = detail::id_matrix(d.dim_F, c);
    res.method = d.dim_E == 0 ? "skyscraper" : (d.dim_F == 0 ? "zero vanishing cycles" : "already fixed");
    return res;
  }
  const CycNum zero = CycNum::zero(c);
  const std::size_t rc = rank(d.can);
  const std::size_t rv = rank(d.var);
  if (rc == d.dim_E && rc == d.dim_F) {
    const FrobeniusForm ff = frobenius_form(d.var * d.can + detail::id_matrix(d.dim_E, c));
    res.method = "can invertible";
    if (!detail::fixed_form(ff, G)) return res;
    res.exists = true;
    res.basis_E = ff.transform;
    res.basis_F = d.can * ff.transform;
    return res;
  }
  if (rv == d.dim_E && rv == d.dim_F) {
    const FrobeniusForm ff = frobenius_form(d.can * d.var + detail::id_matrix(d.dim_F, c));
    res.method = "var invertible";
    if (!detail::fixed_form(ff, G)) return res;
    res.exists = true;
    res.basis_F = ff.transform;
    res.basis_E = d.var * ff.transform;
    return res;
  }
  if (rc == d.dim_F && rv == d.dim_F) {
    res.method = "can onto, var injective";
    if (auto b = detail::middle_bases(d, G)) {
      res.exists = true;
      res.basis_E = b->first;
      res.basis_F = b->second;
    }
    return res;
  }
  // F = im(can) + ker(var) as a direct sum, with var injective on im(can):
  // a diagram of the previous shape plus a skyscraper summand.
  const CycMatrix im = detail::column_basis(d.can, c);
  const CycMatrix ker = nullspace(d.var, zero);
  const CycMatrix both = hconcat(im, ker);
  if (rank(both) == d.dim_F && both.cols() == d.dim_F && rank(d.var * im) == im.cols()) {
    res.method = "can onto its image, plus skyscraper summand";
    GlueDiagram sub{c, d.dim_E, im.cols(), *solve(im, d.can, zero), d.var * im};
    std::optional<std::pair<CycMatrix, CycMatrix>> b;
    if (sub.dim_F == 0) {
      b = std::make_pair(detail::id_matrix(d.dim_E, c), detail::zero_matrix(0, 0, c));
    } else if (rank(sub.can) == sub.dim_E) {
      const FrobeniusForm ff = frobenius_form(sub.var * sub.can + detail::id_matrix(d.dim_E, c));
      if (detail::fixed_form(ff, G)) b = std::make_pair(ff.transform, sub.can * ff.transform);
    } else {
      b = detail::middle_bases(sub, G);
    }
    if (!b) return res;
    res.exists = true;
    res.basis_E = b->first;
    res.basis_F = sub.dim_F == 0 ? ker : hconcat(im * b->second, ker);
    return res;
  }
  throw Error(ErrorKind::Obstructed, "unsupported diagram shape for the K-structure decision");
}

}  // namespace hgb
