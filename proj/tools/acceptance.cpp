#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "hgb/cli.hpp"

using namespace hgb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};

void report(int id, const std::string& title, const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << v.detail << ")"
            << std::endl;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

void multisets(const std::vector<Rat>& vals, std::size_t k, std::size_t start, std::vector<Rat>& cur,
               const std::function<void(const std::vector<Rat>&)>& emit) {
  if (cur.size() == k) {
    emit(cur);
    return;
  }
  for (std::size_t i = start; i < vals.size(); ++i) {
    cur.push_back(vals[i]);
    multisets(vals, k, i, cur, emit);
    cur.pop_back();
  }
}

/// Every system with conductor at most 8 and n + m at most 6.
std::vector<ExponentData> exhaustive_systems() {
  std::vector<ExponentData> out;
  for (long c = 1; c <= 8; ++c) {
    std::vector<Rat> vals;
    for (long k = 0; k < c; ++k) vals.push_back(make_rat(k, c));
    for (std::size_t n = 0; n <= 6; ++n)
      for (std::size_t m = 0; n + m <= 6; ++m) {
        if (n + m == 0) continue;
        std::vector<Rat> a, b;
        multisets(vals, n, 0, a, [&](const std::vector<Rat>& aa) {
          multisets(vals, m, 0, b, [&](const std::vector<Rat>& bb) {
            ExponentData e(aa, bb);
            if (e.conductor() == c) out.push_back(std::move(e));
          });
        });
      }
  }
  return out;
}

/// Deterministic sample with independent denominators up to 8 per exponent.
std::vector<ExponentData> mixed_sample(std::size_t count) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<long> den(1, 8);
  std::uniform_int_distribution<std::size_t> total(1, 6);
  std::vector<ExponentData> out;
  while (out.size() < count) {
    const std::size_t t = total(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, t)(rng);
    std::vector<Rat> a, b;
    for (std::size_t i = 0; i < t; ++i) {
      const long d = den(rng);
      (i < n ? a : b).push_back(make_rat(std::uniform_int_distribution<long>(0, d - 1)(rng), d));
    }
    out.emplace_back(a, b);
  }
  return out;
}

/// Stabilizer computed from residue multiplicities, independent of the engine.
std::vector<long> brute_stabilizer(const ExponentData& e) {
  const long c = e.conductor();
  if (c <= 2) return {1};
  auto counts = [&](const std::vector<Rat>& xs, long g) {
    std::vector<int> h(static_cast<std::size_t>(c), 0);
    for (const auto& x : xs) {
      const long k = to_long(Rat(x * Rat(c)).get_num());
      h[static_cast<std::size_t>((g * k) % c)]++;
    }
    return h;
  };
  const auto a1 = counts(e.alpha(), 1), b1 = counts(e.beta(), 1);
  std::vector<long> out;
  for (long g = 1; g < c; ++g)
    if (std::gcd(g, c) == 1 && counts(e.alpha(), g) == a1 && counts(e.beta(), g) == b1) out.push_back(g);
  return out;
}

std::vector<ExponentData> read_fixtures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<ExponentData> out;
  std::string line;
  while (std::getline(in, line)) {
    if (hgb::detail::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    auto list = [](const nlohmann::json& v) {
      if (v.is_string()) return parse_rat_list(v.get<std::string>());
      std::vector<Rat> xs;
      for (const auto& x : v) xs.push_back(x.is_string() ? parse_rat(x.get<std::string>()) : Rat(x.get<long>()));
      return xs;
    };
    out.push_back(normalize(list(j.value("alpha", nlohmann::json(""))), list(j.value("beta", nlohmann::json("")))));
  }
  return out;
}

Verdict criterion_enumeration(const std::vector<ExponentData>& systems, std::size_t exhaustive, double& elapsed) {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (const auto& e : systems)
    if (max_good_subgroup(e).elements() != brute_stabilizer(e)) ++mismatches;
  elapsed = seconds_since(t0);
  Verdict v;
  v.pass = mismatches == 0 && elapsed < 10;
  v.detail = std::to_string(exhaustive) + " exhaustive + " + std::to_string(systems.size() - exhaustive) +
             " sampled systems, " + std::to_string(mismatches) + " mismatches, " + fmt(elapsed) + " s";
  return v;
}

Verdict criterion_real(const std::vector<ExponentData>& systems) {
  std::size_t checked = 0, disagreements = 0;
  for (const auto& e : systems) {
    if (!is_irreducible(e)) continue;
    const long c = e.conductor();
    const bool conj = c <= 2 || max_good_subgroup(e).contains(c - 1);
    if (real_structure_test(e) != conj) ++disagreements;
    ++checked;
  }
  return {disagreements == 0,
          std::to_string(checked) + " irreducible systems, " + std::to_string(disagreements) + " disagreements"};
}

Verdict criterion_rational(const std::vector<ExponentData>& fixtures) {
  const auto t0 = Clock::now();
  std::size_t ok = 0, weighted = 0;
  for (const auto& e : fixtures) {
    if (!rational_structure_test(e).first) continue;
    if (weighted_projective_decomposition(e)) ++weighted;
    const MonodromyRep rep = levelt_build(e);
    bool rational = true;
    for (const auto* m : rep.matrices())
      for (const auto& x : m->data()) rational = rational && x.is_rational();
    if (rational) ++ok;
  }
  const double t = seconds_since(t0);
  return {ok == fixtures.size() && fixtures.size() == 20 && t < 1,
          std::to_string(ok) + "/" + std::to_string(fixtures.size()) + " rational Levelt models (" +
              std::to_string(weighted) + " weighted projective), " + fmt(t) + " s"};
}

/// Random irreducible Levelt system of rank r whose exponents are unions of
/// orbits of a nontrivial subgroup H of (Z/cZ)^*, when one fits.
std::optional<ExponentData> orbit_system(long c, std::size_t r, std::mt19937_64& rng) {
  auto subs = all_subgroups(c);
  const GaloisSubgroup& H = subs[std::uniform_int_distribution<std::size_t>(0, subs.size() - 1)(rng)];
  std::vector<std::vector<long>> orbits;
  std::vector<bool> seen(static_cast<std::size_t>(c), false);
  for (long k = 0; k < c; ++k) {
    if (seen[static_cast<std::size_t>(k)]) continue;
    std::vector<long> orb;
    for (long g : H.elements()) {
      const long y = (g * k) % c;
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = true;
        orb.push_back(y);
      }
    }
    orbits.push_back(orb);
  }
  auto fill = [&](std::vector<Rat>& xs) {
    for (int tries = 0; tries < 50 && xs.size() < r; ++tries) {
      const auto& orb = orbits[std::uniform_int_distribution<std::size_t>(0, orbits.size() - 1)(rng)];
      if (xs.size() + orb.size() > r) continue;
      for (long k : orb) xs.push_back(make_rat(k, c));
    }
    return xs.size() == r;
  };
  std::vector<Rat> a, b;
  if (!fill(a) || !fill(b)) return std::nullopt;
  ExponentData e(a, b);
  if (!is_irreducible(e)) return std::nullopt;
  return e;
}

Verdict criterion_descent() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::size_t done = 0, verified = 0, obstructed = 0, nontrivial = 0;
  long max_c = 0;
  std::size_t max_rank = 0;
  while (done < 100) {
    const long c = std::uniform_int_distribution<long>(3, 24)(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    auto e = orbit_system(c, r, rng);
    if (!e) continue;
    ++done;
    const MonodromyRep base = levelt_build(*e);
    const GaloisSubgroup G = max_good_subgroup(*e);
    if (G.order() > 1) ++nontrivial;
    max_c = std::max(max_c, base.conductor);
    max_rank = std::max(max_rank, base.rank);
    const MonodromyRep scrambled = change_basis(base, random_invertible(base.rank, base.conductor, rng));
    try {
      const DescentCertificate cert = descend(scrambled, G);
      const CycNum one = CycNum::one(base.conductor);
      bool good = verify_K_model(cert, scrambled);
      for (const auto* m : cert.model.matrices()) good = good && is_fixed_by(*m, G);
      const auto bm = base.matrices();
      const auto cm = cert.model.matrices();
      for (std::size_t i = 0; i < bm.size(); ++i) good = good && charpoly(*bm[i], one) == charpoly(*cm[i], one);
      if (good) ++verified;
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::Obstructed) ++obstructed;
    }
  }
  const double t = seconds_since(t0);
  return {verified == 100 && obstructed == 0 && t < 60,
          std::to_string(verified) + "/100 verified, " + std::to_string(nontrivial) + " with nontrivial subgroup, " +
              std::to_string(obstructed) + " obstructed, max c " + std::to_string(max_c) + ", max rank " +
              std::to_string(max_rank) + ", " + fmt(t) + " s"};
}

Verdict criterion_rigidity(const std::vector<ExponentData>& systems) {
  std::size_t built = 0, violations = 0;
  for (const auto& e : systems) {
    if (e.n() != e.m() || !is_irreducible(e)) continue;
    const MonodromyRep rep = levelt_build(e);
    const CycMatrix id = CycMatrix::identity(rep.rank, CycNum::one(rep.conductor));
    if (rank(rep.M1 - id) > 1) ++violations;
    ++built;
  }
  return {violations == 0 && built > 0,
          std::to_string(built) + " Levelt models, " + std::to_string(violations) + " with rank(M1 - I) > 1"};
}

Verdict criterion_perverse(const std::vector<ExponentData>& fixtures) {
  std::size_t diagrams = 0, axiom_failures = 0, dim_failures = 0;
  for (const auto& e : fixtures) {
    if (e.n() != e.m() || !is_irreducible(e)) continue;
    const MonodromyRep rep = levelt_build(e);
    const CycMatrix id = CycMatrix::identity(rep.rank, CycNum::one(rep.conductor));
    for (const auto* t : rep.matrices())
      for (auto kind : {ExtensionKind::Shriek, ExtensionKind::Star, ExtensionKind::Middle}) {
        const GlueDiagram d = from_monodromy(*t, {kind, 0});
        ++diagrams;
        if (!satisfies_axioms(d)) ++axiom_failures;
        if (kind == ExtensionKind::Middle && d.dim_F != rank(*t - id)) ++dim_failures;
      }
  }
  return {axiom_failures == 0 && dim_failures == 0 && diagrams > 0,
          std::to_string(diagrams) + " diagrams, " + std::to_string(axiom_failures) + " axiom failures, " +
              std::to_string(dim_failures) + " middle dimension mismatches"};
}

struct StokesRun {
  StokesData data;
  FieldVerification field;
  double seconds;
};

StokesRun stokes_run(const ExponentData& e, unsigned bits) {
  const auto t0 = Clock::now();
  StokesConfig cfg;
  cfg.precision_bits = bits;
  StokesData sd = stokes_matrices(e, cfg);
  FieldVerification fv = verify_field_of_stokes(sd, criteria_report(e), 1e-6);
  return {sd, fv, seconds_since(t0)};
}

Verdict criterion_stokes(const std::vector<ExponentData>& systems, std::vector<StokesRun>& runs) {
  Verdict v;
  for (const auto& e : systems) {
    StokesRun r = stokes_run(e, 128);
    const bool eig = r.data.eigenvalue_distance < 1e-6;
    const bool forbidden = r.data.forbidden_max < r.data.precision.error_bound;
    const bool real = r.field.real_checked && r.field.ok;
    const bool fast = r.seconds < 60;
    v.pass = v.pass && eig && forbidden && real && fast;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += to_string(e.alpha()) + to_string(e.beta()) + ": eigenvalue distance " +
                fmt(r.data.eigenvalue_distance) + ", forbidden " + fmt(r.data.forbidden_max) + " < bound " +
                fmt(r.data.precision.error_bound) + ", real " + (real ? "yes" : "no") + ", " + fmt(r.seconds) + " s";
    runs.push_back(std::move(r));
  }
  return v;
}

Verdict criterion_precision(const std::vector<ExponentData>& systems, const std::vector<StokesRun>& base) {
  Verdict v;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const StokesRun hi = stokes_run(systems[i], 256);
    const double lo_b = base[i].data.precision.error_bound, hi_b = hi.data.precision.error_bound;
    v.pass = v.pass && hi_b * 2 <= lo_b;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += to_string(systems[i].alpha()) + to_string(systems[i].beta()) + ": bound " + fmt(lo_b) + " -> " +
                fmt(hi_b);
  }
  return v;
}

Verdict criterion_cyclotomic() {
  const auto t0 = Clock::now();
  std::size_t poly_failures = 0;
  {
    PrecisionGuard guard(128);
    for (long c = 1; c <= 105; ++c) {
      const IntPoly phi = cyclotomic_poly(c);
      std::vector<Complex> prod{Complex(Real(1))};
      for (long k : unit_residues(c)) {
        const Complex z = unit_root(make_rat(k, c));
        std::vector<Complex> next(prod.size() + 1);
        for (std::size_t i = 0; i < prod.size(); ++i) {
          next[i + 1] += prod[i];
          next[i] -= z * prod[i];
        }
        prod = std::move(next);
      }
      bool ok = prod.size() == phi.size() && sgn(phi.back()) != 0;
      for (std::size_t i = 0; ok && i < phi.size(); ++i)
        ok = abs(prod[i].re - to_real(Rat(phi[i]))) < Real(1e-9) && abs(prod[i].im) < Real(1e-9);
      if (!ok) ++poly_failures;
    }
  }
  std::mt19937_64 rng(9);
  std::size_t hom_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const long c = std::uniform_int_distribution<long>(3, 105)(rng);
    const auto units = unit_residues(c);
    const long g = units[std::uniform_int_distribution<std::size_t>(0, units.size() - 1)(rng)];
    auto random_elem = [&] {
      std::vector<Rat> coeffs(4);
      for (auto& x : coeffs) x = make_rat(std::uniform_int_distribution<long>(-4, 4)(rng), 1);
      CycNum out = CycNum::zero(c);
      for (std::size_t i = 0; i < coeffs.size(); ++i)
        out += CycNum::zeta(c, std::uniform_int_distribution<long>(0, c - 1)(rng)) * coeffs[i];
      return out;
    };
    const CycNum a = random_elem(), b = random_elem();
    if (galois_apply(g, a * b) != galois_apply(g, a) * galois_apply(g, b) ||
        galois_apply(g, a + b) != galois_apply(g, a) + galois_apply(g, b))
      ++hom_failures;
  }
  const double t = seconds_since(t0);
  return {poly_failures == 0 && hom_failures == 0 && t < 5,
          "Phi_c for c <= 105: " + std::to_string(poly_failures) + " failures; homomorphism on 1000 cases: " +
              std::to_string(hom_failures) + " failures; " + fmt(t) + " s"};
}

Verdict criterion_determinism(const std::string& catalogue) {
  std::ifstream in(catalogue);
  std::string line;
  std::size_t entries = 0, differing = 0;
  auto render = [](const cli::RunConfig& cfg) {
    const cli::RunResult r = cfg.subcommand == "batch" ? cli::run_batch(cfg) : cli::run(cfg);
    return cli::render(r.report, cfg.format) + std::to_string(r.exit_code);
  };
  while (std::getline(in, line)) {
    if (hgb::detail::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    cli::RunConfig cfg;
    cfg.alpha = cli::detail::exponents_from(j.value("alpha", nlohmann::ordered_json()));
    cfg.beta = cli::detail::exponents_from(j.value("beta", nlohmann::ordered_json()));
    cfg.subcommand = j.contains("stages") ? j["stages"].back().get<std::string>() : "all";
    cfg.scramble = true;
    cfg.seed = 11;
    for (const char* cmd : {cfg.subcommand.c_str(), "all"}) {
      cli::RunConfig one = cfg;
      one.subcommand = cmd;
      if (render(one) != render(one)) ++differing;
      ++entries;
    }
  }
  cli::RunConfig batch;
  batch.subcommand = "batch";
  batch.batch_path = catalogue;
  if (render(batch) != render(batch)) ++differing;
  ++entries;
  return {differing == 0 && entries > 1,
          std::to_string(entries) + " report pairs, " + std::to_string(differing) + " differing"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : HGB_TEST_DATA;
  bool all_pass = true;
  auto record = [&](int id, const std::string& title, const std::function<Verdict()>& f) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& err) {
      v = {false, std::string("exception: ") + err.what()};
    }
    all_pass = all_pass && v.pass;
    report(id, title, v);
  };

  const auto exhaustive = exhaustive_systems();
  std::vector<ExponentData> systems = exhaustive;
  const auto sample = mixed_sample(20000);
  systems.insert(systems.end(), sample.begin(), sample.end());
  const auto fixtures = read_fixtures(data_dir + "/rational_fixtures.ndjson");
  auto perverse_set = fixtures;
  for (const auto& e : read_fixtures(data_dir + "/catalogue.ndjson")) perverse_set.push_back(e);
  const std::vector<ExponentData> stokes_systems{ExponentData({Rat(0), make_rat(1, 2)}, {}),
                                                 ExponentData({Rat(0), make_rat(1, 3), make_rat(2, 3)}, {Rat(0)})};
  std::vector<StokesRun> runs;

  double enum_seconds = 0;
  record(1, "max_good_subgroup equals the brute-force stabilizer",
         [&] { return criterion_enumeration(systems, exhaustive.size(), enum_seconds); });
  record(2, "real structure test agrees with complex conjugation in G_max", [&] { return criterion_real(systems); });
  record(3, "rational criterion gives exactly rational Levelt matrices", [&] { return criterion_rational(fixtures); });
  record(4, "descent recovers fixed-field models from random scrambles", [&] { return criterion_descent(); });
  record(5, "rank(M1 - I) <= 1 for every Levelt model", [&] { return criterion_rigidity(exhaustive); });
  record(6, "glueing diagram axioms and middle extension dimension", [&] { return criterion_perverse(perverse_set); });
  record(7, "Stokes eigenvalues, forbidden entries and real entries",
         [&] { return criterion_stokes(stokes_systems, runs); });
  record(8, "doubling precision at least halves the error bound", [&] {
    if (runs.size() != stokes_systems.size()) return Verdict{false, "criterion 7 did not complete"};
    return criterion_precision(stokes_systems, runs);
  });
  record(9, "cyclotomic polynomials and Galois homomorphism", [&] { return criterion_cyclotomic(); });
  record(10, "identical configurations give byte-identical reports",
         [&] { return criterion_determinism(data_dir + "/catalogue.ndjson"); });
  return all_pass ? 0 : 1;
}
