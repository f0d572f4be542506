#pragma once

// Command-line driver: argument parsing, subcommand dispatch, JSON and
// markdown reports, the NDJSON batch runner and the CSV emitter for Stokes
// geometry. Exit codes: 0 success, 1 structural negative, 2 usage, 3 numeric.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hgb/criteria.hpp"
#include "hgb/cyclotomic.hpp"
#include "hgb/errors.hpp"
#include "hgb/hypersys.hpp"
#include "hgb/monodromy.hpp"
#include "hgb/perverse.hpp"
#include "hgb/rational.hpp"
#include "hgb/stokes.hpp"

namespace hgb::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { Success = 0, Negative = 1, Usage = 2, Numeric = 3 };

struct RunConfig {
  std::string subcommand;
  std::string alpha_text;
  std::string beta_text;
  std::vector<Rat> alpha;
  std::vector<Rat> beta;
  /// Exponents given as decimals through --alpha-approx / --beta-approx.
  bool approximate = false;
  std::string field_spec = "auto";
  unsigned precision_bits = 128;
  double tolerance = 1e-6;
  std::string format = "json";
  std::uint64_t seed = 1;
  /// Conjugate the Levelt model by a random matrix before descending.
  bool scramble = false;
  std::optional<double> epsilon;
  std::optional<double> radius;
  std::optional<std::size_t> order;
  std::string csv_path;
  std::string batch_path;
};

/// Usage problem detected while parsing; maps to exit code 2.
struct UsageError {
  std::string message;
  int exit_code = Usage;
};

struct RunResult {
  Json report;
  int exit_code = Success;
};

// ---------------------------------------------------------------------------
// Parsing

/// Parses argv into a RunConfig. Throws UsageError on malformed input; a
/// help request yields a UsageError with exit code 0 and the help text.
inline RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Fields of definition of hypergeometric Betti data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  RunConfig cfg;
  std::string alpha_approx, beta_approx;
  std::string precision_text;

  auto add_exponents = [&](CLI::App* sub, bool approx) {
    sub->add_option("--alpha", cfg.alpha_text, "comma separated rationals a/b");
    sub->add_option("--beta", cfg.beta_text, "comma separated rationals a/b");
    if (approx) {
      sub->add_option("--alpha-approx", alpha_approx, "comma separated decimals (stokes only)");
      sub->add_option("--beta-approx", beta_approx, "comma separated decimals (stokes only)");
    }
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--field", cfg.field_spec, "auto | rationals | real | subgroup:g1,g2,...");
    sub->add_option("--precision", cfg.precision_bits, "working precision in bits (>= 53)");
    sub->add_option("--tol", cfg.tolerance, "verification tolerance (> 0)");
    sub->add_option("--format", cfg.format, "json | markdown")->check(CLI::IsMember({"json", "markdown"}));
    sub->add_option("--seed", cfg.seed, "seed for randomized searches");
  };
  auto add_stokes = [&](CLI::App* sub) {
    sub->add_option("--epsilon", cfg.epsilon, "half width of the sector overlaps");
    sub->add_option("--radius", cfg.radius, "matching radius |u|");
    sub->add_option("--order", cfg.order, "truncation order of the formal series");
    sub->add_option("--csv", cfg.csv_path, "write Stokes directions and sectors as CSV");
  };

  for (const char* name : {"classify", "monodromy", "descend", "perverse", "stokes", "all"}) {
    CLI::App* sub = app.add_subcommand(name, std::string(name) + " subcommand");
    const bool numeric = std::string(name) == "stokes" || std::string(name) == "all";
    add_exponents(sub, std::string(name) == "stokes");
    add_common(sub);
    if (numeric) add_stokes(sub);
    if (std::string(name) == "descend" || std::string(name) == "all")
      sub->add_flag("--scramble", cfg.scramble, "conjugate the Levelt model by a random matrix first");
  }
  CLI::App* batch = app.add_subcommand("batch", "run an NDJSON catalogue");
  batch->add_option("catalogue", cfg.batch_path, "catalogue file")->required();
  add_common(batch);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    throw UsageError{out.str() + err.str(), code == 0 ? Success : Usage};
  }
  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  if (cfg.precision_bits < 53) throw UsageError{"--precision must be at least 53 bits"};
  if (!(cfg.tolerance > 0)) throw UsageError{"--tol must be positive"};
  if (!alpha_approx.empty() || !beta_approx.empty()) {
    if (!cfg.alpha_text.empty() || !cfg.beta_text.empty())
      throw UsageError{"--alpha-approx/--beta-approx cannot be combined with --alpha/--beta"};
    cfg.approximate = true;
    cfg.alpha_text = alpha_approx;
    cfg.beta_text = beta_approx;
  }
  if (cfg.subcommand != "batch") {
    try {
      if (cfg.approximate) {
        cfg.alpha = parse_list(cfg.alpha_text, [](std::string_view t) { return parse_decimal(t); });
        cfg.beta = parse_list(cfg.beta_text, [](std::string_view t) { return parse_decimal(t); });
      } else {
        cfg.alpha = parse_rat_list(cfg.alpha_text);
        cfg.beta = parse_rat_list(cfg.beta_text);
      }
    } catch (const Error& e) {
      throw UsageError{e.what()};
    }
    if (cfg.alpha.empty() && cfg.beta.empty()) throw UsageError{"no exponents given (use --alpha and --beta)"};
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Serialization helpers

namespace detail {

inline Json rat_list(const std::vector<Rat>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(x.get_str());
  return out;
}

inline Json long_list(const std::vector<long>& xs) {
  Json out = Json::array();
  for (long x : xs) out.push_back(x);
  return out;
}

inline Json cyc_matrix(const CycMatrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    out.push_back(row);
  }
  return out;
}

inline Json complex_value(std::complex<double> z) { return Json::array({z.real(), z.imag()}); }

inline Json complex_value(const Complex& z) { return complex_value(to_std(z)); }

inline Json complex_matrix(const CMatrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_value(m(i, j)));
    out.push_back(row);
  }
  return out;
}

inline Json complex_list(const std::vector<Complex>& xs) {
  Json out = Json::array();
  for (const auto& z : xs) out.push_back(complex_value(z));
  return out;
}

inline Json arc(const Arc& a) { return Json::array({a.lo, a.hi}); }

}  // namespace detail

inline Json to_json(const GaloisSubgroup& G) { return detail::long_list(G.elements()); }

inline Json to_json(const CriteriaReport& r) {
  Json j;
  j["g_max"] = to_json(r.g_max);
  j["real_structure"] = r.real_structure;
  j["rational_structure"] = r.rational_structure;
  j["fixed_field_degree"] = r.fixed_field_degree;
  if (r.phi_decomposition)
    j["phi_decomposition"] = {{"r_list", detail::long_list(r.phi_decomposition->r_list)},
                              {"s_list", detail::long_list(r.phi_decomposition->s_list)}};
  else
    j["phi_decomposition"] = nullptr;
  if (r.weights)
    j["weights"] = {{"w", detail::long_list(r.weights->w)}, {"v", detail::long_list(r.weights->v)}};
  else
    j["weights"] = nullptr;
  j["laurent_invariant"] = r.laurent_invariant;
  j["orbit_sum_element"] = to_string(r.orbit_sum_element);
  j["warnings"] = r.warnings;
  return j;
}

inline Json to_json(const MonodromyRep& rep) {
  return {{"rank", rep.rank},
          {"conductor", rep.conductor},
          {"M0", detail::cyc_matrix(rep.M0)},
          {"M1", detail::cyc_matrix(rep.M1)},
          {"Minf", detail::cyc_matrix(rep.Minf)}};
}

inline Json to_json(const DescentCertificate& cert, bool verified) {
  return {{"subgroup", to_json(cert.G)},
          {"generators", detail::long_list(cert.generators)},
          {"fixed_field_degree", cert.fixed_field_degree},
          {"method", cert.method},
          {"verified", verified},
          {"basis_change", detail::cyc_matrix(cert.S)},
          {"model", to_json(cert.model)}};
}

inline Json to_json(const StokesGeometry& g) {
  return {{"d", g.d},
          {"stokes_directions", g.stokes_directions},
          {"epsilon", g.epsilon},
          {"b_plus", g.b_plus},
          {"S_plus", detail::arc(g.S_plus)},
          {"S_minus", detail::arc(g.S_minus)},
          {"sigma_plus", detail::arc(g.sigma_plus)},
          {"sigma_minus", detail::arc(g.sigma_minus)},
          {"rule", g.rule}};
}

inline Json to_json(const StokesData& sd, const std::optional<FieldVerification>& fv) {
  Json j;
  Json factors = Json::array();
  for (const auto& f : sd.formal.factors)
    factors.push_back({{"coefficient", to_string(f.coefficient)},
                       {"value", detail::complex_value(factor_value(f))},
                       {"multiplicity", f.multiplicity}});
  j["formal"] = {{"d", sd.formal.d},
                 {"factors", factors},
                 {"katz_closed_form", sd.formal.katz_closed_form},
                 {"method", sd.formal.method}};
  j["geometry"] = to_json(sd.geometry);
  Json cols = Json::array();
  for (std::size_t i = 0; i < sd.columns.size(); ++i) {
    const auto& c = sd.columns[i];
    Json lead = Json::array();
    for (std::size_t k = 1; k < std::min<std::size_t>(c.coeffs.size(), 4); ++k) lead.push_back(to_string(c.coeffs[k]));
    cols.push_back({{"label", sd.column_labels[i]}, {"rho", to_string(c.rho)}, {"leading_coefficients", lead}});
  }
  j["columns"] = cols;
  j["S_plus"] = detail::complex_matrix(sd.S_plus);
  j["S_minus"] = detail::complex_matrix(sd.S_minus);
  j["formal_monodromy"] = detail::complex_matrix(sd.formal_monodromy);
  j["monodromy_u"] = detail::complex_matrix(sd.monodromy_u);
  j["eigenvalues"] = {{"level", sd.q_level ? "q" : "u"},
                      {"reconstructed", detail::complex_list(sd.reconstructed_eigenvalues)},
                      {"expected", detail::complex_list(sd.expected_eigenvalues)},
                      {"distance", sd.eigenvalue_distance},
                      {"u_level_distance", sd.u_level_distance}};
  j["shape"] = {{"forbidden_max", sd.forbidden_max}, {"diagonal_deviation", sd.diagonal_deviation}};
  j["precision"] = {{"precision_bits", sd.precision.precision_bits},
                    {"radius", sd.precision.radius},
                    {"truncation_order", sd.precision.truncation_order},
                    {"error_bound", sd.precision.error_bound},
                    {"match_condition", sd.precision.match_condition},
                    {"gauge_difference", sd.precision.gauge_difference}};
  if (fv) {
    Json entries = Json::array();
    for (const auto& ec : fv->entries)
      entries.push_back({{"matrix", ec.matrix},
                         {"row", ec.row},
                         {"col", ec.col},
                         {"value", detail::complex_value(ec.value)},
                         {"real", ec.real},
                         {"rational", ec.rational ? Json(ec.rational->get_str()) : Json(nullptr)}});
    j["verification"] = {{"ok", fv->ok},
                         {"tolerance", fv->tolerance},
                         {"real_checked", fv->real_checked},
                         {"rational_checked", fv->rational_checked},
                         {"S_plus_normalized", detail::complex_matrix(fv->S_plus_normalized)},
                         {"S_minus_normalized", detail::complex_matrix(fv->S_minus_normalized)},
                         {"entries", entries}};
  } else {
    j["verification"] = nullptr;
  }
  j["warnings"] = sd.warnings;
  return j;
}

/// Stokes directions, sectors and overlaps as rows kind,name,start,end (radians).
inline std::string stokes_geometry_csv(const StokesGeometry& g) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "kind,name,start,end\n";
  for (std::size_t i = 0; i < g.stokes_directions.size(); ++i)
    out << "direction," << i << ',' << g.stokes_directions[i] << ',' << g.stokes_directions[i] << '\n';
  out << "sector,S_plus," << g.S_plus.lo << ',' << g.S_plus.hi << '\n';
  out << "sector,S_minus," << g.S_minus.lo << ',' << g.S_minus.hi << '\n';
  out << "overlap,sigma_plus," << g.sigma_plus.lo << ',' << g.sigma_plus.hi << '\n';
  out << "overlap,sigma_minus," << g.sigma_minus.lo << ',' << g.sigma_minus.hi << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Field specification

/// Resolves --field against the conductor: auto is G_max, rationals the full
/// group, real the subgroup {1, c - 1}, subgroup:g1,g2 the generated subgroup.
inline GaloisSubgroup resolve_field(const std::string& spec, const ExponentData& e) {
  const long c = e.conductor();
  if (spec == "auto") return max_good_subgroup(e);
  if (spec == "rationals") return GaloisSubgroup::full(c);
  if (spec == "real") return GaloisSubgroup::generated_by(c, {c - 1});
  const std::string prefix = "subgroup:";
  if (spec.rfind(prefix, 0) == 0) {
    std::vector<long> gens;
    for (const auto& g : parse_rat_list(spec.substr(prefix.size()))) {
      if (g.get_den() != 1) throw Error(ErrorKind::ParseError, "subgroup generator '" + g.get_str() + "' is not an integer");
      const long v = to_long(g.get_num());
      if (std::gcd(mod_pos(v, c), c) != 1 && c > 1)
        throw Error(ErrorKind::ParseError, "subgroup generator " + std::to_string(v) + " is not a unit modulo " + std::to_string(c));
      gens.push_back(v);
    }
    return GaloisSubgroup::generated_by(c, gens);
  }
  throw Error(ErrorKind::ParseError, "unknown field specification '" + spec + "'");
}

/// First witness that G fails to stabilize the exponent multisets.
inline std::optional<std::string> goodness_obstruction(const ExponentData& e, const GaloisSubgroup& G) {
  for (long g : G.elements())
    for (const auto* list : {&e.alpha(), &e.beta()}) {
      const auto image = act(g, *list);
      if (image == *list) continue;
      const char* name = list == &e.alpha() ? "alpha" : "beta";
      for (const auto& x : *list) {
        const Rat y = act(g, x);
        if (std::count(list->begin(), list->end(), y) < std::count(list->begin(), list->end(), x))
          return std::string("incomplete orbit: ") + name + " exponent " + x.get_str() + " maps to " + y.get_str() +
                 " under g=" + std::to_string(g) + ", breaking the " + name + " multiset";
      }
    }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Stages

namespace detail {

inline Json system_json(const ExponentData& e) {
  const auto cls = classify(e);
  return {{"kind", to_string(cls.kind)},
          {"irreducible", cls.irreducible},
          {"n", e.n()},
          {"m", e.m()},
          {"conductor", e.conductor()},
          {"operator", to_string(build_operator(e))}};
}

inline Json monodromy_stage(const ExponentData& e, const GaloisSubgroup& G) {
  const MonodromyRep rep = levelt_build(e);
  Json j = to_json(rep);
  const CycMatrix id = CycMatrix::identity(rep.rank, CycNum::one(rep.conductor));
  j["rank_M1_minus_I"] = rank(rep.M1 - id);
  j["product_is_identity"] = rep.M0 * rep.M1 * rep.Minf == id;
  bool fixed = true;
  for (const auto* m : rep.matrices()) fixed = fixed && is_fixed_by(*m, G);
  j["entries_in_fixed_field"] = fixed;
  bool rational = true;
  for (const auto* m : rep.matrices())
    for (std::size_t i = 0; i < m->rows(); ++i)
      for (std::size_t k = 0; k < m->cols(); ++k) rational = rational && (*m)(i, k).is_rational();
  j["entries_rational"] = rational;
  return j;
}

inline Json descend_stage(const ExponentData& e, const GaloisSubgroup& G, const RunConfig& cfg) {
  MonodromyRep rep = levelt_build(e);
  if (cfg.scramble) {
    std::mt19937_64 rng(cfg.seed);
    rep = change_basis(rep, random_invertible(rep.rank, rep.conductor, rng));
  }
  const DescentCertificate cert = descend(rep, G);
  Json j = to_json(cert, verify_K_model(cert, rep));
  j["scrambled"] = cfg.scramble;
  return j;
}

inline Json perverse_stage(const ExponentData& e, const GaloisSubgroup& G, bool& all_exist) {
  const MonodromyRep rep = levelt_build(e);
  Json out = Json::array();
  const std::pair<const char*, const CycMatrix*> points[] = {{"0", &rep.M0}, {"1", &rep.M1}, {"infinity", &rep.Minf}};
  for (const auto& [point, T] : points)
    for (auto kind : {ExtensionKind::Shriek, ExtensionKind::Star, ExtensionKind::Middle}) {
      Json row{{"point", point}, {"extension", to_string(kind)}};
      const GlueDiagram d = from_monodromy(*T, {kind, 0});
      row["dim_E"] = d.dim_E;
      row["dim_F"] = d.dim_F;
      row["axioms"] = satisfies_axioms(d);
      try {
        const KStructureResult k = has_K_structure(d, G);
        row["K_structure"] = k.exists;
        row["method"] = k.method;
        all_exist = all_exist && k.exists;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::Obstructed) throw;
        row["K_structure"] = nullptr;
        row["method"] = err.what();
        all_exist = false;
      }
      out.push_back(row);
    }
  return out;
}

inline Json stokes_stage(const ExponentData& original, const RunConfig& cfg, Json& warnings) {
  auto [e, transform] = swap_if_needed(original);
  Json j;
  j["transform"] = transform.applied ? Json(transform.description) : Json(nullptr);
  StokesConfig sc;
  sc.precision_bits = cfg.precision_bits;
  sc.tolerance = cfg.tolerance;
  sc.epsilon = cfg.epsilon;
  sc.radius = cfg.radius;
  sc.order = cfg.order;
  const StokesData sd = stokes_matrices(e, sc);
  std::optional<FieldVerification> fv;
  if (!cfg.approximate) {
    fv = verify_field_of_stokes(sd, criteria_report(e), cfg.tolerance, sc.rational_denominator_bound);
  } else {
    warnings.push_back("approximate exponents: criteria and field verification skipped");
  }
  j.update(to_json(sd, fv));
  if (!cfg.csv_path.empty()) {
    std::ofstream csv(cfg.csv_path);
    if (!csv) throw UsageError{"cannot write CSV file '" + cfg.csv_path + "'"};
    csv << stokes_geometry_csv(sd.geometry);
  }
  return j;
}

}  // namespace detail

inline int exit_code_for(const Error& e) {
  if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::InvalidExponent) return Usage;
  return is_numeric(e.kind()) ? Numeric : Negative;
}

/// Runs one non-batch subcommand. The report is produced even on structural
/// negatives and numeric failures; usage errors propagate as UsageError.
inline RunResult run(const RunConfig& cfg) {
  RunResult res;
  Json& r = res.report;
  r["version"] = kVersion;
  r["command"] = cfg.subcommand;
  r["input"] = {{"alpha", detail::rat_list(cfg.alpha)}, {"beta", detail::rat_list(cfg.beta)}, {"approximate", cfg.approximate}};
  r["config"] = {{"field", cfg.field_spec},
                 {"precision_bits", cfg.precision_bits},
                 {"tolerance", cfg.tolerance},
                 {"seed", cfg.seed},
                 {"format", cfg.format}};
  Json warnings = Json::array();
  const std::string& cmd = cfg.subcommand;
  try {
    const ExponentData e = normalize(cfg.alpha, cfg.beta);
    r["normalized"] = {{"alpha", detail::rat_list(e.alpha())}, {"beta", detail::rat_list(e.beta())}};
    r["system"] = detail::system_json(e);
    if (cfg.approximate && cmd != "stokes") throw UsageError{"approximate exponents are accepted by stokes only"};
    if (!cfg.approximate) {
      const CriteriaReport rep = criteria_report(e);
      r["criteria"] = to_json(rep);
      for (const auto& w : rep.warnings) warnings.push_back(w);
    }
    std::optional<GaloisSubgroup> G;
    if (!cfg.approximate) {
      G = resolve_field(cfg.field_spec, e);
      r["field"] = {{"subgroup", to_json(*G)},
                    {"degree", euler_phi(e.conductor()) / static_cast<long>(G->order())},
                    {"good", is_g_good(e, *G)}};
    }
    bool all = cmd == "all";
    const bool levelt = e.n() == e.m() && is_irreducible(e);
    if (all && !levelt) {
      warnings.push_back("Levelt stages need an irreducible system with n = m; monodromy, descent and perverse skipped");
      all = false;
      if (e.n() != e.m()) {
        r["stokes"] = detail::stokes_stage(e, cfg, warnings);
        const Json& v = r["stokes"]["verification"];
        if (!v.is_null() && !v["ok"].get<bool>()) res.exit_code = Negative;
      }
    }
    if (cmd == "monodromy" || all) r["monodromy"] = detail::monodromy_stage(e, *G);
    if (cmd == "descend" || all) {
      if (auto why = goodness_obstruction(e, *G)) {
        r["descent"] = {{"status", "obstructed"}, {"reason", *why}};
        res.exit_code = Negative;
      } else {
        r["descent"] = detail::descend_stage(e, *G, cfg);
      }
    }
    if (cmd == "perverse" || all) {
      bool exist = true;
      if (auto why = goodness_obstruction(e, *G)) {
        r["perverse"] = {{"status", "obstructed"}, {"reason", *why}};
        res.exit_code = Negative;
      } else {
        r["perverse"] = detail::perverse_stage(e, *G, exist);
        if (!exist) res.exit_code = Negative;
      }
    }
    if (cmd == "stokes") {
      r["stokes"] = detail::stokes_stage(e, cfg, warnings);
      const Json& v = r["stokes"]["verification"];
      if (!v.is_null() && !v["ok"].get<bool>()) res.exit_code = Negative;
    } else if (all) {
      r["stokes"] = nullptr;
      warnings.push_back("regular system: no irregular point, Stokes stage skipped");
    }
    r["status"] = res.exit_code == Success ? "ok" : "negative";
  } catch (const Error& err) {
    res.exit_code = exit_code_for(err);
    if (res.exit_code == Usage) throw UsageError{err.what()};
    r["status"] = res.exit_code == Numeric ? "numeric-failure" : "negative";
    r["error"] = {{"kind", std::string(to_string(err.kind()))}, {"message", err.what()}};
  }
  r["warnings"] = warnings;
  r["exit_code"] = res.exit_code;
  return res;
}

// ---------------------------------------------------------------------------
// Batch

namespace detail {

inline std::vector<Rat> exponents_from(const Json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return parse_rat_list(v.get<std::string>());
  if (!v.is_array()) throw Error(ErrorKind::ParseError, "exponents must be a string or an array");
  std::vector<Rat> out;
  for (const auto& x : v) {
    if (x.is_string()) out.push_back(parse_rat(x.get<std::string>()));
    else if (x.is_number_integer()) out.push_back(Rat(x.get<long>()));
    else throw Error(ErrorKind::ParseError, "exponent entries must be strings or integers");
  }
  return out;
}

/// Compares one expectation key against the classify report.
inline std::optional<bool> check_expectation(const std::string& key, const Json& want, const Json& report) {
  if (key == "kind" || key == "irreducible" || key == "conductor")
    return report.contains("system") && report["system"].contains(key) && report["system"][key] == want;
  if (key == "descent_exists") {
    const bool exists = report.contains("descent") && report["descent"].contains("verified") &&
                        report["descent"]["verified"].get<bool>();
    return exists == want.get<bool>();
  }
  if (report.contains("criteria") && report["criteria"].contains(key)) return report["criteria"][key] == want;
  return std::nullopt;
}

}  // namespace detail

/// Runs every catalogue line; malformed lines become error rows.
inline RunResult run_batch(const RunConfig& cfg) {
  std::ifstream in(cfg.batch_path);
  if (!in) throw UsageError{"cannot read catalogue '" + cfg.batch_path + "'"};
  RunResult res;
  Json rows = Json::array();
  std::size_t passed = 0, failed = 0, errors = 0;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (hgb::detail::trim(line).empty()) continue;
    Json row{{"line", number}};
    try {
      const Json entry = Json::parse(line);
      RunConfig sub = cfg;
      sub.alpha = detail::exponents_from(entry.value("alpha", Json()));
      sub.beta = detail::exponents_from(entry.value("beta", Json()));
      sub.subcommand = "classify";
      row["alpha"] = detail::rat_list(sub.alpha);
      row["beta"] = detail::rat_list(sub.beta);
      if (entry.contains("stages"))
        for (const auto& st : entry["stages"]) {
          const std::string s = st.get<std::string>();
          if (s != "classify" && s != "monodromy" && s != "descend" && s != "perverse" && s != "stokes" && s != "all")
            throw Error(ErrorKind::ParseError, "unknown stage '" + s + "'");
          sub.subcommand = s;
        }
      if (entry.contains("field")) sub.field_spec = entry["field"].get<std::string>();
      const RunResult one = run(sub);
      Json checks = Json::object();
      bool ok = true;
      if (entry.contains("expectations"))
        for (const auto& [key, want] : entry["expectations"].items()) {
          if (key == "exit_code") {
            const bool hit = one.exit_code == want.get<int>();
            checks[key] = hit;
            ok = ok && hit;
            continue;
          }
          const auto hit = detail::check_expectation(key, want, one.report);
          if (!hit) throw Error(ErrorKind::ParseError, "unknown expectation '" + key + "'");
          checks[key] = *hit;
          ok = ok && *hit;
        }
      row["stage"] = sub.subcommand;
      row["exit_code"] = one.exit_code;
      row["checks"] = checks;
      row["status"] = ok ? "pass" : "fail";
      (ok ? passed : failed)++;
    } catch (const UsageError& err) {
      row["status"] = "error";
      row["message"] = err.message;
      ++errors;
    } catch (const std::exception& err) {
      row["status"] = "error";
      row["message"] = err.what();
      ++errors;
    }
    rows.push_back(row);
  }
  res.report["version"] = kVersion;
  res.report["command"] = "batch";
  res.report["catalogue"] = cfg.batch_path;
  res.report["rows"] = rows;
  res.report["summary"] = {{"total", rows.size()}, {"passed", passed}, {"failed", failed}, {"errors", errors}};
  res.exit_code = failed + errors == 0 ? Success : Negative;
  res.report["exit_code"] = res.exit_code;
  return res;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline bool is_flat(const Json& v) {
  if (!v.is_array()) return !v.is_object();
  for (const auto& x : v)
    if (x.is_object()) return false;
  return true;
}

inline void markdown(const Json& v, const std::string& key, int depth, std::ostringstream& out) {
  if (v.is_object()) {
    out << std::string(static_cast<std::size_t>(std::min(depth, 6)), '#') << ' ' << key << "\n\n";
    for (const auto& [k, x] : v.items())
      if (is_flat(x)) out << "- **" << k << "**: " << scalar_text(x) << '\n';
    out << '\n';
    for (const auto& [k, x] : v.items())
      if (!is_flat(x)) markdown(x, k, depth + 1, out);
    return;
  }
  if (v.is_array()) {
    out << std::string(static_cast<std::size_t>(std::min(depth, 6)), '#') << ' ' << key << "\n\n";
    std::size_t i = 0;
    for (const auto& x : v) {
      if (x.is_object()) markdown(x, key + " " + std::to_string(i), depth + 1, out);
      else out << "- " << scalar_text(x) << '\n';
      ++i;
    }
    out << '\n';
    return;
  }
  out << "- **" << key << "**: " << scalar_text(v) << "\n";
}

}  // namespace detail

inline std::string render(const Json& report, const std::string& format) {
  if (format == "markdown") {
    std::ostringstream out;
    detail::markdown(report, "hgb report", 1, out);
    return out.str();
  }
  return report.dump(2) + "\n";
}

/// Full driver used by the executable: parse, run, render.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const UsageError& u) {
    (u.exit_code == Success ? out : err) << u.message;
    if (!u.message.empty() && u.message.back() != '\n') (u.exit_code == Success ? out : err) << '\n';
    return u.exit_code;
  }
  try {
    const RunResult res = cfg.subcommand == "batch" ? run_batch(cfg) : run(cfg);
    out << render(res.report, cfg.format);
    return res.exit_code;
  } catch (const UsageError& u) {
    err << u.message << '\n';
    return Usage;
  }
}

}  // namespace hgb::cli
