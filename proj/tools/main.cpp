#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "io.hpp"
#include "subdyn/chabauty.hpp"
#include "subdyn/error.hpp"
#include "subdyn/irs.hpp"
#include "subdyn/pingpong.hpp"
#include "subdyn/projective.hpp"
#include "subdyn/recurrence.hpp"
#include "subdyn/stabtop.hpp"
#include "subdyn/stallings.hpp"
#include "subdyn/synthesis.hpp"

using namespace subdyn;
using cli::InputError;
using cli::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { CERTIFIED = 0, FALSIFIED = 1, INCONCLUSIVE = 2, INPUT = 3 };

const char* verdict_name(int e) {
  switch (e) {
    case CERTIFIED: return "true";
    case FALSIFIED: return "false";
    case INCONCLUSIVE: return "inconclusive";
    default: return "input_error";
  }
}

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::BOUND_EXHAUSTED:
    case ErrorCode::RANGE_EXHAUSTED:
    case ErrorCode::SEARCH_EXHAUSTED:
    case ErrorCode::NO_CONVERGENCE:
    case ErrorCode::NOT_FOUND: return INCONCLUSIVE;
    case ErrorCode::OVERLAP:
    case ErrorCode::NOT_CONTRACTING:
    case ErrorCode::DEGENERATE_POSITION:
    case ErrorCode::INFINITE_INDEX:
    case ErrorCode::NOT_NORMAL:
    case ErrorCode::NOT_ALMOST_NORMAL:
    case ErrorCode::NOT_INVARIANT_EVENT: return FALSIFIED;
    default: return INPUT;
  }
}

struct Config {
  std::uint64_t seed = 0;
  int precision = 0;
  double tolerance = 0;
  long budget = 10000;
  std::string out;
  bool no_timestamp = false;
  cli::FieldOverrides overrides() const { return {tolerance, precision}; }
};

struct Outcome {
  int exit = CERTIFIED;
  json result = json::object();
};

// ------------------------------------------------------------------ helpers

cli::Subgroup subgroup_file(const std::string& path) { return cli::parse_subgroup(cli::load_json(path), path); }

void same_rank(const cli::Subgroup& a, const cli::Subgroup& b) {
  if (a.rank != b.rank) throw InputError("subgroups have different ranks");
}

Word word_arg(int rank, const std::string& s) {
  try {
    return Word::parse(rank, s);
  } catch (const Error& e) {
    throw InputError(std::string("--word: ") + e.what());
  }
}

Rational rational_arg(const std::string& flag, const std::string& s) { return cli::as_rational(json(s), flag); }

Outcome truth(bool v, json result) { return {v ? CERTIFIED : FALSIFIED, std::move(result)}; }

json recurrence_cert_json(const RecurrenceCertificate& c) {
  return {{"gamma", c.gamma.str()}, {"period", c.period}, {"hit", c.hit}, {"delta", cli::subgroup_json(c.delta)},
          {"sigma", cli::subgroup_json(c.sigma)}};
}

json witness_json(const IndependenceWitness& w) {
  json cyc = json::array();
  for (const auto& [eta, theta] : w.cyclic) cyc.push_back({{"eta", eta.str()}, {"theta", theta.str()}});
  return {{"elements", cli::word_strings(w.elements)},
          {"roots", cli::word_strings(w.roots)},
          {"power", w.power},
          {"cyclic", cyc},
          {"rank_check", w.rank_check}};
}

json cartan_json(const CartanData& c) {
  json out = {{"abs", c.abs}, {"top", cli::vec_json(c.top.v)}, {"repelling", cli::vec_json(c.repelling.f)}};
  if (!c.valuations.empty()) out["valuations"] = c.valuations;
  return out;
}

json field_json(const FieldPtr& f) {
  if (f->is_real()) return {{"type", "real"}, {"tol", f->tol}};
  return {{"type", "padic"}, {"p", f->p}, {"digits", f->digits}, {"uniformizer_abs", f->uniformizer_abs()}};
}

cli::MatrixInput matrix_file(const std::string& path, const Config& cfg) {
  return cli::parse_matrix(cli::load_json(path), path, cfg.overrides());
}

ProjMap to_map(const cli::MatrixInput& m) {
  try {
    return ProjMap::from_rationals(m.field, m.entries);
  } catch (const Error& e) {
    throw InputError(std::string("matrix: ") + e.what());
  }
}

Arena minimal_arena(const ProjMap& g, const std::string& what) {
  auto r = minimal_arena_radius(g);
  if (!r) throw Error(ErrorCode::SEARCH_EXHAUSTED, "no canonical arena radius works for " + what);
  return canonical_arena(g, *r, *r);
}

// ------------------------------------------------------------------ fg

Outcome fg_contains(const std::vector<std::string>& files, const std::string& word) {
  auto g = subgroup_file(files.at(0));
  Word w = word_arg(g.rank, word);
  return truth(contains(g.graph, w), {{"word", w.str()}, {"contains", contains(g.graph, w)}});
}

Outcome fg_intersect(const std::vector<std::string>& files) {
  if (files.size() != 2) throw InputError("intersect takes two subgroup files");
  auto a = subgroup_file(files[0]), b = subgroup_file(files[1]);
  same_rank(a, b);
  CoreGraph i = intersect(a.graph, b.graph);
  return {CERTIFIED, {{"subgroup", cli::subgroup_json(i)}, {"trivial", is_trivial(i)}, {"rank", rank(i)}}};
}

Outcome fg_index(const std::vector<std::string>& files) {
  auto g = subgroup_file(files.at(0));
  auto n = index(g.graph);
  json r = {{"finite", n.has_value()}};
  r["index"] = n ? json(*n) : json(nullptr);
  return {CERTIFIED, r};
}

Outcome fg_rank(const std::vector<std::string>& files) {
  auto g = subgroup_file(files.at(0));
  return {CERTIFIED, {{"rank", rank(g.graph)}}};
}

Outcome fg_basis(const std::vector<std::string>& files) {
  auto g = subgroup_file(files.at(0));
  return {CERTIFIED, {{"basis", cli::word_strings(basis(g.graph))}}};
}

Outcome fg_conjugate(const std::vector<std::string>& files, const std::string& word) {
  auto g = subgroup_file(files.at(0));
  Word w = word_arg(g.rank, word);
  return {CERTIFIED, {{"conjugator", w.str()}, {"subgroup", cli::subgroup_json(conjugate_subgroup(g.graph, w))}}};
}

// ------------------------------------------------------------------ chabauty

Outcome chabauty_dist_cmd(const std::vector<std::string>& files, int radius) {
  if (files.size() != 2) throw InputError("dist takes two subgroup files");
  auto a = subgroup_file(files[0]), b = subgroup_file(files[1]);
  same_rank(a, b);
  auto d = chabauty_dist(a.graph, b.graph, radius);
  return {CERTIFIED,
          {{"differ_at", d.differ_at}, {"rmax", d.rmax}, {"agree", d.agree()}, {"value", to_string(d.value())}}};
}

Outcome chabauty_signature_cmd(const std::vector<std::string>& files, int radius) {
  auto g = subgroup_file(files.at(0));
  auto s = ball_signature(g.graph, radius);
  return {CERTIFIED, {{"radius", s.radius}, {"words", cli::word_strings(s.words)}}};
}

Outcome chabauty_env_cmd(const std::vector<std::string>& files) {
  if (files.size() != 2) throw InputError("env takes the subgroup and Sigma");
  auto d = subgroup_file(files[0]), s = subgroup_file(files[1]);
  same_rank(d, s);
  bool in = env_contains(d.graph, s.graph);
  return truth(in, {{"contains", in}});
}

// ------------------------------------------------------------------ irs

AtomicIRS irs_file(const std::string& path) { return cli::parse_irs(cli::load_json(path), path); }

json irs_report(const AtomicIRS& mu) {
  return {{"irs", cli::irs_json(mu)}, {"invariant", mu.is_invariant()}, {"total", to_string(mu.total())}};
}

Outcome irs_build(const std::vector<std::string>& files) {
  auto a = cli::parse_action(cli::load_json(files.at(0)), files.at(0));
  AtomicIRS mu = stabilizer_irs(a);
  return truth(mu.is_invariant(), irs_report(mu));
}

Outcome irs_binary(const std::vector<std::string>& files, const std::function<AtomicIRS(const AtomicIRS&, const CoreGraph&)>& op) {
  if (files.size() != 2) throw InputError("expected an IRS file and a subgroup file");
  AtomicIRS mu = irs_file(files[0]);
  auto s = subgroup_file(files[1]);
  if (s.rank != mu.rank()) throw InputError("IRS and subgroup have different ranks");
  AtomicIRS out = op(mu, s.graph);
  return truth(out.is_invariant(), irs_report(out));
}

Outcome irs_intersect(const std::vector<std::string>& files) {
  if (files.size() != 2) throw InputError("intersect takes two IRS files");
  AtomicIRS out = intersect_irs(irs_file(files[0]), irs_file(files[1]));
  return truth(out.is_invariant(), irs_report(out));
}

Outcome irs_env(const std::vector<std::string>& files) {
  if (files.size() != 2) throw InputError("env takes an IRS file and a subgroup file");
  AtomicIRS mu = irs_file(files[0]);
  auto s = subgroup_file(files[1]);
  if (s.rank != mu.rank()) throw InputError("IRS and subgroup have different ranks");
  Rational m = env_measure(mu, s.graph);
  return {CERTIFIED, {{"measure", to_string(m)}, {"essential", m > 0}}};
}

Outcome irs_cover(const std::vector<std::string>& files) {
  if (files.size() < 2) throw InputError("cover takes an IRS file and at least one subgroup file");
  AtomicIRS mu = irs_file(files[0]);
  std::vector<CoreGraph> fam;
  for (std::size_t i = 1; i < files.size(); ++i) {
    auto s = subgroup_file(files[i]);
    if (s.rank != mu.rank()) throw InputError(files[i] + ": rank differs from the IRS");
    fam.push_back(s.graph);
  }
  auto c = check_cover(mu, fam);
  json r = {{"ok", c.ok}};
  if (c.uncovered) r["uncovered"] = cli::subgroup_json(*c.uncovered);
  return truth(c.ok, r);
}

Outcome irs_condition(const std::vector<std::string>& files, const std::string& event) {
  AtomicIRS mu = irs_file(files.at(0));
  // Conjugation-invariant events: trivial, finite-index, index:K, rank:K.
  AtomPredicate pred;
  auto number = [&](std::size_t at) {
    auto v = cli::parse_int_list(event.substr(at));
    if (v.size() != 1) throw InputError("--event: expected one integer after ':'");
    return v[0];
  };
  if (event == "trivial") {
    pred = [](const CoreGraph& h) { return is_trivial(h); };
  } else if (event == "finite-index") {
    pred = [](const CoreGraph& h) { return index(h).has_value(); };
  } else if (event.rfind("index:", 0) == 0) {
    long k = number(6);
    pred = [k](const CoreGraph& h) { return index(h) == std::optional<long>(k); };
  } else if (event.rfind("rank:", 0) == 0) {
    int k = number(5);
    pred = [k](const CoreGraph& h) { return rank(h) == k; };
  } else {
    throw InputError("--event: expected trivial, finite-index, index:K or rank:K");
  }
  auto cond = condition(mu, pred);
  return {CERTIFIED, {{"event", event}, {"weight", to_string(cond.weight)}, {"irs", cli::irs_json(cond.measure)}}};
}

// ------------------------------------------------------------------ stabtop

std::vector<CoreGraph> subgroup_files(const std::vector<std::string>& files, std::size_t from = 0) {
  std::vector<CoreGraph> out;
  int rank = -1;
  for (std::size_t i = from; i < files.size(); ++i) {
    auto s = subgroup_file(files[i]);
    if (rank >= 0 && s.rank != rank) throw InputError(files[i] + ": rank differs");
    rank = s.rank;
    out.push_back(s.graph);
  }
  if (out.empty()) throw InputError("expected at least one subgroup file");
  return out;
}

Outcome stabtop_intersect(const std::vector<std::string>& files, long bound) {
  auto ds = subgroup_files(files);
  auto r = intersection_element(ds, bound);
  json trace = json::array();
  for (const auto& s : r.trace)
    trace.push_back({{"indices", s.indices}, {"w", s.w.str()}, {"u", s.u.str()}, {"n", s.n}, {"m", s.m}, {"v", s.v.str()}});
  bool all = !r.v.is_identity();
  for (const auto& d : ds) all = all && contains(d, r.v);
  return truth(all, {{"v", r.v.str()}, {"abstract", r.abstract.str()}, {"basis", witness_json(r.basis)}, {"trace", trace},
                     {"in_all", all}});
}

Outcome stabtop_independent(const std::vector<std::string>& files, long bound) {
  auto ds = subgroup_files(files);
  auto w = independent_tuple(ds, bound);
  bool ok = w.rank_check == static_cast<int>(w.elements.size());
  return truth(ok, {{"witness", witness_json(w)}});
}

Outcome stabtop_subbasis(const std::vector<std::string>& files, long bound) {
  if (files.size() < 2) throw InputError("subbasis-check takes Delta and at least one member of H");
  auto delta = subgroup_file(files[0]);
  auto h = subgroup_files(files, 1);
  if (h.front().rank() != delta.rank) throw InputError("rank of H differs from Delta");
  auto c = subbasis_check(delta.graph, h, bound);
  json certs = json::array();
  for (const auto& rc : c.certificates) certs.push_back(recurrence_cert_json(rc));
  json r = {{"ok", c.ok}, {"conjugators", cli::word_strings(c.conjugators)}, {"certificates", certs}};
  if (c.uncovered) r["uncovered"] = c.uncovered->str();
  return truth(c.ok, r);
}

// ------------------------------------------------------------------ recur

FiniteMPSystem system_file(const std::string& path) { return cli::parse_system(cli::load_json(path), path); }

Outcome recur_tower(const std::vector<std::string>& files, const std::string& a) {
  auto s = system_file(files.at(0));
  Tower t = build_tower(s, cli::parse_int_list(a));
  json tails = json::array();
  for (int m = 0; m <= t.max_height() + 1; ++m) tails.push_back(to_string(t.tail_mass(m)));
  return {CERTIFIED, {{"base", t.base}, {"levels", t.levels}, {"max_height", t.max_height()}, {"tail_mass", tails}}};
}

Outcome recur_bound(const std::vector<std::string>& files, const std::string& a, const std::string& eps) {
  auto s = system_file(files.at(0));
  long n = recurrence_bound(s, cli::parse_int_list(a), rational_arg("--eps", eps));
  return {CERTIFIED, {{"n", n}, {"eps", eps}}};
}

Outcome recur_verify(const std::vector<std::string>& files, const std::string& a, const std::string& eps, long n,
                     long lo, long hi) {
  auto s = system_file(files.at(0));
  if (n < 1 || lo < 0 || hi < lo) throw InputError("need n >= 1 and 0 <= from <= to");
  auto c = verify_bound(s, cli::parse_int_list(a), n, lo, hi, rational_arg("--eps", eps));
  json r = {{"ok", c.ok}, {"n", n}, {"from", lo}, {"to", hi}, {"worst", to_string(c.worst)}};
  if (c.failing_n) r["failing_N"] = *c.failing_n;
  return truth(c.ok, r);
}

// ------------------------------------------------------------------ projdyn

Outcome pd_cartan(const std::vector<std::string>& files, const Config& cfg) {
  auto m = matrix_file(files.at(0), cfg);
  ProjMap g = to_map(m);
  return {CERTIFIED, {{"field", field_json(m.field)}, {"cartan", cartan_json(cartan(g))}, {"lipschitz_bound", lipschitz_bound(g)}}};
}

Outcome pd_contract(const std::vector<std::string>& files, const Config& cfg, double eps, double c) {
  auto m = matrix_file(files.at(0), cfg);
  ProjMap g = to_map(m);
  if (!(eps > 0 && eps < 1)) throw InputError("--eps must lie in (0, 1)");
  ContractionData cd = contraction_data(g, c);
  ContractionCheck chk = is_contracting(g, eps, cd.v, cd.H, cfg.budget, cfg.seed);
  json r = {{"field", field_json(m.field)},
            {"c", c},
            {"eps", eps},
            {"eps_est", cd.eps_est},
            {"ratio", cd.ratio},
            {"v", cli::vec_json(cd.v.v)},
            {"H", cli::vec_json(cd.H.f)},
            {"mode", "SAMPLED"},
            {"samples", chk.samples},
            {"max_image_dist", chk.max_image_dist},
            {"not_falsified", chk.ok}};
  if (chk.witness) r["witness"] = {{"point", cli::vec_json(chk.witness->v)}, {"image_dist", chk.witness_dist}};
  if (!chk.ok) return {FALSIFIED, r};
  return {chk.samples > 0 ? CERTIFIED : INCONCLUSIVE, r};
}

Outcome pd_proximal(const std::vector<std::string>& files, const Config& cfg, double r, double eps) {
  auto m = matrix_file(files.at(0), cfg);
  auto c = is_very_proximal(to_map(m), r, eps, cfg.budget, cfg.seed);
  json out = {{"field", field_json(m.field)}, {"certificate", cli::proximality_json(c)}};
  return {c.ok ? CERTIFIED : (c.falsified ? FALSIFIED : INCONCLUSIVE), out};
}

Outcome pd_fixdata(const std::vector<std::string>& files, const Config& cfg, double tol, int maxiter) {
  auto m = matrix_file(files.at(0), cfg);
  auto fd = canonical_fixed_data(to_map(m), tol, maxiter);
  return {CERTIFIED,
          {{"field", field_json(m.field)},
           {"v", cli::vec_json(fd.v.v)},
           {"H", cli::vec_json(fd.H.f)},
           {"point_residual", fd.point_residual},
           {"hyperplane_residual", fd.hyperplane_residual},
           {"iterations", fd.iterations},
           {"tol", tol}}};
}

Outcome pd_pingpong(const std::vector<std::string>& files, const Config& cfg) {
  const std::string& path = files.at(0);
  json j = cli::load_json(path);
  cli::check_keys(j, path, {"elements", "falsify", "tol"}, {"elements"});
  if (!j["elements"].is_array() || j["elements"].empty()) throw InputError(path + ".elements: expected a nonempty array");
  int falsify = j.contains("falsify") ? static_cast<int>(cli::get_long(j, "falsify", path)) : 12;
  double tol = j.contains("tol") ? j["tol"].get<double>() : 1e-9;
  PingPongTuple tuple;
  std::vector<RatMat> mats;
  FieldPtr field;
  json elems = json::array();
  int i = 0;
  for (const json& e : j["elements"]) {
    std::string w = path + ".elements[" + std::to_string(i++) + "]";
    cli::check_keys(e, w, {"matrix", "power", "arena"}, {"matrix"});
    auto m = cli::parse_matrix(e["matrix"], w + ".matrix", cfg.overrides());
    if (field && !same_field(*field, *m.field)) throw InputError(w + ": field differs from the first element");
    if (!mats.empty() && mats[0].size() != m.entries.size()) throw InputError(w + ": dimension differs");
    field = m.field;
    long k = e.contains("power") ? cli::get_long(e, "power", w) : 1;
    if (k < 1) throw InputError(w + ".power: must be positive");
    RatMat pk = rat_power(m.entries, k);
    ProjMap g = to_map({m.field, pk});
    int n = static_cast<int>(pk.size());
    Arena a = e.contains("arena") ? cli::parse_arena(e["arena"], m.field, n, w + ".arena") : minimal_arena(g, w);
    tuple.emplace_back(g, a);
    mats.push_back(pk);
    elems.push_back({{"power", k}, {"arena", cli::arena_json(a)}});
  }
  PingPongCertificate c = check_pingpong(tuple, tol);
  json r = {{"field", field_json(field)}, {"elements", elems}, {"certificate", cli::certificate_json(c)}};
  if (!c.ok) return {FALSIFIED, r};
  if (falsify > 0) {
    auto rel = find_matrix_relator(mats, falsify);
    r["falsifier"] = {{"max_len", falsify}, {"words_examined", rel.words_examined}, {"relator_found", rel.found}};
    if (rel.found) {
      r["falsifier"]["relator"] = rel.relator.str();
      return {FALSIFIED, r};
    }
  }
  return {CERTIFIED, r};
}

Outcome pd_synthesize(const std::vector<std::string>& files, const Config& cfg) {
  const std::string& path = files.at(0);
  json j = cli::load_json(path);
  cli::check_keys(j, path, {"field", "n", "b_p", "b_q", "x", "y", "gamma", "l_max", "exclusion"},
                  {"field", "n", "b_p", "b_q", "gamma"});
  FieldPtr f = cli::parse_field(j["field"], path + ".field", cfg.overrides());
  int n = static_cast<int>(cli::get_long(j, "n", path));
  if (n < 2) throw InputError(path + ".n: must be at least 2");
  auto mat = [&](const char* k) {
    if (!j.contains(k)) return to_map({f, rat_identity(n)});
    return to_map({f, cli::parse_entries(j[k], n, path + "." + k)});
  };
  int l_max = j.contains("l_max") ? static_cast<int>(cli::get_long(j, "l_max", path)) : 8;
  bool exclusion = j.contains("exclusion") ? j["exclusion"].get<bool>() : exact_arcs(f, n);
  ProjMap bp = mat("b_p"), bq = mat("b_q");
  CosetInput in{bp, bq, minimal_arena(bp, "b_p"), minimal_arena(bq, "b_q"), mat("x"), mat("y"), mat("gamma")};
  auto s = synthesize_coset_element(in, l_max, exclusion);
  json r = {{"field", field_json(f)},
            {"l1", s.l1},
            {"l2", s.l2},
            {"l_max", l_max},
            {"exclusion_required", exclusion},
            {"containment", s.containment},
            {"incidence", s.incidence},
            {"self_margin", s.self_margin},
            {"candidates_tried", s.candidates_tried},
            {"arena", cli::arena_json(s.arena)},
            {"arena_b_p", cli::arena_json(in.arena_p)},
            {"arena_b_q", cli::arena_json(in.arena_q)}};
  json ex = json::array();
  for (double e : s.exclusion) ex.push_back(std::isnan(e) ? json(nullptr) : json(e));
  r["exclusion"] = ex;
  return {CERTIFIED, r};
}

Outcome pd_family(const std::vector<std::string>& files, const Config& cfg) {
  const std::string& path = files.at(0);
  json j = cli::load_json(path);
  cli::check_keys(j, path, {"field", "n", "assignment", "groups", "requests", "l_max", "xy_word_bound", "max_power"},
                  {"field", "n", "assignment", "groups", "requests"});
  FieldPtr f = cli::parse_field(j["field"], path + ".field", cfg.overrides());
  int n = static_cast<int>(cli::get_long(j, "n", path));
  if (!j["assignment"].is_array() || j["assignment"].empty())
    throw InputError(path + ".assignment: expected a nonempty array of matrices");
  std::vector<RatMat> as;
  for (std::size_t i = 0; i < j["assignment"].size(); ++i)
    as.push_back(cli::parse_entries(j["assignment"][i], n, path + ".assignment[" + std::to_string(i) + "]"));
  int rank = static_cast<int>(as.size());
  if (rank > 26) throw InputError(path + ".assignment: at most 26 generators");
  auto word = [&](const json& v, const std::string& w) {
    if (!v.is_string()) throw InputError(w + ": expected a word");
    try {
      return Word::parse(rank, v.get<std::string>());
    } catch (const Error& e) {
      throw InputError(w + ": " + e.what());
    }
  };
  std::vector<GroupSpec> groups;
  for (std::size_t i = 0; i < j["groups"].size(); ++i) {
    std::string w = path + ".groups[" + std::to_string(i) + "]";
    const json& g = j["groups"][i];
    cli::check_keys(g, w, {"generators", "b"}, {"generators", "b"});
    GroupSpec spec;
    for (std::size_t k = 0; k < g["generators"].size(); ++k)
      spec.gens.push_back(word(g["generators"][k], w + ".generators[" + std::to_string(k) + "]"));
    spec.b = word(g["b"], w + ".b");
    if (!contains(from_generators(spec.gens, rank), spec.b)) throw InputError(w + ".b: not in the subgroup");
    groups.push_back(spec);
  }
  std::vector<FamilyRequest> reqs;
  for (std::size_t i = 0; i < j["requests"].size(); ++i) {
    std::string w = path + ".requests[" + std::to_string(i) + "]";
    const json& q = j["requests"][i];
    cli::check_keys(q, w, {"p", "q", "gamma"}, {"p", "q", "gamma"});
    FamilyRequest r{static_cast<int>(cli::get_long(q, "p", w)), static_cast<int>(cli::get_long(q, "q", w)),
                    word(q["gamma"], w + ".gamma")};
    int G = static_cast<int>(groups.size());
    if (r.p < 0 || r.p >= G || r.q < 0 || r.q >= G) throw InputError(w + ": group index out of range");
    reqs.push_back(r);
  }
  FamilyOptions opt;
  if (j.contains("l_max")) opt.l_max = static_cast<int>(cli::get_long(j, "l_max", path));
  if (j.contains("xy_word_bound")) opt.xy_word_bound = static_cast<int>(cli::get_long(j, "xy_word_bound", path));
  if (j.contains("max_power")) opt.max_power = cli::get_long(j, "max_power", path);
  auto res = double_coset_free_family(f, as, groups, reqs, cfg.budget, opt);
  json elems = json::array();
  for (const auto& e : res.elements) {
    elems.push_back({{"request", {{"p", e.request.p}, {"q", e.request.q}, {"gamma", e.request.gamma.str()}}},
                     {"x", e.x.str()},
                     {"y", e.y.str()},
                     {"n_p", e.n_p},
                     {"n_q", e.n_q},
                     {"l1", e.l1},
                     {"l2", e.l2},
                     {"word", e.word.str()},
                     {"containment", e.synthesis.containment},
                     {"arena", cli::arena_json(e.arena)}});
  }
  json fails = json::array();
  for (const auto& fl : res.failures) fails.push_back({{"request", fl.request}, {"reason", fl.reason}});
  json b_arenas = json::array();
  for (const auto& a : res.b_arenas) b_arenas.push_back(cli::arena_json(a));
  json r = {{"field", field_json(f)},
            {"elements", elems},
            {"failures", fails},
            {"exponents", res.exponents},
            {"b_arenas", b_arenas},
            {"certificate", cli::certificate_json(res.certificate)},
            {"word_rank", res.word_rank},
            {"options", {{"l_max", opt.l_max}, {"xy_word_bound", opt.xy_word_bound}, {"max_power", opt.max_power}}}};
  if (!res.failures.empty()) return {INCONCLUSIVE, r};
  bool ok = res.certificate.ok && res.word_rank == static_cast<int>(res.elements.size());
  return {ok ? CERTIFIED : FALSIFIED, r};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgroup dynamics toolkit: free-group subgroups, IRS, recurrence, projective ping-pong"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--seed", cfg.seed, "Root seed for all sampling");
  app.add_option("--precision", cfg.precision, "p-adic digits, overriding the input files");
  app.add_option("--tolerance", cfg.tolerance, "Real zero tolerance, overriding the default");
  app.add_option("--budget", cfg.budget, "Sample or search budget");
  app.add_option("--out", cfg.out, "Write the report here instead of stdout");
  app.add_flag("--no-timestamp", cfg.no_timestamp, "Omit the timestamp so reports are byte-identical");

  std::string command;
  std::vector<std::string> files;
  std::string word, a_set, eps_str = "1/10";
  int radius = 4, maxiter = 100000;
  long bound = 64, n_arg = 1, lo = 0, hi = 50;
  double eps = 0.1, r_arg = 0.5, c_arg = 4, tol = 1e-12;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, auto&& make) {
    CLI::App* s = parent->add_subcommand(name, desc);
    s->add_option("files", files, "Input JSON files")->required();
    make(s);
    s->callback([&, parent, name] { command = parent->get_name() + " " + name; });
    return s;
  };

  CLI::App* fg = app.add_subcommand("fg", "Finitely generated subgroups of free groups")->require_subcommand(1);
  leaf(fg, "contains", "Membership of --word", [&](CLI::App* s) {
s->add_option("--word", word)->required(); });
  leaf(fg, "intersect", "Intersection of two subgroups", [](CLI::App*) {});
  leaf(fg, "index", "Index in the free group", [](CLI::App*) {});
  leaf(fg, "rank", "Rank of the subgroup", [](CLI::App*) {});
  leaf(fg, "basis", "Free basis", [](CLI::App*) {});
  leaf(fg, "conjugate", "Conjugate subgroup by --word", [&](CLI::App* s) { s->add_option("--word", word)->required(); });

  CLI::App* ch = app.add_subcommand("chabauty", "Chabauty distance and ball signatures")->require_subcommand(1);
  leaf(ch, "dist", "Distance 2^-R of two subgroups", [&](CLI::App* s) { s->add_option("--radius", radius); });
  leaf(ch, "signature", "Sorted words of the subgroup in the ball", [&](CLI::App* s) { s->add_option("--radius", radius); });
  leaf(ch, "env", "Whether the first subgroup contains Sigma", [](CLI::App*) {});

  CLI::App* ir = app.add_subcommand("irs", "Finitely supported invariant random subgroups")->require_subcommand(1);
  leaf(ir, "build", "Stabilizer IRS of a finite action", [](CLI::App*) {});
  leaf(ir, "restrict", "Restriction to Sigma", [](CLI::App*) {});
  leaf(ir, "induce", "Induction from a finite-index Sigma", [](CLI::App*) {});
  leaf(ir, "intersect", "Intersection of two independent IRS", [](CLI::App*) {});
  leaf(ir, "env", "Measure of the envelope of Sigma", [](CLI::App*) {});
  leaf(ir, "cover", "Whether the subgroups cover almost every atom", [](CLI::App*) {});
  leaf(ir, "condition", "Condition on an invariant --event", [&](CLI::App* s) { s->add_option("--event", word)->required(); });

  CLI::App* st = app.add_subcommand("stabtop", "Stabilizer topology constructions")->require_subcommand(1);
  leaf(st, "intersect-element", "Nontrivial element in every subgroup", [&](CLI::App* s) { s->add_option("--bound", bound); });
  leaf(st, "independent", "Independent tuple, one element per subgroup", [&](CLI::App* s) { s->add_option("--bound", bound); });
  leaf(st, "subbasis-check", "Recurrent sub-basis check of Delta against H", [&](CLI::App* s) { s->add_option("--bound", bound); });

  CLI::App* rc = app.add_subcommand("recur", "Quantitative recurrence on finite systems")->require_subcommand(1);
  leaf(rc, "tower", "Tower over the base set --A", [&](CLI::App* s) { s->add_option("--A", a_set)->required(); });
  leaf(rc, "bound", "Least n for the recurrence inequality", [&](CLI::App* s) {
    s->add_option("--A", a_set)->required();
    s->add_option("--eps", eps_str)->required();
  });
  leaf(rc, "verify", "Check the inequality for N in [--from, --to]", [&](CLI::App* s) {
    s->add_option("--A", a_set)->required();
    s->add_option("--eps", eps_str)->required();
    s->add_option("--n", n_arg)->required();
    s->add_option("--from", lo);
    s->add_option("--to", hi);
  });

  CLI::App* pd = app.add_subcommand("projdyn", "Projective dynamics over R and Q_p")->require_subcommand(1);
  leaf(pd, "cartan", "Cartan data", [](CLI::App*) {});
  leaf(pd, "contract", "Contraction data and sampled check at --eps", [&](CLI::App* s) {
    s->add_option("--eps", eps);
    s->add_option("--c", c_arg);
  });
  leaf(pd, "proximal", "(r, eps)-very proximal certificate", [&](CLI::App* s) {
    s->add_option("--r", r_arg);
    s->add_option("--eps", eps);
  });
  leaf(pd, "fixdata", "Canonical fixed point and hyperplane", [&](CLI::App* s) {
    s->add_option("--tol", tol);
    s->add_option("--maxiter", maxiter);
  });
  leaf(pd, "pingpong", "Ping-pong certificate and word falsifier", [](CLI::App*) {});
  leaf(pd, "synthesize", "Element of a double coset nested in given arenas", [](CLI::App*) {});
  leaf(pd, "family", "Certified free family meeting requested double cosets", [](CLI::App*) {});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return INPUT;
  }

  auto run = [&]() -> Outcome {
    const auto& fl = files;
    if (command == "fg contains") return fg_contains(fl, word);
    if (command == "fg intersect") return fg_intersect(fl);
    if (command == "fg index") return fg_index(fl);
    if (command == "fg rank") return fg_rank(fl);
    if (command == "fg basis") return fg_basis(fl);
    if (command == "fg conjugate") return fg_conjugate(fl, word);
    if (command == "chabauty dist") return chabauty_dist_cmd(fl, radius);
    if (command == "chabauty signature") return chabauty_signature_cmd(fl, radius);
    if (command == "chabauty env") return chabauty_env_cmd(fl);
    if (command == "irs build") return irs_build(fl);
    if (command == "irs restrict") return irs_binary(fl, [](const AtomicIRS& m, const CoreGraph& s) { return restrict(m, s); });
    if (command == "irs induce") return irs_binary(fl, [](const AtomicIRS& m, const CoreGraph& s) { return induce(m, s); });
    if (command == "irs intersect") return irs_intersect(fl);
    if (command == "irs env") return irs_env(fl);
    if (command == "irs cover") return irs_cover(fl);
    if (command == "irs condition") return irs_condition(fl, word);
    if (command == "stabtop intersect-element") return stabtop_intersect(fl, bound);
    if (command == "stabtop independent") return stabtop_independent(fl, bound);
    if (command == "stabtop subbasis-check") return stabtop_subbasis(fl, bound);
    if (command == "recur tower") return recur_tower(fl, a_set);
    if (command == "recur bound") return recur_bound(fl, a_set, eps_str);
    if (command == "recur verify") return recur_verify(fl, a_set, eps_str, n_arg, lo, hi);
    if (command == "projdyn cartan") return pd_cartan(fl, cfg);
    if (command == "projdyn contract") return pd_contract(fl, cfg, eps, c_arg);
    if (command == "projdyn proximal") return pd_proximal(fl, cfg, r_arg, eps);
    if (command == "projdyn fixdata") return pd_fixdata(fl, cfg, tol, maxiter);
    if (command == "projdyn pingpong") return pd_pingpong(fl, cfg);
    if (command == "projdyn synthesize") return pd_synthesize(fl, cfg);
    if (command == "projdyn family") return pd_family(fl, cfg);
    throw InputError("unknown command");
  };

  Outcome o;
  try {
    o = run();
  } catch (const InputError& e) {
    o = {INPUT, {{"error", {{"code", "INPUT"}, {"message", e.what()}}}}};
  } catch (const Error& e) {
    o = {exit_for(e.code()), {{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}};
  } catch (const json::exception& e) {
    o = {INPUT, {{"error", {{"code", "INPUT"}, {"message", e.what()}}}}};
  }

  json report = {{"tool", "subdyn"},
                 {"version", kVersion},
                 {"command", command},
                 {"inputs", files},
                 {"seed", cfg.seed},
                 {"constants",
                  {{"budget", cfg.budget},
                   {"precision_override", cfg.precision},
                   {"tolerance_override", cfg.tolerance},
                   {"c_default", 4.0},
                   {"pingpong_tol", 1e-9},
                   {"incidence_tol", 1e-12}}},
                 {"verdict", verdict_name(o.exit)},
                 {"exit_code", o.exit},
                 {"result", o.result}};
  if (!cfg.no_timestamp) report["timestamp"] = static_cast<long>(std::time(nullptr));
  std::string text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out);
    if (!out) {
      std::cerr << "cannot write " << cfg.out << "\n";
      return INPUT;
    }
    out << text;
  }
  return o.exit;
}
