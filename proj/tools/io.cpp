#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "subdyn/error.hpp"

namespace cli {

using namespace subdyn;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t upto = std::min(e.byte, text.size());
    long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    std::size_t nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    std::size_t col = nl == std::string::npos ? upto : upto - nl - 1;
    throw InputError(path + ": line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) throw InputError(where + ": unknown key '" + k + "'");
  }
  for (const char* r : required)
    if (!j.contains(r)) throw InputError(where + ": missing key '" + std::string(r) + "'");
}

long get_long(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw InputError(where + "." + key + ": expected an integer");
  return v.get<long>();
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw InputError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Rational as_rational(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const Error& e) {
    throw InputError(where + ": " + e.what());
  }
  throw InputError(where + ": expected a rational string \"p/q\"");
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("bad integer '" + tok + "' in list '" + csv + "'");
    }
  }
  return out;
}

namespace {

Word parse_word(int rank, const json& v, const std::string& where) {
  if (!v.is_string()) throw InputError(where + ": expected a word string");
  try {
    return Word::parse(rank, v.get<std::string>());
  } catch (const Error& e) {
    throw InputError(where + ": " + e.what());
  }
}

}  // namespace

Subgroup parse_subgroup(const json& j, const std::string& where) {
  check_keys(j, where, {"rank", "generators"}, {"rank", "generators"});
  Subgroup s;
  s.rank = static_cast<int>(get_long(j, "rank", where));
  if (s.rank < 1) throw InputError(where + ".rank: must be positive");
  if (!j["generators"].is_array()) throw InputError(where + ".generators: expected an array");
  int i = 0;
  for (const json& g : j["generators"])
    s.generators.push_back(parse_word(s.rank, g, where + ".generators[" + std::to_string(i++) + "]"));
  s.graph = from_generators(s.generators, s.rank);
  return s;
}

std::vector<std::string> word_strings(const std::vector<Word>& ws) {
  std::vector<std::string> out;
  for (const Word& w : ws) out.push_back(w.str());
  return out;
}

json subgroup_json(const CoreGraph& g) { return {{"rank", g.rank()}, {"generators", word_strings(basis(g))}}; }

namespace {

std::vector<Rational> parse_weights(const json& j, int points, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != points)
    throw InputError(where + ": expected " + std::to_string(points) + " weights");
  std::vector<Rational> w;
  for (std::size_t i = 0; i < j.size(); ++i) w.push_back(as_rational(j[i], where + "[" + std::to_string(i) + "]"));
  return w;
}

std::vector<int> parse_perm(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of points");
  std::vector<int> p;
  for (const json& x : j) {
    if (!x.is_number_integer()) throw InputError(where + ": points are integers");
    p.push_back(x.get<int>());
  }
  return p;
}

void validated(auto&& fn, const std::string& where) {
  try {
    fn();
  } catch (const Error& e) {
    throw InputError(where + ": " + e.what());
  }
}

}  // namespace

FiniteAction parse_action(const json& j, const std::string& where) {
  check_keys(j, where, {"rank", "points", "weights", "perms"}, {"rank", "points", "weights", "perms"});
  FiniteAction a;
  a.rank = static_cast<int>(get_long(j, "rank", where));
  a.points = static_cast<int>(get_long(j, "points", where));
  if (a.rank < 1 || a.rank > 26) throw InputError(where + ".rank: must lie in 1..26");
  a.weights = parse_weights(j["weights"], a.points, where + ".weights");
  const json& perms = j["perms"];
  if (!perms.is_object()) throw InputError(where + ".perms: expected an object");
  for (const auto& [k, v] : perms.items()) {
    (void)v;
    if (k.size() != 1 || k[0] < 'a' || k[0] >= 'a' + a.rank)
      throw InputError(where + ".perms: unknown key '" + k + "'");
  }
  for (int i = 0; i < a.rank; ++i) {
    std::string key(1, static_cast<char>('a' + i));
    if (!perms.contains(key)) throw InputError(where + ".perms: missing key '" + key + "'");
    a.perms.push_back(parse_perm(perms[key], where + ".perms." + key));
  }
  validated([&] { a.validate(); }, where);
  return a;
}

FiniteMPSystem parse_system(const json& j, const std::string& where) {
  check_keys(j, where, {"rank", "points", "weights", "perms"}, {"points", "weights", "perms"});
  if (j.contains("rank") && get_long(j, "rank", where) != 1) throw InputError(where + ".rank: must be 1");
  FiniteMPSystem s;
  s.points = static_cast<int>(get_long(j, "points", where));
  s.weights = parse_weights(j["weights"], s.points, where + ".weights");
  check_keys(j["perms"], where + ".perms", {"T"}, {"T"});
  s.T = parse_perm(j["perms"]["T"], where + ".perms.T");
  validated([&] { s.validate(); }, where);
  return s;
}

AtomicIRS parse_irs(const json& j, const std::string& where) {
  check_keys(j, where, {"atoms"}, {"atoms"});
  if (!j["atoms"].is_array() || j["atoms"].empty()) throw InputError(where + ".atoms: expected a nonempty array");
  AtomicIRS mu;
  int i = 0;
  for (const json& a : j["atoms"]) {
    std::string w = where + ".atoms[" + std::to_string(i++) + "]";
    check_keys(a, w, {"subgroup", "weight"}, {"subgroup", "weight"});
    Subgroup s = parse_subgroup(a["subgroup"], w + ".subgroup");
    if (i == 1) mu = AtomicIRS(s.rank);
    if (s.rank != mu.rank()) throw InputError(w + ": rank differs from the first atom");
    Rational wt = as_rational(a["weight"], w + ".weight");
    if (wt <= 0) throw InputError(w + ".weight: must be positive");
    mu.add(s.graph, wt);
  }
  if (mu.total() != 1) throw InputError(where + ": weights must sum to 1");
  return mu;
}

json irs_json(const AtomicIRS& mu) {
  json atoms = json::array();
  for (const Atom& a : mu.atoms()) atoms.push_back({{"subgroup", subgroup_json(a.subgroup)}, {"weight", to_string(a.weight)}});
  return {{"atoms", atoms}};
}

FieldPtr parse_field(const json& j, const std::string& where, const FieldOverrides& o) {
  check_keys(j, where, {"type", "p", "digits"}, {"type"});
  std::string type = get_string(j, "type", where);
  if (type == "real") {
    if (j.contains("p") || j.contains("digits")) throw InputError(where + ": p and digits are p-adic keys");
    return o.tolerance > 0 ? real_field(o.tolerance) : real_field();
  }
  if (type != "padic") throw InputError(where + ".type: expected \"real\" or \"padic\"");
  check_keys(j, where, {"type", "p", "digits"}, {"type", "p", "digits"});
  long p = get_long(j, "p", where);
  int digits = static_cast<int>(get_long(j, "digits", where));
  if (o.precision > 0) digits = o.precision;
  if (p < 2) throw InputError(where + ".p: must be a prime");
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) throw InputError(where + ".p: must be a prime");
  if (digits < 3) throw InputError(where + ".digits: need at least 3 digits");
  return padic_field(p, digits);
}

RatMat parse_entries(const json& j, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw InputError(where + ": expected " + std::to_string(n) + " rows");
  RatMat m;
  for (int i = 0; i < n; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    std::string rw = where + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw InputError(rw + ": expected " + std::to_string(n) + " entries");
    std::vector<Rational> r;
    for (int k = 0; k < n; ++k) r.push_back(as_rational(row[static_cast<std::size_t>(k)], rw + "[" + std::to_string(k) + "]"));
    m.push_back(r);
  }
  return m;
}

MatrixInput parse_matrix(const json& j, const std::string& where, const FieldOverrides& o) {
  check_keys(j, where, {"field", "n", "entries"}, {"field", "n", "entries"});
  MatrixInput m;
  m.field = parse_field(j["field"], where + ".field", o);
  int n = static_cast<int>(get_long(j, "n", where));
  if (n < 2) throw InputError(where + ".n: must be at least 2");
  m.entries = parse_entries(j["entries"], n, where + ".entries");
  return m;
}

namespace {

Vec parse_vec(const json& j, const FieldPtr& f, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw InputError(where + ": expected " + std::to_string(n) + " coordinates");
  Vec v;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string w = where + "[" + std::to_string(i) + "]";
    if (f->is_real() && j[i].is_number())
      v.emplace_back(f, j[i].get<double>());
    else
      v.push_back(Scalar::from_rational(f, as_rational(j[i], w)));
  }
  if (std::all_of(v.begin(), v.end(), [](const Scalar& s) { return s.is_zero(); }))
    throw InputError(where + ": zero vector");
  return v;
}

double parse_radius(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  double r = j.get<double>();
  if (!(r > 0 && r <= 1)) throw InputError(where + ": radius must lie in (0, 1]");
  return r;
}

std::pair<double, double> parse_degrees(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError(where + ": expected [from, to] in degrees");
  double a = j[0].get<double>(), b = j[1].get<double>();
  if (!(b > a && b - a < 180)) throw InputError(where + ": need from < to < from + 180");
  return {a * std::numbers::pi / 180, b * std::numbers::pi / 180};
}

}  // namespace

Arena parse_arena(const json& j, const FieldPtr& f, int n, const std::string& where) {
  if (j.contains("arcs")) {
    check_keys(j, where, {"arcs"});
    if (!exact_arcs(f, n)) throw InputError(where + ".arcs: arcs need the real projective line");
    const json& a = j["arcs"];
    std::string w = where + ".arcs";
    check_keys(a, w, {"attract", "repel", "attract_inv", "repel_inv"}, {"attract", "repel", "attract_inv", "repel_inv"});
    auto ball = [&](const char* k) {
      auto [lo, hi] = parse_degrees(a[k], w + "." + k);
      Slab s = line_slab(f, lo, hi);
      auto [c, h] = line_arc(s);
      return Ball{make_point({Scalar(f, std::cos(c)), Scalar(f, std::sin(c))}), std::sin(h)};
    };
    auto slab = [&](const char* k) {
      auto [lo, hi] = parse_degrees(a[k], w + "." + k);
      return line_slab(f, lo, hi);
    };
    return {ball("attract"), slab("repel"), ball("attract_inv"), slab("repel_inv")};
  }
  check_keys(j, where, {"attract", "repel", "attract_inv", "repel_inv"}, {"attract", "repel", "attract_inv", "repel_inv"});
  auto ball = [&](const char* k) {
    std::string w = where + "." + k;
    check_keys(j[k], w, {"center", "radius"}, {"center", "radius"});
    return Ball{make_point(parse_vec(j[k]["center"], f, n, w + ".center")), parse_radius(j[k]["radius"], w + ".radius")};
  };
  auto slab = [&](const char* k) {
    std::string w = where + "." + k;
    check_keys(j[k], w, {"plane", "radius"}, {"plane", "radius"});
    return Slab{make_hyperplane(parse_vec(j[k]["plane"], f, n, w + ".plane")), parse_radius(j[k]["radius"], w + ".radius")};
  };
  return {ball("attract"), slab("repel"), ball("attract_inv"), slab("repel_inv")};
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (const Scalar& s : v) {
    if (s.field()->is_real())
      out.push_back(s.real());
    else
      out.push_back(s.str());
  }
  return out;
}

json arena_json(const Arena& a) {
  auto ball = [](const Ball& b) { return json{{"center", vec_json(b.center.v)}, {"radius", b.radius}}; };
  auto slab = [](const Slab& s) { return json{{"plane", vec_json(s.plane.f)}, {"radius", s.radius}}; };
  return {{"attract", ball(a.attract)},
          {"repel", slab(a.repel)},
          {"attract_inv", ball(a.attract_inv)},
          {"repel_inv", slab(a.repel_inv)}};
}

json margins_json(const std::vector<MarginRecord>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back({{"relation", m.relation}, {"i", m.i}, {"j", m.j}, {"margin", m.margin}});
  return out;
}

json certificate_json(const PingPongCertificate& c) {
  json out = {{"ok", c.ok},
              {"mode", to_string(c.mode)},
              {"tol", c.tol},
              {"min_margin", c.min_margin},
              {"margins", margins_json(c.margins)}};
  if (c.violation) out["violation"] = margins_json({*c.violation})[0];
  return out;
}

json proximality_json(const ProximalityCertificate& c) {
  json out = {{"ok", c.ok},
              {"falsified", c.falsified},
              {"r", c.r},
              {"eps", c.eps},
              {"mode", to_string(c.mode)},
              {"both_directions", c.both_directions},
              {"budget", c.budget},
              {"seed", c.seed},
              {"d_vH", c.d_vH},
              {"d_vH_inv", c.d_vH_inv},
              {"margin_a_r", c.margin_a_r},
              {"margin_a_ainv", c.margin_a_ainv},
              {"margin_ainv_rinv", c.margin_ainv_rinv},
              {"bound_image", c.bound_image},
              {"bound_image_inv", c.bound_image_inv},
              {"max_image_dist", c.max_image_dist},
              {"max_image_dist_inv", c.max_image_dist_inv}};
  if (!c.v.v.empty()) out["v"] = vec_json(c.v.v);
  if (!c.H.f.empty()) out["H"] = vec_json(c.H.f);
  if (!c.v_inv.v.empty()) out["v_inv"] = vec_json(c.v_inv.v);
  if (!c.H_inv.f.empty()) out["H_inv"] = vec_json(c.H_inv.f);
  if (!c.failure.empty()) out["failure"] = c.failure;
  if (c.witness) out["witness"] = vec_json(c.witness->v);
  return out;
}

}  // namespace cli
