#include "subdyn/pingpong.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "subdyn/error.hpp"

namespace subdyn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ------------------------------------------------ arcs of the real projective line

struct Arc {
  double c = 0;  // center angle in [0, pi)
  double h = 0;  // half width in [0, pi/2]
};

double wrap(double t) {
  t = std::fmod(t, kPi);
  return t < 0 ? t + kPi : t;
}

double angle_of(const Vec& v) { return wrap(std::atan2(v[1].real(), v[0].real())); }

double arc_dist(double a, double b) {
  double d = std::fmod(std::fabs(a - b), kPi);
  return std::min(d, kPi - d);
}

double half_width(double radius) { return std::asin(std::min(radius, 1.0)); }

Arc arc_of(const Ball& b) { return {angle_of(b.center.v), half_width(b.radius)}; }

// The slab around ker f is the arc around the point spanning ker f.
double kernel_angle(const ProjHyperplane& h) { return wrap(std::atan2(h.f[0].real(), -h.f[1].real())); }

Arc arc_of(const Slab& s) { return {kernel_angle(s.plane), half_width(s.radius)}; }

Vec unit_at(const FieldPtr& f, double t) { return {Scalar(f, std::cos(t)), Scalar(f, std::sin(t))}; }

ProjPoint point_at(const FieldPtr& f, double t) { return make_point(unit_at(f, t)); }

ProjHyperplane plane_through(const FieldPtr& f, double t) {
  return make_hyperplane({Scalar(f, -std::sin(t)), Scalar(f, std::cos(t))});
}

bool in_arc(const Arc& a, double t, double slack) { return arc_dist(a.c, t) <= a.h + slack; }

// Image of a closed arc under g.
Arc arc_image(const ProjMap& g, const Arc& a) {
  if (a.h >= kPi / 2) return {0, kPi / 2};
  const FieldPtr& f = g.field();
  auto img = [&](double t) { return angle_of(g.g.apply(unit_at(f, t))); };
  double ps = img(a.c - a.h), pe = img(a.c + a.h);
  double len = wrap(pe - ps);
  Arc fwd{wrap(ps + len / 2), len / 2};
  Arc bwd{wrap(pe + (kPi - len) / 2), (kPi - len) / 2};
  double det = g.g(0, 0).real() * g.g(1, 1).real() - g.g(0, 1).real() * g.g(1, 0).real();
  if (std::fabs(det) > 1e-6) return det > 0 ? fwd : bwd;
  // Ill-conditioned: pick the arc containing the images of interior points.
  bool f_ok = true, b_ok = true;
  for (double s : {-0.5, 0.0, 0.5}) {
    double t = img(a.c + s * a.h);
    f_ok = f_ok && in_arc(fwd, t, 1e-12);
    b_ok = b_ok && in_arc(bwd, t, 1e-12);
  }
  if (f_ok && b_ok) return fwd.h <= bwd.h ? fwd : bwd;
  return b_ok ? bwd : fwd;
}

Ball ball_of(const FieldPtr& f, const Arc& a) { return {point_at(f, a.c), std::sin(std::min(a.h, kPi / 2))}; }
Slab slab_of(const FieldPtr& f, const Arc& a) { return {plane_through(f, a.c), std::sin(std::min(a.h, kPi / 2))}; }

const FieldPtr& field_of(const Ball& b) { return b.center.v.at(0).field(); }
int dim_of(const Ball& b) { return static_cast<int>(b.center.v.size()); }

bool arcs(const Ball& b) { return exact_arcs(field_of(b), dim_of(b)); }

double combine(const FieldPtr& f, double a, double b) { return f->is_real() ? a + b : std::max(a, b); }

// Largest d(x, H_R) shortfall: the sup of d(gx, top) over x outside the slab R.
double outside_slab_sup(const ProjMap& g, const CartanData& cd, const Slab& R) {
  const FieldPtr& f = g.field();
  double ratio = cd.abs[1] / cd.abs[0];
  double off = hausdorff_dist(cd.repelling, R.plane);
  double delta = f->is_real() ? R.radius - off : (off <= R.radius ? R.radius : 0.0);
  if (delta <= 0) return 1.0;
  return contraction_sup(f, ratio, delta);
}

double op_norm(const Mat& m) { return cartan(m).abs.front(); }

}  // namespace

bool exact_arcs(const FieldPtr& f, int n) { return f->is_real() && n == 2; }

double line_angle(const ProjPoint& p) { return angle_of(p.v); }
double line_angle(const ProjHyperplane& h) { return kernel_angle(h); }

Slab line_slab(const FieldPtr& f, double from, double to) {
  double len = to - from;
  if (len < 0 || len > kPi) throw Error(ErrorCode::PRECONDITION, "arc length must lie in [0, pi]");
  return slab_of(f, {wrap(from + len / 2), len / 2});
}

std::pair<double, double> line_arc(const Slab& s) {
  Arc a = arc_of(s);
  return {a.c, a.h};
}

double disjoint_margin(const Ball& a, const Ball& b) {
  if (arcs(a)) {
    Arc x = arc_of(a), y = arc_of(b);
    return arc_dist(x.c, y.c) - x.h - y.h;
  }
  return proj_dist(a.center, b.center) - a.radius - b.radius;
}

double disjoint_margin(const Ball& a, const Slab& s) {
  if (arcs(a)) {
    Arc x = arc_of(a), y = arc_of(s);
    return arc_dist(x.c, y.c) - x.h - y.h;
  }
  return dist_point_hyperplane(a.center, s.plane) - a.radius - s.radius;
}

double contain_margin(const Ball& inner, const Ball& outer) {
  if (arcs(inner)) {
    Arc x = arc_of(inner), y = arc_of(outer);
    return y.h - arc_dist(x.c, y.c) - x.h;
  }
  return outer.radius - proj_dist(inner.center, outer.center) - inner.radius;
}

double contain_margin(const Slab& inner, const Slab& outer) {
  const FieldPtr& f = inner.plane.f.at(0).field();
  if (exact_arcs(f, static_cast<int>(inner.plane.f.size()))) {
    Arc x = arc_of(inner), y = arc_of(outer);
    return y.h - arc_dist(x.c, y.c) - x.h;
  }
  return outer.radius - hausdorff_dist(inner.plane, outer.plane) - inner.radius;
}

double avoid_margin(const Ball& a, const ProjPoint& p) {
  if (arcs(a)) {
    Arc x = arc_of(a);
    return arc_dist(x.c, angle_of(p.v)) - x.h;
  }
  return proj_dist(a.center, p) - a.radius;
}

double avoid_margin(const Slab& s, const ProjHyperplane& h) {
  const FieldPtr& f = s.plane.f.at(0).field();
  int n = static_cast<int>(s.plane.f.size());
  if (n != 2) return std::numeric_limits<double>::quiet_NaN();
  if (exact_arcs(f, n)) {
    Arc x = arc_of(s);
    return arc_dist(x.c, kernel_angle(h)) - x.h;
  }
  return hausdorff_dist(s.plane, h) - s.radius;
}

bool contains(const Ball& a, const ProjPoint& x) {
  if (arcs(a)) {
    Arc y = arc_of(a);
    return arc_dist(y.c, angle_of(x.v)) < y.h;
  }
  return proj_dist(a.center, x) < a.radius;
}

bool contains(const Slab& s, const ProjPoint& x) {
  const FieldPtr& f = s.plane.f.at(0).field();
  if (exact_arcs(f, static_cast<int>(x.v.size()))) {
    Arc y = arc_of(s);
    return arc_dist(y.c, angle_of(x.v)) <= y.h;
  }
  return dist_point_hyperplane(x, s.plane) <= s.radius;
}

double map_margin(const ProjMap& g, const Slab& R, const Ball& A) {
  const FieldPtr& f = g.field();
  if (exact_arcs(f, g.n())) {
    Arc r = arc_of(R);
    Arc comp{wrap(r.c + kPi / 2), kPi / 2 - r.h};
    if (comp.h <= 0) return kInf;
    Arc im = arc_image(g, comp);
    Arc a = arc_of(A);
    return a.h - arc_dist(im.c, a.c) - im.h;
  }
  CartanData cd = cartan(g);
  return A.radius - combine(f, proj_dist(cd.top, A.center), outside_slab_sup(g, cd, R));
}

Ball image_ball(const ProjMap& g, const Slab& R, const ProjPoint& center) {
  const FieldPtr& f = g.field();
  if (exact_arcs(f, g.n())) {
    Arc r = arc_of(R);
    Arc comp{wrap(r.c + kPi / 2), kPi / 2 - r.h};
    Arc im = arc_image(g, comp);
    im.h = std::min(kPi / 2, im.h * (1 + 1e-9) + 1e-15);
    return ball_of(f, im);
  }
  CartanData cd = cartan(g);
  double rad = combine(f, proj_dist(cd.top, center), outside_slab_sup(g, cd, R));
  return {center, std::min(1.0, rad * (1 + 1e-9) + 1e-300)};
}

Ball transport(const ProjMap& g, const Ball& b) {
  const FieldPtr& f = g.field();
  if (exact_arcs(f, g.n())) return ball_of(f, arc_image(g, arc_of(b)));
  CartanData cd = cartan(g);
  double a1 = cd.abs[0], a2 = cd.abs[1];
  double kappa = f->is_real() ? std::sqrt(2.0) : 1.0;
  Vec c = b.center.v;
  double cn = norm(c);
  for (auto& x : c) x = f->is_real() ? Scalar(f, x.real() / cn) : x;
  double gc = norm(g.g.apply(c));
  double denom = gc * (gc - kappa * a1 * b.radius);
  double rad = denom > 0 ? std::min(1.0, a1 * a2 * b.radius / denom) : 1.0;
  return {image(g, b.center), rad};
}

Slab transport(const ProjMap& g, const Slab& s) {
  const FieldPtr& f = g.field();
  if (exact_arcs(f, g.n())) return slab_of(f, arc_image(g, arc_of(s)));
  if (g.n() == 2) {
    // On a line the slab is the closed ball around the point spanning ker f.
    Ball b = transport(g, Ball{make_point({-s.plane.f[1], s.plane.f[0]}), s.radius});
    return {make_hyperplane({-b.center.v[1], b.center.v[0]}), b.radius};
  }
  Vec fg = g.ginv.apply_dual(s.plane.f);
  double rad = s.radius * norm(s.plane.f) * op_norm(g.ginv) / norm(fg);
  return {make_hyperplane(fg), std::min(1.0, rad)};
}

Arena transport(const ProjMap& g, const Arena& a) {
  return {transport(g, a.attract), transport(g, a.repel), transport(g, a.attract_inv), transport(g, a.repel_inv)};
}

Arena canonical_arena(const ProjMap& g, double rho_attract, double rho_repel) {
  FixedData fd = canonical_fixed_data(g);
  FixedData fdi = canonical_fixed_data(g.inverse());
  return {{fd.v, rho_attract}, {fd.H, rho_repel}, {fdi.v, rho_attract}, {fdi.H, rho_repel}};
}

std::vector<MarginRecord> element_margins(const ProjMap& g, const Arena& a, int index) {
  ProjMap gi = g.inverse();
  return {
      {"map", index, index, map_margin(g, a.repel, a.attract)},
      {"map_inv", index, index, map_margin(gi, a.repel_inv, a.attract_inv)},
      {"A/R", index, index, disjoint_margin(a.attract, a.repel)},
      {"A/A_inv", index, index, disjoint_margin(a.attract, a.attract_inv)},
      {"A_inv/R_inv", index, index, disjoint_margin(a.attract_inv, a.repel_inv)},
  };
}

std::optional<double> minimal_arena_radius(const ProjMap& g) {
  FixedData fd = canonical_fixed_data(g);
  FixedData fdi = canonical_fixed_data(g.inverse());
  ProjMap gi = g.inverse();
  auto arena = [&](double r) { return Arena{{fd.v, r}, {fd.H, r}, {fdi.v, r}, {fdi.H, r}}; };
  auto maps_ok = [&](double r) {
    Arena a = arena(r);
    return map_margin(g, a.repel, a.attract) >= 0 && map_margin(gi, a.repel_inv, a.attract_inv) >= 0;
  };
  auto disjoint_ok = [&](double r) {
    for (const auto& m : element_margins(g, arena(r)))
      if (m.margin < 0) return false;
    return true;
  };
  double hi = 0.999;
  if (!maps_ok(hi)) return std::nullopt;
  double lo_log = std::log(1e-300), hi_log = std::log(hi);
  for (int it = 0; it < 200 && hi_log - lo_log > 1e-9; ++it) {
    double mid = 0.5 * (lo_log + hi_log);
    if (maps_ok(std::exp(mid))) hi_log = mid;
    else lo_log = mid;
  }
  double r = std::exp(hi_log) * (1 + 1e-6);
  if (!maps_ok(r) || !disjoint_ok(r)) return std::nullopt;
  return r;
}

namespace {

std::string set_name(char kind, int i, bool inv) {
  std::string s(1, kind);
  s += "(g" + std::to_string(i) + (inv ? "^-1)" : ")");
  return s;
}

}  // namespace

PingPongCertificate check_pingpong(const PingPongTuple& tuple, double tol) {
  PingPongCertificate c;
  c.tol = tol;
  c.min_margin = kInf;
  if (tuple.empty()) {
    c.ok = true;
    return c;
  }
  c.mode = exact_arcs(tuple[0].first.field(), tuple[0].first.n()) ? ProofMode::EXACT : ProofMode::BOUND;
  auto record = [&](MarginRecord m) {
    c.min_margin = std::min(c.min_margin, m.margin);
    if (!(m.margin >= -tol) && !c.violation) c.violation = m;
    c.margins.push_back(std::move(m));
  };
  int k = static_cast<int>(tuple.size());
  for (int i = 0; i < k; ++i)
    for (auto& m : element_margins(tuple[i].first, tuple[i].second, i)) record(m);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const Arena& a = tuple[i].second;
      const Arena& b = tuple[j].second;
      for (int s = 0; s < 2; ++s) {
        const Ball& ai = s ? a.attract_inv : a.attract;
        for (int t = 0; t < 2; ++t) {
          const Ball& aj = t ? b.attract_inv : b.attract;
          const Slab& rj = t ? b.repel_inv : b.repel;
          if (i < j) record({set_name('A', i, s) + "/" + set_name('A', j, t), i, j, disjoint_margin(ai, aj)});
          record({set_name('A', i, s) + "/" + set_name('R', j, t), i, j, disjoint_margin(ai, rj)});
        }
      }
    }
  c.ok = !c.violation.has_value();
  return c;
}

PingPongCertificate pingpong_certify(const PingPongTuple& tuple, double tol) {
  PingPongCertificate c = check_pingpong(tuple, tol);
  if (!c.ok)
    throw Error(ErrorCode::OVERLAP, c.violation->relation + " between elements " + std::to_string(c.violation->i) +
                                        " and " + std::to_string(c.violation->j) +
                                        ", margin " + std::to_string(c.violation->margin));
  return c;
}

// ------------------------------------------------ word falsifier

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 q) { return static_cast<u64>(static_cast<u128>(a) * b % q); }

u64 powmod(u64 a, u64 e, u64 q) {
  u64 r = 1;
  while (e) {
    if (e & 1) r = mulmod(r, a, q);
    a = mulmod(a, a, q);
    e >>= 1;
  }
  return r;
}

// Integer matrix in the projective class of m, reduced mod q.
std::vector<u64> reduce_class(const RatMat& m, u64 q) {
  mpz_class l = 1;
  for (const auto& row : m)
    for (const auto& x : row) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  mpz_class qq;
  mpz_import(qq.get_mpz_t(), 1, 1, sizeof(u64), 0, 0, &q);
  std::vector<u64> out;
  for (const auto& row : m)
    for (const auto& x : row) {
      mpz_class v = x.get_num() * (l / x.get_den());
      mpz_class r;
      mpz_mod(r.get_mpz_t(), v.get_mpz_t(), qq.get_mpz_t());
      u64 w = 0;
      mpz_export(&w, nullptr, -1, sizeof(u64), 0, 0, r.get_mpz_t());
      out.push_back(w);
    }
  return out;
}

std::vector<u64> mat_mul(const std::vector<u64>& a, const std::vector<u64>& b, int n, u64 q) {
  std::vector<u64> c(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      u64 x = a[i * n + k];
      if (!x) continue;
      for (int j = 0; j < n; ++j) c[i * n + j] = (c[i * n + j] + mulmod(x, b[k * n + j], q)) % q;
    }
  return c;
}

// Scales so the first nonzero entry is 1.
void normalize_mod(std::vector<u64>& m, u64 q) {
  for (u64 x : m)
    if (x) {
      u64 inv = powmod(x, q - 2, q);
      for (auto& y : m) y = mulmod(y, inv, q);
      return;
    }
}

bool is_scalar(const RatMat& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i != j && m[i][j] != 0) return false;
      if (i == j && m[i][i] != m[0][0]) return false;
    }
  return true;
}

u64 hash_entries(const std::vector<u64>& m) {
  u64 h = 0x12345678abcdefULL;
  for (u64 x : m) h = sample_seed(h, x);
  return h;
}

}  // namespace

MatrixRelator find_matrix_relator(const std::vector<RatMat>& elements, int max_len) {
  MatrixRelator out;
  if (elements.empty() || max_len <= 0) return out;
  int J = static_cast<int>(elements.size());
  int n = static_cast<int>(elements[0].size());
  std::vector<RatMat> inverses;
  for (const auto& e : elements) inverses.push_back(rat_inverse(e));

  const u64 primes[] = {2305843009213693951ULL, 4294967291ULL, 2147483647ULL};
  u64 q = 0;
  std::vector<std::vector<u64>> gen(2 * J);
  for (u64 cand : primes) {
    bool good = true;
    for (int i = 0; i < J && good; ++i) {
      gen[2 * i] = reduce_class(elements[i], cand);
      gen[2 * i + 1] = reduce_class(inverses[i], cand);
      std::vector<u64> prod = mat_mul(gen[2 * i], gen[2 * i + 1], n, cand);
      good = prod[0] != 0;  // the product is a scalar matrix; it must not vanish
    }
    if (good) {
      q = cand;
      break;
    }
  }
  if (q == 0) throw Error(ErrorCode::SINGULAR_AT_PRECISION, "no usable prime for the word falsifier");

  int half = (max_len + 1) / 2;
  std::vector<int> parent{-1};
  std::vector<signed char> letter{0};
  std::vector<std::vector<u64>> mats;
  std::vector<u64> id(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) id[i * n + i] = 1;
  mats.push_back(id);
  std::size_t layer_begin = 0, layer_end = 1;
  for (int depth = 1; depth <= half; ++depth) {
    for (std::size_t v = layer_begin; v < layer_end; ++v) {
      int last = letter[v];
      for (int s = 0; s < 2 * J; ++s) {
        int l = slot_letter(s);
        if (last == -l) continue;
        std::vector<u64> m = mat_mul(mats[v], gen[s], n, q);
        normalize_mod(m, q);
        parent.push_back(static_cast<int>(v));
        letter.push_back(static_cast<signed char>(l));
        mats.push_back(std::move(m));
      }
    }
    layer_begin = layer_end;
    layer_end = mats.size();
  }
  out.words_examined = static_cast<long>(mats.size());

  std::vector<std::pair<u64, int>> keyed;
  keyed.reserve(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i) keyed.emplace_back(hash_entries(mats[i]), static_cast<int>(i));
  std::sort(keyed.begin(), keyed.end());

  auto word_of = [&](int v) {
    std::vector<Letter> ls;
    for (; v > 0; v = parent[v]) ls.push_back(letter[v]);
    std::reverse(ls.begin(), ls.end());
    return Word(J, ls);
  };
  std::optional<Word> best;
  for (std::size_t a = 0; a < keyed.size();) {
    std::size_t b = a;
    while (b < keyed.size() && keyed[b].first == keyed[a].first) ++b;
    for (std::size_t i = a; i < b; ++i)
      for (std::size_t j = i + 1; j < b; ++j) {
        int u = keyed[i].second, v = keyed[j].second;
        if (mats[u] != mats[v]) continue;
        Word w = word_of(u) * invert(word_of(v));
        if (w.is_identity() || static_cast<int>(w.length()) > max_len) continue;
        if (best && !(w < *best)) continue;
        if (is_scalar(rat_evaluate(w, elements))) best = w;
      }
    a = b;
  }
  if (best) {
    out.found = true;
    out.relator = *best;
  }
  return out;
}

// ------------------------------------------------ arranging conjugates

ArrangedTuple arrange_independent(const ProjMap& g, const Arena& ga, const PingPongTuple& as,
                                  const std::vector<long>& indices, long samples, std::uint64_t seed) {
  if (as.size() != indices.size()) throw Error(ErrorCode::PRECONDITION, "one index per element");
  std::set<long> seen(indices.begin(), indices.end());
  if (seen.size() != indices.size()) throw Error(ErrorCode::OVERLAP, "property 3: repeated index");
  ArrangedTuple out;
  out.indices = indices;
  auto require = [&](const std::string& what, int i, double m) {
    out.property_margins.push_back({what, i, -1, m});
    if (!(m >= -1e-9))
      throw Error(ErrorCode::OVERLAP, what + " fails for element " + std::to_string(i) + ", margin " + std::to_string(m));
  };
  for (int i = 0; i < static_cast<int>(as.size()); ++i) {
    const Arena& a = as[i].second;
    for (const Ball* gb : {&ga.attract, &ga.attract_inv}) {
      require("property 1: A/A", i, disjoint_margin(a.attract, *gb));
      require("property 1: A_inv/A", i, disjoint_margin(a.attract_inv, *gb));
      require("property 1: R/A", i, disjoint_margin(*gb, a.repel));
      require("property 1: R_inv/A", i, disjoint_margin(*gb, a.repel_inv));
    }
    for (const Slab* gs : {&ga.repel, &ga.repel_inv}) {
      require("property 2: A/R", i, disjoint_margin(a.attract, *gs));
      require("property 2: A_inv/R", i, disjoint_margin(a.attract_inv, *gs));
    }
  }
  // g maps D into A(g) and A(g) into itself; these margins imply property 3.
  for (const auto& m : element_margins(g, ga, -1)) require("property 3: " + m.relation, -1, m.margin);

  long span = 1;
  if (!indices.empty()) {
    auto [lo, hi] = std::minmax_element(indices.begin(), indices.end());
    span = std::max(1L, *hi - *lo);
  }
  ProjMap gi = g.inverse();
  const FieldPtr& f = g.field();
  for (long s = 0; s < samples; ++s) {
    std::mt19937_64 rng(sample_seed(seed, static_cast<std::uint64_t>(s)));
    ProjPoint x = random_point(f, g.n(), rng);
    if (contains(ga.attract, x) || contains(ga.attract_inv, x) || contains(ga.repel, x) || contains(ga.repel_inv, x))
      continue;
    ++out.translate_samples;
    ProjPoint y = x, z = x;
    for (long k = 1; k <= span; ++k) {
      y = image(g, y);
      z = image(gi, z);
      if (!contains(ga.attract, y) || !contains(ga.attract_inv, z))
        throw Error(ErrorCode::OVERLAP, "property 3: translate of D meets D-hat at shift " + std::to_string(k));
    }
  }

  for (std::size_t i = 0; i < as.size(); ++i) {
    ProjMap h = g.power(indices[i]);
    out.tuple.emplace_back(h * as[i].first * h.inverse(), transport(h, as[i].second));
  }
  out.certificate = pingpong_certify(out.tuple);
  return out;
}

}  // namespace subdyn
