#include "subdyn/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "subdyn/error.hpp"
#include "subdyn/stallings.hpp"

namespace subdyn {

namespace {

constexpr double kIncidenceTol = 1e-12;

ProjMap eval_maps(const Word& w, const std::vector<ProjMap>& gens, const FieldPtr& f, int n) {
  ProjMap out(Mat::identity(f, n), Mat::identity(f, n));
  for (Letter l : w.letters()) {
    const ProjMap& g = gens.at(static_cast<std::size_t>(std::abs(l) - 1));
    out = out * (l > 0 ? g : g.inverse());
  }
  return out;
}

// Ambient word of a word in the subgroup generators.
Word substitute(const Word& w, const std::vector<Word>& gens, int rank) {
  Word out(rank);
  for (Letter l : w.letters()) {
    const Word& g = gens.at(static_cast<std::size_t>(std::abs(l) - 1));
    out = out * (l > 0 ? g : invert(g));
  }
  return out;
}

double min_of(const std::vector<MarginRecord>& ms) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : ms) m = std::min(m, r.margin);
  return m;
}

}  // namespace

ContractingResult make_contracting(const ProjMap& g, const ProjMap& x, int m_max, double threshold, double radius,
                                   long samples, std::uint64_t seed) {
  FixedData fd = canonical_fixed_data(g);
  FixedData fdi = canonical_fixed_data(g.inverse());
  ContractingResult out;
  out.degeneracy_margin = dist_point_hyperplane(image(x, fdi.v), fd.H);
  if (out.degeneracy_margin <= kIncidenceTol)
    throw Error(ErrorCode::DEGENERATE_POSITION, "x keeps the attracting point of g^-1 on the repelling hyperplane of g");
  for (int m = 0; m <= m_max; ++m) {
    ProjMap gm = g.power(m);
    ProjMap y = gm * x * gm.inverse();
    double lip = local_lipschitz(y, fdi.v, radius, samples, seed);
    if (lip < threshold) {
      out.m = m;
      out.y = y;
      out.lip = lip;
      return out;
    }
  }
  throw Error(ErrorCode::RANGE_EXHAUSTED, "no m <= " + std::to_string(m_max) + " reaches the Lipschitz threshold");
}

VeryProximalResult make_very_proximal(const ProjMap& y, const std::vector<ProjMap>& helpers, int word_bound,
                                      double r, double eps, long budget, std::uint64_t seed) {
  VeryProximalResult out;
  int H = static_cast<int>(helpers.size());
  out.f1 = out.f2 = Word(H);
  auto certify = [&](const ProjMap& a) -> std::optional<ProximalityCertificate> {
    try {
      ProximalityCertificate c = is_very_proximal(a, r, eps, budget, seed);
      if (c.ok) return c;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PRECONDITION) throw;
    }
    return std::nullopt;
  };
  if (auto c = certify(y)) {
    out.a = y;
    out.certificate = *c;
    out.short_circuit = true;
    return out;
  }
  if (H > 0) {
    std::vector<Word> words = ball(H, word_bound);
    ProjMap yi = y.inverse();
    for (const Word& w1 : words) {
      ProjMap f1 = eval_maps(w1, helpers, y.field(), y.n());
      for (const Word& w2 : words) {
        if (w1.is_identity() && w2.is_identity()) continue;
        ++out.pairs_tried;
        ProjMap a = y * f1 * yi * eval_maps(w2, helpers, y.field(), y.n());
        if (auto c = certify(a)) {
          out.f1 = w1;
          out.f2 = w2;
          out.a = a;
          out.certificate = *c;
          return out;
        }
      }
    }
  }
  throw Error(ErrorCode::SEARCH_EXHAUSTED,
              "no helper pair of length <= " + std::to_string(word_bound) + " gives a very proximal product");
}

GoodPosition position_good(const ProjMap& h, const Arena& h_arena, const ProjMap& a, const Arena& a_arena,
                           int l_max) {
  FixedData fh = canonical_fixed_data(h), fhi = canonical_fixed_data(h.inverse());
  FixedData fa = canonical_fixed_data(a), fai = canonical_fixed_data(a.inverse());
  double general = std::min({dist_point_hyperplane(fa.v, fh.H), dist_point_hyperplane(fai.v, fh.H),
                             dist_point_hyperplane(fhi.v, fa.H), dist_point_hyperplane(fhi.v, fai.H)});
  if (general <= kIncidenceTol)
    throw Error(ErrorCode::DEGENERATE_POSITION, "a and h are not in general position");
  for (int l = 0; l <= l_max; ++l) {
    ProjMap hl = h.power(l);
    Arena t = transport(hl, a_arena);
    GoodPosition out;
    out.margins = {contain_margin(t.attract, h_arena.attract), contain_margin(t.attract_inv, h_arena.attract),
                   contain_margin(t.repel, h_arena.repel_inv), contain_margin(t.repel_inv, h_arena.repel_inv)};
    out.min_margin = std::min({out.margins[0], out.margins[1], out.margins[2], out.margins[3]});
    if (out.min_margin > 0) {
      out.l = l;
      out.a_conj = hl * a * hl.inverse();
      out.arena = t;
      return out;
    }
  }
  throw Error(ErrorCode::RANGE_EXHAUSTED, "no l <= " + std::to_string(l_max) + " puts the conjugate in good position");
}

std::array<double, 4> incidence_margins(const CosetInput& in) {
  ProjMap M = in.y * in.gamma * in.x;
  ProjMap Mi = M.inverse();
  FixedData p = canonical_fixed_data(in.b_p), pi = canonical_fixed_data(in.b_p.inverse());
  FixedData q = canonical_fixed_data(in.b_q), qi = canonical_fixed_data(in.b_q.inverse());
  return {dist_point_hyperplane(image(M, p.v), q.H), dist_point_hyperplane(image(Mi, qi.v), pi.H),
          dist_point_hyperplane(image(Mi, q.v), p.H), dist_point_hyperplane(image(M, pi.v), qi.H)};
}

SynthesisCandidate evaluate_candidate(const CosetInput& in, int l1, int l2, bool require_exclusion) {
  SynthesisCandidate c = fit_arena(in, in.b_q.power(l2) * in.y * in.gamma * in.x * in.b_p.power(l1), require_exclusion);
  c.l1 = l1;
  c.l2 = l2;
  return c;
}

namespace {

SynthesisCandidate fit_arena_unguarded(const CosetInput& in, const ProjMap& f, bool require_exclusion) {
  SynthesisCandidate c;
  c.containment.fill(-std::numeric_limits<double>::infinity());
  c.exclusion.fill(std::numeric_limits<double>::quiet_NaN());
  c.f = f;
  FixedData ff, ffi, p, pi, q, qi;
  try {
    ff = canonical_fixed_data(c.f);
    ffi = canonical_fixed_data(c.f.inverse());
    p = canonical_fixed_data(in.b_p);
    pi = canonical_fixed_data(in.b_p.inverse());
    q = canonical_fixed_data(in.b_q);
    qi = canonical_fixed_data(in.b_q.inverse());
  } catch (const Error& e) {
    c.failure = e.what();
    return c;
  }
  auto excl_ok = [&](double m) { return !require_exclusion || std::isnan(m) || m > 0; };

  // Largest slab around the hyperplane, halving from the outer radius, that fits.
  auto fit_slab = [&](const ProjHyperplane& H, const Slab& outer, const ProjHyperplane& avoid, double& cm,
                      double& ex) -> std::optional<Slab> {
    for (int k = 0; k <= 60; ++k) {
      Slab s{H, std::ldexp(outer.radius, -k)};
      double m = contain_margin(s, outer), e = avoid_margin(s, avoid);
      if (k == 0) {
        cm = m;
        ex = e;
      }
      if (m > 0 && excl_ok(e)) {
        cm = m;
        ex = e;
        return s;
      }
    }
    return std::nullopt;
  };

  ProjMap fi = c.f.inverse();
  const bool line = exact_arcs(c.f.field(), c.f.n());
  // On the line: the part of the outer arc on the side of H_f, cut off before the excluded
  // point H_b. It must also contain `keep`, whose image is the point A(f) has to avoid.
  auto side_arc = [&](const ProjHyperplane& Hf, const ProjHyperplane& Hb, const ProjPoint& keep, const Slab& outer,
                      double& cm, double& ex) -> std::optional<Slab> {
    const double pi = std::numbers::pi;
    auto offset = [&](double t) {  // signed offset from H_b in (-pi/2, pi/2]
      double d = std::remainder(t - line_angle(Hb), pi);
      return d == -pi / 2 ? pi / 2 : d;
    };
    double sf = offset(line_angle(Hf)), sk = offset(line_angle(keep));
    if (std::fabs(sf) <= kIncidenceTol) return std::nullopt;
    double delta = std::fabs(sf) / 2;
    if (sk * sf > 0) delta = std::min(delta, std::fabs(sk) / 2);
    else if (require_exclusion) {
      ex = -std::fabs(sk);
      return std::nullopt;
    }
    auto [oc, oh] = line_arc(outer);
    double reach = sf > 0 ? offset(oc) + oh : oh - offset(oc);  // distance to the outer edge on that side
    if (!(reach > std::fabs(sf))) return std::nullopt;
    double inner = delta, far = reach - 1e-3 * (reach - std::fabs(sf));
    double base = line_angle(Hb);
    Slab s = sf > 0 ? line_slab(c.f.field(), base + inner, base + far) : line_slab(c.f.field(), base - far, base - inner);
    cm = contain_margin(s, outer);
    ex = avoid_margin(s, Hb);
    return s;
  };
  std::optional<Slab> R, Ri;
  if (line) {
    R = side_arc(ff.H, p.H, image(fi, q.v), in.arena_p.repel, c.containment[0], c.exclusion[0]);
    Ri = side_arc(ffi.H, qi.H, image(c.f, pi.v), in.arena_q.repel_inv, c.containment[2], c.exclusion[2]);
  }
  if (!R) R = fit_slab(ff.H, in.arena_p.repel, p.H, c.containment[0], c.exclusion[0]);
  if (!Ri) Ri = fit_slab(ffi.H, in.arena_q.repel_inv, qi.H, c.containment[2], c.exclusion[2]);
  if (!R || !Ri) {
    c.failure = "repelling slab does not fit";
    return c;
  }
  Ball A = image_ball(c.f, *R, ff.v);
  Ball Ai = image_ball(fi, *Ri, ffi.v);
  c.containment[1] = contain_margin(A, in.arena_q.attract);
  c.containment[3] = contain_margin(Ai, in.arena_p.attract_inv);
  c.exclusion[1] = avoid_margin(A, q.v);
  c.exclusion[3] = avoid_margin(Ai, pi.v);
  c.arena = {A, *R, Ai, *Ri};
  c.self_margin = min_of(element_margins(c.f, c.arena));
  for (int i = 0; i < 4; ++i) {
    if (!(c.containment[i] > 0)) {
      c.failure = "containment " + std::to_string(i) + " fails";
      return c;
    }
    if (!excl_ok(c.exclusion[i])) {
      c.failure = "exclusion " + std::to_string(i) + " fails";
      return c;
    }
  }
  if (!(c.self_margin >= 0)) {
    c.failure = "arena of f is not self-consistent";
    return c;
  }
  c.ok = true;
  return c;
}

}  // namespace

SynthesisCandidate fit_arena(const CosetInput& in, const ProjMap& f, bool require_exclusion) {
  try {
    return fit_arena_unguarded(in, f, require_exclusion);
  } catch (const Error& e) {
    // Typically a point sent to the zero vector by a map that is rank one at working precision.
    SynthesisCandidate c;
    c.containment.fill(-std::numeric_limits<double>::infinity());
    c.exclusion.fill(std::numeric_limits<double>::quiet_NaN());
    c.f = f;
    c.failure = e.what();
    return c;
  }
}

SynthesisResult synthesize_coset_element(const CosetInput& in, int l_max, bool require_exclusion) {
  std::array<double, 4> inc = incidence_margins(in);
  for (int i = 0; i < 4; ++i)
    if (!(inc[i] > kIncidenceTol))
      throw Error(ErrorCode::DEGENERATE_POSITION, "incidence condition " + std::to_string(i) + " has margin " +
                                                      std::to_string(inc[i]));
  SynthesisResult out;
  out.incidence = inc;
  for (int l1 = 1; l1 <= l_max; ++l1)
    for (int l2 = 1; l2 <= l_max; ++l2) {
      ++out.candidates_tried;
      SynthesisCandidate c = evaluate_candidate(in, l1, l2, require_exclusion);
      if (!c.ok) continue;
      out.l1 = l1;
      out.l2 = l2;
      out.f = c.f;
      out.arena = c.arena;
      out.containment = c.containment;
      out.exclusion = c.exclusion;
      out.self_margin = c.self_margin;
      return out;
    }
  throw Error(ErrorCode::RANGE_EXHAUSTED, "no (l1, l2) <= " + std::to_string(l_max) + " nests the arenas");
}

FamilyResult double_coset_free_family(const FieldPtr& field, const std::vector<RatMat>& assignment,
                                      const std::vector<GroupSpec>& groups, const std::vector<FamilyRequest>& requests,
                                      long budget, const FamilyOptions& opt) {
  if (assignment.empty()) throw Error(ErrorCode::PRECONDITION, "empty matrix assignment");
  int rank = static_cast<int>(assignment.size());
  int n = static_cast<int>(assignment[0].size());
  int G = static_cast<int>(groups.size());
  bool exclusion = exact_arcs(field, n);
  FamilyResult out;

  std::vector<RatMat> b_rat;
  for (const auto& g : groups) b_rat.push_back(rat_evaluate(g.b, assignment));

  std::map<std::pair<int, long>, std::optional<std::pair<ProjMap, Arena>>> cache;
  auto b_power = [&](int r, long e) -> const std::optional<std::pair<ProjMap, Arena>>& {
    auto key = std::make_pair(r, e);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::optional<std::pair<ProjMap, Arena>> v;
    try {
      ProjMap m = ProjMap::from_rationals(field, rat_power(b_rat[r], e));
      if (auto rho = minimal_arena_radius(m)) v = std::make_pair(m, canonical_arena(m, *rho, *rho));
    } catch (const Error&) {
    }
    return cache.emplace(key, v).first->second;
  };

  // Common starting exponent: every b^N has an arena and the b's play ping-pong.
  std::vector<long> expo(G, 1);
  auto b_tuple = [&](const std::vector<long>& e) -> std::optional<PingPongTuple> {
    PingPongTuple t;
    for (int r = 0; r < G; ++r) {
      const auto& bp = b_power(r, e[r]);
      if (!bp) return std::nullopt;
      t.push_back(*bp);
    }
    return t;
  };
  bool started = false;
  for (long N = 1; N <= opt.max_power; N *= 2) {
    std::fill(expo.begin(), expo.end(), N);
    auto t = b_tuple(expo);
    if (t && check_pingpong(*t).ok) {
      started = true;
      break;
    }
  }
  if (!started) {
    for (int i = 0; i < static_cast<int>(requests.size()); ++i)
      out.failures.push_back({i, "the b elements do not play ping-pong within the power cap"});
    return out;
  }

  auto full_tuple = [&](const std::vector<long>& e, const FamilyElement* extra) -> std::optional<PingPongTuple> {
    auto t = b_tuple(e);
    if (!t) return std::nullopt;
    PingPongTuple all;
    for (const auto& el : out.elements) all.emplace_back(el.f, el.arena);
    if (extra) all.emplace_back(extra->f, extra->arena);
    all.insert(all.end(), t->begin(), t->end());
    return all;
  };

  for (int ri = 0; ri < static_cast<int>(requests.size()); ++ri) {
    const FamilyRequest& req = requests[ri];
    if (req.p < 0 || req.p >= G || req.q < 0 || req.q >= G) {
      out.failures.push_back({ri, "group index out of range"});
      continue;
    }
    if (budget <= 0) {
      out.failures.push_back({ri, "budget exhausted"});
      continue;
    }
    const GroupSpec& gp = groups[req.p];
    const GroupSpec& gq = groups[req.q];
    std::vector<Word> xs, ys;
    for (const Word& w : ball(static_cast<int>(gp.gens.size()), opt.xy_word_bound)) xs.push_back(substitute(w, gp.gens, rank));
    for (const Word& w : ball(static_cast<int>(gq.gens.size()), opt.xy_word_bound)) ys.push_back(substitute(w, gq.gens, rank));

    // Pairs by total length, then x, then y.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      for (std::size_t iy = 0; iy < ys.size(); ++iy) pairs.emplace_back(ix, iy);
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& u, const auto& v) {
      return xs[u.first].length() + ys[u.second].length() < xs[v.first].length() + ys[v.second].length();
    });

    long tried = 0;
    std::string reason = "no (x, y) pair";
    bool done = false;
    for (std::size_t pi = 0; pi < pairs.size() && !done && tried < budget; ++pi) {
      {
        ++tried;
        const Word& x = xs[pairs[pi].first];
        const Word& y = ys[pairs[pi].second];
        const auto& bp = b_power(req.p, expo[req.p]);
        const auto& bq = b_power(req.q, expo[req.q]);
        CosetInput in{bp->first,
                      bq->first,
                      bp->second,
                      bq->second,
                      ProjMap::from_rationals(field, rat_evaluate(x, assignment)),
                      ProjMap::from_rationals(field, rat_evaluate(y, assignment)),
                      ProjMap::from_rationals(field, rat_evaluate(req.gamma, assignment))};
        SynthesisResult s;
        try {
          s = synthesize_coset_element(in, opt.l_max, exclusion);
        } catch (const Error& e) {
          reason = e.what();
          continue;
        }
        FamilyElement el;
        el.request = req;
        el.x = x;
        el.y = y;
        el.n_p = expo[req.p];
        el.n_q = expo[req.q];
        el.l1 = s.l1;
        el.l2 = s.l2;
        Word bpw = power(groups[req.p].b, el.n_p * s.l1);
        Word bqw = power(groups[req.q].b, el.n_q * s.l2);
        el.word = bqw * y * req.gamma * x * bpw;
        el.f = ProjMap::from_rationals(field, rat_evaluate(el.word, assignment));
        // Refit on the exactly evaluated element so the arena matches the map that is certified.
        SynthesisCandidate exact = fit_arena(in, el.f, exclusion);
        if (!exact.ok) {
          reason = "exact element: " + exact.failure;
          continue;
        }
        s.f = el.f;
        s.arena = exact.arena;
        s.containment = exact.containment;
        s.exclusion = exact.exclusion;
        s.self_margin = exact.self_margin;
        el.arena = s.arena;
        el.synthesis = s;

        // Pad the exponents of b_p and b_q, smallest total increase first.
        bool padded = false;
        long room = opt.max_power - std::min(expo[req.p], expo[req.q]);
        for (long total = 0; !padded && total <= 2 * room; ++total)
          for (long jp = 0; !padded && jp <= total; ++jp) {
            long jq = total - jp;
            if (req.p == req.q && jq != 0) continue;
            std::vector<long> e = expo;
            e[req.p] = expo[req.p] + jp;
            e[req.q] = expo[req.q] + (req.p == req.q ? jp : jq);
            if (e[req.p] > opt.max_power || e[req.q] > opt.max_power) continue;
            auto t = full_tuple(e, &el);
            if (t && check_pingpong(*t).ok) {
              expo = e;
              padded = true;
            }
          }
        if (!padded) {
          reason = "power padding exceeded the cap";
          continue;
        }
        out.elements.push_back(std::move(el));
        done = true;
      }
    }
    if (!done) out.failures.push_back({ri, tried >= budget ? "budget exhausted: " + reason : reason});
  }

  out.exponents = expo;
  for (int r = 0; r < G; ++r) out.b_arenas.push_back(b_power(r, expo[r])->second);
  if (auto t = full_tuple(expo, nullptr)) out.certificate = check_pingpong(*t);
  std::vector<Word> words;
  for (const auto& el : out.elements) words.push_back(el.word);
  out.word_rank = words.empty() ? 0 : subdyn::rank(from_generators(words, rank));
  return out;
}

}  // namespace subdyn
