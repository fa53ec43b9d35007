#include "subdyn/irs.hpp"

#include <algorithm>

#include "subdyn/chabauty.hpp"
#include "subdyn/error.hpp"

namespace subdyn {

namespace {

bool same_subgroup(const CoreGraph& a, const CoreGraph& b) {
  // Core graphs are numbered canonically, so identical tables are a cheap
  // positive answer.
  return a == b || equal(a, b);
}

}  // namespace

void FiniteAction::validate() const {
  if (rank < 1) throw Error(ErrorCode::PRECONDITION, "action rank must be positive");
  if (points < 1) throw Error(ErrorCode::PRECONDITION, "action needs at least one point");
  if (static_cast<int>(weights.size()) != points)
    throw Error(ErrorCode::PRECONDITION, "weight count differs from point count");
  if (static_cast<int>(perms.size()) != rank)
    throw Error(ErrorCode::PRECONDITION, "need one permutation per generator");
  Rational sum = 0;
  for (const auto& w : weights) {
    if (w <= 0) throw Error(ErrorCode::PRECONDITION, "weights must be positive");
    sum += w;
  }
  if (sum != 1) throw Error(ErrorCode::PRECONDITION, "weights must sum to 1");
  for (const auto& p : perms) {
    if (static_cast<int>(p.size()) != points) throw Error(ErrorCode::PRECONDITION, "permutation has wrong length");
    std::vector<char> hit(static_cast<std::size_t>(points), 0);
    for (int y : p) {
      if (y < 0 || y >= points || hit[static_cast<std::size_t>(y)])
        throw Error(ErrorCode::PRECONDITION, "not a permutation");
      hit[static_cast<std::size_t>(y)] = 1;
    }
    for (int x = 0; x < points; ++x)
      if (weights[static_cast<std::size_t>(x)] != weights[static_cast<std::size_t>(p[static_cast<std::size_t>(x)])])
        throw Error(ErrorCode::PRECONDITION, "permutation does not preserve the weights");
  }
}

int FiniteAction::act(int x, const Word& w) const {
  for (Letter l : w.letters()) {
    const auto& p = perms[static_cast<std::size_t>((l > 0 ? l : -l) - 1)];
    if (l > 0) {
      x = p[static_cast<std::size_t>(x)];
    } else {
      x = static_cast<int>(std::find(p.begin(), p.end(), x) - p.begin());
    }
  }
  return x;
}

void AtomicIRS::add(const CoreGraph& g, const Rational& w) {
  if (rank_ == 0) rank_ = g.rank();
  if (g.rank() != rank_) throw Error(ErrorCode::RANK_MISMATCH, "atom rank differs");
  if (w == 0) return;
  for (auto& a : atoms_) {
    if (same_subgroup(a.subgroup, g)) {
      a.weight += w;
      return;
    }
  }
  atoms_.push_back({g, w});
}

Rational AtomicIRS::total() const {
  Rational s = 0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

Rational AtomicIRS::weight_of(const CoreGraph& g) const {
  for (const auto& a : atoms_)
    if (same_subgroup(a.subgroup, g)) return a.weight;
  return 0;
}

bool AtomicIRS::is_invariant_under(const std::vector<Word>& gens) const {
  if (total() != 1) return false;
  for (const auto& a : atoms_) {
    if (a.weight <= 0) return false;
    for (const auto& s : gens)
      if (weight_of(conjugate_subgroup(a.subgroup, s)) != a.weight) return false;
  }
  return true;
}

bool AtomicIRS::is_invariant() const {
  std::vector<Word> gens;
  for (int i = 1; i <= rank_; ++i) gens.push_back(Word::generator(rank_, i));
  return is_invariant_under(gens);
}

bool same_measure(const AtomicIRS& a, const AtomicIRS& b) {
  if (a.atoms().size() != b.atoms().size()) return false;
  for (const auto& x : a.atoms())
    if (b.weight_of(x.subgroup) != x.weight) return false;
  return true;
}

CoreGraph stabilizer(const FiniteAction& a, int x) {
  std::vector<CoreGraph::RawEdge> edges;
  for (int y = 0; y < a.points; ++y)
    for (int i = 0; i < a.rank; ++i)
      edges.push_back({y, i + 1, a.perms[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)]});
  return CoreGraph::from_raw(a.rank, a.points, x, edges);
}

AtomicIRS stabilizer_irs(const FiniteAction& a) {
  a.validate();
  AtomicIRS mu(a.rank);
  for (int x = 0; x < a.points; ++x) mu.add(stabilizer(a, x), a.weights[static_cast<std::size_t>(x)]);
  return mu;
}

AtomicIRS dirac_normal(const CoreGraph& n) {
  if (!is_normal(n)) throw Error(ErrorCode::NOT_NORMAL, "subgroup is not normal");
  AtomicIRS mu(n.rank());
  mu.add(n, 1);
  return mu;
}

AtomicIRS almost_normal_irs(const CoreGraph& h, int conj_bound) {
  std::vector<CoreGraph> orbit{h};
  for (std::size_t k = 0; k < orbit.size(); ++k) {
    for (int i = 1; i <= h.rank(); ++i) {
      for (int s : {1, -1}) {
        CoreGraph c = conjugate_subgroup(orbit[k], Word::generator(h.rank(), i, s));
        bool known = false;
        for (const auto& o : orbit)
          if (same_subgroup(o, c)) {
            known = true;
            break;
          }
        if (known) continue;
        orbit.push_back(c);
        if (static_cast<int>(orbit.size()) > conj_bound)
          throw Error(ErrorCode::NOT_ALMOST_NORMAL,
                      "more than " + std::to_string(conj_bound) + " conjugates found");
      }
    }
  }
  AtomicIRS mu(h.rank());
  Rational w(1, static_cast<unsigned long>(orbit.size()));
  for (const auto& o : orbit) mu.add(o, w);
  return mu;
}

AtomicIRS restrict(const AtomicIRS& mu, const CoreGraph& sigma) {
  AtomicIRS out(sigma.rank());
  for (const auto& a : mu.atoms()) out.add(intersect(a.subgroup, sigma), a.weight);
  return out;
}

AtomicIRS induce(const AtomicIRS& mu, const CoreGraph& sigma) {
  auto n = index(sigma);
  if (!n) throw Error(ErrorCode::INFINITE_INDEX, "induction needs finite index");
  for (const auto& a : mu.atoms())
    if (!is_subgroup(a.subgroup, sigma)) throw Error(ErrorCode::ATOM_NOT_IN_SIGMA, "atom not contained in Sigma");
  // Right coset representatives r_i give left coset representatives r_i^{-1}.
  auto reps = coset_action(sigma).reps;
  AtomicIRS out(sigma.rank());
  Rational scale(1, static_cast<unsigned long>(*n));
  for (const auto& a : mu.atoms())
    for (const auto& r : reps) out.add(conjugate_subgroup(a.subgroup, invert(r)), a.weight * scale);
  return out;
}

AtomicIRS intersect_irs(const AtomicIRS& mu1, const AtomicIRS& mu2) {
  if (mu1.rank() != mu2.rank()) throw Error(ErrorCode::RANK_MISMATCH, "intersect_irs: rank mismatch");
  AtomicIRS out(mu1.rank());
  for (const auto& a : mu1.atoms())
    for (const auto& b : mu2.atoms()) out.add(intersect(a.subgroup, b.subgroup), a.weight * b.weight);
  return out;
}

Rational env_measure(const AtomicIRS& mu, const CoreGraph& sigma) {
  Rational s = 0;
  for (const auto& a : mu.atoms())
    if (env_contains(a.subgroup, sigma)) s += a.weight;
  return s;
}

EssentialCheck check_locally_essential(const AtomicIRS& mu, const CoreGraph& delta, int radius, int k) {
  // One representative per inverse pair.
  std::vector<Word> cand;
  for (const auto& w : ball_signature(delta, radius).words) {
    if (w.is_identity()) continue;
    if (invert(w) < w) continue;
    cand.push_back(w);
  }
  EssentialCheck out;
  std::vector<std::size_t> pick;
  // Subsets in order of size, then lexicographically.
  for (int size = 1; size <= k && size <= static_cast<int>(cand.size()); ++size) {
    pick.assign(static_cast<std::size_t>(size), 0);
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    for (;;) {
      std::vector<Word> gens;
      for (auto i : pick) gens.push_back(cand[i]);
      CoreGraph s = CoreGraph::from_generators(delta.rank(), gens);
      ++out.tested;
      if (env_measure(mu, s) == 0) {
        out.ok = false;
        out.witness = s;
        out.witness_generators = gens;
        return out;
      }
      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == cand.size() - static_cast<std::size_t>(size - i)) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

ReturnTimes return_times(const CoreGraph& delta, const CoreGraph& sigma, const Word& gamma, long cutoff) {
  ReturnTimes out;
  auto n = index(delta);
  if (n) {
    CoreGraph c = delta;
    for (long p = 1; p <= *n; ++p) {
      c = conjugate_subgroup(c, gamma);
      if (same_subgroup(c, delta)) {
        out.period = p;
        break;
      }
    }
  }
  long horizon = cutoff;
  if (out.period) horizon = std::max(horizon, *out.period);
  // c_m = gamma^m Delta gamma^{-m}; m is a hit iff Sigma <= c_m.
  CoreGraph c = delta;
  bool hit_in_period = false;
  for (long m = 1; m <= horizon; ++m) {
    c = conjugate_subgroup(c, gamma);
    bool hit = is_subgroup(sigma, c);
    if (hit && m <= cutoff) out.hits.push_back(m);
    if (hit && out.period && m <= *out.period) hit_in_period = true;
  }
  if (out.period) out.infinite = hit_in_period;
  return out;
}

CoverCheck check_cover(const AtomicIRS& mu, const std::vector<CoreGraph>& f) {
  CoverCheck out;
  for (const auto& a : mu.atoms()) {
    bool covered = std::any_of(f.begin(), f.end(), [&](const CoreGraph& s) { return env_contains(a.subgroup, s); });
    if (!covered) {
      out.ok = false;
      out.uncovered = a.subgroup;
      return out;
    }
  }
  return out;
}

RefinementCheck check_refinement(const std::vector<CoreGraph>& f, const std::vector<CoreGraph>& h, const AtomicIRS& mu) {
  RefinementCheck out;
  for (const auto& s : f) {
    for (const auto& a : mu.atoms()) {
      if (!env_contains(a.subgroup, s)) continue;
      bool found = std::any_of(h.begin(), h.end(), [&](const CoreGraph& t) {
        return is_subgroup(s, t) && is_subgroup(t, a.subgroup);
      });
      if (!found) {
        out.ok = false;
        out.sigma = s;
        out.delta = a.subgroup;
        return out;
      }
    }
  }
  return out;
}

Conditioned condition(const AtomicIRS& mu, const AtomPredicate& s) {
  Rational w = 0;
  for (const auto& a : mu.atoms()) {
    bool in = s(a.subgroup);
    for (int i = 1; i <= mu.rank(); ++i)
      if (s(conjugate_subgroup(a.subgroup, Word::generator(mu.rank(), i))) != in)
        throw Error(ErrorCode::NOT_INVARIANT_EVENT, "event is not conjugation invariant");
    if (in) w += a.weight;
  }
  if (w == 0) throw Error(ErrorCode::NULL_EVENT, "event has measure zero");
  Conditioned out{w, AtomicIRS(mu.rank())};
  for (const auto& a : mu.atoms())
    if (s(a.subgroup)) out.measure.add(a.subgroup, a.weight / w);
  return out;
}

bool nontrivial_under(const AtomicIRS& mu, const IdentityTest& is_identity) {
  for (const auto& a : mu.atoms()) {
    auto b = basis(a.subgroup);
    if (std::all_of(b.begin(), b.end(), is_identity)) return false;
  }
  return true;
}

IdentityTest permutation_identity(const std::vector<std::vector<int>>& perms) {
  FiniteAction a;
  a.rank = static_cast<int>(perms.size());
  a.points = perms.empty() ? 0 : static_cast<int>(perms[0].size());
  a.perms = perms;
  return [a](const Word& w) {
    for (int x = 0; x < a.points; ++x)
      if (a.act(x, w) != x) return false;
    return true;
  };
}

}  // namespace subdyn
