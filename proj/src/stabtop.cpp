#include "subdyn/stabtop.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "subdyn/error.hpp"
#include "subdyn/irs.hpp"

namespace subdyn {

namespace {

using Perm = std::vector<int>;

Perm identity_perm(int n) {
  Perm p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

// Right actions: (p * q)[x] = q[p[x]].
Perm compose(const Perm& p, const Perm& q) {
  Perm out(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) out[x] = q[static_cast<std::size_t>(p[x])];
  return out;
}

Perm inverse(const Perm& p) {
  Perm out(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) out[static_cast<std::size_t>(p[x])] = static_cast<int>(x);
  return out;
}

Perm perm_power(const Perm& p, long n) {
  Perm base = n >= 0 ? p : inverse(p);
  Perm out = identity_perm(static_cast<int>(p.size()));
  for (long k = n >= 0 ? n : -n; k > 0; k >>= 1) {
    if (k & 1) out = compose(out, base);
    base = compose(base, base);
  }
  return out;
}

long perm_order(const Perm& p) {
  long ord = 1;
  std::vector<char> seen(p.size(), 0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (seen[x]) continue;
    long len = 0;
    for (std::size_t y = x; !seen[y]; y = static_cast<std::size_t>(p[y])) {
      seen[y] = 1;
      ++len;
    }
    ord = std::lcm(ord, len);
  }
  return ord;
}

Perm word_perm(const CosetAction& a, const Word& w) {
  Perm out = identity_perm(a.index);
  for (Letter l : w.letters()) {
    const Perm& g = a.perms[static_cast<std::size_t>(std::abs(l) - 1)];
    out = compose(out, l > 0 ? g : inverse(g));
  }
  return out;
}

// Permutation of an abstract word given the permutations of the abstract generators.
Perm abstract_perm(const std::vector<Perm>& gens, const Word& w, int n) {
  Perm out = identity_perm(n);
  for (Letter l : w.letters()) {
    const Perm& g = gens[static_cast<std::size_t>(std::abs(l) - 1)];
    out = compose(out, l > 0 ? g : inverse(g));
  }
  return out;
}

// The commutator [w^n, u^m] fixes the base point.
bool commutator_fixes_base(const Perm& pw, const Perm& pu, long n, long m) {
  Perm wn = perm_power(pw, n);
  Perm um = perm_power(pu, m);
  int x = 0;
  x = wn[static_cast<std::size_t>(x)];
  x = um[static_cast<std::size_t>(x)];
  x = inverse(wn)[static_cast<std::size_t>(x)];
  x = inverse(um)[static_cast<std::size_t>(x)];
  return x == 0;
}

bool commute(const Word& u, const Word& v) { return u * v == v * u; }

Word substitute(const Word& abstract, const std::vector<Word>& images) {
  int rank = images.front().rank();
  std::vector<Letter> raw;
  for (Letter l : abstract.letters()) {
    const Word& g = images[static_cast<std::size_t>(std::abs(l) - 1)];
    if (l > 0) {
      raw.insert(raw.end(), g.letters().begin(), g.letters().end());
    } else {
      for (auto it = g.letters().rbegin(); it != g.letters().rend(); ++it) raw.push_back(-*it);
    }
  }
  return reduce(rank, raw);
}

std::vector<Word> candidates(const CoreGraph& d) {
  auto b = basis(d);
  std::sort(b.begin(), b.end());
  std::vector<Word> out = b;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      out.push_back(b[i] * b[j]);
      out.push_back(b[i] * invert(b[j]));
    }
  return out;
}

std::optional<long> least_free_power(const std::vector<Word>& roots, long bound) {
  int rank = roots.front().rank();
  for (long k = 1; k <= bound; ++k) {
    std::vector<Word> p;
    for (const auto& r : roots) p.push_back(power(r, k));
    if (subdyn::rank(from_generators(p, rank)) == static_cast<int>(roots.size())) return k;
  }
  return std::nullopt;
}

}  // namespace

std::optional<RecurrenceCertificate> recurrence_certificate(const CoreGraph& delta, const CoreGraph& sigma,
                                                            const Word& gamma) {
  auto idx = index(delta);
  if (!idx) return std::nullopt;
  auto rt = return_times(delta, sigma, gamma, *idx);
  if (!rt.period) return std::nullopt;
  for (long n : rt.hits)
    if (n <= *rt.period) return RecurrenceCertificate{delta, sigma, gamma, *rt.period, n};
  return std::nullopt;
}

CommutatorHit commutator_in_intersection(const CoreGraph& d1, const CoreGraph& d2, const Word& delta1,
                                         const Word& delta2, long bound) {
  if (!contains(d1, delta1) || !contains(d2, delta2))
    throw Error(ErrorCode::PRECONDITION, "delta_i must lie in Delta_i");
  CommutatorHit out;
  if (d1.is_complete() && d2.is_complete()) {
    auto a1 = coset_action(d1), a2 = coset_action(d2);
    Perm p11 = word_perm(a1, delta1), p12 = word_perm(a2, delta1);
    Perm p21 = word_perm(a1, delta2), p22 = word_perm(a2, delta2);
    out.period1 = std::lcm(perm_order(p11), perm_order(p12));
    out.period2 = std::lcm(perm_order(p21), perm_order(p22));
    for (long n1 = 1; n1 <= bound; ++n1)
      for (long n2 = 1; n2 <= bound; ++n2)
        if (commutator_fixes_base(p11, p21, n1, n2) && commutator_fixes_base(p12, p22, n1, n2)) {
          out.n1 = n1;
          out.n2 = n2;
          out.v = commutator(power(delta1, n1), power(delta2, n2));
          return out;
        }
  } else {
    for (long n1 = 1; n1 <= bound; ++n1)
      for (long n2 = 1; n2 <= bound; ++n2) {
        Word v = commutator(power(delta1, n1), power(delta2, n2));
        if (contains(d1, v) && contains(d2, v)) {
          out.n1 = n1;
          out.n2 = n2;
          out.v = v;
          return out;
        }
      }
  }
  throw Error(ErrorCode::BOUND_EXHAUSTED, "no commutator exponents up to " + std::to_string(bound));
}

IndependenceWitness independent_tuple(const std::vector<CoreGraph>& deltas, long power_bound) {
  if (deltas.empty()) throw Error(ErrorCode::PRECONDITION, "need at least one subgroup");
  const int r = deltas.front().rank();
  const bool single = deltas.size() == 1;
  IndependenceWitness out;
  for (const auto& d : deltas) {
    if (d.rank() != r) throw Error(ErrorCode::RANK_MISMATCH, "subgroups of different ranks");
    if (is_trivial(d)) throw Error(ErrorCode::PRECONDITION, "subgroups must be nontrivial");
    if (!single && subdyn::rank(d) < 2) throw Error(ErrorCode::PRECONDITION, "subgroups must be nonabelian");
    auto cands = candidates(d);
    std::optional<Word> pick, fallback;
    for (const auto& c : cands) {
      bool ok = std::none_of(out.roots.begin(), out.roots.end(), [&](const Word& x) { return commute(x, c); });
      if (!ok) continue;
      if (!fallback) fallback = c;
      std::vector<Word> trial = out.roots;
      trial.push_back(c);
      if (subdyn::rank(from_generators(trial, r)) == static_cast<int>(trial.size())) {
        pick = c;
        break;
      }
    }
    if (!pick) pick = fallback;
    if (!pick) throw Error(ErrorCode::BOUND_EXHAUSTED, "no non-commuting candidate");
    out.roots.push_back(*pick);
    out.cyclic.push_back(cyclic_reduce(*pick));
  }
  auto k = least_free_power(out.roots, power_bound);
  if (!k) throw Error(ErrorCode::BOUND_EXHAUSTED, "no uniform power up to " + std::to_string(power_bound));
  out.power = *k;
  for (const auto& x : out.roots) out.elements.push_back(power(x, *k));
  out.generated = from_generators(out.elements, r);
  out.rank_check = subdyn::rank(out.generated);
  return out;
}

std::optional<Word> find_relator(const std::vector<Word>& elements, int max_len) {
  if (elements.empty() || max_len < 1) return std::nullopt;
  const int j = static_cast<int>(elements.size());
  const int half = (max_len + 1) / 2;
  auto key = [](const Word& w) {
    std::string s;
    s.reserve(w.length());
    for (Letter l : w.letters()) s.push_back(static_cast<char>(l + 64));
    return s;
  };
  std::unordered_map<std::string, std::vector<Word>> classes;
  for (const auto& w : ball(j, half)) classes[key(substitute(w, elements))].push_back(w);
  std::optional<Word> best;
  for (const auto& [k, ws] : classes) {
    for (std::size_t a = 0; a < ws.size(); ++a)
      for (std::size_t b = a + 1; b < ws.size(); ++b) {
        Word rel = ws[a] * invert(ws[b]);
        if (static_cast<int>(rel.length()) > max_len) continue;
        if (!best || rel < *best) best = rel;
      }
  }
  return best;
}

IntersectionElement intersection_element(const std::vector<CoreGraph>& deltas, long bound) {
  if (deltas.empty()) throw Error(ErrorCode::PRECONDITION, "need at least one subgroup");
  for (const auto& d : deltas) {
    if (is_trivial(d)) throw Error(ErrorCode::PRECONDITION, "subgroups must be nontrivial");
    if (!d.is_complete()) throw Error(ErrorCode::INFINITE_INDEX, "only finite-index subgroups are certified recurrent");
  }
  const int j = static_cast<int>(deltas.size());
  IntersectionElement out;
  out.basis = independent_tuple(deltas, bound);
  const auto& el = out.basis.elements;

  std::vector<CosetAction> acts;
  std::vector<std::vector<Perm>> gen_perms;  // gen_perms[s][i]: delta_i acting on cosets of Delta_s
  for (const auto& d : deltas) {
    acts.push_back(coset_action(d));
    std::vector<Perm> ps;
    for (const auto& e : el) ps.push_back(word_perm(acts.back(), e));
    gen_perms.push_back(std::move(ps));
  }

  auto rec = [&](auto&& self, const std::vector<int>& idx) -> Word {
    if (idx.size() == 1) return Word::generator(j, idx.front() + 1);
    std::vector<int> left(idx.begin(), idx.end() - 1);
    std::vector<int> right(idx.rbegin(), idx.rend() - 1);
    Word w = self(self, left);
    Word u = self(self, right);
    const int s1 = idx.front(), s2 = idx.back();
    const int n1 = acts[static_cast<std::size_t>(s1)].index, n2 = acts[static_cast<std::size_t>(s2)].index;
    Perm w1 = abstract_perm(gen_perms[static_cast<std::size_t>(s1)], w, n1);
    Perm u1 = abstract_perm(gen_perms[static_cast<std::size_t>(s1)], u, n1);
    Perm w2 = abstract_perm(gen_perms[static_cast<std::size_t>(s2)], w, n2);
    Perm u2 = abstract_perm(gen_perms[static_cast<std::size_t>(s2)], u, n2);
    for (long n = 1; n <= bound; ++n)
      for (long m = 1; m <= bound; ++m)
        if (commutator_fixes_base(w1, u1, n, m) && commutator_fixes_base(w2, u2, n, m)) {
          Word v = commutator(power(w, n), power(u, m));
          out.trace.push_back(InductionStep{idx, w, u, n, m, v});
          return v;
        }
    throw Error(ErrorCode::BOUND_EXHAUSTED, "no commutator exponents up to " + std::to_string(bound));
  };

  std::vector<int> all(static_cast<std::size_t>(j));
  std::iota(all.begin(), all.end(), 0);
  out.abstract = rec(rec, all);
  out.v = substitute(out.abstract, el);
  if (out.v.is_identity()) throw std::logic_error("intersection element collapsed to the identity");
  for (const auto& d : deltas)
    if (!contains(d, out.v)) throw std::logic_error("intersection element escaped a subgroup");
  return out;
}

SubbasisCheck subbasis_check(const CoreGraph& delta, const std::vector<CoreGraph>& h, long transversal_bound) {
  SubbasisCheck out;
  auto idx = index(delta);
  if (!idx || *idx > transversal_bound || h.empty()) return out;
  std::vector<CoreGraph> seen;
  for (const auto& t : tree_words(delta)) {
    Word g = invert(t);
    CoreGraph c = conjugate_subgroup(delta, g);
    if (std::any_of(seen.begin(), seen.end(), [&](const CoreGraph& s) { return equal(s, c); })) continue;
    seen.push_back(c);
    out.conjugators.push_back(g);
    bool covered = std::any_of(h.begin(), h.end(), [&](const CoreGraph& th) { return is_subgroup(th, c); });
    if (!covered) {
      out.uncovered = g;
      return out;
    }
  }
  std::vector<CoreGraph> sigmas{delta};
  for (const auto& th : h)
    if (is_subgroup(th, delta)) sigmas.push_back(th);
  for (const auto& s : sigmas)
    for (int i = 1; i <= delta.rank(); ++i) {
      auto cert = recurrence_certificate(delta, s, Word::generator(delta.rank(), i));
      if (!cert) return out;
      out.certificates.push_back(*cert);
    }
  out.ok = true;
  return out;
}

bool in_recurrent_subbasis(const CoreGraph& delta, const std::vector<CoreGraph>& h, long transversal_bound) {
  return subbasis_check(delta, h, transversal_bound).ok;
}

FilterBaseCheck filter_base_check(const std::vector<CoreGraph>& base) {
  FilterBaseCheck out;
  for (std::size_t a = 0; a < base.size(); ++a)
    for (std::size_t b = a; b < base.size(); ++b) {
      CoreGraph c = intersect(base[a], base[b]);
      bool found = std::any_of(base.begin(), base.end(), [&](const CoreGraph& d) { return is_subgroup(d, c); });
      if (!found) {
        out.ok = false;
        out.failing_pair = std::make_pair(static_cast<int>(a), static_cast<int>(b));
        return out;
      }
    }
  return out;
}

}  // namespace subdyn
