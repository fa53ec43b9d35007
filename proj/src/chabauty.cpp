#include "subdyn/chabauty.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

#include "subdyn/error.hpp"

namespace subdyn {

Rational ChabautyDistance::value() const {
  if (agree()) return Rational(0);
  Rational q(1);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(differ_at));
  q /= den;
  return q;
}

BallSignature ball_signature(const CoreGraph& g, int radius) {
  if (radius < 0) throw Error(ErrorCode::PRECONDITION, "radius must be nonnegative");
  BallSignature sig;
  sig.radius = radius;
  // Depth-first over reduced words, following the graph and pruning when the
  // path leaves it.
  struct Frame {
    std::vector<Letter> w;
    int v;
  };
  std::vector<Frame> stack{{{}, 0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.v == 0) sig.words.emplace_back(g.rank(), f.w);
    if (static_cast<int>(f.w.size()) == radius) continue;
    for (int s = 0; s < 2 * g.rank(); ++s) {
      Letter l = slot_letter(s);
      if (!f.w.empty() && f.w.back() == -l) continue;
      int t = g.adj(f.v, s);
      if (t == -1) continue;
      Frame nf{f.w, t};
      nf.w.push_back(l);
      stack.push_back(std::move(nf));
    }
  }
  std::sort(sig.words.begin(), sig.words.end());
  return sig;
}

bool in_basic_open(const CoreGraph& d, const CoreGraph& c, const std::vector<Word>& m) {
  if (d.rank() != c.rank()) throw Error(ErrorCode::RANK_MISMATCH, "in_basic_open: rank mismatch");
  for (const auto& w : m)
    if (contains(d, w) != contains(c, w)) return false;
  return true;
}

bool env_contains(const CoreGraph& d, const CoreGraph& sigma) { return is_subgroup(sigma, d); }

ChabautyDistance chabauty_dist(const CoreGraph& g1, const CoreGraph& g2, int rmax) {
  if (rmax < 1) throw Error(ErrorCode::PRECONDITION, "rmax must be at least 1");
  if (g1.rank() != g2.rank()) throw Error(ErrorCode::RANK_MISMATCH, "chabauty_dist: rank mismatch");
  // Breadth-first search over (state1, state2, last letter slot) where -1 is
  // the state of having left a graph. The first word that ends at exactly one
  // base point has minimal length.
  const int r = g1.rank();
  const int n1 = g1.vertex_count() + 1, n2 = g2.vertex_count() + 1;
  const int slots = 2 * r + 1;  // last slot, or 2r for the empty word
  auto key = [&](int a, int b, int s) { return ((a + 1) * n2 + (b + 1)) * slots + s; };
  std::vector<char> seen(static_cast<std::size_t>(n1 * n2 * slots), 0);
  std::deque<std::tuple<int, int, int, int>> q;
  q.emplace_back(0, 0, 2 * r, 0);
  seen[static_cast<std::size_t>(key(0, 0, 2 * r))] = 1;
  ChabautyDistance out;
  out.rmax = rmax;
  while (!q.empty()) {
    auto [a, b, last, len] = q.front();
    q.pop_front();
    if (len > 0 && ((a == 0) != (b == 0))) {
      out.differ_at = len;
      return out;
    }
    if (len == rmax) continue;
    for (int s = 0; s < 2 * r; ++s) {
      if (last != 2 * r && s == (last ^ 1)) continue;
      int ta = a == -1 ? -1 : g1.adj(a, s);
      int tb = b == -1 ? -1 : g2.adj(b, s);
      if (ta == -1 && tb == -1) continue;
      auto k = static_cast<std::size_t>(key(ta, tb, s));
      if (seen[k]) continue;
      seen[k] = 1;
      q.emplace_back(ta, tb, s, len + 1);
    }
  }
  return out;
}

bool in_u(const CoreGraph& d, const CoreGraph& c, const std::vector<Word>& m) {
  std::vector<Word> inside;
  for (const auto& w : m) {
    if (contains(c, w))
      inside.push_back(w);
    else if (contains(d, w))
      return false;
  }
  return env_contains(d, CoreGraph::from_generators(c.rank(), inside));
}

}  // namespace subdyn
