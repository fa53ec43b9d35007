// Test-side reference computations, deliberately independent of the library
// algorithms they check.
#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "subdyn/words.hpp"

namespace oracle {

using subdyn::Word;

// Faithful image of F_2 in SL_2(Z): a -> [[1,2],[0,1]], b -> [[1,0],[2,1]].
using M2 = std::array<mpz_class, 4>;

inline M2 mul(const M2& x, const M2& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
          x[2] * y[1] + x[3] * y[3]};
}

inline M2 sanov(const std::vector<int>& raw) {
  M2 m{1, 0, 0, 1};
  for (int l : raw) {
    M2 g;
    switch (l) {
      case 1: g = {1, 2, 0, 1}; break;
      case -1: g = {1, -2, 0, 1}; break;
      case 2: g = {1, 0, 2, 1}; break;
      default: g = {1, 0, -2, 1}; break;
    }
    m = mul(m, g);
  }
  return m;
}

inline M2 sanov(const Word& w) { return sanov(w.letters()); }

inline bool is_identity(const M2& m) { return m[0] == 1 && m[1] == 0 && m[2] == 0 && m[3] == 1; }

// Naive stack-free reduction: repeatedly delete the first cancelling pair.
inline std::vector<int> naive_reduce(std::vector<int> w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] == -w[i + 1]) {
        w.erase(w.begin() + static_cast<long>(i), w.begin() + static_cast<long>(i) + 2);
        changed = true;
        break;
      }
    }
  }
  return w;
}

// All elements of <gens> obtained as products of at most k generators or
// inverses, reduced; lengths capped at max_len.
inline std::set<std::vector<int>> products(const std::vector<Word>& gens, int k, std::size_t max_len) {
  std::vector<std::vector<int>> letters;
  for (const auto& g : gens) {
    if (g.is_identity()) continue;
    letters.push_back(g.letters());
    std::vector<int> inv(g.letters().rbegin(), g.letters().rend());
    for (auto& l : inv) l = -l;
    letters.push_back(inv);
  }
  std::set<std::vector<int>> out{{}};
  std::set<std::vector<int>> frontier{{}};
  for (int step = 0; step < k; ++step) {
    std::set<std::vector<int>> next;
    for (const auto& w : frontier) {
      for (const auto& l : letters) {
        auto x = w;
        x.insert(x.end(), l.begin(), l.end());
        x = naive_reduce(x);
        if (x.size() > max_len * 3) continue;
        if (out.insert(x).second) next.insert(x);
      }
    }
    frontier = std::move(next);
  }
  std::set<std::vector<int>> capped;
  for (const auto& w : out)
    if (w.size() <= max_len) capped.insert(w);
  return capped;
}

inline Word random_word(std::mt19937_64& rng, int rank, int max_len, int min_len = 0) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> gen(1, rank);
  std::uniform_int_distribution<int> sgn(0, 1);
  int n = len(rng);
  std::vector<int> raw;
  while (static_cast<int>(raw.size()) < n) {
    int l = gen(rng) * (sgn(rng) ? 1 : -1);
    if (!raw.empty() && raw.back() == -l) continue;
    raw.push_back(l);
  }
  return Word(rank, raw);
}

// Exponent sum of generator i.
inline long exponent_sum(const Word& w, int i) {
  long s = 0;
  for (int l : w.letters()) s += (l == i) - (l == -i);
  return s;
}

// Right action of w on points under the permutations (0-based).
inline int act(const std::vector<std::vector<int>>& perms, int x, const Word& w) {
  for (int l : w.letters()) {
    const auto& p = perms[static_cast<std::size_t>((l > 0 ? l : -l) - 1)];
    if (l > 0) {
      x = p[static_cast<std::size_t>(x)];
    } else {
      for (std::size_t y = 0; y < p.size(); ++y)
        if (p[y] == x) {
          x = static_cast<int>(y);
          break;
        }
    }
  }
  return x;
}

inline std::vector<int> random_perm(std::mt19937_64& rng, int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace oracle

namespace oracle {

inline bool transitive(const std::vector<std::vector<int>>& perms, int n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> st{0};
  seen[0] = 1;
  int count = 1;
  while (!st.empty()) {
    int x = st.back();
    st.pop_back();
    for (const auto& p : perms) {
      for (std::size_t y = 0; y < p.size(); ++y) {
        int a = -1;
        if (static_cast<int>(y) == x) a = p[y];
        if (p[y] == x) a = static_cast<int>(y);
        if (a >= 0 && !seen[static_cast<std::size_t>(a)]) {
          seen[static_cast<std::size_t>(a)] = 1;
          ++count;
          st.push_back(a);
        }
      }
    }
  }
  return count == n;
}

inline std::vector<std::vector<int>> random_transitive(std::mt19937_64& rng, int rank, int n) {
  for (;;) {
    std::vector<std::vector<int>> perms;
    for (int i = 0; i < rank; ++i) perms.push_back(random_perm(rng, n));
    if (transitive(perms, n)) return perms;
  }
}

// Schreier generators of the stabilizer of point 0 under the right action.
inline std::vector<Word> schreier_generators(const std::vector<std::vector<int>>& perms, int rank) {
  int n = static_cast<int>(perms[0].size());
  std::vector<Word> rep(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  rep[0] = Word(rank);
  seen[0] = 1;
  std::vector<int> queue{0};
  for (std::size_t k = 0; k < queue.size(); ++k) {
    int x = queue[k];
    for (int i = 1; i <= rank; ++i) {
      for (int s : {1, -1}) {
        Word g = Word::generator(rank, i, s);
        int y = act(perms, x, g);
        if (!seen[static_cast<std::size_t>(y)]) {
          seen[static_cast<std::size_t>(y)] = 1;
          rep[static_cast<std::size_t>(y)] = rep[static_cast<std::size_t>(x)] * g;
          queue.push_back(y);
        }
      }
    }
  }
  std::vector<Word> gens;
  for (int x = 0; x < n; ++x) {
    for (int i = 1; i <= rank; ++i) {
      Word g = Word::generator(rank, i);
      int y = act(perms, x, g);
      Word s = rep[static_cast<std::size_t>(x)] * g * invert(rep[static_cast<std::size_t>(y)]);
      if (!s.is_identity()) gens.push_back(s);
    }
  }
  return gens;
}

// Membership by naive folding: a bouquet of generator loops is folded by merging
// vertex labels until no vertex has two equally labelled edges, then read as a table.
class FoldedGraph {
 public:
  FoldedGraph(int rank, const std::vector<Word>& gens) : rank_(rank) {
    int nv = 1;
    std::vector<std::array<int, 3>> edges;  // (from, letter > 0, to)
    for (const auto& g : gens) {
      const auto& ls = g.letters();
      if (ls.empty()) continue;
      int cur = 0;
      for (std::size_t i = 0; i < ls.size(); ++i) {
        int next = i + 1 == ls.size() ? 0 : nv++;
        if (ls[i] > 0) edges.push_back({cur, ls[i], next});
        else edges.push_back({next, -ls[i], cur});
        cur = next;
      }
    }
    for (bool merged = true; merged;) {
      merged = false;
      for (std::size_t i = 0; i < edges.size() && !merged; ++i)
        for (std::size_t j = i + 1; j < edges.size() && !merged; ++j) {
          const auto& e = edges[i];
          const auto& f = edges[j];
          if (e[1] != f[1]) continue;
          int x = -1, y = -1;
          if (e[0] == f[0] && e[2] != f[2]) x = e[2], y = f[2];
          else if (e[2] == f[2] && e[0] != f[0]) x = e[0], y = f[0];
          if (x < 0) continue;
          // Keep the smaller label so the base stays 0.
          int keep = std::min(x, y), drop = std::max(x, y);
          for (auto& g : edges)
            for (int k : {0, 2})
              if (g[static_cast<std::size_t>(k)] == drop) g[static_cast<std::size_t>(k)] = keep;
          std::sort(edges.begin(), edges.end());
          edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
          merged = true;
        }
    }
    table_.assign(static_cast<std::size_t>(nv * 2 * rank), -1);
    for (const auto& e : edges) {
      table_[slot(e[0], e[1])] = e[2];
      table_[slot(e[2], -e[1])] = e[0];
    }
  }
  bool contains(const Word& w) const {
    int v = 0;
    for (int l : w.letters()) {
      v = table_[slot(v, l)];
      if (v < 0) return false;
    }
    return v == 0;
  }

 private:
  std::size_t slot(int v, int l) const {
    return static_cast<std::size_t>(v * 2 * rank_ + (l > 0 ? l - 1 : rank_ - l - 1));
  }
  int rank_;
  std::vector<int> table_;
};

// Looks for two distinct reduced words of length <= half in the elements with the same
// reduced value; one exists iff some nonempty reduced word of length <= 2 half is a relator.
// Returns such a relator, or an empty vector.
inline std::vector<int> short_relator(const std::vector<Word>& elements, int half) {
  const int j = static_cast<int>(elements.size());
  std::vector<std::vector<int>> fwd, inv;
  for (const auto& e : elements) {
    fwd.push_back(e.letters());
    std::vector<int> r(e.letters().rbegin(), e.letters().rend());
    for (auto& l : r) l = -l;
    inv.push_back(r);
  }
  auto value = [&](const std::vector<int>& abs) {
    std::vector<int> raw;
    for (int l : abs) {
      const auto& src = l > 0 ? fwd[static_cast<std::size_t>(l - 1)] : inv[static_cast<std::size_t>(-l - 1)];
      raw.insert(raw.end(), src.begin(), src.end());
    }
    return naive_reduce(raw);
  };
  constexpr std::uint64_t kBase = 0x9e3779b97f4a7c15ULL;
  std::vector<int> amb;
  std::vector<std::uint64_t> hash{0};
  std::vector<int> abs;
  std::unordered_multimap<std::uint64_t, std::vector<int>> seen;
  std::vector<int> found;
  // Log entries are (appended, letter) so a push can be undone exactly.
  auto apply = [&](const std::vector<int>& src, std::vector<std::pair<bool, int>>& log) {
    for (int l : src) {
      if (!amb.empty() && amb.back() == -l) {
        log.emplace_back(false, amb.back());
        amb.pop_back();
        hash.pop_back();
      } else {
        log.emplace_back(true, l);
        amb.push_back(l);
        hash.push_back(hash.back() * kBase + static_cast<std::uint64_t>(l + 64));
      }
    }
  };
  auto undo = [&](const std::vector<std::pair<bool, int>>& log) {
    for (auto it = log.rbegin(); it != log.rend(); ++it) {
      if (it->first) {
        amb.pop_back();
        hash.pop_back();
      } else {
        amb.push_back(it->second);
        hash.push_back(hash.back() * kBase + static_cast<std::uint64_t>(it->second + 64));
      }
    }
  };
  auto record = [&]() {
    std::uint64_t h = hash.back() ^ (static_cast<std::uint64_t>(amb.size()) << 56);
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (value(it->second) == amb) {
        std::vector<int> rel = abs;
        for (auto r = it->second.rbegin(); r != it->second.rend(); ++r) rel.push_back(-*r);
        return naive_reduce(rel);
      }
    seen.emplace(h, abs);
    return std::vector<int>{};
  };
  auto dfs = [&](auto&& self, int depth) -> void {
    if (!found.empty()) return;
    found = record();
    if (!found.empty() || depth == half) return;
    for (int l = -j; l <= j && found.empty(); ++l) {
      if (l == 0 || (!abs.empty() && abs.back() == -l)) continue;
      std::vector<std::pair<bool, int>> log;
      apply(l > 0 ? fwd[static_cast<std::size_t>(l - 1)] : inv[static_cast<std::size_t>(-l - 1)], log);
      abs.push_back(l);
      self(self, depth + 1);
      abs.pop_back();
      undo(log);
    }
  };
  dfs(dfs, 0);
  return found;
}

}  // namespace oracle
