#include "subdyn/stallings.hpp"

#include <deque>
#include <numeric>

#include "subdyn/error.hpp"

namespace subdyn {

namespace {

// Union-find graph used while folding. Edge targets may be stale (non-root)
// and are resolved through find().
struct Folder {
  int slots;
  std::vector<int> parent;
  std::vector<std::vector<int>> adj;
  std::deque<std::pair<int, int>> pending;

  explicit Folder(int rank, int n) : slots(2 * rank), parent(static_cast<std::size_t>(n)), adj(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(2 * rank), -1)) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }

  int add_vertex() {
    parent.push_back(static_cast<int>(parent.size()));
    adj.emplace_back(static_cast<std::size_t>(slots), -1);
    return parent.back();
  }

  void set_half(int u, int slot, int v) {
    u = find(u);
    int& cur = adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(slot)];
    if (cur == -1)
      cur = v;
    else if (find(cur) != find(v))
      pending.emplace_back(cur, v);
  }

  void add_edge(int u, Letter l, int v) {
    set_half(u, letter_slot(l), v);
    set_half(v, letter_slot(-l), u);
    fold();
  }

  void fold() {
    while (!pending.empty()) {
      auto [x, y] = pending.front();
      pending.pop_front();
      x = find(x);
      y = find(y);
      if (x == y) continue;
      parent[static_cast<std::size_t>(y)] = x;
      for (int s = 0; s < slots; ++s) {
        int t = adj[static_cast<std::size_t>(y)][static_cast<std::size_t>(s)];
        if (t == -1) continue;
        set_half(x, s, t);
      }
    }
  }
};

}  // namespace

CoreGraph::CoreGraph(int rank) : rank_(rank), adj_(static_cast<std::size_t>(2 * rank), -1) {
  if (rank < 1) throw Error(ErrorCode::PRECONDITION, "rank must be positive");
}

CoreGraph CoreGraph::from_raw(int rank, int vertices, int base, const std::vector<RawEdge>& edges) {
  Folder f(rank, vertices);
  for (const auto& e : edges) {
    if (e.letter == 0 || e.letter > rank || -e.letter > rank)
      throw Error(ErrorCode::GENERATOR_OUT_OF_RANGE, "edge label out of range");
    f.add_edge(e.from, e.letter, e.to);
  }
  const int slots = 2 * rank;
  // Resolve to roots.
  std::vector<std::vector<int>> a(static_cast<std::size_t>(vertices), std::vector<int>(static_cast<std::size_t>(slots), -1));
  std::vector<char> alive(static_cast<std::size_t>(vertices), 0);
  for (int v = 0; v < vertices; ++v) {
    if (f.find(v) != v) continue;
    alive[static_cast<std::size_t>(v)] = 1;
    for (int s = 0; s < slots; ++s) {
      int t = f.adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
      a[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] = t == -1 ? -1 : f.find(t);
    }
  }
  int root = f.find(base);
  // Restrict to the base component.
  std::vector<char> seen(static_cast<std::size_t>(vertices), 0);
  std::deque<int> q{root};
  seen[static_cast<std::size_t>(root)] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int s = 0; s < slots; ++s) {
      int t = a[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
      if (t != -1 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        q.push_back(t);
      }
    }
  }
  for (int v = 0; v < vertices; ++v) alive[static_cast<std::size_t>(v)] = alive[static_cast<std::size_t>(v)] && seen[static_cast<std::size_t>(v)];
  // Prune hanging trees, keeping the base.
  auto degree = [&](int v) {
    int d = 0;
    for (int s = 0; s < slots; ++s) d += a[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] != -1;
    return d;
  };
  std::deque<int> leaves;
  for (int v = 0; v < vertices; ++v)
    if (alive[static_cast<std::size_t>(v)] && v != root && degree(v) <= 1) leaves.push_back(v);
  while (!leaves.empty()) {
    int v = leaves.front();
    leaves.pop_front();
    if (!alive[static_cast<std::size_t>(v)]) continue;
    alive[static_cast<std::size_t>(v)] = 0;
    for (int s = 0; s < slots; ++s) {
      int t = a[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
      if (t == -1) continue;
      a[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] = -1;
      int back = s ^ 1;
      a[static_cast<std::size_t>(t)][static_cast<std::size_t>(back)] = -1;
      if (t != root && alive[static_cast<std::size_t>(t)] && degree(t) <= 1) leaves.push_back(t);
    }
  }
  // Breadth-first renumbering in slot order.
  std::vector<int> label(static_cast<std::size_t>(vertices), -1);
  std::vector<int> order{root};
  label[static_cast<std::size_t>(root)] = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    int v = order[k];
    for (int s = 0; s < slots; ++s) {
      int t = a[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)];
      if (t != -1 && label[static_cast<std::size_t>(t)] == -1) {
        label[static_cast<std::size_t>(t)] = static_cast<int>(order.size());
        order.push_back(t);
      }
    }
  }
  CoreGraph g(rank);
  g.adj_.assign(order.size() * static_cast<std::size_t>(slots), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (int s = 0; s < slots; ++s) {
      int t = a[static_cast<std::size_t>(order[k])][static_cast<std::size_t>(s)];
      g.adj_[k * static_cast<std::size_t>(slots) + static_cast<std::size_t>(s)] = t == -1 ? -1 : label[static_cast<std::size_t>(t)];
    }
  }
  return g;
}

CoreGraph CoreGraph::from_generators(int rank, const std::vector<Word>& gens) {
  std::vector<RawEdge> edges;
  int n = 1;
  for (const auto& w : gens) {
    if (w.rank() != rank) throw Error(ErrorCode::RANK_MISMATCH, "generator rank differs");
    const auto& ls = w.letters();
    if (ls.empty()) continue;
    int prev = 0;
    for (std::size_t k = 0; k < ls.size(); ++k) {
      int next = (k + 1 == ls.size()) ? 0 : n++;
      edges.push_back({prev, ls[k], next});
      prev = next;
    }
  }
  return from_raw(rank, n, 0, edges);
}

int CoreGraph::edge_count() const {
  int e = 0;
  for (int v = 0; v < vertex_count(); ++v)
    for (int i = 0; i < rank_; ++i) e += adj(v, 2 * i) != -1;
  return e;
}

int CoreGraph::read(int v, const Word& w) const {
  for (Letter l : w.letters()) {
    v = follow(v, l);
    if (v == -1) return -1;
  }
  return v;
}

bool CoreGraph::is_complete() const {
  for (int x : adj_)
    if (x == -1) return false;
  return true;
}

CoreGraph from_generators(const std::vector<Word>& gens, int rank) {
  return CoreGraph::from_generators(rank, gens);
}

CoreGraph whole_group(int rank) {
  std::vector<Word> gens;
  for (int i = 1; i <= rank; ++i) gens.push_back(Word::generator(rank, i));
  return CoreGraph::from_generators(rank, gens);
}

bool contains(const CoreGraph& g, const Word& w) {
  if (g.rank() != w.rank()) throw Error(ErrorCode::RANK_MISMATCH, "contains: rank mismatch");
  return g.read(0, w) == 0;
}

CoreGraph intersect(const CoreGraph& g1, const CoreGraph& g2) {
  if (g1.rank() != g2.rank()) throw Error(ErrorCode::RANK_MISMATCH, "intersect: rank mismatch");
  const int r = g1.rank();
  const int n2 = g2.vertex_count();
  std::vector<int> id(static_cast<std::size_t>(g1.vertex_count() * n2), -1);
  std::vector<std::pair<int, int>> verts{{0, 0}};
  id[0] = 0;
  std::vector<CoreGraph::RawEdge> edges;
  for (std::size_t k = 0; k < verts.size(); ++k) {
    auto [u1, u2] = verts[k];
    for (int i = 0; i < r; ++i) {
      int t1 = g1.adj(u1, 2 * i), t2 = g2.adj(u2, 2 * i);
      if (t1 == -1 || t2 == -1) continue;
      int& slot = id[static_cast<std::size_t>(t1 * n2 + t2)];
      if (slot == -1) {
        slot = static_cast<int>(verts.size());
        verts.emplace_back(t1, t2);
      }
      edges.push_back({static_cast<int>(k), i + 1, slot});
    }
    // Incoming edges are discovered from their other endpoint; reaching the
    // whole component also needs inverse letters.
    for (int i = 0; i < r; ++i) {
      int t1 = g1.adj(u1, 2 * i + 1), t2 = g2.adj(u2, 2 * i + 1);
      if (t1 == -1 || t2 == -1) continue;
      int& slot = id[static_cast<std::size_t>(t1 * n2 + t2)];
      if (slot == -1) {
        slot = static_cast<int>(verts.size());
        verts.emplace_back(t1, t2);
      }
    }
  }
  return CoreGraph::from_raw(r, static_cast<int>(verts.size()), 0, edges);
}

CoreGraph conjugate_subgroup(const CoreGraph& h, const Word& g) {
  if (h.rank() != g.rank()) throw Error(ErrorCode::RANK_MISMATCH, "conjugate: rank mismatch");
  const int r = h.rank();
  const int n = h.vertex_count();
  std::vector<CoreGraph::RawEdge> edges;
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < r; ++i)
      if (int t = h.adj(v, 2 * i); t != -1) edges.push_back({v, i + 1, t});
  // New base reads g to the old base.
  const auto& ls = g.letters();
  int total = n;
  if (ls.empty()) return CoreGraph::from_raw(r, n, 0, edges);
  int base = total++;
  int prev = base;
  for (std::size_t k = 0; k < ls.size(); ++k) {
    int next = (k + 1 == ls.size()) ? 0 : total++;
    edges.push_back({prev, ls[k], next});
    prev = next;
  }
  return CoreGraph::from_raw(r, total, base, edges);
}

std::optional<long> index(const CoreGraph& g) {
  if (!g.is_complete()) return std::nullopt;
  return g.vertex_count();
}

int rank(const CoreGraph& g) { return g.edge_count() - g.vertex_count() + 1; }

std::vector<Word> tree_words(const CoreGraph& g) {
  const int n = g.vertex_count();
  std::vector<Word> w(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> order{0};
  w[0] = Word(g.rank());
  seen[0] = 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    int v = order[k];
    for (int s = 0; s < 2 * g.rank(); ++s) {
      int t = g.adj(v, s);
      if (t != -1 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        w[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(v)] * Word(g.rank(), {slot_letter(s)});
        order.push_back(t);
      }
    }
  }
  return w;
}

std::vector<Word> basis(const CoreGraph& g) {
  const int n = g.vertex_count();
  const int r = g.rank();
  auto tw = tree_words(g);
  // Tree edges: the edge that first discovered each vertex.
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<char>> tree(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(2 * r), 0));
  std::vector<int> order{0};
  seen[0] = 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    int v = order[k];
    for (int s = 0; s < 2 * r; ++s) {
      int t = g.adj(v, s);
      if (t != -1 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        tree[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] = 1;
        tree[static_cast<std::size_t>(t)][static_cast<std::size_t>(s ^ 1)] = 1;
        order.push_back(t);
      }
    }
  }
  std::vector<Word> out;
  for (int v = 0; v < n; ++v) {
    for (int i = 0; i < r; ++i) {
      int t = g.adj(v, 2 * i);
      if (t == -1 || tree[static_cast<std::size_t>(v)][static_cast<std::size_t>(2 * i)]) continue;
      out.push_back(tw[static_cast<std::size_t>(v)] * Word::generator(r, i + 1) * invert(tw[static_cast<std::size_t>(t)]));
    }
  }
  return out;
}

CosetAction coset_action(const CoreGraph& g) {
  if (!g.is_complete()) throw Error(ErrorCode::INFINITE_INDEX, "coset action needs finite index");
  CosetAction a;
  a.index = g.vertex_count();
  a.reps = tree_words(g);
  a.perms.assign(static_cast<std::size_t>(g.rank()), std::vector<int>(static_cast<std::size_t>(a.index)));
  for (int i = 0; i < g.rank(); ++i)
    for (int v = 0; v < a.index; ++v) a.perms[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)] = g.adj(v, 2 * i);
  return a;
}

bool is_subgroup(const CoreGraph& sub, const CoreGraph& sup) {
  if (sub.rank() != sup.rank()) throw Error(ErrorCode::RANK_MISMATCH, "rank mismatch");
  for (const auto& w : basis(sub))
    if (!contains(sup, w)) return false;
  return true;
}

bool equal(const CoreGraph& g1, const CoreGraph& g2) {
  return is_subgroup(g1, g2) && is_subgroup(g2, g1);
}

bool is_trivial(const CoreGraph& g) { return g.edge_count() == 0; }

bool is_normal(const CoreGraph& g) {
  for (int i = 1; i <= g.rank(); ++i)
    if (!equal(conjugate_subgroup(g, Word::generator(g.rank(), i)), g)) return false;
  return true;
}

}  // namespace subdyn
