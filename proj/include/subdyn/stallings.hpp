#pragma once

#include <optional>
#include <vector>

#include "subdyn/words.hpp"

namespace subdyn {

/**
 * @brief Folded, base-pointed core graph of a finitely generated subgroup of F_r.
 *
 * Vertex 0 is the base. adj(v, slot) is the endpoint of the edge leaving v
 * with letter slot_letter(slot), or -1. Vertices are numbered in breadth-first
 * order from the base, so equal subgroups give identical tables.
 */
class CoreGraph {
 public:
  CoreGraph() = default;
  // The trivial subgroup.
  explicit CoreGraph(int rank);

  static CoreGraph from_generators(int rank, const std::vector<Word>& gens);
  // Builds from an arbitrary labeled graph: edges (u, letter, v) with u -letter-> v.
  // Folds, prunes to the core of the base component and renumbers.
  struct RawEdge {
    int from;
    Letter letter;
    int to;
  };
  static CoreGraph from_raw(int rank, int vertices, int base, const std::vector<RawEdge>& edges);

  int rank() const { return rank_; }
  int vertex_count() const { return static_cast<int>(adj_.size()) / (2 * rank_); }
  int edge_count() const;  // positively labeled edges
  int adj(int v, int slot) const { return adj_[static_cast<std::size_t>(v * 2 * rank_ + slot)]; }
  int follow(int v, Letter l) const { return adj(v, letter_slot(l)); }
  // Endpoint of reading w from v, or -1 when the path leaves the graph.
  int read(int v, const Word& w) const;
  bool is_complete() const;

  friend bool operator==(const CoreGraph&, const CoreGraph&) = default;

 private:
  int rank_ = 0;
  std::vector<int> adj_;
};

struct CosetAction {
  int index = 0;
  // perms[i][x] is the image of point x under generator i+1 (0-based points).
  std::vector<std::vector<int>> perms;
  // reps[x] labels a path from the base to x; reps[0] is the identity.
  std::vector<Word> reps;
};

CoreGraph from_generators(const std::vector<Word>& gens, int rank);
bool contains(const CoreGraph& g, const Word& w);
CoreGraph intersect(const CoreGraph& g1, const CoreGraph& g2);
// g H g^{-1}
CoreGraph conjugate_subgroup(const CoreGraph& h, const Word& g);
// nullopt means infinite index.
std::optional<long> index(const CoreGraph& g);
int rank(const CoreGraph& g);
std::vector<Word> basis(const CoreGraph& g);
// Words labelling a breadth-first spanning tree from the base.
std::vector<Word> tree_words(const CoreGraph& g);
CosetAction coset_action(const CoreGraph& g);
bool equal(const CoreGraph& g1, const CoreGraph& g2);
// Every basis word of sub lies in sup.
bool is_subgroup(const CoreGraph& sub, const CoreGraph& sup);
bool is_trivial(const CoreGraph& g);
// Conjugates by every generator are equal to g.
bool is_normal(const CoreGraph& g);
CoreGraph whole_group(int rank);

}  // namespace subdyn
