#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "subdyn/rational.hpp"
#include "subdyn/stallings.hpp"

namespace subdyn {

/**
 * @brief Finite measure-preserving action of F_r, acting on the right.
 *
 * perms[i][x] is x . a_{i+1}; a word w = s_1...s_k sends x to x.s_1...s_k.
 */
struct FiniteAction {
  int rank = 0;
  int points = 0;
  std::vector<Rational> weights;
  std::vector<std::vector<int>> perms;

  // Throws PRECONDITION when weights or permutations are invalid.
  void validate() const;
  int act(int x, const Word& w) const;
};

struct Atom {
  CoreGraph subgroup;
  Rational weight;
};

/**
 * @brief Finitely supported random subgroup; atoms are distinct subgroups.
 */
class AtomicIRS {
 public:
  AtomicIRS() = default;
  explicit AtomicIRS(int rank) : rank_(rank) {}

  // Adds weight to the atom equal to g, creating it if needed.
  void add(const CoreGraph& g, const Rational& w);

  int rank() const { return rank_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  Rational total() const;
  // Weight of the atom equal to g, or 0.
  Rational weight_of(const CoreGraph& g) const;
  // Exact check: weights sum to 1 and weight(s D s^{-1}) = weight(D) for every generator s.
  bool is_invariant() const;
  // Same as is_invariant but only under conjugation by the given words.
  bool is_invariant_under(const std::vector<Word>& gens) const;

 private:
  int rank_ = 0;
  std::vector<Atom> atoms_;
};

// Same atoms (up to subgroup equality) with the same weights.
bool same_measure(const AtomicIRS& a, const AtomicIRS& b);

// The stabilizer of x, as the core graph of its orbit.
CoreGraph stabilizer(const FiniteAction& a, int x);
AtomicIRS stabilizer_irs(const FiniteAction& a);
AtomicIRS dirac_normal(const CoreGraph& n);
// Uniform law on the conjugacy class; conj_bound caps the orbit search.
AtomicIRS almost_normal_irs(const CoreGraph& h, int conj_bound = 256);
AtomicIRS restrict(const AtomicIRS& mu, const CoreGraph& sigma);
AtomicIRS induce(const AtomicIRS& mu, const CoreGraph& sigma);
AtomicIRS intersect_irs(const AtomicIRS& mu1, const AtomicIRS& mu2);
Rational env_measure(const AtomicIRS& mu, const CoreGraph& sigma);

struct EssentialCheck {
  bool ok = true;
  std::optional<CoreGraph> witness;  // a non-essential subgroup of Delta
  std::vector<Word> witness_generators;
  long tested = 0;
};
EssentialCheck check_locally_essential(const AtomicIRS& mu, const CoreGraph& delta, int radius, int k);

struct ReturnTimes {
  std::vector<long> hits;
  std::optional<long> period;
  // Set when the period is known: infinitely many hits iff one lies in [1, period].
  std::optional<bool> infinite;
};
// Hits are the n in [1, cutoff] with gamma^{-n} Sigma gamma^{n} <= Delta.
ReturnTimes return_times(const CoreGraph& delta, const CoreGraph& sigma, const Word& gamma, long cutoff);

struct CoverCheck {
  bool ok = true;
  std::optional<CoreGraph> uncovered;
};
CoverCheck check_cover(const AtomicIRS& mu, const std::vector<CoreGraph>& f);

struct RefinementCheck {
  bool ok = true;
  std::optional<CoreGraph> sigma;
  std::optional<CoreGraph> delta;
};
RefinementCheck check_refinement(const std::vector<CoreGraph>& f, const std::vector<CoreGraph>& h, const AtomicIRS& mu);

using AtomPredicate = std::function<bool(const CoreGraph&)>;
struct Conditioned {
  Rational weight;
  AtomicIRS measure;
};
Conditioned condition(const AtomicIRS& mu, const AtomPredicate& s);

// Identity test on the image of a word under a homomorphism.
using IdentityTest = std::function<bool(const Word&)>;
bool nontrivial_under(const AtomicIRS& mu, const IdentityTest& is_identity);
// Identity test for the homomorphism sending generator i to perms[i-1] (right action).
IdentityTest permutation_identity(const std::vector<std::vector<int>>& perms);

}  // namespace subdyn
