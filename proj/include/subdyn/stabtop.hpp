#pragma once

#include <optional>
#include <vector>

#include "subdyn/stallings.hpp"
#include "subdyn/words.hpp"

namespace subdyn {

// Sigma <= gamma^{n0} Delta gamma^{-n0}, and the gamma-conjugation orbit of Delta has period P.
struct RecurrenceCertificate {
  CoreGraph delta;
  CoreGraph sigma;
  Word gamma;
  long period = 0;
  long hit = 0;
};
// Certificates exist for finite-index Delta containing Sigma; nullopt otherwise.
std::optional<RecurrenceCertificate> recurrence_certificate(const CoreGraph& delta, const CoreGraph& sigma,
                                                            const Word& gamma);

struct CommutatorHit {
  long n1 = 0, n2 = 0;
  Word v;
  // Hits repeat with these shifts in n1 and n2.
  long period1 = 0, period2 = 0;
};
/**
 * @brief Lexicographically least (n1, n2) in [1, bound]^2 with
 * [delta1^n1, delta2^n2] in Delta1 and Delta2.
 *
 * Both subgroups must have finite index. Found whenever bound >= max(period1, period2).
 */
CommutatorHit commutator_in_intersection(const CoreGraph& d1, const CoreGraph& d2, const Word& delta1,
                                         const Word& delta2, long bound);

struct IndependenceWitness {
  std::vector<Word> elements;
  CoreGraph generated;
  int rank_check = 0;
  long power = 1;                            // uniform power applied to the chosen roots
  std::vector<Word> roots;                   // chosen elements before the power
  std::vector<std::pair<Word, Word>> cyclic;  // (eta, theta) with root = eta theta eta^{-1}
};
IndependenceWitness independent_tuple(const std::vector<CoreGraph>& deltas, long power_bound);

// Shortest nonempty reduced word in J abstract letters of length <= max_len that evaluates
// to the identity on the elements, if any.
std::optional<Word> find_relator(const std::vector<Word>& elements, int max_len);

struct InductionStep {
  std::vector<int> indices;  // 0-based subgroup indices, in the order used
  Word w, u;                 // words in the abstract basis delta_1..delta_J
  long n = 0, m = 0;
  Word v;
};
struct IntersectionElement {
  Word v;         // in F_r
  Word abstract;  // v as a word in the independent elements
  IndependenceWitness basis;
  std::vector<InductionStep> trace;
};
IntersectionElement intersection_element(const std::vector<CoreGraph>& deltas, long bound);

struct SubbasisCheck {
  bool ok = false;
  std::vector<Word> conjugators;       // gamma with gamma Delta gamma^{-1} enumerating the conjugates
  std::optional<Word> uncovered;       // a conjugator whose conjugate contains no member of H
  std::vector<RecurrenceCertificate> certificates;
};
SubbasisCheck subbasis_check(const CoreGraph& delta, const std::vector<CoreGraph>& h, long transversal_bound);
bool in_recurrent_subbasis(const CoreGraph& delta, const std::vector<CoreGraph>& h, long transversal_bound);

struct FilterBaseCheck {
  bool ok = true;
  std::optional<std::pair<int, int>> failing_pair;
};
// For every pair some member of the base lies in their intersection.
FilterBaseCheck filter_base_check(const std::vector<CoreGraph>& base);

}  // namespace subdyn
