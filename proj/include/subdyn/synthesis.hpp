#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subdyn/pingpong.hpp"
#include "subdyn/projective.hpp"
#include "subdyn/words.hpp"

namespace subdyn {

struct ContractingResult {
  int m = 0;
  ProjMap y;  // g^m x g^-m
  double lip = 0;
  double degeneracy_margin = 0;  // d(x v_{g^-1}, H_g)
};
/**
 * @brief Smallest m in [0, m_max] for which g^m x g^-m has sampled Lipschitz constant
 * below threshold on the ball of the given radius around the attracting point of g^-1.
 * Throws DEGENERATE_POSITION or RANGE_EXHAUSTED.
 */
ContractingResult make_contracting(const ProjMap& g, const ProjMap& x, int m_max, double threshold,
                                   double radius = 1e-2, long samples = 256, std::uint64_t seed = 0);

struct VeryProximalResult {
  Word f1, f2;  // words in the helpers
  ProjMap a;
  ProximalityCertificate certificate;
  bool short_circuit = false;  // y itself passed; a = y
  long pairs_tried = 0;
};
/**
 * @brief Searches helper words f1, f2 of length <= word_bound (shortlex, f1 outer) until
 * y f1 y^-1 f2 is certified (r, eps)-very proximal. When y already passes, returns it with
 * empty words. Throws SEARCH_EXHAUSTED, which is inconclusive.
 */
VeryProximalResult make_very_proximal(const ProjMap& y, const std::vector<ProjMap>& helpers, int word_bound,
                                      double r, double eps, long budget, std::uint64_t seed);

struct GoodPosition {
  int l = 0;
  ProjMap a_conj;  // h^l a h^-l
  Arena arena;     // h^l applied to the arena of a
  // A(a'), A(a'^-1) inside A(h); R(a'), R(a'^-1) inside R(h^-1).
  std::array<double, 4> margins{};
  double min_margin = 0;
};
GoodPosition position_good(const ProjMap& h, const Arena& h_arena, const ProjMap& a, const Arena& a_arena, int l_max);

struct SynthesisCandidate {
  bool ok = false;
  int l1 = 0, l2 = 0;
  ProjMap f;
  Arena arena;
  // R(f) in R(b_p), A(f) in A(b_q), R(f^-1) in R(b_q^-1), A(f^-1) in A(b_p^-1).
  std::array<double, 4> containment{};
  // R(f) off H_{b_p}, A(f) off v_{b_q}, R(f^-1) off H_{b_q^-1}, A(f^-1) off v_{b_p^-1}; NaN if undefined.
  std::array<double, 4> exclusion{};
  double self_margin = 0;
  std::string failure;
};

struct SynthesisResult {
  int l1 = 0, l2 = 0;
  ProjMap f;
  Arena arena;
  std::array<double, 4> containment{};
  std::array<double, 4> incidence{};
  std::array<double, 4> exclusion{};
  double self_margin = 0;
  long candidates_tried = 0;
};

struct CosetInput {
  ProjMap b_p, b_q;
  Arena arena_p, arena_q;
  ProjMap x, y, gamma;
};

// Incidence margins of M = y gamma x:
// d(M v_{b_p}, H_{b_q}), d(M^-1 v_{b_q^-1}, H_{b_p^-1}), d(M^-1 v_{b_q}, H_{b_p}), d(M v_{b_p^-1}, H_{b_q^-1}).
std::array<double, 4> incidence_margins(const CosetInput& in);

SynthesisCandidate evaluate_candidate(const CosetInput& in, int l1, int l2, bool require_exclusion = false);
// Arena construction and checks of evaluate_candidate for a given f (l1, l2 left at 0).
SynthesisCandidate fit_arena(const CosetInput& in, const ProjMap& f, bool require_exclusion = false);

/**
 * @brief Smallest (l1, l2) in [1, l_max]^2, lexicographic, for which
 * f = b_q^l2 y gamma x b_p^l1 has an arena nested in those of b_p and b_q.
 * Throws DEGENERATE_POSITION when an incidence margin is <= 1e-12, RANGE_EXHAUSTED otherwise.
 */
SynthesisResult synthesize_coset_element(const CosetInput& in, int l_max, bool require_exclusion = false);

struct GroupSpec {
  std::vector<Word> gens;  // words in the ambient free group
  Word b;                  // very proximal member
};
struct FamilyRequest {
  int p = 0, q = 0;  // group indices
  Word gamma;
};
struct FamilyOptions {
  int l_max = 8;
  int xy_word_bound = 2;  // length bound for x, y as words in the subgroup generators
  long max_power = 256;   // cap on the exponent of each b
};
struct FamilyElement {
  FamilyRequest request;
  Word x, y;  // ambient words, x in Theta_p, y in Theta_q
  long n_p = 0, n_q = 0;
  int l1 = 0, l2 = 0;
  Word word;  // b_q^(n_q l2) y gamma x b_p^(n_p l1)
  ProjMap f;
  Arena arena;
  SynthesisResult synthesis;
};
struct FamilyFailure {
  int request = 0;
  std::string reason;
};
struct FamilyResult {
  std::vector<FamilyElement> elements;
  std::vector<FamilyFailure> failures;
  std::vector<long> exponents;  // n_r for each group
  std::vector<Arena> b_arenas;
  PingPongCertificate certificate;  // the f's together with the b_r^(n_r)
  int word_rank = 0;                // rank of the subgroup generated by the f words
};
FamilyResult double_coset_free_family(const FieldPtr& f, const std::vector<RatMat>& assignment,
                                      const std::vector<GroupSpec>& groups, const std::vector<FamilyRequest>& requests,
                                      long budget, const FamilyOptions& opt = {});

}  // namespace subdyn
