#pragma once

#include <optional>
#include <vector>

#include "subdyn/rational.hpp"

namespace subdyn {

struct FiniteMPSystem {
  int points = 0;
  std::vector<Rational> weights;
  std::vector<int> T;  // T[x] is the image of x

  void validate() const;
  Rational mass(const std::vector<int>& set) const;
  // T^k applied to every point of the set, k may be negative.
  std::vector<int> image(const std::vector<int>& set, long k) const;
};

/**
 * @brief Kakutani-Rokhlin tower over a base set A.
 *
 * levels[k] holds V_k (points of A first returning at time k); levels[0] is empty.
 * tail[m] is the mass of all levels T^i V_k, 0 <= i < k, of towers with k > m.
 */
struct Tower {
  std::vector<int> base;
  std::vector<std::vector<int>> levels;
  std::vector<Rational> tail;

  int max_height() const { return static_cast<int>(levels.size()) - 1; }
  Rational tail_mass(int m) const;
  // Tail(m) as a sorted point set.
  std::vector<int> tail_set(const FiniteMPSystem& s, int m) const;
};

Tower build_tower(const FiniteMPSystem& s, const std::vector<int>& a);
// Least n with mu(Tail(n)) < eps.
long recurrence_bound(const FiniteMPSystem& s, const std::vector<int>& a, const Rational& eps);

struct BoundCheck {
  bool ok = true;
  std::optional<long> failing_n;  // the first N where the inequality fails
  Rational worst = 0;             // largest missed mass seen
};
// Checks mu(A \ U_{i=N}^{N+n-1} T^i A) < eps for every N in [n_lo, n_hi].
BoundCheck verify_bound(const FiniteMPSystem& s, const std::vector<int>& a, long n, long n_lo, long n_hi,
                        const Rational& eps);

}  // namespace subdyn
