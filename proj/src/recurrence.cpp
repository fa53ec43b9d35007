#include "subdyn/recurrence.hpp"

#include <algorithm>
#include <stdexcept>

#include "subdyn/error.hpp"

namespace subdyn {

void FiniteMPSystem::validate() const {
  if (points < 1) throw Error(ErrorCode::PRECONDITION, "system needs at least one point");
  if (static_cast<int>(weights.size()) != points || static_cast<int>(T.size()) != points)
    throw Error(ErrorCode::PRECONDITION, "weights and T must have one entry per point");
  Rational sum = 0;
  for (const auto& w : weights) {
    if (w <= 0) throw Error(ErrorCode::PRECONDITION, "weights must be positive");
    sum += w;
  }
  if (sum != 1) throw Error(ErrorCode::PRECONDITION, "weights must sum to 1");
  std::vector<char> hit(static_cast<std::size_t>(points), 0);
  for (int x = 0; x < points; ++x) {
    int y = T[static_cast<std::size_t>(x)];
    if (y < 0 || y >= points || hit[static_cast<std::size_t>(y)]) throw Error(ErrorCode::PRECONDITION, "T is not a permutation");
    hit[static_cast<std::size_t>(y)] = 1;
    if (weights[static_cast<std::size_t>(x)] != weights[static_cast<std::size_t>(y)])
      throw Error(ErrorCode::PRECONDITION, "T does not preserve the weights");
  }
}

Rational FiniteMPSystem::mass(const std::vector<int>& set) const {
  Rational m = 0;
  for (int x : set) m += weights[static_cast<std::size_t>(x)];
  return m;
}

std::vector<int> FiniteMPSystem::image(const std::vector<int>& set, long k) const {
  std::vector<int> inv(static_cast<std::size_t>(points));
  for (int x = 0; x < points; ++x) inv[static_cast<std::size_t>(T[static_cast<std::size_t>(x)])] = x;
  const auto& step = k >= 0 ? T : inv;
  std::vector<int> out;
  out.reserve(set.size());
  for (int x : set) {
    for (long i = 0; i < (k >= 0 ? k : -k); ++i) x = step[static_cast<std::size_t>(x)];
    out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Rational Tower::tail_mass(int m) const {
  if (m < 0) m = 0;
  if (m >= static_cast<int>(tail.size())) return 0;
  return tail[static_cast<std::size_t>(m)];
}

std::vector<int> Tower::tail_set(const FiniteMPSystem& s, int m) const {
  std::vector<int> out;
  for (int k = std::max(m + 1, 1); k <= max_height(); ++k) {
    std::vector<int> level = levels[static_cast<std::size_t>(k)];
    for (int i = 0; i < k; ++i) {
      out.insert(out.end(), level.begin(), level.end());
      level = s.image(level, 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tower build_tower(const FiniteMPSystem& s, const std::vector<int>& a) {
  s.validate();
  if (a.empty()) throw Error(ErrorCode::EMPTY_BASE, "base set is empty");
  std::vector<char> in_a(static_cast<std::size_t>(s.points), 0);
  for (int x : a) {
    if (x < 0 || x >= s.points) throw Error(ErrorCode::PRECONDITION, "base point out of range");
    in_a[static_cast<std::size_t>(x)] = 1;
  }
  Tower t;
  for (int x = 0; x < s.points; ++x)
    if (in_a[static_cast<std::size_t>(x)]) t.base.push_back(x);
  t.levels.assign(1, {});
  for (int x : t.base) {
    int m = 1;
    int y = s.T[static_cast<std::size_t>(x)];
    while (!in_a[static_cast<std::size_t>(y)]) {
      y = s.T[static_cast<std::size_t>(y)];
      ++m;
    }
    if (static_cast<int>(t.levels.size()) <= m) t.levels.resize(static_cast<std::size_t>(m + 1));
    t.levels[static_cast<std::size_t>(m)].push_back(x);
  }
  // Column masses k * mu(V_k); tail[m] sums columns with k > m.
  const int h = t.max_height();
  t.tail.assign(static_cast<std::size_t>(h + 1), Rational(0));
  for (int m = 0; m <= h; ++m)
    for (int k = m + 1; k <= h; ++k) t.tail[static_cast<std::size_t>(m)] += k * s.mass(t.levels[static_cast<std::size_t>(k)]);

  // The levels partition the forward orbit of A.
  std::vector<int> count(static_cast<std::size_t>(s.points), 0);
  for (int x : t.tail_set(s, 0)) ++count[static_cast<std::size_t>(x)];
  std::vector<char> orbit(static_cast<std::size_t>(s.points), 0);
  for (int x : t.base) {
    int y = x;
    do {
      orbit[static_cast<std::size_t>(y)] = 1;
      y = s.T[static_cast<std::size_t>(y)];
    } while (y != x);
  }
  for (int x = 0; x < s.points; ++x)
    if (count[static_cast<std::size_t>(x)] != orbit[static_cast<std::size_t>(x)])
      throw std::logic_error("tower levels do not partition the orbit of the base");
  return t;
}

long recurrence_bound(const FiniteMPSystem& s, const std::vector<int>& a, const Rational& eps) {
  if (eps <= 0) throw Error(ErrorCode::PRECONDITION, "eps must be positive");
  s.validate();
  if (a.empty() || s.mass(a) == 0) throw Error(ErrorCode::NULL_BASE, "base set has measure zero");
  Tower t = build_tower(s, a);
  for (long n = 1;; ++n)
    if (t.tail_mass(static_cast<int>(n)) < eps) return n;
}

BoundCheck verify_bound(const FiniteMPSystem& s, const std::vector<int>& a, long n, long n_lo, long n_hi,
                        const Rational& eps) {
  s.validate();
  BoundCheck out;
  std::vector<int> base(a);
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());
  for (long big_n = n_lo; big_n <= n_hi; ++big_n) {
    std::vector<char> covered(static_cast<std::size_t>(s.points), 0);
    std::vector<int> shifted = s.image(base, big_n);
    for (long i = 0; i < n; ++i) {
      for (int x : shifted) covered[static_cast<std::size_t>(x)] = 1;
      shifted = s.image(shifted, 1);
    }
    Rational missed = 0;
    for (int x : base)
      if (!covered[static_cast<std::size_t>(x)]) missed += s.weights[static_cast<std::size_t>(x)];
    if (missed > out.worst) out.worst = missed;
    if (!(missed < eps) && out.ok) {
      out.ok = false;
      out.failing_n = big_n;
    }
  }
  return out;
}

}  // namespace subdyn
