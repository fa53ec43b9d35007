#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "subdyn/error.hpp"
#include "subdyn/recurrence.hpp"

using namespace subdyn;

namespace {

FiniteMPSystem rotation(int n) {
  FiniteMPSystem s;
  s.points = n;
  for (int x = 0; x < n; ++x) {
    s.T.push_back((x + 1) % n);
    s.weights.emplace_back(1, n);
  }
  return s;
}

// Random permutation with weights constant on cycles.
FiniteMPSystem random_system(std::mt19937_64& rng, int n) {
  FiniteMPSystem s;
  s.points = n;
  s.T.resize(static_cast<std::size_t>(n));
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  std::shuffle(p.begin(), p.end(), rng);
  for (int i = 0; i < n; ++i) s.T[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  std::uniform_int_distribution<int> wd(1, 4);
  std::vector<int> cw(static_cast<std::size_t>(n), 0);
  for (int x = 0; x < n; ++x) {
    if (cw[static_cast<std::size_t>(x)]) continue;
    int w = wd(rng);
    int y = x;
    do {
      cw[static_cast<std::size_t>(y)] = w;
      y = s.T[static_cast<std::size_t>(y)];
    } while (y != x);
  }
  Rational total = 0;
  for (int w : cw) total += w;
  for (int w : cw) s.weights.emplace_back(Rational(w) / total);
  return s;
}

std::vector<int> random_subset(std::mt19937_64& rng, int n) {
  std::vector<int> a;
  std::bernoulli_distribution keep(0.3);
  for (int x = 0; x < n; ++x)
    if (keep(rng)) a.push_back(x);
  if (a.empty()) a.push_back(0);
  return a;
}

}  // namespace

TEST_CASE("build_tower examples") {
  FiniteMPSystem id;
  id.points = 4;
  id.T = {0, 1, 2, 3};
  id.weights.assign(4, Rational(1, 4));
  auto t = build_tower(id, {0, 1, 2, 3});
  CHECK(t.levels[1] == std::vector<int>{0, 1, 2, 3});
  CHECK(t.tail_mass(1) == 0);

  auto r = build_tower(rotation(5), {0, 1});
  REQUIRE(r.max_height() == 4);
  CHECK(r.levels[1] == std::vector<int>{0});
  CHECK(r.levels[4] == std::vector<int>{1});
  CHECK(r.tail_mass(3) == Rational(4, 5));
  CHECK(r.tail_mass(4) == 0);
  CHECK_THROWS_AS(build_tower(rotation(5), {}), Error);
}

TEST_CASE("recurrence_bound examples") {
  CHECK(recurrence_bound(rotation(5), {0, 1}, Rational(1, 10)) == 4);
  CHECK(recurrence_bound(rotation(7), {0, 1, 2, 3, 4, 5, 6}, Rational(1, 100)) == 1);
  FiniteMPSystem id;
  id.points = 3;
  id.T = {0, 1, 2};
  id.weights.assign(3, Rational(1, 3));
  CHECK(recurrence_bound(id, {2}, Rational(1, 2)) == 1);
  try {
    recurrence_bound(rotation(5), {}, Rational(1, 2));
    FAIL("expected NULL_BASE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NULL_BASE);
  }
}

TEST_CASE("verify_bound examples") {
  auto s = rotation(5);
  CHECK(verify_bound(s, {0, 1}, 4, 0, 50, Rational(1, 10)).ok);
  auto f = verify_bound(s, {0, 1}, 3, 0, 50, Rational(1, 10));
  CHECK_FALSE(f.ok);
  CHECK(f.failing_n == 1);
  CHECK(f.worst == Rational(1, 5));
  for (long n = 1; n <= 5; ++n) CHECK(verify_bound(s, {0, 1, 2, 3, 4}, n, 0, 20, Rational(1, 1000)).ok);
}

TEST_CASE("tower invariants on random systems") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> nd(1, 20);
  for (int t = 0; t < 200; ++t) {
    auto s = random_system(rng, nd(rng));
    auto a = random_subset(rng, s.points);
    auto tw = build_tower(s, a);
    // Levels against direct orbit enumeration.
    for (int x : a) {
      int m = 1, y = s.T[static_cast<std::size_t>(x)];
      while (std::find(a.begin(), a.end(), y) == a.end()) {
        y = s.T[static_cast<std::size_t>(y)];
        ++m;
      }
      const auto& lv = tw.levels[static_cast<std::size_t>(m)];
      CHECK(std::find(lv.begin(), lv.end(), x) != lv.end());
    }
    // Kac-style count: sum of k mu(V_k) is the mass of the orbit of A.
    Rational kac = 0;
    for (int k = 1; k <= tw.max_height(); ++k) kac += k * s.mass(tw.levels[static_cast<std::size_t>(k)]);
    std::vector<int> orbit;
    for (int x = 0; x < s.points; ++x) {
      int y = x;
      for (int i = 0; i < s.points; ++i) {
        if (std::find(a.begin(), a.end(), y) != a.end()) {
          orbit.push_back(x);
          break;
        }
        y = s.T[static_cast<std::size_t>(y)];
      }
    }
    CHECK(kac == s.mass(orbit));
    for (int m = 1; m <= tw.max_height(); ++m) CHECK(tw.tail_mass(m) <= tw.tail_mass(m - 1));
    CHECK(tw.tail_mass(tw.max_height()) == 0);
    if (tw.max_height() > 1) CHECK(tw.tail_mass(tw.max_height() - 1) > 0);
    // A \ U T^i A lies in T^N(Tail(n)).
    for (int n = 1; n <= tw.max_height(); ++n) {
      auto tail = tw.tail_set(s, n);
      CHECK(s.mass(tail) == tw.tail_mass(n));
      for (long big_n = 0; big_n <= 6; ++big_n) {
        std::vector<char> covered(static_cast<std::size_t>(s.points), 0);
        for (long i = big_n; i < big_n + n; ++i)
          for (int x : s.image(a, i)) covered[static_cast<std::size_t>(x)] = 1;
        auto moved = s.image(tail, big_n);
        for (int x : a)
          if (!covered[static_cast<std::size_t>(x)]) CHECK(std::binary_search(moved.begin(), moved.end(), x));
      }
    }
  }
}

TEST_CASE("recurrence_bound satisfies the inequality for every N") {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> nd(1, 20), ed(1, 20);
  for (int t = 0; t < 100; ++t) {
    auto s = random_system(rng, nd(rng));
    auto a = random_subset(rng, s.points);
    Rational eps(1, ed(rng));
    long n = recurrence_bound(s, a, eps);
    CHECK(verify_bound(s, a, n, 0, 50, eps).ok);
    auto tw = build_tower(s, a);
    CHECK(tw.tail_mass(static_cast<int>(n)) < eps);
    if (n > 1) CHECK(tw.tail_mass(static_cast<int>(n) - 1) >= eps);
  }
}
