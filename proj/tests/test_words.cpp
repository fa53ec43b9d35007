#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "subdyn/error.hpp"
#include "subdyn/stallings.hpp"
#include "subdyn/words.hpp"

using namespace subdyn;

namespace {
Word w2(const char* s) { return Word::parse(2, s); }
}  // namespace

TEST_CASE("reduce examples") {
  CHECK(reduce(2, {1, 2, -2, 1}) == w2("aa"));
  CHECK(reduce(2, {}).is_identity());
  CHECK(reduce(2, {1, -1, -2, 2}).is_identity());
  CHECK_THROWS_AS(reduce(2, {3}), Error);
}

TEST_CASE("parse and print") {
  CHECK(w2("abA").letters() == std::vector<int>{1, 2, -1});
  CHECK(w2("aba'") == w2("abA"));
  CHECK(w2("abA").str() == "abA");
  CHECK(w2("e").is_identity());
  CHECK_THROWS_AS(w2("abc"), Error);
}

TEST_CASE("group operations") {
  CHECK(multiply(w2("a"), w2("A")).is_identity());
  CHECK(conjugate(w2("b"), w2("a")) == w2("abA"));
  CHECK(invert(w2("ab")) == w2("BA"));
  CHECK(conjugate(w2("ab"), Word(2)) == w2("ab"));
  CHECK_THROWS_AS(multiply(w2("a"), Word::parse(3, "c")), Error);
}

TEST_CASE("cyclic_reduce examples") {
  auto [e1, t1] = cyclic_reduce(w2("abA"));
  CHECK(e1 == w2("a"));
  CHECK(t1 == w2("b"));
  auto [e2, t2] = cyclic_reduce(w2("b"));
  CHECK(e2.is_identity());
  CHECK(t2 == w2("b"));
  auto [e3, t3] = cyclic_reduce(w2("aabA"));
  CHECK(e3 == w2("a"));
  CHECK(t3 == w2("ab"));
  CHECK(e3 * t3 * invert(e3) == w2("aabA"));
}

TEST_CASE("commutator examples") {
  CHECK(commutator(w2("a"), w2("b")) == w2("abAB"));
  CHECK(commutator(w2("a"), w2("aa")).is_identity());
  // (ab) b (ab)^{-1} b^{-1} = a b b B A B = a b A B
  auto c = commutator(w2("ab"), w2("b"));
  CHECK(c.letters() == oracle::naive_reduce({1, 2, 2, -2, -1, -2}));
  CHECK(c == w2("abAB"));
}

TEST_CASE("reduction agrees with the naive oracle and the matrix image") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 20), let(0, 3);
  const int map[4] = {1, -1, 2, -2};
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> raw;
    for (int k = len(rng); k > 0; --k) raw.push_back(map[let(rng)]);
    Word w(2, raw);
    CHECK(w.letters() == oracle::naive_reduce(raw));
    CHECK(oracle::sanov(w) == oracle::sanov(raw));
    CHECK(reduce(2, w.letters()) == w);
  }
}

TEST_CASE("properties on random words") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    Word u = oracle::random_word(rng, 2, 12), v = oracle::random_word(rng, 2, 12);
    CHECK((u * v).length() <= u.length() + v.length());
    auto [eta, theta] = cyclic_reduce(u);
    CHECK(eta * theta * invert(eta) == u);
    CHECK(theta.is_identity() == u.is_identity());
    if (theta.length() >= 2) CHECK(theta.letters().front() != -theta.letters().back());
    CHECK(oracle::sanov(u * v) == oracle::mul(oracle::sanov(u), oracle::sanov(v)));
  }
}

TEST_CASE("commutator trivial iff <u,v> cyclic") {
  std::mt19937_64 rng(13);
  int commuting = 0;
  for (int t = 0; t < 400; ++t) {
    Word u = oracle::random_word(rng, 2, 4);
    // Bias towards commuting pairs with shared roots.
    Word v = (t % 3 == 0) ? power(u, t % 5 - 2) : oracle::random_word(rng, 2, 4);
    bool trivial = commutator(u, v).is_identity();
    commuting += trivial;
    CHECK(trivial == (rank(CoreGraph::from_generators(2, {u, v})) <= 1));
  }
  CHECK(commuting > 50);
}

TEST_CASE("oracle self-checks") {
  auto w = [](const char* s) { return Word::parse(2, s); };
  oracle::FoldedGraph g(2, {w("ab"), w("aB")});
  CHECK(g.contains(w("abbA")));
  CHECK_FALSE(g.contains(w("aa")));
  CHECK(g.contains(w("bb")));
  CHECK_FALSE(g.contains(w("a")));
  oracle::FoldedGraph h(2, {w("aba"), w("abb")});
  CHECK(h.contains(w("abaBBA")));
  CHECK_FALSE(h.contains(w("ab")));

  auto rel = oracle::short_relator({w("a"), w("aa")}, 2);
  CHECK(rel.size() == 3);
  CHECK(oracle::short_relator({w("ab"), w("ba")}, 6).empty());
  CHECK_FALSE(oracle::short_relator({w("ab"), w("ab")}, 1).empty());
}
