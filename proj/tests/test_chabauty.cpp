#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "subdyn/chabauty.hpp"

using namespace subdyn;

namespace {
Word w2(const char* s) { return Word::parse(2, s); }
CoreGraph sub(std::initializer_list<const char*> gens) {
  std::vector<Word> ws;
  for (auto g : gens) ws.push_back(w2(g));
  return CoreGraph::from_generators(2, ws);
}
std::vector<Word> words(std::initializer_list<const char*> ws) {
  std::vector<Word> out;
  for (auto w : ws) out.push_back(w2(w));
  std::sort(out.begin(), out.end());
  return out;
}
CoreGraph random_sub(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ng(0, 3);
  std::vector<Word> g;
  for (int k = ng(rng); k > 0; --k) g.push_back(oracle::random_word(rng, 2, 5, 1));
  return CoreGraph::from_generators(2, g);
}
}  // namespace

TEST_CASE("ball_signature examples") {
  CHECK(ball_signature(CoreGraph(2), 3).words == words({"e"}));
  CHECK(ball_signature(sub({"a"}), 2).words == words({"e", "a", "A", "aa", "AA"}));
  CHECK(ball_signature(sub({"aa", "b"}), 2).words == words({"e", "aa", "AA", "b", "B", "bb", "BB"}));
}

TEST_CASE("ball_signature matches enumeration") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    auto g = random_sub(rng);
    std::vector<Word> expect;
    for (const auto& w : ball(2, 6))
      if (contains(g, w)) expect.push_back(w);
    std::sort(expect.begin(), expect.end());
    auto sig = ball_signature(g, 6);
    CHECK(sig.words == expect);
    for (const auto& w : sig.words) CHECK(std::binary_search(sig.words.begin(), sig.words.end(), invert(w)));
  }
}

TEST_CASE("in_basic_open examples") {
  auto g = sub({"ab"});
  CHECK(in_basic_open(g, g, ball(2, 3)));
  CHECK_FALSE(in_basic_open(sub({"a"}), sub({"aa"}), words({"a"})));
  auto h = sub({"aa", "b"}), n = sub({"aa", "b", "abA"});
  CHECK(in_basic_open(h, n, ball(2, 2)));
  CHECK_FALSE(in_basic_open(h, n, ball(2, 3)));
}

TEST_CASE("env_contains examples") {
  CHECK(env_contains(whole_group(2), sub({"abAB", "bb"})));
  CHECK(env_contains(sub({"a"}), sub({"aa"})));
  CHECK_FALSE(env_contains(sub({"aa", "b"}), sub({"aaa"})));
}

TEST_CASE("chabauty_dist examples") {
  auto g = sub({"ab", "ba"});
  CHECK(chabauty_dist(g, g, 6).agree());
  CHECK(chabauty_dist(g, g, 6).value() == 0);
  auto d = chabauty_dist(sub({"a"}), whole_group(2), 4);
  CHECK(d.differ_at == 1);
  CHECK(d.value() == Rational(1, 2));
  auto d3 = chabauty_dist(sub({"aa", "b"}), sub({"aa", "b", "abA"}), 4);
  CHECK(d3.differ_at == 3);
  CHECK(d3.value() == Rational(1, 8));
}

TEST_CASE("chabauty_dist equals first differing signature radius") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    auto g1 = random_sub(rng), g2 = random_sub(rng);
    int expect = 0;
    for (int r = 1; r <= 6 && expect == 0; ++r)
      if (ball_signature(g1, r) != ball_signature(g2, r)) expect = r;
    CHECK(chabauty_dist(g1, g2, 6).differ_at == expect);
  }
}

TEST_CASE("ultrametric inequality") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    auto x = random_sub(rng), y = random_sub(rng), z = random_sub(rng);
    Rational dxz = chabauty_dist(x, z, 8).value();
    Rational m = std::max(chabauty_dist(x, y, 8).value(), chabauty_dist(y, z, 8).value());
    CHECK(dxz <= m);
  }
}

TEST_CASE("envelope via basic open sets") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    auto d = random_sub(rng), s = random_sub(rng);
    auto gens = basis(d);
    auto sb = basis(s);
    gens.insert(gens.end(), sb.begin(), sb.end());
    auto join = CoreGraph::from_generators(2, gens);
    CHECK(env_contains(d, s) == in_basic_open(d, join, sb));
  }
}

TEST_CASE("conjugation is determined by a larger ball") {
  std::mt19937_64 rng(5);
  const int R = 4;
  for (int t = 0; t < 100; ++t) {
    auto d = random_sub(rng);
    Word g = oracle::random_word(rng, 2, 2);
    auto big = ball_signature(d, R + 2 * static_cast<int>(g.length()));
    std::vector<Word> predicted;
    for (const auto& w : big.words) {
      Word c = conjugate(w, g);
      if (static_cast<int>(c.length()) <= R) predicted.push_back(c);
    }
    std::sort(predicted.begin(), predicted.end());
    CHECK(ball_signature(conjugate_subgroup(d, g), R).words == predicted);
  }
}

TEST_CASE("U_M(C) decomposition") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    auto d = random_sub(rng), c = random_sub(rng);
    std::vector<Word> m;
    for (int k = 0; k < 4; ++k) m.push_back(oracle::random_word(rng, 2, 4));
    if (t % 2) m = ball(2, 2);
    CHECK(in_u(d, c, m) == in_basic_open(d, c, m));
  }
}
