#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "subdyn/error.hpp"
#include "subdyn/stabtop.hpp"

using namespace subdyn;

namespace {
Word w2(const char* s) { return Word::parse(2, s); }
CoreGraph sub(std::initializer_list<const char*> gens) {
  std::vector<Word> ws;
  for (auto g : gens) ws.push_back(w2(g));
  return CoreGraph::from_generators(2, ws);
}

using Perms = std::vector<std::vector<int>>;

struct Fi {
  Perms perms;
  CoreGraph g;
  std::vector<Word> gens;
  bool has(const Word& w) const { return oracle::act(perms, 0, w) == 0; }
};

Fi random_fi(std::mt19937_64& rng, int n) {
  Fi f;
  f.perms = oracle::random_transitive(rng, 2, n);
  f.gens = oracle::schreier_generators(f.perms, 2);
  f.g = CoreGraph::from_generators(2, f.gens);
  return f;
}

// Kernel of the map to Z/2 reading the exponent sum of generator i.
Fi parity_kernel(int i) {
  Fi f;
  f.perms = {{0, 1}, {0, 1}};
  f.perms[static_cast<std::size_t>(i - 1)] = {1, 0};
  f.gens = oracle::schreier_generators(f.perms, 2);
  f.g = CoreGraph::from_generators(2, f.gens);
  return f;
}

Word nontrivial_member(std::mt19937_64& rng, const Fi& f) {
  std::uniform_int_distribution<std::size_t> pick(0, f.gens.size() - 1);
  Word w = f.gens[pick(rng)];
  if (w.length() < 4 && f.gens.size() > 1) w = w * f.gens[pick(rng)];
  return w.is_identity() ? f.gens.front() : w;
}
}  // namespace

TEST_CASE("commutator_in_intersection examples") {
  auto whole = whole_group(2);
  auto h = commutator_in_intersection(whole, whole, w2("ab"), w2("b"), 10);
  CHECK(h.n1 == 1);
  CHECK(h.n2 == 1);
  CHECK(h.v == commutator(w2("ab"), w2("b")));

  auto k1 = parity_kernel(1), k2 = parity_kernel(2);
  auto c = commutator_in_intersection(k1.g, k2.g, w2("b"), w2("a"), 10);
  CHECK(c.n1 == 1);
  CHECK(c.n2 == 1);
  CHECK(c.v == w2("baBA"));
  CHECK(oracle::exponent_sum(c.v, 1) == 0);
  CHECK(oracle::exponent_sum(c.v, 2) == 0);

  CHECK_THROWS_AS(commutator_in_intersection(k1.g, k2.g, w2("a"), w2("a"), 10), Error);
}

TEST_CASE("commutator_in_intersection against exhaustive search") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 40; ++t) {
    Fi f1 = random_fi(rng, 2), f2 = random_fi(rng, 3);
    Word d1 = nontrivial_member(rng, f1), d2 = nontrivial_member(rng, f2);
    std::optional<std::pair<long, long>> expect;
    for (long n1 = 1; n1 <= 6 && !expect; ++n1)
      for (long n2 = 1; n2 <= 6 && !expect; ++n2) {
        Word v = commutator(power(d1, n1), power(d2, n2));
        if (f1.has(v) && f2.has(v)) expect = std::make_pair(n1, n2);
      }
    REQUIRE(expect);
    auto h = commutator_in_intersection(f1.g, f2.g, d1, d2, 6);
    CHECK(h.n1 == expect->first);
    CHECK(h.n2 == expect->second);
  }
}

TEST_CASE("commutator hits are periodic") {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> nd(2, 7);
  for (int t = 0; t < 50; ++t) {
    Fi f1 = random_fi(rng, nd(rng)), f2 = random_fi(rng, nd(rng));
    Word d1 = nontrivial_member(rng, f1), d2 = nontrivial_member(rng, f2);
    auto h = commutator_in_intersection(f1.g, f2.g, d1, d2, 420);
    CHECK(h.n1 <= h.period1);
    CHECK(h.n2 <= h.period2);
    CHECK(f1.has(h.v));
    CHECK(f2.has(h.v));
    for (auto [n1, n2] : {std::pair{h.n1 + h.period1, h.n2}, std::pair{h.n1, h.n2 + h.period2},
                          std::pair{h.n1 + h.period1, h.n2 + 2 * h.period2}}) {
      Word v = commutator(power(d1, n1), power(d2, n2));
      CHECK(f1.has(v));
      CHECK(f2.has(v));
    }
  }
}

TEST_CASE("independent_tuple examples") {
  auto one = independent_tuple({sub({"a", "b"})}, 4);
  CHECK(one.elements == std::vector<Word>{w2("a")});
  CHECK(one.rank_check == 1);

  auto two = independent_tuple({whole_group(2), whole_group(2)}, 4);
  CHECK(two.rank_check == 2);
  CHECK(two.elements == std::vector<Word>{w2("a"), w2("b")});

  auto k = parity_kernel(1);
  REQUIRE(rank(k.g) == 3);
  auto three = independent_tuple({k.g, k.g, k.g}, 4);
  CHECK(three.rank_check == 3);
  for (const auto& e : three.elements) CHECK(k.has(e));
  CHECK(rank(CoreGraph::from_generators(2, three.elements)) == 3);

  CHECK_THROWS_AS(independent_tuple({sub({"a"}), sub({"b"})}, 4), Error);
}

TEST_CASE("find_relator") {
  CHECK_FALSE(find_relator({w2("a"), w2("b")}, 8));
  auto r = find_relator({w2("a"), w2("b"), w2("ab")}, 6);
  REQUIRE(r);
  CHECK(r->length() == 3);
  auto sq = find_relator({w2("a"), w2("aa")}, 6);
  REQUIRE(sq);
  CHECK(sq->length() == 3);
  // x1 x1 x2 X3 is the shortest relator.
  CHECK_FALSE(find_relator({w2("a"), w2("b"), w2("aab")}, 3));
  auto four = find_relator({w2("a"), w2("b"), w2("aab")}, 4);
  REQUIRE(four);
  CHECK(four->length() == 4);
}

TEST_CASE("independence witnesses survive brute-force evaluation") {
  std::mt19937_64 rng(107);
  std::uniform_int_distribution<int> nd(2, 6), jd(2, 3);
  for (int t = 0; t < 12; ++t) {
    int j = jd(rng);
    std::vector<CoreGraph> ds;
    std::vector<Fi> fs;
    for (int i = 0; i < j; ++i) {
      fs.push_back(random_fi(rng, nd(rng)));
      ds.push_back(fs.back().g);
    }
    auto w = independent_tuple(ds, 6);
    CHECK(w.rank_check == j);
    for (int i = 0; i < j; ++i) CHECK(fs[static_cast<std::size_t>(i)].has(w.elements[static_cast<std::size_t>(i)]));
    CHECK_FALSE(find_relator(w.elements, 8));
    // Direct evaluation of every abstract word of length <= 5.
    for (const auto& a : ball(j, 5)) {
      if (a.is_identity()) continue;
      std::vector<int> raw;
      for (int l : a.letters()) {
        const auto& e = w.elements[static_cast<std::size_t>(std::abs(l) - 1)].letters();
        if (l > 0) raw.insert(raw.end(), e.begin(), e.end());
        else
          for (auto it = e.rbegin(); it != e.rend(); ++it) raw.push_back(-*it);
      }
      CHECK_FALSE(oracle::naive_reduce(raw).empty());
    }
  }
}

TEST_CASE("intersection_element examples") {
  auto k = parity_kernel(1);
  auto one = intersection_element({k.g}, 8);
  CHECK_FALSE(one.v.is_identity());
  CHECK(k.has(one.v));

  auto k1 = parity_kernel(1), k2 = parity_kernel(2);
  auto two = intersection_element({k1.g, k2.g}, 8);
  CHECK_FALSE(two.v.is_identity());
  CHECK(k1.has(two.v));
  CHECK(k2.has(two.v));
  CHECK(oracle::exponent_sum(two.v, 1) % 2 == 0);
  CHECK(oracle::exponent_sum(two.v, 2) % 2 == 0);
  REQUIRE(two.trace.size() == 1);
  CHECK(two.trace[0].n == 1);
  CHECK(two.trace[0].m == 1);
}

TEST_CASE("intersection_element on random families") {
  std::mt19937_64 rng(109);
  std::uniform_int_distribution<int> nd(2, 5);
  for (int j = 2; j <= 4; ++j)
    for (int t = 0; t < 6; ++t) {
      std::vector<Fi> fs;
      std::vector<CoreGraph> ds;
      for (int i = 0; i < j; ++i) {
        fs.push_back(random_fi(rng, nd(rng)));
        ds.push_back(fs.back().g);
      }
      auto ie = intersection_element(ds, 64);
      CHECK_FALSE(ie.v.is_identity());
      for (const auto& f : fs) CHECK(f.has(ie.v));
      CHECK(ie.abstract.letters().front() == 1);
      CHECK(ie.abstract.letters().back() == -j);
      CHECK(ie.trace.back().indices.size() == static_cast<std::size_t>(j));
      CoreGraph prod = ds.front();
      for (std::size_t i = 1; i < ds.size(); ++i) prod = intersect(prod, ds[i]);
      CHECK_FALSE(is_trivial(prod));
      CHECK(contains(prod, ie.v));
    }
}

TEST_CASE("in_recurrent_subbasis examples") {
  auto k = parity_kernel(1);
  CHECK(in_recurrent_subbasis(k.g, {sub({"aa", "b"})}, 16));
  CHECK_FALSE(in_recurrent_subbasis(k.g, {}, 16));

  // Point stabilizers of S_3 acting on three points: three conjugates.
  Perms s3{{1, 0, 2}, {0, 2, 1}};
  std::vector<CoreGraph> stabs;
  for (int x = 0; x < 3; ++x) {
    Perms p = s3;
    // Relabel so that x becomes the base point.
    std::vector<int> sw{0, 1, 2};
    std::swap(sw[0], sw[static_cast<std::size_t>(x)]);
    for (auto& q : p) {
      std::vector<int> r(3);
      for (int y = 0; y < 3; ++y) r[static_cast<std::size_t>(sw[static_cast<std::size_t>(y)])] = sw[static_cast<std::size_t>(q[static_cast<std::size_t>(y)])];
      q = r;
    }
    stabs.push_back(CoreGraph::from_generators(2, oracle::schreier_generators(p, 2)));
  }
  CHECK_FALSE(equal(stabs[0], stabs[1]));
  auto chk = subbasis_check(stabs[0], stabs, 16);
  CHECK(chk.ok);
  CHECK(chk.conjugators.size() == 3);
  CHECK_FALSE(in_recurrent_subbasis(stabs[0], {stabs[1]}, 16));
  CHECK_FALSE(in_recurrent_subbasis(sub({"a"}), {sub({"a"})}, 16));
}

TEST_CASE("in_recurrent_subbasis is conjugation invariant") {
  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int> nd(2, 5);
  for (int t = 0; t < 30; ++t) {
    Fi f = random_fi(rng, nd(rng));
    std::vector<CoreGraph> h;
    for (int i = 0; i < 2; ++i) h.push_back(random_fi(rng, nd(rng)).g);
    h.push_back(CoreGraph::from_generators(2, {power(nontrivial_member(rng, f), 2)}));
    Word g = oracle::random_word(rng, 2, 5);
    bool a = in_recurrent_subbasis(f.g, h, 16);
    bool b = in_recurrent_subbasis(conjugate_subgroup(f.g, g), h, 16);
    CHECK(a == b);
  }
}

TEST_CASE("filter_base_check examples") {
  auto k1 = parity_kernel(1), k2 = parity_kernel(2);
  auto both = intersect(k1.g, k2.g);
  CHECK(filter_base_check({k1.g, k2.g, both}).ok);
  auto bad = filter_base_check({sub({"a"}), sub({"b"})});
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.failing_pair);
  CHECK(*bad.failing_pair == std::pair<int, int>{0, 1});

  // Closure of the conjugates of a point stabilizer under intersection.
  Perms s3{{1, 0, 2}, {0, 2, 1}};
  CoreGraph st = CoreGraph::from_generators(2, oracle::schreier_generators(s3, 2));
  std::vector<CoreGraph> base;
  for (const auto& t : tree_words(st)) base.push_back(conjugate_subgroup(st, invert(t)));
  CHECK_FALSE(filter_base_check(base).ok);
  base.push_back(intersect(base[0], base[1]));
  CHECK(filter_base_check(base).ok);
  CHECK(filter_base_check({k1.g}).ok);
}
