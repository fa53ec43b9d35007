#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace subdyn {

// A letter is a nonzero signed generator index: +i is x_i, -i is x_i^{-1}.
using Letter = int;

/**
 * @brief Freely reduced word in the free group of rank r.
 */
class Word {
 public:
  Word() = default;
  explicit Word(int rank);
  // Reduces the given letters; throws GENERATOR_OUT_OF_RANGE.
  Word(int rank, const std::vector<Letter>& raw);

  static Word identity(int rank) { return Word(rank); }
  static Word generator(int rank, int i, int sign = 1);
  // "abA" or "aba'"; uppercase or a trailing ' inverts. "e" and "" are the identity.
  static Word parse(int rank, std::string_view text);

  int rank() const { return rank_; }
  std::size_t length() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }
  const std::vector<Letter>& letters() const { return letters_; }

  std::string str() const;

  friend bool operator==(const Word&, const Word&) = default;
  // Shortlex order (length, then letters); generator order is a < A < b < B < ...
  friend std::strong_ordering operator<=>(const Word& u, const Word& v);

 private:
  int rank_ = 0;
  std::vector<Letter> letters_;
};

Word reduce(int rank, const std::vector<Letter>& raw);
Word multiply(const Word& u, const Word& v);
Word invert(const Word& u);
// g u g^{-1}
Word conjugate(const Word& u, const Word& g);
Word power(const Word& u, long n);
// u v u^{-1} v^{-1}
Word commutator(const Word& u, const Word& v);
// Returns (eta, theta) with w = eta theta eta^{-1} and theta cyclically reduced.
std::pair<Word, Word> cyclic_reduce(const Word& w);

Word operator*(const Word& u, const Word& v);

// Index of a letter among the 2r directions: 2(i-1) for x_i, 2(i-1)+1 for x_i^{-1}.
inline int letter_slot(Letter l) { return l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1; }
inline Letter slot_letter(int s) { return (s % 2 == 0) ? (s / 2 + 1) : -(s / 2 + 1); }

// All reduced words of length exactly n (n = 0 gives the identity), shortlex order.
std::vector<Word> words_of_length(int rank, int n);
// All reduced words of length at most n, shortlex order.
std::vector<Word> ball(int rank, int n);

}  // namespace subdyn
