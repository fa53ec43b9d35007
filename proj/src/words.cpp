#include "subdyn/words.hpp"

#include <cctype>

#include "subdyn/error.hpp"

namespace subdyn {

namespace {

void check_rank(const Word& u, const Word& v) {
  if (u.rank() != v.rank())
    throw Error(ErrorCode::RANK_MISMATCH,
                "rank " + std::to_string(u.rank()) + " vs " + std::to_string(v.rank()));
}

}  // namespace

Word::Word(int rank) : rank_(rank) {
  if (rank < 1) throw Error(ErrorCode::PRECONDITION, "rank must be positive");
}

Word::Word(int rank, const std::vector<Letter>& raw) : Word(rank) {
  letters_.reserve(raw.size());
  for (Letter l : raw) {
    if (l == 0 || l > rank || -l > rank)
      throw Error(ErrorCode::GENERATOR_OUT_OF_RANGE,
                  "letter " + std::to_string(l) + " for rank " + std::to_string(rank));
    if (!letters_.empty() && letters_.back() == -l)
      letters_.pop_back();
    else
      letters_.push_back(l);
  }
}

Word Word::generator(int rank, int i, int sign) { return Word(rank, {sign >= 0 ? i : -i}); }

Word Word::parse(int rank, std::string_view text) {
  std::vector<Letter> raw;
  if (text == "e" || text == "1") return Word(rank);
  for (std::size_t k = 0; k < text.size(); ++k) {
    char ch = text[k];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*' || ch == '.') continue;
    if (ch == '\'') {
      if (raw.empty()) throw Error(ErrorCode::PARSE, "dangling ' in \"" + std::string(text) + "\"");
      raw.back() = -raw.back();
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(ch)))
      throw Error(ErrorCode::PARSE, "bad character in word \"" + std::string(text) + "\"");
    int i = std::tolower(static_cast<unsigned char>(ch)) - 'a' + 1;
    if (i > rank)
      throw Error(ErrorCode::GENERATOR_OUT_OF_RANGE,
                  std::string("generator ") + ch + " for rank " + std::to_string(rank));
    raw.push_back(std::isupper(static_cast<unsigned char>(ch)) ? -i : i);
  }
  return Word(rank, raw);
}

std::string Word::str() const {
  if (letters_.empty()) return "e";
  std::string s;
  for (Letter l : letters_) {
    int i = l > 0 ? l : -l;
    if (i <= 26) {
      char ch = static_cast<char>('a' + i - 1);
      s.push_back(l > 0 ? ch : static_cast<char>(std::toupper(ch)));
    } else {
      s += "x" + std::to_string(i) + (l > 0 ? "" : "'");
    }
  }
  return s;
}

std::strong_ordering operator<=>(const Word& u, const Word& v) {
  if (auto c = u.rank_ <=> v.rank_; c != 0) return c;
  if (auto c = u.letters_.size() <=> v.letters_.size(); c != 0) return c;
  for (std::size_t k = 0; k < u.letters_.size(); ++k) {
    int a = letter_slot(u.letters_[k]), b = letter_slot(v.letters_[k]);
    if (auto c = a <=> b; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

Word reduce(int rank, const std::vector<Letter>& raw) { return Word(rank, raw); }

Word multiply(const Word& u, const Word& v) {
  check_rank(u, v);
  std::vector<Letter> raw(u.letters());
  raw.insert(raw.end(), v.letters().begin(), v.letters().end());
  return Word(u.rank(), raw);
}

Word operator*(const Word& u, const Word& v) { return multiply(u, v); }

Word invert(const Word& u) {
  std::vector<Letter> raw(u.letters().rbegin(), u.letters().rend());
  for (auto& l : raw) l = -l;
  return Word(u.rank(), raw);
}

Word conjugate(const Word& u, const Word& g) { return g * u * invert(g); }

Word power(const Word& u, long n) {
  Word base = n >= 0 ? u : invert(u);
  Word out(u.rank());
  for (long k = 0; k < (n >= 0 ? n : -n); ++k) out = out * base;
  return out;
}

Word commutator(const Word& u, const Word& v) {
  check_rank(u, v);
  return u * v * invert(u) * invert(v);
}

std::pair<Word, Word> cyclic_reduce(const Word& w) {
  const auto& ls = w.letters();
  std::size_t i = 0, j = ls.size();
  while (j - i >= 2 && ls[i] == -ls[j - 1]) {
    ++i;
    --j;
  }
  Word eta(w.rank(), std::vector<Letter>(ls.begin(), ls.begin() + static_cast<long>(i)));
  Word theta(w.rank(),
             std::vector<Letter>(ls.begin() + static_cast<long>(i), ls.begin() + static_cast<long>(j)));
  return {eta, theta};
}

std::vector<Word> words_of_length(int rank, int n) {
  std::vector<std::vector<Letter>> cur{{}};
  for (int k = 0; k < n; ++k) {
    std::vector<std::vector<Letter>> next;
    next.reserve(cur.size() * static_cast<std::size_t>(2 * rank));
    for (const auto& w : cur) {
      for (int s = 0; s < 2 * rank; ++s) {
        Letter l = slot_letter(s);
        if (!w.empty() && w.back() == -l) continue;
        auto x = w;
        x.push_back(l);
        next.push_back(std::move(x));
      }
    }
    cur = std::move(next);
  }
  std::vector<Word> out;
  out.reserve(cur.size());
  for (auto& w : cur) out.emplace_back(rank, w);
  return out;
}

std::vector<Word> ball(int rank, int n) {
  std::vector<Word> out;
  for (int k = 0; k <= n; ++k) {
    auto layer = words_of_length(rank, k);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

}  // namespace subdyn
