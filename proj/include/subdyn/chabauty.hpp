#pragma once

#include <vector>

#include "subdyn/rational.hpp"
#include "subdyn/stallings.hpp"

namespace subdyn {

struct BallSignature {
  int radius = 0;
  std::vector<Word> words;  // shortlex sorted

  friend bool operator==(const BallSignature&, const BallSignature&) = default;
};

struct ChabautyDistance {
  // Least radius where the signatures differ; 0 when none up to rmax.
  int differ_at = 0;
  int rmax = 0;
  bool agree() const { return differ_at == 0; }
  // 2^{-differ_at}, or 0 when the subgroups agree up to rmax (then the true
  // distance is at most 2^{-rmax}).
  Rational value() const;
};

BallSignature ball_signature(const CoreGraph& g, int radius);
bool in_basic_open(const CoreGraph& d, const CoreGraph& c, const std::vector<Word>& m);
// D lies in the envelope of Sigma, i.e. Sigma <= D.
bool env_contains(const CoreGraph& d, const CoreGraph& sigma);
ChabautyDistance chabauty_dist(const CoreGraph& g1, const CoreGraph& g2, int rmax);
// Membership of D in U_M(C) = Env(<M cap C>) minus Env(<gamma>) for gamma in M \ C.
bool in_u(const CoreGraph& d, const CoreGraph& c, const std::vector<Word>& m);

}  // namespace subdyn
