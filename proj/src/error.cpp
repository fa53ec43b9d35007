#include "subdyn/error.hpp"
#include "subdyn/rational.hpp"

#include <cctype>

namespace subdyn {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::GENERATOR_OUT_OF_RANGE: return "GENERATOR_OUT_OF_RANGE";
    case ErrorCode::RANK_MISMATCH: return "RANK_MISMATCH";
    case ErrorCode::PARSE: return "PARSE";
    case ErrorCode::PRECONDITION: return "PRECONDITION";
    case ErrorCode::INFINITE_INDEX: return "INFINITE_INDEX";
    case ErrorCode::NOT_NORMAL: return "NOT_NORMAL";
    case ErrorCode::NOT_ALMOST_NORMAL: return "NOT_ALMOST_NORMAL";
    case ErrorCode::ATOM_NOT_IN_SIGMA: return "ATOM_NOT_IN_SIGMA";
    case ErrorCode::NULL_EVENT: return "NULL_EVENT";
    case ErrorCode::NOT_INVARIANT_EVENT: return "NOT_INVARIANT_EVENT";
    case ErrorCode::BOUND_EXHAUSTED: return "BOUND_EXHAUSTED";
    case ErrorCode::EMPTY_BASE: return "EMPTY_BASE";
    case ErrorCode::NULL_BASE: return "NULL_BASE";
    case ErrorCode::SINGULAR_AT_PRECISION: return "SINGULAR_AT_PRECISION";
    case ErrorCode::NOT_CONTRACTING: return "NOT_CONTRACTING";
    case ErrorCode::NO_CONVERGENCE: return "NO_CONVERGENCE";
    case ErrorCode::OVERLAP: return "OVERLAP";
    case ErrorCode::RANGE_EXHAUSTED: return "RANGE_EXHAUSTED";
    case ErrorCode::DEGENERATE_POSITION: return "DEGENERATE_POSITION";
    case ErrorCode::SEARCH_EXHAUSTED: return "SEARCH_EXHAUSTED";
    case ErrorCode::NOT_FOUND: return "NOT_FOUND";
    case ErrorCode::FIELD_MISMATCH: return "FIELD_MISMATCH";
  }
  return "UNKNOWN";
}

Rational parse_rational(const std::string& s) {
  if (s.empty()) throw Error(ErrorCode::PARSE, "empty rational");
  for (char ch : s) {
    if (!(std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == '/' || ch == '+'))
      throw Error(ErrorCode::PARSE, "bad rational '" + s + "'");
  }
  Rational q;
  std::string t = (s[0] == '+') ? s.substr(1) : s;
  if (q.set_str(t, 10) != 0) throw Error(ErrorCode::PARSE, "bad rational '" + s + "'");
  if (q.get_den() == 0) throw Error(ErrorCode::PARSE, "zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace subdyn
