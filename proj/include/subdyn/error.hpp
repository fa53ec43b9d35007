#pragma once

#include <stdexcept>
#include <string>

namespace subdyn {

enum class ErrorCode {
  GENERATOR_OUT_OF_RANGE,
  RANK_MISMATCH,
  PARSE,
  PRECONDITION,
  INFINITE_INDEX,
  NOT_NORMAL,
  NOT_ALMOST_NORMAL,
  ATOM_NOT_IN_SIGMA,
  NULL_EVENT,
  NOT_INVARIANT_EVENT,
  BOUND_EXHAUSTED,
  EMPTY_BASE,
  NULL_BASE,
  SINGULAR_AT_PRECISION,
  NOT_CONTRACTING,
  NO_CONVERGENCE,
  OVERLAP,
  RANGE_EXHAUSTED,
  DEGENERATE_POSITION,
  SEARCH_EXHAUSTED,
  NOT_FOUND,
  FIELD_MISMATCH,
};

const char* to_string(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace subdyn
