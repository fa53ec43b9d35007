#pragma once

#include <gmpxx.h>

#include <string>

namespace subdyn {

using Rational = mpq_class;

// Accepts "p", "p/q" and "-p/q"; result is canonicalized.
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);

}  // namespace subdyn
