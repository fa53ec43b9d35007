#pragma once

#include <climits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "subdyn/rational.hpp"

namespace subdyn {

/**
 * @brief Description of the ground field: the reals with a zero tolerance, or Q_p
 * at a fixed number of p-adic digits of relative precision.
 */
struct Field {
  enum class Kind { REAL, PADIC };
  Kind kind = Kind::REAL;
  long p = 0;
  int digits = 0;
  double tol = 1e-10;  // relative zero tolerance (REAL); p^{-(digits-2)} for PADIC
  mpz_class modulus;   // p^digits

  bool is_real() const { return kind == Kind::REAL; }
  // |pi| for the uniformizer; 1 over the reals by convention.
  double uniformizer_abs() const { return is_real() ? 1.0 : 1.0 / static_cast<double>(p); }
  std::string str() const;
};
using FieldPtr = std::shared_ptr<const Field>;

FieldPtr real_field(double tol = 1e-10);
FieldPtr padic_field(long p, int digits);
bool same_field(const Field& a, const Field& b);

class Scalar {
 public:
  static constexpr long INF = LONG_MAX;

  Scalar() = default;
  Scalar(FieldPtr f, double x);  // REAL only
  static Scalar zero(FieldPtr f);
  static Scalar one(FieldPtr f);
  static Scalar from_int(FieldPtr f, long x);
  static Scalar from_rational(FieldPtr f, const Rational& q);
  // PADIC: p^val * unit with unit a p-adic unit given modulo p^digits.
  static Scalar padic(FieldPtr f, long val, const mpz_class& unit);

  const FieldPtr& field() const { return f_; }
  bool is_zero() const;
  double abs() const;
  long valuation() const { return val_; }  // PADIC
  double real() const { return r_; }      // REAL
  const mpz_class& unit() const { return unit_; }
  // Integer representative p^val * unit for integral PADIC values (val >= 0), else throws.
  mpz_class integral_repr() const;
  std::string str() const;

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
  Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
  Scalar& operator*=(const Scalar& b) { return *this = *this * b; }
  // Equal at working precision (REAL: within tol relative to the larger magnitude).
  bool near(const Scalar& b) const;

 private:
  FieldPtr f_;
  double r_ = 0;
  long val_ = INF;
  mpz_class unit_;
};

// Uniform sample: REAL standard Gaussian; PADIC an integer with uniform random digits.
Scalar random_scalar(const FieldPtr& f, std::mt19937_64& rng);

}  // namespace subdyn
