#include "subdyn/scalar.hpp"

#include <cmath>
#include <sstream>

#include "subdyn/error.hpp"

namespace subdyn {

namespace {

void require_same(const Scalar& a, const Scalar& b) {
  if (!a.field() || !b.field() || !same_field(*a.field(), *b.field()))
    throw Error(ErrorCode::FIELD_MISMATCH, "scalars over different fields");
}

// Splits x = p^k * u with u prime to p; x must be nonzero.
long split_valuation(mpz_class& x, long p) {
  long k = 0;
  mpz_class q, r;
  for (;;) {
    mpz_fdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(p));
    if (r != 0) return k;
    x = q;
    ++k;
  }
}

mpz_class reduce_mod(const mpz_class& x, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return r;
}

}  // namespace

std::string Field::str() const {
  if (is_real()) return "real";
  return "padic(p=" + std::to_string(p) + ",digits=" + std::to_string(digits) + ")";
}

FieldPtr real_field(double tol) {
  auto f = std::make_shared<Field>();
  f->kind = Field::Kind::REAL;
  f->tol = tol;
  return f;
}

FieldPtr padic_field(long p, int digits) {
  if (p < 2) throw Error(ErrorCode::PRECONDITION, "p must be a prime >= 2");
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) throw Error(ErrorCode::PRECONDITION, "p must be prime");
  if (digits < 2) throw Error(ErrorCode::PRECONDITION, "need at least two p-adic digits");
  auto f = std::make_shared<Field>();
  f->kind = Field::Kind::PADIC;
  f->p = p;
  f->digits = digits;
  mpz_ui_pow_ui(f->modulus.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(digits));
  f->tol = std::pow(static_cast<double>(p), -(digits - 2));
  return f;
}

bool same_field(const Field& a, const Field& b) {
  return a.kind == b.kind && a.p == b.p && a.digits == b.digits;
}

Scalar::Scalar(FieldPtr f, double x) : f_(std::move(f)), r_(x) {
  if (!f_->is_real()) throw Error(ErrorCode::FIELD_MISMATCH, "double literal for a p-adic field");
}

Scalar Scalar::zero(FieldPtr f) {
  Scalar s;
  s.f_ = std::move(f);
  return s;
}

Scalar Scalar::one(FieldPtr f) { return from_int(std::move(f), 1); }

Scalar Scalar::from_int(FieldPtr f, long x) { return from_rational(std::move(f), Rational(x)); }

Scalar Scalar::from_rational(FieldPtr f, const Rational& q) {
  Scalar s;
  s.f_ = f;
  if (f->is_real()) {
    s.r_ = q.get_d();
    return s;
  }
  if (q == 0) return s;
  mpz_class num = q.get_num(), den = q.get_den();
  long a = split_valuation(num, f->p);
  long b = split_valuation(den, f->p);
  mpz_class inv;
  mpz_class d = reduce_mod(den, f->modulus);
  mpz_invert(inv.get_mpz_t(), d.get_mpz_t(), f->modulus.get_mpz_t());
  s.val_ = a - b;
  s.unit_ = reduce_mod(num * inv, f->modulus);
  return s;
}

Scalar Scalar::padic(FieldPtr f, long val, const mpz_class& unit) {
  Scalar s;
  s.f_ = f;
  mpz_class u = reduce_mod(unit, f->modulus);
  if (u == 0) return s;
  long k = split_valuation(u, f->p);
  s.val_ = val + k;
  s.unit_ = reduce_mod(u, f->modulus);
  return s;
}

bool Scalar::is_zero() const { return f_->is_real() ? r_ == 0.0 : val_ == INF; }

double Scalar::abs() const {
  if (f_->is_real()) return std::fabs(r_);
  if (val_ == INF) return 0.0;
  return std::pow(static_cast<double>(f_->p), static_cast<double>(-val_));
}

mpz_class Scalar::integral_repr() const {
  if (f_->is_real()) throw Error(ErrorCode::FIELD_MISMATCH, "integral representative needs a p-adic scalar");
  if (val_ == INF) return 0;
  if (val_ < 0) throw Error(ErrorCode::PRECONDITION, "scalar is not integral");
  mpz_class pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(f_->p), static_cast<unsigned long>(val_));
  return pk * unit_;
}

std::string Scalar::str() const {
  std::ostringstream os;
  if (f_->is_real()) {
    os.precision(17);
    os << r_;
    return os.str();
  }
  if (val_ == INF) return "0";
  os << f_->p << "^" << val_ << "*" << unit_.get_str();
  return os.str();
}

Scalar Scalar::operator-() const {
  Scalar s = *this;
  if (f_->is_real()) {
    s.r_ = -r_;
  } else if (val_ != INF) {
    s.unit_ = reduce_mod(-unit_, f_->modulus);
  }
  return s;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  require_same(a, b);
  if (a.f_->is_real()) return Scalar(a.f_, a.r_ + b.r_);
  if (a.val_ == Scalar::INF) return b;
  if (b.val_ == Scalar::INF) return a;
  const Scalar& lo = a.val_ <= b.val_ ? a : b;
  const Scalar& hi = a.val_ <= b.val_ ? b : a;
  long gap = hi.val_ - lo.val_;
  if (gap >= a.f_->digits) return lo;
  mpz_class pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(a.f_->p), static_cast<unsigned long>(gap));
  return Scalar::padic(a.f_, lo.val_, lo.unit_ + pk * hi.unit_);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  require_same(a, b);
  if (a.f_->is_real()) return Scalar(a.f_, a.r_ * b.r_);
  if (a.val_ == Scalar::INF || b.val_ == Scalar::INF) return Scalar::zero(a.f_);
  Scalar s;
  s.f_ = a.f_;
  s.val_ = a.val_ + b.val_;
  s.unit_ = reduce_mod(a.unit_ * b.unit_, a.f_->modulus);
  return s;
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  require_same(a, b);
  if (b.is_zero()) throw Error(ErrorCode::SINGULAR_AT_PRECISION, "division by zero");
  if (a.f_->is_real()) return Scalar(a.f_, a.r_ / b.r_);
  if (a.val_ == Scalar::INF) return a;
  mpz_class inv;
  mpz_invert(inv.get_mpz_t(), b.unit_.get_mpz_t(), a.f_->modulus.get_mpz_t());
  Scalar s;
  s.f_ = a.f_;
  s.val_ = a.val_ - b.val_;
  s.unit_ = reduce_mod(a.unit_ * inv, a.f_->modulus);
  return s;
}

bool Scalar::near(const Scalar& b) const {
  require_same(*this, b);
  if (f_->is_real()) {
    double scale = std::max({std::fabs(r_), std::fabs(b.r_), 1e-300});
    return std::fabs(r_ - b.r_) <= f_->tol * scale;
  }
  Scalar d = *this - b;
  if (d.is_zero()) return true;
  double scale = std::max(abs(), b.abs());
  return d.abs() <= f_->tol * scale;
}

Scalar random_scalar(const FieldPtr& f, std::mt19937_64& rng) {
  if (f->is_real()) {
    std::normal_distribution<double> g(0.0, 1.0);
    return Scalar(f, g(rng));
  }
  std::uniform_int_distribution<long> digit(0, f->p - 1);
  mpz_class x = 0, pk = 1;
  for (int i = 0; i < f->digits; ++i) {
    x += pk * digit(rng);
    pk *= f->p;
  }
  return Scalar::padic(f, 0, x);
}

}  // namespace subdyn
