#include "subdyn/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "subdyn/error.hpp"

namespace subdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_compatible(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::PRECONDITION, "dimension mismatch");
  if (a.empty()) throw Error(ErrorCode::PRECONDITION, "empty vector");
  if (!same_field(*a[0].field(), *b[0].field())) throw Error(ErrorCode::FIELD_MISMATCH, "field mismatch");
}

// Multiplication by p^k as a scalar.
Scalar p_power(const FieldPtr& f, long k) { return Scalar::padic(f, k, 1); }

// Index of the coordinate used for normalization: largest |x_i|, first among ties.
int leading_index(const Vec& v) {
  int best = -1;
  double m = 0;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    double a = v[i].abs();
    if (a > m) {
      m = a;
      best = i;
    }
  }
  return best;
}

Vec normalize_vec(const Vec& v) {
  int k = leading_index(v);
  if (k < 0) throw Error(ErrorCode::PRECONDITION, "zero vector has no projective class");
  const FieldPtr& f = v[0].field();
  Vec out(v.size());
  if (f->is_real()) {
    double nv = norm(v);
    double s = (v[k].real() < 0 ? -1.0 : 1.0) / nv;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Scalar(f, v[i].real() * s);
  } else {
    Scalar inv = Scalar::one(f) / v[k];
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  }
  return out;
}

// Sum for real distances, max for ultrametric ones.
double combine(const FieldPtr& f, double a, double b) { return f->is_real() ? a + b : std::max(a, b); }

double relative_zero(const FieldPtr& f) { return f->is_real() ? 1e-13 : 0.0; }

}  // namespace

// ---------------------------------------------------------------- matrices

Mat::Mat(FieldPtr f, int n) : f_(std::move(f)), n_(n), a_(static_cast<std::size_t>(n) * n, Scalar::zero(f_)) {}

Mat Mat::identity(FieldPtr f, int n) {
  Mat m(f, n);
  for (int i = 0; i < n; ++i) m(i, i) = Scalar::one(f);
  return m;
}

Mat Mat::from_rationals(FieldPtr f, const RatMat& m) {
  int n = static_cast<int>(m.size());
  Mat out(f, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(m[i].size()) != n) throw Error(ErrorCode::PARSE, "matrix is not square");
    for (int j = 0; j < n; ++j) out(i, j) = Scalar::from_rational(f, m[i][j]);
  }
  return out;
}

Mat Mat::from_doubles(FieldPtr f, const std::vector<std::vector<double>>& m) {
  int n = static_cast<int>(m.size());
  Mat out(f, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = Scalar(f, m[i][j]);
  return out;
}

Mat Mat::diagonal(const Vec& d) {
  Mat m(d.at(0).field(), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Mat Mat::operator*(const Mat& b) const {
  if (n_ != b.n_) throw Error(ErrorCode::PRECONDITION, "dimension mismatch");
  if (!same_field(*f_, *b.f_)) throw Error(ErrorCode::FIELD_MISMATCH, "field mismatch");
  Mat c(f_, n_);
  if (f_->is_real()) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double s = 0;
        for (int k = 0; k < n_; ++k) s += (*this)(i, k).real() * b(k, j).real();
        c(i, j) = Scalar(f_, s);
      }
    return c;
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Scalar s = Scalar::zero(f_);
      for (int k = 0; k < n_; ++k) s += (*this)(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Vec Mat::apply(const Vec& v) const {
  Vec out(n_, Scalar::zero(f_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

Vec Mat::apply_dual(const Vec& f) const {
  Vec out(n_, Scalar::zero(f_));
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) out[j] += f[i] * (*this)(i, j);
  return out;
}

Mat Mat::transpose() const {
  Mat t(f_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double Mat::max_abs() const {
  double m = 0;
  for (const auto& x : a_) m = std::max(m, x.abs());
  return m;
}

Mat Mat::inverse() const {
  Mat a = *this;
  Mat inv = identity(f_, n_);
  double scale = max_abs();
  for (int k = 0; k < n_; ++k) {
    int piv = k;
    for (int i = k + 1; i < n_; ++i)
      if (a(i, k).abs() > a(piv, k).abs()) piv = i;
    if (a(piv, k).is_zero() || a(piv, k).abs() <= relative_zero(f_) * scale)
      throw Error(ErrorCode::SINGULAR_AT_PRECISION, "matrix is singular at working precision");
    if (piv != k)
      for (int j = 0; j < n_; ++j) {
        std::swap(a(k, j), a(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    Scalar d = Scalar::one(f_) / a(k, k);
    for (int j = 0; j < n_; ++j) {
      a(k, j) *= d;
      inv(k, j) *= d;
    }
    for (int i = 0; i < n_; ++i) {
      if (i == k || a(i, k).is_zero()) continue;
      Scalar m = a(i, k);
      for (int j = 0; j < n_; ++j) {
        a(i, j) -= m * a(k, j);
        inv(i, j) -= m * inv(k, j);
      }
    }
  }
  return inv;
}

Scalar Mat::det() const {
  Mat a = *this;
  Scalar d = Scalar::one(f_);
  for (int k = 0; k < n_; ++k) {
    int piv = k;
    for (int i = k + 1; i < n_; ++i)
      if (a(i, k).abs() > a(piv, k).abs()) piv = i;
    if (a(piv, k).is_zero()) return Scalar::zero(f_);
    if (piv != k) {
      for (int j = 0; j < n_; ++j) std::swap(a(k, j), a(piv, j));
      d = -d;
    }
    d *= a(k, k);
    for (int i = k + 1; i < n_; ++i) {
      Scalar m = a(i, k) / a(k, k);
      for (int j = k; j < n_; ++j) a(i, j) -= m * a(k, j);
    }
  }
  return d;
}

Mat Mat::normalized(double* log_scale) const {
  Mat out = *this;
  if (log_scale) *log_scale = 0;
  if (f_->is_real()) {
    double m = max_abs();
    if (m == 0) return out;
    for (auto& x : out.a_) x = Scalar(f_, x.real() / m);
    if (log_scale) *log_scale = std::log(m);
    return out;
  }
  long v = Scalar::INF;
  for (const auto& x : a_) v = std::min(v, x.valuation());
  if (v == Scalar::INF || v == 0) return out;
  Scalar s = p_power(f_, -v);
  for (auto& x : out.a_) x *= s;
  return out;
}

ProjMap::ProjMap(const Mat& m) : g(m), ginv(m.inverse()) {}

namespace {

double log_abs(const Rational& q) {
  long e1 = 0, e2 = 0;
  double m1 = mpz_get_d_2exp(&e1, q.get_num_mpz_t());
  double m2 = mpz_get_d_2exp(&e2, q.get_den_mpz_t());
  return std::log(std::fabs(m1)) - std::log(m2) + static_cast<double>(e1 - e2) * std::log(2.0);
}

// Divides by the entry of largest absolute value when it is far from 1, so that
// the conversion to double neither overflows nor underflows; returns log of the divisor.
double rat_normalize(RatMat& m) {
  Rational best = 0;
  for (const auto& row : m)
    for (const auto& x : row)
      if (abs(x) > best) best = abs(x);
  if (best == 0 || std::fabs(log_abs(best)) < 64) return 0;
  for (auto& row : m)
    for (auto& x : row) x /= best;
  return log_abs(best);
}

}  // namespace

ProjMap ProjMap::from_rationals(FieldPtr f, const RatMat& m) {
  RatMat a = m, b = rat_inverse(m);
  if (!f->is_real()) return ProjMap(Mat::from_rationals(f, a), Mat::from_rationals(f, b));
  double la = rat_normalize(a), lb = rat_normalize(b);
  return ProjMap(Mat::from_rationals(f, a), Mat::from_rationals(f, b), -la - lb);
}

ProjMap ProjMap::operator*(const ProjMap& b) const {
  double s1 = 0, s2 = 0;
  Mat m = (g * b.g).normalized(&s1);
  Mat mi = (b.ginv * ginv).normalized(&s2);
  return ProjMap(m, mi, log_lambda + b.log_lambda - s1 - s2);
}

ProjMap ProjMap::power(long k) const {
  ProjMap base = k < 0 ? inverse() : *this;
  unsigned long e = static_cast<unsigned long>(k < 0 ? -k : k);
  ProjMap acc(Mat::identity(field(), n()), Mat::identity(field(), n()));
  while (e) {
    if (e & 1) acc = acc * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return acc;
}

RatMat rat_identity(int n) {
  RatMat m(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

RatMat rat_mul(const RatMat& a, const RatMat& b) {
  std::size_t n = a.size();
  RatMat c(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

RatMat rat_inverse(const RatMat& m) {
  int n = static_cast<int>(m.size());
  RatMat a = m, inv = rat_identity(n);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    while (piv < n && a[piv][k] == 0) ++piv;
    if (piv == n) throw Error(ErrorCode::SINGULAR_AT_PRECISION, "rational matrix is singular");
    std::swap(a[k], a[piv]);
    std::swap(inv[k], inv[piv]);
    Rational d = a[k][k];
    for (int j = 0; j < n; ++j) {
      a[k][j] /= d;
      inv[k][j] /= d;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k || a[i][k] == 0) continue;
      Rational f = a[i][k];
      for (int j = 0; j < n; ++j) {
        a[i][j] -= f * a[k][j];
        inv[i][j] -= f * inv[k][j];
      }
    }
  }
  return inv;
}

RatMat rat_power(const RatMat& a, long k) {
  RatMat base = k < 0 ? rat_inverse(a) : a;
  unsigned long e = static_cast<unsigned long>(k < 0 ? -k : k);
  RatMat acc = rat_identity(static_cast<int>(a.size()));
  while (e) {
    if (e & 1) acc = rat_mul(acc, base);
    e >>= 1;
    if (e) base = rat_mul(base, base);
  }
  return acc;
}

RatMat rat_evaluate(const Word& w, const std::vector<RatMat>& images) {
  if (images.empty()) throw Error(ErrorCode::PRECONDITION, "empty assignment");
  if (static_cast<int>(images.size()) < w.rank()) throw Error(ErrorCode::RANK_MISMATCH, "assignment too short");
  std::vector<RatMat> inverses(images.size());
  std::vector<bool> have(images.size(), false);
  RatMat acc = rat_identity(static_cast<int>(images[0].size()));
  for (Letter l : w.letters()) {
    std::size_t i = static_cast<std::size_t>(std::abs(l) - 1);
    if (l > 0) {
      acc = rat_mul(acc, images[i]);
    } else {
      if (!have[i]) {
        inverses[i] = rat_inverse(images[i]);
        have[i] = true;
      }
      acc = rat_mul(acc, inverses[i]);
    }
  }
  return acc;
}

// ---------------------------------------------------------------- metric

double norm(const Vec& v) {
  if (v.empty()) return 0;
  if (v[0].field()->is_real()) {
    double s = 0;
    for (const auto& x : v) s += x.real() * x.real();
    return std::sqrt(s);
  }
  double m = 0;
  for (const auto& x : v) m = std::max(m, x.abs());
  return m;
}

double wedge_norm(const Vec& a, const Vec& b) {
  require_compatible(a, b);
  std::size_t n = a.size();
  if (a[0].field()->is_real()) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double m = a[i].real() * b[j].real() - a[j].real() * b[i].real();
        s += m * m;
      }
    return std::sqrt(s);
  }
  double m = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, (a[i] * b[j] - a[j] * b[i]).abs());
  return m;
}

Scalar pair(const Vec& f, const Vec& x) {
  require_compatible(f, x);
  Scalar s = Scalar::zero(f[0].field());
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * x[i];
  return s;
}

ProjPoint make_point(const Vec& v) { return ProjPoint{normalize_vec(v)}; }
ProjHyperplane make_hyperplane(const Vec& f) { return ProjHyperplane{normalize_vec(f)}; }

ProjPoint point_from_rationals(FieldPtr f, const std::vector<Rational>& v) {
  Vec x;
  for (const auto& q : v) x.push_back(Scalar::from_rational(f, q));
  return make_point(x);
}

ProjHyperplane hyperplane_from_rationals(FieldPtr f, const std::vector<Rational>& v) {
  Vec x;
  for (const auto& q : v) x.push_back(Scalar::from_rational(f, q));
  return make_hyperplane(x);
}

ProjPoint dual(const ProjHyperplane& h) { return ProjPoint{h.f}; }

ProjPoint image(const ProjMap& g, const ProjPoint& p) { return make_point(g.g.apply(p.v)); }

ProjHyperplane image(const ProjMap& g, const ProjHyperplane& h) { return make_hyperplane(g.ginv.apply_dual(h.f)); }

double proj_dist(const ProjPoint& p, const ProjPoint& q) {
  double d = wedge_norm(p.v, q.v) / (norm(p.v) * norm(q.v));
  return std::min(d, 1.0);
}

double dist_point_hyperplane(const ProjPoint& p, const ProjHyperplane& h) {
  double d = pair(h.f, p.v).abs() / (norm(h.f) * norm(p.v));
  return std::min(d, 1.0);
}

double hausdorff_dist(const ProjHyperplane& a, const ProjHyperplane& b) {
  double d = wedge_norm(a.f, b.f) / (norm(a.f) * norm(b.f));
  return std::min(d, 1.0);
}

// ---------------------------------------------------------------- Cartan

namespace {

CartanData cartan_real(const Mat& g, bool require_invertible = true) {
  int n = g.n();
  const FieldPtr& f = g.field();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(i, j).real();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (require_invertible && s(n - 1) <= relative_zero(f) * s(0))
    throw Error(ErrorCode::SINGULAR_AT_PRECISION, "matrix is singular at working precision");
  CartanData c;
  for (int i = 0; i < n; ++i) c.abs.push_back(s(i));
  Vec top(n), rep(n);
  for (int i = 0; i < n; ++i) {
    top[i] = Scalar(f, svd.matrixU()(i, 0));
    rep[i] = Scalar(f, svd.matrixV()(i, 0));
  }
  c.top = make_point(top);
  c.repelling = make_hyperplane(rep);
  return c;
}

// Smith form P g Q = D with P, Q integral invertible, pivots of least valuation first.
CartanData cartan_padic(const Mat& g) {
  int n = g.n();
  const FieldPtr& f = g.field();
  Mat a = g;
  Mat P = Mat::identity(f, n), Q = Mat::identity(f, n);
  CartanData c;
  for (int k = 0; k < n; ++k) {
    int bi = -1, bj = -1;
    long best = Scalar::INF;
    for (int i = k; i < n; ++i)
      for (int j = k; j < n; ++j)
        if (a(i, j).valuation() < best) {
          best = a(i, j).valuation();
          bi = i;
          bj = j;
        }
    if (bi < 0) throw Error(ErrorCode::SINGULAR_AT_PRECISION, "matrix is singular at working precision");
    if (bi != k)
      for (int j = 0; j < n; ++j) {
        std::swap(a(k, j), a(bi, j));
        std::swap(P(k, j), P(bi, j));
      }
    if (bj != k)
      for (int i = 0; i < n; ++i) {
        std::swap(a(i, k), a(i, bj));
        std::swap(Q(i, k), Q(i, bj));
      }
    Scalar piv = a(k, k);
    for (int i = k + 1; i < n; ++i) {
      if (a(i, k).is_zero()) continue;
      Scalar m = a(i, k) / piv;
      for (int j = 0; j < n; ++j) {
        a(i, j) -= m * a(k, j);
        P(i, j) -= m * P(k, j);
      }
    }
    for (int j = k + 1; j < n; ++j) {
      if (a(k, j).is_zero()) continue;
      Scalar m = a(k, j) / piv;
      for (int i = 0; i < n; ++i) {
        a(i, j) -= m * a(i, k);
        Q(i, j) -= m * Q(i, k);
      }
    }
    c.valuations.push_back(piv.valuation());
    c.abs.push_back(piv.abs());
  }
  Mat Pinv = P.inverse(), Qinv = Q.inverse();
  Vec top(n), rep(n);
  for (int i = 0; i < n; ++i) {
    top[i] = Pinv(i, 0);
    rep[i] = Qinv(0, i);
  }
  c.top = make_point(top);
  c.repelling = make_hyperplane(rep);
  return c;
}

}  // namespace

CartanData cartan(const Mat& g) { return g.field()->is_real() ? cartan_real(g) : cartan_padic(g); }
CartanData cartan(const ProjMap& g) {
  if (!g.field()->is_real()) return cartan_padic(g.g);
  int n = g.n();
  auto svals = [n](const Mat& m) {
    Eigen::MatrixXd e(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e(i, j) = m(i, j).real();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues();
  };
  Eigen::VectorXd sg = svals(g.g);
  Eigen::VectorXd si = svals(g.ginv);
  // Small singular values of g are inverse to large ones of ginv up to lambda.
  CartanData c = cartan_real(g.g, false);
  double lambda_log = g.log_lambda;
  for (int k = 0; k < n; ++k) {
    if (sg(k) >= 1e-8 * sg(0)) continue;
    double via_inverse = std::exp(lambda_log - std::log(si(n - 1 - k)));
    c.abs[k] = via_inverse;
  }
  return c;
}

double lipschitz_bound(const ProjMap& g) {
  CartanData c = cartan(g);
  double r = c.abs.front() / c.abs.back();
  return r * r;
}

double contraction_sup(const FieldPtr& f, double ratio, double delta) {
  if (delta <= 0) return 1.0;
  if (!f->is_real()) return std::min(1.0, ratio / delta);
  if (delta >= 1) return 0.0;
  double s = std::sqrt(1 - delta * delta);
  return std::min(1.0, ratio * s / std::sqrt(delta * delta + ratio * ratio * s * s));
}

namespace {

double gap_ratio(const FieldPtr& f, const CartanData& c) {
  if (c.abs.size() < 2) throw Error(ErrorCode::NOT_CONTRACTING, "dimension one");
  double ratio = c.abs[1] / c.abs[0];
  bool flat = f->is_real() ? ratio >= 1 - f->tol : c.valuations[1] == c.valuations[0];
  if (flat) throw Error(ErrorCode::NOT_CONTRACTING, "no gap between |a_1| and |a_2| at working precision");
  return ratio;
}

}  // namespace

ContractionData contraction_data(const ProjMap& g, double c) {
  CartanData cd = cartan(g);
  ContractionData out;
  out.ratio = gap_ratio(g.field(), cd);
  out.c = c;
  out.eps_est = c * std::sqrt(out.ratio);
  out.v = cd.top;
  out.H = cd.repelling;
  return out;
}

// ---------------------------------------------------------------- sampling

std::uint64_t sample_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ProjPoint random_point(const FieldPtr& f, int n, std::mt19937_64& rng) {
  for (;;) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = random_scalar(f, rng);
    if (leading_index(v) >= 0) return make_point(v);
  }
}

namespace {

// A real point at distance exactly eps from H, in a random direction.
ProjPoint boundary_point(const ProjHyperplane& H, double eps, std::mt19937_64& rng) {
  const FieldPtr& f = H.f[0].field();
  int n = static_cast<int>(H.f.size());
  double fn = norm(H.f);
  for (;;) {
    ProjPoint y = random_point(f, n, rng);
    double fy = pair(H.f, y.v).real();
    std::vector<double> h(n), nrm(n);
    double hn = 0;
    for (int i = 0; i < n; ++i) {
      nrm[i] = H.f[i].real() / fn;
      h[i] = y.v[i].real() - fy * H.f[i].real() / (fn * fn);
      hn += h[i] * h[i];
    }
    hn = std::sqrt(hn);
    if (hn < 1e-8) continue;
    double sgn = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = Scalar(f, std::sqrt(1 - eps * eps) * h[i] / hn + sgn * eps * nrm[i]);
    return make_point(x);
  }
}

}  // namespace

ContractionCheck is_contracting(const ProjMap& g, double eps, const ProjPoint& v, const ProjHyperplane& H,
                                long budget, std::uint64_t seed) {
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::PRECONDITION, "eps must lie in (0,1)");
  const FieldPtr& f = g.field();
  ContractionCheck out;
  for (long i = 0; i < budget; ++i) {
    std::mt19937_64 rng(sample_seed(seed, static_cast<std::uint64_t>(i)));
    ProjPoint x;
    if (f->is_real() && i % 2 == 1) {
      x = boundary_point(H, eps, rng);
    } else {
      bool found = false;
      for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
        x = random_point(f, g.n(), rng);
        found = dist_point_hyperplane(x, H) >= eps;
      }
      if (!found) continue;
    }
    ++out.samples;
    double d = proj_dist(image(g, x), v);
    out.max_image_dist = std::max(out.max_image_dist, d);
    if (d >= eps) {
      out.ok = false;
      out.witness = x;
      out.witness_dist = d;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- fixed data

FixedData canonical_fixed_data(const ProjMap& g, double tol, int maxiter) {
  CartanData cd = cartan(g);
  gap_ratio(g.field(), cd);
  FixedData out;
  const double stop = g.field()->is_real() ? tol * 1e-3 : 0.0;

  // Stops at the stop threshold, or once below tol the step stagnates at rounding level.
  ProjPoint x = cd.top;
  int it = 0;
  double prev = 2;
  for (; it < maxiter; ++it) {
    ProjPoint y = image(g, x);
    double d = proj_dist(x, y);
    x = y;
    if (d <= stop || (d <= tol && d >= prev)) break;
    prev = d;
  }
  ProjHyperplane h = cd.repelling;
  int jt = 0;
  prev = 2;
  for (; jt < maxiter; ++jt) {
    ProjHyperplane k = make_hyperplane(g.g.apply_dual(h.f));
    double d = hausdorff_dist(h, k);
    h = k;
    if (d <= stop || (d <= tol && d >= prev)) break;
    prev = d;
  }
  out.v = x;
  out.H = h;
  out.iterations = std::max(it, jt);
  out.point_residual = proj_dist(image(g, x), x);
  // Measured as Hd(g^-1 H, H): f g is well conditioned where f ginv is not.
  out.hyperplane_residual = hausdorff_dist(make_hyperplane(g.g.apply_dual(h.f)), h);
  if (out.point_residual > tol || out.hyperplane_residual > tol)
    throw Error(ErrorCode::NO_CONVERGENCE, "power iteration did not converge in " + std::to_string(maxiter) + " steps");
  return out;
}

const char* to_string(ProofMode m) {
  switch (m) {
    case ProofMode::BOUND: return "BOUND";
    case ProofMode::SAMPLED: return "SAMPLED";
    case ProofMode::EXACT: return "EXACT";
  }
  return "?";
}

namespace {

// Cartan estimate of sup d(gx, vbar) over d(x, Hbar) >= eps.
double bound_image(const ProjMap& g, const ProjPoint& vbar, const ProjHyperplane& Hbar, double eps) {
  const FieldPtr& f = g.field();
  CartanData cd = cartan(g);
  double ratio = cd.abs[1] / cd.abs[0];
  double off_v = proj_dist(cd.top, vbar);
  double off_h = hausdorff_dist(cd.repelling, Hbar);
  double delta = f->is_real() ? eps - off_h : (off_h < eps ? eps : 0.0);
  if (delta <= 0) return kInf;
  return combine(f, off_v, contraction_sup(f, ratio, delta));
}

}  // namespace

ProximalityCertificate is_very_proximal(const ProjMap& g, double r, double eps, long budget, std::uint64_t seed) {
  if (!(r > 2 * eps) || !(eps > 0)) throw Error(ErrorCode::PRECONDITION, "need r > 2 eps > 0");
  ProximalityCertificate c;
  c.r = r;
  c.eps = eps;
  c.budget = budget;
  c.seed = seed;
  ProjMap ginv = g.inverse();

  FixedData fd, fdi;
  try {
    fd = canonical_fixed_data(g);
    fdi = canonical_fixed_data(ginv);
  } catch (const Error& e) {
    c.failure = e.what();
    if (e.code() == ErrorCode::NOT_CONTRACTING) {
      c.falsified = true;
      return c;
    }
    // No usable fixed data: fall back to the Cartan data and try to falsify.
    try {
      ContractionData cd = contraction_data(g, 1);
      c.v = cd.v;
      c.H = cd.H;
      c.mode = ProofMode::SAMPLED;
      ContractionCheck chk = is_contracting(g, eps, cd.v, cd.H, budget, seed);
      c.max_image_dist = chk.max_image_dist;
      if (!chk.ok) {
        c.falsified = true;
        c.witness = chk.witness;
        c.failure += "; contraction falsified";
      }
    } catch (const Error& e2) {
      c.falsified = e2.code() == ErrorCode::NOT_CONTRACTING;
      c.failure += std::string("; ") + e2.what();
    }
    return c;
  }
  c.v = fd.v;
  c.H = fd.H;
  c.v_inv = fdi.v;
  c.H_inv = fdi.H;
  c.d_vH = dist_point_hyperplane(fd.v, fd.H);
  c.d_vH_inv = dist_point_hyperplane(fdi.v, fdi.H);
  c.margin_a_r = c.d_vH - 2 * eps;
  c.margin_a_ainv = proj_dist(fd.v, fdi.v) - 2 * eps;
  c.margin_ainv_rinv = c.d_vH_inv - 2 * eps;
  if (c.d_vH < r || c.d_vH_inv < r) {
    c.falsified = true;
    c.failure = "d(v,H) < r";
    return c;
  }
  if (c.margin_a_ainv < 0) {
    c.falsified = true;
    c.failure = "attracting neighborhoods of g and g^-1 intersect";
    return c;
  }
  c.bound_image = bound_image(g, fd.v, fd.H, eps);
  c.bound_image_inv = bound_image(ginv, fdi.v, fdi.H, eps);
  if (c.bound_image < eps && c.bound_image_inv < eps) {
    c.mode = ProofMode::BOUND;
    c.ok = true;
    return c;
  }
  c.mode = ProofMode::SAMPLED;
  ContractionCheck a = is_contracting(g, eps, fd.v, fd.H, budget, seed);
  ContractionCheck b = is_contracting(ginv, eps, fdi.v, fdi.H, budget, sample_seed(seed, 0xabcdefULL));
  c.max_image_dist = a.max_image_dist;
  c.max_image_dist_inv = b.max_image_dist;
  if (!a.ok || !b.ok) {
    c.falsified = true;
    c.witness = !a.ok ? a.witness : b.witness;
    c.failure = !a.ok ? "contraction of g falsified" : "contraction of g^-1 falsified";
    return c;
  }
  if (a.samples == 0 || b.samples == 0) {
    c.failure = "bound inconclusive and no samples drawn";
    return c;
  }
  c.ok = true;
  return c;
}

PowersDecay powers_decay(const ProjMap& g, int n_max, double c) {
  FixedData base = canonical_fixed_data(g);
  PowersDecay out;
  for (int n = 1; n <= n_max; ++n) {
    ProjMap gn = g.power(n);
    ContractionData cd = contraction_data(gn, c);
    if (!out.eps.empty() && !(cd.eps_est < out.eps.back())) out.strictly_decreasing = false;
    out.eps.push_back(cd.eps_est);
    FixedData fd = canonical_fixed_data(gn);
    out.max_point_dev = std::max(out.max_point_dev, proj_dist(fd.v, base.v));
    out.max_hyperplane_dev = std::max(out.max_hyperplane_dev, hausdorff_dist(fd.H, base.H));
  }
  return out;
}

namespace {

// A point within distance radius of the center.
ProjPoint point_near(const ProjPoint& c, double radius, std::mt19937_64& rng) {
  const FieldPtr& f = c.v[0].field();
  int n = static_cast<int>(c.v.size());
  if (f->is_real()) {
    std::normal_distribution<double> gauss(0, 1);
    std::vector<double> u(n);
    double dot = 0, un = 0;
    for (int i = 0; i < n; ++i) {
      u[i] = gauss(rng);
      dot += u[i] * c.v[i].real();
    }
    for (int i = 0; i < n; ++i) {
      u[i] -= dot * c.v[i].real();
      un += u[i] * u[i];
    }
    un = std::sqrt(un);
    double theta = std::uniform_real_distribution<double>(0, std::asin(std::min(radius, 1.0)))(rng);
    Vec x(n);
    for (int i = 0; i < n; ++i)
      x[i] = Scalar(f, std::cos(theta) * c.v[i].real() + (un > 0 ? std::sin(theta) * u[i] / un : 0.0));
    return make_point(x);
  }
  long k = 0;
  while (std::pow(static_cast<double>(f->p), -static_cast<double>(k)) > radius) ++k;
  Scalar pk = p_power(f, k);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = c.v[i] + pk * random_scalar(f, rng);
  return make_point(x);
}

}  // namespace

double local_lipschitz(const ProjMap& g, const ProjPoint& center, double radius, long samples, std::uint64_t seed) {
  double best = 0;
  for (long i = 0; i < samples; ++i) {
    std::mt19937_64 rng(sample_seed(seed, static_cast<std::uint64_t>(i)));
    ProjPoint x = point_near(center, radius, rng);
    ProjPoint y = point_near(center, radius, rng);
    double d = proj_dist(x, y);
    if (d <= 1e-14) continue;
    best = std::max(best, proj_dist(image(g, x), image(g, y)) / d);
  }
  return best;
}

Calibration calibrate(const FieldPtr& f, int n, long samples, std::uint64_t seed) {
  Calibration cal;
  cal.samples = samples;
  cal.seed = seed;
  for (long i = 0; i < samples; ++i) {
    std::mt19937_64 rng(sample_seed(seed, static_cast<std::uint64_t>(i)));
    Mat m(f, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m(a, b) = random_scalar(f, rng);
    ProjMap g;
    ContractionData cd;
    try {
      g = ProjMap(m);
      cd = contraction_data(g, 1);
    } catch (const Error&) {
      continue;
    }
    double eps = cd.eps_est;
    if (eps >= 0.5) continue;
    // Lipschitz constant at a point at distance d from H.
    double d = std::uniform_real_distribution<double>(2 * eps, 1.0)(rng);
    ProjPoint x = f->is_real() ? boundary_point(cd.H, std::min(d, 0.999), rng) : random_point(f, n, rng);
    double dx = dist_point_hyperplane(x, cd.H);
    if (dx < 2 * eps) continue;
    double lip = local_lipschitz(g, x, dx / 8, 16, sample_seed(seed, ~static_cast<std::uint64_t>(i)));
    cal.fitted_c = std::max(cal.fitted_c, lip * dx * dx / (eps * eps));
    try {
      ContractionData c3 = contraction_data(g.power(3), 1);
      cal.fitted_c2 = std::max(cal.fitted_c2, c3.eps_est / eps);
    } catch (const Error&) {
    }
  }
  return cal;
}

// ---------------------------------------------------------------- general position

namespace {

int rank_of(const std::vector<Vec>& rows) {
  if (rows.empty()) return 0;
  std::vector<Vec> a;
  for (const auto& r : rows) a.push_back(normalize_vec(r));
  const FieldPtr& f = a[0][0].field();
  double thr = f->is_real() ? 1e-9 : f->tol;
  int n = static_cast<int>(a[0].size()), m = static_cast<int>(a.size()), rank = 0;
  for (int col = 0; col < n && rank < m; ++col) {
    int piv = rank;
    for (int i = rank + 1; i < m; ++i)
      if (a[i][col].abs() > a[piv][col].abs()) piv = i;
    if (a[piv][col].abs() <= thr) continue;
    std::swap(a[piv], a[rank]);
    for (int i = rank + 1; i < m; ++i) {
      Scalar t = a[i][col] / a[rank][col];
      for (int j = col; j < n; ++j) a[i][j] -= t * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

bool all_subsets_independent(const std::vector<ProjPoint>& pts, int k) {
  int m = static_cast<int>(pts.size());
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    std::vector<Vec> rows;
    for (int i : idx) rows.push_back(pts[i].v);
    if (rank_of(rows) != k) return false;
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return true;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

bool general_position(const std::vector<ProjPoint>& points) {
  if (points.empty()) return true;
  int n = static_cast<int>(points[0].v.size());
  int m = static_cast<int>(points.size());
  return all_subsets_independent(points, std::min(n, m));
}

bool projectively_trivial(const Mat& g) {
  double m = g.max_abs();
  double thr = g.field()->is_real() ? g.field()->tol * m : g.field()->tol * m;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      if (i != j && g(i, j).abs() > thr) return false;
      if (i == j && (g(i, i) - g(0, 0)).abs() > thr) return false;
    }
  return true;
}

std::vector<ProjPoint> orbit_general_position(const std::vector<ProjMap>& gens, const ProjPoint& v, long budget) {
  int n = static_cast<int>(v.v.size());
  const FieldPtr& f = v.v[0].field();
  double same = f->is_real() ? 1e-9 : f->tol;
  std::vector<ProjMap> moves;
  for (const auto& g : gens) {
    moves.push_back(g);
    moves.push_back(g.inverse());
  }
  std::vector<ProjPoint> orbit{v};
  std::size_t head = 0;
  auto search = [&](std::size_t newest) -> std::vector<ProjPoint> {
    int k = n;  // companions chosen among earlier points
    if (static_cast<int>(newest) < k) return {};
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    int m = static_cast<int>(newest);
    for (;;) {
      std::vector<ProjPoint> cand;
      for (int i : idx) cand.push_back(orbit[i]);
      cand.push_back(orbit[newest]);
      if (general_position(cand)) return cand;
      int i = k - 1;
      while (i >= 0 && idx[i] == m - k + i) --i;
      if (i < 0) return {};
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  };
  while (head < orbit.size() && static_cast<long>(orbit.size()) < budget) {
    ProjPoint x = orbit[head++];
    for (const auto& g : moves) {
      ProjPoint y = image(g, x);
      bool seen = false;
      for (const auto& z : orbit)
        if (proj_dist(y, z) <= same) {
          seen = true;
          break;
        }
      if (seen) continue;
      orbit.push_back(y);
      auto found = search(orbit.size() - 1);
      if (!found.empty()) return found;
      if (static_cast<long>(orbit.size()) >= budget) break;
    }
  }
  throw Error(ErrorCode::NOT_FOUND, "no general-position subset among " + std::to_string(orbit.size()) + " orbit points");
}

}  // namespace subdyn
