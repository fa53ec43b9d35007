#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "subdyn/rational.hpp"
#include "subdyn/scalar.hpp"
#include "subdyn/words.hpp"

namespace subdyn {

using Vec = std::vector<Scalar>;
using RatMat = std::vector<std::vector<Rational>>;

class Mat {
 public:
  Mat() = default;
  Mat(FieldPtr f, int n);  // zero matrix
  static Mat identity(FieldPtr f, int n);
  static Mat from_rationals(FieldPtr f, const RatMat& m);
  static Mat from_doubles(FieldPtr f, const std::vector<std::vector<double>>& m);
  static Mat diagonal(const Vec& d);

  int n() const { return n_; }
  const FieldPtr& field() const { return f_; }
  Scalar& operator()(int i, int j) { return a_[i * n_ + j]; }
  const Scalar& operator()(int i, int j) const { return a_[i * n_ + j]; }

  Mat operator*(const Mat& b) const;
  Vec apply(const Vec& v) const;       // g v
  Vec apply_dual(const Vec& f) const;  // f g, for a row functional f
  Mat transpose() const;
  Mat inverse() const;  // SINGULAR_AT_PRECISION
  Scalar det() const;
  // Rescaled so the largest entry has absolute value 1 (REAL) or is a unit (PADIC).
  // For REAL the natural log of the divisor is stored in log_scale when given.
  Mat normalized(double* log_scale = nullptr) const;
  double max_abs() const;

 private:
  FieldPtr f_;
  int n_ = 0;
  std::vector<Scalar> a_;
};

/**
 * @brief Invertible map of projective space, kept together with an inverse so that
 * ill-conditioned products never need a numerical inversion.
 */
struct ProjMap {
  Mat g, ginv;
  // REAL: g * ginv = exp(log_lambda) * I. Lets singular values below double resolution
  // relative to |a_1| be recovered from the inverse.
  double log_lambda = 0;

  ProjMap() = default;
  explicit ProjMap(const Mat& m);  // inverts numerically
  ProjMap(const Mat& m, const Mat& minv, double log_lambda = 0) : g(m), ginv(minv), log_lambda(log_lambda) {}
  static ProjMap from_rationals(FieldPtr f, const RatMat& m);  // exact inverse

  int n() const { return g.n(); }
  const FieldPtr& field() const { return g.field(); }
  ProjMap inverse() const { return ProjMap(ginv, g, log_lambda); }
  ProjMap operator*(const ProjMap& b) const;
  ProjMap power(long k) const;
};

// Exact rational matrix helpers used for word evaluation.
RatMat rat_identity(int n);
RatMat rat_mul(const RatMat& a, const RatMat& b);
RatMat rat_inverse(const RatMat& a);  // SINGULAR_AT_PRECISION
RatMat rat_power(const RatMat& a, long k);
// images[i] is the image of generator i+1.
RatMat rat_evaluate(const Word& w, const std::vector<RatMat>& images);

struct ProjPoint {
  Vec v;
};
struct ProjHyperplane {
  Vec f;  // the hyperplane is ker f
};

double norm(const Vec& v);  // Euclidean (REAL) or max (PADIC)
double wedge_norm(const Vec& a, const Vec& b);
Scalar pair(const Vec& f, const Vec& x);

ProjPoint make_point(const Vec& v);  // normalizes; PRECONDITION on the zero vector
ProjHyperplane make_hyperplane(const Vec& f);
ProjPoint point_from_rationals(FieldPtr f, const std::vector<Rational>& v);
ProjHyperplane hyperplane_from_rationals(FieldPtr f, const std::vector<Rational>& v);
ProjPoint dual(const ProjHyperplane& h);
ProjPoint image(const ProjMap& g, const ProjPoint& p);
ProjHyperplane image(const ProjMap& g, const ProjHyperplane& h);  // g(ker f) = ker(f g^{-1})

double proj_dist(const ProjPoint& p, const ProjPoint& q);
double dist_point_hyperplane(const ProjPoint& p, const ProjHyperplane& h);
double hausdorff_dist(const ProjHyperplane& a, const ProjHyperplane& b);

struct CartanData {
  std::vector<double> abs;         // |a_1| >= ... >= |a_n|
  std::vector<long> valuations;    // PADIC: valuations of the elementary divisors
  ProjPoint top;                   // image of the top Cartan direction
  ProjHyperplane repelling;        // span of the remaining right Cartan directions
};
CartanData cartan(const Mat& g);
CartanData cartan(const ProjMap& g);

double lipschitz_bound(const ProjMap& g);

/**
 * @brief Supremum of d(gx, v) over d(x, H) >= delta, where (v, H) is the Cartan data
 * of g and the ratio |a_2/a_1| is given. Exact for both fields.
 */
double contraction_sup(const FieldPtr& f, double ratio, double delta);

struct ContractionData {
  double eps_est = 0;
  double c = 1;
  double ratio = 0;  // |a_2/a_1|
  ProjPoint v;
  ProjHyperplane H;
};
ContractionData contraction_data(const ProjMap& g, double c);

// Per-sample seeds are derived from the root seed, so results do not depend on scheduling.
std::uint64_t sample_seed(std::uint64_t root, std::uint64_t index);
ProjPoint random_point(const FieldPtr& f, int n, std::mt19937_64& rng);

struct ContractionCheck {
  bool ok = true;  // not falsified
  long samples = 0;
  double max_image_dist = 0;
  std::optional<ProjPoint> witness;
  double witness_dist = 0;
};
// Samples x with d(x, H) >= eps and checks d(gx, v) < eps.
ContractionCheck is_contracting(const ProjMap& g, double eps, const ProjPoint& v, const ProjHyperplane& H,
                                long budget, std::uint64_t seed);

struct FixedData {
  ProjPoint v;
  ProjHyperplane H;
  double point_residual = 0;
  double hyperplane_residual = 0;
  int iterations = 0;
};
FixedData canonical_fixed_data(const ProjMap& g, double tol = 1e-12, int maxiter = 100000);

enum class ProofMode { BOUND, SAMPLED, EXACT };
const char* to_string(ProofMode m);

struct ProximalityCertificate {
  bool ok = false;
  bool falsified = false;  // ok == false with falsified == false means inconclusive
  double r = 0, eps = 0;
  ProjPoint v, v_inv;
  ProjHyperplane H, H_inv;
  ProofMode mode = ProofMode::BOUND;
  bool both_directions = true;
  long budget = 0;
  std::uint64_t seed = 0;
  double d_vH = 0, d_vH_inv = 0;
  // A(g) vs R(g), A(g) vs A(g^-1), A(g^-1) vs R(g^-1): distance minus the two radii.
  double margin_a_r = 0, margin_a_ainv = 0, margin_ainv_rinv = 0;
  double bound_image = 0, bound_image_inv = 0;  // Cartan estimates of the image radius
  double max_image_dist = 0, max_image_dist_inv = 0;
  std::string failure;
  std::optional<ProjPoint> witness;
};
ProximalityCertificate is_very_proximal(const ProjMap& g, double r, double eps, long budget, std::uint64_t seed);

struct PowersDecay {
  std::vector<double> eps;  // eps_est(g^n), n = 1..n_max
  bool strictly_decreasing = true;
  double max_point_dev = 0;
  double max_hyperplane_dev = 0;
};
PowersDecay powers_decay(const ProjMap& g, int n_max, double c);

double local_lipschitz(const ProjMap& g, const ProjPoint& center, double radius, long samples, std::uint64_t seed);

struct Calibration {
  double c = 4, c1 = 4, c2 = 4;
  double fitted_c = 0, fitted_c2 = 0;
  long samples = 0;
  std::uint64_t seed = 0;
};
// Fits the contraction constants on random maps of the given dimension.
Calibration calibrate(const FieldPtr& f, int n, long samples, std::uint64_t seed);

bool general_position(const std::vector<ProjPoint>& points);
bool projectively_trivial(const Mat& g);
std::vector<ProjPoint> orbit_general_position(const std::vector<ProjMap>& gens, const ProjPoint& v, long budget);

}  // namespace subdyn
