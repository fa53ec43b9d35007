#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subdyn/projective.hpp"

namespace subdyn {

// Attracting sets are open balls, repelling sets closed slabs around a hyperplane.
struct Ball {
  ProjPoint center;
  double radius = 0;
};
struct Slab {
  ProjHyperplane plane;
  double radius = 0;
};
struct Arena {
  Ball attract;      // A(g)
  Slab repel;        // R(g)
  Ball attract_inv;  // A(g^-1)
  Slab repel_inv;    // R(g^-1)
};

/**
 * @brief True for the real projective line, where balls and slabs are arcs and every
 * margin below is computed exactly as an angle. Elsewhere margins are sound
 * projective-distance estimates.
 */
bool exact_arcs(const FieldPtr& f, int n);

// Real projective line helpers. Angles live in [0, pi); a hyperplane is located by the
// point spanning its kernel.
double line_angle(const ProjPoint& p);
double line_angle(const ProjHyperplane& h);
// The closed arc swept counterclockwise from `from` to `to`, as a slab.
Slab line_slab(const FieldPtr& f, double from, double to);
// (center, half width) of a slab on the line.
std::pair<double, double> line_arc(const Slab& s);

// A margin >= 0 means the relation holds; touching is allowed since one side is open.
double disjoint_margin(const Ball& a, const Ball& b);
double disjoint_margin(const Ball& a, const Slab& s);
double contain_margin(const Ball& inner, const Ball& outer);
double contain_margin(const Slab& inner, const Slab& outer);
// How far the set stays from a point or hyperplane. NaN for a slab in dimension >= 3,
// where two hyperplane neighborhoods always meet.
double avoid_margin(const Ball& a, const ProjPoint& p);
double avoid_margin(const Slab& s, const ProjHyperplane& h);
bool contains(const Ball& a, const ProjPoint& x);
bool contains(const Slab& s, const ProjPoint& x);

// Margin of g(P \ R) inside A.
double map_margin(const ProjMap& g, const Slab& R, const Ball& A);
// A ball around the given center containing g(P \ R); exact arc on the real line.
Ball image_ball(const ProjMap& g, const Slab& R, const ProjPoint& center);

// Sets containing the images g(B), g(S).
Ball transport(const ProjMap& g, const Ball& b);
Slab transport(const ProjMap& g, const Slab& s);
// Arena of g a g^-1 from the arena of a.
Arena transport(const ProjMap& g, const Arena& a);

Arena canonical_arena(const ProjMap& g, double rho_attract, double rho_repel);
// Smallest radius (within a relative 1e-6) for which the canonical arena with equal radii is
// valid for g alone; nullopt when no radius works. NOT_CONTRACTING without a Cartan gap.
std::optional<double> minimal_arena_radius(const ProjMap& g);

struct MarginRecord {
  std::string relation;
  int i = -1, j = -1;
  double margin = 0;
};

// Mapping and self-disjointness conditions of a single element.
std::vector<MarginRecord> element_margins(const ProjMap& g, const Arena& a, int index = 0);

struct PingPongCertificate {
  bool ok = false;
  ProofMode mode = ProofMode::BOUND;
  double tol = 0;
  double min_margin = 0;
  std::vector<MarginRecord> margins;
  std::optional<MarginRecord> violation;
};
using PingPongTuple = std::vector<std::pair<ProjMap, Arena>>;
PingPongCertificate check_pingpong(const PingPongTuple& tuple, double tol = 1e-9);
// Same checks; throws OVERLAP naming the violating pair and margin.
PingPongCertificate pingpong_certify(const PingPongTuple& tuple, double tol = 1e-9);

struct MatrixRelator {
  bool found = false;
  Word relator;
  long words_examined = 0;
};
/**
 * @brief Shortest nonempty reduced word of length <= max_len in the given matrices that
 * evaluates to a scalar matrix. Exhaustive: projective classes of all words of length
 * <= ceil(max_len/2) are compared modulo a large prime and every collision is confirmed
 * in exact arithmetic.
 */
MatrixRelator find_matrix_relator(const std::vector<RatMat>& elements, int max_len);

struct ArrangedTuple {
  std::vector<long> indices;
  PingPongTuple tuple;  // (g^i a_i g^-i, transported arena)
  std::vector<MarginRecord> property_margins;
  long translate_samples = 0;
  PingPongCertificate certificate;
};
ArrangedTuple arrange_independent(const ProjMap& g, const Arena& g_arena, const PingPongTuple& as,
                                  const std::vector<long>& indices, long samples, std::uint64_t seed);

}  // namespace subdyn
