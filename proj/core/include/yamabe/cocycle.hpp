#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "yamabe/charclass.hpp"
#include "yamabe/intmatrix.hpp"
#include "yamabe/rational.hpp"

namespace yamabe {

/// True iff M^T J M = J for the block alternating form pairing coordinates
/// (y_{2i-1}, y_{2i}). Throws ShapeError when M is not square of even side.
bool is_symplectic(const IntMatrix& m);

/// The matrix of that alternating form: 2x2 blocks [[0,1],[-1,0]].
IntMatrix standard_alternating_form(std::size_t k);

/// Affine self-map of the torus R^m/Z^m: x -> linear x + translation, with
/// linear in GL(m,Z) and the translation reduced mod 1 componentwise.
struct IntAffineMap {
  IntMatrix linear;
  std::vector<Rational> translation;

  static IntAffineMap identity(std::size_t m);

  std::size_t dim() const { return linear.rows(); }
  bool is_identity() const;
  IntAffineMap inverse() const;
  IntAffineMap compose_after(const IntAffineMap& first) const;  // this(first(x)), reduced mod 1

  void normalize();       // reduces the translation mod 1
  void validate() const;  // square, |det| = 1, matching translation length
  bool operator==(const IntAffineMap& other) const = default;
};

/// Combinatorial cover: chart names, symmetric overlapping pairs, and the
/// triples on which the cocycle condition is checked.
struct CoverNerve {
  std::vector<std::string> charts;
  std::set<std::pair<std::string, std::string>> pairs;
  std::set<std::array<std::string, 3>> triples;

  void validate() const;
  bool has_chart(const std::string& name) const;
};

/// Transition data over a nerve; lattice_scale n marks the cover whose
/// fiber lattice is n times finer than the base bundle's.
struct Cocycle {
  CoverNerve nerve;
  std::map<std::pair<std::string, std::string>, IntAffineMap> maps;
  long lattice_scale = 1;

  std::size_t fiber_rank() const;
  const IntAffineMap& map_for(const std::string& from, const std::string& to) const;
  bool translations_all_zero() const;
  void validate_structure() const;
};

struct TripleFailure {
  std::array<std::string, 3> triple;
  std::string reason;
};

struct CocycleReport {
  bool valid = false;
  bool modulo_lattice = false;
  std::size_t triples_checked = 0;
  std::vector<TripleFailure> failing_triples;
  std::vector<std::string> pair_failures;  // inverse-consistency violations
};

/// Checks g(b,c) . g(a,b) = g(a,c) on every triple and g(b,a) = g(a,b)^-1
/// on every pair. Linear parts must match exactly; translations match
/// exactly when modulo_lattice is false, mod (1/lattice_scale)Z^m when
/// true. Missing overlap maps are an input error.
CocycleReport validate_cocycle(const Cocycle& c, bool modulo_lattice);

struct LatticeCoverResult {
  Cocycle cocycle;
  Integer covering_degree;  // n^m
};

/// Passes to the cover with fiber lattice refined by n. Requires a valid
/// translation-free cocycle; translations are unsupported here. The
/// covering degree is n^rank, with the rank read off the maps unless the
/// caller supplies it (a single-chart cocycle has no maps to read).
LatticeCoverResult lattice_cover(const Cocycle& c, long n,
                                 std::optional<std::size_t> fiber_rank = std::nullopt);

/// For odd fiber rank m with every linear part S + (eps) block-diagonal
/// (S symplectic of size m-1, eps = +-1 in the last coordinate), returns
/// the rank-(m+1) cocycle with blocks S + diag(eps, eps).
Cocycle stabilize_odd(const Cocycle& c);

struct OrientationCoverResult {
  Cocycle cocycle;
  PontryaginData base;
  bool doubled = false;
};

/// If every linear part already has determinant +1, returns the input
/// unchanged. Otherwise builds the double cover driven by the determinant
/// homomorphism: charts split into two sheets, all output determinants
/// are +1, and every Pontryagin number doubles.
OrientationCoverResult orientation_double_cover(const Cocycle& c, const PontryaginData& base);

}  // namespace yamabe
