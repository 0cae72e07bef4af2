#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "yamabe/rational.hpp"

namespace yamabe {

struct Generator {
  std::string name;
  int degree = 0;  // >= 1
};

class RingContext;
using RingContextPtr = std::shared_ptr<const RingContext>;

/**
 * Immutable generator table for a free graded-commutative algebra over the
 * rationals, truncated above degree_cap. Generators are held in canonical
 * order (degree, then name); odd-degree generators anticommute and square
 * to zero, even-degree generators are central.
 */
class RingContext {
public:
  static RingContextPtr create(std::vector<Generator> generators, int degree_cap);

  int degree_cap() const { return degree_cap_; }
  std::size_t size() const { return generators_.size(); }
  const Generator& generator(std::size_t index) const { return generators_.at(index); }
  bool is_odd(std::size_t index) const { return generators_[index].degree % 2 != 0; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws InputError when absent

private:
  RingContext(std::vector<Generator> generators, int degree_cap);
  std::vector<Generator> generators_;        // sorted by (degree, name)
  std::map<std::string, std::size_t, std::less<>> by_name_;
  int degree_cap_ = 0;
};

/// Canonical monomial: factors sorted by generator index, exponents >= 1,
/// odd generators with exponent exactly 1. The unit monomial has no factors.
class Monomial {
public:
  Monomial() = default;
  Monomial(const RingContext& ctx, std::vector<std::pair<std::size_t, int>> factors);

  const std::vector<std::pair<std::size_t, int>>& factors() const { return factors_; }
  bool is_unit() const { return factors_.empty(); }
  int degree(const RingContext& ctx) const;
  int exponent_of(std::size_t gen_index) const;

  auto operator<=>(const Monomial&) const = default;

private:
  std::vector<std::pair<std::size_t, int>> factors_;
};

/// Builds a monomial from (generator name, exponent) pairs.
Monomial monomial(const RingContext& ctx,
                  const std::vector<std::pair<std::string, int>>& factors);

class GradedElement {
public:
  static GradedElement zero(RingContextPtr ctx);
  static GradedElement one(RingContextPtr ctx);
  static GradedElement scalar(RingContextPtr ctx, Rational value);
  static GradedElement from_generator(RingContextPtr ctx, std::string_view name);
  static GradedElement from_terms(RingContextPtr ctx, std::map<Monomial, Rational> terms);

  const RingContextPtr& context() const { return ctx_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_scalar() const;
  Rational coefficient(const Monomial& m) const;
  Rational scalar_value() const;  // throws ShapeError unless is_scalar()
  GradedElement homogeneous_part(int degree) const;

  GradedElement operator-() const;
  bool operator==(const GradedElement& other) const;

private:
  GradedElement(RingContextPtr ctx, std::map<Monomial, Rational> terms)
      : ctx_(std::move(ctx)), terms_(std::move(terms)) {}
  RingContextPtr ctx_;
  std::map<Monomial, Rational> terms_;
};

GradedElement operator+(const GradedElement& a, const GradedElement& b);
GradedElement operator-(const GradedElement& a, const GradedElement& b);
GradedElement operator*(const Rational& c, const GradedElement& a);
GradedElement operator/(const GradedElement& a, const Rational& c);

/// Graded-commutative product, truncated above the context's degree cap.
GradedElement mul(const GradedElement& a, const GradedElement& b);
GradedElement operator*(const GradedElement& a, const GradedElement& b);

/// a^k under mul; a^0 = 1. k must be >= 0.
GradedElement power_truncated(const GradedElement& a, long k);

/// sum_{j>=0} a^j / j! truncated at the degree cap. a must have no
/// degree-zero term (the exponential of a scalar is not rational).
GradedElement exp_truncated(const GradedElement& a);

/**
 * Integration over the fiber spanned by the listed degree-1 generators:
 * keeps only terms containing every fiber generator, strips them, and
 * applies the sign of the permutation that moves the fiber generators to
 * the right of the remaining odd factors in the order given.
 */
GradedElement fiber_integrate(const GradedElement& a,
                              const std::vector<std::string>& fiber_generators);

/// Coefficient of `volume` in the degree-top_degree part of a; 0 when that
/// part is empty. Throws ShapeError when the part has any other monomial.
Rational top_coefficient(const GradedElement& a, int top_degree, const Monomial& volume);

/// Replaces an even generator g by `replacement` (homogeneous of the same
/// degree), expanding g^e into replacement^e.
GradedElement substitute(const GradedElement& a, std::string_view generator_name,
                         const GradedElement& replacement);

/// Structured-text form: [{"monomial": [["p1",2],...], "coeff": "num/den"}, ...]
nlohmann::json element_to_json(const GradedElement& a);
GradedElement element_from_json(RingContextPtr ctx, const nlohmann::json& doc);

}  // namespace yamabe
