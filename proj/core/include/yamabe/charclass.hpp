#pragma once

#include <map>
#include <string>
#include <vector>

#include "yamabe/graded.hpp"
#include "yamabe/rational.hpp"

namespace yamabe {

/// Partition of a nonnegative integer, parts sorted ascending.
using Partition = std::vector<int>;

/// All partitions of n in deterministic order.
std::vector<Partition> partitions_of(int n);

/// Canonical key: "1" for the empty partition, otherwise parts ascending
/// with exponents for repeats, e.g. [1,1] -> "p1^2", [1,2] -> "p1p2".
std::string partition_key(const Partition& parts);
Partition parse_partition_key(const std::string& key);

/// Characteristic data of a closed base manifold: dimension 4d, the
/// Pontryagin numbers p_I[B] keyed by partition of d, and the spin flag.
struct PontryaginData {
  int dimension = 0;
  std::map<std::string, Integer> numbers;
  bool spin = false;

  int quarter_dimension() const;  // d; throws InputError unless dimension = 4d
  void validate() const;
};

/// Coefficient table of the multiplicative sequence attached to
/// (x/2)/sinh(x/2): coefficients maps a partition key of weight j <= bound
/// to the coefficient of p_I in the degree-j polynomial of the sequence.
struct MultiplicativeSeries {
  int degree_bound = 0;
  std::map<std::string, Rational> coefficients;

  Rational coefficient(const std::string& key) const;  // 0 when absent
};

/// Degree bound used for the precomputed coefficient table; 6 unless the
/// YAMABE_CERT_DEGREE_CAP environment variable overrides it.
int ahat_default_bound();

/// Exact coefficients of the A-hat polynomials through degree max_degree.
/// Computed once per bound and cached; safe for concurrent callers.
const MultiplicativeSeries& ahat_polynomials(int max_degree);

struct GenusValue {
  Rational value;
  bool non_spin_warning = false;
};

/// Pairs the degree-d polynomial of the series with the supplied
/// Pontryagin numbers. A 0-dimensional base contributes its point count
/// under the empty-partition key "1" (0 when no numbers are supplied).
GenusValue ahat_genus(const PontryaginData& base);

/// The series through max_degree as an element of a ring whose generators
/// include p1..p_max_degree with degree(p_i) = 4i.
GradedElement ahat_class(RingContextPtr ctx, int max_degree);

/// exp(c1) truncated at min(cap, ring cap) for a named even generator.
GradedElement chern_character_line(RingContextPtr ctx, std::string_view c1_name, int cap);

/// exp(c1) for an even homogeneous first Chern class given as an element.
GradedElement chern_character_line(const GradedElement& c1);

/// Mod-2 reduction of an integer-coefficient class; zero output certifies
/// the spin-c condition over a spin base. Non-integer coefficients are an
/// input error.
GradedElement spinc_parity(const GradedElement& c1_vertical);

}  // namespace yamabe
