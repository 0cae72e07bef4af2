#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "yamabe/charclass.hpp"
#include "yamabe/cocycle.hpp"
#include "yamabe/graded.hpp"
#include "yamabe/metric.hpp"

namespace yamabe {

/// Full description of a torus bundle: base characteristic data, fiber
/// rank, transition cocycle, and whether the fiber 2-form restricts to a
/// generator fiberwise.
struct BundleSpec {
  PontryaginData base;
  int fiber_rank = 0;
  Cocycle cocycle;
  bool omega_is_generator = false;

  void validate() const;
};

Cocycle cocycle_from_json(const nlohmann::json& doc);
nlohmann::json cocycle_to_json(const Cocycle& c);
BundleSpec bundle_spec_from_json(const nlohmann::json& doc);
nlohmann::json bundle_spec_to_json(const BundleSpec& spec);

/// True iff the pullback of the block 2-form under S fixes it, decided on
/// the second exterior power (2x2 minors), not by matrix identities.
/// Returns false for non-symplectic S; throws ShapeError on odd side.
bool omega_invariance_check(int k, const IntMatrix& s);

/// Exact intermediate values of the index computation, kept for reporting.
struct IndexComputation {
  Rational pipeline_symbolic;  // fiber-integrated ch * A-hat pairing
  Rational pipeline_factored;  // genus x fiber integral
  Rational genus;
  Rational fiber_integral;
  bool non_spin_warning = false;
  int k = 0;  // fiber coordinate pairs
  std::optional<GradedElement> chern_character;
  std::optional<GradedElement> base_class;
  std::optional<GradedElement> product;
  std::optional<GradedElement> pushforward;
};

/// Runs both index pipelines exactly and insists they agree; the result
/// need not be an integer at this level.
IndexComputation index_pipelines(const BundleSpec& spec);

/// The twisted Dirac index: the common pipeline value, which must be an
/// integer. Requires an even fiber rank, omega_is_generator, and a spin
/// base; a non-integer value is an input-data inconsistency.
Integer index_twisted_dirac(const BundleSpec& spec);

struct UpperWitness {
  bool holds = false;
  std::optional<Integer> index;
  int fiber_rank_used = 0;
  bool stabilized = false;
  bool oriented = false;
  bool invariance_checked = false;  // both invariance routes passed on every map
};

struct ThresholdInfo {
  long n_star = 0;
  Integer covering_degree;  // n_star^fiber_rank
  double norm_at_1 = 0;
  double s_min = 0;
  double constant = 0;
  int dim_total = 0;
};

struct Certificate {
  bool established = false;
  std::string reason;  // first obstruction when withheld
  CocycleReport lower;
  UpperWitness upper;
  std::optional<IndexComputation> computation;
  std::optional<ThresholdInfo> threshold;
  std::vector<std::string> notes;
};

/// Two-sided certificate: the mod-lattice cocycle validation is the
/// nonnegativity witness, a nonzero index (after stabilization or the
/// orientation cover, as the transition data demands) is the
/// nonpositivity witness. Metric data only adds the positivity threshold.
Certificate certify_zero_yamabe(const BundleSpec& spec,
                                const std::optional<MetricData>& metric_data = std::nullopt);

std::string certificate_to_text(const Certificate& cert);
std::vector<nlohmann::json> certificate_records(const Certificate& cert);

}  // namespace yamabe
