#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "yamabe/bundle.hpp"
#include "yamabe/errors.hpp"

using namespace yamabe;

namespace {

Cocycle trivial_cocycle(std::size_t rank) {
  Cocycle c;
  c.nerve.charts = {"U1", "U2"};
  c.nerve.pairs = {{"U1", "U2"}, {"U2", "U1"}};
  IntAffineMap id = IntAffineMap::identity(rank);
  c.maps.emplace(std::make_pair(std::string("U1"), std::string("U2")), id);
  c.maps.emplace(std::make_pair(std::string("U2"), std::string("U1")), id);
  return c;
}

BundleSpec k3_t2_spec() {
  BundleSpec spec;
  spec.base = PontryaginData{4, {{"p1", -48}}, true};
  spec.fiber_rank = 2;
  spec.cocycle = trivial_cocycle(2);
  spec.omega_is_generator = true;
  return spec;
}

MetricData identity_metric_data(int base_dim, int fiber_dim, double s_min) {
  MetricData data;
  data.metric = gen::identity_metric(base_dim, fiber_dim);
  data.s_min = s_min;
  return data;
}

}  // namespace

TEST_CASE("invariance of the fiber 2-form, decided on bivectors") {
  CHECK(omega_invariance_check(1, IntMatrix::identity(2)));
  CHECK(omega_invariance_check(2, IntMatrix::identity(4)));
  CHECK(omega_invariance_check(1, IntMatrix::from_rows({{1, 1}, {0, 1}})));
  CHECK(!omega_invariance_check(1, IntMatrix::from_rows({{1, 0}, {0, -1}})));
  CHECK(!omega_invariance_check(1, IntMatrix::from_rows({{2, 0}, {0, 1}})));
  CHECK_THROWS_AS(omega_invariance_check(0, IntMatrix::identity(2)), InputError);
  CHECK_THROWS_AS(omega_invariance_check(1, IntMatrix::identity(3)), ShapeError);
  CHECK_THROWS_AS(omega_invariance_check(2, IntMatrix::identity(2)), ShapeError);
}

TEST_CASE("the bivector route and the matrix-identity route agree") {
  gen::Rng rng(5501u);
  int symplectic_seen = 0, other_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t k = static_cast<std::size_t>(gen::pick_int(rng, 1, 3));
    IntMatrix m = gen::pick_bool(rng)
                      ? gen::random_symplectic(rng, k, gen::pick_int(rng, 1, 5))
                      : gen::random_unimodular(rng, 2 * k, gen::pick_int(rng, 1, 6),
                                               gen::pick_bool(rng));
    bool matrix_route = is_symplectic(m);
    bool exterior_route = omega_invariance_check(static_cast<int>(k), m);
    CHECK(matrix_route == exterior_route);
    (matrix_route ? symplectic_seen : other_seen) += 1;
  }
  CHECK(symplectic_seen > 0);
  CHECK(other_seen > 0);
}

TEST_CASE("index computation on the reference fixture") {
  BundleSpec spec = k3_t2_spec();
  IndexComputation c = index_pipelines(spec);
  CHECK(c.genus == 2);
  CHECK(c.fiber_integral == 1);
  CHECK(c.pipeline_symbolic == 2);
  CHECK(c.pipeline_factored == 2);
  CHECK(c.k == 1);
  CHECK(!c.non_spin_warning);
  CHECK(index_twisted_dirac(spec) == 2);
}

TEST_CASE("index examples across dimensions") {
  SUBCASE("a point base counts points") {
    BundleSpec spec;
    spec.base = PontryaginData{0, {{"1", 3}}, true};
    spec.fiber_rank = 4;
    spec.cocycle = trivial_cocycle(4);
    spec.omega_is_generator = true;
    CHECK(index_twisted_dirac(spec) == 3);
  }

  SUBCASE("quaternionic-type numbers give index zero") {
    BundleSpec spec;
    spec.base = PontryaginData{8, {{"p1^2", 4}, {"p2", 7}}, true};
    spec.fiber_rank = 2;
    spec.cocycle = trivial_cocycle(2);
    spec.omega_is_generator = true;
    CHECK(index_twisted_dirac(spec) == 0);
  }

  SUBCASE("fractional pairings are data inconsistencies") {
    BundleSpec spec = k3_t2_spec();
    spec.base.numbers["p1"] = 1;  // genus -1/24
    CHECK_THROWS_AS(index_twisted_dirac(spec), InputError);
    CHECK_NOTHROW(index_pipelines(spec));  // the exact value itself is fine
    CHECK(index_pipelines(spec).pipeline_symbolic == make_rational(-1, 24));
  }

  SUBCASE("hypothesis violations are input errors") {
    BundleSpec odd = k3_t2_spec();
    odd.fiber_rank = 3;
    odd.cocycle = Cocycle{};
    odd.cocycle.nerve.charts = {"U1"};
    CHECK_THROWS_AS(index_pipelines(odd), InputError);

    BundleSpec no_gen = k3_t2_spec();
    no_gen.omega_is_generator = false;
    CHECK_THROWS_AS(index_pipelines(no_gen), InputError);

    BundleSpec non_spin = k3_t2_spec();
    non_spin.base.spin = false;
    CHECK_THROWS_AS(index_pipelines(non_spin), InputError);
  }
}

TEST_CASE("both pipelines match the monomial-expansion reference") {
  gen::Rng rng(5502u);
  for (int trial = 0; trial < 40; ++trial) {
    gen::SpecSample sample = gen::random_bundle_spec(rng);
    IndexComputation c = index_pipelines(sample.spec);
    Rational reference =
        oracle::brute_force_index(sample.d, sample.spec.base.numbers, sample.k);
    CHECK(c.pipeline_symbolic == reference);
    CHECK(c.pipeline_factored == reference);
    CHECK(c.fiber_integral == 1);
  }
}

TEST_CASE("certificate on the reference fixture") {
  Certificate cert = certify_zero_yamabe(k3_t2_spec());
  CHECK(cert.established);
  CHECK(cert.reason.empty());
  CHECK(cert.lower.valid);
  CHECK(cert.upper.holds);
  REQUIRE(cert.upper.index.has_value());
  CHECK(*cert.upper.index == 2);
  CHECK(cert.upper.fiber_rank_used == 2);
  CHECK(!cert.upper.stabilized);
  CHECK(!cert.upper.oriented);
  CHECK(cert.upper.invariance_checked);

  std::string text = certificate_to_text(cert);
  CHECK(text.substr(0, text.find('\n')) ==
        "Y(M) = 0; index = 2; T-structure witness: cocycle valid");
}

TEST_CASE("certificate withholding paths") {
  SUBCASE("invalid cocycle blocks both witnesses") {
    gen::Rng rng(5503u);
    auto sample = gen::coboundary_cocycle(rng, 1, 3, false);
    gen::perturb_one_map(rng, sample.cocycle);
    BundleSpec spec = k3_t2_spec();
    spec.cocycle = sample.cocycle;
    Certificate cert = certify_zero_yamabe(spec);
    CHECK(!cert.established);
    CHECK(!cert.lower.valid);
    CHECK(!cert.upper.holds);
    CHECK(cert.reason == "the transition data is not a cocycle modulo the lattice");
    CHECK(!cert.computation.has_value());
  }

  SUBCASE("non-spin base") {
    BundleSpec spec = k3_t2_spec();
    spec.base.spin = false;
    Certificate cert = certify_zero_yamabe(spec);
    CHECK(!cert.established);
    CHECK(cert.lower.valid);
    CHECK(cert.reason == "the base is not spin, so the index obstruction does not apply");
  }

  SUBCASE("fiber form is not a generator") {
    BundleSpec spec = k3_t2_spec();
    spec.omega_is_generator = false;
    Certificate cert = certify_zero_yamabe(spec);
    CHECK(cert.reason == "the fiber 2-form does not restrict to a generator");
  }

  SUBCASE("translations block the covering construction but not the lower witness") {
    gen::Rng rng(5504u);
    auto affine = gen::coboundary_cocycle(rng, 1, 3, true);
    if (affine.cocycle.translations_all_zero()) return;
    BundleSpec spec = k3_t2_spec();
    spec.cocycle = affine.cocycle;
    Certificate cert = certify_zero_yamabe(spec);
    CHECK(!cert.established);
    CHECK(cert.lower.valid);
    CHECK(cert.reason ==
          "transition translations are outside the certified covering construction");
  }

  SUBCASE("vanishing index withholds the upper witness") {
    BundleSpec spec;
    spec.base = PontryaginData{8, {{"p1^2", 4}, {"p2", 7}}, true};
    spec.fiber_rank = 2;
    spec.cocycle = trivial_cocycle(2);
    spec.omega_is_generator = true;
    Certificate cert = certify_zero_yamabe(spec);
    CHECK(!cert.established);
    CHECK(cert.lower.valid);
    CHECK(!cert.upper.holds);
    REQUIRE(cert.upper.index.has_value());
    CHECK(*cert.upper.index == 0);
    CHECK(cert.reason == "the index vanishes, so the obstruction gives no upper bound");
  }

  SUBCASE("a transition that moves the 2-form") {
    BundleSpec spec;
    spec.base = PontryaginData{4, {{"p1", -48}}, true};
    spec.fiber_rank = 4;
    Cocycle c;
    c.nerve.charts = {"U1", "U2"};
    c.nerve.pairs = {{"U1", "U2"}, {"U2", "U1"}};
    IntMatrix shuffle = IntMatrix::from_rows(
        {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});  // swaps the second pair
    IntAffineMap map{shuffle, std::vector<Rational>(4, Rational(0))};
    c.maps.emplace(std::make_pair(std::string("U1"), std::string("U2")), map);
    c.maps.emplace(std::make_pair(std::string("U2"), std::string("U1")), map.inverse());
    spec.cocycle = c;
    spec.omega_is_generator = true;
    Certificate cert = certify_zero_yamabe(spec);
    CHECK(!cert.established);
    CHECK(cert.lower.valid);
    CHECK(cert.reason == "a transition map does not preserve the fiber 2-form");
    CHECK(!cert.upper.invariance_checked);
  }
}

TEST_CASE("certificate stabilizes odd ranks and orients reflections") {
  SUBCASE("rank-1 bundles stabilize to rank 2") {
    BundleSpec spec;
    spec.base = PontryaginData{4, {{"p1", -48}}, true};
    spec.fiber_rank = 1;
    Cocycle c;
    c.nerve.charts = {"U1", "U2"};
    c.nerve.pairs = {{"U1", "U2"}, {"U2", "U1"}};
    IntMatrix eps(1, 1);
    eps.at(0, 0) = -1;
    IntAffineMap map{eps, {Rational(0)}};
    c.maps.emplace(std::make_pair(std::string("U1"), std::string("U2")), map);
    c.maps.emplace(std::make_pair(std::string("U2"), std::string("U1")), map.inverse());
    spec.cocycle = c;
    spec.omega_is_generator = true;

    Certificate cert = certify_zero_yamabe(spec);
    CHECK(cert.established);
    CHECK(cert.upper.stabilized);
    CHECK(cert.upper.fiber_rank_used == 2);
    CHECK(*cert.upper.index == 2);
  }

  SUBCASE("reflections double the cover and the index") {
    gen::Rng rng(5505u);
    bool exercised = false;
    for (int trial = 0; trial < 20 && !exercised; ++trial) {
      auto nerve = gen::random_nerve(rng, 3);
      std::map<std::string, IntAffineMap> h;
      for (const auto& chart : nerve.charts) {
        IntMatrix u = gen::random_unimodular(rng, 2, gen::pick_int(rng, 1, 4), gen::pick_bool(rng));
        h.emplace(chart, IntAffineMap{u, {Rational(0), Rational(0)}});
      }
      Cocycle c;
      c.nerve = nerve;
      for (const auto& pair : nerve.pairs) {
        c.maps.emplace(pair, h.at(pair.second).compose_after(h.at(pair.first).inverse()));
      }
      bool has_negative = false;
      bool all_invariant = true;
      for (const auto& [key, map] : c.maps) {
        if (map.linear.determinant() < 0) has_negative = true;
      }
      if (!has_negative) continue;
      exercised = true;

      BundleSpec spec;
      spec.base = PontryaginData{4, {{"p1", -48}}, true};
      spec.fiber_rank = 2;
      spec.cocycle = c;
      spec.omega_is_generator = true;
      Certificate cert = certify_zero_yamabe(spec);
      CHECK(cert.upper.oriented);
      // After passing to the cover, transition maps may or may not preserve
      // the form; when they do the index doubles along with the numbers.
      if (cert.established) {
        CHECK(*cert.upper.index == 4);
        bool found_note = false;
        for (const std::string& note : cert.notes) {
          if (note == "orientation double cover applied; Pontryagin numbers doubled") {
            found_note = true;
          }
        }
        CHECK(found_note);
      }
      (void)all_invariant;
    }
    CHECK(exercised);
  }
}

TEST_CASE("positivity threshold attaches to certificates") {
  SUBCASE("reference fixture with the identity metric") {
    Certificate cert = certify_zero_yamabe(k3_t2_spec(), identity_metric_data(4, 2, 10.0));
    CHECK(cert.established);
    REQUIRE(cert.threshold.has_value());
    CHECK(cert.threshold->dim_total == 6);
    CHECK(cert.threshold->constant == 15.0);
    CHECK(cert.threshold->norm_at_1 == doctest::Approx(1.0).epsilon(1e-12));
    // 15 * 2pi / n^2 < 10 first holds at n = 4.
    CHECK(cert.threshold->n_star == 4);
    CHECK(cert.threshold->covering_degree == 16);
    std::string text = certificate_to_text(cert);
    CHECK(text.find("positivity threshold: n* = 4, covering degree 16") != std::string::npos);
  }

  SUBCASE("threshold attaches even when the verdict is withheld") {
    BundleSpec spec;
    spec.base = PontryaginData{8, {{"p1^2", 4}, {"p2", 7}}, true};
    spec.fiber_rank = 2;
    spec.cocycle = trivial_cocycle(2);
    spec.omega_is_generator = true;
    Certificate cert = certify_zero_yamabe(spec, identity_metric_data(8, 2, 10.0));
    CHECK(!cert.established);
    CHECK(cert.threshold.has_value());
  }

  SUBCASE("stabilized bundles extend the metric by a unit fiber direction") {
    BundleSpec spec;
    spec.base = PontryaginData{4, {{"p1", -48}}, true};
    spec.fiber_rank = 1;
    Cocycle c;
    c.nerve.charts = {"U1"};
    spec.cocycle = c;
    spec.omega_is_generator = true;
    Certificate cert = certify_zero_yamabe(spec, identity_metric_data(4, 1, 10.0));
    CHECK(cert.established);
    CHECK(cert.upper.stabilized);
    REQUIRE(cert.threshold.has_value());
    CHECK(cert.threshold->dim_total == 6);
    CHECK(cert.threshold->n_star == 4);
  }

  SUBCASE("metric block sizes must match the bundle") {
    CHECK_THROWS_AS(certify_zero_yamabe(k3_t2_spec(), identity_metric_data(4, 4, 10.0)),
                    InputError);
  }
}

TEST_CASE("structured records mirror the certificate") {
  Certificate cert = certify_zero_yamabe(k3_t2_spec());
  std::vector<nlohmann::json> records = certificate_records(cert);
  REQUIRE(records.size() >= 3);
  CHECK(records.front().at("record") == "lower_witness");
  CHECK(records.front().at("valid") == true);
  CHECK(records.back().at("record") == "verdict");
  CHECK(records.back().at("verdict") == "Y(M) = 0");
  CHECK(records.back().at("established") == true);

  bool saw_index = false;
  for (const auto& record : records) {
    if (record.at("record") == "index_computation") {
      saw_index = true;
      CHECK(record.at("genus") == "2");
      CHECK(record.at("fiber_integral") == "1");
      CHECK(record.at("pipeline_symbolic") == "2");
    }
  }
  CHECK(saw_index);
}

TEST_CASE("bundle specs round-trip through their document form") {
  BundleSpec spec = k3_t2_spec();
  nlohmann::json doc = bundle_spec_to_json(spec);
  BundleSpec back = bundle_spec_from_json(doc);
  CHECK(back.base.dimension == spec.base.dimension);
  CHECK(back.base.spin == spec.base.spin);
  CHECK(back.base.numbers == spec.base.numbers);
  CHECK(back.fiber_rank == spec.fiber_rank);
  CHECK(back.omega_is_generator == spec.omega_is_generator);
  CHECK(back.cocycle.nerve.charts == spec.cocycle.nerve.charts);
  CHECK(back.cocycle.nerve.pairs == spec.cocycle.nerve.pairs);
  CHECK(back.cocycle.maps == spec.cocycle.maps);

  gen::Rng rng(5506u);
  for (int trial = 0; trial < 20; ++trial) {
    gen::SpecSample sample = gen::random_bundle_spec(rng);
    BundleSpec rebuilt = bundle_spec_from_json(bundle_spec_to_json(sample.spec));
    CHECK(rebuilt.cocycle.maps == sample.spec.cocycle.maps);
    CHECK(rebuilt.cocycle.nerve.pairs == sample.spec.cocycle.nerve.pairs);
    CHECK(rebuilt.base.numbers == sample.spec.base.numbers);
    // Random numbers rarely pair to an integer, so compare the exact value.
    CHECK(index_pipelines(rebuilt).pipeline_symbolic ==
          index_pipelines(sample.spec).pipeline_symbolic);
  }
}

TEST_CASE("document ingestion conveniences and errors") {
  SUBCASE("reverse maps, pairs, and triples are derived from one-directional input") {
    nlohmann::json doc = nlohmann::json::parse(R"({
      "charts": ["U1", "U2", "U3"],
      "transitions": {
        "U1|U2": {"linear": [[1, 1], [0, 1]]},
        "U2|U3": {"linear": [[1, 0], [1, 1]]},
        "U1|U3": {"linear": [[1, 1], [1, 2]]}
      }
    })");
    Cocycle c = cocycle_from_json(doc);
    CHECK(c.nerve.pairs.size() == 6);
    CHECK(c.maps.size() == 6);
    CHECK(c.nerve.triples.size() == 1);
    CHECK(c.maps.at({"U2", "U1"}).linear == IntMatrix::from_rows({{1, -1}, {0, 1}}));
    CHECK(validate_cocycle(c, false).valid);  // [[1,1],[1,2]] = [[1,0],[1,1]][[1,1],[0,1]]
  }

  SUBCASE("identity self transitions are tolerated, others rejected") {
    nlohmann::json doc = nlohmann::json::parse(R"({
      "charts": ["U1", "U2"],
      "transitions": {
        "U1|U1": {"linear": [[1, 0], [0, 1]]},
        "U1|U2": {"linear": [[1, 0], [0, 1]]}
      }
    })");
    CHECK(cocycle_from_json(doc).maps.size() == 2);
    doc["transitions"]["U1|U1"]["linear"] = nlohmann::json::parse("[[1, 1], [0, 1]]");
    CHECK_THROWS_AS(cocycle_from_json(doc), InputError);
  }

  SUBCASE("translations parse exactly") {
    nlohmann::json doc = nlohmann::json::parse(R"({
      "charts": ["U1", "U2"],
      "transitions": {
        "U1|U2": {"linear": [[1, 0], [0, 1]], "translation": ["1/3", 2]}
      }
    })");
    Cocycle c = cocycle_from_json(doc);
    CHECK(c.maps.at({"U1", "U2"}).translation[0] == make_rational(1, 3));
    CHECK(c.maps.at({"U1", "U2"}).translation[1] == 0);  // reduced mod 1
    doc["transitions"]["U1|U2"]["translation"] = nlohmann::json::parse("[0.5, 0]");
    CHECK_THROWS_AS(cocycle_from_json(doc), InputError);
  }

  SUBCASE("malformed documents") {
    CHECK_THROWS_AS(cocycle_from_json(nlohmann::json::array()), InputError);
    CHECK_THROWS_AS(cocycle_from_json(nlohmann::json::parse(R"({"charts": "U1"})")), InputError);
    CHECK_THROWS_AS(cocycle_from_json(nlohmann::json::parse(
                        R"({"charts": ["U1"], "transitions": {"U1U2": {"linear": [[1]]}}})")),
                    InputError);
    CHECK_THROWS_AS(cocycle_from_json(nlohmann::json::parse(
                        R"({"charts": ["U1"], "transitions": {"U1|U2|U3": {"linear": [[1]]}}})")),
                    InputError);
    CHECK_THROWS_AS(cocycle_from_json(nlohmann::json::parse(
                        R"({"charts": ["U1", "U2"], "lattice_scale": 0, "transitions": {}})")),
                    InputError);
    CHECK_THROWS_AS(
        bundle_spec_from_json(nlohmann::json::parse(R"({"base": {"dimension": 4}})")),
        InputError);
    CHECK_THROWS_AS(bundle_spec_from_json(nlohmann::json::parse(R"({
      "base": {"dimension": 4, "spin": true, "pontryagin_numbers": {"p1": 1.5}},
      "fiber_rank": 2, "cocycle": {"charts": ["U1"]}, "omega_is_generator": true
    })")),
                    InputError);
  }

  SUBCASE("a zero-dimensional base defaults to a single point") {
    nlohmann::json doc = nlohmann::json::parse(R"({
      "base": {"dimension": 0, "spin": true},
      "fiber_rank": 2,
      "cocycle": {"charts": ["U1"]},
      "omega_is_generator": true
    })");
    BundleSpec spec = bundle_spec_from_json(doc);
    CHECK(spec.base.numbers.at("1") == 1);
    CHECK(index_twisted_dirac(spec) == 1);
  }
}
