#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "yamabe/errors.hpp"
#include "yamabe/graded.hpp"

using namespace yamabe;

namespace {

RingContextPtr mixed_ring(int cap = 12) {
  return RingContext::create(
      {{"y1", 1}, {"y2", 1}, {"y3", 1}, {"y4", 1}, {"p1", 4}, {"p2", 8}}, cap);
}

GradedElement gen(const RingContextPtr& ctx, const std::string& name) {
  return GradedElement::from_generator(ctx, name);
}

GradedElement term(const RingContextPtr& ctx,
                   const std::vector<std::pair<std::string, int>>& factors, Rational c) {
  return GradedElement::from_terms(ctx, {{monomial(*ctx, factors), std::move(c)}});
}

// Random element with small support; odd exponents stay at 1 by construction.
GradedElement random_element(std::mt19937_64& rng, const RingContextPtr& ctx, int max_terms) {
  std::uniform_int_distribution<int> coeff_num(-6, 6);
  std::uniform_int_distribution<int> coeff_den(1, 4);
  std::uniform_int_distribution<int> term_count(0, max_terms);
  std::uniform_int_distribution<int> even_exp(1, 2);
  std::bernoulli_distribution use_gen(0.45);

  GradedElement acc = GradedElement::zero(ctx);
  int terms = term_count(rng);
  for (int t = 0; t < terms; ++t) {
    std::vector<std::pair<std::size_t, int>> factors;
    for (std::size_t g = 0; g < ctx->size(); ++g) {
      if (!use_gen(rng)) continue;
      factors.emplace_back(g, ctx->is_odd(g) ? 1 : even_exp(rng));
    }
    Monomial m(*ctx, std::move(factors));
    if (m.degree(*ctx) > ctx->degree_cap()) continue;
    Rational c = make_rational(coeff_num(rng), coeff_den(rng));
    if (c == 0) continue;
    acc = acc + GradedElement::from_terms(ctx, {{m, c}});
  }
  return acc;
}

GradedElement random_monomial_element(std::mt19937_64& rng, const RingContextPtr& ctx) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    GradedElement e = random_element(rng, ctx, 1);
    if (!e.is_zero()) return e;
  }
  return GradedElement::one(ctx);
}

}  // namespace

TEST_CASE("ring context orders generators and rejects bad input") {
  auto ctx = mixed_ring();
  CHECK(ctx->generator(0).name == "y1");
  CHECK(ctx->generator(3).name == "y4");
  CHECK(ctx->generator(4).name == "p1");
  CHECK(ctx->index_of("p2") == 5);
  CHECK(!ctx->find("nope").has_value());
  CHECK_THROWS_AS(ctx->index_of("nope"), InputError);
  CHECK_THROWS_AS(RingContext::create({{"a", 1}, {"a", 2}}, 4), InputError);
  CHECK_THROWS_AS(RingContext::create({{"a", 0}}, 4), InputError);
  CHECK_THROWS_AS(RingContext::create({{"a", 1}}, -1), InputError);
}

TEST_CASE("products reproduce hand-computed examples") {
  auto ctx = mixed_ring();
  auto y1 = gen(ctx, "y1"), y2 = gen(ctx, "y2"), y3 = gen(ctx, "y3"), y4 = gen(ctx, "y4");
  auto p1 = gen(ctx, "p1");

  SUBCASE("odd generators anticommute and square to zero") {
    CHECK(mul(y2, y1) == -mul(y1, y2));
    CHECK(mul(y1, y1).is_zero());
    CHECK(mul(mul(y1, y2), y1).is_zero());
  }

  SUBCASE("(1 + p1)(1 - p1/24)") {
    auto a = GradedElement::one(ctx) + p1;
    auto b = GradedElement::one(ctx) - p1 / Rational(24);
    auto expected = GradedElement::one(ctx) + make_rational(23, 24) * p1 -
                    make_rational(1, 24) * term(ctx, {{"p1", 2}}, 1);
    CHECK(mul(a, b) == expected);
  }

  SUBCASE("(y1y2 + y3y4)^2 = 2 y1y2y3y4") {
    auto omega = mul(y1, y2) + mul(y3, y4);
    auto square = mul(omega, omega);
    auto expected = Rational(2) * term(ctx, {{"y1", 1}, {"y2", 1}, {"y3", 1}, {"y4", 1}}, 1);
    CHECK(square == expected);
    CHECK(power_truncated(omega, 2) == expected);
  }

  SUBCASE("degree cap truncates products") {
    auto small = RingContext::create({{"x", 2}}, 4);
    auto x = gen(small, "x");
    CHECK(power_truncated(x, 2) == term(small, {{"x", 2}}, 1));
    CHECK(power_truncated(x, 3).is_zero());
  }
}

TEST_CASE("exp of a nilpotent even element") {
  auto ctx = RingContext::create({{"x", 2}}, 6);
  auto x = gen(ctx, "x");
  auto expected = GradedElement::one(ctx) + x + term(ctx, {{"x", 2}}, make_rational(1, 2)) +
                  term(ctx, {{"x", 3}}, make_rational(1, 6));
  CHECK(exp_truncated(x) == expected);
  CHECK_THROWS_AS(exp_truncated(GradedElement::one(ctx)), InputError);
}

TEST_CASE("fiber integration examples") {
  auto ctx = mixed_ring();
  auto y1 = gen(ctx, "y1"), y2 = gen(ctx, "y2"), y3 = gen(ctx, "y3"), y4 = gen(ctx, "y4");
  auto p1 = gen(ctx, "p1");

  SUBCASE("p1 y1^y2 over [y1, y2] gives p1") {
    auto a = mul(p1, mul(y1, y2));
    CHECK(fiber_integrate(a, {"y1", "y2"}) == p1);
  }

  SUBCASE("orientation reversal flips the sign") {
    auto a = mul(y1, y2);
    CHECK(fiber_integrate(a, {"y2", "y1"}) == -GradedElement::one(ctx));
    CHECK(fiber_integrate(a, {"y1", "y2"}) == GradedElement::one(ctx));
  }

  SUBCASE("top power of the standard form integrates to 1") {
    auto omega = mul(y1, y2) + mul(y3, y4);
    auto volume_class = power_truncated(omega, 2) / Rational(2);
    auto integrated = fiber_integrate(volume_class, {"y1", "y2", "y3", "y4"});
    CHECK(integrated == GradedElement::one(ctx));
  }

  SUBCASE("terms missing a fiber generator drop out") {
    auto a = mul(y1, y2) + mul(y1, y3);
    CHECK(fiber_integrate(a, {"y1", "y2"}) == GradedElement::one(ctx));
  }

  SUBCASE("bad fiber lists are input errors") {
    CHECK_THROWS_AS(fiber_integrate(y1, {"p1"}), InputError);
    CHECK_THROWS_AS(fiber_integrate(y1, {"y1", "y1"}), InputError);
    CHECK_THROWS_AS(fiber_integrate(y1, {"zz"}), InputError);
  }
}

TEST_CASE("top coefficient and substitution") {
  auto ctx = RingContext::create({{"p1", 4}, {"q", 4}}, 4);
  auto a = make_rational(-1, 24) * gen(ctx, "p1");

  SUBCASE("substituting a scaled generator") {
    auto replacement = Rational(-48) * gen(ctx, "q");
    auto swapped = substitute(a, "p1", replacement);
    CHECK(top_coefficient(swapped, 4, monomial(*ctx, {{"q", 1}})) == 2);
  }

  SUBCASE("volume degree must match") {
    CHECK_THROWS_AS(top_coefficient(a, 8, monomial(*ctx, {{"p1", 1}})), InputError);
  }

  SUBCASE("foreign top-degree terms are rejected") {
    auto b = a + gen(ctx, "q");
    CHECK_THROWS_AS(top_coefficient(b, 4, monomial(*ctx, {{"q", 1}})), ShapeError);
  }

  SUBCASE("substitution preconditions") {
    auto inhomogeneous = gen(ctx, "q") + GradedElement::one(ctx);
    CHECK_THROWS_AS(substitute(a, "p1", inhomogeneous), InputError);
    auto odd_ctx = mixed_ring();
    CHECK_THROWS_AS(
        substitute(gen(odd_ctx, "y1"), "y1", gen(odd_ctx, "y2")), InputError);
  }
}

TEST_CASE("context mixing is rejected") {
  auto a = mixed_ring();
  auto b = mixed_ring();
  CHECK_THROWS_AS(gen(a, "y1") + gen(b, "y1"), ContextError);
  CHECK_THROWS_AS(mul(gen(a, "y1"), gen(b, "y1")), ContextError);
}

TEST_CASE("graded sign law on random monomials") {
  auto ctx = mixed_ring();
  std::mt19937_64 rng(7101u);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_monomial_element(rng, ctx);
    auto b = random_monomial_element(rng, ctx);
    const Monomial& ma = a.terms().begin()->first;
    const Monomial& mb = b.terms().begin()->first;
    int sign_exponent = ma.degree(*ctx) * mb.degree(*ctx);
    auto lhs = mul(a, b);
    auto rhs = mul(b, a);
    if (sign_exponent % 2 != 0) rhs = -rhs;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("ring axioms on random elements") {
  auto ctx = mixed_ring();
  std::mt19937_64 rng(7102u);
  for (int trial = 0; trial < 120; ++trial) {
    auto a = random_element(rng, ctx, 4);
    auto b = random_element(rng, ctx, 4);
    auto c = random_element(rng, ctx, 4);
    CHECK(mul(mul(a, b), c) == mul(a, mul(b, c)));
    CHECK(mul(a, b + c) == mul(a, b) + mul(a, c));
    CHECK(a + (-a) == GradedElement::zero(ctx));
    CHECK(mul(GradedElement::one(ctx), a) == a);
    CHECK((Rational(0) * a).is_zero());

    GradedElement reassembled = GradedElement::zero(ctx);
    for (int d = 0; d <= ctx->degree_cap(); ++d) {
      reassembled = reassembled + a.homogeneous_part(d);
    }
    CHECK(reassembled == a);
  }
}

TEST_CASE("fiber integration is linear and kills fiberless terms") {
  auto ctx = mixed_ring();
  std::mt19937_64 rng(7103u);
  const std::vector<std::string> fiber{"y1", "y2"};
  for (int trial = 0; trial < 120; ++trial) {
    auto a = random_element(rng, ctx, 4);
    auto b = random_element(rng, ctx, 4);
    CHECK(fiber_integrate(a + b, fiber) ==
          fiber_integrate(a, fiber) + fiber_integrate(b, fiber));

    // Keep the product below the degree cap, otherwise truncation hits one
    // side before the integral and the other after.
    auto base_only = term(ctx, {{"p1", 1}}, make_rational(3, 7));
    GradedElement low = GradedElement::zero(ctx);
    for (int d = 0; d <= ctx->degree_cap() - 4; ++d) low = low + a.homogeneous_part(d);
    CHECK(fiber_integrate(mul(base_only, low), fiber) ==
          mul(base_only, fiber_integrate(low, fiber)));
    CHECK(fiber_integrate(base_only, fiber).is_zero());
  }
}

TEST_CASE("json serialization round-trips") {
  auto ctx = mixed_ring();

  SUBCASE("schema of a fixed element") {
    auto a = term(ctx, {{"y1", 1}, {"y2", 1}}, make_rational(1, 2)) + gen(ctx, "p1");
    nlohmann::json doc = element_to_json(a);
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["monomial"] == nlohmann::json::parse(R"([["y1",1],["y2",1]])"));
    CHECK(doc[0]["coeff"] == "1/2");
    CHECK(doc[1]["monomial"] == nlohmann::json::parse(R"([["p1",1]])"));
    CHECK(doc[1]["coeff"] == "1");
    CHECK(element_from_json(ctx, doc) == a);
  }

  SUBCASE("random round trips") {
    std::mt19937_64 rng(7104u);
    for (int trial = 0; trial < 150; ++trial) {
      auto a = random_element(rng, ctx, 5);
      CHECK(element_from_json(ctx, element_to_json(a)) == a);
    }
  }

  SUBCASE("malformed documents are input errors") {
    CHECK_THROWS_AS(element_from_json(ctx, nlohmann::json::object()), InputError);
    CHECK_THROWS_AS(element_from_json(ctx, nlohmann::json::parse(R"([{"coeff":"1"}])")),
                    InputError);
    CHECK_THROWS_AS(
        element_from_json(ctx, nlohmann::json::parse(R"([{"monomial":[],"coeff":"0"}])")),
        InputError);
    CHECK_THROWS_AS(
        element_from_json(
            ctx, nlohmann::json::parse(
                     R"([{"monomial":[["y1",1]],"coeff":"1"},{"monomial":[["y1",1]],"coeff":"2"}])")),
        InputError);
    CHECK_THROWS_AS(
        element_from_json(ctx, nlohmann::json::parse(R"([{"monomial":[["zz",1]],"coeff":"1"}])")),
        InputError);
  }
}

TEST_CASE("division guards") {
  auto ctx = mixed_ring();
  CHECK_THROWS_AS(gen(ctx, "y1") / Rational(0), InputError);
  CHECK_THROWS_AS(power_truncated(gen(ctx, "y1"), -1), InputError);
}
