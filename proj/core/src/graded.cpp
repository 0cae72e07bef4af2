#include "yamabe/graded.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace yamabe {

namespace {

bool canonical_less(const Generator& a, const Generator& b) {
  return std::tie(a.degree, a.name) < std::tie(b.degree, b.name);
}

}  // namespace

RingContext::RingContext(std::vector<Generator> generators, int degree_cap)
    : generators_(std::move(generators)), degree_cap_(degree_cap) {
  std::sort(generators_.begin(), generators_.end(), canonical_less);
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const auto& g = generators_[i];
    if (g.degree < 1) throw InputError("generator '" + g.name + "' must have degree >= 1");
    if (g.name.empty()) throw InputError("generator with empty name");
    if (!by_name_.emplace(g.name, i).second) {
      throw InputError("duplicate generator name '" + g.name + "'");
    }
  }
  if (degree_cap_ < 0) throw InputError("degree cap must be nonnegative");
}

RingContextPtr RingContext::create(std::vector<Generator> generators, int degree_cap) {
  return RingContextPtr(new RingContext(std::move(generators), degree_cap));
}

std::optional<std::size_t> RingContext::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t RingContext::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw InputError("unknown generator '" + std::string(name) + "'");
  return *idx;
}

Monomial::Monomial(const RingContext& ctx, std::vector<std::pair<std::size_t, int>> factors)
    : factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    auto [idx, exp] = factors_[i];
    if (idx >= ctx.size()) throw InputError("generator index out of range");
    if (exp < 1) throw InputError("monomial exponent must be >= 1");
    if (i > 0 && factors_[i - 1].first == idx) throw InputError("repeated generator in monomial");
    if (ctx.is_odd(idx) && exp > 1) {
      throw InputError("odd generator '" + ctx.generator(idx).name + "' with exponent > 1");
    }
  }
}

int Monomial::degree(const RingContext& ctx) const {
  int d = 0;
  for (auto [idx, exp] : factors_) d += ctx.generator(idx).degree * exp;
  return d;
}

int Monomial::exponent_of(std::size_t gen_index) const {
  for (auto [idx, exp] : factors_) {
    if (idx == gen_index) return exp;
  }
  return 0;
}

Monomial monomial(const RingContext& ctx,
                  const std::vector<std::pair<std::string, int>>& factors) {
  std::vector<std::pair<std::size_t, int>> resolved;
  resolved.reserve(factors.size());
  for (const auto& [name, exp] : factors) resolved.emplace_back(ctx.index_of(name), exp);
  return Monomial(ctx, std::move(resolved));
}

namespace {

// Product of canonical monomials. Returns nullopt when a shared odd
// generator kills the product; otherwise the canonical monomial and the
// sign (-1)^{inversions between the two odd-factor sequences}.
std::optional<std::pair<Monomial, int>> mul_monomials(const RingContext& ctx, const Monomial& a,
                                                      const Monomial& b) {
  std::vector<std::size_t> odd_a, odd_b;
  for (auto [idx, exp] : a.factors()) {
    if (ctx.is_odd(idx)) odd_a.push_back(idx);
  }
  for (auto [idx, exp] : b.factors()) {
    if (ctx.is_odd(idx)) odd_b.push_back(idx);
  }
  long inversions = 0;
  for (std::size_t y : odd_b) {
    for (std::size_t x : odd_a) {
      if (x == y) return std::nullopt;  // odd square
      if (x > y) ++inversions;
    }
  }

  std::vector<std::pair<std::size_t, int>> merged;
  merged.reserve(a.factors().size() + b.factors().size());
  auto it = a.factors().begin(), jt = b.factors().begin();
  while (it != a.factors().end() && jt != b.factors().end()) {
    if (it->first < jt->first) {
      merged.push_back(*it++);
    } else if (jt->first < it->first) {
      merged.push_back(*jt++);
    } else {
      merged.emplace_back(it->first, it->second + jt->second);
      ++it, ++jt;
    }
  }
  merged.insert(merged.end(), it, a.factors().end());
  merged.insert(merged.end(), jt, b.factors().end());
  return std::make_pair(Monomial(ctx, std::move(merged)), inversions % 2 == 0 ? 1 : -1);
}

void require_same_context(const GradedElement& a, const GradedElement& b) {
  if (a.context() != b.context()) {
    throw ContextError("operands belong to different ring contexts");
  }
}

}  // namespace

GradedElement GradedElement::zero(RingContextPtr ctx) { return GradedElement(std::move(ctx), {}); }

GradedElement GradedElement::one(RingContextPtr ctx) {
  return scalar(std::move(ctx), Rational(1));
}

GradedElement GradedElement::scalar(RingContextPtr ctx, Rational value) {
  std::map<Monomial, Rational> terms;
  if (value != 0) terms.emplace(Monomial{}, std::move(value));
  return GradedElement(std::move(ctx), std::move(terms));
}

GradedElement GradedElement::from_generator(RingContextPtr ctx, std::string_view name) {
  std::size_t idx = ctx->index_of(name);
  Monomial m(*ctx, {{idx, 1}});
  std::map<Monomial, Rational> terms;
  if (m.degree(*ctx) <= ctx->degree_cap()) terms.emplace(std::move(m), Rational(1));
  return GradedElement(std::move(ctx), std::move(terms));
}

GradedElement GradedElement::from_terms(RingContextPtr ctx, std::map<Monomial, Rational> terms) {
  for (auto it = terms.begin(); it != terms.end();) {
    if (it->second == 0 || it->first.degree(*ctx) > ctx->degree_cap()) {
      it = terms.erase(it);
    } else {
      ++it;
    }
  }
  return GradedElement(std::move(ctx), std::move(terms));
}

bool GradedElement::is_scalar() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_unit());
}

Rational GradedElement::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

Rational GradedElement::scalar_value() const {
  if (!is_scalar()) throw ShapeError("element is not a scalar");
  return coefficient(Monomial{});
}

GradedElement GradedElement::homogeneous_part(int degree) const {
  std::map<Monomial, Rational> part;
  for (const auto& [m, c] : terms_) {
    if (m.degree(*ctx_) == degree) part.emplace(m, c);
  }
  return GradedElement(ctx_, std::move(part));
}

GradedElement GradedElement::operator-() const {
  std::map<Monomial, Rational> terms = terms_;
  for (auto& [m, c] : terms) c = -c;
  return GradedElement(ctx_, std::move(terms));
}

bool GradedElement::operator==(const GradedElement& other) const {
  return ctx_ == other.ctx_ && terms_ == other.terms_;
}

GradedElement operator+(const GradedElement& a, const GradedElement& b) {
  require_same_context(a, b);
  std::map<Monomial, Rational> terms = a.terms();
  for (const auto& [m, c] : b.terms()) {
    auto [it, inserted] = terms.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }
  return GradedElement::from_terms(a.context(), std::move(terms));
}

GradedElement operator-(const GradedElement& a, const GradedElement& b) { return a + (-b); }

GradedElement operator*(const Rational& c, const GradedElement& a) {
  if (c == 0) return GradedElement::zero(a.context());
  std::map<Monomial, Rational> terms = a.terms();
  for (auto& [m, v] : terms) v *= c;
  return GradedElement::from_terms(a.context(), std::move(terms));
}

GradedElement operator/(const GradedElement& a, const Rational& c) {
  if (c == 0) throw InputError("division of graded element by zero");
  return Rational(1) / c * a;
}

GradedElement mul(const GradedElement& a, const GradedElement& b) {
  require_same_context(a, b);
  const RingContext& ctx = *a.context();
  std::map<Monomial, Rational> terms;
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      auto prod = mul_monomials(ctx, ma, mb);
      if (!prod) continue;
      auto& [m, sign] = *prod;
      if (m.degree(ctx) > ctx.degree_cap()) continue;
      Rational contrib = ca * cb;
      if (sign < 0) contrib = -contrib;
      auto [it, inserted] = terms.emplace(std::move(m), contrib);
      if (!inserted) {
        it->second += contrib;
        if (it->second == 0) terms.erase(it);
      }
    }
  }
  return GradedElement::from_terms(a.context(), std::move(terms));
}

GradedElement operator*(const GradedElement& a, const GradedElement& b) { return mul(a, b); }

GradedElement power_truncated(const GradedElement& a, long k) {
  if (k < 0) throw InputError("power_truncated requires a nonnegative exponent");
  GradedElement result = GradedElement::one(a.context());
  GradedElement base = a;
  while (k > 0) {
    if (k & 1) result = mul(result, base);
    k >>= 1;
    if (k > 0) base = mul(base, base);
  }
  return result;
}

GradedElement exp_truncated(const GradedElement& a) {
  if (a.coefficient(Monomial{}) != 0) {
    throw InputError("exp_truncated requires an element without degree-zero term");
  }
  GradedElement acc = GradedElement::one(a.context());
  GradedElement pw = GradedElement::one(a.context());
  Rational fact(1);
  for (long j = 1; j <= a.context()->degree_cap(); ++j) {
    pw = mul(pw, a);
    if (pw.is_zero()) break;
    fact *= j;
    acc = acc + pw / fact;
  }
  return acc;
}

GradedElement fiber_integrate(const GradedElement& a,
                              const std::vector<std::string>& fiber_generators) {
  const RingContext& ctx = *a.context();
  std::vector<std::size_t> fiber;
  fiber.reserve(fiber_generators.size());
  std::set<std::size_t> seen;
  for (const auto& name : fiber_generators) {
    std::size_t idx = ctx.index_of(name);
    if (ctx.generator(idx).degree != 1) {
      throw InputError("fiber generator '" + name + "' must have degree 1");
    }
    if (!seen.insert(idx).second) throw InputError("duplicate fiber generator '" + name + "'");
    fiber.push_back(idx);
  }

  std::map<Monomial, Rational> result;
  for (const auto& [m, c] : a.terms()) {
    std::vector<std::pair<std::size_t, int>> rest_factors;
    std::vector<std::size_t> odd_in_order;  // odd factors of m, canonical order
    for (auto [idx, exp] : m.factors()) {
      if (ctx.is_odd(idx)) {
        odd_in_order.push_back(idx);
        if (!seen.count(idx)) rest_factors.emplace_back(idx, exp);
      } else {
        rest_factors.emplace_back(idx, exp);
      }
    }
    bool has_all = std::all_of(fiber.begin(), fiber.end(), [&](std::size_t f) {
      return std::find(odd_in_order.begin(), odd_in_order.end(), f) != odd_in_order.end();
    });
    if (!has_all) continue;

    // Target word: remaining odds (canonical order), then fiber generators
    // in the caller's order. Sign = parity of the permutation source->target.
    std::vector<std::size_t> target;
    for (std::size_t idx : odd_in_order) {
      if (!seen.count(idx)) target.push_back(idx);
    }
    target.insert(target.end(), fiber.begin(), fiber.end());
    std::vector<std::size_t> positions;
    positions.reserve(odd_in_order.size());
    for (std::size_t idx : odd_in_order) {
      auto it = std::find(target.begin(), target.end(), idx);
      positions.push_back(static_cast<std::size_t>(it - target.begin()));
    }
    long inversions = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      for (std::size_t j = i + 1; j < positions.size(); ++j) {
        if (positions[i] > positions[j]) ++inversions;
      }
    }
    Rational contrib = inversions % 2 == 0 ? c : -c;
    auto [it, inserted] = result.emplace(Monomial(ctx, std::move(rest_factors)), contrib);
    if (!inserted) {
      it->second += contrib;
      if (it->second == 0) result.erase(it);
    }
  }
  return GradedElement::from_terms(a.context(), std::move(result));
}

Rational top_coefficient(const GradedElement& a, int top_degree, const Monomial& volume) {
  const RingContext& ctx = *a.context();
  if (volume.degree(ctx) != top_degree) {
    throw InputError("volume monomial degree does not match top degree");
  }
  Rational value(0);
  for (const auto& [m, c] : a.terms()) {
    if (m.degree(ctx) != top_degree) continue;
    if (!(m == volume)) {
      throw ShapeError("top-degree part is not proportional to the volume monomial");
    }
    value = c;
  }
  return value;
}

GradedElement substitute(const GradedElement& a, std::string_view generator_name,
                         const GradedElement& replacement) {
  require_same_context(a, replacement);
  const RingContext& ctx = *a.context();
  std::size_t gen = ctx.index_of(generator_name);
  int gen_degree = ctx.generator(gen).degree;
  if (gen_degree % 2 != 0) throw InputError("substitution only supports even generators");
  for (const auto& [m, c] : replacement.terms()) {
    if (m.degree(ctx) != gen_degree) {
      throw InputError("replacement must be homogeneous of the generator's degree");
    }
  }

  GradedElement acc = GradedElement::zero(a.context());
  for (const auto& [m, c] : a.terms()) {
    int exp = m.exponent_of(gen);
    if (exp == 0) {
      acc = acc + GradedElement::from_terms(a.context(), {{m, c}});
      continue;
    }
    std::vector<std::pair<std::size_t, int>> rest;
    for (auto [idx, e] : m.factors()) {
      if (idx != gen) rest.emplace_back(idx, e);
    }
    GradedElement rest_elem =
        GradedElement::from_terms(a.context(), {{Monomial(ctx, std::move(rest)), c}});
    acc = acc + mul(rest_elem, power_truncated(replacement, exp));
  }
  return acc;
}

nlohmann::json element_to_json(const GradedElement& a) {
  const RingContext& ctx = *a.context();
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [m, c] : a.terms()) {
    nlohmann::json mono = nlohmann::json::array();
    for (auto [idx, exp] : m.factors()) {
      mono.push_back({ctx.generator(idx).name, exp});
    }
    out.push_back({{"monomial", std::move(mono)}, {"coeff", to_string(c)}});
  }
  return out;
}

GradedElement element_from_json(RingContextPtr ctx, const nlohmann::json& doc) {
  if (!doc.is_array()) throw InputError("graded element document must be an array of terms");
  std::map<Monomial, Rational> terms;
  for (const auto& term : doc) {
    if (!term.is_object() || !term.contains("monomial") || !term.contains("coeff")) {
      throw InputError("graded element term needs 'monomial' and 'coeff'");
    }
    std::vector<std::pair<std::string, int>> factors;
    for (const auto& f : term.at("monomial")) {
      if (!f.is_array() || f.size() != 2 || !f.at(0).is_string() ||
          !f.at(1).is_number_integer()) {
        throw InputError("monomial factor must be [generator, exponent]");
      }
      factors.emplace_back(f.at(0).get<std::string>(), f.at(1).get<int>());
    }
    Monomial m = monomial(*ctx, factors);
    if (m.degree(*ctx) > ctx->degree_cap()) {
      throw InputError("term exceeds the context degree cap");
    }
    Rational c = parse_rational(term.at("coeff").get<std::string>());
    if (c == 0) throw InputError("graded element term with zero coefficient");
    if (!terms.emplace(std::move(m), std::move(c)).second) {
      throw InputError("duplicate monomial in graded element document");
    }
  }
  return GradedElement::from_terms(std::move(ctx), std::move(terms));
}

}  // namespace yamabe
