#include "yamabe/charclass.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <mutex>
#include <numeric>

namespace yamabe {

namespace {

void extend_partitions(int remaining, int min_part, Partition& current,
                       std::vector<Partition>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (int part = min_part; part <= remaining; ++part) {
    current.push_back(part);
    extend_partitions(remaining - part, part, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Partition> partitions_of(int n) {
  if (n < 0) throw InputError("partitions_of requires a nonnegative integer");
  std::vector<Partition> out;
  Partition current;
  extend_partitions(n, 1, current, out);
  return out;
}

std::string partition_key(const Partition& parts) {
  Partition sorted = parts;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) return "1";
  std::string key;
  for (std::size_t i = 0; i < sorted.size();) {
    if (sorted[i] < 1) throw InputError("partition parts must be positive");
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    key += "p" + std::to_string(sorted[i]);
    if (j - i > 1) key += "^" + std::to_string(j - i);
    i = j;
  }
  return key;
}

Partition parse_partition_key(const std::string& key) {
  if (key == "1") return {};
  Partition parts;
  std::size_t pos = 0;
  auto read_int = [&]() {
    std::size_t start = pos;
    while (pos < key.size() && std::isdigit(static_cast<unsigned char>(key[pos]))) ++pos;
    if (pos == start) throw InputError("malformed partition key '" + key + "'");
    return std::stoi(key.substr(start, pos - start));
  };
  while (pos < key.size()) {
    if (key[pos] != 'p') throw InputError("malformed partition key '" + key + "'");
    ++pos;
    int part = read_int();
    if (part < 1) throw InputError("partition parts must be positive in '" + key + "'");
    int mult = 1;
    if (pos < key.size() && key[pos] == '^') {
      ++pos;
      mult = read_int();
      if (mult < 1) throw InputError("partition multiplicity must be positive in '" + key + "'");
    }
    for (int i = 0; i < mult; ++i) parts.push_back(part);
  }
  std::sort(parts.begin(), parts.end());
  return parts;
}

int PontryaginData::quarter_dimension() const {
  if (dimension < 0 || dimension % 4 != 0) {
    throw InputError("base dimension must be a nonnegative multiple of 4");
  }
  return dimension / 4;
}

void PontryaginData::validate() const {
  int d = quarter_dimension();
  for (const auto& [key, value] : numbers) {
    Partition parts = parse_partition_key(key);
    int weight = std::accumulate(parts.begin(), parts.end(), 0);
    if (weight != d) {
      throw InputError("Pontryagin number key '" + key + "' is not a partition of " +
                       std::to_string(d));
    }
    if (partition_key(parts) != key) {
      throw InputError("Pontryagin number key '" + key + "' is not in canonical form");
    }
  }
}

Rational MultiplicativeSeries::coefficient(const std::string& key) const {
  auto it = coefficients.find(key);
  return it == coefficients.end() ? Rational(0) : it->second;
}

int ahat_default_bound() {
  static const int bound = [] {
    const char* raw = std::getenv("YAMABE_CERT_DEGREE_CAP");
    if (raw == nullptr || *raw == '\0') return 6;
    char* end = nullptr;
    long value = std::strtol(raw, &end, 10);
    if (end == nullptr || *end != '\0' || value < 0 || value > 12) return 6;
    return static_cast<int>(value);
  }();
  return bound;
}

namespace {

// Taylor coefficients of sinh(sqrt(t)/2)/(sqrt(t)/2) in t: t^j / (4^j (2j+1)!).
std::vector<Rational> normalized_sinh_series(int bound) {
  std::vector<Rational> s(bound + 1);
  for (int j = 0; j <= bound; ++j) {
    Integer four_pow = 1;
    for (int i = 0; i < j; ++i) four_pow *= 4;
    s[j] = Rational(1) / (Rational(four_pow) * factorial(2 * j + 1));
  }
  return s;
}

MultiplicativeSeries compute_series(int bound) {
  MultiplicativeSeries table;
  table.degree_bound = bound;
  table.coefficients.emplace("1", Rational(1));
  if (bound == 0) return table;

  // q = 1/s, the single-root characteristic series; l = log q.
  std::vector<Rational> s = normalized_sinh_series(bound);
  std::vector<Rational> q(bound + 1), l(bound + 1);
  q[0] = 1;
  for (int m = 1; m <= bound; ++m) {
    Rational acc(0);
    for (int i = 1; i <= m; ++i) acc += s[i] * q[m - i];
    q[m] = -acc;
  }
  for (int m = 1; m <= bound; ++m) {
    Rational acc = Rational(m) * q[m];
    for (int i = 1; i < m; ++i) acc -= Rational(i) * l[i] * q[m - i];
    l[m] = acc / m;
  }

  // Work in the ring generated by e_1..e_bound (the Pontryagin classes),
  // weight i scaled by 4 to reuse the graded machinery's even arithmetic.
  std::vector<Generator> gens;
  for (int i = 1; i <= bound; ++i) gens.push_back({"p" + std::to_string(i), 4 * i});
  RingContextPtr ctx = RingContext::create(std::move(gens), 4 * bound);

  // Power sums in the elementary-symmetric generators via Newton's identity.
  std::vector<GradedElement> power_sums;
  power_sums.reserve(bound + 1);
  power_sums.push_back(GradedElement::zero(ctx));
  for (int m = 1; m <= bound; ++m) {
    GradedElement pm = GradedElement::zero(ctx);
    for (int i = 1; i < m; ++i) {
      GradedElement contrib =
          mul(GradedElement::from_generator(ctx, "p" + std::to_string(i)), power_sums[m - i]);
      pm = i % 2 == 1 ? pm + contrib : pm - contrib;
    }
    GradedElement last =
        Rational(m) * GradedElement::from_generator(ctx, "p" + std::to_string(m));
    pm = m % 2 == 1 ? pm + last : pm - last;
    power_sums.push_back(std::move(pm));
  }

  GradedElement log_total = GradedElement::zero(ctx);
  for (int m = 1; m <= bound; ++m) log_total = log_total + l[m] * power_sums[m];
  GradedElement series = exp_truncated(log_total);

  for (const auto& [mono, coeff] : series.terms()) {
    Partition parts;
    for (auto [idx, exp] : mono.factors()) {
      int part = ctx->generator(idx).degree / 4;
      for (int i = 0; i < exp; ++i) parts.push_back(part);
    }
    table.coefficients.insert_or_assign(partition_key(parts), coeff);
  }
  // Partitions whose coefficient vanished still get explicit zero entries
  // so the table enumerates every partition of every j <= bound.
  for (int j = 1; j <= bound; ++j) {
    for (const Partition& parts : partitions_of(j)) {
      table.coefficients.try_emplace(partition_key(parts), Rational(0));
    }
  }
  return table;
}

MultiplicativeSeries slice_series(const MultiplicativeSeries& full, int bound) {
  MultiplicativeSeries out;
  out.degree_bound = bound;
  for (const auto& [key, coeff] : full.coefficients) {
    Partition parts = parse_partition_key(key);
    if (std::accumulate(parts.begin(), parts.end(), 0) <= bound) {
      out.coefficients.emplace(key, coeff);
    }
  }
  return out;
}

}  // namespace

const MultiplicativeSeries& ahat_polynomials(int max_degree) {
  if (max_degree < 0) throw InputError("series degree bound must be nonnegative");
  static std::mutex mutex;
  static std::map<int, MultiplicativeSeries> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(max_degree);
  if (it != cache.end()) return it->second;

  int computed_bound = std::max(max_degree, ahat_default_bound());
  auto full = cache.find(computed_bound);
  if (full == cache.end()) {
    full = cache.emplace(computed_bound, compute_series(computed_bound)).first;
  }
  if (computed_bound == max_degree) return full->second;
  return cache.emplace(max_degree, slice_series(full->second, max_degree)).first->second;
}

GenusValue ahat_genus(const PontryaginData& base) {
  base.validate();
  int d = base.quarter_dimension();
  GenusValue result;
  result.non_spin_warning = !base.spin;
  if (d == 0) {
    auto it = base.numbers.find("1");
    result.value = it == base.numbers.end() ? Rational(0) : Rational(it->second);
    return result;
  }
  const MultiplicativeSeries& series = ahat_polynomials(d);
  Rational total(0);
  for (const Partition& parts : partitions_of(d)) {
    std::string key = partition_key(parts);
    Rational coeff = series.coefficient(key);
    if (coeff == 0) continue;
    auto it = base.numbers.find(key);
    if (it == base.numbers.end()) {
      throw InputError("missing Pontryagin number for partition '" + key + "'");
    }
    total += coeff * Rational(it->second);
  }
  result.value = total;
  return result;
}

GradedElement ahat_class(RingContextPtr ctx, int max_degree) {
  const MultiplicativeSeries& series = ahat_polynomials(max_degree);
  std::map<Monomial, Rational> terms;
  for (const auto& [key, coeff] : series.coefficients) {
    if (coeff == 0) continue;
    Partition parts = parse_partition_key(key);
    if (std::accumulate(parts.begin(), parts.end(), 0) > max_degree) continue;
    std::vector<std::pair<std::string, int>> factors;
    for (std::size_t i = 0; i < parts.size();) {
      std::size_t j = i;
      while (j < parts.size() && parts[j] == parts[i]) ++j;
      factors.emplace_back("p" + std::to_string(parts[i]), static_cast<int>(j - i));
      i = j;
    }
    terms.emplace(monomial(*ctx, factors), coeff);
  }
  return GradedElement::from_terms(std::move(ctx), std::move(terms));
}

namespace {

GradedElement truncate_above(const GradedElement& a, int cap) {
  std::map<Monomial, Rational> terms;
  for (const auto& [m, c] : a.terms()) {
    if (m.degree(*a.context()) <= cap) terms.emplace(m, c);
  }
  return GradedElement::from_terms(a.context(), std::move(terms));
}

}  // namespace

GradedElement chern_character_line(RingContextPtr ctx, std::string_view c1_name, int cap) {
  std::size_t idx = ctx->index_of(c1_name);
  if (ctx->is_odd(idx)) {
    throw InputError("first Chern class '" + std::string(c1_name) +
                     "' must be an even-degree generator");
  }
  if (cap < 0) throw InputError("truncation cap must be nonnegative");
  GradedElement c1 = GradedElement::from_generator(ctx, c1_name);
  int cap_eff = std::min(cap, ctx->degree_cap());
  return truncate_above(exp_truncated(c1), cap_eff);
}

GradedElement chern_character_line(const GradedElement& c1) {
  const RingContext& ctx = *c1.context();
  for (const auto& [m, c] : c1.terms()) {
    int deg = m.degree(ctx);
    if (deg == 0 || deg % 2 != 0) {
      throw InputError("first Chern class must be a sum of positive even-degree terms");
    }
  }
  return exp_truncated(c1);
}

GradedElement spinc_parity(const GradedElement& c1_vertical) {
  std::map<Monomial, Rational> reduced;
  for (const auto& [m, c] : c1_vertical.terms()) {
    if (!is_integer(c)) {
      throw InputError("parity reduction requires integer coefficients");
    }
    if (numerator(c) % 2 != 0) reduced.emplace(m, Rational(1));
  }
  return GradedElement::from_terms(c1_vertical.context(), std::move(reduced));
}

}  // namespace yamabe
