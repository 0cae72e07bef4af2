#include "yamabe/cocycle.hpp"

#include <algorithm>

#include "yamabe/errors.hpp"

namespace yamabe {

IntMatrix standard_alternating_form(std::size_t k) {
  IntMatrix j(2 * k, 2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    j.at(2 * i, 2 * i + 1) = 1;
    j.at(2 * i + 1, 2 * i) = -1;
  }
  return j;
}

bool is_symplectic(const IntMatrix& m) {
  if (!m.is_square() || m.rows() % 2 != 0) {
    throw ShapeError("symplectic check requires a square matrix of even side");
  }
  IntMatrix j = standard_alternating_form(m.rows() / 2);
  return m.transpose() * j * m == j;
}

IntAffineMap IntAffineMap::identity(std::size_t m) {
  return {IntMatrix::identity(m), std::vector<Rational>(m, Rational(0))};
}

bool IntAffineMap::is_identity() const {
  if (linear != IntMatrix::identity(dim())) return false;
  return std::all_of(translation.begin(), translation.end(),
                     [](const Rational& t) { return t == 0; });
}

IntAffineMap IntAffineMap::inverse() const {
  IntAffineMap out;
  out.linear = linear.inverse_unimodular();
  std::vector<Rational> moved = out.linear.apply(translation);
  out.translation.reserve(moved.size());
  for (const Rational& t : moved) out.translation.push_back(mod_one(-t));
  return out;
}

IntAffineMap IntAffineMap::compose_after(const IntAffineMap& first) const {
  IntAffineMap out;
  out.linear = linear * first.linear;
  std::vector<Rational> moved = linear.apply(first.translation);
  out.translation.reserve(moved.size());
  for (std::size_t i = 0; i < moved.size(); ++i) {
    out.translation.push_back(mod_one(moved[i] + translation[i]));
  }
  return out;
}

void IntAffineMap::normalize() {
  for (Rational& t : translation) t = mod_one(t);
}

void IntAffineMap::validate() const {
  if (!linear.is_square()) throw ShapeError("affine map with non-square linear part");
  if (translation.size() != linear.rows()) {
    throw ShapeError("affine map translation length does not match the linear part");
  }
  Integer det = linear.determinant();
  if (det != 1 && det != -1) {
    throw InputError("affine map linear part must have determinant +-1");
  }
  for (const Rational& t : translation) {
    if (t < 0 || t >= 1) throw InputError("affine map translation must be reduced mod 1");
  }
}

bool CoverNerve::has_chart(const std::string& name) const {
  return std::find(charts.begin(), charts.end(), name) != charts.end();
}

void CoverNerve::validate() const {
  if (charts.empty()) throw InputError("cover nerve needs at least one chart");
  std::set<std::string> seen;
  for (const auto& chart : charts) {
    if (chart.empty()) throw InputError("cover nerve with an empty chart name");
    if (chart.find('|') != std::string::npos) {
      throw InputError("chart name '" + chart + "' must not contain '|'");
    }
    if (!seen.insert(chart).second) throw InputError("duplicate chart '" + chart + "'");
  }
  for (const auto& [a, b] : pairs) {
    if (!seen.count(a) || !seen.count(b)) {
      throw InputError("overlap pair (" + a + ", " + b + ") references an unknown chart");
    }
    if (a == b) throw InputError("overlap pair (" + a + ", " + a + ") is not allowed");
    if (!pairs.count({b, a})) {
      throw InputError("overlap pairs are not symmetric-closed at (" + a + ", " + b + ")");
    }
  }
  for (const auto& t : triples) {
    for (auto [x, y] : {std::pair{t[0], t[1]}, std::pair{t[1], t[2]}, std::pair{t[0], t[2]}}) {
      if (!pairs.count({x, y})) {
        throw InputError("triple (" + t[0] + ", " + t[1] + ", " + t[2] +
                         ") lacks the overlap pair (" + x + ", " + y + ")");
      }
    }
  }
}

std::size_t Cocycle::fiber_rank() const {
  return maps.empty() ? 0 : maps.begin()->second.dim();
}

const IntAffineMap& Cocycle::map_for(const std::string& from, const std::string& to) const {
  auto it = maps.find({from, to});
  if (it == maps.end()) {
    throw InputError("missing transition map for overlap (" + from + ", " + to + ")");
  }
  return it->second;
}

bool Cocycle::translations_all_zero() const {
  for (const auto& [key, map] : maps) {
    for (const Rational& t : map.translation) {
      if (t != 0) return false;
    }
  }
  return true;
}

void Cocycle::validate_structure() const {
  nerve.validate();
  if (lattice_scale < 1) throw InputError("lattice scale must be a positive integer");
  std::size_t rank = fiber_rank();
  for (const auto& [key, map] : maps) {
    if (!nerve.pairs.count(key)) {
      throw InputError("transition map for (" + key.first + ", " + key.second +
                       ") has no overlap pair in the nerve");
    }
    map.validate();
    if (map.dim() != rank) throw ShapeError("transition maps of mixed rank");
  }
  for (const auto& pair : nerve.pairs) {
    if (!maps.count(pair)) {
      throw InputError("missing transition map for overlap (" + pair.first + ", " +
                       pair.second + ")");
    }
  }
}

namespace {

bool translations_congruent(const std::vector<Rational>& a, const std::vector<Rational>& b,
                            bool modulo_lattice, long lattice_scale) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rational diff = a[i] - b[i];
    if (modulo_lattice) {
      if (!is_integer(diff * Rational(lattice_scale))) return false;
    } else {
      if (diff != 0) return false;
    }
  }
  return true;
}

}  // namespace

CocycleReport validate_cocycle(const Cocycle& c, bool modulo_lattice) {
  c.validate_structure();
  CocycleReport report;
  report.modulo_lattice = modulo_lattice;

  std::vector<Rational> zero(c.fiber_rank(), Rational(0));
  for (const auto& [pair, forward] : c.maps) {
    if (pair.first > pair.second) continue;
    const IntAffineMap& backward = c.map_for(pair.second, pair.first);
    IntMatrix round_trip = backward.linear * forward.linear;
    std::vector<Rational> moved = backward.linear.apply(forward.translation);
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += backward.translation[i];
    if (round_trip != IntMatrix::identity(c.fiber_rank()) ||
        !translations_congruent(moved, zero, modulo_lattice, c.lattice_scale)) {
      report.pair_failures.push_back("g(" + pair.second + ", " + pair.first +
                                     ") is not the inverse of g(" + pair.first + ", " +
                                     pair.second + ")");
    }
  }

  for (const auto& triple : c.nerve.triples) {
    ++report.triples_checked;
    const IntAffineMap& g_ab = c.map_for(triple[0], triple[1]);
    const IntAffineMap& g_bc = c.map_for(triple[1], triple[2]);
    const IntAffineMap& g_ac = c.map_for(triple[0], triple[2]);
    IntMatrix composed_linear = g_bc.linear * g_ab.linear;
    std::vector<Rational> composed_translation = g_bc.linear.apply(g_ab.translation);
    for (std::size_t i = 0; i < composed_translation.size(); ++i) {
      composed_translation[i] += g_bc.translation[i];
    }
    std::string reason;
    if (composed_linear != g_ac.linear) {
      reason = "linear parts do not compose";
    } else if (!translations_congruent(composed_translation, g_ac.translation, modulo_lattice,
                                       c.lattice_scale)) {
      reason = modulo_lattice ? "translations do not compose modulo the lattice"
                              : "translations do not compose exactly";
    }
    if (!reason.empty()) report.failing_triples.push_back({triple, reason});
  }

  report.valid = report.failing_triples.empty() && report.pair_failures.empty();
  return report;
}

LatticeCoverResult lattice_cover(const Cocycle& c, long n, std::optional<std::size_t> fiber_rank) {
  if (n < 1) throw InputError("covering parameter must be a positive integer");
  if (!c.translations_all_zero()) {
    throw UnsupportedError(
        "lattice covering is only supported for translation-free cocycles");
  }
  if (!validate_cocycle(c, false).valid) {
    throw InputError("lattice covering requires a cocycle satisfying the exact condition");
  }
  LatticeCoverResult result;
  result.cocycle = c;
  result.cocycle.lattice_scale = c.lattice_scale * n;
  if (!validate_cocycle(result.cocycle, false).valid) {
    throw InternalError("lattice cover broke the exact cocycle condition");
  }
  std::size_t rank = fiber_rank.value_or(c.fiber_rank());
  result.covering_degree = 1;
  for (std::size_t i = 0; i < rank; ++i) result.covering_degree *= n;
  return result;
}

namespace {

// Splits M as S + (eps): S of size m-1, eps = +-1 in the last coordinate.
std::pair<IntMatrix, Integer> split_last_block(const IntMatrix& m) {
  std::size_t n = m.rows();
  Integer eps = m.at(n - 1, n - 1);
  if (eps != 1 && eps != -1) {
    throw InputError("linear part does not decompose: last diagonal entry is not +-1");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (m.at(i, n - 1) != 0 || m.at(n - 1, i) != 0) {
      throw InputError("linear part does not decompose: last coordinate is not split off");
    }
  }
  IntMatrix s(n - 1, n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j + 1 < n; ++j) s.at(i, j) = m.at(i, j);
  }
  return {std::move(s), eps};
}

}  // namespace

Cocycle stabilize_odd(const Cocycle& c) {
  c.validate_structure();
  Cocycle out;
  out.nerve = c.nerve;
  out.lattice_scale = c.lattice_scale;
  if (c.maps.empty()) return out;

  std::size_t m = c.fiber_rank();
  if (m % 2 == 0) {
    throw InputError("stabilization applies to odd fiber rank, got " + std::to_string(m));
  }
  for (const auto& [key, map] : c.maps) {
    auto [s, eps] = split_last_block(map.linear);
    if (!is_symplectic(s)) {
      throw InputError("linear part does not decompose: leading block is not symplectic");
    }
    IntMatrix grown(m + 1, m + 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      for (std::size_t j = 0; j + 1 < m; ++j) grown.at(i, j) = s.at(i, j);
    }
    grown.at(m - 1, m - 1) = eps;
    grown.at(m, m) = eps;
    IntAffineMap grown_map{std::move(grown), map.translation};
    grown_map.translation.push_back(Rational(0));
    if (!is_symplectic(grown_map.linear)) {
      throw InternalError("stabilized linear part failed the symplectic check");
    }
    out.maps.emplace(key, std::move(grown_map));
  }
  return out;
}

OrientationCoverResult orientation_double_cover(const Cocycle& c, const PontryaginData& base) {
  base.validate();
  if (!validate_cocycle(c, true).valid) {
    throw InputError("orientation cover requires a valid cocycle");
  }

  OrientationCoverResult result;
  bool any_negative = false;
  std::map<std::pair<std::string, std::string>, Integer> dets;
  for (const auto& [key, map] : c.maps) {
    if (map.dim() != 2) {
      throw InputError("orientation cover expects rank-2 transition data");
    }
    Integer det = map.linear.determinant();
    dets.emplace(key, det);
    if (det < 0) any_negative = true;
  }
  if (!any_negative) {
    result.cocycle = c;
    result.base = base;
    result.doubled = false;
    return result;
  }

  auto sheet_name = [](const std::string& chart, int s) { return chart + (s > 0 ? "+" : "-"); };
  IntMatrix flip = IntMatrix::identity(2);
  flip.at(1, 1) = -1;
  auto gauge = [&](int s) { return s > 0 ? IntMatrix::identity(2) : flip; };

  Cocycle doubled;
  doubled.lattice_scale = c.lattice_scale;
  for (const auto& chart : c.nerve.charts) {
    doubled.nerve.charts.push_back(sheet_name(chart, +1));
    doubled.nerve.charts.push_back(sheet_name(chart, -1));
  }
  for (const auto& [key, map] : c.maps) {
    int delta = dets.at(key) > 0 ? 1 : -1;
    for (int s : {+1, -1}) {
      std::pair<std::string, std::string> lifted{sheet_name(key.first, s),
                                                 sheet_name(key.second, s * delta)};
      doubled.nerve.pairs.insert(lifted);
      IntAffineMap lifted_map;
      lifted_map.linear = gauge(s * delta) * map.linear * gauge(s);
      std::vector<Rational> moved = gauge(s * delta).apply(map.translation);
      for (const Rational& t : moved) lifted_map.translation.push_back(mod_one(t));
      doubled.maps.emplace(std::move(lifted), std::move(lifted_map));
    }
  }
  for (const auto& triple : c.nerve.triples) {
    int d_ab = dets.at({triple[0], triple[1]}) > 0 ? 1 : -1;
    int d_ac = dets.at({triple[0], triple[2]}) > 0 ? 1 : -1;
    for (int s : {+1, -1}) {
      doubled.nerve.triples.insert({sheet_name(triple[0], s), sheet_name(triple[1], s * d_ab),
                                    sheet_name(triple[2], s * d_ac)});
    }
  }

  for (const auto& [key, map] : doubled.maps) {
    if (map.linear.determinant() != 1) {
      throw InternalError("orientation cover produced a determinant other than +1");
    }
  }
  if (!validate_cocycle(doubled, true).valid) {
    throw InternalError("orientation cover broke the cocycle condition");
  }

  result.cocycle = std::move(doubled);
  result.base = base;
  for (auto& [key, value] : result.base.numbers) value *= 2;
  result.doubled = true;
  return result;
}

}  // namespace yamabe
