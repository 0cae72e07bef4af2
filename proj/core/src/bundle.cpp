#include "yamabe/bundle.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "yamabe/errors.hpp"

namespace yamabe {

void BundleSpec::validate() const {
  base.validate();
  if (fiber_rank < 0) throw InputError("fiber rank must be nonnegative");
  cocycle.validate_structure();
  if (!cocycle.maps.empty() &&
      cocycle.fiber_rank() != static_cast<std::size_t>(fiber_rank)) {
    throw InputError("fiber rank does not match the transition matrix size");
  }
}

namespace {

Integer integer_from_json(const nlohmann::json& v, const char* what) {
  if (v.is_number_integer()) return Integer(v.get<long long>());
  if (v.is_string()) {
    const std::string& text = v.get_ref<const std::string&>();
    if (text.empty()) throw InputError(std::string(what) + " must be an integer");
    for (std::size_t i = 0; i < text.size(); ++i) {
      bool sign_ok = i == 0 && (text[i] == '-' || text[i] == '+') && text.size() > 1;
      if (!sign_ok && !std::isdigit(static_cast<unsigned char>(text[i]))) {
        throw InputError(std::string(what) + " must be an integer, got '" + text + "'");
      }
    }
    return Integer(text);
  }
  throw InputError(std::string(what) + " must be an integer");
}

IntAffineMap affine_from_json(const nlohmann::json& v, const std::string& key) {
  if (!v.is_object() || !v.contains("linear")) {
    throw InputError("transition '" + key + "' needs a 'linear' matrix");
  }
  const nlohmann::json& rows = v.at("linear");
  if (!rows.is_array() || rows.empty()) {
    throw InputError("transition '" + key + "' linear part must be a nonempty matrix");
  }
  std::vector<std::vector<Integer>> entries;
  for (const auto& row : rows) {
    if (!row.is_array()) {
      throw InputError("transition '" + key + "' linear part must be a matrix of rows");
    }
    std::vector<Integer> out_row;
    for (const auto& e : row) out_row.push_back(integer_from_json(e, "matrix entry"));
    entries.push_back(std::move(out_row));
  }
  IntAffineMap map;
  map.linear = IntMatrix::from_rows(entries);
  if (v.contains("translation")) {
    const nlohmann::json& t = v.at("translation");
    if (!t.is_array()) throw InputError("transition '" + key + "' translation must be an array");
    for (const auto& e : t) {
      if (e.is_string()) {
        map.translation.push_back(parse_rational(e.get_ref<const std::string&>()));
      } else if (e.is_number_integer()) {
        map.translation.push_back(Rational(e.get<long long>()));
      } else {
        throw InputError("transition '" + key +
                         "' translation entries must be exact (strings or integers)");
      }
    }
  } else {
    map.translation.assign(map.linear.rows(), Rational(0));
  }
  map.normalize();
  return map;
}

}  // namespace

Cocycle cocycle_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("cocycle document must be an object");
  if (!doc.contains("charts") || !doc.at("charts").is_array()) {
    throw InputError("cocycle document needs a 'charts' array");
  }
  Cocycle c;
  for (const auto& chart : doc.at("charts")) {
    if (!chart.is_string()) throw InputError("chart names must be strings");
    c.nerve.charts.push_back(chart.get<std::string>());
  }
  if (doc.contains("lattice_scale")) {
    if (!doc.at("lattice_scale").is_number_integer() || doc.at("lattice_scale").get<long>() < 1) {
      throw InputError("'lattice_scale' must be a positive integer");
    }
    c.lattice_scale = doc.at("lattice_scale").get<long>();
  }

  if (doc.contains("transitions")) {
    if (!doc.at("transitions").is_object()) {
      throw InputError("'transitions' must map 'A|B' keys to affine maps");
    }
    for (const auto& [key, value] : doc.at("transitions").items()) {
      std::size_t sep = key.find('|');
      if (sep == std::string::npos || sep == 0 || sep + 1 == key.size() ||
          key.find('|', sep + 1) != std::string::npos) {
        throw InputError("transition key '" + key + "' must have the form 'A|B'");
      }
      std::string a = key.substr(0, sep);
      std::string b = key.substr(sep + 1);
      IntAffineMap map = affine_from_json(value, key);
      if (a == b) {
        if (!map.is_identity()) {
          throw InputError("self transition '" + key + "' must be the identity");
        }
        continue;
      }
      c.maps.insert_or_assign({std::move(a), std::move(b)}, std::move(map));
    }
  }

  if (doc.contains("pairs")) {
    if (!doc.at("pairs").is_array()) throw InputError("'pairs' must be an array of chart pairs");
    for (const auto& entry : doc.at("pairs")) {
      if (!entry.is_array() || entry.size() != 2 || !entry.at(0).is_string() ||
          !entry.at(1).is_string()) {
        throw InputError("each overlap pair must be a two-element array of chart names");
      }
      std::string a = entry.at(0).get<std::string>();
      std::string b = entry.at(1).get<std::string>();
      c.nerve.pairs.insert({a, b});
      c.nerve.pairs.insert({b, a});
    }
  } else {
    for (const auto& [key, map] : c.maps) {
      c.nerve.pairs.insert(key);
      c.nerve.pairs.insert({key.second, key.first});
    }
  }

  for (const auto& pair : c.nerve.pairs) {
    std::pair<std::string, std::string> reversed{pair.second, pair.first};
    if (c.maps.count(pair) && !c.maps.count(reversed)) {
      c.maps.emplace(reversed, c.maps.at(pair).inverse());
    }
  }

  if (doc.contains("triples")) {
    if (!doc.at("triples").is_array()) throw InputError("'triples' must be an array");
    for (const auto& entry : doc.at("triples")) {
      if (!entry.is_array() || entry.size() != 3) {
        throw InputError("each triple must be a three-element array of chart names");
      }
      std::array<std::string, 3> t;
      for (int i = 0; i < 3; ++i) {
        if (!entry.at(i).is_string()) throw InputError("triple entries must be chart names");
        t[i] = entry.at(i).get<std::string>();
      }
      c.nerve.triples.insert(std::move(t));
    }
  } else {
    const auto& charts = c.nerve.charts;
    for (std::size_t i = 0; i < charts.size(); ++i) {
      for (std::size_t j = i + 1; j < charts.size(); ++j) {
        if (!c.nerve.pairs.count({charts[i], charts[j]})) continue;
        for (std::size_t l = j + 1; l < charts.size(); ++l) {
          if (c.nerve.pairs.count({charts[j], charts[l]}) &&
              c.nerve.pairs.count({charts[i], charts[l]})) {
            c.nerve.triples.insert({charts[i], charts[j], charts[l]});
          }
        }
      }
    }
  }
  return c;
}

nlohmann::json cocycle_to_json(const Cocycle& c) {
  nlohmann::json doc;
  doc["charts"] = c.nerve.charts;
  doc["lattice_scale"] = c.lattice_scale;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : c.nerve.pairs) {
    if (a < b) pairs.push_back({a, b});
  }
  doc["pairs"] = std::move(pairs);
  nlohmann::json triples = nlohmann::json::array();
  for (const auto& t : c.nerve.triples) triples.push_back({t[0], t[1], t[2]});
  doc["triples"] = std::move(triples);
  nlohmann::json transitions = nlohmann::json::object();
  for (const auto& [key, map] : c.maps) {
    nlohmann::json linear = nlohmann::json::array();
    for (std::size_t i = 0; i < map.linear.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < map.linear.cols(); ++j) {
        row.push_back(map.linear.at(i, j).str());
      }
      linear.push_back(std::move(row));
    }
    nlohmann::json translation = nlohmann::json::array();
    for (const Rational& t : map.translation) translation.push_back(to_string(t));
    transitions[key.first + "|" + key.second] = {{"linear", std::move(linear)},
                                                 {"translation", std::move(translation)}};
  }
  doc["transitions"] = std::move(transitions);
  return doc;
}

BundleSpec bundle_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("bundle document must be an object");
  for (const char* field : {"base", "fiber_rank", "cocycle", "omega_is_generator"}) {
    if (!doc.contains(field)) {
      throw InputError(std::string("bundle document is missing '") + field + "'");
    }
  }
  BundleSpec spec;
  const nlohmann::json& base = doc.at("base");
  if (!base.is_object() || !base.contains("dimension") || !base.contains("spin")) {
    throw InputError("'base' needs 'dimension' and 'spin'");
  }
  if (!base.at("dimension").is_number_integer()) {
    throw InputError("base 'dimension' must be an integer");
  }
  spec.base.dimension = base.at("dimension").get<int>();
  if (!base.at("spin").is_boolean()) throw InputError("base 'spin' must be a boolean");
  spec.base.spin = base.at("spin").get<bool>();
  if (base.contains("pontryagin_numbers")) {
    const nlohmann::json& numbers = base.at("pontryagin_numbers");
    if (!numbers.is_object()) throw InputError("'pontryagin_numbers' must be an object");
    for (const auto& [key, value] : numbers.items()) {
      spec.base.numbers.emplace(key, integer_from_json(value, "Pontryagin number"));
    }
  }
  if (spec.base.dimension == 0 && spec.base.numbers.empty()) {
    spec.base.numbers.emplace("1", Integer(1));  // point count convention
  }

  if (!doc.at("fiber_rank").is_number_integer()) {
    throw InputError("'fiber_rank' must be an integer");
  }
  spec.fiber_rank = doc.at("fiber_rank").get<int>();
  spec.cocycle = cocycle_from_json(doc.at("cocycle"));
  if (!doc.at("omega_is_generator").is_boolean()) {
    throw InputError("'omega_is_generator' must be a boolean");
  }
  spec.omega_is_generator = doc.at("omega_is_generator").get<bool>();
  spec.validate();
  return spec;
}

nlohmann::json bundle_spec_to_json(const BundleSpec& spec) {
  nlohmann::json numbers = nlohmann::json::object();
  for (const auto& [key, value] : spec.base.numbers) numbers[key] = value.str();
  return {{"base",
           {{"dimension", spec.base.dimension},
            {"spin", spec.base.spin},
            {"pontryagin_numbers", std::move(numbers)}}},
          {"fiber_rank", spec.fiber_rank},
          {"cocycle", cocycle_to_json(spec.cocycle)},
          {"omega_is_generator", spec.omega_is_generator}};
}

bool omega_invariance_check(int k, const IntMatrix& s) {
  if (k < 1) throw InputError("the invariance check needs at least one coordinate pair");
  if (!s.is_square() || s.rows() % 2 != 0) {
    throw ShapeError("invariance check requires a square matrix of even side");
  }
  if (s.rows() != static_cast<std::size_t>(2 * k)) {
    throw ShapeError("matrix side does not match the coordinate pair count");
  }
  std::size_t n = s.rows();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      // Coefficient of the pulled-back form on (a, b): the form paired
      // with the 2x2 minors of S, i.e. the second exterior power acting
      // on basis bivectors.
      Integer pulled = 0;
      for (int t = 0; t < k; ++t) {
        pulled += s.at(2 * t, a) * s.at(2 * t + 1, b) - s.at(2 * t, b) * s.at(2 * t + 1, a);
      }
      Integer expected = (b == a + 1 && a % 2 == 0) ? 1 : 0;
      if (pulled != expected) return false;
    }
  }
  return true;
}

IndexComputation index_pipelines(const BundleSpec& spec) {
  spec.validate();
  if (spec.fiber_rank < 2 || spec.fiber_rank % 2 != 0) {
    throw InputError("index computation needs an even fiber rank of at least 2");
  }
  if (!spec.omega_is_generator) {
    throw InputError("index computation requires the fiber 2-form to restrict to a generator");
  }
  if (!spec.base.spin) throw InputError("index computation requires a spin base");

  int d = spec.base.quarter_dimension();
  int k = spec.fiber_rank / 2;
  IndexComputation out;
  out.k = k;

  std::vector<Generator> gens;
  for (int i = 1; i <= d; ++i) gens.push_back({"p" + std::to_string(i), 4 * i});
  std::vector<std::string> fiber_names;
  for (int j = 1; j <= 2 * k; ++j) {
    fiber_names.push_back("y" + std::to_string(j));
    gens.push_back({fiber_names.back(), 1});
  }
  RingContextPtr ctx = RingContext::create(std::move(gens), spec.base.dimension + spec.fiber_rank);

  GradedElement omega = GradedElement::zero(ctx);
  for (int i = 0; i < k; ++i) {
    omega = omega + mul(GradedElement::from_generator(ctx, fiber_names[2 * i]),
                        GradedElement::from_generator(ctx, fiber_names[2 * i + 1]));
  }

  GradedElement ch = chern_character_line(omega);
  GradedElement base_class = ahat_class(ctx, d);  // the vertical bundle is flat, its factor is 1
  GradedElement product = mul(ch, base_class);
  GradedElement pushed = fiber_integrate(product, fiber_names);

  Rational symbolic(0);
  for (const auto& [m, c] : pushed.terms()) {
    if (m.degree(*ctx) != spec.base.dimension) continue;
    Partition parts;
    for (auto [idx, exp] : m.factors()) {
      int part = ctx->generator(idx).degree / 4;
      for (int i = 0; i < exp; ++i) parts.push_back(part);
    }
    std::string key = partition_key(parts);
    auto it = spec.base.numbers.find(key);
    if (it == spec.base.numbers.end()) {
      if (key == "1") continue;  // absent point count reads as zero
      throw InputError("missing Pontryagin number for partition '" + key + "'");
    }
    symbolic += c * Rational(it->second);
  }
  out.pipeline_symbolic = symbolic;

  GenusValue genus = ahat_genus(spec.base);
  out.genus = genus.value;
  out.non_spin_warning = genus.non_spin_warning;

  GradedElement omega_top = power_truncated(omega, k) / factorial(k);
  GradedElement integrated = fiber_integrate(omega_top, fiber_names);
  out.fiber_integral = integrated.is_zero() ? Rational(0) : integrated.scalar_value();
  out.pipeline_factored = out.genus * out.fiber_integral;

  if (out.pipeline_symbolic != out.pipeline_factored) {
    throw InternalError("index pipelines disagree: " + to_string(out.pipeline_symbolic) +
                        " vs " + to_string(out.pipeline_factored));
  }
  out.chern_character = std::move(ch);
  out.base_class = std::move(base_class);
  out.product = std::move(product);
  out.pushforward = std::move(pushed);
  return out;
}

Integer index_twisted_dirac(const BundleSpec& spec) {
  IndexComputation computation = index_pipelines(spec);
  if (!is_integer(computation.pipeline_symbolic)) {
    throw InputError("index value " + to_string(computation.pipeline_symbolic) +
                     " is not an integer; the base data is inconsistent");
  }
  return numerator(computation.pipeline_symbolic);
}

namespace {

std::optional<ThresholdInfo> attach_threshold(const BundleSpec& original,
                                              const Certificate& cert, const MetricData& data,
                                              std::vector<std::string>& notes) {
  if (data.metric.base_dim != original.base.dimension ||
      data.metric.fiber_dim != original.fiber_rank) {
    throw InputError("metric block sizes do not match the bundle data");
  }
  BlockMetric extended = data.metric;
  if (cert.upper.stabilized) {
    // The stabilized bundle is a metric product with a unit circle.
    extended.fiber_dim += 1;
    int t = extended.total_dim();
    for (Eigen::MatrixXd& s : extended.samples) {
      s.conservativeResize(t, t);
      s.row(t - 1).setZero();
      s.col(t - 1).setZero();
      s(t - 1, t - 1) = 1.0;
    }
  }
  if (extended.fiber_dim < 2 || extended.fiber_dim % 2 != 0) {
    notes.push_back("threshold skipped: the fiber frame has no complete coordinate pairs");
    return std::nullopt;
  }
  int k = extended.fiber_dim / 2;
  Eigen::MatrixXd form = standard_fiber_two_form(extended.base_dim, extended.fiber_dim, k);
  double norm = 0;
  for (const Eigen::MatrixXd& s : extended.samples) {
    norm = std::max(norm, two_form_norm(s, form));
  }
  ThresholdInfo info;
  info.dim_total = extended.total_dim();
  info.constant = default_weitzenbock_constant(info.dim_total);
  info.s_min = data.s_min;
  info.norm_at_1 = norm;
  info.n_star = weitzenbock_threshold(data.s_min, info.dim_total, norm);
  info.covering_degree = 1;
  for (int i = 0; i < extended.fiber_dim; ++i) info.covering_degree *= info.n_star;
  return info;
}

}  // namespace

Certificate certify_zero_yamabe(const BundleSpec& spec,
                                const std::optional<MetricData>& metric_data) {
  spec.validate();
  Certificate cert;
  auto withhold = [&cert](const std::string& why) {
    if (cert.reason.empty()) cert.reason = why;
  };

  cert.lower = validate_cocycle(spec.cocycle, /*modulo_lattice=*/true);
  if (!cert.lower.valid) {
    withhold("the transition data is not a cocycle modulo the lattice");
  }

  BundleSpec work = spec;
  bool upper_ready = cert.lower.valid;
  if (upper_ready && !spec.base.spin) {
    withhold("the base is not spin, so the index obstruction does not apply");
    upper_ready = false;
  }
  if (upper_ready && !spec.omega_is_generator) {
    withhold("the fiber 2-form does not restrict to a generator");
    upper_ready = false;
  }
  if (upper_ready && !spec.cocycle.translations_all_zero()) {
    withhold("transition translations are outside the certified covering construction");
    upper_ready = false;
  }

  if (upper_ready && work.fiber_rank % 2 == 1) {
    try {
      work.cocycle = stabilize_odd(work.cocycle);
      work.fiber_rank += 1;
      cert.upper.stabilized = true;
    } catch (const InputError& error) {
      withhold(std::string("stabilization unavailable: ") + error.what());
      upper_ready = false;
    }
  }

  if (upper_ready && work.fiber_rank == 2) {
    OrientationCoverResult oriented = orientation_double_cover(work.cocycle, work.base);
    if (oriented.doubled) {
      work.cocycle = std::move(oriented.cocycle);
      work.base = std::move(oriented.base);
      cert.upper.oriented = true;
      cert.notes.push_back("orientation double cover applied; Pontryagin numbers doubled");
    }
  }

  if (upper_ready && work.fiber_rank < 2) {
    withhold("the bundle has no fiber directions for the index construction");
    upper_ready = false;
  }

  if (upper_ready) {
    int k = work.fiber_rank / 2;
    bool invariant = true;
    for (const auto& [key, map] : work.cocycle.maps) {
      bool matrix_route = is_symplectic(map.linear);
      bool exterior_route = omega_invariance_check(k, map.linear);
      if (matrix_route != exterior_route) {
        throw InternalError("the two 2-form invariance routes disagree on (" + key.first +
                            ", " + key.second + ")");
      }
      if (!matrix_route) {
        invariant = false;
        break;
      }
    }
    if (!invariant) {
      withhold("a transition map does not preserve the fiber 2-form");
    } else {
      cert.upper.invariance_checked = true;
      cert.computation = index_pipelines(work);
      Integer index = index_twisted_dirac(work);
      cert.upper.index = index;
      cert.upper.fiber_rank_used = work.fiber_rank;
      if (index == 0) {
        withhold("the index vanishes, so the obstruction gives no upper bound");
      } else {
        cert.upper.holds = true;
      }
    }
  }

  if (metric_data) {
    cert.threshold = attach_threshold(spec, cert, *metric_data, cert.notes);
  }

  cert.established = cert.lower.valid && cert.upper.holds;
  if (cert.established) cert.reason.clear();
  return cert;
}

namespace {

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

}  // namespace

std::string certificate_to_text(const Certificate& cert) {
  std::ostringstream out;
  if (cert.established) {
    out << "Y(M) = 0; index = " << cert.upper.index->str()
        << "; T-structure witness: cocycle valid\n";
  } else {
    out << "certificate withheld: " << cert.reason << "\n";
  }

  if (cert.lower.valid) {
    out << "lower witness: cocycle valid modulo the lattice (" << cert.lower.triples_checked
        << " triples checked)\n";
  } else {
    out << "lower witness: cocycle invalid (" << cert.lower.failing_triples.size()
        << " failing triples, " << cert.lower.pair_failures.size() << " pair failures)\n";
    for (const TripleFailure& f : cert.lower.failing_triples) {
      out << "  failing triple (" << f.triple[0] << ", " << f.triple[1] << ", " << f.triple[2]
          << "): " << f.reason << "\n";
    }
    for (const std::string& f : cert.lower.pair_failures) out << "  " << f << "\n";
  }

  if (cert.upper.holds) {
    out << "upper witness: index = " << cert.upper.index->str() << " over fiber rank "
        << cert.upper.fiber_rank_used;
    if (cert.upper.stabilized) out << ", stabilized";
    if (cert.upper.oriented) out << ", oriented";
    out << "\n";
  } else {
    out << "upper witness: not established\n";
  }

  if (cert.computation) {
    const IndexComputation& c = *cert.computation;
    out << "characteristic genus: " << to_string(c.genus);
    if (c.non_spin_warning) out << " (non-spin warning)";
    out << "\n";
    out << "fiber integral: " << to_string(c.fiber_integral) << "\n";
    out << "pipeline check: symbolic " << to_string(c.pipeline_symbolic) << " = factored "
        << to_string(c.pipeline_factored) << "\n";
  }

  if (cert.threshold) {
    const ThresholdInfo& t = *cert.threshold;
    out << "positivity threshold: n* = " << t.n_star << ", covering degree "
        << t.covering_degree.str() << ", constant " << format_double(t.constant)
        << ", form norm " << format_double(t.norm_at_1) << ", s_min "
        << format_double(t.s_min) << "\n";
  }
  for (const std::string& note : cert.notes) out << "note: " << note << "\n";
  return out.str();
}

std::vector<nlohmann::json> certificate_records(const Certificate& cert) {
  std::vector<nlohmann::json> records;
  nlohmann::json failing = nlohmann::json::array();
  for (const TripleFailure& f : cert.lower.failing_triples) {
    failing.push_back({{"triple", {f.triple[0], f.triple[1], f.triple[2]}},
                       {"reason", f.reason}});
  }
  records.push_back({{"record", "lower_witness"},
                     {"valid", cert.lower.valid},
                     {"modulo_lattice", cert.lower.modulo_lattice},
                     {"triples_checked", cert.lower.triples_checked},
                     {"failing_triples", std::move(failing)},
                     {"pair_failures", cert.lower.pair_failures}});
  if (cert.computation) {
    const IndexComputation& c = *cert.computation;
    records.push_back({{"record", "index_computation"},
                       {"genus", to_string(c.genus)},
                       {"fiber_integral", to_string(c.fiber_integral)},
                       {"pipeline_symbolic", to_string(c.pipeline_symbolic)},
                       {"pipeline_factored", to_string(c.pipeline_factored)},
                       {"coordinate_pairs", c.k},
                       {"non_spin_warning", c.non_spin_warning}});
  }
  records.push_back(
      {{"record", "upper_witness"},
       {"holds", cert.upper.holds},
       {"index", cert.upper.index ? nlohmann::json(cert.upper.index->str())
                                  : nlohmann::json(nullptr)},
       {"fiber_rank", cert.upper.fiber_rank_used},
       {"stabilized", cert.upper.stabilized},
       {"oriented", cert.upper.oriented},
       {"invariance_checked", cert.upper.invariance_checked}});
  if (cert.threshold) {
    const ThresholdInfo& t = *cert.threshold;
    records.push_back({{"record", "threshold"},
                       {"n_star", t.n_star},
                       {"covering_degree", t.covering_degree.str()},
                       {"norm_at_1", t.norm_at_1},
                       {"s_min", t.s_min},
                       {"constant", t.constant},
                       {"dim_total", t.dim_total}});
  }
  for (const std::string& note : cert.notes) {
    records.push_back({{"record", "note"}, {"text", note}});
  }
  records.push_back({{"record", "verdict"},
                     {"established", cert.established},
                     {"verdict", cert.established ? "Y(M) = 0" : "withheld"},
                     {"reason", cert.reason}});
  return records;
}

}  // namespace yamabe
