#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "yamabe/bundle.hpp"
#include "yamabe/charclass.hpp"
#include "yamabe/cocycle.hpp"
#include "yamabe/constants.hpp"
#include "yamabe/errors.hpp"
#include "yamabe/graded.hpp"
#include "yamabe/metric.hpp"

namespace {

enum class Format { text, structured };

struct Options {
  Format format = Format::text;
  bool dump_classes = false;
  int jobs = 1;
};

nlohmann::json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw yamabe::InputError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw yamabe::InputError(path + ": " + e.what());
  }
}

std::string format_double(double v) {
  if (v == 0) v = 0;  // never print "-0"
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

void emit_class(std::ostream& out, Format format, const std::string& name,
                const yamabe::GradedElement& element) {
  nlohmann::json doc = yamabe::element_to_json(element);
  if (format == Format::structured) {
    out << nlohmann::json{{"record", "class"}, {"name", name}, {"element", std::move(doc)}}.dump()
        << "\n";
  } else {
    out << name << ": " << doc.dump() << "\n";
  }
}

void dump_computation_classes(std::ostream& out, Format format,
                              const yamabe::IndexComputation& c) {
  if (c.chern_character) emit_class(out, format, "chern_character", *c.chern_character);
  if (c.base_class) emit_class(out, format, "base_class", *c.base_class);
  if (c.product) emit_class(out, format, "product", *c.product);
  if (c.pushforward) emit_class(out, format, "pushforward", *c.pushforward);
}

int run_certify_one(const std::string& path, const std::optional<std::string>& metric_path,
                    const Options& opt, std::ostream& out) {
  yamabe::BundleSpec spec = yamabe::bundle_spec_from_json(read_document(path));
  std::optional<yamabe::MetricData> metric;
  if (metric_path) metric = yamabe::metric_data_from_json(read_document(*metric_path));
  yamabe::Certificate cert = yamabe::certify_zero_yamabe(spec, metric);
  if (opt.format == Format::structured) {
    for (const nlohmann::json& record : yamabe::certificate_records(cert)) {
      out << record.dump() << "\n";
    }
  } else {
    out << yamabe::certificate_to_text(cert);
  }
  if (opt.dump_classes && cert.computation) {
    dump_computation_classes(out, opt.format, *cert.computation);
  }
  return cert.established ? 0 : 2;
}

int run_index_one(const std::string& path, const Options& opt, std::ostream& out) {
  yamabe::BundleSpec spec = yamabe::bundle_spec_from_json(read_document(path));
  bool stabilized = false;
  if (spec.fiber_rank % 2 == 1) {
    spec.cocycle = yamabe::stabilize_odd(spec.cocycle);
    spec.fiber_rank += 1;
    stabilized = true;
  }
  yamabe::Integer index = yamabe::index_twisted_dirac(spec);
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "index"},
                          {"index", index.str()},
                          {"fiber_rank", spec.fiber_rank},
                          {"stabilized", stabilized}}
               .dump()
        << "\n";
  } else {
    out << "index = " << index.str() << "\n";
    if (stabilized) out << "stabilized to fiber rank " << spec.fiber_rank << "\n";
  }
  if (opt.dump_classes) {
    dump_computation_classes(out, opt.format, yamabe::index_pipelines(spec));
  }
  return 0;
}

int run_cocycle_check_one(const std::string& path, bool modulo_lattice, const Options& opt,
                          std::ostream& out) {
  yamabe::Cocycle c = yamabe::cocycle_from_json(read_document(path));
  yamabe::CocycleReport report = yamabe::validate_cocycle(c, modulo_lattice);
  if (opt.format == Format::structured) {
    nlohmann::json failing = nlohmann::json::array();
    for (const yamabe::TripleFailure& f : report.failing_triples) {
      failing.push_back({{"triple", {f.triple[0], f.triple[1], f.triple[2]}},
                         {"reason", f.reason}});
    }
    out << nlohmann::json{{"record", "cocycle_report"},
                          {"valid", report.valid},
                          {"modulo_lattice", report.modulo_lattice},
                          {"triples_checked", report.triples_checked},
                          {"failing_triples", std::move(failing)},
                          {"pair_failures", report.pair_failures}}
               .dump()
        << "\n";
  } else if (report.valid) {
    out << "cocycle valid" << (modulo_lattice ? " modulo the lattice" : "") << " ("
        << report.triples_checked << " triples checked)\n";
  } else {
    out << "cocycle invalid (" << report.failing_triples.size() << " failing triples, "
        << report.pair_failures.size() << " pair failures)\n";
    for (const yamabe::TripleFailure& f : report.failing_triples) {
      out << "  failing triple (" << f.triple[0] << ", " << f.triple[1] << ", " << f.triple[2]
          << "): " << f.reason << "\n";
    }
    for (const std::string& f : report.pair_failures) out << "  " << f << "\n";
  }
  return report.valid ? 0 : 2;
}

int run_ahat(int dim, const std::vector<std::pair<std::string, std::string>>& simple_numbers,
             const std::vector<std::string>& extra_numbers, bool non_spin, const Options& opt,
             std::ostream& out) {
  yamabe::PontryaginData data;
  data.dimension = dim;
  data.spin = !non_spin;
  for (const auto& [key, value] : simple_numbers) {
    if (value.empty()) continue;
    data.numbers.emplace(key, yamabe::Integer(value));
  }
  for (const std::string& entry : extra_numbers) {
    std::size_t sep = entry.find('=');
    if (sep == std::string::npos || sep == 0 || sep + 1 == entry.size()) {
      throw yamabe::InputError("--number expects KEY=VALUE, got '" + entry + "'");
    }
    data.numbers.insert_or_assign(entry.substr(0, sep), yamabe::Integer(entry.substr(sep + 1)));
  }
  yamabe::GenusValue genus = yamabe::ahat_genus(data);
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "ahat_genus"},
                          {"genus", yamabe::to_string(genus.value)},
                          {"non_spin_warning", genus.non_spin_warning}}
               .dump()
        << "\n";
  } else {
    out << "Â-genus = " << yamabe::to_string(genus.value);
    if (genus.non_spin_warning) out << " (non-spin warning)";
    out << "\n";
  }
  if (opt.dump_classes) {
    int d = data.quarter_dimension();
    if (d > 0) {
      std::vector<yamabe::Generator> gens;
      for (int i = 1; i <= d; ++i) gens.push_back({"p" + std::to_string(i), 4 * i});
      yamabe::RingContextPtr ctx = yamabe::RingContext::create(gens, 4 * d);
      emit_class(out, opt.format, "ahat_class", yamabe::ahat_class(ctx, d));
    }
  }
  return 0;
}

int run_cover(const std::string& path, long n, std::optional<int> fiber_rank,
              const Options& opt, std::ostream& out) {
  yamabe::Cocycle c = yamabe::cocycle_from_json(read_document(path));
  std::optional<std::size_t> rank;
  if (fiber_rank) {
    if (*fiber_rank < 1) throw yamabe::InputError("--fiber-rank must be positive");
    rank = static_cast<std::size_t>(*fiber_rank);
  }
  yamabe::LatticeCoverResult result = yamabe::lattice_cover(c, n, rank);
  nlohmann::json doc = yamabe::cocycle_to_json(result.cocycle);
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "cover"},
                          {"n", n},
                          {"covering_degree", result.covering_degree.str()}}
               .dump()
        << "\n";
    out << nlohmann::json{{"record", "cocycle"}, {"document", std::move(doc)}}.dump() << "\n";
  } else {
    out << "covering degree = " << result.covering_degree.str() << "\n";
    out << doc.dump(2) << "\n";
  }
  return 0;
}

int run_stabilize(const std::string& path, const Options& opt, std::ostream& out) {
  yamabe::Cocycle c = yamabe::cocycle_from_json(read_document(path));
  yamabe::Cocycle stabilized = yamabe::stabilize_odd(c);
  std::size_t rank = stabilized.fiber_rank();
  nlohmann::json doc = yamabe::cocycle_to_json(stabilized);
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "stabilize"}, {"fiber_rank", rank}}.dump() << "\n";
    out << nlohmann::json{{"record", "cocycle"}, {"document", std::move(doc)}}.dump() << "\n";
  } else {
    if (rank > 0) {
      out << "stabilized fiber rank = " << rank << "\n";
    } else {
      out << "stabilized (no transition maps)\n";
    }
    out << doc.dump(2) << "\n";
  }
  return 0;
}

int run_orient(const std::string& path, const Options& opt, std::ostream& out) {
  yamabe::BundleSpec spec = yamabe::bundle_spec_from_json(read_document(path));
  yamabe::OrientationCoverResult result =
      yamabe::orientation_double_cover(spec.cocycle, spec.base);
  yamabe::BundleSpec oriented = spec;
  oriented.cocycle = result.cocycle;
  oriented.base = result.base;
  nlohmann::json doc = yamabe::bundle_spec_to_json(oriented);
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "orient"},
                          {"doubled", result.doubled},
                          {"chart_count", oriented.cocycle.nerve.charts.size()}}
               .dump()
        << "\n";
    out << nlohmann::json{{"record", "bundle"}, {"document", std::move(doc)}}.dump() << "\n";
  } else {
    out << (result.doubled ? "orientation cover: doubled\n"
                           : "orientation cover: already oriented\n");
    out << doc.dump(2) << "\n";
  }
  return 0;
}

int run_decay(const std::string& path, int k, const std::vector<long>& n_values,
              const Options& opt, std::ostream& out) {
  yamabe::MetricData data = yamabe::metric_data_from_json(read_document(path));
  yamabe::DecayReport report = yamabe::decay_rate(data.metric, k, n_values);
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "decay"},
                          {"n_values", report.n_values},
                          {"norms", report.norms},
                          {"fitted_slope", report.fitted_slope},
                          {"r_squared", report.r_squared}}
               .dump()
        << "\n";
  } else {
    out << "n,norm\n";
    for (std::size_t i = 0; i < report.n_values.size(); ++i) {
      out << report.n_values[i] << "," << format_double(report.norms[i]) << "\n";
    }
    char line[64];
    std::snprintf(line, sizeof(line), "slope = %.2f\n", report.fitted_slope);
    out << line;
    std::snprintf(line, sizeof(line), "r_squared = %.4f\n", report.r_squared);
    out << line;
  }
  return 0;
}

int run_threshold(const std::string& path, std::optional<double> constant_override,
                  const Options& opt, std::ostream& out) {
  yamabe::MetricData data = yamabe::metric_data_from_json(read_document(path));
  if (data.metric.fiber_dim < 2 || data.metric.fiber_dim % 2 != 0) {
    throw yamabe::InputError("the threshold needs an even, positive fiber dimension");
  }
  int k = data.metric.fiber_dim / 2;
  Eigen::MatrixXd form =
      yamabe::standard_fiber_two_form(data.metric.base_dim, data.metric.fiber_dim, k);
  double norm = 0;
  for (const Eigen::MatrixXd& sample : data.metric.samples) {
    norm = std::max(norm, yamabe::two_form_norm(sample, form));
  }
  int total = data.metric.total_dim();
  long n_star = yamabe::weitzenbock_threshold(data.s_min, total, norm, constant_override);
  double constant =
      constant_override ? *constant_override : yamabe::default_weitzenbock_constant(total);
  yamabe::Integer degree = 1;
  for (int i = 0; i < data.metric.fiber_dim; ++i) degree *= n_star;
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "threshold"},
                          {"n_star", n_star},
                          {"covering_degree", degree.str()},
                          {"norm_at_1", norm},
                          {"s_min", data.s_min},
                          {"constant", constant},
                          {"dim_total", total}}
               .dump()
        << "\n";
  } else {
    out << "positivity threshold: n* = " << n_star << ", covering degree " << degree.str()
        << ", constant " << format_double(constant) << ", form norm " << format_double(norm)
        << ", s_min " << format_double(data.s_min) << "\n";
  }
  return 0;
}

int run_constants(const yamabe::YamabeValue& value, const Options& opt, std::ostream& out) {
  if (opt.format == Format::structured) {
    out << nlohmann::json{{"record", "constant"},
                          {"formula_id", value.formula_id},
                          {"value", value.value},
                          {"inputs", value.inputs}}
               .dump()
        << "\n";
  } else {
    out << value.formula_id << ": Y = " << format_double(value.value) << "\n";
  }
  return 0;
}

struct FileResult {
  std::string output;
  std::string error;
  int code = 0;
};

FileResult guard(const std::function<int(std::ostream&)>& fn) {
  FileResult result;
  std::ostringstream out;
  try {
    result.code = fn(out);
  } catch (const yamabe::UnsupportedError& e) {
    result.error = std::string("unsupported: ") + e.what() + "\n";
    result.code = 2;
  } catch (const std::exception& e) {
    result.error = std::string("error: ") + e.what() + "\n";
    result.code = 1;
  }
  result.output = out.str();
  return result;
}

int merge_exit(int current, int incoming) {
  if (current == 1 || incoming == 1) return 1;
  return std::max(current, incoming);
}

/// Runs one handler per file (waves of size jobs) and prints results in
/// input order, so parallel runs stay byte-identical to serial ones.
int run_batch(const std::vector<std::string>& files, const Options& opt,
              const std::function<int(const std::string&, std::ostream&)>& fn) {
  std::vector<FileResult> results(files.size());
  std::size_t jobs = static_cast<std::size_t>(std::max(1, opt.jobs));
  for (std::size_t start = 0; start < files.size(); start += jobs) {
    std::size_t end = std::min(files.size(), start + jobs);
    std::vector<std::future<FileResult>> wave;
    for (std::size_t i = start; i < end; ++i) {
      const std::string& path = files[i];
      wave.push_back(std::async(std::launch::async,
                                [&fn, &path] { return guard([&](std::ostream& out) {
                                  return fn(path, out);
                                }); }));
    }
    for (std::size_t i = start; i < end; ++i) results[i] = wave[i - start].get();
  }

  int exit_code = 0;
  bool annotate = files.size() > 1;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (annotate) {
      if (opt.format == Format::structured) {
        std::cout << nlohmann::json{{"record", "input"}, {"path", files[i]}}.dump() << "\n";
      } else {
        std::cout << "== " << files[i] << " ==\n";
      }
    }
    std::cout << results[i].output;
    std::cerr << results[i].error;
    exit_code = merge_exit(exit_code, results[i].code);
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* raw = std::getenv("YAMABE_CERT_DEGREE_CAP"); raw != nullptr && *raw != '\0') {
    char* end = nullptr;
    long value = std::strtol(raw, &end, 10);
    if (end == nullptr || *end != '\0' || value < 0 || value > 12) {
      std::cerr << "error: YAMABE_CERT_DEGREE_CAP must be an integer in [0, 12], got '" << raw
                << "'\n";
      return 1;
    }
  }

  CLI::App app{"exact certificates for vanishing Yamabe invariant on torus bundles"};
  app.require_subcommand(1);

  Options opt;
  std::string format = "text";
  app.add_option("--format", format, "output format: text or structured (line-delimited records)")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();
  app.add_flag("--dump-classes", opt.dump_classes,
               "also emit the characteristic-class elements as documents");
  app.add_option("--jobs", opt.jobs, "parallel workers for multi-file commands")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* certify = app.add_subcommand("certify", "two-sided certificate for bundle documents");
  std::vector<std::string> certify_files;
  std::string certify_metric;
  certify->add_option("files", certify_files, "bundle documents")->required();
  certify->add_option("--metric", certify_metric,
                      "block-metric document; adds the positivity threshold");

  auto* index = app.add_subcommand("index", "twisted Dirac index of bundle documents");
  std::vector<std::string> index_files;
  index->add_option("files", index_files, "bundle documents")->required();

  auto* ahat = app.add_subcommand("ahat", "genus of the given Pontryagin numbers");
  int ahat_dim = 0;
  std::string ahat_p1, ahat_p2, ahat_p3, ahat_p4;
  std::vector<std::string> ahat_numbers;
  bool ahat_non_spin = false;
  ahat->add_option("--dim", ahat_dim, "base dimension (a multiple of 4)")->required();
  ahat->add_option("--p1", ahat_p1, "Pontryagin number p1");
  ahat->add_option("--p2", ahat_p2, "Pontryagin number p2");
  ahat->add_option("--p3", ahat_p3, "Pontryagin number p3");
  ahat->add_option("--p4", ahat_p4, "Pontryagin number p4");
  ahat->add_option("--number", ahat_numbers,
                   "extra Pontryagin number as KEY=VALUE, e.g. p1^2=4");
  ahat->add_flag("--non-spin", ahat_non_spin, "mark the base as non-spin");

  auto* cocycle_check = app.add_subcommand("cocycle-check", "validate transition documents");
  std::vector<std::string> cocycle_files;
  bool modulo_lattice = false;
  cocycle_check->add_option("files", cocycle_files, "cocycle documents")->required();
  cocycle_check->add_flag("--modulo-lattice", modulo_lattice,
                          "compare translations modulo the lattice");

  auto* cover = app.add_subcommand("cover", "pass to the refined-lattice cover");
  std::string cover_file;
  long cover_n = 0;
  std::optional<int> cover_rank;
  cover->add_option("file", cover_file, "cocycle document")->required();
  cover->add_option("--n", cover_n, "lattice refinement factor")->required();
  cover->add_option("--fiber-rank", cover_rank,
                    "fiber rank when the document has no transition maps");

  auto* stabilize = app.add_subcommand("stabilize", "double the odd fiber direction");
  std::string stabilize_file;
  stabilize->add_option("file", stabilize_file, "cocycle document")->required();

  auto* orient = app.add_subcommand("orient", "orientation double cover of a bundle document");
  std::string orient_file;
  orient->add_option("file", orient_file, "bundle document")->required();

  auto* decay = app.add_subcommand("decay", "fiber 2-form norms under covering scalings");
  std::string decay_file;
  int decay_k = 1;
  std::vector<long> decay_n;
  decay->add_option("file", decay_file, "block-metric document")->required();
  decay->add_option("--n", decay_n, "comma-separated scaling values, e.g. 1,2,4,8")
      ->required()
      ->delimiter(',');
  decay->add_option("--k", decay_k, "fiber coordinate pairs")->capture_default_str();

  auto* threshold = app.add_subcommand("threshold", "positivity threshold from a metric document");
  std::string threshold_file;
  std::optional<double> threshold_constant;
  threshold->add_option("file", threshold_file, "block-metric document with s_min")->required();
  threshold->add_option("--constant", threshold_constant, "override the curvature constant");

  auto* constants = app.add_subcommand("constants", "closed-form Yamabe values");
  std::optional<int> constants_sphere;
  std::optional<int> constants_surface;
  bool constants_kahler = false;
  int constants_chi = 0, constants_tau = 0;
  bool constants_cp2 = false;
  constants->add_option("--sphere", constants_sphere, "round sphere of this dimension");
  constants->add_option("--surface", constants_surface, "closed surface with this Euler number");
  constants->add_flag("--kahler", constants_kahler, "minimal Kahler surface");
  constants->add_option("--chi", constants_chi, "Euler number for --kahler");
  constants->add_option("--tau", constants_tau, "signature for --kahler");
  constants->add_flag("--cp2", constants_cp2, "take the projective-plane branch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  opt.format = format == "structured" ? Format::structured : Format::text;

  if (app.got_subcommand(certify)) {
    std::optional<std::string> metric;
    if (!certify_metric.empty()) metric = certify_metric;
    return run_batch(certify_files, opt, [&](const std::string& path, std::ostream& out) {
      return run_certify_one(path, metric, opt, out);
    });
  }
  if (app.got_subcommand(index)) {
    return run_batch(index_files, opt, [&](const std::string& path, std::ostream& out) {
      return run_index_one(path, opt, out);
    });
  }
  if (app.got_subcommand(cocycle_check)) {
    return run_batch(cocycle_files, opt, [&](const std::string& path, std::ostream& out) {
      return run_cocycle_check_one(path, modulo_lattice, opt, out);
    });
  }

  FileResult result;
  if (app.got_subcommand(ahat)) {
    result = guard([&](std::ostream& out) {
      std::vector<std::pair<std::string, std::string>> simple{
          {"p1", ahat_p1}, {"p2", ahat_p2}, {"p3", ahat_p3}, {"p4", ahat_p4}};
      return run_ahat(ahat_dim, simple, ahat_numbers, ahat_non_spin, opt, out);
    });
  } else if (app.got_subcommand(cover)) {
    result = guard([&](std::ostream& out) {
      return run_cover(cover_file, cover_n, cover_rank, opt, out);
    });
  } else if (app.got_subcommand(stabilize)) {
    result = guard([&](std::ostream& out) { return run_stabilize(stabilize_file, opt, out); });
  } else if (app.got_subcommand(orient)) {
    result = guard([&](std::ostream& out) { return run_orient(orient_file, opt, out); });
  } else if (app.got_subcommand(decay)) {
    result = guard([&](std::ostream& out) {
      return run_decay(decay_file, decay_k, decay_n, opt, out);
    });
  } else if (app.got_subcommand(threshold)) {
    result = guard([&](std::ostream& out) {
      return run_threshold(threshold_file, threshold_constant, opt, out);
    });
  } else if (app.got_subcommand(constants)) {
    result = guard([&](std::ostream& out) {
      int selected = (constants_sphere ? 1 : 0) + (constants_surface ? 1 : 0) +
                     (constants_kahler ? 1 : 0);
      if (selected != 1) {
        throw yamabe::InputError(
            "choose exactly one of --sphere, --surface, or --kahler");
      }
      yamabe::YamabeValue value;
      if (constants_sphere) {
        value = yamabe::yamabe_sphere(*constants_sphere);
      } else if (constants_surface) {
        value = yamabe::yamabe_surface(*constants_surface);
      } else {
        value = yamabe::yamabe_kahler(constants_chi, constants_tau, constants_cp2);
      }
      return run_constants(value, opt, out);
    });
  }
  std::cout << result.output;
  std::cerr << result.error;
  return result.code;
}
