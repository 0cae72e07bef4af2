#include "yamabe/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "yamabe/errors.hpp"
#include "yamabe/graded.hpp"

namespace yamabe {

void BlockMetric::validate() const {
  if (base_dim < 0 || fiber_dim < 0 || total_dim() < 1) {
    throw InputError("block metric needs nonnegative block sizes and positive total dimension");
  }
  if (samples.empty()) throw InputError("block metric needs at least one sample");
  constexpr double kTolerance = 1e-10;
  for (const Eigen::MatrixXd& s : samples) {
    if (s.rows() != total_dim() || s.cols() != total_dim()) {
      throw ShapeError("metric sample size does not match base_dim + fiber_dim");
    }
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > kTolerance) {
      throw InputError("metric sample is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(s);
    if (eigs.info() != Eigen::Success || eigs.eigenvalues().minCoeff() <= kTolerance) {
      throw InputError("metric sample is not positive-definite");
    }
  }
}

BlockMetric scale_metric(const BlockMetric& h, long n) {
  if (n < 1) throw InputError("metric scaling parameter must be a positive integer");
  BlockMetric out = h;
  double nd = static_cast<double>(n);
  for (Eigen::MatrixXd& s : out.samples) {
    s.topRightCorner(h.base_dim, h.fiber_dim) *= nd;
    s.bottomLeftCorner(h.fiber_dim, h.base_dim) *= nd;
    s.bottomRightCorner(h.fiber_dim, h.fiber_dim) *= nd * nd;
  }
  return out;
}

Eigen::MatrixXd standard_fiber_two_form(int base_dim, int fiber_dim, int k) {
  if (base_dim < 0 || fiber_dim < 0 || k < 0) {
    throw InputError("two-form frame sizes must be nonnegative");
  }
  if (2 * k > fiber_dim) {
    throw InputError("fiber dimension too small for " + std::to_string(k) + " coordinate pairs");
  }
  int total = base_dim + fiber_dim;
  Eigen::MatrixXd form = Eigen::MatrixXd::Zero(total, total);
  for (int i = 0; i < k; ++i) {
    form(base_dim + 2 * i, base_dim + 2 * i + 1) = 1.0;
    form(base_dim + 2 * i + 1, base_dim + 2 * i) = -1.0;
  }
  return form;
}

double two_form_norm(const Eigen::MatrixXd& metric_sample, const Eigen::MatrixXd& form) {
  if (metric_sample.rows() != metric_sample.cols()) {
    throw ShapeError("metric sample must be square");
  }
  if (form.rows() != metric_sample.rows() || form.cols() != metric_sample.cols()) {
    throw ShapeError("form dimensions do not match the metric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(metric_sample);
  if (llt.info() != Eigen::Success) {
    throw NumericError("metric sample is numerically singular");
  }
  // |phi|^2 = (1/2) tr(phi^T g^{-1} phi g^{-1}) = -(1/2) tr((g^{-1} phi)^2)
  // for antisymmetric phi.
  Eigen::MatrixXd raised = llt.solve(form);
  // Written as a coefficient sum rather than a matrix product: an unqualified
  // product here would pull the graded-ring operator* into overload resolution.
  double squared = -0.5 * raised.cwiseProduct(raised.transpose()).sum();
  if (squared < 0) squared = 0;
  return std::sqrt(squared);
}

DecayReport decay_rate(const BlockMetric& h, int k, const std::vector<long>& n_set) {
  h.validate();
  if (k < 1) throw InputError("the fiber form needs at least one coordinate pair");
  if (n_set.size() < 4) throw InputError("decay fit needs at least 4 scaling values");
  for (std::size_t i = 0; i < n_set.size(); ++i) {
    if (n_set[i] < 1) throw InputError("scaling values must be positive integers");
    if (i > 0 && n_set[i] <= n_set[i - 1]) {
      throw InputError("scaling values must be strictly increasing");
    }
  }
  if (n_set.back() < 4 * n_set.front()) {
    throw InputError("scaling values must span at least two octaves");
  }

  Eigen::MatrixXd form = standard_fiber_two_form(h.base_dim, h.fiber_dim, k);
  DecayReport report;
  report.n_values = n_set;
  for (long n : n_set) {
    BlockMetric scaled = scale_metric(h, n);
    double worst = 0;
    for (const Eigen::MatrixXd& s : scaled.samples) {
      worst = std::max(worst, two_form_norm(s, form));
    }
    report.norms.push_back(worst);
  }
  if (std::all_of(report.norms.begin(), report.norms.end(),
                  [](double v) { return v <= 0; })) {
    throw NumericError("decay fit is degenerate: the form has zero norm everywhere");
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n_set.size(); ++i) {
    if (report.norms[i] <= 0) {
      throw NumericError("decay fit is degenerate: zero norm at n = " +
                         std::to_string(n_set[i]));
    }
    // Base-2 logs: the slope is base-independent, and power-of-two inputs
    // then fit without rounding error.
    xs.push_back(std::log2(static_cast<double>(n_set[i])));
    ys.push_back(std::log2(report.norms[i]));
  }
  double x_mean = 0, y_mean = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= static_cast<double>(xs.size());
  y_mean /= static_cast<double>(ys.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
  }
  report.fitted_slope = sxy / sxx;
  double intercept = y_mean - report.fitted_slope * x_mean;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double predicted = intercept + report.fitted_slope * xs[i];
    ss_res += (ys[i] - predicted) * (ys[i] - predicted);
    ss_tot += (ys[i] - y_mean) * (ys[i] - y_mean);
  }
  report.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  return report;
}

double default_weitzenbock_constant(int dim_total) {
  if (dim_total < 1) throw InputError("total dimension must be positive");
  return static_cast<double>(dim_total) * (dim_total - 1) / 2.0;
}

bool weitzenbock_satisfied(double s_min, double constant, double norm_at_1, long n) {
  double nd = static_cast<double>(n);
  return constant * 2.0 * std::numbers::pi * norm_at_1 / (nd * nd) < s_min;
}

long weitzenbock_threshold(double s_min, int dim_total, double norm_at_1,
                           std::optional<double> constant_override) {
  if (!(s_min > 0)) {
    throw InputError("positivity threshold needs a positive scalar-curvature minimum");
  }
  if (norm_at_1 < 0 || !std::isfinite(norm_at_1)) {
    throw InputError("the form norm at n = 1 must be a finite nonnegative value");
  }
  double constant =
      constant_override ? *constant_override : default_weitzenbock_constant(dim_total);
  if (!(constant > 0) && constant != 0) {
    throw InputError("the curvature constant must be positive");
  }
  if (weitzenbock_satisfied(s_min, constant, norm_at_1, 1)) return 1;
  double quotient = constant * 2.0 * std::numbers::pi * norm_at_1 / s_min;
  if (!(quotient < 8.0e36)) {
    throw NumericError("positivity threshold exceeds the representable range");
  }
  long n = std::max(1L, static_cast<long>(std::sqrt(quotient)));
  while (!weitzenbock_satisfied(s_min, constant, norm_at_1, n)) ++n;
  while (n > 1 && weitzenbock_satisfied(s_min, constant, norm_at_1, n - 1)) --n;
  return n;
}

bool symplectic_nondegeneracy(const std::vector<std::vector<Rational>>& sigma_block, int k) {
  if (k < 0) throw InputError("the fiber pair count must be nonnegative");
  std::size_t b = sigma_block.size();
  if (b % 2 != 0) throw ShapeError("nondegeneracy check requires even dimension");
  for (std::size_t i = 0; i < b; ++i) {
    if (sigma_block[i].size() != b) throw ShapeError("sigma block must be square");
    if (sigma_block[i][i] != 0) throw InputError("sigma block must be antisymmetric");
    for (std::size_t j = i + 1; j < b; ++j) {
      if (sigma_block[i][j] != -sigma_block[j][i]) {
        throw InputError("sigma block must be antisymmetric");
      }
    }
  }
  std::size_t total = b + 2 * static_cast<std::size_t>(k);
  if (total == 0) return true;
  if (total > 9999) throw UnsupportedError("nondegeneracy check limited to dimension 9999");

  std::vector<Generator> gens;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < total; ++i) {
    std::string name = (i < b ? "x" : "y") + std::string(4 - std::to_string(i).size(), '0') +
                       std::to_string(i);
    names.push_back(name);
    gens.push_back({name, 1});
  }
  RingContextPtr ctx = RingContext::create(gens, static_cast<int>(total));

  GradedElement form = GradedElement::zero(ctx);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      if (sigma_block[i][j] == 0) continue;
      GradedElement wedge = mul(GradedElement::from_generator(ctx, names[i]),
                                GradedElement::from_generator(ctx, names[j]));
      form = form + sigma_block[i][j] * wedge;
    }
  }
  for (int i = 0; i < k; ++i) {
    GradedElement wedge = mul(GradedElement::from_generator(ctx, names[b + 2 * i]),
                              GradedElement::from_generator(ctx, names[b + 2 * i + 1]));
    form = form + wedge;
  }

  GradedElement top = power_truncated(form, static_cast<long>(total / 2));
  std::vector<std::pair<std::string, int>> volume_factors;
  for (const std::string& name : names) volume_factors.emplace_back(name, 1);
  Rational top_value =
      top_coefficient(top, static_cast<int>(total), monomial(*ctx, volume_factors));
  return top_value != 0;
}

MetricData metric_data_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("metric document must be an object");
  for (const char* field : {"base_dim", "fiber_dim", "samples"}) {
    if (!doc.contains(field)) {
      throw InputError(std::string("metric document is missing '") + field + "'");
    }
  }
  MetricData data;
  if (!doc.at("base_dim").is_number_integer() || !doc.at("fiber_dim").is_number_integer()) {
    throw InputError("metric block sizes must be integers");
  }
  data.metric.base_dim = doc.at("base_dim").get<int>();
  data.metric.fiber_dim = doc.at("fiber_dim").get<int>();
  int total = data.metric.base_dim + data.metric.fiber_dim;
  if (total < 1) throw InputError("metric document has an empty frame");

  const nlohmann::json& samples = doc.at("samples");
  if (!samples.is_array() || samples.empty()) {
    throw InputError("metric document needs a nonempty 'samples' array");
  }
  for (const auto& sample : samples) {
    if (!sample.is_array() || sample.size() != static_cast<std::size_t>(total) * total) {
      throw InputError("each metric sample must hold base+fiber squared entries, row-major");
    }
    Eigen::MatrixXd m(total, total);
    for (int r = 0; r < total; ++r) {
      for (int c = 0; c < total; ++c) {
        const auto& entry = sample.at(static_cast<std::size_t>(r) * total + c);
        if (!entry.is_number()) throw InputError("metric entries must be numbers");
        m(r, c) = entry.get<double>();
      }
    }
    data.metric.samples.push_back(std::move(m));
  }
  if (doc.contains("s_min")) {
    if (!doc.at("s_min").is_number()) throw InputError("'s_min' must be a number");
    data.s_min = doc.at("s_min").get<double>();
  }
  data.metric.validate();
  return data;
}

}  // namespace yamabe
