#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "yamabe/rational.hpp"

namespace yamabe {

/// Pointwise samples of a metric in base/fiber block form
/// [[A, B], [B^T, C]] with A base_dim x base_dim.
struct BlockMetric {
  int base_dim = 0;
  int fiber_dim = 0;
  std::vector<Eigen::MatrixXd> samples;

  int total_dim() const { return base_dim + fiber_dim; }
  void validate() const;  // symmetric positive-definite samples, tolerance 1e-10
};

/// The covering metric: off-diagonal block scaled by n, fiber block by n^2.
BlockMetric scale_metric(const BlockMetric& h, long n);

/// Coefficient matrix of sum_{i<=k} dy_{2i-1} ^ dy_{2i} in the full frame.
Eigen::MatrixXd standard_fiber_two_form(int base_dim, int fiber_dim, int k);

/// Pointwise norm |phi| from |phi|^2 = (1/2) phi_ab phi_cd g^{ac} g^{bd}.
double two_form_norm(const Eigen::MatrixXd& metric_sample, const Eigen::MatrixXd& form);

struct DecayReport {
  std::vector<long> n_values;
  std::vector<double> norms;  // max over samples of |omega|_{h_n}
  double fitted_slope = 0;
  double r_squared = 0;
};

/// Norm decay of the fiber 2-form under scale_metric, with a least-squares
/// slope fit of log norm against log n.
DecayReport decay_rate(const BlockMetric& h, int k, const std::vector<long>& n_set);

/// Default curvature-term constant: the number of frame pairs e_i e_j.
double default_weitzenbock_constant(int dim_total);

/// The strict positivity test C * 2 pi * norm_at_1 / n^2 < s_min.
bool weitzenbock_satisfied(double s_min, double constant, double norm_at_1, long n);

/// Smallest n at which weitzenbock_satisfied holds.
long weitzenbock_threshold(double s_min, int dim_total, double norm_at_1,
                           std::optional<double> constant_override = std::nullopt);

/// True iff sigma + standard fiber form has nonvanishing top power,
/// decided exactly over the rationals.
bool symplectic_nondegeneracy(const std::vector<std::vector<Rational>>& sigma_block, int k);

struct MetricData {
  BlockMetric metric;
  double s_min = 0;
};

/// Schema: {"base_dim": .., "fiber_dim": .., "samples": [[row-major], ...],
/// "s_min": ..} with s_min optional (0 when absent).
MetricData metric_data_from_json(const nlohmann::json& doc);

}  // namespace yamabe
