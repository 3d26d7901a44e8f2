#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridfdi/measurement.hpp"

namespace gridfdi {

/// Analytic Jacobian of the measurement functions: one SI-unit row per
/// reading, columns over the network's unknowns ([theta..., V...], slack
/// phases excluded). Matches central finite differences.
Eigen::MatrixXd measurement_jacobian(const Network& net, const MeasurementSet& z, const PhasorState& x);

struct EstimateOptions {
  double tol = 1e-8;  // max state update, pu/rad
  int max_iter = 50;
};

struct EstimateResult {
  PhasorState state;
  double objective = 0.0;      // (z - h)^T W (z - h) at the solution
  double residual_norm = 0.0;  // sqrt(objective)
  Eigen::VectorXd residuals;   // raw z - h, SI units
  Eigen::VectorXd normalized_residuals;  // zero where not normalizable
  std::vector<std::uint8_t> normalizable;  // false on pinned/critical rows
  int iterations = 0;
  bool converged = false;
  int dof = 0;  // readings minus pinned rows minus unknowns
};

/// Gauss-Newton WLS fit with monotone (step-halved) objective. Slack voltage
/// magnitudes are pinned to the slack VM readings when present, otherwise to
/// the dataset setpoints; slack angles stay at the phase references. Throws
/// ObservabilityError (with null-space size) when the gain matrix is rank
/// deficient; non-convergence is reported through the result flags.
EstimateResult estimate(const Network& net, const MeasurementSet& z,
                        const PhasorState* init = nullptr, const EstimateOptions& opts = {});

struct BddOptions {
  std::optional<double> tau;     // weighted-objective threshold; default chi^2
  double chi2_quantile = 0.975;  // used when tau is not given
  double rn_threshold = 3.0;     // largest-normalized-residual cutoff
};

struct BddVerdict {
  bool clean = false;
  double objective = 0.0;
  double tau = 0.0;
  double max_normalized_residual = 0.0;
  // readings exceeding the normalized-residual cutoff, largest first
  std::vector<std::pair<std::string, double>> suspects;
};

/// Chi-square test on the weighted objective plus the largest-normalized-
/// residual test. Throws std::logic_error when called on a non-converged fit.
BddVerdict detect_bad_data(const EstimateResult& result, const MeasurementSet& z, const BddOptions& opts = {});

}  // namespace gridfdi
