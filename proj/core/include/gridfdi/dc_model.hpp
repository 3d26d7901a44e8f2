#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gridfdi/measurement.hpp"

namespace gridfdi {

/// Single-phase DC (linearized, lossless) model of a balanced grid, built from
/// the phase-a per-unit reactances. Rows: both flow directions of every branch
/// plus the injections at loaded buses; columns: bus angles, slack excluded.
struct DcModel {
  Eigen::MatrixXd h;
  std::vector<std::string> row_ids;  // "PF:4:5", "PI:5"
  std::vector<int> col_node;         // network node index per column
  Eigen::VectorXd theta;             // DC solution angles, radians
  Eigen::VectorXd z;                 // h * theta: the clean DC measurements, pu
};

DcModel build_dc_model(const Network& net);

/// The classic linear attack: z + H c. Dimension-checked; by construction
/// ||(z + Hc) - H(x + c)|| equals ||z - Hx|| exactly.
Eigen::VectorXd dc_attack_baseline(const Eigen::MatrixXd& h, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& c);

/// Unweighted DC WLS residual ||z - H x_fit||.
double dc_wls_residual(const Eigen::MatrixXd& h, const Eigen::VectorXd& z);

/// Projects a DC attack vector a = Hc onto an AC measurement set: each DC flow
/// or injection delta (pu) is added, scaled to watts, to the matching active-
/// power rows of all three phases. Deltas at unmetered buses are dropped.
MeasurementSet map_dc_attack_to_ac(const Network& net, const MeasurementSet& z_ac,
                                   const DcModel& dc, const Eigen::VectorXd& attack);

}  // namespace gridfdi
