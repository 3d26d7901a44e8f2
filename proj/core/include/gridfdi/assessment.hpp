#pragma once

#include <string>
#include <vector>

#include "gridfdi/attack.hpp"

namespace gridfdi {

struct AssessOptions {
  double stealth_threshold_pct = 1.0;  // max |% diff| over power/voltage rows
  double angle_threshold_deg = 0.05;   // absolute cutoff for angle rows
  double near_zero_floor_pu = 1e-3;    // denominator guard for tiny readings
};

struct AssessmentRow {
  std::string name;   // deterministic sort key (kind, element, phase)
  std::string kind;   // PF/QF/PI/QI/VM/QC/V/theta
  double design = 0.0;
  double oracle = 0.0;
  double diff = 0.0;  // signed % for magnitudes, degrees for angles
  bool is_angle = false;
};

struct AssessmentReport {
  std::vector<AssessmentRow> rows;
  double max_abs_pct_diff = 0.0;
  double max_angle_diff_deg = 0.0;
  bool stealthy = false;
  std::string reason;
  int oracle_iterations = 0;
};

/// Element-by-element comparison of two value tables (identical keys
/// required): signed % differences against the design value, the near-zero
/// absolute-difference fallback, and plain degree differences for angle rows.
/// Throws std::invalid_argument listing missing/extra keys on mismatch.
std::vector<AssessmentRow> compare_sets(const std::vector<AssessmentRow>& design_rows,
                                        const std::vector<AssessmentRow>& oracle_rows,
                                        const AssessOptions& opts = {});

/// The load-flow oracle: extracts the injection profile from the attack's
/// fabricated readings, replays it through the unbalanced load flow (slack
/// magnitudes from the VM readings), and compares flows, injections, shunt
/// outputs and state variables against the designed values. Oracle
/// non-convergence yields a detectable verdict with the reason recorded.
AssessmentReport assess(const Network& net, const AttackResult& attack, const AssessOptions& opts = {});

std::string assessment_to_csv(const AssessmentReport& report);
std::string assessment_to_json(const AssessmentReport& report);
/// (row index, % diff) pairs for external plotting; angle rows excluded.
std::string assessment_plot_data(const AssessmentReport& report);

}  // namespace gridfdi
