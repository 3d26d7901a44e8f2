#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridfdi/powerflow.hpp"

namespace gridfdi {

enum class MeasKind { PF, QF, PI, QI, VM, VA };

std::string to_string(MeasKind kind);
MeasKind meas_kind_from_string(const std::string& text);

/// One tagged reading. Flow readings carry from/to (measured at `from`,
/// looking toward `to`); injection and voltage readings carry `node`.
/// Values and sigmas are in SI units: W, VAr, V, rad.
struct Measurement {
  MeasKind kind = MeasKind::PF;
  std::string from;
  std::string to;
  std::string node;
  Phase phase = Phase::a;
  double value = 0.0;
  double sigma = 1.0;

  std::string id() const;  // "PF:684:652:a", "PI:671:a", "VM:650H:a"
  bool is_power() const { return kind == MeasKind::PF || kind == MeasKind::QF || kind == MeasKind::PI || kind == MeasKind::QI; }
};

struct MeasurementSet {
  std::vector<Measurement> readings;

  int index_of(const std::string& id) const;  // -1 when missing
  int size() const { return static_cast<int>(readings.size()); }
};

struct MeasureOptions {
  double sigma_power_rel = 0.002;     // flows and injections
  double sigma_power_floor_pu = 1e-4; // keeps weights finite on idle phases
  double sigma_voltage_rel = 0.001;
};

/// Emits P/Q flow readings at both terminals of every branch-phase (switch
/// branches carry none on a merged grid), P/Q injection readings at every
/// loaded node-phase, and the slack voltage magnitudes.
MeasurementSet measure_all(const Network& net, const SteadyState& steady, const MeasureOptions& opts = {});

/// Independent zero-mean Gaussian perturbation per reading, deterministic for
/// a fixed seed. Readings with sigma == 0 pass through unchanged.
MeasurementSet add_noise(const MeasurementSet& z, std::uint64_t seed);

/// Evaluates the measurement function h for one reading at a state, SI units.
double evaluate_measurement(const Network& net, const PhasorState& x, const Measurement& m);

/// Display name in the alias notation used by the reporting tables, e.g.
/// "P_a_1108" for the active flow measured at 684 (alias 11) toward 671 (08).
std::string display_name(const Network& net, const Measurement& m);

// --- CSV ---------------------------------------------------------------------
// Measurement section: header `id,kind,from,to,node,phase,value,sigma`.
// Steady-state export appends a `state` section `node,phase,V_pu,theta_deg`.
std::string measurements_to_csv(const MeasurementSet& z);
std::string steady_state_to_csv(const Network& net, const SteadyState& steady, const MeasurementSet& z);
MeasurementSet measurements_from_csv(const std::string& text);  // ParseError on bad input

}  // namespace gridfdi
