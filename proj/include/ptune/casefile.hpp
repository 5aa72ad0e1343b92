#pragma once

// Static description of a power-system case: buses, branches, synchronous
// machines with their voltage regulators and speed governors, and the map
// from factor letters to tunable controller parameters.

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ptune {

class CaseError : public std::runtime_error {
 public:
  CaseError(std::string locus, const std::string& what)
      : std::runtime_error(locus.empty() ? what : locus + ": " + what), locus_(std::move(locus)) {}
  const std::string& locus() const { return locus_; }

 private:
  std::string locus_;
};

enum class BusKind { slack, pv, pq };

struct BusRecord {
  int id = 0;
  BusKind kind = BusKind::pq;
  double v_setpoint = 1.0;  // p.u., slack and pv buses
  double p_load0 = 0.0;     // p.u. base load
  double q_load0 = 0.0;
  double shunt_b = 0.0;     // p.u. susceptance
  double p_gen = 0.0;       // p.u. scheduled active generation (pv buses)

  bool operator==(const BusRecord&) const = default;
};

struct BranchRecord {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;  // total line charging
  double tap = 1.0;

  bool operator==(const BranchRecord&) const = default;
};

struct SaturationPoint {
  double efd = 0.0;
  double se = 0.0;
  bool operator==(const SaturationPoint&) const = default;
};

struct AvrParams {
  double k_a = 0.0;  // amplifier gain, the tunable K_A
  double t_a = 0.0;
  double k_e = 1.0;
  double t_e = 0.0;
  double k_f = 0.0;
  double t_f = 0.0;
  double vr_min = 0.0;
  double vr_max = 0.0;
  std::vector<SaturationPoint> s_e;  // empty disables saturation

  bool operator==(const AvrParams&) const = default;
};

struct GovParams {
  double r_droop = 0.0;  // the tunable R
  double t_sv = 0.0;
  double t_ch = 0.0;
  double psv_min = 0.0;
  double psv_max = 0.0;

  bool operator==(const GovParams&) const = default;
};

enum class MachineRole { generator, condenser };

struct MachineRecord {
  int bus = 0;
  MachineRole role = MachineRole::generator;
  double h = 0.0;  // inertia, s
  double d = 0.0;  // damping
  double xd = 0.0, xq = 0.0;
  double xd_p = 0.0, xq_p = 0.0;
  double td0_p = 0.0, tq0_p = 0.0;
  AvrParams avr;
  std::optional<GovParams> gov;  // absent for condensers

  bool operator==(const MachineRecord&) const = default;
};

struct PowerSystemCase {
  std::string name;
  double base_mva = 100.0;
  double omega_s = 0.0;  // rad/s
  std::vector<BusRecord> buses;
  std::vector<BranchRecord> branches;
  std::vector<MachineRecord> machines;
  // Factor letter -> tunable parameter name ("K_A<bus>" or "R_<bus>").
  std::map<std::string, std::string> tunable_map;

  bool operator==(const PowerSystemCase&) const = default;

  int bus_index(int bus_id) const;          // throws CaseError if missing
  int machine_index_at_bus(int bus_id) const;  // -1 if none
  std::vector<int> load_bus_indices() const;   // buses with nonzero base load
};

// A concrete assignment of tunable parameters, keyed by parameter name.
using ParamAssignment = std::map<std::string, double>;

// Parses and validates a case file; throws CaseError with a field locus on
// malformed input. Unknown fields are rejected.
PowerSystemCase parse_case(const std::string& text);
std::string serialize_case(const PowerSystemCase& sys);
PowerSystemCase load_case_file(const std::string& path);

// Validates an already-built case (parse_case calls this too).
void validate_case(const PowerSystemCase& sys);

// Resolves a tunable parameter name to a writable location and applies values.
// Throws CaseError on unknown names or out-of-role parameters.
void apply_params(PowerSystemCase& sys, const ParamAssignment& params);
double get_param(const PowerSystemCase& sys, const std::string& name);

// Bus admittance matrix, buses in case order. Throws on zero-impedance branches.
Eigen::MatrixXcd build_admittance(const PowerSystemCase& sys);

// Quadratic exciter saturation through the two given points; zero if absent.
double saturation_at(const AvrParams& avr, double efd);
double saturation_deriv_at(const AvrParams& avr, double efd);

}  // namespace ptune
