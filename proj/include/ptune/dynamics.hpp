#pragma once

// Differential and algebraic residuals of the machine-controller-network
// model: fourth-order two-axis machines (saliency neglected in the torque),
// rotating-exciter voltage regulators with rate feedback, and two-stage
// droop governors, coupled to the network power-balance equations.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptune/casefile.hpp"
#include "ptune/powerflow.hpp"

namespace ptune {

struct MachineDynState {
  double delta = 0.0;  // rotor angle, rad
  double omega = 1.0;  // speed, p.u. of omega_s
  double eq_p = 0.0;
  double ed_p = 0.0;
};

struct AvrDynState {
  double efd = 0.0;
  double vr = 0.0;
  double rf = 0.0;
};

struct GovDynState {
  double psv = 0.0;
  double tm = 0.0;
};

// Index map for the stacked state: differential entries first (per machine,
// governor entries only where a governor exists), then algebraic entries
// (machine d/q currents, then bus voltage magnitude/angle pairs).
class StateLayout {
 public:
  StateLayout() = default;
  explicit StateLayout(const PowerSystemCase& sys);

  int n_diff() const { return n_diff_; }
  int n_alg() const { return n_alg_; }
  int n_mach() const { return static_cast<int>(mach_base_.size()); }
  int n_bus() const { return n_bus_; }

  int delta(int m) const { return mach_base_[m] + 0; }
  int omega(int m) const { return mach_base_[m] + 1; }
  int eq_p(int m) const { return mach_base_[m] + 2; }
  int ed_p(int m) const { return mach_base_[m] + 3; }
  int efd(int m) const { return mach_base_[m] + 4; }
  int vr(int m) const { return mach_base_[m] + 5; }
  int rf(int m) const { return mach_base_[m] + 6; }
  bool has_gov(int m) const { return has_gov_[m]; }
  int psv(int m) const;  // throws if machine has no governor
  int tm(int m) const;

  // Algebraic indices (into the y vector).
  int id(int m) const { return 2 * m; }
  int iq(int m) const { return 2 * m + 1; }
  int v_mag(int bus_index) const { return 2 * n_mach() + 2 * bus_index; }
  int v_ang(int bus_index) const { return 2 * n_mach() + 2 * bus_index + 1; }

  const std::vector<std::string>& diff_names() const { return diff_names_; }
  const std::vector<std::string>& alg_names() const { return alg_names_; }

 private:
  std::vector<int> mach_base_;
  std::vector<bool> has_gov_;
  int n_bus_ = 0;
  int n_diff_ = 0;
  int n_alg_ = 0;
  std::vector<std::string> diff_names_, alg_names_;
};

struct SystemState {
  Eigen::VectorXd x;  // differential
  Eigen::VectorXd y;  // algebraic
};

// Structured view of one machine's slice, for reporting and tests.
struct MachineView {
  MachineDynState mech;
  AvrDynState avr;
  std::optional<GovDynState> gov;
};
MachineView unpack_machine(const StateLayout& layout, const SystemState& s, int m);
void pack_machine(const StateLayout& layout, const MachineView& view, int m, SystemState& s);

struct DynInputs {
  Eigen::VectorXd v_ref;      // per machine
  Eigen::VectorXd p_c;        // per machine, zero for condensers
  Eigen::VectorXd t_m_const;  // mechanical torque for machines without a governor
};

struct LoadSnapshot {
  Eigen::VectorXd p;  // per bus, effective at the current step
  Eigen::VectorXd q;
};

struct LimitFlag {
  int machine = 0;
  std::string which;  // "vr" or "psv"
  int side = 0;       // +1 upper, -1 lower
  bool operator==(const LimitFlag&) const = default;
};

enum class LoadModel { constant_power, constant_impedance };

struct EquilibriumState {
  SystemState state;
  DynInputs inputs;
  Eigen::VectorXd t_m0;    // per machine
  Eigen::VectorXd efd0;    // per machine
  Eigen::VectorXd v0;      // per-bus voltage magnitude at the operating point
  LoadSnapshot base_loads;
};

class DynamicModel {
 public:
  DynamicModel(const PowerSystemCase& sys, Eigen::MatrixXcd ybus,
               LoadModel load_model = LoadModel::constant_power,
               Eigen::VectorXd v0 = {});

  const StateLayout& layout() const { return layout_; }
  const PowerSystemCase& system() const { return sys_; }

  // dx/dt for every differential state. Throws on dimension mismatch.
  Eigen::VectorXd differential(const SystemState& s, const DynInputs& in) const;

  // Stator and bus power-balance residuals; zero at a consistent state.
  Eigen::VectorXd algebraic(const SystemState& s, const LoadSnapshot& loads) const;

  // Analytic Jacobian blocks d(f)/d(x,y) and d(g)/d(x,y).
  void jacobians(const SystemState& s, const DynInputs& in, const LoadSnapshot& loads,
                 Eigen::MatrixXd& fx, Eigen::MatrixXd& fy,
                 Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const;

  // Finite-difference versions, used to cross-check the analytic blocks.
  void fd_jacobians(const SystemState& s, const DynInputs& in, const LoadSnapshot& loads,
                    Eigen::MatrixXd& fx, Eigen::MatrixXd& fy,
                    Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const;

  // Clamps regulator and valve states into their bounds; idempotent.
  std::vector<LimitFlag> apply_limits(SystemState& s) const;

  // Electrical torque with the saliency term omitted (the model's torque)
  // and with it included; the two agree when xq_p == xd_p.
  double torque_no_saliency(const SystemState& s, int m) const;
  double torque_full(const SystemState& s, int m) const;

 private:
  PowerSystemCase sys_;
  Eigen::MatrixXcd ybus_;
  StateLayout layout_;
  LoadModel load_model_;
  Eigen::VectorXd v0_;  // reference magnitudes for the constant-impedance model
};

// Back-solves machine, regulator and governor states from a converged power
// flow so every differential residual is ~0 at the base loads.
EquilibriumState initialize_equilibrium(const PowerSystemCase& sys, const PowerFlowSolution& pf);
EquilibriumState initialize_equilibrium(const PowerSystemCase& sys, const PowerFlowSolution& pf,
                                        const Eigen::MatrixXcd& ybus);

}  // namespace ptune
