#pragma once

// Time-domain simulation of the case under stochastic loads and the
// IAE-based objective evaluated on the resulting traces.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ptune/dae.hpp"
#include "ptune/dynamics.hpp"

namespace ptune {

enum class LoadNoiseKind { iid_gaussian, ou };

struct StochasticLoadModel {
  double lambda = 0.005;   // relative volatility per load
  double m_bound = 0.002;  // relative bias bound, drawn once per run
  LoadNoiseKind kind = LoadNoiseKind::iid_gaussian;
  double ou_tau = 5.0;     // correlation time for the ou kind, s
};

struct SimulationConfig {
  double t_end = 30.0;
  double h = 0.2;
  double newton_tol = 1e-8;
  int newton_max_iter = 25;
  uint64_t seed = 0;
  StochasticLoadModel load;
  LoadModel load_model = LoadModel::constant_power;

  int n_steps() const;  // t_end/h, validated to be integral within rounding
};

// Per-load multiplier table: row k is the multiplier at time t_k = k*h,
// one column per load bus, n_steps+1 rows. Row 0 is the base point.
struct LoadMultiplierTable {
  std::vector<int> load_bus_index;  // column -> bus index in case order
  Eigen::MatrixXd mult;             // (n_steps+1) x n_loads
};

// step_h only matters for the time-correlated (ou) kind.
LoadMultiplierTable sample_load_multipliers(uint64_t seed, const StochasticLoadModel& model,
                                            int n_steps, const std::vector<int>& load_buses,
                                            double step_h = 0.2);

struct SimulationTrace {
  Eigen::VectorXd time;                 // n_steps+1 entries
  Eigen::MatrixXd v_mag;                // (n+1) x n_bus
  Eigen::MatrixXd omega;                // (n+1) x n_mach
  Eigen::MatrixXd x;                    // (n+1) x n_diff, full differential states
  Eigen::MatrixXd y;                    // (n+1) x n_alg
  LoadMultiplierTable loads;
  uint64_t seed = 0;
  std::vector<std::vector<LimitFlag>> limit_events;  // per step
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, int step_index)
      : std::runtime_error(what), step_index(step_index) {}
  int step_index;
};

// Objective definition: one voltage channel per AVR (|V - V(0)| at the
// machine bus) and one speed channel per governor (|omega - 1|), weighted.
struct ObjectiveSpec {
  Eigen::VectorXd weights;  // empty means uniform; must sum to 1 otherwise
};

struct ObjectiveSample {
  double y = 0.0;
  Eigen::VectorXd channel_iae;
  std::vector<std::string> channel_names;
  uint64_t seed = 0;
  ParamAssignment params;
};

// Integrates the DAE over [0, t_end] with the given multiplier table
// (already sampled); exposed separately so tests can drive deterministic
// load schedules such as steps.
SimulationTrace integrate_with_loads(const PowerSystemCase& sys, const EquilibriumState& eq,
                                     const LoadMultiplierTable& table, const SimulationConfig& cfg);

// Full stochastic run: applies params, samples loads from cfg.seed, integrates.
SimulationTrace run_simulation(const PowerSystemCase& sys, const EquilibriumState& eq,
                               const ParamAssignment& params, const SimulationConfig& cfg);

ObjectiveSample evaluate_objective(const PowerSystemCase& sys, const EquilibriumState& eq,
                                   const SimulationTrace& trace, const ObjectiveSpec& spec);

// n replicates with seeds cfg.seed + r; optionally threaded, results are
// independent of scheduling.
std::vector<ObjectiveSample> run_replicates(const PowerSystemCase& sys, const EquilibriumState& eq,
                                            const ParamAssignment& params, int n,
                                            const SimulationConfig& cfg,
                                            const ObjectiveSpec& spec, int threads = 1);

// Names of the objective channels in order, e.g. "V_1", ..., "omega_2".
std::vector<std::string> objective_channel_names(const PowerSystemCase& sys);

}  // namespace ptune
