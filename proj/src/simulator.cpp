#include "ptune/simulator.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "ptune/rng.hpp"

namespace ptune {

int SimulationConfig::n_steps() const {
  if (h <= 0.0) throw std::invalid_argument("time step must be positive");
  if (t_end < h) throw std::invalid_argument("t_end must be at least one step");
  const double ratio = t_end / h;
  const int n = static_cast<int>(std::llround(ratio));
  if (std::fabs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("t_end must be an integral number of steps");
  return n;
}

namespace {

// Counter allocation inside a load's stream: counter 0 is the bias draw,
// counters 1.. are the per-step perturbations.
constexpr uint64_t kBiasCounter = 0;

}  // namespace

LoadMultiplierTable sample_load_multipliers(uint64_t seed, const StochasticLoadModel& model,
                                            int n_steps, const std::vector<int>& load_buses,
                                            double step_h) {
  if (model.lambda < 0.0 || model.m_bound < 0.0)
    throw std::invalid_argument("load noise parameters must be nonnegative");
  const int nl = static_cast<int>(load_buses.size());
  LoadMultiplierTable table;
  table.load_bus_index = load_buses;
  table.mult.resize(n_steps + 1, nl);
  const rng::CounterRng gen(seed);
  for (int c = 0; c < nl; ++c) {
    const uint64_t stream = static_cast<uint64_t>(load_buses[c]) + 1;
    const double bias = model.m_bound * (2.0 * gen.uniform(stream, kBiasCounter) - 1.0);
    if (model.kind == LoadNoiseKind::iid_gaussian) {
      for (int k = 0; k <= n_steps; ++k) {
        const double eps = (model.lambda > 0.0) ? gen.normal(stream, k + 1) : 0.0;
        table.mult(k, c) = 1.0 + bias + model.lambda * eps;
      }
    } else {
      // Ornstein-Uhlenbeck with stationary sd = lambda, started at stationarity.
      const double a = std::exp(-step_h / model.ou_tau);
      double xi = (model.lambda > 0.0) ? model.lambda * gen.normal(stream, 1) : 0.0;
      table.mult(0, c) = 1.0 + bias + xi;
      for (int k = 1; k <= n_steps; ++k) {
        const double eps = (model.lambda > 0.0) ? gen.normal(stream, k + 1) : 0.0;
        xi = a * xi + model.lambda * std::sqrt(1.0 - a * a) * eps;
        table.mult(k, c) = 1.0 + bias + xi;
      }
    }
  }
  return table;
}

namespace {

// Adapter binding the dynamic model and a multiplier table to the DAE layer.
class PowerDae final : public DaeSystem {
 public:
  PowerDae(const DynamicModel& model, const DynInputs& inputs, const LoadSnapshot& base,
           const LoadMultiplierTable& table, double h)
      : model_(model), inputs_(inputs), base_(base), table_(table), h_(h) {}

  int n_diff() const override { return model_.layout().n_diff(); }
  int n_alg() const override { return model_.layout().n_alg(); }

  LoadSnapshot loads_at(double t) const {
    const int k = std::min<int>(static_cast<int>(std::llround(t / h_)),
                                static_cast<int>(table_.mult.rows()) - 1);
    LoadSnapshot s = base_;
    for (size_t c = 0; c < table_.load_bus_index.size(); ++c) {
      const int bi = table_.load_bus_index[c];
      s.p(bi) = base_.p(bi) * table_.mult(k, c);
      s.q(bi) = base_.q(bi) * table_.mult(k, c);
    }
    return s;
  }

  void eval_f(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t,
              Eigen::VectorXd& out) const override {
    (void)t;
    out = model_.differential({x, y}, inputs_);
  }
  void eval_g(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t,
              Eigen::VectorXd& out) const override {
    out = model_.algebraic({x, y}, loads_at(t));
  }
  bool eval_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t,
                      Eigen::MatrixXd& fx, Eigen::MatrixXd& fy, Eigen::MatrixXd& gx,
                      Eigen::MatrixXd& gy) const override {
    model_.jacobians({x, y}, inputs_, loads_at(t), fx, fy, gx, gy);
    return true;
  }

 private:
  const DynamicModel& model_;
  const DynInputs& inputs_;
  const LoadSnapshot& base_;
  const LoadMultiplierTable& table_;
  double h_;
};

}  // namespace

SimulationTrace integrate_with_loads(const PowerSystemCase& sys, const EquilibriumState& eq,
                                     const LoadMultiplierTable& table,
                                     const SimulationConfig& cfg) {
  const int n = cfg.n_steps();
  if (table.mult.rows() != n + 1)
    throw std::invalid_argument("multiplier table does not cover the horizon");

  const Eigen::MatrixXcd ybus = build_admittance(sys);
  const DynamicModel model(sys, ybus, cfg.load_model, eq.v0);
  const StateLayout& layout = model.layout();
  PowerDae dae(model, eq.inputs, eq.base_loads, table, cfg.h);

  SimulationTrace trace;
  trace.loads = table;
  trace.seed = cfg.seed;
  trace.time.resize(n + 1);
  trace.v_mag.resize(n + 1, layout.n_bus());
  trace.omega.resize(n + 1, layout.n_mach());
  trace.x.resize(n + 1, layout.n_diff());
  trace.y.resize(n + 1, layout.n_alg());
  trace.limit_events.resize(n + 1);

  Eigen::VectorXd x = eq.state.x;
  Eigen::VectorXd y = eq.state.y;
  const NewtonOptions opts{cfg.newton_tol, cfg.newton_max_iter};

  // Make the algebraic state consistent with the realized loads at t = 0.
  try {
    solve_algebraic(dae, x, y, 0.0, opts);
  } catch (const NewtonFailure& e) {
    throw SimulationError(std::string("initial algebraic solve failed: ") + e.what(), 0);
  }

  auto record = [&](int k) {
    trace.time(k) = k * cfg.h;
    for (int b = 0; b < layout.n_bus(); ++b) trace.v_mag(k, b) = y(layout.v_mag(b));
    for (int m = 0; m < layout.n_mach(); ++m) trace.omega(k, m) = x(layout.omega(m));
    trace.x.row(k) = x.transpose();
    trace.y.row(k) = y.transpose();
  };
  record(0);

  for (int k = 0; k < n; ++k) {
    try {
      step_trapezoidal(dae, x, y, k * cfg.h, cfg.h, opts);
    } catch (const NewtonFailure& e) {
      throw SimulationError("step " + std::to_string(k + 1) + " failed: " + e.what(), k + 1);
    }
    SystemState s{std::move(x), std::move(y)};
    trace.limit_events[k + 1] = model.apply_limits(s);
    x = std::move(s.x);
    y = std::move(s.y);
    record(k + 1);
  }
  return trace;
}

SimulationTrace run_simulation(const PowerSystemCase& sys, const EquilibriumState& eq,
                               const ParamAssignment& params, const SimulationConfig& cfg) {
  PowerSystemCase patched = sys;
  apply_params(patched, params);
  // Controller gains do not move the operating point, but the regulator and
  // governor references must be re-derived for the new gains.
  EquilibriumState eq2 = eq;
  const StateLayout layout(patched);
  for (int m = 0; m < layout.n_mach(); ++m) {
    const auto& a = patched.machines[m].avr;
    const int bi = patched.bus_index(patched.machines[m].bus);
    const double vr0 = eq.state.x(layout.vr(m));
    eq2.inputs.v_ref(m) = eq.state.y(layout.v_mag(bi)) + vr0 / a.k_a;
  }
  const LoadMultiplierTable table =
      sample_load_multipliers(cfg.seed, cfg.load, cfg.n_steps(), patched.load_bus_indices(), cfg.h);
  SimulationTrace trace = integrate_with_loads(patched, eq2, table, cfg);
  return trace;
}

std::vector<std::string> objective_channel_names(const PowerSystemCase& sys) {
  std::vector<std::string> names;
  for (const auto& m : sys.machines) names.push_back("V_" + std::to_string(m.bus));
  for (const auto& m : sys.machines)
    if (m.gov) names.push_back("omega_" + std::to_string(m.bus));
  return names;
}

ObjectiveSample evaluate_objective(const PowerSystemCase& sys, const EquilibriumState& eq,
                                   const SimulationTrace& trace, const ObjectiveSpec& spec) {
  const StateLayout layout(sys);
  const int n = static_cast<int>(trace.time.size()) - 1;
  const double h = (n >= 1) ? trace.time(1) - trace.time(0) : 0.0;

  std::vector<double> iae;
  // Voltage channels, one per AVR-equipped machine (all machines have one).
  for (int m = 0; m < layout.n_mach(); ++m) {
    const int bi = sys.bus_index(sys.machines[m].bus);
    const double v0 = eq.v0(bi);
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += std::fabs(trace.v_mag(k, bi) - v0) * h;
    iae.push_back(acc);
  }
  // Speed channels, one per governor.
  for (int m = 0; m < layout.n_mach(); ++m) {
    if (!sys.machines[m].gov) continue;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += std::fabs(trace.omega(k, m) - 1.0) * h;
    iae.push_back(acc);
  }

  const int nc = static_cast<int>(iae.size());
  Eigen::VectorXd w;
  if (spec.weights.size() == 0) {
    w = Eigen::VectorXd::Constant(nc, 1.0 / nc);
  } else {
    if (spec.weights.size() != nc) throw std::invalid_argument("objective weight count mismatch");
    if (std::fabs(spec.weights.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("objective weights must sum to 1");
    if ((spec.weights.array() < 0.0).any())
      throw std::invalid_argument("objective weights must be nonnegative");
    w = spec.weights;
  }

  ObjectiveSample out;
  out.channel_iae = Eigen::Map<Eigen::VectorXd>(iae.data(), nc);
  out.channel_names = objective_channel_names(sys);
  out.y = w.dot(out.channel_iae);
  out.seed = trace.seed;
  return out;
}

std::vector<ObjectiveSample> run_replicates(const PowerSystemCase& sys, const EquilibriumState& eq,
                                            const ParamAssignment& params, int n,
                                            const SimulationConfig& cfg, const ObjectiveSpec& spec,
                                            int threads) {
  if (n < 1) throw std::invalid_argument("replicate count must be at least 1");
  std::vector<ObjectiveSample> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= n) return;
      try {
        SimulationConfig c = cfg;
        c.seed = cfg.seed + static_cast<uint64_t>(r);
        const SimulationTrace trace = run_simulation(sys, eq, params, c);
        out[r] = evaluate_objective(sys, eq, trace, spec);
        out[r].params = params;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  const int nt = std::max(1, std::min(threads, n));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int r = 0; r < n; ++r) {
    if (errors[r]) {
      try {
        std::rethrow_exception(errors[r]);
      } catch (const std::exception& e) {
        throw SimulationError("replicate " + std::to_string(r) + ": " + e.what(), -1);
      }
    }
  }
  return out;
}

}  // namespace ptune
