#pragma once

// Newton-Raphson power flow in polar form, flat start. Provides the steady
// state from which the dynamic model is initialized.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "ptune/casefile.hpp"

namespace ptune {

struct PowerFlowSolution {
  Eigen::VectorXcd v;          // per-bus complex voltage, case order
  double mismatch_norm = 0.0;  // max-abs p.u. power mismatch at exit
  int iterations = 0;
  bool converged = false;
};

class PowerFlowError : public std::runtime_error {
 public:
  PowerFlowError(const std::string& what, double mismatch, int iterations)
      : std::runtime_error(what), mismatch(mismatch), iterations(iterations) {}
  double mismatch;
  int iterations;
};

// Net scheduled complex injection at each bus (generation minus base load).
Eigen::VectorXcd scheduled_injection(const PowerSystemCase& sys);

// Complex power injected into the network at every bus for voltages v.
Eigen::VectorXcd network_injection(const Eigen::MatrixXcd& ybus, const Eigen::VectorXcd& v);

// Solves the case to the requested tolerance; throws PowerFlowError on
// non-convergence, reporting the final mismatch.
PowerFlowSolution solve_power_flow(const PowerSystemCase& sys, double tol = 1e-8, int max_iter = 20);
PowerFlowSolution solve_power_flow(const PowerSystemCase& sys, const Eigen::MatrixXcd& ybus,
                                   double tol, int max_iter);

}  // namespace ptune
