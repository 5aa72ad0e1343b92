#pragma once

// Implicit trapezoidal integration of semi-explicit DAE systems
//   x' = f(x, y, t),  0 = g(x, y, t)
// with a simultaneous Newton solve of the corrector and algebraic equations.

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace ptune {

class DaeSystem {
 public:
  virtual ~DaeSystem() = default;
  virtual int n_diff() const = 0;
  virtual int n_alg() const = 0;
  virtual void eval_f(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t,
                      Eigen::VectorXd& out) const = 0;
  virtual void eval_g(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t,
                      Eigen::VectorXd& out) const = 0;
  // Analytic Jacobian blocks; return false to fall back to finite differences.
  virtual bool eval_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t,
                              Eigen::MatrixXd& fx, Eigen::MatrixXd& fy,
                              Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const {
    (void)x; (void)y; (void)t; (void)fx; (void)fy; (void)gx; (void)gy;
    return false;
  }
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 25;
};

// One trapezoidal step from (x, y) at time t to t + h; returns the iteration
// count actually used. Throws NewtonFailure when the corrector stalls.
int step_trapezoidal(const DaeSystem& sys, Eigen::VectorXd& x, Eigen::VectorXd& y, double t,
                     double h, const NewtonOptions& opts = {});

// Solves g(x, y, t) = 0 for y with x held fixed.
int solve_algebraic(const DaeSystem& sys, const Eigen::VectorXd& x, Eigen::VectorXd& y, double t,
                    const NewtonOptions& opts = {});

// Finite-difference Jacobians of f and g, shared fallback.
void fd_dae_jacobians(const DaeSystem& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      double t, Eigen::MatrixXd& fx, Eigen::MatrixXd& fy, Eigen::MatrixXd& gx,
                      Eigen::MatrixXd& gy);

}  // namespace ptune
