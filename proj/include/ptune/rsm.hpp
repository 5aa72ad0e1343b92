#pragma once

// Monomial-basis response-surface regression with coefficient inference,
// and global minimization of the fitted polynomial over a box.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptune/stats.hpp"

namespace ptune::rsm {

struct ModelSpec {
  std::vector<std::string> factor_names;
  // One exponent tuple per term; the all-zero tuple is the constant.
  std::vector<std::vector<int>> terms;

  int n_terms() const { return static_cast<int>(terms.size()); }
  int n_factors() const { return static_cast<int>(factor_names.size()); }
  std::string term_label(int t) const;
};

// Parses "1,x1,x2,x2^2,x1^2*x2" into exponent tuples over n_factors factors.
ModelSpec parse_model_spec(const std::string& text, const std::vector<std::string>& factor_names);

struct TermInference {
  double coefficient = 0.0;
  double std_error = 0.0;
  double t0 = 0.0;
  double p_value = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct FittedSurface {
  ModelSpec spec;
  Eigen::VectorXd coefficients;
  std::vector<TermInference> inference;  // at the alpha the fit was made with
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inv;  // inverse normal-equations matrix, for standard errors
  double sse = 0.0;
  double sst = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  double alpha = 0.05;
  stats::AnovaTable anova;
};

class RankDeficiency : public std::runtime_error {
 public:
  RankDeficiency(const std::string& what, std::string term)
      : std::runtime_error(what), term(std::move(term)) {}
  std::string term;
};

// Least squares on physical (uncoded) factor values via a column-equilibrated
// orthogonal decomposition; inference from the normal-equations inverse.
FittedSurface fit_least_squares(const Eigen::MatrixXd& points, const Eigen::VectorXd& responses,
                                const ModelSpec& spec, double alpha = 0.05);

stats::AnovaTable model_anova(const FittedSurface& fit, double alpha);
std::vector<TermInference> coefficient_inference(const FittedSurface& fit, double alpha);

double evaluate_surface(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                        const Eigen::VectorXd& point);
Eigen::VectorXd surface_gradient(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                                 const Eigen::VectorXd& point);
Eigen::MatrixXd surface_hessian(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                                const Eigen::VectorXd& point);

struct BoxBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

enum class OptimumLocation { interior, boundary };

struct Optimum {
  Eigen::VectorXd point;
  double value = 0.0;
  OptimumLocation location = OptimumLocation::interior;
  double stationarity = 0.0;  // max-abs gradient (interior), worst KKT violation (boundary)
};

// Multi-start projected-gradient descent from a coarse grid with Newton
// polish; ties resolved toward the lexicographically smallest argmin.
Optimum minimize_over_box(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                          const BoxBounds& bounds, int grid_per_axis = 21);

}  // namespace ptune::rsm
