#pragma once

// Inferential statistics for the screening and validation stages:
// multifactor ANOVA with pooled error, Levene's homoscedasticity test,
// power-transform search, Shapiro-Wilk normality, residual independence
// checks and the pooled two-sample t test.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptune/doe.hpp"

namespace ptune::stats {

struct AnovaRow {
  std::string source;
  double ss = 0.0;
  double dof = 0.0;
  double ms = 0.0;
  double f = 0.0;   // +inf sentinel when the error mean square is zero
  double p = 1.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;  // tested sources
  AnovaRow error;              // f, p unused
  AnovaRow total;
  double alpha = 0.05;

  // Builds MS/F/P from raw sums of squares; total is derived.
  static AnovaTable from_components(std::vector<std::pair<std::string, double>> source_ss,
                                    const std::vector<double>& source_dof, double error_ss,
                                    double error_dof, double alpha);
};

struct LeveneResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int groups = 0;
  std::string center;  // "mean" or "median"
};

struct TransformResult {
  double lambda = 1.0;
  std::vector<std::pair<double, double>> trace;  // (lambda, criterion) over the grid
};

struct ShapiroResult {
  double w = 0.0;
  double p_value = 0.0;
  int n = 0;
};

struct IndependenceResult {
  double durbin_watson = 2.0;
  double dw_z = 0.0;        // asymptotic normal statistic for DW
  double runs_z = 0.0;      // runs-about-zero statistic
  int runs = 0;
  bool independent = true;  // conjunction verdict at alpha
  double alpha = 0.05;
};

struct TTestResult {
  double t0 = 0.0;
  double dof = 0.0;
  double p_one_sided = 1.0;  // H1: mean(a) < mean(b)
  double p_two_sided = 1.0;
  double alpha = 0.05;
  bool reject_h0 = false;    // driven by the one-sided P
};

// ANOVA for a subset of effects of a two-level factorial; the unselected
// effects pool into the error term.
AnovaTable anova_selected(const doe::DesignMatrix& design, const Eigen::VectorXd& responses,
                          const std::vector<std::string>& selected, double alpha);

enum class LeveneCenter { mean, median };
LeveneResult levene(const std::vector<std::vector<double>>& groups,
                    LeveneCenter center = LeveneCenter::mean);

// Elementwise y^lambda; all data must be positive.
std::vector<double> power_transform(const std::vector<double>& data, double lambda);

// Grid search for the exponent minimizing the worst-case Levene statistic
// across the given groupings (one grouping per factor).
TransformResult search_lambda(const std::vector<double>& data,
                              const std::vector<std::vector<int>>& groupings,
                              const std::vector<double>& grid);
std::vector<double> default_lambda_grid();  // [-3, 3] step 0.05

ShapiroResult shapiro_wilk(const std::vector<double>& sample);

IndependenceResult independence_check(const std::vector<double>& residuals,
                                      const std::vector<int>& run_order, double alpha = 0.05);

TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b, double alpha);

}  // namespace ptune::stats
