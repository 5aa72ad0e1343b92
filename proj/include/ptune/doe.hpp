#pragma once

// Full factorial designs over coded levels, effect and sum-of-squares
// estimation, normal-plot data and automated effect screening via Lenth's
// pseudo standard error.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ptune::doe {

struct Factor {
  std::string letter;  // "A".."G"
  std::string name;    // tunable parameter name
  double low = 0.0;
  double high = 0.0;

  double mid() const { return 0.5 * (low + high); }
  // The three design levels decode and encode exactly.
  double decode(double coded) const {
    if (coded == -1.0) return low;
    if (coded == 1.0) return high;
    if (coded == 0.0) return mid();
    return mid() + coded * 0.5 * (high - low);
  }
  double encode(double physical) const {
    if (physical == low) return -1.0;
    if (physical == high) return 1.0;
    if (physical == mid()) return 0.0;
    return (physical - mid()) / (0.5 * (high - low));
  }
};

struct DesignMatrix {
  std::vector<Factor> factors;
  Eigen::MatrixXd runs;  // coded rows, one column per factor
  int levels = 2;        // 2 or 3

  int n_runs() const { return static_cast<int>(runs.rows()); }
  int k() const { return static_cast<int>(factors.size()); }
  Eigen::MatrixXd physical() const;  // decoded values
};

struct EffectEstimate {
  std::string label;  // "D", "DE", ...
  double effect = 0.0;
  double contrast = 0.0;
  double ss = 0.0;
};

struct ScreeningResult {
  std::vector<EffectEstimate> effects_sorted;  // ascending by effect value
  Eigen::VectorXd quantiles;                   // matching normal quantiles
  double lenth_pse = 0.0;
  double margin = 0.0;               // simultaneous margin used for flagging
  double margin_individual = 0.0;    // per-effect margin, reported alongside
  std::vector<std::string> flagged;
  double alpha = 0.05;
};

// Standard-order designs: the first factor alternates fastest.
DesignMatrix full_factorial_2k(const std::vector<Factor>& factors);
DesignMatrix full_factorial_3k(const std::vector<Factor>& factors);

// All 2^k - 1 effects of a two-level design, in Yates (mask) order.
std::vector<EffectEstimate> estimate_effects(const DesignMatrix& design,
                                             const Eigen::VectorXd& responses);

// Signed contrast column of a labelled effect ("AD" -> elementwise product).
Eigen::VectorXd effect_sign_column(const DesignMatrix& design, const std::string& label);

// Effects sorted ascending, paired with quantiles at (i - 0.5)/m.
void normal_plot_data(std::vector<EffectEstimate>& effects, Eigen::VectorXd& quantiles);

// Lenth screening at the given significance; the flagging margin controls
// the family-wise rate so a clean null set stays clean.
ScreeningResult lenth_flag(const std::vector<EffectEstimate>& effects, double alpha);

}  // namespace ptune::doe
