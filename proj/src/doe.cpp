#include "ptune/doe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "ptune/dist.hpp"

namespace ptune::doe {

namespace {

void check_factors(const std::vector<Factor>& factors, int max_k) {
  if (factors.empty() || static_cast<int>(factors.size()) > max_k)
    throw std::invalid_argument("factor count out of range");
  std::set<std::string> letters;
  for (const auto& f : factors) {
    if (!letters.insert(f.letter).second)
      throw std::invalid_argument("duplicate factor letter '" + f.letter + "'");
    if (!(f.low < f.high))
      throw std::invalid_argument("factor " + f.letter + " requires low < high");
  }
}

}  // namespace

Eigen::MatrixXd DesignMatrix::physical() const {
  Eigen::MatrixXd out(runs.rows(), runs.cols());
  for (int r = 0; r < runs.rows(); ++r)
    for (int c = 0; c < runs.cols(); ++c) out(r, c) = factors[c].decode(runs(r, c));
  return out;
}

DesignMatrix full_factorial_2k(const std::vector<Factor>& factors) {
  check_factors(factors, 20);
  const int k = static_cast<int>(factors.size());
  const long n = 1L << k;
  DesignMatrix d;
  d.factors = factors;
  d.levels = 2;
  d.runs.resize(n, k);
  for (long r = 0; r < n; ++r)
    for (int c = 0; c < k; ++c) d.runs(r, c) = ((r >> c) & 1) ? 1.0 : -1.0;
  return d;
}

DesignMatrix full_factorial_3k(const std::vector<Factor>& factors) {
  check_factors(factors, 12);
  const int k = static_cast<int>(factors.size());
  long n = 1;
  for (int i = 0; i < k; ++i) n *= 3;
  DesignMatrix d;
  d.factors = factors;
  d.levels = 3;
  d.runs.resize(n, k);
  for (long r = 0; r < n; ++r) {
    long rem = r;
    for (int c = 0; c < k; ++c) {
      d.runs(r, c) = static_cast<double>(rem % 3) - 1.0;
      rem /= 3;
    }
  }
  return d;
}

Eigen::VectorXd effect_sign_column(const DesignMatrix& design, const std::string& label) {
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(design.n_runs());
  for (char ch : label) {
    const std::string letter(1, ch);
    const auto it = std::find_if(design.factors.begin(), design.factors.end(),
                                 [&](const Factor& f) { return f.letter == letter; });
    if (it == design.factors.end())
      throw std::invalid_argument("unknown factor letter '" + letter + "' in effect label");
    const int c = static_cast<int>(it - design.factors.begin());
    sign.array() *= design.runs.col(c).array();
  }
  return sign;
}

std::vector<EffectEstimate> estimate_effects(const DesignMatrix& design,
                                             const Eigen::VectorXd& responses) {
  if (design.levels != 2) throw std::invalid_argument("effects are defined on two-level designs");
  const int k = design.k();
  const long n = design.n_runs();
  if (responses.size() != n) throw std::invalid_argument("response length mismatch");

  std::vector<EffectEstimate> out;
  out.reserve(n - 1);
  for (long mask = 1; mask < n; ++mask) {
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(n);
    std::string label;
    for (int c = 0; c < k; ++c) {
      if ((mask >> c) & 1) {
        sign.array() *= design.runs.col(c).array();
        label += design.factors[c].letter;
      }
    }
    EffectEstimate e;
    e.label = label;
    e.contrast = sign.dot(responses);
    e.effect = 2.0 * e.contrast / static_cast<double>(n);
    e.ss = e.contrast * e.contrast / static_cast<double>(n);
    out.push_back(std::move(e));
  }
  return out;
}

void normal_plot_data(std::vector<EffectEstimate>& effects, Eigen::VectorXd& quantiles) {
  if (effects.size() < 2) throw std::invalid_argument("need at least two effects to rank");
  std::sort(effects.begin(), effects.end(),
            [](const EffectEstimate& a, const EffectEstimate& b) { return a.effect < b.effect; });
  const int m = static_cast<int>(effects.size());
  quantiles.resize(m);
  for (int i = 0; i < m; ++i)
    quantiles(i) = dist::normal_quantile((i + 0.5) / static_cast<double>(m));
}

namespace {

double median_abs(std::vector<double> v) {
  if (v.empty()) return 0.0;
  for (auto& x : v) x = std::fabs(x);
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ScreeningResult lenth_flag(const std::vector<EffectEstimate>& effects, double alpha) {
  const int m = static_cast<int>(effects.size());
  if (m < 7) throw std::invalid_argument("too few effects for a stable pseudo standard error");

  std::vector<double> vals;
  vals.reserve(m);
  for (const auto& e : effects) vals.push_back(e.effect);

  const double s0 = 1.5 * median_abs(vals);
  std::vector<double> trimmed;
  for (double v : vals)
    if (std::fabs(v) < 2.5 * s0) trimmed.push_back(v);
  const double pse = 1.5 * median_abs(trimmed);

  const double dof = m / 3.0;
  const double t_ind = dist::t_quantile(1.0 - alpha / 2.0, dof);
  const double gamma = 0.5 * (1.0 + std::pow(1.0 - alpha, 1.0 / m));
  const double t_sim = dist::t_quantile(gamma, dof);

  ScreeningResult res;
  res.alpha = alpha;
  res.lenth_pse = pse;
  res.margin_individual = t_ind * pse;
  res.margin = t_sim * pse;
  res.effects_sorted = effects;
  normal_plot_data(res.effects_sorted, res.quantiles);
  for (const auto& e : effects)
    if (std::fabs(e.effect) > res.margin) res.flagged.push_back(e.label);
  return res;
}

}  // namespace ptune::doe
