#include "ptune/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ptune/dist.hpp"

namespace ptune::stats {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AnovaTable AnovaTable::from_components(std::vector<std::pair<std::string, double>> source_ss,
                                       const std::vector<double>& source_dof, double error_ss,
                                       double error_dof, double alpha) {
  if (source_ss.size() != source_dof.size())
    throw std::invalid_argument("source ss/dof length mismatch");
  AnovaTable t;
  t.alpha = alpha;
  const double ms_error = (error_dof > 0.0) ? error_ss / error_dof : 0.0;
  double total_ss = error_ss, total_dof = error_dof;
  for (size_t i = 0; i < source_ss.size(); ++i) {
    AnovaRow r;
    r.source = source_ss[i].first;
    r.ss = source_ss[i].second;
    r.dof = source_dof[i];
    r.ms = (r.dof > 0.0) ? r.ss / r.dof : 0.0;
    if (ms_error > 0.0) {
      r.f = r.ms / ms_error;
      r.p = 1.0 - dist::f_cdf(r.f, r.dof, error_dof);
    } else if (r.ss <= 0.0) {
      r.f = 0.0;
      r.p = 1.0;
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    total_ss += r.ss;
    total_dof += r.dof;
    t.rows.push_back(std::move(r));
  }
  t.error = {"Error", error_ss, error_dof, ms_error, 0.0, 1.0};
  t.total = {"Total", total_ss, total_dof, 0.0, 0.0, 1.0};
  return t;
}

AnovaTable anova_selected(const doe::DesignMatrix& design, const Eigen::VectorXd& responses,
                          const std::vector<std::string>& selected, double alpha) {
  const long n = design.n_runs();
  if (responses.size() != n) throw std::invalid_argument("response length mismatch");
  if (selected.empty()) throw std::invalid_argument("empty effect selection");
  if (static_cast<long>(selected.size()) >= n - 1)
    throw std::invalid_argument("selection exhausts all degrees of freedom");
  std::set<std::string> seen;
  for (const auto& s : selected)
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate effect '" + s + "'");

  const double mean = responses.mean();
  const double total_ss = (responses.array() - mean).square().sum();

  std::vector<std::pair<std::string, double>> src;
  std::vector<double> dof;
  double selected_ss = 0.0;
  for (const auto& label : selected) {
    const Eigen::VectorXd sign = doe::effect_sign_column(design, label);
    const double contrast = sign.dot(responses);
    const double ss = contrast * contrast / static_cast<double>(n);
    src.emplace_back(label, ss);
    dof.push_back(1.0);
    selected_ss += ss;
  }
  double error_ss = total_ss - selected_ss;
  if (error_ss < 0.0 && error_ss > -1e-9 * std::max(1.0, total_ss)) error_ss = 0.0;
  const double error_dof = static_cast<double>(n - 1 - static_cast<long>(selected.size()));
  return AnovaTable::from_components(std::move(src), dof, error_ss, error_dof, alpha);
}

LeveneResult levene(const std::vector<std::vector<double>>& groups, LeveneCenter center) {
  const int g = static_cast<int>(groups.size());
  if (g < 2) throw std::invalid_argument("levene needs at least two groups");
  long n = 0;
  for (const auto& grp : groups) {
    if (grp.size() < 2) throw std::invalid_argument("every group needs at least two observations");
    n += static_cast<long>(grp.size());
  }

  std::vector<std::vector<double>> z(g);
  for (int i = 0; i < g; ++i) {
    const double c = (center == LeveneCenter::mean) ? mean_of(groups[i]) : median_of(groups[i]);
    for (double v : groups[i]) z[i].push_back(std::fabs(v - c));
  }

  double grand = 0.0;
  for (const auto& zi : z) grand += std::accumulate(zi.begin(), zi.end(), 0.0);
  grand /= static_cast<double>(n);

  double ssb = 0.0, ssw = 0.0;
  for (const auto& zi : z) {
    const double zm = mean_of(zi);
    ssb += static_cast<double>(zi.size()) * (zm - grand) * (zm - grand);
    for (double v : zi) ssw += (v - zm) * (v - zm);
  }

  LeveneResult r;
  r.groups = g;
  r.center = (center == LeveneCenter::mean) ? "mean" : "median";
  const double scale = std::max(1.0, grand * grand);
  if (ssb <= 1e-14 * scale) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  if (ssw <= 1e-14 * scale) {
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  const double dof1 = g - 1.0;
  const double dof2 = static_cast<double>(n - g);
  r.statistic = (ssb / dof1) / (ssw / dof2);
  r.p_value = 1.0 - dist::f_cdf(r.statistic, dof1, dof2);
  return r;
}

std::vector<double> power_transform(const std::vector<double>& data, double lambda) {
  std::vector<double> out;
  out.reserve(data.size());
  for (double v : data) {
    if (!(v > 0.0)) throw std::invalid_argument("power transform requires positive data");
    out.push_back(std::pow(v, lambda));
  }
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = -60; i <= 60; ++i) grid.push_back(i * 0.05);
  return grid;
}

TransformResult search_lambda(const std::vector<double>& data,
                              const std::vector<std::vector<int>>& groupings,
                              const std::vector<double>& grid) {
  if (groupings.empty()) throw std::invalid_argument("need at least one grouping");
  for (const auto& grouping : groupings)
    if (grouping.size() != data.size()) throw std::invalid_argument("grouping length mismatch");

  TransformResult best;
  best.lambda = 1.0;
  double best_crit = std::numeric_limits<double>::infinity();
  for (double lam : grid) {
    const std::vector<double> t = power_transform(data, lam);
    double crit = 0.0;
    bool valid = true;
    for (const auto& grouping : groupings) {
      const int ng = *std::max_element(grouping.begin(), grouping.end()) + 1;
      std::vector<std::vector<double>> groups(ng);
      for (size_t i = 0; i < t.size(); ++i) groups[grouping[i]].push_back(t[i]);
      // A transform that collapses the data to a constant carries no
      // information; exclude it rather than let 0/0 look optimal.
      double lo = t[0], hi = t[0];
      for (double v : t) { lo = std::min(lo, v); hi = std::max(hi, v); }
      if (hi - lo <= 1e-12 * std::max(1.0, std::fabs(hi))) {
        valid = false;
        break;
      }
      crit = std::max(crit, levene(groups).statistic);
    }
    const double recorded = valid ? crit : std::numeric_limits<double>::infinity();
    best.trace.emplace_back(lam, recorded);
    if (valid && recorded < best_crit) {
      best_crit = recorded;
      best.lambda = lam;
    }
  }
  return best;
}

ShapiroResult shapiro_wilk(const std::vector<double>& sample) {
  const int n = static_cast<int>(sample.size());
  if (n < 3 || n > 5000) throw std::invalid_argument("shapiro_wilk requires 3 <= n <= 5000");

  std::vector<double> x = sample;
  std::sort(x.begin(), x.end());
  const double mean = mean_of(x);
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  if (ssq <= 0.0) throw std::invalid_argument("shapiro_wilk: sample has zero variance");

  // Expected normal order statistics (Blom) and Royston's weight corrections.
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i)
    m(i) = dist::normal_quantile((i + 1 - 0.375) / (n + 0.25));
  const double ssq_m = m.squaredNorm();

  Eigen::VectorXd a(n);
  if (n == 3) {
    a(0) = -std::sqrt(0.5);
    a(1) = 0.0;
    a(2) = std::sqrt(0.5);
  } else {
    const Eigen::VectorXd c = m / std::sqrt(ssq_m);
    const double u = 1.0 / std::sqrt(static_cast<double>(n));
    const double an = c(n - 1) + u * (0.221157 + u * (-0.147981 + u * (-2.071190 +
                          u * (4.434685 + u * (-2.706056)))));
    double phi;
    if (n > 5) {
      const double an1 = c(n - 2) + u * (0.042981 + u * (-0.293762 + u * (-1.752461 +
                             u * (5.682633 + u * (-3.582633)))));
      phi = (ssq_m - 2.0 * m(n - 1) * m(n - 1) - 2.0 * m(n - 2) * m(n - 2)) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      a(n - 1) = an;
      a(n - 2) = an1;
      a(0) = -an;
      a(1) = -an1;
      for (int i = 2; i < n - 2; ++i) a(i) = m(i) / std::sqrt(phi);
    } else {
      phi = (ssq_m - 2.0 * m(n - 1) * m(n - 1)) / (1.0 - 2.0 * an * an);
      a(n - 1) = an;
      a(0) = -an;
      for (int i = 1; i < n - 1; ++i) a(i) = m(i) / std::sqrt(phi);
    }
  }

  double num = 0.0;
  for (int i = 0; i < n; ++i) num += a(i) * x[i];
  const double w = num * num / ssq;

  // P-value per Royston's normalizing approximations.
  double p;
  if (n == 3) {
    const double pi6 = 6.0 / M_PI;
    const double stqr = std::asin(std::sqrt(0.75));
    p = pi6 * (std::asin(std::sqrt(w)) - stqr);
    p = std::clamp(p, 0.0, 1.0);
  } else if (n <= 11) {
    const double nd = n;
    const double gamma = -2.273 + 0.459 * nd;
    const double wprime = -std::log(gamma - std::log1p(-w));
    const double mu = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
    const double sigma = std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd - 0.0020322 * nd * nd * nd);
    p = 1.0 - dist::normal_cdf((wprime - mu) / sigma);
  } else {
    const double ln_n = std::log(static_cast<double>(n));
    const double wprime = std::log1p(-w);
    const double mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n + 0.0038915 * ln_n * ln_n * ln_n;
    const double sigma = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
    p = 1.0 - dist::normal_cdf((wprime - mu) / sigma);
  }

  ShapiroResult r;
  r.w = w;
  r.p_value = p;
  r.n = n;
  return r;
}

IndependenceResult independence_check(const std::vector<double>& residuals,
                                      const std::vector<int>& run_order, double alpha) {
  const int n = static_cast<int>(residuals.size());
  if (n < 8) throw std::invalid_argument("independence check needs at least 8 residuals");
  if (run_order.size() != residuals.size())
    throw std::invalid_argument("run order length mismatch");

  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) {
    const int r = run_order[i];
    if (r < 0 || r >= n) throw std::invalid_argument("run order index out of range");
    e[i] = residuals[r];
  }

  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i > 0) num += (e[i] - e[i - 1]) * (e[i] - e[i - 1]);
    den += e[i] * e[i];
  }
  if (den <= 0.0) throw std::invalid_argument("independence check: residuals are all zero");

  IndependenceResult r;
  r.alpha = alpha;
  r.durbin_watson = num / den;
  r.dw_z = (r.durbin_watson - 2.0) / (2.0 / std::sqrt(static_cast<double>(n)));

  // Runs about zero; zeros are dropped.
  int n_pos = 0, n_neg = 0, runs = 0;
  int prev = 0;
  for (double v : e) {
    if (v == 0.0) continue;
    const int s = (v > 0.0) ? 1 : -1;
    if (s > 0) ++n_pos; else ++n_neg;
    if (s != prev) ++runs;
    prev = s;
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("runs test degenerate: residuals never change sign");
  const double nn = n_pos + n_neg;
  const double mu = 2.0 * n_pos * n_neg / nn + 1.0;
  const double var = 2.0 * n_pos * n_neg * (2.0 * n_pos * n_neg - nn) / (nn * nn * (nn - 1.0));
  r.runs = runs;
  r.runs_z = (runs - mu) / std::sqrt(var);

  const double z_crit = dist::normal_quantile(1.0 - alpha / 2.0);
  r.independent = (std::fabs(r.dw_z) <= z_crit) && (std::fabs(r.runs_z) <= z_crit);
  return r;
}

TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  if (na < 2 || nb < 2) throw std::invalid_argument("both samples need at least two observations");

  const double ma = mean_of(a), mb = mean_of(b);
  double sa = 0.0, sb = 0.0;
  for (double v : a) sa += (v - ma) * (v - ma);
  for (double v : b) sb += (v - mb) * (v - mb);
  const double dof = na + nb - 2;
  const double sp2 = (sa + sb) / dof;
  if (sp2 <= 0.0) throw std::invalid_argument("two_sample_t: zero pooled variance");

  TTestResult r;
  r.alpha = alpha;
  r.dof = dof;
  r.t0 = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
  r.p_one_sided = dist::t_cdf(r.t0, dof);
  const double tail = (r.t0 > 0.0) ? 1.0 - dist::t_cdf(r.t0, dof) : dist::t_cdf(r.t0, dof);
  r.p_two_sided = std::min(1.0, 2.0 * tail);
  r.reject_h0 = r.p_one_sided < alpha;
  return r;
}

}  // namespace ptune::stats
