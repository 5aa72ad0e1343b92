#include "ptune/rsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ptune/dist.hpp"

namespace ptune::rsm {

std::string ModelSpec::term_label(int t) const {
  const auto& e = terms[t];
  std::string out;
  for (size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += factor_names[i];
    if (e[i] > 1) out += "^" + std::to_string(e[i]);
  }
  return out.empty() ? "1" : out;
}

ModelSpec parse_model_spec(const std::string& text, const std::vector<std::string>& factor_names) {
  ModelSpec spec;
  spec.factor_names = factor_names;
  const int k = static_cast<int>(factor_names.size());

  std::stringstream ss(text);
  std::string term;
  std::set<std::vector<int>> seen;
  while (std::getline(ss, term, ',')) {
    std::erase_if(term, [](char c) { return c == ' ' || c == '\t'; });
    if (term.empty()) throw std::invalid_argument("model spec: empty term");
    std::vector<int> expo(k, 0);
    if (term != "1") {
      std::stringstream ts(term);
      std::string var;
      while (std::getline(ts, var, '*')) {
        if (var.size() < 2 || var[0] != 'x')
          throw std::invalid_argument("model spec: bad variable '" + var + "' in term '" + term + "'");
        int pow = 1;
        std::string idx_str = var.substr(1);
        const auto caret = idx_str.find('^');
        if (caret != std::string::npos) {
          pow = std::stoi(idx_str.substr(caret + 1));
          idx_str = idx_str.substr(0, caret);
        }
        int idx;
        try {
          idx = std::stoi(idx_str);
        } catch (...) {
          throw std::invalid_argument("model spec: bad variable index in '" + var + "'");
        }
        if (idx < 1 || idx > k)
          throw std::invalid_argument("model spec: variable x" + std::to_string(idx) +
                                      " out of range (have " + std::to_string(k) + " factors)");
        if (pow < 1) throw std::invalid_argument("model spec: exponent must be >= 1 in '" + var + "'");
        expo[idx - 1] += pow;
      }
    }
    if (!seen.insert(expo).second)
      throw std::invalid_argument("model spec: duplicate term '" + term + "'");
    spec.terms.push_back(std::move(expo));
  }
  const std::vector<int> zero(k, 0);
  if (!seen.count(zero)) throw std::invalid_argument("model spec: constant term required");
  return spec;
}

namespace {

Eigen::MatrixXd design_matrix(const ModelSpec& spec, const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  const int p = spec.n_terms();
  Eigen::MatrixXd x(n, p);
  for (int r = 0; r < n; ++r) {
    for (int t = 0; t < p; ++t) {
      double v = 1.0;
      for (int f = 0; f < spec.n_factors(); ++f)
        for (int e = 0; e < spec.terms[t][f]; ++e) v *= points(r, f);
      x(r, t) = v;
    }
  }
  return x;
}

}  // namespace

FittedSurface fit_least_squares(const Eigen::MatrixXd& points, const Eigen::VectorXd& responses,
                                const ModelSpec& spec, double alpha) {
  const int n = static_cast<int>(points.rows());
  const int p = spec.n_terms();
  if (points.cols() != spec.n_factors()) throw std::invalid_argument("point dimension mismatch");
  if (responses.size() != n) throw std::invalid_argument("response length mismatch");
  if (n < p) throw std::invalid_argument("need at least as many points as terms");

  const Eigen::MatrixXd x = design_matrix(spec, points);

  // Column equilibration keeps badly scaled monomials well conditioned.
  Eigen::VectorXd scale(p);
  for (int j = 0; j < p; ++j) {
    const double s = x.col(j).norm();
    if (s <= 0.0) throw RankDeficiency("zero basis column", spec.term_label(j));
    scale(j) = s;
  }
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    // Name the first term whose column the pivoting pushed out.
    const auto perm = qr.colsPermutation().indices();
    const int bad = perm(qr.rank());
    throw RankDeficiency("design matrix is rank deficient", spec.term_label(bad));
  }
  const Eigen::VectorXd beta_s = qr.solve(responses);
  const Eigen::VectorXd beta = beta_s.cwiseQuotient(scale);

  FittedSurface fit;
  fit.spec = spec;
  fit.coefficients = beta;
  fit.n_points = n;
  fit.alpha = alpha;
  fit.residuals = responses - x * beta;
  fit.sse = fit.residuals.squaredNorm();
  const double mean = responses.mean();
  fit.sst = (responses.array() - mean).square().sum();
  fit.r_squared = (fit.sst > 0.0) ? std::max(0.0, 1.0 - fit.sse / fit.sst) : 0.0;

  // (X'X)^-1 recovered from the R factor of the equilibrated decomposition.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd m = r_inv * r_inv.transpose();
  const Eigen::MatrixXd xs_xtx_inv = qr.colsPermutation() * m * qr.colsPermutation().transpose();
  fit.xtx_inv = scale.cwiseInverse().asDiagonal() * xs_xtx_inv * scale.cwiseInverse().asDiagonal();

  fit.inference = coefficient_inference(fit, alpha);
  fit.anova = model_anova(fit, alpha);
  return fit;
}

std::vector<TermInference> coefficient_inference(const FittedSurface& fit, double alpha) {
  const int p = fit.spec.n_terms();
  const int n = fit.n_points;
  if (n <= p) throw std::invalid_argument("inference needs more points than terms");
  const double dof = n - p;
  // An interpolating fit has zero residual variance up to roundoff.
  const bool exact = fit.sse <= 1e-20 * std::max(fit.sst, 1e-300);
  const double sigma2 = exact ? 0.0 : fit.sse / dof;
  const double t_crit = dist::t_quantile(1.0 - alpha / 2.0, dof);
  const double coef_scale = fit.coefficients.lpNorm<Eigen::Infinity>();

  std::vector<TermInference> out(p);
  for (int j = 0; j < p; ++j) {
    TermInference& ti = out[j];
    ti.coefficient = fit.coefficients(j);
    ti.std_error = std::sqrt(std::max(0.0, sigma2 * fit.xtx_inv(j, j)));
    if (ti.std_error > 0.0) {
      ti.t0 = ti.coefficient / ti.std_error;
      const double tail = 1.0 - dist::t_cdf(std::fabs(ti.t0), dof);
      ti.p_value = std::min(1.0, 2.0 * tail);
    } else if (std::fabs(ti.coefficient) <= 1e-12 * std::max(1.0, coef_scale)) {
      ti.t0 = 0.0;
      ti.p_value = 1.0;
    } else {
      ti.t0 = std::numeric_limits<double>::infinity() * (ti.coefficient > 0 ? 1.0 : -1.0);
      ti.p_value = 0.0;
    }
    ti.ci_lo = ti.coefficient - t_crit * ti.std_error;
    ti.ci_hi = ti.coefficient + t_crit * ti.std_error;
  }
  return out;
}

stats::AnovaTable model_anova(const FittedSurface& fit, double alpha) {
  const double p = fit.spec.n_terms();
  const double n = fit.n_points;
  const double sse = (fit.sse <= 1e-20 * std::max(fit.sst, 1e-300)) ? 0.0 : fit.sse;
  const double ss_model = std::max(0.0, fit.sst - sse);
  return stats::AnovaTable::from_components({{"Model", ss_model}}, {p - 1.0}, sse, n - p, alpha);
}

double evaluate_surface(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                        const Eigen::VectorXd& point) {
  if (point.size() != spec.n_factors()) throw std::invalid_argument("point dimension mismatch");
  if (coefficients.size() != spec.n_terms()) throw std::invalid_argument("coefficient count mismatch");
  double y = 0.0;
  for (int t = 0; t < spec.n_terms(); ++t) {
    double v = coefficients(t);
    for (int f = 0; f < spec.n_factors(); ++f)
      for (int e = 0; e < spec.terms[t][f]; ++e) v *= point(f);
    y += v;
  }
  return y;
}

Eigen::VectorXd surface_gradient(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                                 const Eigen::VectorXd& point) {
  const int k = spec.n_factors();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
  for (int t = 0; t < spec.n_terms(); ++t) {
    for (int d = 0; d < k; ++d) {
      const int ed = spec.terms[t][d];
      if (ed == 0) continue;
      double v = coefficients(t) * ed * std::pow(point(d), ed - 1);
      for (int f = 0; f < k; ++f)
        if (f != d) v *= std::pow(point(f), spec.terms[t][f]);
      g(d) += v;
    }
  }
  return g;
}

Eigen::MatrixXd surface_hessian(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                                const Eigen::VectorXd& point) {
  const int k = spec.n_factors();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
  for (int t = 0; t < spec.n_terms(); ++t) {
    for (int d1 = 0; d1 < k; ++d1) {
      for (int d2 = 0; d2 < k; ++d2) {
        std::vector<int> e = spec.terms[t];
        double factor = coefficients(t);
        if (d1 == d2) {
          if (e[d1] < 2) continue;
          factor *= e[d1] * (e[d1] - 1);
          e[d1] -= 2;
        } else {
          if (e[d1] < 1 || e[d2] < 1) continue;
          factor *= e[d1] * e[d2];
          e[d1] -= 1;
          e[d2] -= 1;
        }
        double v = factor;
        for (int f = 0; f < k; ++f) v *= std::pow(point(f), e[f]);
        h(d1, d2) += v;
      }
    }
  }
  return h;
}

namespace {

Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& v, const BoxBounds& b) {
  return v.cwiseMax(b.lo).cwiseMin(b.hi);
}

// Projected-gradient descent with backtracking, then Newton polish when the
// iterate settles in the interior.
Eigen::VectorXd descend(const ModelSpec& spec, const Eigen::VectorXd& coef, const BoxBounds& b,
                        Eigen::VectorXd x) {
  const int k = static_cast<int>(x.size());
  const Eigen::VectorXd range = b.hi - b.lo;
  double step = 1.0;
  double fx = evaluate_surface(spec, coef, x);
  for (int it = 0; it < 500; ++it) {
    const Eigen::VectorXd g = surface_gradient(spec, coef, x);
    // Scale-free step seed.
    double gmax = 0.0;
    for (int i = 0; i < k; ++i) gmax = std::max(gmax, std::fabs(g(i)) / std::max(range(i), 1e-30));
    if (gmax < 1e-18) break;
    bool moved = false;
    step = std::min(step * 4.0, 1.0 / gmax * 1e-1 + step);
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd cand = clamp_to_box(x - step * g, b);
      const double fc = evaluate_surface(spec, coef, cand);
      if (fc < fx - 1e-18 && (cand - x).lpNorm<Eigen::Infinity>() > 0.0) {
        x = cand;
        fx = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  // Newton polish for strictly interior iterates.
  for (int it = 0; it < 60; ++it) {
    bool interior = true;
    for (int i = 0; i < k; ++i)
      if (x(i) <= b.lo(i) + 1e-12 * range(i) || x(i) >= b.hi(i) - 1e-12 * range(i)) interior = false;
    if (!interior) break;
    const Eigen::VectorXd g = surface_gradient(spec, coef, x);
    if (g.lpNorm<Eigen::Infinity>() == 0.0) break;
    const Eigen::MatrixXd h = surface_hessian(spec, coef, x);
    const Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd dx = llt.solve(g);
    const Eigen::VectorXd cand = clamp_to_box(x - dx, b);
    const double fc = evaluate_surface(spec, coef, cand);
    if (!(fc <= fx)) break;
    const bool converged = (cand - x).lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>());
    x = cand;
    fx = fc;
    if (converged) break;
  }
  return x;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

}  // namespace

Optimum minimize_over_box(const ModelSpec& spec, const Eigen::VectorXd& coefficients,
                          const BoxBounds& bounds, int grid_per_axis) {
  const int k = spec.n_factors();
  if (bounds.lo.size() != k || bounds.hi.size() != k)
    throw std::invalid_argument("bounds dimension mismatch");
  for (int i = 0; i < k; ++i)
    if (!(bounds.lo(i) < bounds.hi(i))) throw std::invalid_argument("bounds require lo < hi");
  const int g = std::max(grid_per_axis, 2);

  // Multi-start over the full coded grid.
  long n_starts = 1;
  for (int i = 0; i < k; ++i) n_starts *= g;

  Eigen::VectorXd best_x;
  double best_f = std::numeric_limits<double>::infinity();
  for (long s = 0; s < n_starts; ++s) {
    Eigen::VectorXd x0(k);
    long rem = s;
    for (int i = 0; i < k; ++i) {
      const long gi = rem % g;
      rem /= g;
      x0(i) = bounds.lo(i) + (bounds.hi(i) - bounds.lo(i)) * gi / (g - 1.0);
    }
    const Eigen::VectorXd x = descend(spec, coefficients, bounds, x0);
    const double f = evaluate_surface(spec, coefficients, x);
    if (best_x.size() == 0) {
      best_f = f;
      best_x = x;
      continue;
    }
    const double f_tol = 1e-12 * (1.0 + std::fabs(best_f));
    if (f < best_f - f_tol || (std::fabs(f - best_f) <= f_tol && lex_less(x, best_x))) {
      best_f = f;
      best_x = x;
    }
  }

  Optimum opt;
  opt.point = best_x;
  opt.value = best_f;
  const Eigen::VectorXd grad = surface_gradient(spec, coefficients, best_x);
  bool interior = true;
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    const double range = bounds.hi(i) - bounds.lo(i);
    const bool at_lo = best_x(i) <= bounds.lo(i) + 1e-9 * range;
    const bool at_hi = best_x(i) >= bounds.hi(i) - 1e-9 * range;
    if (at_lo || at_hi) {
      interior = false;
      // Inward directional derivative must be nonnegative.
      const double inward = at_lo ? grad(i) : -grad(i);
      worst = std::max(worst, std::max(0.0, -inward));
    } else {
      worst = std::max(worst, std::fabs(grad(i)));
    }
  }
  opt.location = interior ? OptimumLocation::interior : OptimumLocation::boundary;
  opt.stationarity = worst;
  return opt;
}

}  // namespace ptune::rsm
