#include "ptune/dae.hpp"

#include <cmath>

namespace ptune {

void fd_dae_jacobians(const DaeSystem& sys, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      double t, Eigen::MatrixXd& fx, Eigen::MatrixXd& fy, Eigen::MatrixXd& gx,
                      Eigen::MatrixXd& gy) {
  const int nx = sys.n_diff();
  const int ny = sys.n_alg();
  fx.resize(nx, nx);
  fy.resize(nx, ny);
  gx.resize(ny, nx);
  gy.resize(ny, ny);
  Eigen::VectorXd fp(nx), fm(nx), gp(ny), gm(ny);
  Eigen::VectorXd xx = x, yy = y;
  const double h0 = 1e-7;
  for (int j = 0; j < nx; ++j) {
    const double h = h0 * std::max(1.0, std::fabs(x(j)));
    xx(j) = x(j) + h;
    sys.eval_f(xx, yy, t, fp);
    sys.eval_g(xx, yy, t, gp);
    xx(j) = x(j) - h;
    sys.eval_f(xx, yy, t, fm);
    sys.eval_g(xx, yy, t, gm);
    xx(j) = x(j);
    fx.col(j) = (fp - fm) / (2.0 * h);
    gx.col(j) = (gp - gm) / (2.0 * h);
  }
  for (int j = 0; j < ny; ++j) {
    const double h = h0 * std::max(1.0, std::fabs(y(j)));
    yy(j) = y(j) + h;
    sys.eval_f(xx, yy, t, fp);
    sys.eval_g(xx, yy, t, gp);
    yy(j) = y(j) - h;
    sys.eval_f(xx, yy, t, fm);
    sys.eval_g(xx, yy, t, gm);
    yy(j) = y(j);
    fy.col(j) = (fp - fm) / (2.0 * h);
    gy.col(j) = (gp - gm) / (2.0 * h);
  }
}

int step_trapezoidal(const DaeSystem& sys, Eigen::VectorXd& x, Eigen::VectorXd& y, double t,
                     double h, const NewtonOptions& opts) {
  const int nx = sys.n_diff();
  const int ny = sys.n_alg();
  const int n = nx + ny;
  if (x.size() != nx || y.size() != ny) throw std::invalid_argument("step dimension mismatch");

  Eigen::VectorXd f0(nx);
  sys.eval_f(x, y, t, f0);

  // Newton iterate, seeded with the previous point.
  Eigen::VectorXd x1 = x, y1 = y;
  Eigen::VectorXd f1(nx), g1(ny), resid(n);
  Eigen::MatrixXd fx, fy, gx, gy;
  Eigen::MatrixXd jac(n, n);

  const double t1 = t + h;
  double rnorm = 0.0;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    sys.eval_f(x1, y1, t1, f1);
    if (ny > 0) sys.eval_g(x1, y1, t1, g1);
    resid.head(nx) = x1 - x - 0.5 * h * (f0 + f1);
    if (ny > 0) resid.tail(ny) = g1;
    rnorm = resid.lpNorm<Eigen::Infinity>();
    if (rnorm <= opts.tol) {
      x = x1;
      y = y1;
      return iter;
    }
    if (iter == opts.max_iter) break;

    if (!sys.eval_jacobians(x1, y1, t1, fx, fy, gx, gy))
      fd_dae_jacobians(sys, x1, y1, t1, fx, fy, gx, gy);
    jac.topLeftCorner(nx, nx) = Eigen::MatrixXd::Identity(nx, nx) - 0.5 * h * fx;
    if (ny > 0) {
      jac.topRightCorner(nx, ny) = -0.5 * h * fy;
      jac.bottomLeftCorner(ny, nx) = gx;
      jac.bottomRightCorner(ny, ny) = gy;
    }
    const Eigen::VectorXd dz = jac.partialPivLu().solve(-resid);
    if (!dz.allFinite())
      throw NewtonFailure("singular iteration matrix in trapezoidal corrector", rnorm, iter);
    x1 += dz.head(nx);
    if (ny > 0) y1 += dz.tail(ny);
  }
  throw NewtonFailure("trapezoidal corrector did not converge: residual " + std::to_string(rnorm),
                      rnorm, opts.max_iter);
}

int solve_algebraic(const DaeSystem& sys, const Eigen::VectorXd& x, Eigen::VectorXd& y, double t,
                    const NewtonOptions& opts) {
  const int ny = sys.n_alg();
  if (ny == 0) return 0;
  Eigen::VectorXd g(ny);
  Eigen::MatrixXd fx, fy, gx, gy;
  double rnorm = 0.0;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    sys.eval_g(x, y, t, g);
    rnorm = g.lpNorm<Eigen::Infinity>();
    if (rnorm <= opts.tol) return iter;
    if (iter == opts.max_iter) break;
    if (!sys.eval_jacobians(x, y, t, fx, fy, gx, gy))
      fd_dae_jacobians(sys, x, y, t, fx, fy, gx, gy);
    const Eigen::VectorXd dy = gy.partialPivLu().solve(-g);
    if (!dy.allFinite())
      throw NewtonFailure("singular algebraic Jacobian", rnorm, iter);
    y += dy;
  }
  throw NewtonFailure("algebraic solve did not converge: residual " + std::to_string(rnorm),
                      rnorm, opts.max_iter);
}

}  // namespace ptune
