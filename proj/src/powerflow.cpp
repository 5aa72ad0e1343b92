#include "ptune/powerflow.hpp"

#include <cmath>

namespace ptune {

Eigen::VectorXcd scheduled_injection(const PowerSystemCase& sys) {
  const int n = static_cast<int>(sys.buses.size());
  Eigen::VectorXcd s(n);
  for (int i = 0; i < n; ++i) {
    const auto& b = sys.buses[i];
    s(i) = std::complex<double>(b.p_gen - b.p_load0, -b.q_load0);
  }
  return s;
}

Eigen::VectorXcd network_injection(const Eigen::MatrixXcd& ybus, const Eigen::VectorXcd& v) {
  return v.array() * (ybus * v).conjugate().array();
}

PowerFlowSolution solve_power_flow(const PowerSystemCase& sys, double tol, int max_iter) {
  return solve_power_flow(sys, build_admittance(sys), tol, max_iter);
}

PowerFlowSolution solve_power_flow(const PowerSystemCase& sys, const Eigen::MatrixXcd& ybus,
                                   double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("solve_power_flow: tol must be positive");
  const int n = static_cast<int>(sys.buses.size());
  if (n == 0) throw PowerFlowError("empty case", 0.0, 0);

  // Unknown ordering: theta at all non-slack buses, then V at pq buses.
  std::vector<int> ang_idx, mag_idx;
  for (int i = 0; i < n; ++i) {
    if (sys.buses[i].kind != BusKind::slack) ang_idx.push_back(i);
    if (sys.buses[i].kind == BusKind::pq) mag_idx.push_back(i);
  }
  const int na = static_cast<int>(ang_idx.size());
  const int nm = static_cast<int>(mag_idx.size());

  Eigen::VectorXd vm(n), va = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    vm(i) = (sys.buses[i].kind == BusKind::pq) ? 1.0 : sys.buses[i].v_setpoint;

  const Eigen::VectorXcd s_sched = scheduled_injection(sys);

  auto polar = [&]() {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
    return v;
  };

  auto mismatch = [&](const Eigen::VectorXcd& v, Eigen::VectorXd& dp, Eigen::VectorXd& dq) {
    const Eigen::VectorXcd s = network_injection(ybus, v);
    dp.resize(na);
    dq.resize(nm);
    for (int k = 0; k < na; ++k) dp(k) = s_sched(ang_idx[k]).real() - s(ang_idx[k]).real();
    for (int k = 0; k < nm; ++k) dq(k) = s_sched(mag_idx[k]).imag() - s(mag_idx[k]).imag();
    double norm = 0.0;
    for (int k = 0; k < na; ++k) norm = std::max(norm, std::fabs(dp(k)));
    for (int k = 0; k < nm; ++k) norm = std::max(norm, std::fabs(dq(k)));
    return norm;
  };

  Eigen::VectorXd dp, dq;
  double norm = mismatch(polar(), dp, dq);
  int iter = 0;
  while (norm > tol && iter < max_iter) {
    const Eigen::VectorXcd v = polar();
    const Eigen::VectorXcd s_now = network_injection(ybus, v);

    // Polar Jacobian: rows P (non-slack) then Q (pq); columns theta then V.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nm, na + nm);
    auto dpdth = [&](int i, int j) {
      if (i == j) return -s_now(i).imag() - ybus(i, i).imag() * vm(i) * vm(i);
      const double th = va(i) - va(j);
      return vm(i) * vm(j) * (ybus(i, j).real() * std::sin(th) - ybus(i, j).imag() * std::cos(th));
    };
    auto dqdth = [&](int i, int j) {
      if (i == j) return s_now(i).real() - ybus(i, i).real() * vm(i) * vm(i);
      const double th = va(i) - va(j);
      return -vm(i) * vm(j) * (ybus(i, j).real() * std::cos(th) + ybus(i, j).imag() * std::sin(th));
    };
    auto dpdv = [&](int i, int j) {
      if (i == j) return s_now(i).real() / vm(i) + ybus(i, i).real() * vm(i);
      const double th = va(i) - va(j);
      return vm(i) * (ybus(i, j).real() * std::cos(th) + ybus(i, j).imag() * std::sin(th));
    };
    auto dqdv = [&](int i, int j) {
      if (i == j) return s_now(i).imag() / vm(i) - ybus(i, i).imag() * vm(i);
      const double th = va(i) - va(j);
      return vm(i) * (ybus(i, j).real() * std::sin(th) - ybus(i, j).imag() * std::cos(th));
    };
    for (int r = 0; r < na; ++r)
      for (int c = 0; c < na; ++c) jac(r, c) = dpdth(ang_idx[r], ang_idx[c]);
    for (int r = 0; r < na; ++r)
      for (int c = 0; c < nm; ++c) jac(r, na + c) = dpdv(ang_idx[r], mag_idx[c]);
    for (int r = 0; r < nm; ++r)
      for (int c = 0; c < na; ++c) jac(na + r, c) = dqdth(mag_idx[r], ang_idx[c]);
    for (int r = 0; r < nm; ++r)
      for (int c = 0; c < nm; ++c) jac(na + r, na + c) = dqdv(mag_idx[r], mag_idx[c]);

    Eigen::VectorXd rhs(na + nm);
    rhs.head(na) = dp;
    rhs.tail(nm) = dq;
    const Eigen::VectorXd dx = jac.partialPivLu().solve(rhs);

    for (int k = 0; k < na; ++k) va(ang_idx[k]) += dx(k);
    for (int k = 0; k < nm; ++k) vm(mag_idx[k]) += dx(na + k);
    ++iter;
    norm = mismatch(polar(), dp, dq);
  }

  if (norm > tol) {
    throw PowerFlowError("power flow did not converge: mismatch " + std::to_string(norm) +
                             " after " + std::to_string(iter) + " iterations",
                         norm, iter);
  }
  PowerFlowSolution sol;
  sol.v = polar();
  sol.mismatch_norm = norm;
  sol.iterations = iter;
  sol.converged = true;
  return sol;
}

}  // namespace ptune
