#include "ptune/dynamics.hpp"

#include <cmath>

namespace ptune {

StateLayout::StateLayout(const PowerSystemCase& sys) {
  n_bus_ = static_cast<int>(sys.buses.size());
  int off = 0;
  for (const auto& m : sys.machines) {
    mach_base_.push_back(off);
    has_gov_.push_back(m.gov.has_value());
    const std::string b = std::to_string(m.bus);
    for (const char* n : {"delta_", "omega_", "eqp_", "edp_", "efd_", "vr_", "rf_"})
      diff_names_.push_back(n + b);
    off += 7;
    if (m.gov) {
      diff_names_.push_back("psv_" + b);
      diff_names_.push_back("tm_" + b);
      off += 2;
    }
  }
  n_diff_ = off;
  for (const auto& m : sys.machines) {
    const std::string b = std::to_string(m.bus);
    alg_names_.push_back("id_" + b);
    alg_names_.push_back("iq_" + b);
  }
  for (const auto& b : sys.buses) {
    alg_names_.push_back("V_" + std::to_string(b.id));
    alg_names_.push_back("theta_" + std::to_string(b.id));
  }
  n_alg_ = static_cast<int>(alg_names_.size());
}

int StateLayout::psv(int m) const {
  if (!has_gov_[m]) throw std::invalid_argument("machine has no governor state");
  return mach_base_[m] + 7;
}

int StateLayout::tm(int m) const {
  if (!has_gov_[m]) throw std::invalid_argument("machine has no governor state");
  return mach_base_[m] + 8;
}

MachineView unpack_machine(const StateLayout& layout, const SystemState& s, int m) {
  MachineView v;
  v.mech = {s.x(layout.delta(m)), s.x(layout.omega(m)), s.x(layout.eq_p(m)), s.x(layout.ed_p(m))};
  v.avr = {s.x(layout.efd(m)), s.x(layout.vr(m)), s.x(layout.rf(m))};
  if (layout.has_gov(m)) v.gov = GovDynState{s.x(layout.psv(m)), s.x(layout.tm(m))};
  return v;
}

void pack_machine(const StateLayout& layout, const MachineView& v, int m, SystemState& s) {
  s.x(layout.delta(m)) = v.mech.delta;
  s.x(layout.omega(m)) = v.mech.omega;
  s.x(layout.eq_p(m)) = v.mech.eq_p;
  s.x(layout.ed_p(m)) = v.mech.ed_p;
  s.x(layout.efd(m)) = v.avr.efd;
  s.x(layout.vr(m)) = v.avr.vr;
  s.x(layout.rf(m)) = v.avr.rf;
  if (layout.has_gov(m)) {
    if (!v.gov) throw std::invalid_argument("governor state missing for machine with governor");
    s.x(layout.psv(m)) = v.gov->psv;
    s.x(layout.tm(m)) = v.gov->tm;
  }
}

DynamicModel::DynamicModel(const PowerSystemCase& sys, Eigen::MatrixXcd ybus,
                           LoadModel load_model, Eigen::VectorXd v0)
    : sys_(sys), ybus_(std::move(ybus)), layout_(sys), load_model_(load_model), v0_(std::move(v0)) {
  if (load_model_ == LoadModel::constant_impedance && v0_.size() != layout_.n_bus())
    throw std::invalid_argument("constant-impedance load model needs reference voltages");
}

namespace {

void check_dims(const StateLayout& l, const SystemState& s) {
  if (s.x.size() != l.n_diff() || s.y.size() != l.n_alg())
    throw std::invalid_argument("state dimension mismatch");
}

}  // namespace

Eigen::VectorXd DynamicModel::differential(const SystemState& s, const DynInputs& in) const {
  check_dims(layout_, s);
  const int nm = layout_.n_mach();
  if (in.v_ref.size() != nm || in.p_c.size() != nm || in.t_m_const.size() != nm)
    throw std::invalid_argument("input dimension mismatch");
  Eigen::VectorXd f(layout_.n_diff());

  for (int m = 0; m < nm; ++m) {
    const auto& mc = sys_.machines[m];
    const int bi = sys_.bus_index(mc.bus);
    const double om = s.x(layout_.omega(m));
    const double eqp = s.x(layout_.eq_p(m));
    const double edp = s.x(layout_.ed_p(m));
    const double efd = s.x(layout_.efd(m));
    const double vr = s.x(layout_.vr(m));
    const double rf = s.x(layout_.rf(m));
    const double idv = s.y(layout_.id(m));
    const double iqv = s.y(layout_.iq(m));
    const double vm = s.y(layout_.v_mag(bi));
    const double tm_val = layout_.has_gov(m) ? s.x(layout_.tm(m)) : in.t_m_const(m);

    const double te = edp * idv + eqp * iqv;  // saliency term omitted
    f(layout_.delta(m)) = sys_.omega_s * (om - 1.0);
    f(layout_.omega(m)) = (tm_val - te - mc.d * (om - 1.0)) / (2.0 * mc.h);
    f(layout_.eq_p(m)) = (-eqp - (mc.xd - mc.xd_p) * idv + efd) / mc.td0_p;
    f(layout_.ed_p(m)) = (-edp + (mc.xq - mc.xq_p) * iqv) / mc.tq0_p;

    const auto& a = mc.avr;
    f(layout_.efd(m)) = (vr - (a.k_e + saturation_at(a, efd)) * efd) / a.t_e;
    f(layout_.vr(m)) =
        (-vr + a.k_a * rf - (a.k_a * a.k_f / a.t_f) * efd + a.k_a * (in.v_ref(m) - vm)) / a.t_a;
    f(layout_.rf(m)) = (-rf + (a.k_f / a.t_f) * efd) / a.t_f;

    if (layout_.has_gov(m)) {
      const auto& g = *mc.gov;
      const double psv = s.x(layout_.psv(m));
      f(layout_.psv(m)) = (-psv + in.p_c(m) - (om - 1.0) / g.r_droop) / g.t_sv;
      f(layout_.tm(m)) = (-tm_val + psv) / g.t_ch;
    }
  }
  return f;
}

Eigen::VectorXd DynamicModel::algebraic(const SystemState& s, const LoadSnapshot& loads) const {
  check_dims(layout_, s);
  const int nm = layout_.n_mach();
  const int nb = layout_.n_bus();
  if (loads.p.size() != nb || loads.q.size() != nb)
    throw std::invalid_argument("load dimension mismatch");
  Eigen::VectorXd g(layout_.n_alg());

  // Stator equations.
  for (int m = 0; m < nm; ++m) {
    const auto& mc = sys_.machines[m];
    const int bi = sys_.bus_index(mc.bus);
    const double delta = s.x(layout_.delta(m));
    const double vm = s.y(layout_.v_mag(bi));
    const double th = s.y(layout_.v_ang(bi));
    const double vd = vm * std::sin(delta - th);
    const double vq = vm * std::cos(delta - th);
    g(layout_.id(m)) = s.x(layout_.ed_p(m)) - vd + mc.xq_p * s.y(layout_.iq(m));
    g(layout_.iq(m)) = s.x(layout_.eq_p(m)) - vq - mc.xd_p * s.y(layout_.id(m));
  }

  // Bus power balance: machine injection - load - network flow.
  for (int i = 0; i < nb; ++i) {
    const double vm = s.y(layout_.v_mag(i));
    const double th = s.y(layout_.v_ang(i));
    double pn = 0.0, qn = 0.0;
    for (int j = 0; j < nb; ++j) {
      const double gij = ybus_(i, j).real();
      const double bij = ybus_(i, j).imag();
      if (gij == 0.0 && bij == 0.0) continue;
      const double vj = s.y(layout_.v_mag(j));
      const double thij = th - s.y(layout_.v_ang(j));
      pn += vm * vj * (gij * std::cos(thij) + bij * std::sin(thij));
      qn += vm * vj * (gij * std::sin(thij) - bij * std::cos(thij));
    }
    double pl = loads.p(i), ql = loads.q(i);
    if (load_model_ == LoadModel::constant_impedance) {
      const double scale = (vm / v0_(i)) * (vm / v0_(i));
      pl *= scale;
      ql *= scale;
    }
    g(layout_.v_mag(i)) = -pl - pn;
    g(layout_.v_ang(i)) = -ql - qn;
  }
  for (int m = 0; m < nm; ++m) {
    const auto& mc = sys_.machines[m];
    const int bi = sys_.bus_index(mc.bus);
    const double delta = s.x(layout_.delta(m));
    const double vm = s.y(layout_.v_mag(bi));
    const double th = s.y(layout_.v_ang(bi));
    const double vd = vm * std::sin(delta - th);
    const double vq = vm * std::cos(delta - th);
    const double idv = s.y(layout_.id(m));
    const double iqv = s.y(layout_.iq(m));
    g(layout_.v_mag(bi)) += vd * idv + vq * iqv;
    g(layout_.v_ang(bi)) += vq * idv - vd * iqv;
  }
  return g;
}

void DynamicModel::jacobians(const SystemState& s, const DynInputs& in, const LoadSnapshot& loads,
                             Eigen::MatrixXd& fx, Eigen::MatrixXd& fy,
                             Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const {
  check_dims(layout_, s);
  (void)in;  // inputs enter the residuals only as constants
  const int nm = layout_.n_mach();
  const int nb = layout_.n_bus();
  const int nx = layout_.n_diff();
  const int ny = layout_.n_alg();
  fx = Eigen::MatrixXd::Zero(nx, nx);
  fy = Eigen::MatrixXd::Zero(nx, ny);
  gx = Eigen::MatrixXd::Zero(ny, nx);
  gy = Eigen::MatrixXd::Zero(ny, ny);

  for (int m = 0; m < nm; ++m) {
    const auto& mc = sys_.machines[m];
    const int bi = sys_.bus_index(mc.bus);
    const double delta = s.x(layout_.delta(m));
    const double eqp = s.x(layout_.eq_p(m));
    const double edp = s.x(layout_.ed_p(m));
    const double efd = s.x(layout_.efd(m));
    const double idv = s.y(layout_.id(m));
    const double iqv = s.y(layout_.iq(m));
    const double vm = s.y(layout_.v_mag(bi));
    const double th = s.y(layout_.v_ang(bi));
    const double sd = std::sin(delta - th);
    const double cd = std::cos(delta - th);
    const double two_h = 2.0 * mc.h;

    fx(layout_.delta(m), layout_.omega(m)) = sys_.omega_s;

    fx(layout_.omega(m), layout_.omega(m)) = -mc.d / two_h;
    fx(layout_.omega(m), layout_.eq_p(m)) = -iqv / two_h;
    fx(layout_.omega(m), layout_.ed_p(m)) = -idv / two_h;
    fy(layout_.omega(m), layout_.id(m)) = -edp / two_h;
    fy(layout_.omega(m), layout_.iq(m)) = -eqp / two_h;
    if (layout_.has_gov(m)) fx(layout_.omega(m), layout_.tm(m)) = 1.0 / two_h;

    fx(layout_.eq_p(m), layout_.eq_p(m)) = -1.0 / mc.td0_p;
    fx(layout_.eq_p(m), layout_.efd(m)) = 1.0 / mc.td0_p;
    fy(layout_.eq_p(m), layout_.id(m)) = -(mc.xd - mc.xd_p) / mc.td0_p;

    fx(layout_.ed_p(m), layout_.ed_p(m)) = -1.0 / mc.tq0_p;
    fy(layout_.ed_p(m), layout_.iq(m)) = (mc.xq - mc.xq_p) / mc.tq0_p;

    const auto& a = mc.avr;
    const double se = saturation_at(a, efd);
    const double dse = saturation_deriv_at(a, efd);
    fx(layout_.efd(m), layout_.efd(m)) = -(a.k_e + se + efd * dse) / a.t_e;
    fx(layout_.efd(m), layout_.vr(m)) = 1.0 / a.t_e;

    fx(layout_.vr(m), layout_.vr(m)) = -1.0 / a.t_a;
    fx(layout_.vr(m), layout_.rf(m)) = a.k_a / a.t_a;
    fx(layout_.vr(m), layout_.efd(m)) = -(a.k_a * a.k_f / a.t_f) / a.t_a;
    fy(layout_.vr(m), layout_.v_mag(bi)) = -a.k_a / a.t_a;

    fx(layout_.rf(m), layout_.rf(m)) = -1.0 / a.t_f;
    fx(layout_.rf(m), layout_.efd(m)) = (a.k_f / a.t_f) / a.t_f;

    if (layout_.has_gov(m)) {
      const auto& g = *mc.gov;
      fx(layout_.psv(m), layout_.psv(m)) = -1.0 / g.t_sv;
      fx(layout_.psv(m), layout_.omega(m)) = -1.0 / (g.r_droop * g.t_sv);
      fx(layout_.tm(m), layout_.tm(m)) = -1.0 / g.t_ch;
      fx(layout_.tm(m), layout_.psv(m)) = 1.0 / g.t_ch;
    }

    // Stator rows.
    gx(layout_.id(m), layout_.ed_p(m)) = 1.0;
    gx(layout_.id(m), layout_.delta(m)) = -vm * cd;
    gy(layout_.id(m), layout_.iq(m)) = mc.xq_p;
    gy(layout_.id(m), layout_.v_mag(bi)) = -sd;
    gy(layout_.id(m), layout_.v_ang(bi)) = vm * cd;

    gx(layout_.iq(m), layout_.eq_p(m)) = 1.0;
    gx(layout_.iq(m), layout_.delta(m)) = vm * sd;
    gy(layout_.iq(m), layout_.id(m)) = -mc.xd_p;
    gy(layout_.iq(m), layout_.v_mag(bi)) = -cd;
    gy(layout_.iq(m), layout_.v_ang(bi)) = -vm * sd;

    // Machine contribution to the bus balance rows.
    const double vd = vm * sd;
    const double vq = vm * cd;
    gy(layout_.v_mag(bi), layout_.id(m)) += vd;
    gy(layout_.v_mag(bi), layout_.iq(m)) += vq;
    gx(layout_.v_mag(bi), layout_.delta(m)) += vm * cd * idv - vm * sd * iqv;
    gy(layout_.v_mag(bi), layout_.v_mag(bi)) += sd * idv + cd * iqv;
    gy(layout_.v_mag(bi), layout_.v_ang(bi)) += -vm * cd * idv + vm * sd * iqv;

    gy(layout_.v_ang(bi), layout_.id(m)) += vq;
    gy(layout_.v_ang(bi), layout_.iq(m)) += -vd;
    gx(layout_.v_ang(bi), layout_.delta(m)) += -vm * sd * idv - vm * cd * iqv;
    gy(layout_.v_ang(bi), layout_.v_mag(bi)) += cd * idv - sd * iqv;
    gy(layout_.v_ang(bi), layout_.v_ang(bi)) += vm * sd * idv + vm * cd * iqv;
  }

  // Network flow terms (negated in the residual).
  for (int i = 0; i < nb; ++i) {
    const double vi = s.y(layout_.v_mag(i));
    const double thi = s.y(layout_.v_ang(i));
    double pn = 0.0, qn = 0.0;
    for (int j = 0; j < nb; ++j) {
      const double gij = ybus_(i, j).real();
      const double bij = ybus_(i, j).imag();
      if (gij == 0.0 && bij == 0.0) continue;
      const double vj = s.y(layout_.v_mag(j));
      const double thij = thi - s.y(layout_.v_ang(j));
      const double cs = std::cos(thij), sn = std::sin(thij);
      pn += vi * vj * (gij * cs + bij * sn);
      qn += vi * vj * (gij * sn - bij * cs);
      if (j != i) {
        gy(layout_.v_mag(i), layout_.v_ang(j)) -= vi * vj * (gij * sn - bij * cs);
        gy(layout_.v_mag(i), layout_.v_mag(j)) -= vi * (gij * cs + bij * sn);
        gy(layout_.v_ang(i), layout_.v_ang(j)) -= -vi * vj * (gij * cs + bij * sn);
        gy(layout_.v_ang(i), layout_.v_mag(j)) -= vi * (gij * sn - bij * cs);
      }
    }
    const double gii = ybus_(i, i).real();
    const double bii = ybus_(i, i).imag();
    // dPn/dth_i = -qn - bii*vi^2, dPn/dv_i = pn/vi + gii*vi, and the Q duals.
    gy(layout_.v_mag(i), layout_.v_ang(i)) -= -qn - bii * vi * vi;
    gy(layout_.v_mag(i), layout_.v_mag(i)) -= pn / vi + gii * vi;
    gy(layout_.v_ang(i), layout_.v_ang(i)) -= pn - gii * vi * vi;
    gy(layout_.v_ang(i), layout_.v_mag(i)) -= qn / vi - bii * vi;

    if (load_model_ == LoadModel::constant_impedance) {
      gy(layout_.v_mag(i), layout_.v_mag(i)) -= 2.0 * loads.p(i) * vi / (v0_(i) * v0_(i));
      gy(layout_.v_ang(i), layout_.v_mag(i)) -= 2.0 * loads.q(i) * vi / (v0_(i) * v0_(i));
    }
  }
}

void DynamicModel::fd_jacobians(const SystemState& s, const DynInputs& in, const LoadSnapshot& loads,
                                Eigen::MatrixXd& fx, Eigen::MatrixXd& fy,
                                Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const {
  const int nx = layout_.n_diff();
  const int ny = layout_.n_alg();
  fx.resize(nx, nx);
  fy.resize(nx, ny);
  gx.resize(ny, nx);
  gy.resize(ny, ny);
  const double h0 = 1e-7;
  SystemState p = s;
  for (int j = 0; j < nx; ++j) {
    const double h = h0 * std::max(1.0, std::fabs(s.x(j)));
    p.x(j) = s.x(j) + h;
    const Eigen::VectorXd fp = differential(p, in);
    const Eigen::VectorXd gp = algebraic(p, loads);
    p.x(j) = s.x(j) - h;
    const Eigen::VectorXd fm = differential(p, in);
    const Eigen::VectorXd gm = algebraic(p, loads);
    p.x(j) = s.x(j);
    fx.col(j) = (fp - fm) / (2.0 * h);
    gx.col(j) = (gp - gm) / (2.0 * h);
  }
  for (int j = 0; j < ny; ++j) {
    const double h = h0 * std::max(1.0, std::fabs(s.y(j)));
    p.y(j) = s.y(j) + h;
    const Eigen::VectorXd fp = differential(p, in);
    const Eigen::VectorXd gp = algebraic(p, loads);
    p.y(j) = s.y(j) - h;
    const Eigen::VectorXd fm = differential(p, in);
    const Eigen::VectorXd gm = algebraic(p, loads);
    p.y(j) = s.y(j);
    fy.col(j) = (fp - fm) / (2.0 * h);
    gy.col(j) = (gp - gm) / (2.0 * h);
  }
}

std::vector<LimitFlag> DynamicModel::apply_limits(SystemState& s) const {
  check_dims(layout_, s);
  std::vector<LimitFlag> flags;
  for (int m = 0; m < layout_.n_mach(); ++m) {
    const auto& a = sys_.machines[m].avr;
    double& vr = s.x(layout_.vr(m));
    if (vr > a.vr_max) {
      vr = a.vr_max;
      flags.push_back({m, "vr", +1});
    } else if (vr < a.vr_min) {
      vr = a.vr_min;
      flags.push_back({m, "vr", -1});
    }
    if (layout_.has_gov(m)) {
      const auto& g = *sys_.machines[m].gov;
      double& psv = s.x(layout_.psv(m));
      if (psv > g.psv_max) {
        psv = g.psv_max;
        flags.push_back({m, "psv", +1});
      } else if (psv < g.psv_min) {
        psv = g.psv_min;
        flags.push_back({m, "psv", -1});
      }
    }
  }
  return flags;
}

double DynamicModel::torque_no_saliency(const SystemState& s, int m) const {
  return s.x(layout_.ed_p(m)) * s.y(layout_.id(m)) + s.x(layout_.eq_p(m)) * s.y(layout_.iq(m));
}

double DynamicModel::torque_full(const SystemState& s, int m) const {
  const auto& mc = sys_.machines[m];
  return torque_no_saliency(s, m) -
         (mc.xq_p - mc.xd_p) * s.y(layout_.id(m)) * s.y(layout_.iq(m));
}

EquilibriumState initialize_equilibrium(const PowerSystemCase& sys, const PowerFlowSolution& pf) {
  return initialize_equilibrium(sys, pf, build_admittance(sys));
}

EquilibriumState initialize_equilibrium(const PowerSystemCase& sys, const PowerFlowSolution& pf,
                                        const Eigen::MatrixXcd& ybus) {
  if (!pf.converged) throw CaseError("", "equilibrium requires a converged power flow");
  const StateLayout layout(sys);
  const int nb = layout.n_bus();
  const int nm = layout.n_mach();

  for (int i = 0; i < nb; ++i) {
    if (sys.buses[i].p_gen != 0.0 && sys.machine_index_at_bus(sys.buses[i].id) < 0)
      throw CaseError("buses[" + std::to_string(i) + "]",
                      "scheduled generation at a bus without a machine");
  }

  EquilibriumState eq;
  eq.state.x = Eigen::VectorXd::Zero(layout.n_diff());
  eq.state.y = Eigen::VectorXd::Zero(layout.n_alg());
  eq.inputs.v_ref = Eigen::VectorXd::Zero(nm);
  eq.inputs.p_c = Eigen::VectorXd::Zero(nm);
  eq.inputs.t_m_const = Eigen::VectorXd::Zero(nm);
  eq.t_m0 = Eigen::VectorXd::Zero(nm);
  eq.efd0 = Eigen::VectorXd::Zero(nm);
  eq.v0 = Eigen::VectorXd::Zero(nb);
  eq.base_loads.p = Eigen::VectorXd::Zero(nb);
  eq.base_loads.q = Eigen::VectorXd::Zero(nb);

  const Eigen::VectorXcd s_net = network_injection(ybus, pf.v);
  for (int i = 0; i < nb; ++i) {
    eq.v0(i) = std::abs(pf.v(i));
    eq.state.y(layout.v_mag(i)) = std::abs(pf.v(i));
    eq.state.y(layout.v_ang(i)) = std::arg(pf.v(i));
    eq.base_loads.p(i) = sys.buses[i].p_load0;
    eq.base_loads.q(i) = sys.buses[i].q_load0;
  }

  for (int m = 0; m < nm; ++m) {
    const auto& mc = sys.machines[m];
    const int bi = sys.bus_index(mc.bus);
    const std::string locus = "machines[" + std::to_string(m) + "]";
    const std::complex<double> vb = pf.v(bi);
    // Machine injection = network flow + local load served at the bus.
    const std::complex<double> s_mach =
        s_net(bi) + std::complex<double>(sys.buses[bi].p_load0, sys.buses[bi].q_load0);
    const std::complex<double> ib = std::conj(s_mach / vb);
    const std::complex<double> e_int = vb + std::complex<double>(0.0, mc.xq) * ib;
    const double delta = std::arg(e_int);
    const std::complex<double> rot = std::polar(1.0, -(delta - M_PI / 2.0));
    const std::complex<double> vdq = vb * rot;
    const std::complex<double> idq = ib * rot;
    const double vd = vdq.real(), vq = vdq.imag();
    const double idv = idq.real(), iqv = idq.imag();

    const double edp = vd - mc.xq_p * iqv;
    const double eqp = vq + mc.xd_p * idv;
    const double efd = eqp + (mc.xd - mc.xd_p) * idv;
    const double te = edp * idv + eqp * iqv;

    eq.state.x(layout.delta(m)) = delta;
    eq.state.x(layout.omega(m)) = 1.0;
    eq.state.x(layout.eq_p(m)) = eqp;
    eq.state.x(layout.ed_p(m)) = edp;
    eq.state.x(layout.efd(m)) = efd;
    eq.state.y(layout.id(m)) = idv;
    eq.state.y(layout.iq(m)) = iqv;

    const auto& a = mc.avr;
    const double vr0 = (a.k_e + saturation_at(a, efd)) * efd;
    if (vr0 < a.vr_min || vr0 > a.vr_max)
      throw CaseError(locus, "required regulator output " + std::to_string(vr0) +
                                 " outside [vr_min, vr_max]");
    eq.state.x(layout.vr(m)) = vr0;
    eq.state.x(layout.rf(m)) = (a.k_f / a.t_f) * efd;
    eq.inputs.v_ref(m) = std::abs(vb) + vr0 / a.k_a;
    eq.efd0(m) = efd;

    if (mc.role == MachineRole::condenser) {
      eq.t_m0(m) = 0.0;
      continue;
    }
    eq.t_m0(m) = te;
    if (layout.has_gov(m)) {
      const auto& g = *mc.gov;
      if (te < g.psv_min || te > g.psv_max)
        throw CaseError(locus, "required valve position " + std::to_string(te) +
                                   " outside [psv_min, psv_max]");
      eq.state.x(layout.psv(m)) = te;
      eq.state.x(layout.tm(m)) = te;
      eq.inputs.p_c(m) = te;
    } else {
      eq.inputs.t_m_const(m) = te;
    }
  }
  return eq;
}

}  // namespace ptune
