#include "ptune/casefile.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace ptune {

namespace {

// Rejects keys outside the schema so typos do not silently disappear.
void check_keys(const json& obj, const std::string& locus, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      throw CaseError(locus, "unknown field '" + it.key() + "'");
    }
  }
}

double get_num(const json& obj, const std::string& locus, const char* key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw CaseError(locus, std::string("missing field '") + key + "'");
  }
  if (!obj[key].is_number()) throw CaseError(locus + "." + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& locus, const char* key) {
  if (!obj.contains(key)) throw CaseError(locus, std::string("missing field '") + key + "'");
  if (!obj[key].is_number_integer()) throw CaseError(locus + "." + key, "expected an integer");
  return obj[key].get<int>();
}

std::string get_str(const json& obj, const std::string& locus, const char* key) {
  if (!obj.contains(key)) throw CaseError(locus, std::string("missing field '") + key + "'");
  if (!obj[key].is_string()) throw CaseError(locus + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

BusKind parse_kind(const std::string& s, const std::string& locus) {
  if (s == "slack") return BusKind::slack;
  if (s == "pv") return BusKind::pv;
  if (s == "pq") return BusKind::pq;
  throw CaseError(locus, "bus kind must be slack, pv or pq, got '" + s + "'");
}

const char* kind_name(BusKind k) {
  switch (k) {
    case BusKind::slack: return "slack";
    case BusKind::pv: return "pv";
    case BusKind::pq: return "pq";
  }
  return "?";
}

AvrParams parse_avr(const json& obj, const std::string& locus) {
  check_keys(obj, locus, {"k_a", "t_a", "k_e", "t_e", "k_f", "t_f", "vr_min", "vr_max", "s_e"});
  AvrParams a;
  a.k_a = get_num(obj, locus, "k_a");
  a.t_a = get_num(obj, locus, "t_a");
  a.k_e = get_num(obj, locus, "k_e");
  a.t_e = get_num(obj, locus, "t_e");
  a.k_f = get_num(obj, locus, "k_f");
  a.t_f = get_num(obj, locus, "t_f");
  a.vr_min = get_num(obj, locus, "vr_min");
  a.vr_max = get_num(obj, locus, "vr_max");
  if (obj.contains("s_e")) {
    if (!obj["s_e"].is_array()) throw CaseError(locus + ".s_e", "expected an array of [efd, se] pairs");
    for (const auto& p : obj["s_e"]) {
      if (!p.is_array() || p.size() != 2) throw CaseError(locus + ".s_e", "each entry must be [efd, se]");
      a.s_e.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (!a.s_e.empty() && a.s_e.size() != 2)
      throw CaseError(locus + ".s_e", "saturation needs exactly two points (or none)");
  }
  return a;
}

GovParams parse_gov(const json& obj, const std::string& locus) {
  check_keys(obj, locus, {"r_droop", "t_sv", "t_ch", "psv_min", "psv_max"});
  GovParams g;
  g.r_droop = get_num(obj, locus, "r_droop");
  g.t_sv = get_num(obj, locus, "t_sv");
  g.t_ch = get_num(obj, locus, "t_ch");
  g.psv_min = get_num(obj, locus, "psv_min");
  g.psv_max = get_num(obj, locus, "psv_max");
  return g;
}

}  // namespace

int PowerSystemCase::bus_index(int bus_id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return static_cast<int>(i);
  throw CaseError("", "bus id " + std::to_string(bus_id) + " not found");
}

int PowerSystemCase::machine_index_at_bus(int bus_id) const {
  for (size_t i = 0; i < machines.size(); ++i)
    if (machines[i].bus == bus_id) return static_cast<int>(i);
  return -1;
}

std::vector<int> PowerSystemCase::load_bus_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].p_load0 != 0.0 || buses[i].q_load0 != 0.0) out.push_back(static_cast<int>(i));
  return out;
}

void validate_case(const PowerSystemCase& sys) {
  if (sys.omega_s <= 0.0) throw CaseError("omega_s", "must be positive");
  if (sys.base_mva <= 0.0) throw CaseError("base_mva", "must be positive");

  std::set<int> ids;
  int slack_count = 0;
  for (size_t i = 0; i < sys.buses.size(); ++i) {
    const auto& b = sys.buses[i];
    const std::string locus = "buses[" + std::to_string(i) + "]";
    if (!ids.insert(b.id).second) throw CaseError(locus, "duplicate bus id " + std::to_string(b.id));
    if (b.kind == BusKind::slack) ++slack_count;
    if (b.kind != BusKind::pq && b.v_setpoint <= 0.0)
      throw CaseError(locus, "v_setpoint must be positive on " + std::string(kind_name(b.kind)) + " buses");
    if (slack_count > 1) throw CaseError(locus, "multiple slack buses");
  }
  if (!sys.buses.empty() && slack_count == 0) throw CaseError("buses", "missing slack bus");

  for (size_t i = 0; i < sys.branches.size(); ++i) {
    const auto& br = sys.branches[i];
    const std::string locus = "branches[" + std::to_string(i) + "]";
    if (br.r == 0.0 && br.x == 0.0) throw CaseError(locus, "zero-impedance branch");
    if (br.from_bus == br.to_bus) throw CaseError(locus, "branch endpoints must differ");
    if (!ids.count(br.from_bus)) throw CaseError(locus, "from_bus " + std::to_string(br.from_bus) + " does not exist");
    if (!ids.count(br.to_bus)) throw CaseError(locus, "to_bus " + std::to_string(br.to_bus) + " does not exist");
    if (br.tap <= 0.0) throw CaseError(locus, "tap must be positive");
  }

  std::set<int> machine_buses;
  for (size_t i = 0; i < sys.machines.size(); ++i) {
    const auto& m = sys.machines[i];
    const std::string locus = "machines[" + std::to_string(i) + "]";
    if (!ids.count(m.bus)) throw CaseError(locus, "bus " + std::to_string(m.bus) + " does not exist");
    if (!machine_buses.insert(m.bus).second)
      throw CaseError(locus, "more than one machine at bus " + std::to_string(m.bus));
    if (m.h <= 0.0) throw CaseError(locus + ".h", "inertia must be positive");
    if (m.td0_p <= 0.0) throw CaseError(locus + ".td0_p", "must be positive");
    if (m.tq0_p <= 0.0) throw CaseError(locus + ".tq0_p", "must be positive");
    if (!(m.xd >= m.xd_p && m.xd_p > 0.0)) throw CaseError(locus, "requires xd >= xd_p > 0");
    if (m.xq_p <= 0.0) throw CaseError(locus + ".xq_p", "must be positive");
    if (m.role == MachineRole::condenser && m.gov)
      throw CaseError(locus, "condenser declared with governor");
    const auto& a = m.avr;
    if (a.t_a <= 0.0 || a.t_e <= 0.0 || a.t_f <= 0.0)
      throw CaseError(locus + ".avr", "time constants must be positive");
    if (!(a.vr_min < a.vr_max)) throw CaseError(locus + ".avr", "requires vr_min < vr_max");
    if (m.gov) {
      const auto& g = *m.gov;
      if (g.r_droop <= 0.0) throw CaseError(locus + ".gov.r_droop", "must be positive");
      if (g.t_sv <= 0.0 || g.t_ch <= 0.0) throw CaseError(locus + ".gov", "time constants must be positive");
      if (!(g.psv_min < g.psv_max)) throw CaseError(locus + ".gov", "requires psv_min < psv_max");
    }
  }

  // Tunable parameters must resolve to a real controller of the right role.
  for (const auto& [letter, pname] : sys.tunable_map) {
    const std::string locus = "tunable_map." + letter;
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z')
      throw CaseError(locus, "factor letter must be a single capital letter");
    PowerSystemCase tmp = sys;  // resolution check only
    try {
      get_param(tmp, pname);
    } catch (const CaseError& e) {
      throw CaseError(locus, e.what());
    }
  }
}

PowerSystemCase parse_case(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseError("", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw CaseError("", "top level must be an object");
  check_keys(root, "case", {"name", "base_mva", "omega_s", "buses", "branches", "machines", "tunable_map"});

  PowerSystemCase sys;
  if (root.contains("name")) sys.name = get_str(root, "case", "name");
  sys.base_mva = get_num(root, "case", "base_mva");
  sys.omega_s = get_num(root, "case", "omega_s");

  if (!root.contains("buses") || !root["buses"].is_array()) throw CaseError("case", "missing buses[]");
  size_t i = 0;
  for (const auto& jb : root["buses"]) {
    const std::string locus = "buses[" + std::to_string(i++) + "]";
    check_keys(jb, locus, {"id", "kind", "v_setpoint", "p_load0", "q_load0", "shunt_b", "p_gen"});
    BusRecord b;
    b.id = get_int(jb, locus, "id");
    b.kind = parse_kind(get_str(jb, locus, "kind"), locus + ".kind");
    b.v_setpoint = get_num(jb, locus, "v_setpoint", b.kind == BusKind::pq ? std::optional<double>(1.0) : std::nullopt);
    b.p_load0 = get_num(jb, locus, "p_load0", 0.0);
    b.q_load0 = get_num(jb, locus, "q_load0", 0.0);
    b.shunt_b = get_num(jb, locus, "shunt_b", 0.0);
    b.p_gen = get_num(jb, locus, "p_gen", 0.0);
    sys.buses.push_back(b);
  }

  i = 0;
  if (root.contains("branches")) {
    if (!root["branches"].is_array()) throw CaseError("branches", "expected an array");
    for (const auto& jb : root["branches"]) {
      const std::string locus = "branches[" + std::to_string(i++) + "]";
      check_keys(jb, locus, {"from", "to", "r", "x", "b", "tap"});
      BranchRecord br;
      br.from_bus = get_int(jb, locus, "from");
      br.to_bus = get_int(jb, locus, "to");
      br.r = get_num(jb, locus, "r", 0.0);
      br.x = get_num(jb, locus, "x", 0.0);
      br.b_charging = get_num(jb, locus, "b", 0.0);
      br.tap = get_num(jb, locus, "tap", 1.0);
      sys.branches.push_back(br);
    }
  }

  i = 0;
  if (root.contains("machines")) {
    if (!root["machines"].is_array()) throw CaseError("machines", "expected an array");
    for (const auto& jm : root["machines"]) {
      const std::string locus = "machines[" + std::to_string(i++) + "]";
      check_keys(jm, locus, {"bus", "role", "h", "d", "xd", "xq", "xd_p", "xq_p", "td0_p", "tq0_p", "avr", "gov"});
      MachineRecord m;
      m.bus = get_int(jm, locus, "bus");
      const std::string role = get_str(jm, locus, "role");
      if (role == "generator") m.role = MachineRole::generator;
      else if (role == "condenser") m.role = MachineRole::condenser;
      else throw CaseError(locus + ".role", "must be generator or condenser");
      m.h = get_num(jm, locus, "h");
      m.d = get_num(jm, locus, "d", 0.0);
      m.xd = get_num(jm, locus, "xd");
      m.xq = get_num(jm, locus, "xq");
      m.xd_p = get_num(jm, locus, "xd_p");
      m.xq_p = get_num(jm, locus, "xq_p");
      m.td0_p = get_num(jm, locus, "td0_p");
      m.tq0_p = get_num(jm, locus, "tq0_p");
      if (!jm.contains("avr")) throw CaseError(locus, "missing avr");
      m.avr = parse_avr(jm["avr"], locus + ".avr");
      if (jm.contains("gov") && !jm["gov"].is_null()) m.gov = parse_gov(jm["gov"], locus + ".gov");
      sys.machines.push_back(m);
    }
  }

  if (root.contains("tunable_map")) {
    if (!root["tunable_map"].is_object()) throw CaseError("tunable_map", "expected an object");
    for (auto it = root["tunable_map"].begin(); it != root["tunable_map"].end(); ++it) {
      if (!it.value().is_string()) throw CaseError("tunable_map." + it.key(), "expected a parameter name string");
      sys.tunable_map[it.key()] = it.value().get<std::string>();
    }
  }

  validate_case(sys);
  return sys;
}

std::string serialize_case(const PowerSystemCase& sys) {
  json root;
  if (!sys.name.empty()) root["name"] = sys.name;
  root["base_mva"] = sys.base_mva;
  root["omega_s"] = sys.omega_s;
  root["buses"] = json::array();
  for (const auto& b : sys.buses) {
    json jb{{"id", b.id}, {"kind", kind_name(b.kind)}, {"v_setpoint", b.v_setpoint}};
    if (b.p_load0 != 0.0) jb["p_load0"] = b.p_load0;
    if (b.q_load0 != 0.0) jb["q_load0"] = b.q_load0;
    if (b.shunt_b != 0.0) jb["shunt_b"] = b.shunt_b;
    if (b.p_gen != 0.0) jb["p_gen"] = b.p_gen;
    root["buses"].push_back(jb);
  }
  root["branches"] = json::array();
  for (const auto& br : sys.branches) {
    json jb{{"from", br.from_bus}, {"to", br.to_bus}, {"r", br.r}, {"x", br.x}};
    if (br.b_charging != 0.0) jb["b"] = br.b_charging;
    if (br.tap != 1.0) jb["tap"] = br.tap;
    root["branches"].push_back(jb);
  }
  root["machines"] = json::array();
  for (const auto& m : sys.machines) {
    json ja{{"k_a", m.avr.k_a}, {"t_a", m.avr.t_a}, {"k_e", m.avr.k_e}, {"t_e", m.avr.t_e},
            {"k_f", m.avr.k_f}, {"t_f", m.avr.t_f}, {"vr_min", m.avr.vr_min}, {"vr_max", m.avr.vr_max}};
    if (!m.avr.s_e.empty()) {
      ja["s_e"] = json::array();
      for (const auto& p : m.avr.s_e) ja["s_e"].push_back(json::array({p.efd, p.se}));
    }
    json jm{{"bus", m.bus},
            {"role", m.role == MachineRole::generator ? "generator" : "condenser"},
            {"h", m.h}, {"d", m.d},
            {"xd", m.xd}, {"xq", m.xq}, {"xd_p", m.xd_p}, {"xq_p", m.xq_p},
            {"td0_p", m.td0_p}, {"tq0_p", m.tq0_p},
            {"avr", ja}};
    if (m.gov) {
      jm["gov"] = json{{"r_droop", m.gov->r_droop}, {"t_sv", m.gov->t_sv}, {"t_ch", m.gov->t_ch},
                       {"psv_min", m.gov->psv_min}, {"psv_max", m.gov->psv_max}};
    }
    root["machines"].push_back(jm);
  }
  root["tunable_map"] = json::object();
  for (const auto& [k, v] : sys.tunable_map) root["tunable_map"][k] = v;
  return root.dump(2) + "\n";
}

PowerSystemCase load_case_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw CaseError(path, "cannot open case file");
  std::string text;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  std::fclose(f);
  try {
    return parse_case(text);
  } catch (const CaseError& e) {
    throw CaseError(path, e.what());
  }
}

namespace {

// Parameter names follow the "K_A<bus>" / "R_<bus>" convention.
std::pair<char, int> split_param(const std::string& name) {
  if (name.rfind("K_A", 0) == 0 && name.size() > 3) return {'K', std::stoi(name.substr(3))};
  if (name.rfind("R_", 0) == 0 && name.size() > 2) return {'R', std::stoi(name.substr(2))};
  throw CaseError(name, "unknown tunable parameter (expected K_A<bus> or R_<bus>)");
}

}  // namespace

double get_param(const PowerSystemCase& sys, const std::string& name) {
  const auto [kind, bus] = split_param(name);
  const int mi = sys.machine_index_at_bus(bus);
  if (mi < 0) throw CaseError(name, "no machine at bus " + std::to_string(bus));
  if (kind == 'K') return sys.machines[mi].avr.k_a;
  if (!sys.machines[mi].gov) throw CaseError(name, "machine at bus " + std::to_string(bus) + " has no governor");
  return sys.machines[mi].gov->r_droop;
}

void apply_params(PowerSystemCase& sys, const ParamAssignment& params) {
  for (const auto& [name, value] : params) {
    const auto [kind, bus] = split_param(name);
    const int mi = sys.machine_index_at_bus(bus);
    if (mi < 0) throw CaseError(name, "no machine at bus " + std::to_string(bus));
    if (kind == 'K') {
      if (value <= 0.0) throw CaseError(name, "gain must be positive");
      sys.machines[mi].avr.k_a = value;
    } else {
      if (value <= 0.0) throw CaseError(name, "droop must be positive");
      if (!sys.machines[mi].gov) throw CaseError(name, "machine at bus " + std::to_string(bus) + " has no governor");
      sys.machines[mi].gov->r_droop = value;
    }
  }
}

Eigen::MatrixXcd build_admittance(const PowerSystemCase& sys) {
  const int n = static_cast<int>(sys.buses.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (size_t k = 0; k < sys.branches.size(); ++k) {
    const auto& br = sys.branches[k];
    if (br.r == 0.0 && br.x == 0.0)
      throw CaseError("branches[" + std::to_string(k) + "]", "zero-impedance branch");
    const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
    const std::complex<double> ysh(0.0, 0.5 * br.b_charging);
    const int i = sys.bus_index(br.from_bus);
    const int j = sys.bus_index(br.to_bus);
    const double a = br.tap;
    y(i, i) += (ys + ysh) / (a * a);
    y(j, j) += ys + ysh;
    y(i, j) -= ys / a;
    y(j, i) -= ys / a;
  }
  for (int i = 0; i < n; ++i) y(i, i) += std::complex<double>(0.0, sys.buses[i].shunt_b);
  return y;
}

double saturation_at(const AvrParams& avr, double efd) {
  if (avr.s_e.size() != 2) return 0.0;
  // se = b*(efd - a)^2/efd above the knee a, zero below; fit through both points.
  const double e1 = avr.s_e[0].efd, s1 = avr.s_e[0].se;
  const double e2 = avr.s_e[1].efd, s2 = avr.s_e[1].se;
  const double r1 = std::sqrt(s1 * e1), r2 = std::sqrt(s2 * e2);
  const double sqrt_b = (r2 - r1) / (e2 - e1);
  const double a = e1 - r1 / sqrt_b;
  if (efd <= a || sqrt_b <= 0.0) return 0.0;
  const double d = efd - a;
  return sqrt_b * sqrt_b * d * d / efd;
}

double saturation_deriv_at(const AvrParams& avr, double efd) {
  if (avr.s_e.size() != 2) return 0.0;
  const double h = 1e-7 * std::max(1.0, std::fabs(efd));
  return (saturation_at(avr, efd + h) - saturation_at(avr, efd - h)) / (2.0 * h);
}

}  // namespace ptune
