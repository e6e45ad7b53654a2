#include "emlag/io.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emlag/format.hpp"

namespace emlag {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& msg) {
  throw ConfigError(origin + ": " + (path.empty() ? "" : path + ": ") + msg);
}

std::string line_of_offset(const std::string& text, size_t offset) {
  size_t line = 1, col = 1;
  for (size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + line_of_offset(text, e.byte) + ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& origin, const std::string& path) {
  if (!obj.is_object()) fail(origin, path, "expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      fail(origin, path + "/" + item.key(), "unknown key \"" + item.key() + "\"");
}

double get_number(const json& obj, const std::string& key, const std::string& origin,
                  const std::string& path) {
  if (!obj.contains(key)) fail(origin, path, "missing required key \"" + key + "\"");
  if (!obj[key].is_number()) fail(origin, path + "/" + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& origin,
            const std::string& path) {
  if (!obj.contains(key)) fail(origin, path, "missing required key \"" + key + "\"");
  if (!obj[key].is_number_integer()) fail(origin, path + "/" + key, "expected an integer");
  return obj[key].get<int>();
}

Complex get_complex(const json& v, const std::string& origin, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(origin, path, "complex values are two-element arrays [re, im]");
  return Complex(v[0].get<double>(), v[1].get<double>());
}

SaturationCurve curve_from_json(const json& obj, const std::string& origin,
                                const std::string& path) {
  reject_unknown_keys(obj, {"kind", "coefficients", "rho_max"}, origin, path);
  if (!obj.contains("kind") || !obj["kind"].is_string())
    fail(origin, path, "curve needs a string \"kind\"");
  const std::string kind = obj["kind"].get<std::string>();
  if (!obj.contains("coefficients") || !obj["coefficients"].is_array())
    fail(origin, path, "curve needs a \"coefficients\" array");
  std::vector<double> coeffs;
  for (const auto& c : obj["coefficients"]) {
    if (!c.is_number()) fail(origin, path + "/coefficients", "expected numbers");
    coeffs.push_back(c.get<double>());
  }
  double rho_max = std::numeric_limits<double>::infinity();
  if (obj.contains("rho_max")) rho_max = get_number(obj, "rho_max", origin, path);
  try {
    if (kind == "constant") {
      if (coeffs.size() != 1) fail(origin, path, "constant curve takes one coefficient");
      return SaturationCurve::constant(coeffs[0], rho_max);
    }
    if (kind == "rational") {
      if (coeffs.size() != 2)
        fail(origin, path, "rational curve takes coefficients [lam0, rho_s]");
      return SaturationCurve::rational(coeffs[0], coeffs[1], rho_max);
    }
    if (kind == "polynomial") return SaturationCurve::polynomial(coeffs, rho_max);
  } catch (const std::invalid_argument& e) {
    fail(origin, path, e.what());
  }
  fail(origin, path + "/kind", "unknown curve kind \"" + kind + "\"");
}

json curve_to_json(const SaturationCurve& c) {
  json j;
  switch (c.kind()) {
    case CurveKind::constant: j["kind"] = "constant"; break;
    case CurveKind::rational: j["kind"] = "rational"; break;
    case CurveKind::polynomial: j["kind"] = "polynomial"; break;
  }
  j["coefficients"] = c.coefficients();
  if (std::isfinite(c.rho_max())) j["rho_max"] = c.rho_max();
  return j;
}

Model pm_from_json(ModelKind kind, const json& j, const std::string& origin) {
  reject_unknown_keys(
      j, {"kind", "n_p", "J", "R_s", "lambda", "mu", "ibar", "phibar", "saturation"},
      origin, "");
  PmParams p;
  p.n_p = get_int(j, "n_p", origin, "");
  p.J = get_number(j, "J", origin, "");
  p.R_s = get_number(j, "R_s", origin, "");

  bool lambda_set = false, mu_set = false;
  if (j.contains("saturation")) {
    const json& sat = j["saturation"];
    reject_unknown_keys(sat, {"lambda", "mu"}, origin, "/saturation");
    if (sat.contains("lambda")) {
      p.lambda = curve_from_json(sat["lambda"], origin, "/saturation/lambda");
      lambda_set = true;
    }
    if (sat.contains("mu")) {
      p.mu = curve_from_json(sat["mu"], origin, "/saturation/mu");
      mu_set = true;
    }
  }
  if (j.contains("lambda")) {
    if (lambda_set) fail(origin, "/lambda", "lambda given both as a number and as a curve");
    p.lambda = SaturationCurve::constant(get_number(j, "lambda", origin, ""));
    lambda_set = true;
  }
  if (!lambda_set) fail(origin, "", "missing \"lambda\" (number or saturation curve)");
  if (j.contains("mu")) {
    if (mu_set) fail(origin, "/mu", "mu given both as a number and as a curve");
    p.mu = SaturationCurve::constant(get_number(j, "mu", origin, ""));
  }

  const bool has_ibar = j.contains("ibar"), has_phibar = j.contains("phibar");
  if (has_ibar == has_phibar)
    fail(origin, "", "exactly one of \"ibar\" and \"phibar\" must be given");
  if (has_ibar) {
    p.ibar = get_number(j, "ibar", origin, "");
  } else {
    if (!p.lambda.is_constant())
      fail(origin, "/phibar",
           "phibar is only meaningful for a constant lambda; give ibar instead");
    p.ibar = get_number(j, "phibar", origin, "") / p.lambda.coefficients()[0];
  }
  try {
    return Model(kind, p);
  } catch (const ValidationError& e) {
    fail(origin, "", e.what());
  }
}

Model im_from_json(ModelKind kind, const json& j, const std::string& origin) {
  reject_unknown_keys(
      j, {"kind", "n_p", "J", "R_s", "R_r", "L_m", "L_fs", "L_fr", "saturation", "harmonics"},
      origin, "");
  ImParams p;
  p.n_p = get_int(j, "n_p", origin, "");
  p.J = get_number(j, "J", origin, "");
  p.R_s = get_number(j, "R_s", origin, "");
  p.R_r = get_number(j, "R_r", origin, "");
  p.L_fs = get_number(j, "L_fs", origin, "");
  p.L_fr = get_number(j, "L_fr", origin, "");

  const bool has_num = j.contains("L_m"), has_curve = j.contains("saturation");
  if (has_num == has_curve)
    fail(origin, "", "exactly one of \"L_m\" and \"saturation\" must be given");
  p.L_m = has_num ? SaturationCurve::constant(get_number(j, "L_m", origin, ""))
                  : curve_from_json(j["saturation"], origin, "/saturation");

  if (j.contains("harmonics")) {
    if (!j["harmonics"].is_array()) fail(origin, "/harmonics", "expected an array");
    int idx = 0;
    for (const auto& hj : j["harmonics"]) {
      const std::string path = "/harmonics/" + std::to_string(idx++);
      reject_unknown_keys(hj, {"nu", "sigma_nu", "L_nu"}, origin, path);
      Harmonic h;
      h.nu = get_int(hj, "nu", origin, path);
      h.sigma = get_int(hj, "sigma_nu", origin, path);
      h.L = get_number(hj, "L_nu", origin, path);
      p.harmonics.push_back(h);
    }
  }
  try {
    return Model(kind, p);
  } catch (const ValidationError& e) {
    fail(origin, "", e.what());
  }
}

}  // namespace

Model machine_from_json_text(const std::string& text, const std::string& origin) {
  const json j = parse_text(text, origin);
  if (!j.is_object()) fail(origin, "", "machine definition must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string())
    fail(origin, "", "missing string key \"kind\"");
  ModelKind kind;
  try {
    kind = model_kind_from_string(j["kind"].get<std::string>());
  } catch (const ValidationError& e) {
    fail(origin, "/kind", e.what());
  }
  return is_pm(kind) ? pm_from_json(kind, j, origin) : im_from_json(kind, j, origin);
}

Model load_machine_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open machine file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return machine_from_json_text(ss.str(), path.string());
}

std::string machine_to_json_text(const Model& model) {
  json j;
  j["kind"] = to_string(model.kind());
  auto emit_curve = [&](const char* num_key, const char* sat_key,
                        const SaturationCurve& c) {
    if (c.is_constant() && !std::isfinite(c.rho_max()))
      j[num_key] = c.coefficients()[0];
    else
      j["saturation"][sat_key] = curve_to_json(c);
  };
  if (model.is_pm()) {
    const PmParams& p = model.pm();
    j["n_p"] = p.n_p;
    j["J"] = p.J;
    j["R_s"] = p.R_s;
    emit_curve("lambda", "lambda", p.lambda);
    if (!(p.mu.is_constant() && p.mu.coefficients()[0] == 0.0 &&
          !std::isfinite(p.mu.rho_max())))
      emit_curve("mu", "mu", p.mu);
    j["ibar"] = p.ibar;
  } else {
    const ImParams& p = model.im();
    j["n_p"] = p.n_p;
    j["J"] = p.J;
    j["R_s"] = p.R_s;
    j["R_r"] = p.R_r;
    j["L_fs"] = p.L_fs;
    j["L_fr"] = p.L_fr;
    if (p.L_m.is_constant() && !std::isfinite(p.L_m.rho_max()))
      j["L_m"] = p.L_m.coefficients()[0];
    else
      j["saturation"] = curve_to_json(p.L_m);
    if (!p.harmonics.empty()) {
      json arr = json::array();
      for (const Harmonic& h : p.harmonics)
        arr.push_back({{"nu", h.nu}, {"sigma_nu", h.sigma}, {"L_nu", h.L}});
      j["harmonics"] = arr;
    }
  }
  return j.dump(2) + "\n";
}

void save_machine_file(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write machine file " + path.string());
  out << machine_to_json_text(model);
}

namespace {

DriveInput drive_from_json(const json& j, const std::string& origin) {
  reject_unknown_keys(j, {"u_s", "tau_L"}, origin, "/drive");
  DriveInput d;
  if (j.contains("tau_L")) d.tau_L = get_number(j, "tau_L", origin, "/drive");
  if (!j.contains("u_s")) fail(origin, "/drive", "missing \"u_s\"");
  const json& u = j["u_s"];
  reject_unknown_keys(u, {"type", "value", "amplitude", "frequency", "phase", "times", "values"},
                      origin, "/drive/u_s");
  if (!u.contains("type") || !u["type"].is_string())
    fail(origin, "/drive/u_s", "missing string \"type\"");
  const std::string type = u["type"].get<std::string>();
  const double tau = d.tau_L;
  if (type == "constant") {
    if (!u.contains("value")) fail(origin, "/drive/u_s", "constant drive needs \"value\"");
    return DriveInput::constant_drive(get_complex(u["value"], origin, "/drive/u_s/value"), tau);
  }
  if (type == "sinusoid") {
    const double a = get_number(u, "amplitude", origin, "/drive/u_s");
    const double f = get_number(u, "frequency", origin, "/drive/u_s");
    const double ph = u.contains("phase") ? get_number(u, "phase", origin, "/drive/u_s") : 0.0;
    return DriveInput::sinusoid_drive(a, f, ph, tau);
  }
  if (type == "table") {
    if (!u.contains("times") || !u.contains("values"))
      fail(origin, "/drive/u_s", "table drive needs \"times\" and \"values\"");
    std::vector<double> times;
    for (const auto& t : u["times"]) times.push_back(t.get<double>());
    std::vector<Complex> values;
    int idx = 0;
    for (const auto& v : u["values"])
      values.push_back(get_complex(v, origin, "/drive/u_s/values/" + std::to_string(idx++)));
    try {
      return DriveInput::table_drive(std::move(times), std::move(values), tau);
    } catch (const std::invalid_argument& e) {
      fail(origin, "/drive/u_s", e.what());
    }
  }
  fail(origin, "/drive/u_s/type", "unknown drive type \"" + type + "\"");
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string origin = path.string();
  const json j = parse_text(ss.str(), origin);
  reject_unknown_keys(
      j, {"machine", "drive", "initial", "t_end", "dt", "output", "drift_bound"}, origin, "");

  RunConfig cfg;
  if (!j.contains("machine") || !j["machine"].is_string())
    fail(origin, "", "missing string key \"machine\"");
  cfg.machine_path = path.parent_path() / j["machine"].get<std::string>();
  if (!std::filesystem::exists(cfg.machine_path))
    fail(origin, "/machine", "machine file does not exist: " + cfg.machine_path.string());
  cfg.model = load_machine_file(cfg.machine_path);

  if (!j.contains("drive")) fail(origin, "", "missing \"drive\"");
  cfg.drive = drive_from_json(j["drive"], origin);

  if (j.contains("initial")) {
    const json& ini = j["initial"];
    reject_unknown_keys(ini, {"theta", "omega", "i_s", "i_r"}, origin, "/initial");
    if (ini.contains("theta")) cfg.initial.theta = get_number(ini, "theta", origin, "/initial");
    if (ini.contains("omega")) cfg.initial.omega = get_number(ini, "omega", origin, "/initial");
    if (ini.contains("i_s"))
      cfg.initial.i_s = get_complex(ini["i_s"], origin, "/initial/i_s");
    if (ini.contains("i_r")) {
      if (cfg.model.is_pm())
        fail(origin, "/initial/i_r", "PM machines have no rotor current state");
      cfg.initial.i_r = get_complex(ini["i_r"], origin, "/initial/i_r");
    }
  }

  cfg.t_end = get_number(j, "t_end", origin, "");
  cfg.dt = get_number(j, "dt", origin, "");
  if (!(cfg.dt > 0.0)) fail(origin, "/dt", "dt must be positive");
  if (!(cfg.t_end >= cfg.dt)) fail(origin, "/t_end", "t_end must be at least dt");

  if (j.contains("output")) {
    const json& out = j["output"];
    reject_unknown_keys(out, {"trajectory", "residuals"}, origin, "/output");
    if (out.contains("trajectory"))
      cfg.trajectory_path = out["trajectory"].get<std::string>();
    if (out.contains("residuals")) cfg.residual_path = out["residuals"].get<std::string>();
  }
  if (j.contains("drift_bound")) {
    cfg.drift_bound = get_number(j, "drift_bound", origin, "");
    if (!(cfg.drift_bound > 0.0)) fail(origin, "/drift_bound", "drift_bound must be positive");
  }
  return cfg;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const bool im = !traj.phi_r.empty() || !is_pm(traj.kind);
  os << "t,theta,omega,i_s_re,i_s_im";
  if (im) os << ",i_r_re,i_r_im";
  os << ",phi_s_re,phi_s_im";
  if (im) os << ",phi_r_re,phi_r_im";
  os << ",torque_em,hamiltonian\n";
  for (size_t k = 0; k < traj.size(); ++k) {
    const MachineState& s = traj.states[k];
    os << fmt17(traj.times[k]) << ',' << fmt17(s.theta) << ',' << fmt17(s.omega) << ','
       << fmt17(s.i_s.real()) << ',' << fmt17(s.i_s.imag());
    if (im) os << ',' << fmt17(s.i_r.real()) << ',' << fmt17(s.i_r.imag());
    os << ',' << fmt17(traj.phi_s[k].real()) << ',' << fmt17(traj.phi_s[k].imag());
    if (im) os << ',' << fmt17(traj.phi_r[k].real()) << ',' << fmt17(traj.phi_r[k].imag());
    os << ',' << fmt17(traj.torque_em[k]) << ',' << fmt17(traj.hamiltonian[k]) << '\n';
  }
}

void write_residual_csv(std::ostream& os, const PowerBalanceAudit& audit) {
  os << "t,dh_dt,power,residual\n";
  for (size_t k = 0; k < audit.times.size(); ++k)
    os << fmt17(audit.times[k]) << ',' << fmt17(audit.dh_dt[k]) << ','
       << fmt17(audit.power[k]) << ',' << fmt17(audit.residual[k]) << '\n';
}

}  // namespace emlag
