#include "quadfx/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace quadfx {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return d;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

int to_int(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return i;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'", line);
  }
}

std::uint64_t to_u64(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const std::uint64_t i = std::stoull(v, &pos);
    if (pos != v.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return i;
  } catch (const std::exception&) {
    throw ConfigError("expected an unsigned integer, got '" + v + "'", line);
  }
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    return false;
  }
  throw ConfigError("expected a boolean, got '" + v + "'", line);
}

/// Applies one key. Returns false for an unknown key.
bool set_key(ExperimentConfig& c, const std::string& key, const std::string& value, int line) {
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> table = {
      {"harness.scenario", [&] { c.scenario = value; }},
      {"harness.controller", [&] { c.controller = value; }},
      {"harness.disturbance", [&] { c.disturbance = value; }},
      {"harness.duration", [&] { c.duration = to_double(value, line); }},
      {"harness.activation_time", [&] { c.activation_time = to_double(value, line); }},
      {"harness.plant_rate_hz", [&] { c.plant_rate_hz = to_int(value, line); }},
      {"harness.mpc_rate_hz", [&] { c.mpc_rate_hz = to_int(value, line); }},
      {"harness.rmse_start_time", [&] { c.rmse_start_time = to_double(value, line); }},
      {"harness.seed", [&] { c.seed = to_u64(value, line); }},
      {"harness.disturbance_scale", [&] { c.disturbance_scale = to_double(value, line); }},
      {"harness.measurement_noise", [&] { c.measurement_noise = to_bool(value, line); }},
      {"harness.noise_position_std", [&] { c.noise_position_std = to_double(value, line); }},
      {"harness.noise_velocity_std", [&] { c.noise_velocity_std = to_double(value, line); }},

      {"plant.mass", [&] { c.plant.mass = to_double(value, line); }},
      {"plant.jx", [&] { c.plant.inertia_diag.x() = to_double(value, line); }},
      {"plant.jy", [&] { c.plant.inertia_diag.y() = to_double(value, line); }},
      {"plant.jz", [&] { c.plant.inertia_diag.z() = to_double(value, line); }},
      {"plant.arm_length", [&] { c.plant.arm_length = to_double(value, line); }},
      {"plant.thrust_to_weight", [&] { c.plant.thrust_to_weight = to_double(value, line); }},
      {"plant.torque_limit_x", [&] { c.plant.torque_limits.x() = to_double(value, line); }},
      {"plant.torque_limit_y", [&] { c.plant.torque_limits.y() = to_double(value, line); }},
      {"plant.torque_limit_z", [&] { c.plant.torque_limits.z() = to_double(value, line); }},
      // Data-sheet values for these are 9.4e-9 / 9.4e-9 / 2.5e-9, which are
      // not meter-scale displacements; defaults derive from the arm length.
      {"plant.rotor_dx", [&] { c.plant.rotor_dx = to_double(value, line); }},
      {"plant.rotor_dy", [&] { c.plant.rotor_dy = to_double(value, line); }},
      {"plant.drag_torque_coeff", [&] { c.plant.drag_torque_coeff = to_double(value, line); }},
      {"plant.use_motor_allocation",
       [&] { c.plant.use_motor_allocation = to_bool(value, line); }},

      {"eight.rx", [&] { c.eight.rx = to_double(value, line); }},
      {"eight.ry", [&] { c.eight.ry = to_double(value, line); }},
      {"eight.rz", [&] { c.eight.rz = to_double(value, line); }},
      {"eight.kt", [&] { c.eight.kt = to_double(value, line); }},
      {"hover.x", [&] { c.hover_position.x() = to_double(value, line); }},
      {"hover.y", [&] { c.hover_position.y() = to_double(value, line); }},
      {"hover.z", [&] { c.hover_position.z() = to_double(value, line); }},

      {"disturbance.fx", [&] { c.constant_force.x() = to_double(value, line); }},
      {"disturbance.fy", [&] { c.constant_force.y() = to_double(value, line); }},
      {"disturbance.fz", [&] { c.constant_force.z() = to_double(value, line); }},

      {"fxtdo.k1", [&] { c.fxtdo.k1 = to_double(value, line); }},
      {"fxtdo.k2", [&] { c.fxtdo.k2 = to_double(value, line); }},
      {"fxtdo.k1p", [&] { c.fxtdo.k1p = to_double(value, line); }},
      {"fxtdo.k2p", [&] { c.fxtdo.k2p = to_double(value, line); }},
      {"fxtdo.k1pp", [&] { c.fxtdo.k1pp = to_double(value, line); }},
      {"fxtdo.k2pp", [&] { c.fxtdo.k2pp = to_double(value, line); }},
      {"fxtdo.d_inf", [&] { c.fxtdo.d_inf = to_double(value, line); }},
      {"fxtdo.l1", [&] { c.fxtdo.l1 = to_double(value, line); }},
      {"fxtdo.l2", [&] { c.fxtdo.l2 = to_double(value, line); }},
      {"fxtdo.boundary_layer",
       [&] { c.fxtdo.signum_boundary_layer = to_double(value, line); }},
      {"hgdo.alpha1", [&] { c.hgdo.alpha1 = to_double(value, line); }},
      {"hgdo.alpha2", [&] { c.hgdo.alpha2 = to_double(value, line); }},
      {"hgdo.eps", [&] { c.hgdo.eps = to_double(value, line); }},

      {"mpc.horizon", [&] { c.mpc.horizon = to_int(value, line); }},
      {"mpc.dt", [&] { c.mpc.dt = to_double(value, line); }},
      {"mpc.thrust_min", [&] { c.mpc.thrust_min = to_double(value, line); c.thrust_min_set = true; }},
      {"mpc.thrust_max", [&] { c.mpc.thrust_max = to_double(value, line); c.thrust_max_set = true; }},
      {"mpc.omega_max", [&] { c.mpc.omega_max = to_double(value, line); }},
      {"mpc.iterations", [&] { c.mpc.iterations = to_int(value, line); }},
      {"mpc.kkt_tolerance", [&] { c.mpc.kkt_tolerance = to_double(value, line); }},
      {"mpc.integrator_substeps", [&] { c.mpc.integrator_substeps = to_int(value, line); }},
      {"mpc.qp_max_iterations", [&] { c.mpc.qp_max_iterations = to_int(value, line); }},

      {"weights.q_position", [&] { c.weights.q_position.setConstant(to_double(value, line));
                                   c.weights.p_position = c.weights.q_position; }},
      {"weights.q_velocity", [&] { c.weights.q_velocity.setConstant(to_double(value, line));
                                   c.weights.p_velocity = c.weights.q_velocity; }},
      {"weights.q_attitude", [&] { c.weights.q_attitude.setConstant(to_double(value, line));
                                   c.weights.p_attitude = c.weights.q_attitude; }},
      {"weights.r_thrust", [&] { c.weights.r_input[0] = to_double(value, line); }},
      {"weights.r_omega", [&] {
         const double v = to_double(value, line);
         c.weights.r_input[1] = v;
         c.weights.r_input[2] = v;
         c.weights.r_input[3] = v;
       }},

      {"indi.k_omega_x", [&] { c.indi.k_omega.x() = to_double(value, line); }},
      {"indi.k_omega_y", [&] { c.indi.k_omega.y() = to_double(value, line); }},
      {"indi.k_omega_z", [&] { c.indi.k_omega.z() = to_double(value, line); }},
      {"indi.cutoff_hz", [&] { c.indi_cutoff_hz = to_double(value, line); }},

      {"pid.position_p_x", [&] { c.pid.position_p.x() = to_double(value, line); }},
      {"pid.position_p_y", [&] { c.pid.position_p.y() = to_double(value, line); }},
      {"pid.position_p_z", [&] { c.pid.position_p.z() = to_double(value, line); }},
      {"pid.position_i_x", [&] { c.pid.position_i.x() = to_double(value, line); }},
      {"pid.position_i_y", [&] { c.pid.position_i.y() = to_double(value, line); }},
      {"pid.position_i_z", [&] { c.pid.position_i.z() = to_double(value, line); }},
      {"pid.position_d_x", [&] { c.pid.position_d.x() = to_double(value, line); }},
      {"pid.position_d_y", [&] { c.pid.position_d.y() = to_double(value, line); }},
      {"pid.position_d_z", [&] { c.pid.position_d.z() = to_double(value, line); }},
      {"pid.attitude_p", [&] { c.pid.attitude_p = to_double(value, line); }},
      {"pid.integrator_limit", [&] { c.pid.integrator_limit = to_double(value, line); }},

      {"tube.initial_state_penalty",
       [&] { c.tube_initial_state_penalty = to_double(value, line); }},
  };

  const auto it = table.find(key);
  if (it == table.end()) {
    return false;
  }
  it->second();
  return true;
}

}  // namespace

void ExperimentConfig::finalize() {
  const double weight = plant.mass * kGravity;
  if (!thrust_min_set) {
    mpc.thrust_min = 0.2 * weight;
  }
  if (!thrust_max_set) {
    mpc.thrust_max = plant.thrust_to_weight * weight;
  }
}

DisturbanceProfile ExperimentConfig::make_disturbance() const {
  const double t0 = resolved_activation_time();
  DisturbanceProfile p;
  if (disturbance == "sinusoid") {
    p = DisturbanceProfile::sinusoid(t0);
  } else if (disturbance == "constant") {
    p = DisturbanceProfile::constant(t0, constant_force);
  } else if (disturbance == "none") {
    p = DisturbanceProfile::none();
  } else {
    throw ConfigError("unknown disturbance kind '" + disturbance + "'");
  }
  return p.scaled(disturbance_scale);
}

FlatTrajectory ExperimentConfig::make_trajectory() const {
  if (scenario == "eight") {
    const EightTrajectoryParams prm = eight;
    return [prm](double t) { return eight_trajectory(t, prm); };
  }
  if (scenario == "hover") {
    const Vec3 p = hover_position;
    return [p](double) { return hover_reference(p); };
  }
  throw ConfigError("unknown scenario '" + scenario + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw ConfigError("cannot open config file '" + path + "'");
  }

  ExperimentConfig cfg;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(file, raw)) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) {
      line = line.substr(0, comment);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section header '" + raw + "'", line_no);
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value, got '" + raw + "'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("empty key or value in '" + raw + "'", line_no);
    }
    const std::string qualified = section.empty() ? key : section + "." + key;
    if (!set_key(cfg, qualified, value, line_no)) {
      throw ConfigError("unknown key '" + qualified + "'", line_no);
    }
  }
  cfg.finalize();
  validate(cfg);
  return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (!set_key(cfg, key, value, 0)) {
    throw ConfigError("unknown key '" + key + "'");
  }
  cfg.finalize();
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.scenario != "eight" && cfg.scenario != "hover") {
    throw ConfigError("scenario must be eight or hover");
  }
  static const char* kControllers[] = {"pid", "mpc", "rtmpc", "hgdo-mpc", "fxtdo-mpc"};
  if (std::find_if(std::begin(kControllers), std::end(kControllers),
                   [&](const char* c) { return cfg.controller == c; }) ==
      std::end(kControllers)) {
    throw ConfigError("controller must be one of pid|mpc|rtmpc|hgdo-mpc|fxtdo-mpc");
  }
  if (cfg.duration <= 0.0) {
    throw ConfigError("duration must be positive");
  }
  if (cfg.plant_rate_hz <= 0 || cfg.mpc_rate_hz <= 0 ||
      cfg.plant_rate_hz % cfg.mpc_rate_hz != 0) {
    throw ConfigError("the control rate must divide the plant rate");
  }
  if (!cfg.fxtdo.valid()) {
    throw ConfigError("fixed-time observer gains violate positivity/d_inf constraints");
  }
  if (!cfg.hgdo.valid()) {
    throw ConfigError("high-gain observer gains must be positive");
  }
  if (cfg.plant.mass <= 0.0 || (cfg.plant.inertia_diag.array() <= 0.0).any()) {
    throw ConfigError("plant mass and inertia must be positive");
  }
  if (cfg.plant.thrust_to_weight <= 1.0) {
    throw ConfigError("thrust_to_weight must exceed 1");
  }
  if (cfg.mpc.horizon < 1 || cfg.mpc.dt <= 0.0) {
    throw ConfigError("mpc horizon/dt invalid");
  }
  if (cfg.disturbance_scale < 0.0 || cfg.disturbance_scale > 1.0) {
    throw ConfigError("disturbance_scale must lie in [0, 1]");
  }
}

}  // namespace quadfx
