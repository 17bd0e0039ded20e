#include "lpvmpc/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace lpvmpc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

class KeyValueReader {
 public:
  KeyValueReader(const std::string& text, const std::string& name) : name_(name) {
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') {
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        fail("expected 'key = value' on line " + std::to_string(line_no));
      }
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty()) {
        fail("empty key on line " + std::to_string(line_no));
      }
      if (!values_.emplace(key, value).second) {
        fail("duplicate key '" + key + "'");
      }
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(name_ + ": " + message);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      return fallback;
    }
    used_.insert(key);
    return it->second;
  }

  double number(const std::string& key, double fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      return fallback;
    }
    used_.insert(key);
    return parse_number(key, it->second);
  }

  long integer(const std::string& key, long fallback) {
    const double v = number(key, static_cast<double>(fallback));
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v) {
      fail("key '" + key + "' must be an integer");
    }
    return i;
  }

  bool flag(const std::string& key, bool fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      return fallback;
    }
    used_.insert(key);
    if (it->second == "on" || it->second == "true" || it->second == "1") {
      return true;
    }
    if (it->second == "off" || it->second == "false" || it->second == "0") {
      return false;
    }
    fail("key '" + key + "' must be on/off");
  }

  std::vector<double> list(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      fail("missing required key '" + key + "'");
    }
    used_.insert(key);
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string field;
    while (std::getline(ss, field, ',')) {
      out.push_back(parse_number(key, trim(field)));
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) {
        fail("unknown key '" + key + "'");
      }
    }
  }

 private:
  double parse_number(const std::string& key, const std::string& value) {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) {
        throw std::invalid_argument(value);
      }
      return v;
    } catch (const std::exception&) {
      fail("key '" + key + "' has a non-numeric value '" + value + "'");
    }
  }

  std::string name_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

Eigen::Vector4d vec4(KeyValueReader& kv, const std::string& key) {
  const std::vector<double> v = kv.list(key);
  if (v.size() != 4) {
    kv.fail("key '" + key + "' needs 4 comma-separated values");
  }
  return Eigen::Vector4d(v[0], v[1], v[2], v[3]);
}

Eigen::Vector2d vec2(KeyValueReader& kv, const std::string& key) {
  const std::vector<double> v = kv.list(key);
  if (v.size() != 2) {
    kv.fail("key '" + key + "' needs 2 comma-separated values");
  }
  return Eigen::Vector2d(v[0], v[1]);
}

}  // namespace

VehicleParams RunConfig::plant_params() const {
  VehicleParams p = vehicle;
  p.m *= plant_scale_m;
  p.iz *= plant_scale_iz;
  p.c_alpha_f *= plant_scale_caf;
  p.c_alpha_r *= plant_scale_car;
  p.mu *= plant_scale_mu;
  return p;
}

RunConfig parse_run_config_text(const std::string& text, const std::string& name) {
  KeyValueReader kv(text, name);
  RunConfig cfg;

  cfg.trajectory_file = kv.str("trajectory.file", "");

  const std::string closed = kv.str("trajectory.closed", "auto");
  if (closed == "auto") {
    cfg.traj_opts.closure = PathClosure::automatic;
  } else if (closed == "open") {
    cfg.traj_opts.closure = PathClosure::open;
  } else if (closed == "closed") {
    cfg.traj_opts.closure = PathClosure::closed;
  } else {
    kv.fail("trajectory.closed must be auto/open/closed");
  }
  cfg.traj_opts.smoothing_window = static_cast<int>(kv.integer("trajectory.smoothing_window", 1));
  if (cfg.traj_opts.smoothing_window < 1 || cfg.traj_opts.smoothing_window % 2 == 0) {
    kv.fail("trajectory.smoothing_window must be an odd integer >= 1");
  }
  cfg.traj_opts.kappa_abs_max = kv.number("trajectory.kappa_abs_max", 10.0);

  const std::string speed_mode = kv.str("speed.mode", "fixed");
  if (speed_mode == "fixed") {
    cfg.traj_opts.speed_mode = SpeedMode::fixed;
  } else if (speed_mode == "curvature_limited") {
    cfg.traj_opts.speed_mode = SpeedMode::curvature_limited;
  } else {
    kv.fail("speed.mode must be fixed/curvature_limited");
  }
  cfg.traj_opts.limits.v_fixed = kv.number("speed.v_fixed", 8.0);
  cfg.traj_opts.limits.v_min = kv.number("speed.v_min", 1.0);
  cfg.traj_opts.limits.v_max = kv.number("speed.v_max", 30.0);
  cfg.traj_opts.limits.a_lat_max = kv.number("speed.a_lat_max", 2.0);
  cfg.traj_opts.limits.a_long_max = kv.number("speed.a_long_max", 1.0);

  cfg.vehicle.m = kv.number("vehicle.m", cfg.vehicle.m);
  cfg.vehicle.iz = kv.number("vehicle.iz", cfg.vehicle.iz);
  cfg.vehicle.lf = kv.number("vehicle.lf", cfg.vehicle.lf);
  cfg.vehicle.lr = kv.number("vehicle.lr", cfg.vehicle.lr);
  cfg.vehicle.c_alpha_f = kv.number("vehicle.c_alpha_f", cfg.vehicle.c_alpha_f);
  cfg.vehicle.c_alpha_r = kv.number("vehicle.c_alpha_r", cfg.vehicle.c_alpha_r);
  cfg.vehicle.mu = kv.number("vehicle.mu", cfg.vehicle.mu);
  cfg.vehicle.g = kv.number("vehicle.g", cfg.vehicle.g);

  cfg.controller.horizon = static_cast<int>(kv.integer("controller.n", cfg.controller.horizon));
  cfg.controller.ts = kv.number("controller.ts", cfg.controller.ts);
  cfg.controller.soft_state_constraints =
      kv.flag("controller.soft_state_constraints", cfg.controller.soft_state_constraints);
  cfg.controller.finish_radius = kv.number("controller.finish_radius", cfg.controller.finish_radius);
  cfg.controller.solver.tol = kv.number("solver.tol", cfg.controller.solver.tol);
  cfg.controller.solver.max_iter =
      static_cast<int>(kv.integer("solver.max_iter", cfg.controller.solver.max_iter));

  const std::string weights_mode = kv.str("weights.mode", "auto");
  if (weights_mode == "explicit") {
    WeightSet w;
    w.q = vec4(kv, "weights.q");
    w.s = vec4(kv, "weights.s");
    w.r = kv.has("weights.r") ? vec2(kv, "weights.r") : Eigen::Vector2d(5.0, 100.0);
    cfg.controller.weights = w;
  } else if (weights_mode == "auto") {
    if (kv.has("weights.q") || kv.has("weights.s") || kv.has("weights.r")) {
      kv.fail("weights.q/s/r require weights.mode = explicit");
    }
  } else {
    kv.fail("weights.mode must be auto/explicit");
  }

  if (kv.has("tuner.thresholds")) {
    const std::vector<double> thresholds = kv.list("tuner.thresholds");
    TuningTable table;
    table.tiers.clear();
    const double s_scale = kv.number("tuner.s_scale", 5.0);
    for (std::size_t i = 0; i <= thresholds.size(); ++i) {
      TuningTier tier;
      tier.kappa_threshold = i == 0 ? 0.0 : thresholds[i - 1];
      tier.q = vec4(kv, "tuner.q" + std::to_string(i));
      const std::string s_key = "tuner.s" + std::to_string(i);
      tier.s = kv.has(s_key) ? vec4(kv, s_key) : Eigen::Vector4d(s_scale * tier.q);
      table.tiers.push_back(tier);
    }
    if (kv.has("tuner.r")) {
      table.r = vec2(kv, "tuner.r");
    }
    cfg.controller.tuning = table;
  }

  cfg.sim.ts_sim = kv.number("sim.ts", cfg.sim.ts_sim);
  const std::string integrator = kv.str("sim.integrator", "rk4");
  if (integrator == "rk4") {
    cfg.sim.integrator = Integrator::rk4;
  } else if (integrator == "euler") {
    cfg.sim.integrator = Integrator::euler;
  } else {
    kv.fail("sim.integrator must be rk4/euler");
  }
  cfg.sim.max_steps = kv.integer("sim.max_steps", cfg.sim.max_steps);
  cfg.sim.noise.pos = kv.number("sim.noise.pos", 0.0);
  cfg.sim.noise.heading = kv.number("sim.noise.heading", 0.0);
  cfg.sim.noise.vel = kv.number("sim.noise.vel", 0.0);
  cfg.sim.noise.seed = static_cast<std::uint64_t>(kv.integer("sim.seed", 0));

  const std::string x0 = kv.str("sim.x0", "auto");
  if (x0 == "auto") {
    cfg.sim.x0_auto = true;
  } else {
    std::stringstream ss(x0);
    std::string field;
    std::vector<double> v;
    while (std::getline(ss, field, ',')) {
      try {
        v.push_back(std::stod(trim(field)));
      } catch (const std::exception&) {
        kv.fail("sim.x0 must be 'auto' or six numbers vx,vy,psi,psi_dot,X,Y");
      }
    }
    if (v.size() != 6) {
      kv.fail("sim.x0 must be 'auto' or six numbers vx,vy,psi,psi_dot,X,Y");
    }
    cfg.sim.x0_auto = false;
    cfg.sim.x0 = VehicleState{v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  cfg.plant_scale_m = kv.number("sim.plant_scale.m", 1.0);
  cfg.plant_scale_iz = kv.number("sim.plant_scale.iz", 1.0);
  cfg.plant_scale_caf = kv.number("sim.plant_scale.c_alpha_f", 1.0);
  cfg.plant_scale_car = kv.number("sim.plant_scale.c_alpha_r", 1.0);
  cfg.plant_scale_mu = kv.number("sim.plant_scale.mu", 1.0);

  cfg.out_dir = kv.str("output.dir", ".");
  cfg.prefix = kv.str("output.prefix", "run");

  kv.check_all_used();

  try {
    cfg.vehicle.validate();
    cfg.controller.validate();
    cfg.sim.validate(cfg.controller.ts);
    if (cfg.plant_scale_m <= 0.0 || cfg.plant_scale_iz <= 0.0 || cfg.plant_scale_caf <= 0.0 ||
        cfg.plant_scale_car <= 0.0 || cfg.plant_scale_mu < 0.0) {
      throw std::invalid_argument("plant scale factors must be positive");
    }
    if (cfg.sim.plant_params_set) {
      cfg.sim.plant_params.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": " + e.what());
  }

  cfg.sim.plant_params = cfg.plant_params();
  cfg.sim.plant_params_set = true;
  return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config_text(buffer.str(), path.string());
}

}  // namespace lpvmpc
