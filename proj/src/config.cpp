#include "config.hpp"

#include <filesystem>
#include <json.hpp>

#include "util.hpp"

namespace ps3 {

namespace {

using nlohmann::json;

const json& require(const json& node, const std::string& key, const std::string& context) {
  auto it = node.find(key);
  if (it == node.end()) fail("ConfigError", "missing field " + context + "." + key);
  return *it;
}

double number(const json& node, const std::string& key, const std::string& context) {
  const json& v = require(node, key, context);
  if (!v.is_number()) fail("ConfigError", context + "." + key + " must be a number");
  return v.get<double>();
}

Grid1 grid1(const json& node, const std::string& key, const std::string& context) {
  const json& v = require(node, key, context);
  if (!v.is_object() || !v.contains("x") || !v.contains("y"))
    fail("ConfigError", context + "." + key + " must be an object with x/y arrays");
  Grid1 g;
  const auto x = v["x"].get<std::vector<double>>();
  const auto y = v["y"].get<std::vector<double>>();
  g.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<int>(x.size()));
  g.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<int>(y.size()));
  g.validate(context + "." + key);
  return g;
}

Grid2 grid2_file(const json& node, const std::string& key, const std::string& context,
                 const std::filesystem::path& map_dir) {
  const json& v = require(node, key, context);
  if (!v.is_string()) fail("ConfigError", context + "." + key + " must be a file name");
  return load_grid2_csv((map_dir / v.get<std::string>()).string());
}

AftertreatmentStage stage(const json& node, const std::string& name) {
  const std::string context = "aftertreatment." + name;
  AftertreatmentStage s;
  s.mass_kg = number(node, "mass_kg", context);
  s.specific_heat_j_per_kgk = number(node, "specific_heat_j_per_kgk", context);
  s.area_m2 = number(node, "area_m2", context);
  s.emissivity = number(node, "emissivity", context);
  s.conv_coeff_w_per_m2k = CubicTable1D(grid1(node, "conv_coeff_curve_w_per_m2k", context));
  return s;
}

}  // namespace

void PowertrainConfig::validate() const {
  battery.validate();
  vehicle.validate();
  engine.validate();
  em.validate();
  aftertreatment.validate();
  if (dwell_gear_s < 0 || dwell_engine_s < 0)
    fail("ConfigError", "transmission dwell times must be >= 0");
  if (!(mu_min <= 1.0)) fail("ConfigError", "controls.mu_min must be <= 1");
}

PowertrainConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  json root;
  try {
    root = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail("ConfigError", std::string("JSON parse failure: ") + e.what());
  }

  PowertrainConfig cfg;
  cfg.source_path = path;
  cfg.digest = fnv1a64(text.data(), text.size());

  const auto base_dir = std::filesystem::path(path).parent_path();
  const auto map_dir = base_dir / require(root, "map_dir", "config").get<std::string>();

  {
    const json& b = require(root, "battery", "config");
    auto& p = cfg.battery;
    p.nominal_capacity_ah = number(b, "nominal_capacity_ah", "battery");
    p.coulombic_eff_charge = number(b, "coulombic_eff_charge", "battery");
    p.coulombic_eff_discharge = number(b, "coulombic_eff_discharge", "battery");
    p.pack_mass_kg = number(b, "pack_mass_kg", "battery");
    p.specific_heat_j_per_kgk = number(b, "specific_heat_j_per_kgk", "battery");
    p.conv_coeff_w_per_m2k = number(b, "conv_coeff_w_per_m2k", "battery");
    p.surface_area_m2 = number(b, "surface_area_m2", "battery");
    p.ambient_temp_c = number(b, "ambient_temp_c", "battery");
    p.aux_load_w = number(b, "aux_load_w", "battery");
    p.soc_min = number(b, "soc_min", "battery");
    p.soc_max = number(b, "soc_max", "battery");
    p.soc_boundary = number(b, "soc_boundary", "battery");
    p.r0_ohm = CubicTable1D(grid1(b, "r0_curve_ohm", "battery"));
    p.voc_v = CubicTable1D(grid1(b, "voc_curve_v", "battery"));
    p.current_min_a = CubicTable1D(grid1(b, "current_min_curve_a", "battery"));
    p.current_max_a = CubicTable1D(grid1(b, "current_max_curve_a", "battery"));
  }

  {
    const json& v = require(root, "vehicle", "config");
    auto& p = cfg.vehicle;
    p.mass_kg = number(v, "mass_kg", "vehicle");
    p.drag_coeff = number(v, "drag_coeff", "vehicle");
    p.air_density_kg_per_m3 = number(v, "air_density_kg_per_m3", "vehicle");
    p.frontal_area_m2 = number(v, "frontal_area_m2", "vehicle");
    p.gravity_mps2 = number(v, "gravity_mps2", "vehicle");
    p.rolling_coeff = number(v, "rolling_coeff", "vehicle");
    p.wheel_radius_m = number(v, "wheel_radius_m", "vehicle");
    p.gearbox_eff = number(v, "gearbox_eff", "vehicle");
    const auto ratios = require(v, "gear_ratios", "vehicle").get<std::vector<double>>();
    if (ratios.size() != 6) fail("ConfigError", "vehicle.gear_ratios must have 6 entries");
    std::copy(ratios.begin(), ratios.end(), p.gear_ratios.begin());
    p.engine_inertia_kgm2 = number(v, "engine_inertia_kgm2", "vehicle");
    p.motor_inertia_kgm2 = number(v, "motor_inertia_kgm2", "vehicle");
    p.accel_min_mps2 = number(v, "accel_min_mps2", "vehicle");
    p.accel_max_mps2 = number(v, "accel_max_mps2", "vehicle");
    p.speed_min_mps = number(v, "speed_min_mps", "vehicle");
    p.speed_max_mps = number(v, "speed_max_mps", "vehicle");
    p.speed_band_mps = number(v, "speed_band_mps", "vehicle");
  }

  {
    const json& e = require(root, "engine", "config");
    auto& p = cfg.engine;
    p.fuel_grid = grid2_file(e, "fuel_map_csv", "engine", map_dir);
    p.exhaust_grid = grid2_file(e, "exhaust_map_csv", "engine", map_dir);
    p.tot_grid = grid2_file(e, "turbine_out_map_csv", "engine", map_dir);
    p.eonox_grid = grid2_file(e, "eonox_map_csv", "engine", map_dir);
    p.tau_e_min_nm = CubicTable1D(grid1(e, "tau_e_min_curve_nm", "engine"));
    p.tau_e_max_nm = CubicTable1D(grid1(e, "tau_e_max_curve_nm", "engine"));
    p.drag_nm = CubicTable1D(grid1(e, "drag_curve_nm", "engine"));
    p.idle_speed_radps = number(e, "idle_speed_radps", "engine");
    p.max_speed_radps = number(e, "max_speed_radps", "engine");
    p.idle_exhaust_kgps = number(e, "idle_exhaust_kgps", "engine");
    p.idle_tot_c = number(e, "idle_tot_c", "engine");
    p.idle_eonox_mgps = number(e, "idle_eonox_mgps", "engine");
    p.finalize();
  }

  {
    const json& m = require(root, "em", "config");
    auto& p = cfg.em;
    p.efficiency_grid = grid2_file(m, "efficiency_map_csv", "em", map_dir);
    p.tau_m_min_nm = CubicTable1D(grid1(m, "tau_m_min_curve_nm", "em"));
    p.tau_m_max_nm = CubicTable1D(grid1(m, "tau_m_max_curve_nm", "em"));
    p.max_speed_radps = number(m, "max_speed_radps", "em");
    p.finalize();
  }

  {
    const json& a = require(root, "aftertreatment", "config");
    auto& p = cfg.aftertreatment;
    p.cp_air_j_per_kgk = number(a, "cp_air_j_per_kgk", "aftertreatment");
    p.predoc_gain_per_kg = number(a, "predoc_gain_per_kg", "aftertreatment");
    p.stefan_boltzmann = number(a, "stefan_boltzmann_w_per_m2k4", "aftertreatment");
    p.ambient_temp_c = number(a, "ambient_temp_c", "aftertreatment");
    p.doc = stage(require(a, "doc", "aftertreatment"), "doc");
    p.dpf = stage(require(a, "dpf", "aftertreatment"), "dpf");
    p.scr = stage(require(a, "scr", "aftertreatment"), "scr");
    p.scr_specific_heat =
        CubicTable1D(grid1(a, "scr_specific_heat_curve_j_per_kgk", "aftertreatment"));
    p.conv_no_grid = grid2_file(a, "conv_no_map_csv", "aftertreatment", map_dir);
    p.conv_no2_grid = grid2_file(a, "conv_no2_map_csv", "aftertreatment", map_dir);
    p.finalize();
  }

  {
    const json& t = require(root, "transmission", "config");
    cfg.dwell_gear_s = static_cast<int>(number(t, "dwell_gear_s", "transmission"));
    cfg.dwell_engine_s = static_cast<int>(number(t, "dwell_engine_s", "transmission"));
    const json& c = require(root, "controls", "config");
    cfg.mu_min = number(c, "mu_min", "controls");
  }

  {
    Grid1 g;
    g.x = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
    g.y.resize(6);
    for (int i = 0; i < 6; ++i) g.y[i] = cfg.vehicle.gear_ratios[static_cast<std::size_t>(i)];
    cfg.gear_ratio_of_relaxed = CubicTable1D(g);
  }

  cfg.validate();
  return cfg;
}

}  // namespace ps3
