#pragma once

#include <string>
#include <vector>

namespace betacrit::testing {

struct ShippedConfig {
  std::string file;
  std::string command;
};

inline const std::vector<ShippedConfig>& shipped_configs() {
  static const std::vector<ShippedConfig> all{
      {"square_well_beta_cr.json", "beta-cr"},    {"square_well_mu_curve.json", "mu-curve"},
      {"neumann_mu_curve.json", "mu-curve"},      {"square_well_direct.json", "direct"},
      {"square_well_crosscheck.json", "crosscheck"}, {"fkw_exterior_3d.json", "fkw"},
      {"fkw_exterior_2d.json", "fkw"},            {"scaling_indicator_1d.json", "scaling"},
      {"halfspace_2d_fixed.json", "halfspace"},   {"halfspace_2d_sqrt.json", "halfspace"},
      {"halfspace_3d_minus.json", "halfspace"},   {"halfspace_3d_plus.json", "halfspace"},
      {"clr_deep_well.json", "clr"},              {"dichotomy_default.json", "dichotomy"},
  };
  return all;
}

inline std::string config_path(const std::string& file) { return std::string(BETACRIT_SOURCE_DIR) + "/configs/" + file; }

} // namespace betacrit::testing
