#include "geoshoot/core.hpp"

namespace geoshoot {

ValidatedConfig validate_config(const ShootingConfig& config) {
  std::vector<ConfigViolation> violations;
  if (!(config.sigma > 0.0))
    violations.push_back(ConfigViolation::NonPositiveSigma);
  if (!(config.lambda > 0.0))
    violations.push_back(ConfigViolation::NonPositiveLambda);
  if (config.timesteps < 1)
    violations.push_back(ConfigViolation::ZeroTimesteps);
  if (!(config.threshold_multiplier > 0.0))
    violations.push_back(ConfigViolation::NonPositiveThreshold);
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return ValidatedConfig{config};
}

}  // namespace geoshoot
