#include "formation/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "formation/errors.hpp"

namespace formation {

double NuBetaRamp::ramp_end() const {
  if (slope <= 0.0 || nominal <= initial) return 0.0;
  return (nominal - initial) / slope;
}

void GainSchedule::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(k1) || !positive(k2)) {
    throw ConfigError(fmt::format("gains must be positive (k1 = {}, k2 = {})", k1, k2));
  }
  if (!positive(nu_alpha)) throw ConfigError(fmt::format("nu_alpha must be positive, got {}", nu_alpha));
  if (!positive(nu_beta.initial) || !positive(nu_beta.nominal)) {
    throw ConfigError("nu_beta initial and nominal values must be positive");
  }
  if (!(nu_beta.slope >= 0.0) || !std::isfinite(nu_beta.slope)) {
    throw ConfigError("nu_beta slope must be nonnegative");
  }
  if (nu_beta.nominal < nu_beta.initial) {
    throw ConfigError("nu_beta nominal value must not be below its initial value");
  }
}

double nu_beta_at(double t, const NuBetaRamp& ramp) {
  if (t < 0.0) throw ConfigError(fmt::format("negative time {}", t));
  return std::min(ramp.initial + ramp.slope * t, ramp.nominal);
}

}  // namespace formation
