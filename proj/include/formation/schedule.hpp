#pragma once

namespace formation {

// nu_beta(t) = min(initial + slope * t, nominal). A constant schedule has
// slope 0 and initial == nominal.
struct NuBetaRamp {
  double initial = 0.01;
  double slope = 0.022;
  double nominal = 5.0;

  static NuBetaRamp constant(double value) { return {value, 0.0, value}; }

  // Time at which the ramp reaches its nominal value (0 for constant ramps).
  double ramp_end() const;
  bool operator==(const NuBetaRamp&) const = default;
};

struct GainSchedule {
  double k1 = 1.0;
  double k2 = 1.0;
  double nu_alpha = 5.0;
  NuBetaRamp nu_beta;

  void validate() const;
  bool operator==(const GainSchedule&) const = default;
};

double nu_beta_at(double t, const NuBetaRamp& ramp);

}  // namespace formation
