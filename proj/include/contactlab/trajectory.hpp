#pragma once

#include <string>
#include <vector>

#include "contactlab/types.hpp"

namespace contactlab {

struct TrajectorySample {
  double t = 0.0;
  TangentState state;
};

struct ChartTransitionEvent {
  double t = 0.0;
  int from_chart = 0;
  int to_chart = 0;
  std::size_t sample_index = 0;  // first sample expressed in to_chart
};

/// Time-sampled flow line. Times are strictly increasing; consecutive samples
/// share a chart unless separated by a logged transition.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<ChartTransitionEvent> transitions;
  std::string scheme = "rk4";
  double dt = 0.0;
  double energy_start = std::numeric_limits<double>::quiet_NaN();
  double energy_end = std::numeric_limits<double>::quiet_NaN();
  double max_energy_drift = 0.0;  // relative, over all samples
  bool drift_flagged = false;

  double duration() const {
    return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
  }
};

}  // namespace contactlab
