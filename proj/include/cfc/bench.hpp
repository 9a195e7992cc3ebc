#pragma once

// One-step timing of the steppers on a shared sequence of recorded states.

#include <optional>
#include <string>
#include <vector>

#include "cfc/scenarios.hpp"

namespace cfc {

struct StepperTiming {
  StepperKind stepper = StepperKind::kCf;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
  int samples = 0;
};

struct BenchReport {
  std::string scene;
  int n_cube = 0;
  int steps = 0;
  int repetitions = 0;
  std::vector<int> contacts;  // per recorded state
  std::vector<StepperTiming> timings;
  /// Mean qp time over mean cf time; set only when both were requested.
  std::optional<double> cf_qp_ratio;
};

/// Records `steps` reference states with the qp stepper, then times
/// each stepper's solve from every recorded state. Contact detection and
/// system assembly are done once per state and excluded from the timing.
BenchReport bench(const Scene& scene, const std::vector<StepperKind>& steppers, int steps, int repetitions,
                  int n_cube = 0);

void emit_bench(const BenchReport& report, const std::string& path);

}  // namespace cfc
