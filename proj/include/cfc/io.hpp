#pragma once

// Trajectory CSV and trial-metrics JSON writers.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "cfc/layout.hpp"
#include "cfc/scenarios.hpp"

namespace cfc {

/// Rows of one trajectory file. Row k holds the state after step k, the
/// control applied during it and its solve time.
struct TrajectoryTable {
  double h = 0.0;
  std::vector<std::string> q_names;
  std::vector<std::string> u_names;
  std::vector<VectorXd> q;
  std::vector<VectorXd> u;
  std::vector<double> solve_seconds;

  void validate() const;
};

TrajectoryTable make_table(const SystemLayout& layout, double h, const Trajectory& traj);
TrajectoryTable make_table(const SystemLayout& layout, double h, const TrialRecord& record);

/// Header `step,time_s,<q names>,<u names>,solve_ms`, values with 9 significant digits.
void emit_trajectory(const TrajectoryTable& table, const std::string& path);

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvData read_csv(const std::string& path);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct MetricsSummary {
  int trials = 0;
  double success_rate = 0.0;
  Stat position_error;
  Stat quaternion_error;
  Stat angle_error_deg;
  double mean_solve_ms = 0.0;
  std::vector<std::uint64_t> failed_seeds;
};

MetricsSummary summarize(const std::vector<TrialRecord>& records);

/// JSON with one entry per trial plus the aggregates of summarize().
void emit_metrics(const std::vector<TrialRecord>& records, const std::string& path);

}  // namespace cfc
