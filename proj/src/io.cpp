#include "cfc/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "cfc/error.hpp"

namespace cfc {

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(9);
  return out;
}

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

nlohmann::json to_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace

void TrajectoryTable::validate() const {
  if (q.size() != u.size() || q.size() != solve_seconds.size()) {
    throw DimensionMismatch("trajectory table columns have different lengths");
  }
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k].size() != static_cast<Eigen::Index>(q_names.size()) ||
        u[k].size() != static_cast<Eigen::Index>(u_names.size())) {
      throw DimensionMismatch("trajectory row " + std::to_string(k) + " does not match the header");
    }
  }
}

TrajectoryTable make_table(const SystemLayout& layout, double h, const Trajectory& traj) {
  TrajectoryTable t;
  t.h = h;
  t.q_names = layout.q_names();
  t.u_names = layout.u_names();
  for (std::size_t k = 0; k < traj.u.size(); ++k) {
    t.q.push_back(traj.q[k + 1]);
    t.u.push_back(traj.u[k]);
    t.solve_seconds.push_back(traj.step_seconds[k]);
  }
  return t;
}

TrajectoryTable make_table(const SystemLayout& layout, double h, const TrialRecord& record) {
  TrajectoryTable t;
  t.h = h;
  t.q_names = layout.q_names();
  t.u_names = layout.u_names();
  for (const TrialStep& s : record.steps) {
    t.q.push_back(s.q);
    t.u.push_back(s.u);
    t.solve_seconds.push_back(s.solve_seconds);
  }
  return t;
}

void emit_trajectory(const TrajectoryTable& table, const std::string& path) {
  table.validate();
  std::ofstream out = open_for_write(path);
  out << "step,time_s";
  for (const std::string& n : table.q_names) out << ',' << n;
  for (const std::string& n : table.u_names) out << ',' << n;
  out << ",solve_ms\n";
  for (std::size_t k = 0; k < table.q.size(); ++k) {
    out << k << ',' << static_cast<double>(k + 1) * table.h;
    for (double x : table.q[k]) out << ',' << x;
    for (double x : table.u[k]) out << ',' << x;
    out << ',' << table.solve_seconds[k] * 1e3 << '\n';
  }
  if (!out) throw IoError("failed while writing " + path);
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  CsvData data;
  std::string line;
  if (!std::getline(in, line)) return data;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) data.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != data.header.size()) throw IoError(path + ": row width differs from header");
    data.rows.push_back(std::move(row));
  }
  return data;
}

MetricsSummary summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw InvalidArgument("metrics need at least one trial");
  MetricsSummary m;
  m.trials = static_cast<int>(records.size());
  std::vector<double> pos, quat, ang;
  int ok = 0;
  double solve = 0.0;
  for (const TrialRecord& r : records) {
    ok += r.success() ? 1 : 0;
    if (!r.success()) m.failed_seeds.push_back(r.seed);
    pos.push_back(r.final_position_error);
    quat.push_back(r.final_quat_error);
    ang.push_back(degrees(r.final_angle_error));
    solve += r.mean_solve_seconds();
  }
  m.success_rate = static_cast<double>(ok) / m.trials;
  m.position_error = stat_of(pos);
  m.quaternion_error = stat_of(quat);
  m.angle_error_deg = stat_of(ang);
  m.mean_solve_ms = 1e3 * solve / m.trials;
  return m;
}

void emit_metrics(const std::vector<TrialRecord>& records, const std::string& path) {
  const MetricsSummary m = summarize(records);
  nlohmann::json doc;
  doc["trials"] = nlohmann::json::array();
  for (const TrialRecord& r : records) {
    nlohmann::json t;
    t["seed"] = r.seed;
    t["success"] = r.success();
    t["success_step"] = r.success_step ? nlohmann::json(*r.success_step) : nlohmann::json(nullptr);
    t["steps"] = r.steps.size();
    t["final_position_error"] = r.final_position_error;
    t["final_quaternion_error"] = r.final_quat_error;
    t["final_angle_error_deg"] = degrees(r.final_angle_error);
    t["mpc_solving_time_ms"] = 1e3 * r.mean_solve_seconds();
    doc["trials"].push_back(t);
  }
  doc["success_rate"] = m.success_rate;
  doc["final_position_error"] = to_json(m.position_error);
  doc["final_quaternion_error"] = to_json(m.quaternion_error);
  doc["final_angle_error_deg"] = to_json(m.angle_error_deg);
  doc["mpc_solving_time_ms"] = m.mean_solve_ms;
  doc["failed_seeds"] = m.failed_seeds;

  std::ofstream out = open_for_write(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace cfc
