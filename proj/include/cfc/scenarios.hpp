#pragma once

// Scene presets, task samplers, simulation loops and trial metrics.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfc/collision.hpp"
#include "cfc/contact.hpp"
#include "cfc/layout.hpp"
#include "cfc/mpc.hpp"
#include "cfc/steppers.hpp"

namespace cfc {

enum class StepperKind { kCf, kCfExtended, kQp };
enum class Dynamics { kQuasiDynamic, kFullDynamic };

StepperKind parse_stepper(const std::string& name);
const char* stepper_name(StepperKind kind);

struct Scene {
  std::string name;
  SystemLayout layout;
  FrictionTable friction;
  GeometryConfig geometry;
  Dynamics dynamics = Dynamics::kFullDynamic;
  double h = 0.002;
  Vector3d gravity = Vector3d(0.0, 0.0, -9.81);

  VectorXd q0;
  VectorXd v0;
  /// Constant control applied by run_simulation (size nu).
  VectorXd u0;
  /// Quasi-dynamic data (object_q_diag, k_r, tau); h mirrors Scene::h.
  QuasiDynamicParams quasi;
  /// Extra generalized force for full-dynamic scenes (size nv or empty).
  VectorXd external;

  /// Contact stiffness K = k * I and damping D = d * I for the closed-form steppers.
  double k = 1.0;
  double d = 0.0;
  /// When set, row i uses K_ii = k / (J Q^-1 J')_ii instead of k.
  bool scaled_stiffness = false;
  /// Steps run from rest before v0 is applied (0 = start moving immediately).
  int settle_steps = 0;

  int object = -1;
  std::vector<int> fingertips;

  ManipulationSystem manipulation() const;
};

struct SceneParams {
  int n_cube = 10;
  double drive_force = 1.0;
  std::optional<double> k;
  std::optional<double> d;
  std::optional<double> mu;
};

/// Presets: push_boxes, sphere_two_planes, sliding_cube, falling_cube,
/// fingertips_box. Only push_boxes uses the seed (random cube layout).
Scene build_scene(const std::string& name, const SceneParams& params = {}, std::uint64_t seed = 0);

std::vector<std::string> scene_names();

enum class TaskKind { kRotation, kFlipping, kInAir, kTrifingerLike };

TaskKind parse_task_kind(const std::string& name);
const char* task_kind_name(TaskKind kind);

struct TaskSample {
  Posed initial;
  TaskSpec task;
};

/// Initial object pose resting at height `rest_height` and a target pose.
TaskSample sample_task(TaskKind kind, std::uint64_t seed, double rest_height = 0.03);

struct Trajectory {
  std::vector<VectorXd> q;  // steps + 1 entries
  std::vector<VectorXd> v;  // steps + 1 entries
  std::vector<VectorXd> u;  // one per step
  std::vector<double> step_seconds;
  std::vector<int> contacts;
  /// Object reference height after settling (NaN without an object).
  double rest_height = 0.0;
};

/// Hard-max stiffness for the scene's closed-form steppers at one state.
CfParams scene_cf_params(const Scene& scene, const LinearizedSystem& sys, const ContactSystem& cs);

/// One engine step; returns the next velocity and fills q_next.
StepResult engine_step(const Scene& scene, StepperKind stepper, const VectorXd& q, const VectorXd& v,
                       const VectorXd& u, VectorXd& q_next, int* num_contacts = nullptr);

/// Advances the scene. With settle_steps > 0 the scene first runs from rest,
/// then v0 is imposed and the recorded trajectory starts there.
Trajectory run_simulation(const Scene& scene, StepperKind stepper, int steps);

struct TrialStep {
  VectorXd q;  // state after the step
  VectorXd u;
  double solve_seconds = 0.0;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  Posed initial;
  TaskSpec task;
  VectorXd q0;
  std::vector<TrialStep> steps;
  std::optional<int> success_step;
  double final_position_error = 0.0;
  double final_quat_error = 0.0;
  double final_angle_error = 0.0;  // radians
  bool stalled_any = false;

  bool success() const { return success_step.has_value(); }
  double mean_solve_seconds() const;
};

/// Closed loop of mpc_policy_step and the hard-max engine until the success
/// window is met or cfg.rollout_cap steps have run.
TrialRecord run_mpc_trial(const Scene& scene, const TaskSample& sample, const MpcConfig& cfg,
                          std::uint64_t seed);

/// Places the fingertips on a circle around the object pose.
VectorXd fingertip_start(const Scene& scene, const Posed& object, double radius = 0.08);

}  // namespace cfc
