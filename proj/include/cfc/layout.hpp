#pragma once

// Body descriptions and the map between bodies and the generalized
// coordinate vectors q (positions) and v (velocities).
//
// Per-joint coordinate blocks:
//   free        q: position(3) + quaternion w,x,y,z (4)   v: linear(3) + angular(3), world frame
//   translation q: position(3)                             v: linear(3)
//   prismatic   q: displacement along axis (1)             v: rate along axis (1)
//   fixed       no coordinates

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "cfc/se3.hpp"

namespace cfc {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

enum class Joint { kFixed, kFree, kTranslation, kPrismatic };

enum class ShapeKind { kPlane, kSphere, kBox };

/// Primitive shape in its body frame. A plane is the half-space below the
/// local xy-plane (outward normal +z of the local frame).
struct Shape {
  ShapeKind kind = ShapeKind::kSphere;
  double radius = 0.0;
  Vector3d half_extents = Vector3d::Zero();
  Posed local;

  static Shape plane() { return Shape{ShapeKind::kPlane, 0.0, Vector3d::Zero(), {}}; }
  static Shape sphere(double r);
  static Shape box(const Vector3d& half_extents);
};

const char* shape_name(ShapeKind kind);

struct Body {
  std::string name;
  Joint joint = Joint::kFixed;
  Shape shape;
  /// Reference pose. For prismatic and translation joints the orientation is
  /// held; the prismatic displacement is measured from the reference position.
  Posed reference;
  Vector3d axis = Vector3d::UnitX();  // prismatic only
  double mass = 0.0;
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();  // body frame
  bool actuated = false;
};

class SystemLayout {
 public:
  SystemLayout() = default;
  explicit SystemLayout(std::vector<Body> bodies);

  const std::vector<Body>& bodies() const { return bodies_; }
  const Body& body(int id) const;
  int num_bodies() const { return static_cast<int>(bodies_.size()); }

  int nq() const { return nq_; }
  int nv() const { return nv_; }
  /// Number of actuated velocity coordinates (the control dimension).
  int nu() const { return static_cast<int>(actuated_dofs_.size()); }

  int q_offset(int id) const { return q_offsets_.at(id); }
  int v_offset(int id) const { return v_offsets_.at(id); }
  static int q_size(Joint j);
  static int v_size(Joint j);
  bool has_dofs(int id) const { return v_size(body(id).joint) > 0; }

  /// Velocity indices driven by the control vector, in control order.
  const std::vector<int>& actuated_dofs() const { return actuated_dofs_; }

  /// World pose of a body's frame at configuration q.
  Posed pose(int id, const VectorXd& q) const;
  /// Writes a world pose into q for a free or translation body.
  void set_pose(int id, const Posed& pose, VectorXd& q) const;

  /// q at every body's reference pose.
  VectorXd reference_q() const;

  /// Coordinate names for CSV headers.
  std::vector<std::string> q_names() const;
  std::vector<std::string> u_names() const;

 private:
  std::vector<Body> bodies_;
  std::vector<int> q_offsets_;
  std::vector<int> v_offsets_;
  std::vector<int> actuated_dofs_;
  int nq_ = 0;
  int nv_ = 0;
};

/// q+ = q (+) h v: positions advance additively, quaternions through the
/// exponential map of the world-frame angular velocity.
VectorXd integrate(const SystemLayout& layout, const VectorXd& q, const VectorXd& v, double h);

}  // namespace cfc
