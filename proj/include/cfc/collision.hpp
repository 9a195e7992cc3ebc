#pragma once

#include <Eigen/Dense>

#include <vector>

#include "cfc/layout.hpp"

namespace cfc {

struct GeometryConfig {
  int n_d = 4;                  // tangent directions per contact, even
  double contact_margin = 0.01;  // [m]; contacts with a larger gap are dropped
  int max_contacts_per_pair = 4;

  void validate() const;
};

/// One contact between bodies a and b. The normal points from b into a, so a
/// positive gap means separation; negative gaps are penetrations.
struct ContactPoint {
  int body_a = -1;
  int body_b = -1;
  Vector3d witness_point = Vector3d::Zero();
  Vector3d normal = Vector3d::UnitZ();
  double phi = 0.0;
  std::vector<Vector3d> tangent_dirs;
  double friction_mu = 0.0;
};

/// Shape placed in the world for one narrow-phase query.
struct PlacedShape {
  int body_id = -1;
  Shape shape;
  Posed body_pose;
  bool movable = true;

  Posed world_pose() const;
};

struct FrictionTable {
  double default_mu = 0.5;
  struct Entry {
    int body_a;
    int body_b;
    double mu;
  };
  std::vector<Entry> overrides;

  double lookup(int a, int b) const;
};

struct SceneSnapshot {
  std::vector<PlacedShape> shapes;
  FrictionTable friction;
};

/// Builds the snapshot for configuration q (one shape per body).
SceneSnapshot make_snapshot(const SystemLayout& layout, const VectorXd& q,
                            const FrictionTable& friction);

/// n_d unit tangents: the first is normalize(normal x e) with e the basis axis
/// least aligned with the normal; the rest follow at 2*pi/n_d increments, and
/// direction k + n_d/2 is exactly the negation of direction k.
std::vector<Vector3d> tangent_basis(const Vector3d& normal, int n_d);

/// Signed distance from a point (box frame) to a box, with the outward unit
/// gradient in the box frame.
double box_sdf(const Vector3d& half_extents, const Vector3d& p, Vector3d* gradient);

/// Narrow phase for one pair. Contacts carry body ids of a and b but no
/// friction coefficient.
std::vector<ContactPoint> detect_pair(const PlacedShape& a, const PlacedShape& b,
                                      const GeometryConfig& cfg);

/// All contacts in the snapshot, ordered by (body_b, body_a) and then by
/// witness point. Each pair is reported with the higher body id as `a`.
/// Pairs where neither body can move are skipped.
std::vector<ContactPoint> detect_contacts(const SceneSnapshot& scene, const GeometryConfig& cfg);

}  // namespace cfc
