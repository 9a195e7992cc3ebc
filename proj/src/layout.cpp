#include "cfc/layout.hpp"

#include <utility>

#include "cfc/error.hpp"

namespace cfc {

Shape Shape::sphere(double r) {
  if (!(r > 0.0)) throw InvalidArgument("sphere radius must be positive");
  Shape s;
  s.kind = ShapeKind::kSphere;
  s.radius = r;
  return s;
}

Shape Shape::box(const Vector3d& half_extents) {
  if (!(half_extents.array() > 0.0).all()) {
    throw InvalidArgument("box half-extents must be positive");
  }
  Shape s;
  s.kind = ShapeKind::kBox;
  s.half_extents = half_extents;
  return s;
}

const char* shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kPlane: return "plane";
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kBox: return "box";
  }
  return "unknown";
}

SystemLayout::SystemLayout(std::vector<Body> bodies) : bodies_(std::move(bodies)) {
  for (const Body& b : bodies_) {
    q_offsets_.push_back(nq_);
    v_offsets_.push_back(nv_);
    if (b.actuated) {
      for (int k = 0; k < v_size(b.joint); ++k) actuated_dofs_.push_back(nv_ + k);
    }
    nq_ += q_size(b.joint);
    nv_ += v_size(b.joint);
  }
}

const Body& SystemLayout::body(int id) const {
  if (id < 0 || id >= num_bodies()) {
    throw UnknownBody("unknown body id " + std::to_string(id));
  }
  return bodies_[id];
}

int SystemLayout::q_size(Joint j) {
  switch (j) {
    case Joint::kFree: return 7;
    case Joint::kTranslation: return 3;
    case Joint::kPrismatic: return 1;
    case Joint::kFixed: return 0;
  }
  return 0;
}

int SystemLayout::v_size(Joint j) {
  switch (j) {
    case Joint::kFree: return 6;
    case Joint::kTranslation: return 3;
    case Joint::kPrismatic: return 1;
    case Joint::kFixed: return 0;
  }
  return 0;
}

Posed SystemLayout::pose(int id, const VectorXd& q) const {
  const Body& b = body(id);
  const int o = q_offsets_[id];
  Posed p = b.reference;
  switch (b.joint) {
    case Joint::kFree:
      p.position = q.segment<3>(o);
      p.orientation = Eigen::Quaterniond(q(o + 3), q(o + 4), q(o + 5), q(o + 6));
      break;
    case Joint::kTranslation:
      p.position = q.segment<3>(o);
      break;
    case Joint::kPrismatic:
      p.position = b.reference.position + q(o) * b.axis;
      break;
    case Joint::kFixed:
      break;
  }
  return p;
}

void SystemLayout::set_pose(int id, const Posed& pose, VectorXd& q) const {
  const Body& b = body(id);
  const int o = q_offsets_[id];
  switch (b.joint) {
    case Joint::kFree:
      q.segment<3>(o) = pose.position;
      q.segment<4>(o + 3) = wxyz(pose.orientation);
      break;
    case Joint::kTranslation:
      q.segment<3>(o) = pose.position;
      break;
    case Joint::kPrismatic:
      q(o) = b.axis.dot(pose.position - b.reference.position);
      break;
    case Joint::kFixed:
      throw InvalidArgument("cannot set the pose of fixed body " + b.name);
  }
}

VectorXd SystemLayout::reference_q() const {
  VectorXd q = VectorXd::Zero(nq_);
  for (int id = 0; id < num_bodies(); ++id) {
    const Body& b = bodies_[id];
    if (b.joint == Joint::kFree || b.joint == Joint::kTranslation) set_pose(id, b.reference, q);
  }
  return q;
}

std::vector<std::string> SystemLayout::q_names() const {
  std::vector<std::string> names;
  for (const Body& b : bodies_) {
    switch (b.joint) {
      case Joint::kFree:
        for (const char* s : {"x", "y", "z", "qw", "qx", "qy", "qz"}) names.push_back(b.name + "." + s);
        break;
      case Joint::kTranslation:
        for (const char* s : {"x", "y", "z"}) names.push_back(b.name + "." + s);
        break;
      case Joint::kPrismatic:
        names.push_back(b.name + ".s");
        break;
      case Joint::kFixed:
        break;
    }
  }
  return names;
}

std::vector<std::string> SystemLayout::u_names() const {
  std::vector<std::string> names;
  for (const Body& b : bodies_) {
    if (!b.actuated) continue;
    switch (b.joint) {
      case Joint::kTranslation:
        for (const char* s : {"ux", "uy", "uz"}) names.push_back(b.name + "." + s);
        break;
      case Joint::kPrismatic:
        names.push_back(b.name + ".us");
        break;
      case Joint::kFree:
        for (const char* s : {"ux", "uy", "uz", "uwx", "uwy", "uwz"}) names.push_back(b.name + "." + s);
        break;
      case Joint::kFixed:
        break;
    }
  }
  return names;
}

VectorXd integrate(const SystemLayout& layout, const VectorXd& q, const VectorXd& v, double h) {
  if (q.size() != layout.nq() || v.size() != layout.nv()) {
    throw DimensionMismatch("integrate: q/v size does not match the layout");
  }
  VectorXd out = q;
  for (int id = 0; id < layout.num_bodies(); ++id) {
    const Body& b = layout.body(id);
    const int qo = layout.q_offset(id);
    const int vo = layout.v_offset(id);
    switch (b.joint) {
      case Joint::kFree: {
        Posed p{q.segment<3>(qo), Eigen::Quaterniond(q(qo + 3), q(qo + 4), q(qo + 5), q(qo + 6))};
        const Posed next = integrate_pose<double>(p, v.segment<3>(vo), v.segment<3>(vo + 3), h);
        out.segment<3>(qo) = next.position;
        out.segment<4>(qo + 3) = wxyz(next.orientation);
        break;
      }
      case Joint::kTranslation:
        out.segment<3>(qo) += h * v.segment<3>(vo);
        break;
      case Joint::kPrismatic:
        out(qo) += h * v(vo);
        break;
      case Joint::kFixed:
        break;
    }
  }
  return out;
}

}  // namespace cfc
