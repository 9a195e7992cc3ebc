#include "cfc/contact.hpp"

#include <string>

#include "cfc/error.hpp"

namespace cfc {

int ContactSystem::num_contacts() const {
  return row_contact.empty() ? 0 : row_contact.back() + 1;
}

namespace {

// Adds sign * (velocity of the material point `point` of body id) to `out`,
// a 3 x nv Jacobian.
void add_point_jacobian(const SystemLayout& layout, int id, const VectorXd& q,
                        const Vector3d& point, double sign, Eigen::Matrix<double, 3, Eigen::Dynamic>& out) {
  const Body& b = layout.body(id);
  const int o = layout.v_offset(id);
  switch (b.joint) {
    case Joint::kFree: {
      const Vector3d r = point - layout.pose(id, q).position;
      out.block<3, 3>(0, o) += sign * Eigen::Matrix3d::Identity();
      out.block<3, 3>(0, o + 3) -= sign * skew<double>(r);
      break;
    }
    case Joint::kTranslation:
      out.block<3, 3>(0, o) += sign * Eigen::Matrix3d::Identity();
      break;
    case Joint::kPrismatic:
      out.col(o) += sign * b.axis;
      break;
    case Joint::kFixed:
      break;
  }
}

}  // namespace

ContactJacobianBlock contact_jacobian(const ContactPoint& contact, const VectorXd& q,
                                      const SystemLayout& layout) {
  if (contact.body_a < 0 || contact.body_a >= layout.num_bodies() || contact.body_b < 0 ||
      contact.body_b >= layout.num_bodies()) {
    throw UnknownBody("contact references unknown body (" + std::to_string(contact.body_a) + ", " +
                      std::to_string(contact.body_b) + ")");
  }
  Eigen::Matrix<double, 3, Eigen::Dynamic> rel =
      Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, layout.nv());
  add_point_jacobian(layout, contact.body_a, q, contact.witness_point, 1.0, rel);
  add_point_jacobian(layout, contact.body_b, q, contact.witness_point, -1.0, rel);

  ContactJacobianBlock block;
  block.jn = contact.normal.transpose() * rel;
  block.jd.resize(static_cast<int>(contact.tangent_dirs.size()), layout.nv());
  for (int j = 0; j < block.jd.rows(); ++j) {
    block.jd.row(j) = contact.tangent_dirs[j].transpose() * rel;
  }
  return block;
}

ContactSystem stack_contact_system(const std::vector<ContactJacobianBlock>& blocks,
                                   const VectorXd& phi, const VectorXd& mu) {
  const int nc = static_cast<int>(blocks.size());
  if (phi.size() != nc || mu.size() != nc) {
    throw DimensionMismatch("stack_contact_system: phi/mu length differs from block count");
  }
  ContactSystem cs;
  if (nc == 0) {
    cs.j_tilde.resize(0, 0);
    cs.phi_tilde.resize(0);
    return cs;
  }
  const int nv = static_cast<int>(blocks.front().jn.size());
  const int nd = static_cast<int>(blocks.front().jd.rows());
  for (const ContactJacobianBlock& b : blocks) {
    if (b.jn.size() != nv || b.jd.cols() != nv || b.jd.rows() != nd) {
      throw DimensionMismatch("stack_contact_system: inconsistent block dimensions");
    }
  }
  cs.j_tilde.resize(nc * nd, nv);
  cs.phi_tilde.resize(nc * nd);
  cs.row_contact.resize(nc * nd);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nd; ++j) {
      const int row = i * nd + j;
      cs.j_tilde.row(row) = blocks[i].jn - mu(i) * blocks[i].jd.row(j);
      cs.phi_tilde(row) = phi(i);
      cs.row_contact[row] = i;
    }
  }
  return cs;
}

ContactSystem build_contact_system(const std::vector<ContactPoint>& contacts, const VectorXd& q,
                                   const SystemLayout& layout) {
  std::vector<ContactJacobianBlock> blocks;
  blocks.reserve(contacts.size());
  VectorXd phi(contacts.size());
  VectorXd mu(contacts.size());
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    blocks.push_back(contact_jacobian(contacts[i], q, layout));
    phi(i) = contacts[i].phi;
    mu(i) = contacts[i].friction_mu;
  }
  ContactSystem cs = stack_contact_system(blocks, phi, mu);
  if (contacts.empty()) cs.j_tilde.resize(0, layout.nv());
  for (const ContactPoint& c : contacts) {
    cs.frames.push_back(ContactFrame{c.normal, c.tangent_dirs, c.friction_mu});
  }
  return cs;
}

LinearizedSystem assemble_quasi_dynamic(const SystemLayout& layout, const VectorXd& q,
                                        const VectorXd& u, const QuasiDynamicParams& p) {
  if (q.size() != layout.nq()) throw DimensionMismatch("assemble_quasi_dynamic: bad q size");
  if (u.size() != layout.nu() || p.k_r.size() != layout.nu()) {
    throw DimensionMismatch("assemble_quasi_dynamic: control or k_r size differs from actuated dofs");
  }
  if (p.tau.size() != layout.nv()) throw DimensionMismatch("assemble_quasi_dynamic: bad tau size");
  if (!(p.h > 0.0)) throw InvalidArgument("assemble_quasi_dynamic: h must be positive");

  VectorXd diag(layout.nv());
  for (int id = 0; id < layout.num_bodies(); ++id) {
    const Body& b = layout.body(id);
    const int n = SystemLayout::v_size(b.joint);
    if (n == 0 || b.actuated) continue;
    if (p.object_q_diag.size() < n) throw DimensionMismatch("object_q_diag too short for body " + b.name);
    diag.segment(layout.v_offset(id), n) = p.object_q_diag.head(n);
  }
  LinearizedSystem sys;
  sys.h = p.h;
  sys.b_vec = p.tau;
  const auto& act = layout.actuated_dofs();
  for (int k = 0; k < layout.nu(); ++k) {
    diag(act[k]) = p.k_r(k);
    sys.b_vec(act[k]) += p.k_r(k) * u(k);
  }
  if (!(diag.array() > 0.0).all()) throw InvalidArgument("quasi-dynamic diagonal must be positive");
  sys.q_mat = diag.asDiagonal();
  return sys;
}

MatrixXd mass_matrix(const SystemLayout& layout, const VectorXd& q) {
  MatrixXd m = MatrixXd::Zero(layout.nv(), layout.nv());
  for (int id = 0; id < layout.num_bodies(); ++id) {
    const Body& b = layout.body(id);
    const int o = layout.v_offset(id);
    const int n = SystemLayout::v_size(b.joint);
    if (n == 0) continue;
    if (!(b.mass > 0.0)) throw NotPositiveDefinite("body " + b.name + " has non-positive mass");
    m.block(o, o, std::min(n, 3), std::min(n, 3)).diagonal().setConstant(b.mass);
    if (b.joint == Joint::kFree) {
      const Eigen::Matrix3d r = layout.pose(id, q).orientation.toRotationMatrix();
      m.block<3, 3>(o + 3, o + 3) = r * b.inertia * r.transpose();
    }
  }
  return m;
}

VectorXd generalized_forces(const SystemLayout& layout, const VectorXd& q, const VectorXd& v,
                            const DynamicParams& p) {
  VectorXd tau = VectorXd::Zero(layout.nv());
  for (int id = 0; id < layout.num_bodies(); ++id) {
    const Body& b = layout.body(id);
    const int o = layout.v_offset(id);
    switch (b.joint) {
      case Joint::kFree: {
        tau.segment<3>(o) = b.mass * p.gravity;
        const Eigen::Matrix3d r = layout.pose(id, q).orientation.toRotationMatrix();
        const Vector3d w = v.segment<3>(o + 3);
        tau.segment<3>(o + 3) = -w.cross(r * b.inertia * r.transpose() * w);
        break;
      }
      case Joint::kTranslation:
        tau.segment<3>(o) = b.mass * p.gravity;
        break;
      case Joint::kPrismatic:
        tau(o) = b.mass * b.axis.dot(p.gravity);
        break;
      case Joint::kFixed:
        break;
    }
  }
  if (p.external.size() != 0) {
    if (p.external.size() != layout.nv()) throw DimensionMismatch("external force size differs from nv");
    tau += p.external;
  }
  return tau;
}

LinearizedSystem assemble_full_dynamic(const SystemLayout& layout, const VectorXd& q,
                                       const VectorXd& v, const DynamicParams& p) {
  if (!(p.h > 0.0)) throw InvalidArgument("assemble_full_dynamic: h must be positive");
  if (q.size() != layout.nq() || v.size() != layout.nv()) {
    throw DimensionMismatch("assemble_full_dynamic: q/v size does not match the layout");
  }
  const MatrixXd m = mass_matrix(layout, q);
  if (m.llt().info() != Eigen::Success) throw NotPositiveDefinite("mass matrix is not positive definite");
  LinearizedSystem sys;
  sys.h = p.h;
  sys.q_mat = m / (p.h * p.h);
  sys.b_vec = m * v / p.h + generalized_forces(layout, q, v, p);
  return sys;
}

}  // namespace cfc
