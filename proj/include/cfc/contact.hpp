#pragma once

// Contact Jacobians, the stacked dual-cone system and the (Q, b) pair that
// defines the unconstrained motion of one time step.
//
// Every stepper works on
//   min_v  1/2 h^2 v'Qv - h v'b   s.t.  h * Jt v + phit >= 0,
// where row (i, j) of Jt is Jn_i - mu_i * Jd_ij and phit repeats phi_i once
// per tangent direction (rows are contact-major).

#include <Eigen/Dense>

#include <vector>

#include "cfc/collision.hpp"
#include "cfc/layout.hpp"

namespace cfc {

using RowVectorXd = Eigen::RowVectorXd;

struct ContactJacobianBlock {
  RowVectorXd jn;  // 1 x nv, positive when the bodies separate
  MatrixXd jd;     // n_d x nv, sliding of a relative to b along each tangent
};

/// Normal, tangents and friction of one contact, kept for force decomposition.
struct ContactFrame {
  Vector3d normal = Vector3d::UnitZ();
  std::vector<Vector3d> tangent_dirs;
  double mu = 0.0;
};

struct ContactSystem {
  MatrixXd j_tilde;   // (n_c * n_d) x nv
  VectorXd phi_tilde;  // n_c * n_d
  std::vector<int> row_contact;  // contact index of each row
  std::vector<ContactFrame> frames;  // empty when stacked from raw blocks

  int rows() const { return static_cast<int>(j_tilde.rows()); }
  int num_contacts() const;
  bool empty() const { return rows() == 0; }
};

struct LinearizedSystem {
  MatrixXd q_mat;
  VectorXd b_vec;
  double h = 0.0;

  int dim() const { return static_cast<int>(b_vec.size()); }
};

struct QuasiDynamicParams {
  /// Diagonal of eps * M_o / h^2 for one free object; applied to every
  /// unactuated body (leading entries for bodies with fewer dofs).
  VectorXd object_q_diag;
  /// Diagonal of K_r, one entry per actuated dof.
  VectorXd k_r;
  double h = 0.1;
  /// Non-contact generalized force over all nv velocity coordinates (the
  /// stacked tau_o and tau_r).
  VectorXd tau;
};

struct DynamicParams {
  double h = 0.002;
  Vector3d gravity = Vector3d(0.0, 0.0, -9.81);
  /// Extra generalized force over all nv coordinates; empty means zero.
  VectorXd external;
};

ContactJacobianBlock contact_jacobian(const ContactPoint& contact, const VectorXd& q,
                                      const SystemLayout& layout);

ContactSystem stack_contact_system(const std::vector<ContactJacobianBlock>& blocks,
                                   const VectorXd& phi, const VectorXd& mu);

/// Jacobians and stacking for detected contacts; fills the contact frames.
ContactSystem build_contact_system(const std::vector<ContactPoint>& contacts, const VectorXd& q,
                                   const SystemLayout& layout);

LinearizedSystem assemble_quasi_dynamic(const SystemLayout& layout, const VectorXd& q,
                                        const VectorXd& u, const QuasiDynamicParams& p);

/// Block-diagonal mass matrix with world-frame rotational inertia.
MatrixXd mass_matrix(const SystemLayout& layout, const VectorXd& q);

/// Gravity, external and gyroscopic generalized forces.
VectorXd generalized_forces(const SystemLayout& layout, const VectorXd& q, const VectorXd& v,
                            const DynamicParams& p);

LinearizedSystem assemble_full_dynamic(const SystemLayout& layout, const VectorXd& q,
                                       const VectorXd& v, const DynamicParams& p);

}  // namespace cfc
