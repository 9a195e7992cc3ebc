#pragma once

// Property suites run by `validate`: each reports its worst residual over a
// fixed-seed batch of random instances against a stated tolerance.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cfc/contact.hpp"
#include "cfc/mpc.hpp"
#include "cfc/steppers.hpp"

namespace cfc {

struct PropertyResult {
  std::string name;
  int instances = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<PropertyResult> properties;

  bool passed() const;
};

using CfStepper = std::function<StepResult(const LinearizedSystem&, const ContactSystem&, const CfParams&)>;

struct ValidationOptions {
  std::uint64_t seed = 20240611;
  int dual_exactness_instances = 1000;
  int complementarity_instances = 10000;
  int cone_instances = 10000;
  int qp_instances = 100;
  int gradient_instances = 100;
  int softplus_instances = 100;
  /// Closed-form stepper under test; replaced in sensitivity checks.
  CfStepper cf_stepper = [](const LinearizedSystem& s, const ContactSystem& c, const CfParams& p) {
    return cf_step(s, c, p);
  };
};

struct ContactInstance {
  LinearizedSystem sys;
  ContactSystem cs;
};

/// Random SPD Q, b and `contacts` random contacts with n_d tangent
/// directions, random point Jacobians, gaps and friction; frames filled.
ContactInstance random_contact_instance(std::mt19937_64& rng, int nv, int contacts, int n_d);

/// One contact with one stacked row.
ContactInstance random_single_row_instance(std::mt19937_64& rng);

struct FingertipProblem {
  ManipulationSystem sys;
  VectorXd q0;
  ContactSystem frozen;
  TaskSpec task;
  MpcConfig cfg;
  VectorXd u;
};

/// Fingertips scattered around a resting cube, contacts frozen at q0, random
/// task and controls inside the bounds.
FingertipProblem random_fingertip_problem(std::mt19937_64& rng);

PropertyResult check_dual_exactness(const ValidationOptions& opts);
PropertyResult check_complementarity(const ValidationOptions& opts);
PropertyResult check_coulomb_cone(const ValidationOptions& opts);
PropertyResult check_qp_against_lcp(const ValidationOptions& opts);
PropertyResult check_qp_kkt(const ValidationOptions& opts);
PropertyResult check_dual_recovery(const ValidationOptions& opts);
PropertyResult check_gradient(const ValidationOptions& opts);
PropertyResult check_softplus_convergence(const ValidationOptions& opts);

ValidationReport run_validation(const ValidationOptions& opts = {});

std::string format_report(const ValidationReport& report);

}  // namespace cfc
