#pragma once

#include "trocar/kinematics.hpp"
#include "trocar/task_model.hpp"

#include <array>
#include <cstdint>

namespace trocar {

struct SelfCheckReport {
  int configurations = 0;
  // max over configurations of |analytic - fd| / max(1, |analytic|)
  double jacobian_error = 0.0;
  std::array<double, kNumTerms> gradient_error{};
  double jacobian_tolerance = 1e-6;
  double gradient_tolerance = 1e-5;

  bool passed() const;
};

// Compares the linear Jacobian and every cost gradient with central
// differences (h = 1e-6) at random configurations inside the limits, with
// randomized task parameters around the reachable workspace.
SelfCheckReport runSelfCheck(const KinematicChain& chain, const JointLimits& limits, int configurations = 100,
                             std::uint64_t seed = 7);

}  // namespace trocar
