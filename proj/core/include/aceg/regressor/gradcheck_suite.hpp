#pragma once

#include <vector>

#include "aceg/autodiff/gradcheck.hpp"

namespace aceg::reg {

/// Finite-difference checks of the loss ops and of laplace_nll_3d o regress
/// with respect to both the weights and the map code, at 64-bit.
std::vector<ad::GradCheckResult> run_regressor_gradchecks(const ad::GradCheckOptions& opts = {});

}  // namespace aceg::reg
