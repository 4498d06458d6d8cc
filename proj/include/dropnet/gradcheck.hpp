#pragma once

#include <string>
#include <vector>

#include "dropnet/model.hpp"

namespace dropnet {

struct GradcheckGroup {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckGroup> groups;  // one per parameter tensor
  double worst = 0.0;
  double tolerance = 1e-4;

  bool passed() const { return worst < tolerance; }
};

// Compares tape gradients of the full model loss (mean cross-entropy over a
// small two-example batch plus an L2 term) against central finite
// differences, parameter element by parameter element. The check runs twice:
// once in eval mode and once in train mode with the dropout stream reseeded
// before every loss evaluation, which freezes the masks. The reported error
// per element is |analytic - numeric| / max(|analytic|, |numeric|, 1e-4).
GradcheckReport gradcheck_small_model();

}  // namespace dropnet
