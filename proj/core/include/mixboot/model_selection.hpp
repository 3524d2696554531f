#pragma once

#include "mixboot/types.hpp"

#include <vector>

namespace mixboot {

struct SelectionConfig {
  Index g_min = 1;
  Index g_max = 9;
  std::vector<CovarianceFamily> families{kAllFamilies.begin(), kAllFamilies.end()};
  EmConfig em;
};

struct CandidateScore {
  Index G = 0;
  CovarianceFamily family = CovarianceFamily::FullVarying;
  FitStatus status = FitStatus::Degenerate;
  double loglik = 0.0;
  double bic = 0.0;
};

struct ModelSelection {
  FitResult best;
  /// Every (G, family) pair tried, in the order they were fitted.
  std::vector<CandidateScore> candidates;
};

/// Fits every (G, family) pair from a Ward initialisation and keeps the
/// largest BIC. Throws NoModelFits when every candidate degenerates.
ModelSelection select_model(const DataMatrix& data, const SelectionConfig& config = {});

}  // namespace mixboot
