#include "mixboot/model_selection.hpp"

#include "mixboot/em.hpp"
#include "mixboot/error.hpp"
#include "mixboot/hclust.hpp"

#include <optional>

namespace mixboot {

ModelSelection select_model(const DataMatrix& data, const SelectionConfig& config) {
  if (config.g_min < 1 || config.g_max < config.g_min)
    throw Error(ErrorCode::InvalidArgument, "empty component-count range");
  if (config.families.empty())
    throw Error(ErrorCode::InvalidArgument, "no covariance families requested");

  const WardDendrogram tree(data.values());
  ModelSelection out;
  std::optional<FitResult> best;
  for (Index G = config.g_min; G <= config.g_max && G <= data.n(); ++G) {
    const ResponsibilityMatrix init = ward_initialization(tree, G);
    for (const auto family : config.families) {
      FitResult fit = em_fit(data, init, family, config.em);
      out.candidates.push_back({G, family, fit.status, fit.loglik, fit.bic});
      if (!fit.ok()) continue;
      // Strict comparison keeps the earliest (simplest) candidate on ties.
      if (!best || fit.bic > best->bic) best = std::move(fit);
    }
  }
  if (!best) throw Error(ErrorCode::NoModelFits, "no candidate mixture could be fitted");
  out.best = std::move(*best);
  return out;
}

}  // namespace mixboot
