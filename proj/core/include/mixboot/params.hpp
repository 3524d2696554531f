#pragma once

#include "mixboot/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mixboot {

enum class ParamKind { Tau, Mu, Sigma };

std::string_view to_string(ParamKind kind) noexcept;

/// One free model parameter. Indices are 0-based; `component` is -1 for a
/// covariance shared by every component, and row/col are -1 where unused.
struct SlotInfo {
  ParamKind kind = ParamKind::Tau;
  Index component = -1;
  Index row = -1;
  Index col = -1;
  std::string name;
};

/// Slot order: G weights, then G*p means (component-major), then the
/// family's covariance entries (upper triangle, row-major, per component for
/// VVV, once for EEE; one variance per component for VII, one for EII).
///
/// Names are 1-based: tau[g], mu[g][j], sigma[g][j,k] (VVV), sigma[j,k]
/// (EEE), sigma[g] (VII), sigma (EII).
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(Index G, Index p, CovarianceFamily family);

  Index G() const noexcept { return G_; }
  Index p() const noexcept { return p_; }
  CovarianceFamily family() const noexcept { return family_; }
  Index size() const noexcept { return static_cast<Index>(slots_.size()); }

  const SlotInfo& slot(Index i) const { return slots_.at(static_cast<std::size_t>(i)); }
  const std::vector<SlotInfo>& slots() const noexcept { return slots_; }

  std::optional<Index> find(std::string_view name) const;
  /// Like find, but throws UnknownSlot.
  Index index_of(std::string_view name) const;
  std::vector<Index> slots_of(ParamKind kind) const;

  bool operator==(const ParamLayout& other) const noexcept {
    return G_ == other.G_ && p_ == other.p_ && family_ == other.family_;
  }

 private:
  Index G_ = 0;
  Index p_ = 0;
  CovarianceFamily family_ = CovarianceFamily::FullVarying;
  std::vector<SlotInfo> slots_;
};

struct ParamVector {
  ParamLayout layout;
  Vector values;
};

ParamLayout layout_of(const MixtureModel& model);
ParamVector flatten(const MixtureModel& model);
MixtureModel unflatten(const ParamVector& params);

}  // namespace mixboot
