#pragma once

#include "mixboot/types.hpp"

#include <vector>

namespace mixboot {

/// Agglomerative Ward clustering on Euclidean distances, built with the
/// nearest-neighbour-chain algorithm in O(n^2) time and memory.
class WardDendrogram {
 public:
  struct Merge {
    Index a = 0;  // representative observations of the two merged clusters
    Index b = 0;
    double height = 0.0;
  };

  explicit WardDendrogram(const Matrix& points);

  Index size() const noexcept { return n_; }
  /// Merges sorted by increasing height.
  const std::vector<Merge>& merges() const noexcept { return merges_; }

  /// Labels in [0, groups) after undoing the last groups-1 merges. Labels are
  /// numbered by first appearance in row order.
  std::vector<Index> cut(Index groups) const;

 private:
  Index n_ = 0;
  std::vector<Merge> merges_;
};

/// Hard 0/1 responsibilities from the Ward tree cut into G groups.
ResponsibilityMatrix ward_initialization(const WardDendrogram& tree, Index G);

}  // namespace mixboot
