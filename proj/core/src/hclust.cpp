#include "mixboot/hclust.hpp"

#include "mixboot/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace mixboot {

namespace {

struct DisjointSets {
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& px = parent[static_cast<std::size_t>(x)];
      px = parent[static_cast<std::size_t>(px)];
      x = px;
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<Index> parent;
};

}  // namespace

WardDendrogram::WardDendrogram(const Matrix& points) : n_(points.rows()) {
  if (n_ < 1) throw Error(ErrorCode::InvalidArgument, "cannot cluster an empty data set");

  // Lance-Williams recurrence on squared Euclidean distances.
  Matrix dist(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j) dist(i, j) = (points.row(i) - points.row(j)).squaredNorm();

  std::vector<Index> size(static_cast<std::size_t>(n_), 1);
  std::vector<bool> active(static_cast<std::size_t>(n_), true);
  std::vector<Index> chain;
  chain.reserve(static_cast<std::size_t>(n_));
  Index remaining = n_;

  while (remaining > 1) {
    if (chain.empty()) {
      const auto first = std::find(active.begin(), active.end(), true);
      chain.push_back(static_cast<Index>(first - active.begin()));
    }
    const Index a = chain.back();
    const Index previous = chain.size() >= 2 ? chain[chain.size() - 2] : -1;

    Index nearest = previous;
    double best = previous >= 0 ? dist(a, previous) : std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n_; ++k) {
      if (k == a || !active[static_cast<std::size_t>(k)]) continue;
      if (dist(a, k) < best) {
        best = dist(a, k);
        nearest = k;
      }
    }

    if (nearest != previous) {
      chain.push_back(nearest);
      continue;
    }

    chain.pop_back();
    chain.pop_back();
    const Index keep = std::min(a, nearest);
    const Index drop = std::max(a, nearest);
    merges_.push_back({keep, drop, best});

    const auto ni = static_cast<double>(size[static_cast<std::size_t>(keep)]);
    const auto nj = static_cast<double>(size[static_cast<std::size_t>(drop)]);
    for (Index k = 0; k < n_; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == keep || k == drop) continue;
      const auto nk = static_cast<double>(size[static_cast<std::size_t>(k)]);
      const double updated =
          ((ni + nk) * dist(keep, k) + (nj + nk) * dist(drop, k) - nk * best) / (ni + nj + nk);
      dist(keep, k) = updated;
      dist(k, keep) = updated;
    }
    size[static_cast<std::size_t>(keep)] += size[static_cast<std::size_t>(drop)];
    active[static_cast<std::size_t>(drop)] = false;
    --remaining;
  }

  std::stable_sort(merges_.begin(), merges_.end(),
                   [](const Merge& x, const Merge& y) { return x.height < y.height; });
}

std::vector<Index> WardDendrogram::cut(Index groups) const {
  if (groups < 1 || groups > n_)
    throw Error(ErrorCode::InvalidArgument, "cannot cut " + std::to_string(n_) +
                                                " observations into " + std::to_string(groups) + " groups");
  DisjointSets sets(n_);
  for (Index m = 0; m < n_ - groups; ++m) {
    const auto& merge = merges_[static_cast<std::size_t>(m)];
    sets.unite(merge.a, merge.b);
  }
  std::vector<Index> root_label(static_cast<std::size_t>(n_), -1);
  std::vector<Index> labels(static_cast<std::size_t>(n_));
  Index next = 0;
  for (Index i = 0; i < n_; ++i) {
    auto& label = root_label[static_cast<std::size_t>(sets.find(i))];
    if (label < 0) label = next++;
    labels[static_cast<std::size_t>(i)] = label;
  }
  return labels;
}

ResponsibilityMatrix ward_initialization(const WardDendrogram& tree, Index G) {
  const auto labels = tree.cut(G);
  return ResponsibilityMatrix::from_labels(labels, G);
}

}  // namespace mixboot
