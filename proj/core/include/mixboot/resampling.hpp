#pragma once

#include "mixboot/params.hpp"
#include "mixboot/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mixboot {

enum class ResamplingMethod { Jackknife, Bootstrap, WeightedBootstrap };

inline constexpr std::array<ResamplingMethod, 3> kAllMethods = {
    ResamplingMethod::Jackknife, ResamplingMethod::Bootstrap, ResamplingMethod::WeightedBootstrap};

inline constexpr Index kDefaultReplicates = 200;

/// "jk", "bs" or "wlbs".
std::string_view to_string(ResamplingMethod method) noexcept;
std::optional<ResamplingMethod> parse_method(std::string_view name) noexcept;

/// How replicate k is formed from the original n observations.
struct ReplicateSpec {
  ResamplingMethod method = ResamplingMethod::Jackknife;
  Index index = 0;
  /// Jackknife: the single omitted row. Bootstrap: the n sampled rows.
  std::vector<Index> rows;
  /// Weighted bootstrap only; other methods use unit weights.
  std::optional<WeightVector> weights;
};

std::vector<ReplicateSpec> jackknife_replicates(Index n);
/// Replicate k depends only on (seed, k).
std::vector<ReplicateSpec> bootstrap_replicates(Index n, Index K, std::uint64_t seed);
/// Standard-exponential draws scaled to mean one, i.e. n times a uniform
/// Dirichlet vector. Replicate k depends only on (seed, k).
std::vector<ReplicateSpec> wlbs_replicates(Index n, Index K, std::uint64_t seed);
std::vector<ReplicateSpec> make_replicates(ResamplingMethod method, Index n, Index K,
                                           std::uint64_t seed);

/// Rows of the replicate's data set.
DataMatrix replicate_data(const DataMatrix& data, const ReplicateSpec& spec);
/// Full-data responsibilities restricted to the replicate's rows.
ResponsibilityMatrix replicate_init(const ResponsibilityMatrix& full_resp, const ReplicateSpec& spec);

/// Permutation `order` minimising sum_g |means[order[g]] - reference[g]|.
/// Exhaustive search, so intended for the small G of mixture models.
std::vector<Index> align_components(const Matrix& means, const Matrix& reference);
/// Same search in the Mahalanobis metric of `metric` (a covariance matrix),
/// so that no single coordinate's units dominate the match.
std::vector<Index> align_components(const Matrix& means, const Matrix& reference, const Matrix& metric);

/// sum_g tau_g Sigma_g.
Matrix pooled_covariance(const MixtureModel& model);

enum class ReplicateStatus { Fitted, NotFitted };

struct ReplicateOutcome {
  ReplicateStatus status = ReplicateStatus::NotFitted;
  /// Flattened parameters, aligned to the full-data labels. Empty if NotFitted.
  Vector params;
  bool relabeled = false;
  int iterations = 0;
  /// Largest drop of the EM objective between successive iterations.
  double worst_decrease = 0.0;
};

struct ResamplingOptions {
  EmConfig em;
  unsigned threads = 1;
};

/// Refits the structure of `full_fit` to one replicate, warm-started from the
/// full-data responsibilities.
ReplicateOutcome fit_replicate(const DataMatrix& data, const FitResult& full_fit,
                               const ReplicateSpec& spec, const EmConfig& config = {});

struct ReplicateSet {
  ResamplingMethod method = ResamplingMethod::Jackknife;
  /// Size of the original sample.
  Index n = 0;
  ParamLayout layout;
  /// K x d; NotFitted rows hold NaN.
  Matrix params;
  std::vector<ReplicateStatus> statuses;
  /// Replicates whose labels had to be permuted back onto the full fit.
  Index relabeled = 0;
  double worst_decrease = 0.0;

  Index K() const noexcept { return static_cast<Index>(statuses.size()); }
  Index fitted() const noexcept;
  std::vector<Index> fitted_rows() const;
};

/// Fits every spec. Results are stored by replicate index, so the set does
/// not depend on the thread count. Throws AllReplicatesFailed if none fit.
ReplicateSet run_replicates(const DataMatrix& data, const FitResult& full_fit,
                            ResamplingMethod method, const std::vector<ReplicateSpec>& specs,
                            const ResamplingOptions& options = {});

/// Generates K replicates (n for the jackknife) and fits them.
ReplicateSet run_resampling(const DataMatrix& data, const FitResult& full_fit,
                            ResamplingMethod method, Index K, std::uint64_t seed,
                            const ResamplingOptions& options = {});

}  // namespace mixboot
