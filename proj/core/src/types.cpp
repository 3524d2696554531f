#include "mixboot/types.hpp"

#include "mixboot/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mixboot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::NoModelFits: return "NoModelFits";
    case ErrorCode::AllReplicatesFailed: return "AllReplicatesFailed";
    case ErrorCode::InsufficientReplicates: return "InsufficientReplicates";
    case ErrorCode::UnknownSlot: return "UnknownSlot";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingFile: return "MissingFile";
  }
  return "Unknown";
}

std::string ParseError::decorate(const std::string& message, std::size_t row,
                                 std::size_t column) {
  if (row == 0 && column == 0) return message;
  std::string where = " (row " + std::to_string(row);
  if (column != 0) where += ", column " + std::to_string(column);
  return message + where + ")";
}

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "data matrix must have at least one row and column");
  if (!values_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "data matrix contains non-finite values");
}

DataMatrix DataMatrix::gather(std::span<const Index> rows) const {
  Matrix out(static_cast<Index>(rows.size()), p());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = values_.row(rows[i]);
  return DataMatrix(std::move(out));
}

DataMatrix DataMatrix::without_row(Index omitted) const {
  if (n() < 2) throw Error(ErrorCode::InvalidArgument, "cannot drop the only row");
  Matrix out(n() - 1, p());
  out.topRows(omitted) = values_.topRows(omitted);
  out.bottomRows(n() - 1 - omitted) = values_.bottomRows(n() - 1 - omitted);
  return DataMatrix(std::move(out));
}

std::string_view mclust_name(CovarianceFamily family) noexcept {
  switch (family) {
    case CovarianceFamily::SphericalEqual: return "EII";
    case CovarianceFamily::SphericalVarying: return "VII";
    case CovarianceFamily::FullEqual: return "EEE";
    case CovarianceFamily::FullVarying: return "VVV";
  }
  return "?";
}

std::optional<CovarianceFamily> parse_family(std::string_view name) noexcept {
  for (auto f : kAllFamilies)
    if (mclust_name(f) == name) return f;
  if (name == "SphericalEqual") return CovarianceFamily::SphericalEqual;
  if (name == "SphericalVarying") return CovarianceFamily::SphericalVarying;
  if (name == "FullEqual") return CovarianceFamily::FullEqual;
  if (name == "FullVarying") return CovarianceFamily::FullVarying;
  return std::nullopt;
}

Index covariance_parameter_count(CovarianceFamily family, Index G, Index p) noexcept {
  const Index full = p * (p + 1) / 2;
  switch (family) {
    case CovarianceFamily::SphericalEqual: return 1;
    case CovarianceFamily::SphericalVarying: return G;
    case CovarianceFamily::FullEqual: return full;
    case CovarianceFamily::FullVarying: return G * full;
  }
  return 0;
}

std::string_view to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::Converged: return "Converged";
    case FitStatus::MaxIterReached: return "MaxIterReached";
    case FitStatus::Degenerate: return "Degenerate";
  }
  return "?";
}

void MixtureModel::validate() const {
  const Index G = components();
  const Index p = dimension();
  if (G < 1) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one component");
  if (means.rows() != G || static_cast<Index>(covariances.size()) != G)
    throw Error(ErrorCode::InvalidArgument, "mixture parameter shapes disagree");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "mixing weights must sum to one");
  for (Index g = 0; g < G; ++g) {
    if (!(weights[g] > 0.0 && weights[g] < 1.0) && G > 1)
      throw Error(ErrorCode::InvalidArgument, "mixing weight outside (0,1)");
    const Matrix& s = covariances[static_cast<std::size_t>(g)];
    if (s.rows() != p || s.cols() != p)
      throw Error(ErrorCode::InvalidArgument, "covariance has the wrong shape");
    if (!s.allFinite() || !means.row(g).allFinite())
      throw Error(ErrorCode::InvalidArgument, "non-finite mixture parameters");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw Error(ErrorCode::InvalidArgument, "covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0)
      throw Error(ErrorCode::DegenerateCovariance, "covariance is not positive definite");
    if (shares_covariance(family) && g > 0 && s != covariances.front())
      throw Error(ErrorCode::InvalidArgument, "shared-covariance family with unequal covariances");
  }
}

MixtureModel MixtureModel::permuted(std::span<const Index> order) const {
  MixtureModel out;
  out.family = family;
  const Index G = components();
  out.weights.resize(G);
  out.means.resize(G, dimension());
  out.covariances.resize(static_cast<std::size_t>(G));
  for (Index g = 0; g < G; ++g) {
    const Index src = order[static_cast<std::size_t>(g)];
    out.weights[g] = weights[src];
    out.means.row(g) = means.row(src);
    out.covariances[static_cast<std::size_t>(g)] = covariances[static_cast<std::size_t>(src)];
  }
  return out;
}

ResponsibilityMatrix::ResponsibilityMatrix(Matrix z) : z_(std::move(z)) {
  if (z_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "responsibilities need a column");
  for (Index i = 0; i < z_.rows(); ++i) {
    if ((z_.row(i).array() < 0.0).any() || (z_.row(i).array() > 1.0).any())
      throw Error(ErrorCode::InvalidArgument, "responsibility outside [0,1]");
    if (std::abs(z_.row(i).sum() - 1.0) > 1e-10)
      throw Error(ErrorCode::InvalidArgument, "responsibility row does not sum to one");
  }
}

ResponsibilityMatrix ResponsibilityMatrix::from_labels(std::span<const Index> labels, Index G) {
  Matrix z = Matrix::Zero(static_cast<Index>(labels.size()), G);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= G)
      throw Error(ErrorCode::InvalidArgument, "label out of range");
    z(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return ResponsibilityMatrix(std::move(z));
}

ResponsibilityMatrix ResponsibilityMatrix::gather(std::span<const Index> rows) const {
  ResponsibilityMatrix out;
  out.z_.resize(static_cast<Index>(rows.size()), z_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.z_.row(static_cast<Index>(i)) = z_.row(rows[i]);
  return out;
}

ResponsibilityMatrix ResponsibilityMatrix::without_row(Index omitted) const {
  ResponsibilityMatrix out;
  out.z_.resize(z_.rows() - 1, z_.cols());
  out.z_.topRows(omitted) = z_.topRows(omitted);
  out.z_.bottomRows(z_.rows() - 1 - omitted) = z_.bottomRows(z_.rows() - 1 - omitted);
  return out;
}

ResponsibilityMatrix ResponsibilityMatrix::permuted_columns(std::span<const Index> order) const {
  ResponsibilityMatrix out;
  out.z_.resize(z_.rows(), z_.cols());
  for (Index g = 0; g < z_.cols(); ++g) out.z_.col(g) = z_.col(order[static_cast<std::size_t>(g)]);
  return out;
}

WeightVector::WeightVector(Vector w) : w_(std::move(w)) {
  if (w_.size() < 1) throw Error(ErrorCode::InvalidArgument, "weight vector is empty");
  if (!w_.allFinite() || (w_.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
  const double n = static_cast<double>(w_.size());
  if (std::abs(w_.sum() - n) > 1e-9 * std::max(1.0, n))
    throw Error(ErrorCode::InvalidArgument, "weights must sum to the number of observations");
}

WeightVector WeightVector::ones(Index n) { return WeightVector(Vector::Ones(n)); }

WeightVector WeightVector::normalized(Vector raw) {
  const double total = raw.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights have no mass");
  raw *= static_cast<double>(raw.size()) / total;
  return WeightVector(std::move(raw));
}

bool WeightVector::all_ones() const noexcept { return (w_.array() == 1.0).all(); }

}  // namespace mixboot
