#include "mixboot/params.hpp"

#include "mixboot/error.hpp"

#include <string>

namespace mixboot {

std::string_view to_string(ParamKind kind) noexcept {
  switch (kind) {
    case ParamKind::Tau: return "tau";
    case ParamKind::Mu: return "mu";
    case ParamKind::Sigma: return "sigma";
  }
  return "?";
}

namespace {

std::string one_based(Index i) { return std::to_string(i + 1); }

}  // namespace

ParamLayout::ParamLayout(Index G, Index p, CovarianceFamily family)
    : G_(G), p_(p), family_(family) {
  if (G < 1 || p < 1) throw Error(ErrorCode::InvalidArgument, "layout needs G >= 1 and p >= 1");
  for (Index g = 0; g < G; ++g)
    slots_.push_back({ParamKind::Tau, g, -1, -1, "tau[" + one_based(g) + "]"});
  for (Index g = 0; g < G; ++g)
    for (Index j = 0; j < p; ++j)
      slots_.push_back({ParamKind::Mu, g, j, -1, "mu[" + one_based(g) + "][" + one_based(j) + "]"});

  auto triangle = [&](Index g, const std::string& prefix) {
    for (Index j = 0; j < p; ++j)
      for (Index k = j; k < p; ++k)
        slots_.push_back({ParamKind::Sigma, g, j, k, prefix + "[" + one_based(j) + "," + one_based(k) + "]"});
  };
  switch (family) {
    case CovarianceFamily::FullVarying:
      for (Index g = 0; g < G; ++g) triangle(g, "sigma[" + one_based(g) + "]");
      break;
    case CovarianceFamily::FullEqual:
      triangle(-1, "sigma");
      break;
    case CovarianceFamily::SphericalVarying:
      for (Index g = 0; g < G; ++g)
        slots_.push_back({ParamKind::Sigma, g, -1, -1, "sigma[" + one_based(g) + "]"});
      break;
    case CovarianceFamily::SphericalEqual:
      slots_.push_back({ParamKind::Sigma, -1, -1, -1, "sigma"});
      break;
  }
}

std::optional<Index> ParamLayout::find(std::string_view name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].name == name) return static_cast<Index>(i);
  return std::nullopt;
}

Index ParamLayout::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorCode::UnknownSlot, "unknown parameter slot '" + std::string(name) + "'");
}

std::vector<Index> ParamLayout::slots_of(ParamKind kind) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].kind == kind) out.push_back(static_cast<Index>(i));
  return out;
}

ParamLayout layout_of(const MixtureModel& model) {
  return ParamLayout(model.components(), model.dimension(), model.family);
}

ParamVector flatten(const MixtureModel& model) {
  ParamVector out{layout_of(model), Vector(0)};
  out.values.resize(out.layout.size());
  for (Index i = 0; i < out.layout.size(); ++i) {
    const SlotInfo& s = out.layout.slot(i);
    const auto cov = [&](Index g) -> const Matrix& {
      return model.covariances[static_cast<std::size_t>(g < 0 ? 0 : g)];
    };
    switch (s.kind) {
      case ParamKind::Tau: out.values[i] = model.weights[s.component]; break;
      case ParamKind::Mu: out.values[i] = model.means(s.component, s.row); break;
      case ParamKind::Sigma:
        out.values[i] = s.row < 0 ? cov(s.component)(0, 0) : cov(s.component)(s.row, s.col);
        break;
    }
  }
  return out;
}

MixtureModel unflatten(const ParamVector& params) {
  const ParamLayout& layout = params.layout;
  if (params.values.size() != layout.size())
    throw Error(ErrorCode::InvalidArgument, "parameter vector does not match its layout");
  const Index G = layout.G();
  const Index p = layout.p();

  MixtureModel model;
  model.family = layout.family();
  model.weights.resize(G);
  model.means.resize(G, p);
  model.covariances.assign(static_cast<std::size_t>(G), Matrix::Zero(p, p));
  for (Index i = 0; i < layout.size(); ++i) {
    const SlotInfo& s = layout.slot(i);
    const double v = params.values[i];
    switch (s.kind) {
      case ParamKind::Tau: model.weights[s.component] = v; break;
      case ParamKind::Mu: model.means(s.component, s.row) = v; break;
      case ParamKind::Sigma:
        for (Index g = 0; g < G; ++g) {
          if (s.component >= 0 && s.component != g) continue;
          Matrix& c = model.covariances[static_cast<std::size_t>(g)];
          if (s.row < 0) {
            c = v * Matrix::Identity(p, p);
          } else {
            c(s.row, s.col) = v;
            c(s.col, s.row) = v;
          }
        }
        break;
    }
  }
  return model;
}

}  // namespace mixboot
